#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kwseq/backward.hpp"
#include "kwseq/baselines.hpp"
#include "kwseq/error_matching.hpp"
#include "kwseq/evaluate.hpp"
#include "kwseq/scalar_min.hpp"

namespace kwseq {

/// Lagrange-optimal plan whose theta* minimises the ASN gap Delta.
struct ThetaStarResult {
    double theta_star;
    Plan plan;
    double delta;
    double lagrangian_value;
};

/// Default tolerance on theta* when minimising Delta. Delta rises roughly
/// linearly away from the optimum, so theta* is located well below the
/// 1e-4 scale on which Delta itself is judged.
inline constexpr double theta_star_tolerance = 1e-7;

/// theta* is searched in [theta0 + m, theta1 - m], m this fraction of
/// theta1 - theta0; the horizon bound grows without limit towards either end.
inline constexpr double theta_star_margin = 1e-4;

namespace detail {

template <class HorizonFor>
ThetaStarResult minimize_delta(const Hypotheses& hyp, double lambda0, double lambda1, HorizonFor horizon_for,
                               double tol) {
    auto gap = [&](double ts) {
        const LagrangeConfig cfg(hyp, ts, lambda0, lambda1);
        return delta(build_plan(cfg, horizon_for(cfg)));
    };
    const double margin = theta_star_margin * (hyp.theta1() - hyp.theta0());
    const double lo = hyp.theta0() + margin;
    const double hi = hyp.theta1() - margin;
    auto found = brent_minimize(gap, lo, hi, tol);
    // A minimum at the edge of the interval: one step closer to the hypothesis.
    const double edge = found.x - lo < 2.0 * tol ? hyp.theta0() : hi - found.x < 2.0 * tol ? hyp.theta1() : -1.0;
    if (edge >= 0.0) {
        const double x = edge + (edge == hyp.theta0() ? 0.1 : -0.1) * margin;
        try {
            const double fx = gap(x);
            if (fx < found.fx) {
                found.x = x;
                found.fx = fx;
            }
            ++found.evaluations;
        } catch (const std::overflow_error&) {
        }
    }
    const LagrangeConfig cfg(hyp, found.x, lambda0, lambda1);
    auto plan = build_plan(cfg, horizon_for(cfg));
    const double lagrangian = plan.lagrangian_value();
    return {found.x, std::move(plan), found.fx, lagrangian};
}

}  // namespace detail

/// Minimises Delta over theta* in (theta0, theta1), building each candidate
/// plan at the horizon bound for its (theta*, lambda0, lambda1).
inline ThetaStarResult optimize_theta_star(const Hypotheses& hyp, double lambda0, double lambda1,
                                           double tol = theta_star_tolerance) {
    if (!(lambda0 > 1.0 && lambda1 > 1.0)) {
        throw std::domain_error("optimize_theta_star requires lambda0 > 1 and lambda1 > 1");
    }
    return detail::minimize_delta(hyp, lambda0, lambda1, [](const LagrangeConfig& c) { return horizon_bound(c); },
                                  tol);
}

/// Same minimisation within the class of tests truncated at a fixed horizon.
inline ThetaStarResult optimize_theta_star_truncated(const Hypotheses& hyp, double lambda0, double lambda1,
                                                     int horizon, double tol = theta_star_tolerance) {
    if (horizon < 1) {
        throw std::invalid_argument("horizon must be at least 1");
    }
    return detail::minimize_delta(hyp, lambda0, lambda1, [horizon](const LagrangeConfig&) { return horizon; },
                                  tol);
}

inline bool relatively_close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

/// Option 2: doubles the horizon from 16 until successive Lagrangian values
/// agree to `rel` (1e-9 by default).
inline ThetaStarResult optimize_theta_star_growing(const Hypotheses& hyp, double lambda0, double lambda1,
                                                   double tol = theta_star_tolerance, double rel = 1e-9,
                                                   int max_horizon = 1 << 16) {
    auto prev = optimize_theta_star_truncated(hyp, lambda0, lambda1, 16, tol);
    for (int h = 32; h <= max_horizon; h *= 2) {
        auto cur = optimize_theta_star_truncated(hyp, lambda0, lambda1, h, tol);
        if (relatively_close(cur.lagrangian_value, prev.lagrangian_value, rel)) return cur;
        prev = std::move(cur);
    }
    throw std::runtime_error("Lagrangian did not stabilise below horizon " + std::to_string(max_horizon));
}

enum class Method { Option1, Option2 };

enum class SolveStatus {
    /// Errors within rel_tol and |Delta| within delta_tol.
    Solved,
    /// Errors within rel_tol but the gap exceeds delta_tol: the plan solves
    /// the modified problem at theta* only.
    ModifiedOnly,
    /// No multipliers in the searched region reach rel_tol; closest pair reported.
    Nearest,
    /// Evaluation cap hit before the search finished.
    NotConverged,
};

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Solved: return "solved";
        case SolveStatus::ModifiedOnly: return "modified-only";
        case SolveStatus::Nearest: return "nearest";
        default: return "not-converged";
    }
}

struct SolveTarget {
    Hypotheses hyp;
    double alpha_nominal;
    double beta_nominal;
    double rel_tol = 1e-3;
    double delta_tol = 1e-3;
    /// Cap on lambda updates (each one a theta* optimisation).
    int max_iterations = 400;
    double scalar_tol = theta_star_tolerance;

    void validate() const {
        if (!(alpha_nominal > 0.0 && alpha_nominal < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
        if (!(beta_nominal > 0.0 && beta_nominal < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
        if (!(delta_tol > 0.0)) throw std::invalid_argument("delta_tol must be positive");
        if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
    }
};

struct SolveReport {
    double theta_star;
    double lambda0;
    double lambda1;
    Plan plan;
    double alpha_achieved;
    double beta_achieved;
    double delta;
    double asn_at_star;
    int effective_horizon;
    int q99;
    int iterations;
    SolveStatus status;
};

class SolveNotConverged : public std::runtime_error {
public:
    SolveNotConverged(const std::string& what, SolveReport best)
        : std::runtime_error(what), best_(std::move(best)) {}
    const SolveReport& best() const noexcept { return best_; }

private:
    SolveReport best_;
};

/// Search region for ln(lambda), and the start of the lambda search.
inline constexpr double log_lambda_floor = 0.5;
inline constexpr double log_lambda_ceiling = 25.0;

inline double initial_log_lambda(double error_nominal) {
    return std::clamp(-2.0 * std::log(error_nominal), 6.0, 13.0);
}

/// Finds (lambda0, lambda1) whose Delta-minimising plan has error
/// probabilities closest to the nominal pair.
inline SolveReport solve_kw(const SolveTarget& target, Method method = Method::Option1) {
    target.validate();
    const auto& hyp = target.hyp;
    auto inner = [&](double l0, double l1) {
        return method == Method::Option1 ? optimize_theta_star(hyp, l0, l1, target.scalar_tol)
                                         : optimize_theta_star_growing(hyp, l0, l1, target.scalar_tol);
    };

    MatchOptions opt;
    opt.rel_tol = target.rel_tol;
    opt.max_evaluations = target.max_iterations;
    opt.lower = log_lambda_floor;
    opt.upper = log_lambda_ceiling;
    auto errors = [&](double u0, double u1) {
        const auto r = inner(std::exp(u0), std::exp(u1));
        return std::make_pair(type_one_error(r.plan), type_two_error(r.plan));
    };
    // A symmetric problem keeps lambda0 = lambda1 so the plan stays symmetric.
    const bool tied = hyp.symmetric() && target.alpha_nominal == target.beta_nominal;
    const auto found =
        tied ? match_error_tied(errors, initial_log_lambda(target.alpha_nominal), target.alpha_nominal,
                                target.beta_nominal, opt)
             : match_error_pair(errors, initial_log_lambda(target.alpha_nominal),
                                initial_log_lambda(target.beta_nominal), target.alpha_nominal, target.beta_nominal, opt);

    const double l0 = std::exp(found.best.u0);
    const double l1 = std::exp(found.best.u1);
    auto best = inner(l0, l1);
    const double asn_star = asn(best.plan, best.theta_star);
    const int q = quantile(stop_distribution(best.plan, best.theta_star), 0.99);
    SolveStatus status;
    if (found.best.closeness > target.rel_tol) {
        status = found.hit_cap ? SolveStatus::NotConverged : SolveStatus::Nearest;
    } else {
        status = std::abs(best.delta) <= target.delta_tol ? SolveStatus::Solved : SolveStatus::ModifiedOnly;
    }
    const int heff = best.plan.effective_horizon();
    SolveReport report{best.theta_star,   l0,   l1,   std::move(best.plan), found.best.alpha, found.best.beta,
                       best.delta,        asn_star, heff, q,                 found.evaluations, status};
    if (status == SolveStatus::NotConverged) {
        throw SolveNotConverged("lambda search hit its cap of " + std::to_string(target.max_iterations) +
                                    " updates; closest relative error " + std::to_string(found.best.closeness),
                                std::move(report));
    }
    return report;
}

/// One point of the (ln lambda0, ln lambda1) sweep.
struct GridRecord {
    double log_lambda0;
    double log_lambda1;
    double theta_star;
    double alpha;
    double beta;
    double asn_star;
    double asn_theta0;
    double asn_theta1;
    double delta;
    double fss_approx;
    double r;
    double r0;
    double r1;
};

inline GridRecord grid_point(const Hypotheses& hyp, double log_lambda0, double log_lambda1,
                             double tol = theta_star_tolerance) {
    const auto res = optimize_theta_star(hyp, std::exp(log_lambda0), std::exp(log_lambda1), tol);
    GridRecord g{};
    g.log_lambda0 = log_lambda0;
    g.log_lambda1 = log_lambda1;
    g.theta_star = res.theta_star;
    g.alpha = type_one_error(res.plan);
    g.beta = type_two_error(res.plan);
    g.asn_star = asn(res.plan, res.theta_star);
    g.asn_theta0 = asn(res.plan, hyp.theta0());
    g.asn_theta1 = asn(res.plan, hyp.theta1());
    g.delta = res.delta;
    // Plans that always stop with the same decision have an error of 0 or 1,
    // where the normal approximation is undefined.
    const bool interior = g.alpha > 0.0 && g.alpha < 1.0 && g.beta > 0.0 && g.beta < 1.0;
    g.fss_approx = interior ? fss_approx(hyp, g.alpha, g.beta) : std::numeric_limits<double>::quiet_NaN();
    g.r = g.fss_approx / g.asn_star;
    g.r0 = g.fss_approx / g.asn_theta0;
    g.r1 = g.fss_approx / g.asn_theta1;
    return g;
}

/// Equidistant points_per_axis x points_per_axis sweep of (ln lambda0,
/// ln lambda1) over [log_min, log_max]^2. Rows are ordered by (ln lambda0,
/// ln lambda1) whatever the number of worker threads.
inline std::vector<GridRecord> grid_sweep(const Hypotheses& hyp, double log_min, double log_max,
                                          int points_per_axis, unsigned jobs = 1,
                                          double tol = theta_star_tolerance) {
    if (points_per_axis < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
    if (!(log_min < log_max) || !(log_min > 0.0)) {
        throw std::invalid_argument("grid range must satisfy 0 < log_min < log_max");
    }
    const int total = points_per_axis * points_per_axis;
    auto coordinate = [&](int i) {
        if (i == points_per_axis - 1) return log_max;
        return log_min + (log_max - log_min) * i / (points_per_axis - 1);
    };
    std::vector<std::optional<GridRecord>> rows(static_cast<std::size_t>(total));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int k = next++; k < total; k = next++) {
            try {
                rows[static_cast<std::size_t>(k)] =
                    grid_point(hyp, coordinate(k / points_per_axis), coordinate(k % points_per_axis), tol);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = total;
            }
        }
    };
    jobs = std::max(1u, jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<GridRecord> out;
    out.reserve(rows.size());
    for (auto& r : rows) out.push_back(*r);
    return out;
}

}  // namespace kwseq
