#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kwseq/error_matching.hpp"
#include "kwseq/evaluate.hpp"
#include "kwseq/model.hpp"

namespace kwseq {

// ---------------------------------------------------------------------------
// Standard normal quantile

/// Phi^{-1}(p) by Acklam's rational approximation followed by one Halley
/// refinement step against erfc; absolute error well below 1e-9.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal quantile requires p in (0,1)");
    }
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

// ---------------------------------------------------------------------------
// Fixed-sample-size baselines

struct FixedSampleTest {
    int n;
    /// Reject H0 iff S_n >= threshold.
    int threshold;
};

/// Smallest n admitting a non-randomised success-count test with
/// P_theta0(S_n >= k) <= alpha_bound and P_theta1(S_n < k) <= beta_bound.
inline FixedSampleTest fss_exact(const Hypotheses& hyp, double alpha_bound, double beta_bound) {
    detail::require_probability(alpha_bound, "alpha bound");
    detail::require_probability(beta_bound, "beta bound");
    const double t0 = hyp.theta0();
    const double t1 = hyp.theta1();
    for (int n = 1;; ++n) {
        auto lf = LogFactorials::at_least(n);
        const StageWeights g0(t0, *lf);
        const StageWeights g1(t1, *lf);
        // upper0[k] = P_theta0(S >= k); lower1 accumulates P_theta1(S < k).
        std::vector<double> upper0(static_cast<std::size_t>(n) + 2, 0.0);
        for (int k = n; k >= 0; --k) upper0[k] = upper0[k + 1] + g0(n, k);
        double lower1 = 0.0;
        for (int k = 0; k <= n + 1; ++k) {
            if (k > 0) lower1 += g1(n, k - 1);
            if (lower1 > beta_bound) break;
            if (upper0[k] <= alpha_bound) return {n, k};
        }
        if (n > 10'000'000) {
            throw std::runtime_error("fss_exact: no sample size below 1e7");
        }
    }
}

/// Normal-approximation fixed sample size (not rounded).
inline double fss_approx(const Hypotheses& hyp, double alpha_bound, double beta_bound) {
    const double t0 = hyp.theta0();
    const double t1 = hyp.theta1();
    const double za = normal_quantile(1.0 - alpha_bound);
    const double zb = normal_quantile(1.0 - beta_bound);
    const double root = (za * std::sqrt(t0 * (1.0 - t0)) + zb * std::sqrt(t1 * (1.0 - t1))) / (t1 - t0);
    return root * root;
}

// ---------------------------------------------------------------------------
// SPRT

/// Wald's SPRT on the Bernoulli log-likelihood-ratio walk. Continues while
/// log_b < LLR < log_a; accepts H0 on reaching log_b or below, rejects on
/// reaching log_a or above.
struct SprtDesign {
    Hypotheses hyp;
    double log_b;
    double log_a;

    SprtDesign(Hypotheses h, double lower, double upper) : hyp(h), log_b(lower), log_a(upper) {
        if (!(lower < 0.0 && upper > 0.0)) {
            throw std::invalid_argument("SPRT endpoints require log_b < 0 < log_a");
        }
    }

    double llr(int n, int s) const {
        return s * log_likelihood_ratio_increment(hyp, 1) + (n - s) * log_likelihood_ratio_increment(hyp, 0);
    }

    bool continues(int n, int s) const {
        const double v = llr(n, s);
        return log_b < v && v < log_a;
    }
};

struct SprtCharacteristics {
    double theta;
    double oc;
    double asn;
    int q99;
    /// Probability mass not absorbed when the recursion stopped.
    double residual_mass;
    /// Last stage propagated.
    int stages;
    /// Bound on the ASN truncation error: residual mass times (last stage + 1).
    double asn_error_bound;
    std::vector<double> stop_dist;
};

inline constexpr double sprt_residual_tolerance = 1e-12;
inline constexpr int sprt_default_stage_cap = 1'000'000;

class SprtNotAbsorbed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exact-to-tolerance OC, ASN and stopping distribution of an SPRT under
/// theta, by forward propagation of reach masses on the (n, s) lattice until
/// the un-absorbed mass falls below 1e-12.
inline SprtCharacteristics sprt_characteristics(const SprtDesign& design, double theta,
                                                int stage_cap = sprt_default_stage_cap) {
    detail::require_probability(theta, "theta");
    const double up = log_likelihood_ratio_increment(design.hyp, 1);
    const double down = log_likelihood_ratio_increment(design.hyp, 0);

    // Mass lives on a band of s values; track it sparsely as [lo, hi].
    std::vector<double> reach{1.0};
    int lo = 0;
    double remaining = 1.0;
    double accepted = 0.0;
    double asn_sum = 0.0;
    std::vector<double> dist;
    int n = 0;
    while (remaining >= sprt_residual_tolerance) {
        if (n >= stage_cap) {
            throw SprtNotAbsorbed("SPRT residual mass " + std::to_string(remaining) + " after " +
                                  std::to_string(n) + " stages");
        }
        // Step to stage n + 1: s -> s (failure) or s + 1 (success).
        std::vector<double> next(reach.size() + 1, 0.0);
        for (std::size_t i = 0; i < reach.size(); ++i) {
            next[i] += reach[i] * (1.0 - theta);
            next[i + 1] += reach[i] * theta;
        }
        ++n;
        double stopped = 0.0;
        int new_lo = -1;
        int new_hi = -1;
        for (std::size_t i = 0; i < next.size(); ++i) {
            const int s = lo + static_cast<int>(i);
            if (next[i] == 0.0) continue;
            const double v = s * up + (n - s) * down;
            if (v <= design.log_b) {
                accepted += next[i];
                stopped += next[i];
                next[i] = 0.0;
            } else if (v >= design.log_a) {
                stopped += next[i];
                next[i] = 0.0;
            } else {
                if (new_lo < 0) new_lo = s;
                new_hi = s;
            }
        }
        dist.push_back(stopped);
        asn_sum += n * stopped;
        if (new_lo < 0) {
            reach.clear();
            remaining = 0.0;
            break;
        }
        reach.assign(next.begin() + (new_lo - lo), next.begin() + (new_hi - lo) + 1);
        lo = new_lo;
        remaining = 0.0;
        for (double m : reach) remaining += m;
    }

    SprtCharacteristics out;
    out.theta = theta;
    out.oc = accepted;
    out.asn = asn_sum;
    out.residual_mass = remaining;
    out.stages = n;
    out.asn_error_bound = remaining * (n + 1);
    // The cut-off mass is at most 1e-12, so normalise before taking the quantile.
    double cumulative = 0.0;
    out.q99 = n;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        cumulative += dist[i];
        if (cumulative >= 0.99) {
            out.q99 = static_cast<int>(i) + 1;
            break;
        }
    }
    out.stop_dist = std::move(dist);
    return out;
}

/// Monte Carlo run of an SPRT; the walk is evaluated with the same lattice
/// expression as the exact evaluator.
inline SimulationResult simulate_sprt(const SprtDesign& design, double theta, long long replications,
                                      std::uint64_t seed, unsigned jobs = 1) {
    detail::require_probability(theta, "theta");
    const double up = log_likelihood_ratio_increment(design.hyp, 1);
    const double down = log_likelihood_ratio_increment(design.hyp, 0);
    return detail::run_blocks(replications, seed, jobs, [&](std::mt19937_64& rng) {
        int s = 0;
        for (int n = 1;; ++n) {
            if (detail::uniform01(rng) < theta) ++s;
            const double v = s * up + (n - s) * down;
            if (v <= design.log_b) return std::pair<bool, int>{true, n};
            if (v >= design.log_a) return std::pair<bool, int>{false, n};
        }
    });
}

enum class MatchStatus { Matched, Nearest };

struct SprtMatch {
    SprtDesign design;
    double alpha;
    double beta;
    MatchStatus status;
    int evaluations;
};

/// SPRT endpoints whose exact error probabilities come closest to the
/// nominal pair, starting from Wald's approximate boundaries.
///
/// With theta0 = 1 - theta1 the walk moves by +-c, c = ln(theta1/theta0), so
/// only endpoints between consecutive multiples of c give distinct tests and
/// equal nominal errors are matched over the symmetric designs
/// (-(k+1/2)c, (k+1/2)c). Exact matching is then generally impossible and the
/// nearest attainable design is returned with MatchStatus::Nearest.
inline SprtMatch sprt_match(const Hypotheses& hyp, double alpha_nominal, double beta_nominal,
                            double rel_tol = 1e-3, int max_evaluations = 200) {
    detail::require_probability(alpha_nominal, "alpha");
    detail::require_probability(beta_nominal, "beta");

    auto errors = [&](double lower, double upper) {
        const SprtDesign d(hyp, lower, upper);
        return std::make_pair(1.0 - sprt_characteristics(d, hyp.theta0()).oc,
                              sprt_characteristics(d, hyp.theta1()).oc);
    };

    if (hyp.symmetric() && alpha_nominal == beta_nominal) {
        const double c = log_likelihood_ratio_increment(hyp, 1);
        const double wald = std::log((1.0 - alpha_nominal) / alpha_nominal);
        const int centre = static_cast<int>(std::floor(wald / c));
        int evaluations = 0;
        double best_c = std::numeric_limits<double>::infinity();
        double best_half = 0.0;
        std::pair<double, double> best_e{1.0, 1.0};
        for (int k = std::max(0, centre - 3); k <= centre + 3; ++k) {
            const double half = (k + 0.5) * c;
            const auto e = errors(-half, half);
            ++evaluations;
            const double cl = error_closeness(e.first, e.second, alpha_nominal, beta_nominal);
            if (cl < best_c) {
                best_c = cl;
                best_half = half;
                best_e = e;
            }
        }
        return {SprtDesign(hyp, -best_half, best_half), best_e.first, best_e.second,
                best_c <= rel_tol ? MatchStatus::Matched : MatchStatus::Nearest, evaluations};
    }

    MatchOptions opt;
    opt.rel_tol = rel_tol;
    opt.max_evaluations = max_evaluations;
    opt.initial_pattern_step = 0.01;
    opt.lower = 1e-6;
    // u0 = upper endpoint (alpha falls as it grows), u1 = -lower endpoint.
    const auto found = match_error_pair([&](double u0, double u1) { return errors(-u1, u0); },
                                        std::log((1.0 - beta_nominal) / alpha_nominal),
                                        -std::log(beta_nominal / (1.0 - alpha_nominal)), alpha_nominal,
                                        beta_nominal, opt);
    const auto& b = found.best;
    return {SprtDesign(hyp, -b.u1, b.u0), b.alpha, b.beta,
            b.closeness <= rel_tol ? MatchStatus::Matched : MatchStatus::Nearest, found.evaluations};
}

// ---------------------------------------------------------------------------
// Efficiency ratios

struct EfficiencyRatios {
    double r_plan;
    double qr_plan;
    std::optional<double> r_sprt;
    std::optional<double> qr_sprt;
};

inline EfficiencyRatios efficiency_ratios(int fss, double asn_plan, int q99_plan,
                                          std::optional<std::pair<double, int>> sprt_asn_q99 = std::nullopt) {
    EfficiencyRatios r{fss / asn_plan, static_cast<double>(fss) / q99_plan, std::nullopt, std::nullopt};
    if (sprt_asn_q99) {
        r.r_sprt = fss / sprt_asn_q99->first;
        r.qr_sprt = static_cast<double>(fss) / sprt_asn_q99->second;
    }
    return r;
}

inline EfficiencyRatios efficiency_ratios(int fss, const Characteristics& plan_chars,
                                          double asn_at_star,
                                          const SprtCharacteristics* sprt_chars = nullptr) {
    std::optional<std::pair<double, int>> s;
    if (sprt_chars) s = std::make_pair(sprt_chars->asn, sprt_chars->q99);
    return efficiency_ratios(fss, asn_at_star, plan_chars.q99, s);
}

}  // namespace kwseq
