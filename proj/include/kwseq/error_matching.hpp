#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace kwseq {

/// Settings of the two-parameter error matcher.
struct MatchOptions {
    double rel_tol = 1e-3;
    /// Cap on objective evaluations (each one a full design + characteristics).
    int max_evaluations = 400;
    /// Quasi-Newton steps are clipped to this infinity norm.
    double max_step = 1.0;
    /// First and last pattern-search step lengths.
    double initial_pattern_step = 0.02;
    double min_pattern_step = 1e-5;
    /// Once within rel_tol, keep polishing towards the closest attainable
    /// pair rather than stopping at the first acceptable one.
    bool polish_within_tolerance = true;
    /// Box constraint on both parameters.
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

struct MatchPoint {
    double u0 = 0.0;
    double u1 = 0.0;
    double alpha = 1.0;
    double beta = 1.0;
    double closeness = std::numeric_limits<double>::infinity();
};

struct MatchOutcome {
    MatchPoint best;
    int evaluations = 0;
    /// Stopped on the evaluation cap rather than by exhausting the search.
    bool hit_cap = false;
};

/// max(|alpha/alpha_n - 1|, |beta/beta_n - 1|).
inline double error_closeness(double alpha, double beta, double alpha_nominal, double beta_nominal) {
    return std::max(std::abs(alpha / alpha_nominal - 1.0), std::abs(beta / beta_nominal - 1.0));
}

/// Finds (u0, u1) whose error pair (alpha, beta) = eval(u0, u1) is closest to
/// the nominal pair. Both errors must be decreasing in "their" parameter:
/// alpha in u0, beta in u1.
///
/// Stage one drives r = (ln alpha/alpha_n, ln beta/beta_n) to zero with
/// damped Broyden secant steps started from the Jacobian -I. Because the
/// errors of discrete tests are step functions of the parameters, stage two
/// polishes with a shrinking local grid until its spacing falls below
/// min_pattern_step.
template <class Eval>
MatchOutcome match_error_pair(Eval&& eval, double u0, double u1, double alpha_nominal, double beta_nominal,
                              const MatchOptions& opt = {}) {
    MatchOutcome out;
    std::map<std::pair<double, double>, MatchPoint> cache;
    auto clamp = [&](double u) { return std::clamp(u, opt.lower, opt.upper); };
    auto probe = [&](double a, double b) -> MatchPoint {
        a = clamp(a);
        b = clamp(b);
        if (auto it = cache.find({a, b}); it != cache.end()) return it->second;
        const auto [alpha, beta] = eval(a, b);
        ++out.evaluations;
        MatchPoint p{a, b, alpha, beta, error_closeness(alpha, beta, alpha_nominal, beta_nominal)};
        cache.emplace(std::make_pair(a, b), p);
        if (p.closeness < out.best.closeness) out.best = p;
        return p;
    };
    auto budget_left = [&] {
        if (out.evaluations >= opt.max_evaluations) {
            out.hit_cap = true;
            return false;
        }
        return true;
    };
    auto residual = [&](const MatchPoint& p) {
        return std::array<double, 2>{std::log(std::max(p.alpha, 1e-300) / alpha_nominal),
                                     std::log(std::max(p.beta, 1e-300) / beta_nominal)};
    };
    auto done = [&] { return !opt.polish_within_tolerance && out.best.closeness <= opt.rel_tol; };

    // Stage one: Broyden.
    std::array<double, 4> jac{-1.0, 0.0, 0.0, -1.0};
    MatchPoint cur = probe(u0, u1);
    auto r = residual(cur);
    int stalls = 0;
    while (!done() && budget_left() && stalls < 3) {
        const double det = jac[0] * jac[3] - jac[1] * jac[2];
        double d0 = -(jac[3] * r[0] - jac[1] * r[1]) / det;
        double d1 = -(-jac[2] * r[0] + jac[0] * r[1]) / det;
        const double norm = std::max(std::abs(d0), std::abs(d1));
        if (norm > opt.max_step) {
            d0 *= opt.max_step / norm;
            d1 *= opt.max_step / norm;
        }
        const double before = out.best.closeness;
        const MatchPoint nxt = probe(cur.u0 + d0, cur.u1 + d1);
        const auto nr = residual(nxt);
        const double s0 = nxt.u0 - cur.u0;
        const double s1 = nxt.u1 - cur.u1;
        const double ss = s0 * s0 + s1 * s1;
        if (ss == 0.0) break;
        const double y0 = nr[0] - r[0] - (jac[0] * s0 + jac[1] * s1);
        const double y1 = nr[1] - r[1] - (jac[2] * s0 + jac[3] * s1);
        jac[0] += y0 * s0 / ss;
        jac[1] += y0 * s1 / ss;
        jac[2] += y1 * s0 / ss;
        jac[3] += y1 * s1 / ss;
        // A flat or sign-flipped secant comes from a plateau of the step
        // function; fall back to the model slope.
        if (!(jac[0] < 0.0 && jac[3] < 0.0) || std::abs(jac[0] * jac[3] - jac[1] * jac[2]) < 1e-3) {
            jac = {-1.0, 0.0, 0.0, -1.0};
        }
        cur = nxt;
        r = nr;
        stalls = out.best.closeness < 0.5 * before ? 0 : stalls + 1;
        if (ss < opt.min_pattern_step * opt.min_pattern_step) break;
    }

    // Stage two: local grid search around the best point. A 5x5 grid at
    // spacing h recentres on any improvement; otherwise h shrinks fourfold.
    double step = std::clamp(4.0 * out.best.closeness, opt.min_pattern_step, opt.initial_pattern_step);
    while (!done() && step >= opt.min_pattern_step && budget_left()) {
        const MatchPoint centre = out.best;
        for (int i = -2; i <= 2 && budget_left() && !done(); ++i) {
            for (int j = -2; j <= 2 && budget_left() && !done(); ++j) {
                if (i != 0 || j != 0) probe(centre.u0 + i * step, centre.u1 + j * step);
            }
        }
        if (!(out.best.closeness < centre.closeness)) step *= 0.25;
    }
    return out;
}

/// One-parameter version for a tied pair (u0 = u1 = u): secant steps on
/// ln(alpha/alpha_n) + ln(beta/beta_n), then a shrinking 9-point line search.
template <class Eval>
MatchOutcome match_error_tied(Eval&& eval, double u, double alpha_nominal, double beta_nominal,
                              const MatchOptions& opt = {}) {
    MatchOutcome out;
    std::map<double, MatchPoint> cache;
    auto probe = [&](double x) -> MatchPoint {
        x = std::clamp(x, opt.lower, opt.upper);
        if (auto it = cache.find(x); it != cache.end()) return it->second;
        const auto [alpha, beta] = eval(x, x);
        ++out.evaluations;
        MatchPoint p{x, x, alpha, beta, error_closeness(alpha, beta, alpha_nominal, beta_nominal)};
        cache.emplace(x, p);
        if (p.closeness < out.best.closeness) out.best = p;
        return p;
    };
    auto budget_left = [&] {
        if (out.evaluations >= opt.max_evaluations) {
            out.hit_cap = true;
            return false;
        }
        return true;
    };
    auto residual = [&](const MatchPoint& p) {
        return std::log(std::max(p.alpha, 1e-300) / alpha_nominal) + std::log(std::max(p.beta, 1e-300) / beta_nominal);
    };
    auto done = [&] { return !opt.polish_within_tolerance && out.best.closeness <= opt.rel_tol; };

    double slope = -2.0;
    MatchPoint cur = probe(u);
    double r = residual(cur);
    int stalls = 0;
    while (!done() && budget_left() && stalls < 3) {
        const double d = std::clamp(-r / slope, -opt.max_step, opt.max_step);
        const double before = out.best.closeness;
        const MatchPoint nxt = probe(cur.u0 + d);
        const double nr = residual(nxt);
        const double sx = nxt.u0 - cur.u0;
        if (sx == 0.0) break;
        slope = (nr - r) / sx;
        if (!(slope < -1e-3)) slope = -2.0;
        cur = nxt;
        r = nr;
        stalls = out.best.closeness < 0.5 * before ? 0 : stalls + 1;
        if (std::abs(sx) < opt.min_pattern_step) break;
    }

    double step = std::clamp(4.0 * out.best.closeness, opt.min_pattern_step, opt.initial_pattern_step);
    while (!done() && step >= opt.min_pattern_step && budget_left()) {
        const MatchPoint centre = out.best;
        for (int i = -4; i <= 4 && budget_left() && !done(); ++i) {
            if (i != 0) probe(centre.u0 + i * step);
        }
        if (!(out.best.closeness < centre.closeness)) step *= 0.25;
    }
    return out;
}

}  // namespace kwseq
