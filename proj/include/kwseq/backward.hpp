#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "kwseq/model.hpp"
#include "kwseq/plan.hpp"

namespace kwseq {

/// Scaled value table Uhat_n(s) = C(n,s) U_n(s) over the full triangle.
class ValueTable {
public:
    explicit ValueTable(int horizon) : horizon_(horizon), values_(triangle_size(horizon), 0.0) {}

    int horizon() const noexcept { return horizon_; }
    double operator()(int n, int s) const { return values_[triangle_offset(n) + static_cast<std::size_t>(s)]; }
    double& operator()(int n, int s) { return values_[triangle_offset(n) + static_cast<std::size_t>(s)]; }

private:
    int horizon_;
    std::vector<double> values_;
};

/// Upper bound on the horizon of a Lagrange-optimal test, specialised to the
/// Bernoulli family. Requires lambda0 > 1 and lambda1 > 1.
inline int horizon_bound(const LagrangeConfig& config) {
    if (!(config.lambda0 > 1.0 && config.lambda1 > 1.0)) {
        throw std::domain_error("horizon bound requires lambda0 > 1 and lambda1 > 1");
    }
    const double t0 = config.hyp.theta0();
    const double t1 = config.hyp.theta1();
    const double ts = config.theta_star;

    // a * ln(f*(x)/f0(x)) + b * ln(f*(x)/f1(x)) = 1 for x = 1 (first row) and x = 0.
    const double m11 = std::log(ts / t0);
    const double m12 = std::log(ts / t1);
    const double m21 = std::log1p(-ts) - std::log1p(-t0);
    const double m22 = std::log1p(-ts) - std::log1p(-t1);
    const double det = m11 * m22 - m12 * m21;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
        throw std::runtime_error("horizon bound: singular linear system");
    }
    const double a = (m22 - m12) / det;
    const double b = (m11 - m21) / det;

    // For theta0 < theta1, f0(X) < f1(X) iff X = 1.
    const double w0 = 1.0 / (1.0 - t0 - (1.0 - t1));
    const double threshold = a * std::log(config.lambda0) + b * std::log(config.lambda1) - (a + b) * std::log(w0);
    if (threshold <= 1.0) return 1;
    const double n = std::ceil(threshold);
    if (n > 1e8) {
        throw std::overflow_error("horizon bound exceeds 1e8 stages");
    }
    return static_cast<int>(n);
}

namespace detail {

/// G_theta^n(s) for the three densities of a Lagrange problem. With
/// theta1 = 1 - theta0 the theta1 weight is the mirrored theta0 weight and a
/// theta* of 1/2 is folded onto s <= n/2, keeping symmetric plans exactly symmetric.
class LagrangeWeights {
public:
    LagrangeWeights(const LagrangeConfig& config, const LogFactorials::Table& lf)
        : g0_(config.hyp.theta0(), lf),
          g1_(config.hyp.theta1(), lf),
          gs_(config.theta_star, lf),
          mirrored_(config.hyp.symmetric()),
          folded_(config.theta_star == 0.5) {}

    double g0(int n, int s) const { return g0_(n, s); }
    double g1(int n, int s) const { return mirrored_ ? g0_(n, n - s) : g1_(n, s); }
    double gs(int n, int s) const { return gs_(n, folded_ ? std::min(s, n - s) : s); }

private:
    StageWeights g0_, g1_, gs_;
    bool mirrored_;
    bool folded_;
};

/// Scaled backward induction restricted to the states where continuing can
/// compete with stopping: those with a child in the next stage's continuation
/// set and the one whose children straddle the accept/reject boundary.
/// Elsewhere the value is the smaller stopping cost and the decision follows
/// the stage's accept/reject threshold. Calls on_stage(n, value_at) after each
/// stage, value_at(s) giving the scaled value of (n, s).
template <class OnStage>
Plan backward_induction(const LagrangeConfig& config, int horizon, OnStage&& on_stage) {
    if (horizon < 1) {
        throw std::invalid_argument("horizon must be at least 1");
    }
    auto lf = LogFactorials::at_least(horizon + 1);
    const LagrangeWeights w(config, *lf);
    const double l0 = config.lambda0;
    const double l1 = config.lambda1;

    // Far from the continuation region both stopping weights can underflow;
    // the decision there uses ln(accept cost / reject cost) directly.
    const double inc1 = log_likelihood_ratio_increment(config.hyp, 1);
    const double inc0 = config.hyp.symmetric() ? -inc1 : log_likelihood_ratio_increment(config.hyp, 0);
    const double log_l = l0 == l1 ? 0.0 : std::log(l1) - std::log(l0);

    struct Stop {
        double cost;
        bool accept;
    };
    auto stop = [&](int n, int s) {
        const double reject_cost = l0 * w.g0(n, s);
        const double accept_cost = l1 * w.g1(n, s);
        const bool accept = reject_cost < DBL_MIN && accept_cost < DBL_MIN
                                ? log_l + s * inc1 + (n - s) * inc0 <= 0.0
                                : reject_cost >= accept_cost;
        return Stop{std::min(reject_cost, accept_cost), accept};
    };
    // First s at which stopping rejects; accept below it.
    auto threshold = [&](int n) {
        const double x = (-log_l - n * inc0) / (inc1 - inc0);
        int k = static_cast<int>(std::clamp(std::floor(x) + 1.0, 0.0, n + 1.0));
        while (k > 0 && !stop(n, k - 1).accept) --k;
        while (k <= n && stop(n, k).accept) ++k;
        return k;
    };

    struct Stage {
        int n = 0;
        int lo = 1, hi = 0;            // computed band
        int cont_lo = 1, cont_hi = 0;  // continuing states within it
        int k = 0;                     // stopping threshold
        std::vector<double> values;    // scaled values on the band
    };
    auto value_at = [&](const Stage& st, int s) {
        return s >= st.lo && s <= st.hi ? st.values[static_cast<std::size_t>(s - st.lo)] : stop(st.n, s).cost;
    };
    auto append_stopping = [](ActionRuns& runs, int from, int to, int k) {
        if (from > to) return;
        if (from < k) runs.append(from, Action::AcceptH0);
        if (std::max(from, k) <= to) runs.append(std::max(from, k), Action::RejectH0);
    };

    ActionRuns rows_descending;
    Stage next;
    next.n = horizon;
    next.k = threshold(horizon);
    rows_descending.begin_row();
    append_stopping(rows_descending, 0, horizon, next.k);
    on_stage(horizon, [&](int s) { return value_at(next, s); });

    Stage cur;
    for (int n = horizon - 1; n >= 1; --n) {
        cur.n = n;
        cur.k = threshold(n);
        cur.lo = n + 1;
        cur.hi = -1;
        if (next.cont_lo <= next.cont_hi) {
            cur.lo = std::max(0, next.cont_lo - 1);
            cur.hi = std::min(n, next.cont_hi);
        }
        if (next.k >= 1 && next.k <= n + 1) {
            cur.lo = std::min(cur.lo, next.k - 1);
            cur.hi = std::max(cur.hi, next.k - 1);
        }
        cur.cont_lo = n + 1;
        cur.cont_hi = -1;
        cur.values.clear();

        rows_descending.begin_row();
        if (cur.lo > cur.hi) {
            append_stopping(rows_descending, 0, n, cur.k);
        } else {
            append_stopping(rows_descending, 0, cur.lo - 1, cur.k);
        }
        const double inv = 1.0 / (n + 1);
        for (int s = cur.lo; s <= cur.hi; ++s) {
            const Stop st = stop(n, s);
            const double continue_cost =
                w.gs(n, s) + value_at(next, s + 1) * ((s + 1) * inv) + value_at(next, s) * ((n + 1 - s) * inv);
            Action a = st.accept ? Action::AcceptH0 : Action::RejectH0;
            if (continue_cost < st.cost) {
                a = Action::Continue;
                cur.cont_lo = std::min(cur.cont_lo, s);
                cur.cont_hi = std::max(cur.cont_hi, s);
            }
            cur.values.push_back(std::min(st.cost, continue_cost));
            rows_descending.append(s, a);
        }
        if (cur.lo <= cur.hi) append_stopping(rows_descending, cur.hi + 1, n, cur.k);
        std::swap(cur, next);
        on_stage(n, [&](int s) { return value_at(next, s); });
    }

    const double lagrangian = 1.0 + value_at(next, 0) + value_at(next, 1);
    return Plan(config, horizon, rows_descending.reversed(), lagrangian);
}

}  // namespace detail

/// Lagrange-optimal truncated test for the given (theta*, lambda0, lambda1).
/// Ties between stopping and continuing stop; ties between the two decisions accept H0.
inline Plan build_plan(const LagrangeConfig& config, int horizon) {
    return detail::backward_induction(config, horizon, [](int, const auto&) {});
}

/// As build_plan, additionally returning the full scaled value table.
inline std::pair<Plan, ValueTable> build_plan_with_values(const LagrangeConfig& config, int horizon) {
    ValueTable table(horizon);
    auto plan = detail::backward_induction(config, horizon, [&](int n, const auto& value_at) {
        for (int s = 0; s <= n; ++s) table(n, s) = value_at(s);
    });
    return {std::move(plan), std::move(table)};
}

}  // namespace kwseq
