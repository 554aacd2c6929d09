#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kwseq/model.hpp"

namespace kwseq {

enum class Action : std::uint8_t { Continue = 0, AcceptH0 = 1, RejectH0 = 2 };

/// Exchanges AcceptH0 and RejectH0; Continue is fixed.
constexpr Action swapped(Action a) noexcept {
    switch (a) {
        case Action::AcceptH0: return Action::RejectH0;
        case Action::RejectH0: return Action::AcceptH0;
        default: return Action::Continue;
    }
}

constexpr char action_code(Action a) noexcept {
    switch (a) {
        case Action::AcceptH0: return 'A';
        case Action::RejectH0: return 'R';
        default: return 'C';
    }
}

inline Action action_from_code(char c) {
    switch (c) {
        case 'C': return Action::Continue;
        case 'A': return Action::AcceptH0;
        case 'R': return Action::RejectH0;
        default: throw std::invalid_argument(std::string("unknown action code '") + c + "'");
    }
}

/// Parameters of the Lagrangian N(theta*) + lambda0 * alpha + lambda1 * beta.
struct LagrangeConfig {
    Hypotheses hyp;
    double theta_star;
    double lambda0;
    double lambda1;

    LagrangeConfig(Hypotheses h, double ts, double l0, double l1)
        : hyp(h), theta_star(ts), lambda0(l0), lambda1(l1) {
        if (!(ts > hyp.theta0() && ts < hyp.theta1())) {
            throw std::invalid_argument("theta_star must lie strictly between theta0 and theta1");
        }
        if (!(l0 >= 0.0) || !(l1 >= 0.0) || !std::isfinite(l0) || !std::isfinite(l1)) {
            throw std::invalid_argument("Lagrange multipliers must be finite and nonnegative");
        }
    }
};

/// Offset of row n (n >= 1) in a triangular table holding rows of n+1 entries.
constexpr std::size_t triangle_offset(int n) noexcept {
    return static_cast<std::size_t>(n - 1) * static_cast<std::size_t>(n + 2) / 2;
}

constexpr std::size_t triangle_size(int horizon) noexcept { return triangle_offset(horizon + 1); }

/// Row-wise run-length table of actions: each row is a sequence of runs, a
/// run being a first index s and the action shared up to the next run.
class ActionRuns {
public:
    struct Run {
        int start;
        Action action;
    };

    /// Appends the next row (rows must be appended in increasing n).
    void push_row(const Action* row, int length) {
        begin_row();
        for (int s = 0; s < length; ++s) append(s, row[s]);
    }

    /// Opens a row filled by append calls with increasing start indices.
    void begin_row() { row_begin_.push_back(runs_.size()); }

    /// States from `start` up to the next appended start take `action`.
    void append(int start, Action action) {
        if (runs_.size() == row_begin_.back() || runs_.back().action != action) runs_.push_back({start, action});
    }

    /// Rebuilds increasing row order from rows appended in decreasing n.
    ActionRuns reversed() const {
        ActionRuns out;
        out.runs_.reserve(runs_.size());
        out.row_begin_.reserve(row_begin_.size());
        for (std::size_t r = row_begin_.size(); r-- > 0;) {
            const std::size_t end = r + 1 < row_begin_.size() ? row_begin_[r + 1] : runs_.size();
            out.row_begin_.push_back(out.runs_.size());
            out.runs_.insert(out.runs_.end(), runs_.begin() + static_cast<std::ptrdiff_t>(row_begin_[r]),
                             runs_.begin() + static_cast<std::ptrdiff_t>(end));
        }
        return out;
    }

    int rows() const noexcept { return static_cast<int>(row_begin_.size()); }

    /// Action at (n, s), rows numbered from 1.
    Action at(int n, int s) const {
        const auto first = runs_.begin() + static_cast<std::ptrdiff_t>(row_begin_[static_cast<std::size_t>(n - 1)]);
        const auto last = static_cast<std::size_t>(n) < row_begin_.size()
                              ? runs_.begin() + static_cast<std::ptrdiff_t>(row_begin_[static_cast<std::size_t>(n)])
                              : runs_.end();
        const auto it = std::upper_bound(first, last, s, [](int v, const Run& r) { return v < r.start; });
        return std::prev(it)->action;
    }

private:
    std::vector<Run> runs_;
    std::vector<std::size_t> row_begin_;
};

/// A truncated sequential test: one terminal or continue decision per lattice
/// state (n, s), 1 <= n <= horizon. Immutable once built.
class Plan {
public:
    Plan(LagrangeConfig config, int horizon, const std::vector<Action>& actions,
         double lagrangian_value = std::numeric_limits<double>::quiet_NaN())
        : Plan(config, horizon, encode(horizon, actions), lagrangian_value) {}

    Plan(LagrangeConfig config, int horizon, ActionRuns runs,
         double lagrangian_value = std::numeric_limits<double>::quiet_NaN())
        : config_(config), horizon_(horizon), runs_(std::move(runs)), lagrangian_value_(lagrangian_value) {
        if (horizon_ < 1) {
            throw std::invalid_argument("plan horizon must be at least 1");
        }
        if (runs_.rows() != horizon_) {
            throw std::invalid_argument("action table size does not match horizon " + std::to_string(horizon_));
        }
        for (int s = 0; s <= horizon_; ++s) {
            if (action(horizon_, s) == Action::Continue) {
                throw std::invalid_argument("plan continues at its horizon (s=" + std::to_string(s) + ")");
            }
        }
        compute_reachability();
    }

    const LagrangeConfig& config() const noexcept { return config_; }
    const Hypotheses& hypotheses() const noexcept { return config_.hyp; }
    int horizon() const noexcept { return horizon_; }
    double lagrangian_value() const noexcept { return lagrangian_value_; }

    Action action(int n, int s) const { return runs_.at(n, s); }

    /// Full triangular table, row n occupying [triangle_offset(n), triangle_offset(n + 1)).
    std::vector<Action> actions() const {
        std::vector<Action> out;
        out.reserve(triangle_size(horizon_));
        for (int n = 1; n <= horizon_; ++n)
            for (int s = 0; s <= n; ++s) out.push_back(action(n, s));
        return out;
    }

    /// True if (n, s) is entered with positive probability.
    bool reachable(int n, int s) const {
        if (n < 1 || n > last_reachable_stage_) return false;
        const auto [first, last] = spans_[static_cast<std::size_t>(n - 1)];
        if (s < first || s > last) return false;
        return reachable_[reach_begin_[static_cast<std::size_t>(n - 1)] + static_cast<std::size_t>(s - first)] != 0;
    }

    /// Smallest interval [first, second] containing every reachable state of stage n;
    /// empty (first > second) past the last reachable stage.
    std::pair<int, int> reachable_span(int n) const {
        if (n > last_reachable_stage_) return {1, 0};
        return spans_[static_cast<std::size_t>(n - 1)];
    }

    /// Maximum number of observations the plan takes with positive probability.
    int effective_horizon() const noexcept { return last_reachable_stage_; }

private:
    static ActionRuns encode(int horizon, const std::vector<Action>& actions) {
        if (horizon < 1 || actions.size() != triangle_size(horizon)) {
            throw std::invalid_argument("action table size does not match horizon " + std::to_string(horizon));
        }
        ActionRuns runs;
        for (int n = 1; n <= horizon; ++n) runs.push_row(actions.data() + triangle_offset(n), n + 1);
        return runs;
    }

    void compute_reachability() {
        spans_.assign(1, {0, 1});
        reach_begin_.assign(1, 0);
        reachable_.assign(2, 1);
        last_reachable_stage_ = 1;
        std::vector<std::uint8_t> next;
        for (int n = 1; n < horizon_; ++n) {
            const auto [first, last] = spans_.back();
            const std::size_t base = reach_begin_.back();
            next.assign(static_cast<std::size_t>(last - first + 2), 0);
            int lo = n + 2;
            int hi = -1;
            for (int s = first; s <= last; ++s) {
                if (reachable_[base + static_cast<std::size_t>(s - first)] && action(n, s) == Action::Continue) {
                    next[static_cast<std::size_t>(s - first)] = 1;
                    next[static_cast<std::size_t>(s - first + 1)] = 1;
                    lo = std::min(lo, s);
                    hi = std::max(hi, s + 1);
                }
            }
            if (hi < 0) break;
            spans_.emplace_back(lo, hi);
            reach_begin_.push_back(reachable_.size());
            reachable_.insert(reachable_.end(), next.begin() + (lo - first), next.begin() + (hi - first + 1));
            last_reachable_stage_ = n + 1;
        }
    }

    LagrangeConfig config_;
    int horizon_;
    ActionRuns runs_;
    double lagrangian_value_;
    std::vector<std::uint8_t> reachable_;
    std::vector<std::size_t> reach_begin_;
    std::vector<std::pair<int, int>> spans_;
    int last_reachable_stage_ = 1;
};

/// Free-function spelling of Plan::effective_horizon.
inline int effective_horizon(const Plan& plan) noexcept { return plan.effective_horizon(); }

}  // namespace kwseq
