#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace kwseq {

/// Simple-vs-simple Bernoulli hypotheses H0: theta = theta0 against H1: theta = theta1.
class Hypotheses {
public:
    Hypotheses(double theta0, double theta1) : theta0_(theta0), theta1_(theta1) {
        if (!(theta0 > 0.0 && theta0 < theta1 && theta1 < 1.0)) {
            throw std::invalid_argument("hypotheses require 0 < theta0 < theta1 < 1, got theta0=" +
                                        std::to_string(theta0) + " theta1=" + std::to_string(theta1));
        }
    }

    double theta0() const noexcept { return theta0_; }
    double theta1() const noexcept { return theta1_; }

    /// theta0 == 1 - theta1 (up to rounding of the inputs).
    bool symmetric() const noexcept { return std::abs(theta0_ + theta1_ - 1.0) < 1e-12; }

    friend bool operator==(const Hypotheses&, const Hypotheses&) = default;

private:
    double theta0_;
    double theta1_;
};

/// Node of the Bernoulli lattice: n observations taken, s of them successes.
struct LatticeState {
    int n;
    int s;

    LatticeState(int n_, int s_) : n(n_), s(s_) {
        if (n_ < 1 || s_ < 0 || s_ > n_) {
            throw std::invalid_argument("lattice state requires n >= 1 and 0 <= s <= n");
        }
    }
};

namespace detail {

inline void require_probability(double theta, const char* what) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::domain_error(std::string(what) + " must lie in (0,1), got " + std::to_string(theta));
    }
}

}  // namespace detail

/// Process-wide table of ln(k!) for k = 0..size-1. Grown copy-on-extend, so a
/// snapshot returned to a caller is immutable and never invalidated.
class LogFactorials {
public:
    using Table = std::vector<long double>;

    static std::shared_ptr<const Table> at_least(int n) {
        static std::mutex mu;
        static std::shared_ptr<const Table> table = std::make_shared<const Table>(Table{0.0});
        std::lock_guard lock(mu);
        if (static_cast<int>(table->size()) <= n) {
            auto grown = std::make_shared<Table>(*table);
            auto target = static_cast<std::size_t>(n) + 1;
            // Round up so repeated small extensions stay amortised.
            target = std::max(target, grown->size() * 2);
            long double acc = grown->back();
            for (std::size_t k = grown->size(); k < target; ++k) {
                acc += std::log(static_cast<long double>(k));
                grown->push_back(acc);
            }
            table = std::move(grown);
        }
        return table;
    }
};

inline long double log_binomial_coefficient(const LogFactorials::Table& lf, int n, int s) {
    return lf[n] - (lf[s] + lf[n - s]);
}

/// ln g_theta^n(s) = s ln(theta) + (n-s) ln(1-theta).
inline double log_g(double theta, LatticeState state) {
    detail::require_probability(theta, "theta");
    return state.s * std::log(theta) + (state.n - state.s) * std::log1p(-theta);
}

/// Binomial point mass C(n,s) theta^s (1-theta)^(n-s), evaluated in log space.
inline double scaled_binomial_G(double theta, LatticeState state) {
    detail::require_probability(theta, "theta");
    auto lf = LogFactorials::at_least(state.n);
    return std::exp(static_cast<double>(log_binomial_coefficient(*lf, state.n, state.s) + log_g(theta, state)));
}

/// Per-observation increment of the log-likelihood ratio ln(f_theta1(x)/f_theta0(x)).
inline double log_likelihood_ratio_increment(const Hypotheses& hyp, int x) {
    if (x != 0 && x != 1) {
        throw std::invalid_argument("Bernoulli observation must be 0 or 1");
    }
    return x == 1 ? std::log(hyp.theta1() / hyp.theta0())
                  : std::log((1.0 - hyp.theta1()) / (1.0 - hyp.theta0()));
}

/// G_theta^n(s) evaluator bound to one theta; the log factorial table must cover every n queried.
class StageWeights {
public:
    StageWeights(double theta, const LogFactorials::Table& lf)
        : log_p_(std::log(static_cast<long double>(theta))),
          log_q_(std::log1p(-static_cast<long double>(theta))),
          lf_(&lf) {}

    double operator()(int n, int s) const {
        return std::exp(static_cast<double>(log_binomial_coefficient(*lf_, n, s) + s * log_p_ + (n - s) * log_q_));
    }

private:
    long double log_p_;
    long double log_q_;
    const LogFactorials::Table* lf_;
};

/// Writes G_theta^n(s) for s = 0..n into row[0..n]. One exp at the mode, then
/// term ratios outward in both directions, so rows far past the range of
/// (1-theta)^n stay representable near their centre.
inline void fill_binomial_row(double theta, int n, const LogFactorials::Table& lf, double* row) {
    const double odds = theta / (1.0 - theta);
    int mode = static_cast<int>(std::floor((n + 1) * theta));
    mode = std::clamp(mode, 0, n);
    const double peak = std::exp(static_cast<double>(log_binomial_coefficient(lf, n, mode)) + mode * std::log(theta) +
                                 (n - mode) * std::log1p(-theta));
    row[mode] = peak;
    double g = peak;
    for (int s = mode; s < n; ++s) {
        g *= odds * (n - s) / (s + 1);
        row[s + 1] = g;
    }
    g = peak;
    for (int s = mode; s > 0; --s) {
        g *= s / (odds * (n - s + 1));
        row[s - 1] = g;
    }
    if (theta == 0.5) {
        for (int s = 0; s < n - s; ++s) row[n - s] = row[s];
    }
}

}  // namespace kwseq
