#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kwseq/plan.hpp"

namespace kwseq::oracle {

using rational = boost::multiprecision::cpp_rational;

struct PathTotals {
    double oc = 0.0;
    double asn = 0.0;
    std::vector<double> stop_dist;  // index n-1
};

/// Walks every one of the 2^H outcome sequences through the plan. Each full
/// sequence carries probability theta^S_H (1-theta)^(H-S_H); summing over the
/// unobserved tail gives the prefix probability at the stopping time.
inline PathTotals enumerate_paths(const Plan& plan, double theta) {
    const int h = plan.horizon();
    PathTotals t;
    t.stop_dist.assign(static_cast<std::size_t>(h), 0.0);
    const std::uint64_t count = std::uint64_t{1} << h;
    for (std::uint64_t bits = 0; bits < count; ++bits) {
        long double prob = 1.0L;
        for (int i = 0; i < h; ++i) prob *= ((bits >> i) & 1U) ? theta : 1.0L - theta;
        int s = 0;
        for (int n = 1; n <= h; ++n) {
            s += static_cast<int>((bits >> (n - 1)) & 1U);
            const Action a = plan.action(n, s);
            if (a == Action::Continue) continue;
            if (a == Action::AcceptH0) t.oc += static_cast<double>(prob);
            t.asn += static_cast<double>(prob * n);
            t.stop_dist[static_cast<std::size_t>(n - 1)] += static_cast<double>(prob);
            break;
        }
    }
    return t;
}

/// Per-path (unscaled) Lagrangian recursion in long double:
/// V_n(s) = min(l0 f0, l1 f1, f* + V_{n+1}(s+1) + V_{n+1}(s)), f = theta^s (1-theta)^(n-s).
/// values[n][s] holds C(n,s) V_n(s) for comparison with the scaled table.
struct UnscaledResult {
    std::vector<std::vector<long double>> values;
    std::vector<std::vector<Action>> actions;
    long double lagrangian = 0.0L;
};

inline long double path_weight(long double theta, int n, int s) {
    return std::pow(theta, static_cast<long double>(s)) * std::pow(1.0L - theta, static_cast<long double>(n - s));
}

inline long double binomial(int n, int s) {
    long double c = 1.0L;
    for (int i = 1; i <= s; ++i) c = c * (n - s + i) / i;
    return c;
}

inline UnscaledResult unscaled_backward(const LagrangeConfig& cfg, int horizon) {
    const long double t0 = cfg.hyp.theta0();
    const long double t1 = cfg.hyp.theta1();
    const long double ts = cfg.theta_star;
    const long double l0 = cfg.lambda0;
    const long double l1 = cfg.lambda1;
    UnscaledResult r;
    r.values.resize(static_cast<std::size_t>(horizon) + 1);
    r.actions.resize(static_cast<std::size_t>(horizon) + 1);
    std::vector<long double> next;
    for (int n = horizon; n >= 1; --n) {
        std::vector<long double> cur(static_cast<std::size_t>(n) + 1);
        auto& act = r.actions[static_cast<std::size_t>(n)];
        act.resize(static_cast<std::size_t>(n) + 1);
        for (int s = 0; s <= n; ++s) {
            const long double rej = l0 * path_weight(t0, n, s);
            const long double acc = l1 * path_weight(t1, n, s);
            if (n == horizon) {
                cur[s] = std::min(rej, acc);
                act[s] = rej >= acc ? Action::AcceptH0 : Action::RejectH0;
                continue;
            }
            const long double cont = path_weight(ts, n, s) + next[s + 1] + next[s];
            const long double v = std::min({rej, acc, cont});
            cur[s] = v;
            act[s] = acc == v ? Action::AcceptH0 : rej == v ? Action::RejectH0 : Action::Continue;
        }
        auto& scaled = r.values[static_cast<std::size_t>(n)];
        scaled.resize(cur.size());
        for (int s = 0; s <= n; ++s) scaled[s] = binomial(n, s) * cur[s];
        next = std::move(cur);
    }
    r.lagrangian = 1.0L + next[0] + next[1];
    return r;
}

/// C(n,s) p^s (1-p)^(n-s) for rational p, exactly.
inline rational binomial_pmf(const rational& p, int n, int s) {
    boost::multiprecision::cpp_int c = 1;
    for (int i = 1; i <= s; ++i) c = c * (n - s + i) / i;
    rational r = c;
    const rational q = 1 - p;
    for (int i = 0; i < s; ++i) r *= p;
    for (int i = 0; i < n - s; ++i) r *= q;
    return r;
}

/// P(S_n >= k) for rational p, exactly.
inline rational upper_tail(const rational& p, int n, int k) {
    rational sum = 0;
    for (int s = std::max(k, 0); s <= n; ++s) sum += binomial_pmf(p, n, s);
    return sum;
}

/// P(S_n >= k) for k = 0..n+1, exactly, from integer numerators over d^n.
inline std::vector<rational> upper_tails(const rational& p, int n) {
    using boost::multiprecision::cpp_int;
    const cpp_int a = boost::multiprecision::numerator(p);
    const cpp_int d = boost::multiprecision::denominator(p);
    const cpp_int b = d - a;
    std::vector<cpp_int> pa(n + 1, 1), pb(n + 1, 1);
    for (int i = 1; i <= n; ++i) {
        pa[i] = pa[i - 1] * a;
        pb[i] = pb[i - 1] * b;
    }
    const cpp_int denom = pow(d, static_cast<unsigned>(n));
    std::vector<rational> tails(n + 2, rational(0));
    cpp_int c = 1, sum = 0;
    std::vector<cpp_int> terms(n + 1);
    for (int s = 0; s <= n; ++s) {
        terms[s] = c * pa[s] * pb[n - s];
        c = c * (n - s) / (s + 1);
    }
    for (int s = n; s >= 0; --s) {
        sum += terms[s];
        tails[s] = rational(sum, denom);
    }
    return tails;
}

/// Symmetric random walk on {-m, ..., m}, step +1 with probability p, started
/// at 0 and absorbed on reaching -(m+1) or m+1.
struct RuinResult {
    double lower_probability;
    double expected_steps;
};

inline RuinResult gamblers_ruin(double p, int m) {
    const double q = 1.0 - p;
    const int i = m + 1;
    const int total = 2 * m + 2;
    if (std::abs(p - q) < 1e-15) {
        return {1.0 - static_cast<double>(i) / total, static_cast<double>(i) * (total - i)};
    }
    const double r = q / p;
    const double upper = (1.0 - std::pow(r, i)) / (1.0 - std::pow(r, total));
    const double steps = i / (q - p) - total / (q - p) * upper;
    return {1.0 - upper, steps};
}

}  // namespace kwseq::oracle
