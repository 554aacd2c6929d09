#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "kwseq/model.hpp"
#include "kwseq/plan.hpp"
#include "kwseq/scalar_min.hpp"

namespace kwseq {

namespace detail {

/// Backward pass over the reachable part of the plan. stop_value(n, s, G)
/// gives the contribution of a stopped state; continue_term(G) the
/// per-state term added at a continue state before propagation.
template <class StopValue, class ContinueTerm>
double backward_functional(const Plan& plan, double theta, StopValue stop_value, ContinueTerm continue_term) {
    require_probability(theta, "theta");
    const int top = plan.effective_horizon();
    auto lf = LogFactorials::at_least(top + 1);
    const StageWeights g(theta, *lf);

    std::vector<double> next(static_cast<std::size_t>(top) + 2, 0.0);
    std::vector<double> cur(next.size(), 0.0);
    for (int n = top; n >= 1; --n) {
        const auto [lo, hi] = plan.reachable_span(n);
        const double inv = 1.0 / (n + 1);
        for (int s = lo; s <= hi; ++s) {
            if (!plan.reachable(n, s)) {
                cur[s] = 0.0;
                continue;
            }
            const Action a = plan.action(n, s);
            if (a == Action::Continue) {
                cur[s] = continue_term(g(n, s)) + next[s] * ((n + 1 - s) * inv) + next[s + 1] * ((s + 1) * inv);
            } else {
                cur[s] = stop_value(a, g, n, s);
            }
        }
        // Stage n - 1 reads only successors of its reachable continue states,
        // all of which were written above.
        std::swap(cur, next);
    }
    return next[0] + next[1];
}

}  // namespace detail

/// Operating characteristic: probability of accepting H0 under theta.
inline double oc(const Plan& plan, double theta) {
    return detail::backward_functional(
        plan, theta,
        [](Action a, const StageWeights& g, int n, int s) { return a == Action::AcceptH0 ? g(n, s) : 0.0; },
        [](double) { return 0.0; });
}

/// Average sample number N(theta; plan).
inline double asn(const Plan& plan, double theta) {
    return 1.0 + detail::backward_functional(
                     plan, theta, [](Action, const StageWeights&, int, int) { return 0.0; },
                     [](double g) { return g; });
}

inline double type_one_error(const Plan& plan) { return 1.0 - oc(plan, plan.hypotheses().theta0()); }
inline double type_two_error(const Plan& plan) { return oc(plan, plan.hypotheses().theta1()); }

/// P_theta(tau = n) for n = 1..effective_horizon, by forward propagation of
/// reach masses through continue states.
inline std::vector<double> stop_distribution(const Plan& plan, double theta) {
    detail::require_probability(theta, "theta");
    const int top = plan.effective_horizon();
    std::vector<double> dist(static_cast<std::size_t>(top), 0.0);
    std::vector<double> reach(static_cast<std::size_t>(top) + 2, 0.0);
    std::vector<double> next(reach.size(), 0.0);
    reach[0] = 1.0 - theta;
    reach[1] = theta;
    for (int n = 1; n <= top; ++n) {
        const auto [lo, hi] = plan.reachable_span(n);
        double stopped = 0.0;
        for (int s = lo; s <= hi; ++s) {
            if (!plan.reachable(n, s)) continue;
            if (plan.action(n, s) == Action::Continue) {
                next[s] += reach[s] * (1.0 - theta);
                next[s + 1] += reach[s] * theta;
            } else {
                stopped += reach[s];
            }
            reach[s] = 0.0;
        }
        dist[static_cast<std::size_t>(n - 1)] = stopped;
        std::swap(reach, next);
    }
    return dist;
}

/// Smallest n whose cumulative stopping probability reaches `level`.
inline int quantile(const std::vector<double>& stop_dist, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::domain_error("quantile level must lie in (0,1)");
    }
    const double total = std::accumulate(stop_dist.begin(), stop_dist.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("stopping distribution sums to " + std::to_string(total) + ", not 1");
    }
    double cumulative = 0.0;
    for (std::size_t i = 0; i < stop_dist.size(); ++i) {
        cumulative += stop_dist[i];
        if (cumulative >= level) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(stop_dist.size());
}

struct AsnSup {
    double theta_max;
    double n_max;
    /// ASN at theta0 or theta1 exceeds the interior maximum found.
    bool boundary_exceeds;
};

/// Default tolerance on the maximising theta in asn_sup.
inline constexpr double asn_sup_tolerance = 1e-7;

/// Equispaced points of the coarse scan that brackets the global maximum.
inline constexpr int asn_sup_scan_points = 16;

/// Maximum of N(theta; plan) over theta in [theta0, theta1]: a coarse scan
/// picks the bracket of the largest value, refined there by Brent's method.
inline AsnSup asn_sup(const Plan& plan, double tol = asn_sup_tolerance) {
    const auto& hyp = plan.hypotheses();
    const double lo = hyp.theta0();
    const double hi = hyp.theta1();
    const double step = (hi - lo) / asn_sup_scan_points;
    int best = 0;
    double best_value = -1.0;
    std::vector<double> scan(asn_sup_scan_points + 1);
    for (int i = 0; i <= asn_sup_scan_points; ++i) {
        const double t = i == asn_sup_scan_points ? hi : lo + i * step;
        scan[static_cast<std::size_t>(i)] = asn(plan, t);
        if (scan[static_cast<std::size_t>(i)] > best_value) {
            best_value = scan[static_cast<std::size_t>(i)];
            best = i;
        }
    }
    const double a = lo + std::max(best - 1, 0) * step;
    const double b = best + 1 >= asn_sup_scan_points ? hi : lo + (best + 1) * step;
    auto found = brent_minimize([&](double t) { return -asn(plan, t); }, a, b, tol);
    double theta_max = found.x;
    double n_max = -found.fx;
    if (best_value > n_max) {
        theta_max = best == asn_sup_scan_points ? hi : lo + best * step;
        n_max = best_value;
    }
    const bool edge = scan.front() > -found.fx || scan.back() > -found.fx;
    return {theta_max, n_max, edge};
}

/// sup_theta N(theta) - N(theta*); may come out slightly negative because
/// the supremum is located only to the optimiser tolerance.
inline double delta(const Plan& plan, double tol = asn_sup_tolerance) {
    return asn_sup(plan, tol).n_max - asn(plan, plan.config().theta_star);
}

/// Exact characteristics of a plan at theta* plus OC/ASN at requested points.
struct Characteristics {
    std::vector<double> thetas;
    std::vector<double> oc;
    std::vector<double> asn;
    double alpha;
    double beta;
    std::vector<double> stop_dist;
    int q99;
};

inline Characteristics characterize(const Plan& plan, const std::vector<double>& thetas = {}) {
    Characteristics c;
    c.thetas = thetas;
    for (double t : thetas) {
        c.oc.push_back(oc(plan, t));
        c.asn.push_back(asn(plan, t));
    }
    c.alpha = type_one_error(plan);
    c.beta = type_two_error(plan);
    c.stop_dist = stop_distribution(plan, plan.config().theta_star);
    c.q99 = quantile(c.stop_dist, 0.99);
    return c;
}

struct SimulationResult {
    long long replications;
    double oc_hat;
    double oc_se;
    double asn_hat;
    double asn_se;
};

namespace detail {

/// Number of independent streams replications are split into. Fixed so the
/// estimate is independent of the number of worker threads.
inline constexpr int simulation_blocks = 64;

/// Uniform on [0,1) from the top 53 bits of a 64-bit Mersenne Twister draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::mt19937_64 block_generator(std::uint64_t seed, int block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), 0x6b77u};
    return std::mt19937_64(seq);
}

struct BlockTally {
    long long count = 0;
    long long accepts = 0;
    double n_sum = 0.0;
    double n_sq_sum = 0.0;
};

/// Runs `one_run(rng) -> pair<accepted, sample_size>` over all replications,
/// split into fixed blocks, each with its own seeded MT19937-64 stream.
template <class OneRun>
SimulationResult run_blocks(long long replications, std::uint64_t seed, unsigned jobs, OneRun one_run) {
    if (replications < 1) {
        throw std::invalid_argument("replications must be at least 1");
    }
    std::vector<BlockTally> tallies(simulation_blocks);
    auto work = [&](int block) {
        const long long per = replications / simulation_blocks;
        const long long count = per + (block < replications % simulation_blocks ? 1 : 0);
        auto rng = block_generator(seed, block);
        BlockTally t;
        t.count = count;
        for (long long i = 0; i < count; ++i) {
            const auto [accepted, n] = one_run(rng);
            t.accepts += accepted ? 1 : 0;
            t.n_sum += n;
            t.n_sq_sum += static_cast<double>(n) * n;
        }
        tallies[static_cast<std::size_t>(block)] = t;
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, simulation_blocks));
    if (jobs == 1) {
        for (int b = 0; b < simulation_blocks; ++b) work(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) {
            pool.emplace_back([&, j] {
                for (int b = static_cast<int>(j); b < simulation_blocks; b += static_cast<int>(jobs)) work(b);
            });
        }
        for (auto& th : pool) th.join();
    }
    BlockTally total;
    for (const auto& t : tallies) {
        total.count += t.count;
        total.accepts += t.accepts;
        total.n_sum += t.n_sum;
        total.n_sq_sum += t.n_sq_sum;
    }
    const double m = static_cast<double>(total.count);
    const double p = static_cast<double>(total.accepts) / m;
    const double mean = total.n_sum / m;
    const double var = m > 1 ? std::max(0.0, (total.n_sq_sum - m * mean * mean) / (m - 1)) : 0.0;
    return {total.count, p, std::sqrt(p * (1.0 - p) / m), mean, std::sqrt(var / m)};
}

}  // namespace detail

/// Monte Carlo run of the plan on Bernoulli(theta) streams. Deterministic in
/// (seed, replications); `jobs` only changes wall time.
inline SimulationResult simulate(const Plan& plan, double theta, long long replications, std::uint64_t seed,
                                 unsigned jobs = 1) {
    detail::require_probability(theta, "theta");
    return detail::run_blocks(replications, seed, jobs, [&](std::mt19937_64& rng) {
        int s = 0;
        for (int n = 1;; ++n) {
            if (detail::uniform01(rng) < theta) ++s;
            const Action a = plan.action(n, s);
            if (a != Action::Continue) return std::pair<bool, int>{a == Action::AcceptH0, n};
        }
    });
}

}  // namespace kwseq
