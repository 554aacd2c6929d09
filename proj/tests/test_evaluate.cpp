#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kwseq/backward.hpp"
#include "kwseq/evaluate.hpp"
#include "kwseq/scalar_min.hpp"
#include "oracles.hpp"
#include "plan_battery.hpp"

using namespace kwseq;

TEST(Evaluate, MatchesPathEnumeration) {
    const auto plans = testing_support::plan_battery();
    ASSERT_GE(plans.size(), 20u);
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto& p = plans[i];
        const auto& h = p.hypotheses();
        for (double theta : {h.theta0(), h.theta1(), 0.5 * (h.theta0() + h.theta1()), 0.02, 0.97}) {
            const auto ref = oracle::enumerate_paths(p, theta);
            EXPECT_NEAR(oc(p, theta), ref.oc, 1e-12) << "plan " << i << " theta " << theta;
            EXPECT_NEAR(asn(p, theta), ref.asn, 1e-12 * std::max(1.0, ref.asn)) << "plan " << i;
            const auto dist = stop_distribution(p, theta);
            for (std::size_t n = 0; n < ref.stop_dist.size(); ++n) {
                const double got = n < dist.size() ? dist[n] : 0.0;
                EXPECT_NEAR(got, ref.stop_dist[n], 1e-12) << "plan " << i << " n " << n + 1;
            }
        }
    }
}

TEST(Evaluate, StopDistributionCoversEffectiveHorizon) {
    const auto plan = build_plan(LagrangeConfig(Hypotheses(0.05, 0.15), 0.0768, 157.70, 193.35), 211);
    const auto dist = stop_distribution(plan, 0.0768);
    EXPECT_EQ(static_cast<int>(dist.size()), plan.effective_horizon());
    double total = 0.0;
    for (double d : dist) total += d;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_GT(dist.back(), 0.0);
}

TEST(Quantile, Definition) {
    const std::vector<double> d{0.5, 0.3, 0.19, 0.01};
    EXPECT_EQ(quantile(d, 0.5), 1);
    EXPECT_EQ(quantile(d, 0.8), 2);
    EXPECT_EQ(quantile(d, 0.99), 3);
    EXPECT_EQ(quantile(d, 0.995), 4);
    EXPECT_THROW(quantile(d, 1.0), std::domain_error);
    EXPECT_THROW(quantile({0.5, 0.2}, 0.9), std::invalid_argument);
}

TEST(Evaluate, SingleStagePlan) {
    const Hypotheses h(0.2, 0.4);
    const Plan p(LagrangeConfig(h, 0.3, 0.0, 0.0), 1, {Action::AcceptH0, Action::RejectH0});
    EXPECT_DOUBLE_EQ(asn(p, 0.33), 1.0);
    EXPECT_NEAR(oc(p, 0.33), 0.67, 1e-15);
    EXPECT_EQ(quantile(stop_distribution(p, 0.3), 0.99), 1);
}

TEST(PlanTable, Validation) {
    const Hypotheses h(0.2, 0.4);
    const LagrangeConfig cfg(h, 0.3, 1.0, 1.0);
    EXPECT_THROW(Plan(cfg, 1, {Action::Continue, Action::AcceptH0}), std::invalid_argument);
    EXPECT_THROW(Plan(cfg, 2, {Action::AcceptH0, Action::AcceptH0}), std::invalid_argument);
    EXPECT_THROW(LagrangeConfig(h, 0.5, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(LagrangeConfig(h, 0.3, -1.0, 1.0), std::invalid_argument);
}

TEST(Brent, FindsKnownMinima) {
    auto r = brent_minimize([](double x) { return (x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-8);
    EXPECT_NEAR(r.x, 0.3, 1e-7);
    auto c = brent_minimize([](double x) { return std::cos(x); }, 2.0, 4.0, 1e-8);
    EXPECT_NEAR(c.x, M_PI, 1e-7);
    auto edge = brent_minimize([](double x) { return x; }, 1.0, 2.0, 1e-6);
    EXPECT_LT(edge.x, 1.0 + 1e-4);
}

TEST(AsnSup, BoundsTheCurve) {
    const LagrangeConfig cfg(Hypotheses(0.05, 0.15), 0.0768, 157.70, 193.35);
    const auto plan = build_plan(cfg, horizon_bound(cfg));
    const auto sup = asn_sup(plan);
    for (int i = 0; i <= 100; ++i) {
        const double t = 0.05 + 0.001 * i;
        EXPECT_LE(asn(plan, t), sup.n_max + 1e-3);
    }
    EXPECT_FALSE(sup.boundary_exceeds);
    EXPECT_GE(sup.n_max, asn(plan, 0.0768));
}

TEST(AsnSup, SymmetricPlanPeaksInTheMiddle) {
    const LagrangeConfig cfg(Hypotheses(0.45, 0.55), 0.5, 526.61, 526.61);
    const auto plan = build_plan(cfg, horizon_bound(cfg));
    EXPECT_NEAR(asn_sup(plan).theta_max, 0.5, 2e-4);
    EXPECT_NEAR(delta(plan), 0.0, 1e-12);
    for (double t : {0.45, 0.47, 0.49, 0.5}) EXPECT_NEAR(oc(plan, t) + oc(plan, 1.0 - t), 1.0, 1e-10);
}

TEST(Simulate, ReproducibleAndThreadInvariant) {
    const LagrangeConfig cfg(Hypotheses(0.05, 0.15), 0.0768, 157.70, 193.35);
    const auto plan = build_plan(cfg, horizon_bound(cfg));
    const auto a = simulate(plan, 0.0768, 20000, 42, 1);
    const auto b = simulate(plan, 0.0768, 20000, 42, 3);
    EXPECT_EQ(a.oc_hat, b.oc_hat);
    EXPECT_EQ(a.asn_hat, b.asn_hat);
    const auto c = simulate(plan, 0.0768, 20000, 43, 1);
    EXPECT_NE(a.asn_hat, c.asn_hat);
    EXPECT_EQ(a.replications, 20000);
}

TEST(Simulate, AgreesWithExactValues) {
    const LagrangeConfig cfg(Hypotheses(0.2, 0.3), 0.2435, 381.04, 403.11);
    const auto plan = build_plan(cfg, horizon_bound(cfg));
    for (double t : {0.2, 0.2435, 0.3}) {
        const auto sim = simulate(plan, t, 100000, 5, 2);
        EXPECT_LE(std::abs(sim.oc_hat - oc(plan, t)), 4.0 * sim.oc_se);
        EXPECT_LE(std::abs(sim.asn_hat - asn(plan, t)), 4.0 * sim.asn_se);
    }
}

TEST(Characterize, CollectsEverything) {
    const LagrangeConfig cfg(Hypotheses(0.05, 0.15), 0.0768, 157.70, 193.35);
    const auto plan = build_plan(cfg, horizon_bound(cfg));
    const auto c = characterize(plan, {0.05, 0.15});
    EXPECT_NEAR(c.oc[0], 1.0 - c.alpha, 1e-15);
    EXPECT_NEAR(c.oc[1], c.beta, 1e-15);
    EXPECT_EQ(c.q99, 89);
    EXPECT_GE(c.q99, 1);
    EXPECT_LE(c.q99, plan.effective_horizon());
}
