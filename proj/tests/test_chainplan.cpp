#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "arnold/chainplan.hpp"

using namespace arnold;

namespace {
ChainScheduleOptions base_options(double mu, double rho = 0.12) {
    ChainScheduleOptions o;
    o.mu = mu;
    o.rho = rho;
    o.delta_sched = 0.3;
    return o;
}
}  // namespace

TEST_CASE("waypoint counts match the spacing band") {
    // L = 1, mu = 1e-3, rho = 0.1 -> k in [10000, 20000]
    auto P = TrigPerturbation::arnold_example();
    MelnikovFamily fam(P);
    CurvePath curve({{1.3}, {2.3}});
    auto opt = base_options(1e-3, 0.1);
    auto plan = build_chain_plan(fam, curve, opt);
    CHECK(plan.k >= 10000);
    CHECK(plan.k <= 20000);
    // spacing band and jumps
    double prev_s = 0.0;
    Vec prev = plan.omega_I;
    for (const auto& w : plan.pts) {
        double ds = w.s - prev_s;
        CHECK(ds >= 0.5 * opt.rho * opt.mu - 1e-12);
        CHECK(ds <= opt.rho * opt.mu + 1e-12);
        CHECK(norm2(w.omega_bar - prev) <= opt.rho * opt.mu + 1e-12);
        prev_s = w.s;
        prev = w.omega_bar;
    }
    // straight-line curve: equally spaced frequencies
    double d01 = plan.pts[1].omega_bar[0] - plan.pts[0].omega_bar[0];
    double dmid = plan.pts[plan.k / 2].omega_bar[0] - plan.pts[plan.k / 2 - 1].omega_bar[0];
    CHECK(d01 == doctest::Approx(dmid).epsilon(1e-10));
}

TEST_CASE("schedule honors windows, defects, and the exact phi iteration") {
    auto P = TrigPerturbation::arnold_example();
    MelnikovFamily fam(P);
    CurvePath curve({{1.02}, {1.13}});  // short curve, no strong crossing
    auto opt = base_options(2e-3);
    auto plan = build_chain_plan(fam, curve, opt);
    const double lnmu = std::abs(std::log(opt.mu));
    for (long i = 0; i + 1 < plan.k; ++i) {
        double gap = plan.pts[i + 1].theta_bar - plan.pts[i].theta_bar;
        CHECK(gap >= plan.C1 * lnmu - 1e-9);
        CHECK(gap <= plan.pts[i].window_hi + 1e-9);
        if (plan.pts[i].regime == 1) CHECK(gap <= 2.0 * plan.C1 * lnmu + 1e-9);
    }
    for (const auto& w : plan.pts) CHECK(w.chi_norm < opt.delta_sched);
    // independent re-validation walks the same invariants plus fresh minima
    CHECK_NOTHROW(validate_chain_plan(plan, fam));
}

TEST_CASE("resonance crossing engages the crossing regime") {
    auto P = TrigPerturbation::arnold_example();
    MelnikovFamily fam(P);
    CurvePath curve({{0.97}, {1.03}});  // crosses omega = 1
    auto opt = base_options(2e-3);
    auto plan = build_chain_plan(fam, curve, opt);
    bool any_crossing_regime = false;
    for (const auto& w : plan.pts) any_crossing_regime |= (w.regime == 1);
    CHECK(any_crossing_regime);
    REQUIRE(!plan.crossings.empty());
    // the crossing plane is omega = 1, i.e. (n, l) = (-1, 1) or (1, -1)
    const auto& c = plan.crossings.front();
    CHECK(std::abs(c.omega_star[0] - 1.0) < 1e-12);
    // frozen flow (1,1) returns every 2 pi; measured T* reflects that
    CHECK(c.return_time <= TWO_PI * 1.1);
}

TEST_CASE("deterministic: identical inputs give identical plans") {
    auto P = TrigPerturbation::arnold_example();
    MelnikovFamily fam(P);
    CurvePath curve({{1.02}, {1.08}});
    auto opt = base_options(2e-3);
    auto p1 = build_chain_plan(fam, curve, opt);
    auto p2 = build_chain_plan(fam, curve, opt);
    REQUIRE(p1.k == p2.k);
    for (long i = 0; i < p1.k; ++i) {
        CHECK(p1.pts[i].theta_bar == p2.pts[i].theta_bar);
        CHECK(p1.pts[i].phi_bar[0] == p2.pts[i].phi_bar[0]);
    }
}

TEST_CASE("total time and the mu-halving ratio") {
    auto P = TrigPerturbation::arnold_example();
    MelnikovFamily fam(P);
    CurvePath curve({{1.02}, {1.08}});
    double mu = 2e-3;
    auto plan1 = build_chain_plan(fam, curve, base_options(mu));
    auto plan2 = build_chain_plan(fam, curve, base_options(0.5 * mu));
    double total1 = plan1.total_time(), total2 = plan2.total_time();
    CHECK(plan1.fitted_K() > 0.0);
    // T(mu/2)/T(mu) ~ 2 (1 + 1/ln(1/mu)) within 20 percent
    double expect = 2.0 * (1.0 + 1.0 / std::log(1.0 / mu));
    CHECK(total2 / total1 > 0.8 * expect);
    CHECK(total2 / total1 < 1.2 * expect);
    (void)total1;
}

TEST_CASE("no-crossing plan total time bound") {
    // all windows C1|ln mu|-dominated when the curve keeps its distance from
    // every scheduler resonance plane: total <= 2 C1 k |ln mu|
    auto P = TrigPerturbation::arnold_example();
    MelnikovFamily fam(P);
    CurvePath curve({{1.245}, {1.255}});
    auto opt = base_options(1e-3);
    opt.M_sched = 2;
    auto plan = build_chain_plan(fam, curve, opt);
    CHECK(plan.crossings.empty());
    double lnmu = std::abs(std::log(opt.mu));
    CHECK(plan.total_time() <= 2.0 * plan.C1 * plan.k * lnmu * 1.0 + 1e-6);
    CHECK(plan.total_time() >= plan.C1 * (plan.k - 1) * lnmu * 0.999);
}

TEST_CASE("mu = 0 is refused") {
    auto P = TrigPerturbation::arnold_example();
    MelnikovFamily fam(P);
    CurvePath curve({{1.02}, {1.08}});
    auto opt = base_options(0.0);
    CHECK_THROWS_AS(build_chain_plan(fam, curve, opt), ValidationError);
}

TEST_CASE("json round trip") {
    auto P = TrigPerturbation::arnold_example();
    MelnikovFamily fam(P);
    CurvePath curve({{1.02}, {1.05}});
    auto plan = build_chain_plan(fam, curve, base_options(4e-3));
    auto plan2 = ChainPlan::from_json(plan.to_json());
    REQUIRE(plan2.k == plan.k);
    CHECK(plan2.pts.back().theta_bar == doctest::Approx(plan.pts.back().theta_bar));
    CHECK(plan2.M_sched == plan.M_sched);
    CHECK_NOTHROW(validate_chain_plan(plan2, fam));
}
