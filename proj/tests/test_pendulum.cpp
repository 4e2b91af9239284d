#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "arnold/pendulum.hpp"
#include "arnold/quadrature.hpp"

using namespace arnold;

TEST_CASE("separatrix basics") {
    CHECK(separatrix_q(0.0) == doctest::Approx(PI).epsilon(1e-15));
    CHECK(separatrix_qdot(0.0) == doctest::Approx(2.0).epsilon(1e-15));
    for (double t : {-30.0, -3.0, -0.4, 0.0, 1.7, 12.0, 300.0}) {
        // zero energy along the separatrix
        CHECK(std::abs(pendulum_energy(separatrix_qdot(t), separatrix_q(t))) < 1e-12);
    }
}

TEST_CASE("separatrix satisfies q'' = sin q (analytic identity)") {
    // qddot = d/dt (2 sech t) = -2 sech t tanh t must equal sin(q0)
    for (double t = -6.0; t <= 6.0; t += 0.37) {
        double qdd = -2.0 / std::cosh(t) * std::tanh(t);
        CHECK(std::abs(qdd - std::sin(separatrix_q(t))) < 1e-10);
    }
}

TEST_CASE("pendulum energy values") {
    CHECK(pendulum_energy(0, 0) == doctest::Approx(0.0));
    CHECK(pendulum_energy(0, PI) == doctest::Approx(-2.0));
    CHECK(std::abs(pendulum_energy(2, PI)) < 1e-15);
}

TEST_CASE("transit time and inverse are mutual inverses") {
    for (double E : {0.1, 0.01, 1e-4}) {
        double T = transit_time(E);
        CHECK(std::abs(energy_of_T(T) - E) < 1e-10 * std::max(1.0, E));
    }
    // monotone divergence as E -> 0+
    double prev = transit_time(0.1);
    for (double E : {0.01, 1e-3, 1e-5, 1e-8}) {
        double T = transit_time(E);
        CHECK(T > prev);
        prev = T;
    }
    CHECK_THROWS_AS(transit_time(-0.5), ValidationError);
    CHECK_THROWS_AS(energy_of_T(2.0), ValidationError);
}

TEST_CASE("periodic orbit invariants") {
    for (double T : {12.0, 30.0, 47.0}) {
        PeriodicOrbit orb(T);
        CHECK(std::abs(orb.q(0.0) + PI) < 1e-10);
        CHECK(std::abs(orb.q(T) - PI) < 1e-10);
        CHECK(std::abs(orb.q(0.5 * T)) < 1e-9);  // odd symmetry about midpoint
        // energy constant along the orbit
        for (double t = -1.0; t <= T + 1.0; t += T / 57.0) {
            double e = pendulum_energy(orb.qdot(t), orb.q(t));
            CHECK(std::abs(e - orb.E()) < 1e-9);
        }
        // continuation: q(t + T) = q(t) + 2 pi
        CHECK(orb.q(1.25 + T) == doctest::Approx(orb.q(1.25) + TWO_PI).epsilon(1e-12));
    }
}

TEST_CASE("periodic orbit residual of -q'' + sin q via interpolant") {
    PeriodicOrbit orb(26.0);
    // second derivative from a five-point stencil of the interpolant, compared
    // against sin(q); measures interpolation + table quality at off-node points
    const double h = 1e-3;
    for (double t = 0.3; t < 26.0; t += 0.83) {
        double qdd = (-orb.q(t + 2 * h) + 16 * orb.q(t + h) - 30 * orb.q(t) +
                      16 * orb.q(t - h) - orb.q(t - 2 * h)) /
                     (12 * h * h);
        CHECK(std::abs(qdd - std::sin(orb.q(t))) < 1e-9);
    }
}

TEST_CASE("closeness to the separatrix limit") {
    PeriodicOrbit orb(30.0);
    // near the ends the orbit is within 1e-10 of q_inf
    for (double t : {1.0, 1.5, 2.0, 28.0, 28.5, 29.0}) {
        double qi = (t < 15.0) ? separatrix_q(t) - TWO_PI : separatrix_q(t - 30.0);
        CHECK(std::abs(orb.q(t) - qi) < 1e-10);
    }
    // the global sup over [1, T-1] sits at the midpoint and is ~ 4 e^{-T/2}
    double sup = 0.0;
    for (double t = 1.0; t <= 29.0; t += 0.05) {
        double qi = (t < 15.0) ? separatrix_q(t) - TWO_PI : separatrix_q(t - 30.0);
        sup = std::max(sup, std::abs(orb.q(t) - qi));
    }
    double model = 4.0 * std::exp(-15.0);
    CHECK(sup < 3.0 * model);
    CHECK(sup > model / 3.0);
}

TEST_CASE("decay-rate fits") {
    // endpoint (energy) rate: the hyperbolic exponent, expected in [0.8, 1.2]
    DecayFit ef = fit_rotation_energy_decay();
    CHECK(ef.K2 > 0.8);
    CHECK(ef.K2 < 1.2);
    CHECK(ef.K1 > 0.0);
    // sup-norm distance to q_inf decays with half that rate (midpoint matching)
    DecayFit sf = fit_rotation_sup_decay();
    CHECK(sf.K2 > 0.4);
    CHECK(sf.K2 < 0.6);
}

TEST_CASE("separatrix-backed representation for long transits") {
    PeriodicOrbit orb(80.0);
    CHECK(orb.separatrix_backed());
    CHECK(std::abs(orb.q(0.0) + PI) < 1e-12);
    CHECK(std::abs(orb.q(80.0) - PI) < 1e-12);
    CHECK(std::abs(orb.q(40.0)) < 1e-9);
    CHECK(orb.qdot(2.0) == doctest::Approx(separatrix_qdot(2.0)).epsilon(1e-12));
}

TEST_CASE("action-angle: rotational asymptotics (E1), (E2)") {
    double r1_lo = 1e9, r1_hi = 0, r2_lo = 1e9, r2_hi = 0;
    for (double E : {1e-2, 1e-4, 1e-6}) {
        auto s = action_angle(Branch::rotational, E);
        CHECK(s.dP_dE > 0.0);
        double model1 = std::log(1.0 + 1.0 / std::sqrt(E));
        double ratio1 = s.dP_dE * 1.0 / model1;  // dP/dE ~ model (E1 inverted)
        r1_lo = std::min(r1_lo, ratio1);
        r1_hi = std::max(r1_hi, ratio1);
        // (E2): d2E/dP2 = -d2P/dE2 / (dP/dE)^3 ~ (1/E) ln^{-3}(1+1/sqrt(E))
        double d2E = -s.d2P_dE2 / std::pow(s.dP_dE, 3);
        double model2 = (1.0 / E) / std::pow(model1, 3);
        double ratio2 = d2E / model2;
        r2_lo = std::min(r2_lo, ratio2);
        r2_hi = std::max(r2_hi, ratio2);
    }
    // bounded above and below by positive constants across the sweep
    CHECK(r1_lo > 0.05);
    CHECK(r1_hi < 20.0);
    CHECK(r1_hi / r1_lo < 3.0);
    CHECK(r2_lo > 0.05);
    CHECK(r2_hi < 20.0);
    CHECK(r2_hi / r2_lo < 3.0);
}

TEST_CASE("steepness: F1 F3 = F2^2 pointwise and E''' < 0") {
    for (double E : {-1.9, -1.0, -0.1}) {
        for (double xi = 0.05; xi < 1.0; xi += 0.09) {
            double lhs = steepness_F1(xi, E) * steepness_F3(xi, E);
            double rhs = steepness_F2(xi, E) * steepness_F2(xi, E);
            CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
        }
        auto s = action_angle(Branch::librational, E);
        CHECK(s.dP_dE > 0.0);
        // strict Cauchy-Schwarz: (int F1)(int F3) > (int F2)^2
        CHECK(s.dP_dE * s.d3P_dE3 > 3.0 * s.d2P_dE2 * s.d2P_dE2);
        CHECK(steepness_third_derivative(s) < 0.0);
    }
    CHECK_THROWS_AS(action_angle(Branch::librational, 0.5), ValidationError);
    CHECK_THROWS_AS(action_angle(Branch::rotational, -0.5), ValidationError);
}

TEST_CASE("librational action derivative agrees with finite differences") {
    for (double E : {-1.2, -0.4}) {
        double h = 1e-5;
        auto sp = action_angle(Branch::librational, E + h);
        auto sm = action_angle(Branch::librational, E - h);
        auto s0 = action_angle(Branch::librational, E);
        CHECK(std::abs((sp.P - sm.P) / (2 * h) - s0.dP_dE) < 1e-7);
        CHECK(std::abs((sp.dP_dE - sm.dP_dE) / (2 * h) - s0.d2P_dE2) < 1e-6);
    }
}

TEST_CASE("rotational action derivative agrees with finite differences") {
    for (double E : {0.5, 0.05}) {
        double h = 1e-6 * std::max(1.0, E);
        auto sp = action_angle(Branch::rotational, E + h);
        auto sm = action_angle(Branch::rotational, E - h);
        auto s0 = action_angle(Branch::rotational, E);
        CHECK(std::abs((sp.P - sm.P) / (2 * h) - s0.dP_dE) < 1e-6);
        CHECK(std::abs((sp.dP_dE - sm.dP_dE) / (2 * h) - s0.d2P_dE2) <
              1e-4 * std::abs(s0.d2P_dE2) + 1e-8);
    }
}
