#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "arnold/linalg.hpp"
#include "arnold/ode.hpp"
#include "arnold/quadrature.hpp"

using namespace arnold;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
    auto f = [](double x) { return 5 * x * x * x * x - x + 2; };
    double got = integrate_gl(f, -1.0, 2.0, 3, 8);
    // exact: x^5 - x^2/2 + 2x over [-1,2]
    double exact = (32.0 - 2.0 + 4.0) - (-1.0 - 0.5 - 2.0);
    CHECK(std::abs(got - exact) < 1e-12);
}

TEST_CASE("tanh-sinh handles endpoint singularity") {
    // int_0^1 1/sqrt(x) dx = 2
    double got = integrate_tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0, 1);
    CHECK(std::abs(got - 2.0) < 1e-11);
    // peak near endpoint: int_0^1 1/sqrt(1e-8 + x^2/2)
    double e = 1e-8;
    double got2 = integrate_tanh_sinh(
        [e](double x) { return 1.0 / std::sqrt(e + 0.5 * x * x); }, 0, 1, 1e-14, 14);
    double s = std::sqrt(2.0);
    double exact2 = s * std::asinh(1.0 / std::sqrt(2.0 * e));
    CHECK(std::abs(got2 - exact2) / exact2 < 1e-11);
}

TEST_CASE("gregory6 definite and cumulative") {
    int n = 201;
    double a = 0.0, b = 3.0, h = (b - a) / (n - 1);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        double x = a + i * h;
        y[i] = std::sin(2.0 * x) + 0.3 * x;
    }
    auto F = [](double x) { return -0.5 * std::cos(2.0 * x) + 0.15 * x * x; };
    CHECK(std::abs(integrate_gregory6(y.data(), n, h) - (F(b) - F(a))) < 1e-10);
    std::vector<double> cum(n);
    cumulative_integral6(y.data(), n, h, cum.data());
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        worst = std::max(worst, std::abs(cum[i] - (F(a + i * h) - F(a))));
    CHECK(worst < 1e-10);
}

TEST_CASE("tridiagonal and block tridiagonal solvers") {
    int n = 50;
    Vec a(n, -1.0), b(n, 2.5), c(n, -1.0), d(n);
    Vec x_true(n);
    for (int i = 0; i < n; ++i) x_true[i] = std::sin(0.3 * i);
    for (int i = 0; i < n; ++i) {
        d[i] = b[i] * x_true[i];
        if (i > 0) d[i] += a[i] * x_true[i - 1];
        if (i + 1 < n) d[i] += c[i] * x_true[i + 1];
    }
    solve_tridiagonal(a, b, c, d);
    for (int i = 0; i < n; ++i) CHECK(std::abs(d[i] - x_true[i]) < 1e-12);

    // block version, nb = 2
    int m = 20, nb = 2;
    std::vector<Vec> sub(m, Vec(nb * nb)), diag(m, Vec(nb * nb)), sup(m, Vec(nb * nb));
    Vec xt(m * nb), rhs(m * nb, 0.0);
    for (int i = 0; i < m; ++i) {
        diag[i] = {4.0, 0.3, -0.2, 3.5};
        sub[i] = {-1.0, 0.1, 0.0, -0.9};
        sup[i] = {-0.8, 0.0, 0.2, -1.1};
        xt[i * nb] = std::cos(0.2 * i);
        xt[i * nb + 1] = 0.5 * std::sin(0.4 * i);
    }
    for (int i = 0; i < m; ++i)
        for (int r = 0; r < nb; ++r) {
            double s = 0.0;
            for (int k = 0; k < nb; ++k) {
                s += diag[i][r * nb + k] * xt[i * nb + k];
                if (i > 0) s += sub[i][r * nb + k] * xt[(i - 1) * nb + k];
                if (i + 1 < m) s += sup[i][r * nb + k] * xt[(i + 1) * nb + k];
            }
            rhs[i * nb + r] = s;
        }
    solve_block_tridiagonal(sub, diag, sup, rhs, nb);
    for (int i = 0; i < m * nb; ++i) CHECK(std::abs(rhs[i] - xt[i]) < 1e-11);
}

TEST_CASE("symmetric eigenvalues") {
    // [[2,1,0],[1,3,0.5],[0,0.5,1]]
    Vec A = {2, 1, 0, 1, 3, 0.5, 0, 0.5, 1};
    Vec ev = symmetric_eigenvalues(A, 3);
    // characteristic check: eigenvalue equation residual
    for (double lam : ev) {
        double det = (2 - lam) * ((3 - lam) * (1 - lam) - 0.25) - ((1 - lam) * 1.0);
        CHECK(std::abs(det) < 1e-10);
    }
    CHECK(ev[0] <= ev[1]);
    CHECK(ev[1] <= ev[2]);
}

TEST_CASE("dp5 integrates a known oscillator") {
    // y'' = -y, y(0)=1, y'(0)=0 over [0, 20]
    OdeRhs f = [](double, const double* y, double* dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    Vec y = {1.0, 0.0};
    OdeOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-13;
    integrate_dp5(f, y, 0.0, 20.0, opt);
    CHECK(std::abs(y[0] - std::cos(20.0)) < 1e-9);
    CHECK(std::abs(y[1] + std::sin(20.0)) < 1e-9);
}
