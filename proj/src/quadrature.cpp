#include "arnold/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>

namespace arnold {

GaussLegendre::GaussLegendre(int n) : x(n), w(n) {
    // Newton on Legendre polynomials, Chebyshev initial guesses.
    for (int i = 0; i < n; ++i) {
        double xi = std::cos(PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = xi;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
            double dx = p1 / dp;
            xi -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = xi;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
        x[n - 1 - i] = xi;
        w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
}

const GaussLegendre& gauss_legendre(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
    return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int n) {
    const GaussLegendre& gl = gauss_legendre(n);
    double h = (b - a) / panels, total = 0.0;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * h, r = 0.5 * h;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += gl.w[i] * f(c + r * gl.x[i]);
        total += s * r;
    }
    return total;
}

double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, int max_level) {
    // x = c + r*tanh(pi/2 sinh(u)), truncated at |u| <= U.
    const double r = 0.5 * (b - a);
    const double U = 3.7;
    double result = 0.0;
    double h = 1.0;
    // Stable node placement: the abscissa is formed from its distance to the
    // near endpoint so that endpoint singularities see full precision.
    auto node = [&](double u, double& xx, double& dt) {
        double y = 0.5 * PI * std::sinh(u);
        double e = std::exp(-2.0 * std::abs(y));
        double w_near = 2.0 * e / (1.0 + e);  // 1 - |tanh(y)|
        xx = (u >= 0) ? b - r * w_near : a + r * w_near;
        double ch_half = std::cosh(y);
        dt = 0.5 * PI * std::cosh(u) / (ch_half * ch_half);
    };
    {
        double s = 0.0;
        int n0 = (int)std::floor(U / h);
        for (int k = -n0; k <= n0; ++k) {
            double xx, dt;
            node(k * h, xx, dt);
            if (xx <= a || xx >= b) continue;
            s += f(xx) * dt;
        }
        result = s * h * r;
    }
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        double s = 0.0;
        int n0 = (int)std::floor(U / (2 * h));
        for (int k = -n0 - 1; k <= n0; ++k) {
            double u = (2 * k + 1) * h;  // new odd nodes only
            if (std::abs(u) > U) continue;
            double xx, dt;
            node(u, xx, dt);
            if (xx <= a || xx >= b) continue;
            s += f(xx) * dt;
        }
        double prev = result;
        result = 0.5 * result + s * h * r;
        if (level >= 4 &&
            std::abs(result - prev) <= rel_tol * std::max(1e-300, std::abs(result)))
            break;
    }
    return result;
}

namespace {

// Per-step weights for the integral of the degree-5 interpolant over one grid
// step, samples at integer offsets rel. to the step's left endpoint.
// Derived once by solving the 6x6 Vandermonde system (exact for deg <= 5).
struct StepWeights {
    // pattern p = (stencil base) - (step index i), in {-5..0}
    std::array<std::array<double, 6>, 6> w{};
    StepWeights() {
        for (int p = -5; p <= 0; ++p) {
            // sample offsets s_k = p + k, k = 0..5; integrate x^m over [0,1]
            double A[6][7];
            for (int m = 0; m < 6; ++m) {
                for (int k = 0; k < 6; ++k) A[m][k] = std::pow(double(p + k), m);
                A[m][6] = 1.0 / (m + 1);
            }
            // Gaussian elimination with partial pivoting
            for (int col = 0; col < 6; ++col) {
                int piv = col;
                for (int r2 = col + 1; r2 < 6; ++r2)
                    if (std::abs(A[r2][col]) > std::abs(A[piv][col])) piv = r2;
                std::swap(A[piv], A[col]);
                for (int r2 = 0; r2 < 6; ++r2) {
                    if (r2 == col) continue;
                    double fct = A[r2][col] / A[col][col];
                    for (int cc = col; cc < 7; ++cc) A[r2][cc] -= fct * A[col][cc];
                }
            }
            for (int k = 0; k < 6; ++k) w[p + 5][k] = A[k][6] / A[k][k];
        }
    }
};

const StepWeights& step_weights() {
    static const StepWeights sw;
    return sw;
}

inline double step_integral(const double* y, int n, int i) {
    int base = std::clamp(i - 2, 0, n - 6);
    const auto& w = step_weights().w[base - i + 5];
    const double* yp = y + base;
    double s = 0.0;
    for (int k = 0; k < 6; ++k) s += w[k] * yp[k];
    return s;
}

}  // namespace

double integrate_gregory6(const double* y, int n, double h) {
    if (n < 7) throw ValidationError("integrate_gregory6: need >= 7 samples");
    double s = 0.0;
    for (int i = 0; i + 1 < n; ++i) s += step_integral(y, n, i);
    return s * h;
}

void cumulative_integral6(const double* y, int n, double h, double* out) {
    if (n < 7) throw ValidationError("cumulative_integral6: need >= 7 samples");
    out[0] = 0.0;
    for (int i = 0; i + 1 < n; ++i) out[i + 1] = out[i] + h * step_integral(y, n, i);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int n, int max_panels) {
    int panels = 4;
    double prev = integrate_gl(f, a, b, panels, n);
    while (panels < max_panels) {
        panels *= 2;
        double cur = integrate_gl(f, a, b, panels, n);
        if (std::abs(cur - prev) <= abs_tol) return cur;
        prev = cur;
    }
    throw NumericalError("integrate_adaptive: tolerance not reached within panel budget");
}

}  // namespace arnold
