#pragma once
// Quadrature kit: Gauss-Legendre panels, tanh-sinh for endpoint singularities,
// and high-order composite rules on uniform samples (definite + cumulative).

#include <functional>
#include <vector>

#include "arnold/common.hpp"

namespace arnold {

/// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    Vec x, w;
    explicit GaussLegendre(int n);
};

/// Cached rule lookup (n in a small set used across the library).
const GaussLegendre& gauss_legendre(int n);

/// Composite Gauss-Legendre over [a,b] split into `panels` equal panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int n = 10);

/// Tanh-sinh (double exponential) quadrature on (a,b); tolerates integrable
/// endpoint singularities. `max_level` doubles the node count per level.
double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-13, int max_level = 12);

/// Definite integral of uniformly sampled data by the 6th-order Gregory rule.
/// y has n >= 7 samples with spacing h.
double integrate_gregory6(const double* y, int n, double h);

/// Cumulative integral (out[j] = int_{t0}^{t_j}) of uniform samples, 6th order.
/// Uses local quintic stencils; out[0] = 0. n >= 7.
void cumulative_integral6(const double* y, int n, double h, double* out);

/// Richardson-style adaptive GL with panel doubling until |I2-I1| <= tol.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int n = 10, int max_panels = 1 << 16);

}  // namespace arnold
