#pragma once
// Adaptive Dormand-Prince 5(4) integrator for the full equations of motion
// and generic smooth systems. Step control on mixed abs/rel error.

#include <functional>

#include "arnold/common.hpp"

namespace arnold {

using OdeRhs = std::function<void(double t, const double* y, double* dydt)>;

struct OdeOptions {
    double rel_tol = 1e-11;
    double abs_tol = 1e-12;
    double initial_step = 1e-3;
    double max_step = 1.0;
    long max_steps = 200'000'000;
};

/// Integrate y' = f(t,y) from t0 to t1 in place. Optional observer is called
/// after every accepted step. Throws ResourceError when out of steps.
void integrate_dp5(const OdeRhs& f, Vec& y, double t0, double t1,
                   const OdeOptions& opt = {},
                   const std::function<void(double, const Vec&)>& observer = nullptr);

}  // namespace arnold
