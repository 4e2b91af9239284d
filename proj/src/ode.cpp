#include "arnold/ode.hpp"

#include <algorithm>
#include <cmath>

namespace arnold {

namespace {
// Dormand-Prince 5(4) tableau.
const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
const double a21 = 1.0 / 5;
const double a31 = 3.0 / 40, a32 = 9.0 / 40;
const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
             a54 = -212.0 / 729;
const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
             a64 = 49.0 / 176, a65 = -5103.0 / 18656;
const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
             b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// embedded 4th-order weights
const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
             e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
}  // namespace

void integrate_dp5(const OdeRhs& f, Vec& y, double t0, double t1, const OdeOptions& opt,
                   const std::function<void(double, const Vec&)>& observer) {
    const int n = (int)y.size();
    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    double t = t0;
    double h = dir * std::min(opt.initial_step, opt.max_step);
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n);
    f(t, y.data(), k1.data());
    long steps = 0;
    while (dir * (t1 - t) > 0) {
        if (++steps > opt.max_steps) throw ResourceError("integrate_dp5: step budget exceeded");
        if (dir * (t + h - t1) > 0) h = t1 - t;
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, ytmp.data(), k2.data());
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, ytmp.data(), k3.data());
        for (int i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, ytmp.data(), k4.data());
        for (int i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, ytmp.data(), k5.data());
        for (int i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        f(t + h, ytmp.data(), k6.data());
        for (int i = 0; i < n; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(t + h, y5.data(), k7.data());
        // error estimate
        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            double y4 = y[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                    e6 * k6[i] + e7 * k7[i]);
            double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            double d = (y5[i] - y4) / sc;
            err += d * d;
        }
        err = std::sqrt(err / n);
        if (err <= 1.0) {
            t += h;
            y = y5;
            k1 = k7;  // FSAL
            if (observer) observer(t, y);
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        h *= fac;
        if (std::abs(h) > opt.max_step) h = dir * opt.max_step;
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
            throw NumericalError("integrate_dp5: step size underflow");
    }
}

}  // namespace arnold
