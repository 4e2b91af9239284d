#include "arnold/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "arnold/ode.hpp"
#include "arnold/quadrature.hpp"

namespace arnold {

double separatrix_q(double t) {
    // 4 atan(e^t), written to avoid overflow for large |t|
    if (t >= 0) return TWO_PI - 4.0 * std::atan(std::exp(-t));
    return 4.0 * std::atan(std::exp(t));
}

double separatrix_qdot(double t) {
    double e = std::exp(-std::abs(t));
    return 4.0 * e / (1.0 + e * e);
}

double pendulum_energy(double p, double q) { return 0.5 * p * p + std::cos(q) - 1.0; }

namespace {

// Rotation speed at position q for energy E, cancellation-free:
// qdot = sqrt(2E + 4 sin^2(q/2)).
inline double rotation_speed(double E, double q) {
    double s = std::sin(0.5 * q);
    return std::sqrt(2.0 * E + 4.0 * s * s);
}

double transit_time_raw(double E) {
    // 2 * int_0^pi dq / qdot, peak at q = 0 resolved by tanh-sinh clustering
    return 2.0 * integrate_tanh_sinh(
                     [E](double q) { return 1.0 / rotation_speed(E, q); }, 0.0, PI,
                     1e-14, 14);
}

double transit_time_dE(double E) {
    // dT/dE = -int (2(E+1-cos q))^{-3/2} dq over [-pi, pi]
    return -2.0 * integrate_tanh_sinh(
                      [E](double q) {
                          double v = rotation_speed(E, q);
                          return 1.0 / (v * v * v);
                      },
                      0.0, PI, 1e-14, 14);
}

double transit_time_d2E(double E) {
    // d2T/dE2 = 3 int (2(E+1-cos q))^{-5/2} dq over [-pi, pi]
    return 6.0 * integrate_tanh_sinh(
                     [E](double q) {
                         double v = rotation_speed(E, q);
                         return 1.0 / (v * v * v * v * v);
                     },
                     0.0, PI, 1e-14, 14);
}

// ln E as a function of T on [kPendulumTMin, kSeparatrixSwitchT], tabulated
// once with exact derivatives, evaluated by quintic Hermite.
struct EnergyTable {
    double a = 4.0, b = kSeparatrixSwitchT;
    int n = 769;
    Vec lnE, dlnE, d2lnE;
    double h;
    double c_asym;  // E ~ c_asym * exp(-T) past the switch

    EnergyTable() {
        h = (b - a) / (n - 1);
        lnE.resize(n);
        dlnE.resize(n);
        d2lnE.resize(n);
        for (int i = 0; i < n; ++i) {
            double T = a + i * h;
            double E = bisect(T);
            lnE[i] = std::log(E);
            // dlnE/dT = 1 / (E * T'(E))
            double Tp = transit_time_dE(E);
            double Tpp = transit_time_d2E(E);
            dlnE[i] = 1.0 / (E * Tp);
            // g'' for g = lnE(T): -(T' + E T'') / (E^2 (T')^3)
            d2lnE[i] = -(Tp + E * Tpp) / (E * E * Tp * Tp * Tp);
        }
        c_asym = std::exp(lnE[n - 1]) * std::exp(b);
    }

    static double bisect(double T) {
        double lo = std::log(1e-27), hi = std::log(10.0);
        for (int it = 0; it < 120; ++it) {
            double mid = 0.5 * (lo + hi);
            double Tm = transit_time_raw(std::exp(mid));
            if (Tm > T)
                lo = mid;  // smaller E -> larger T
            else
                hi = mid;
            if (hi - lo < 1e-14) break;
        }
        return std::exp(0.5 * (lo + hi));
    }

    double eval(double T) const {
        double x = (T - a) / h;
        int i = std::clamp((int)std::floor(x), 0, n - 2);
        double s = x - i;
        double f0 = lnE[i], d0 = dlnE[i] * h, c0 = d2lnE[i] * h * h;
        double f1 = lnE[i + 1], d1 = dlnE[i + 1] * h, c1 = d2lnE[i + 1] * h * h;
        double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
        double h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
        double h10 = s - 6 * s3 + 8 * s4 - 3 * s5;
        double h20 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
        double h01 = 10 * s3 - 15 * s4 + 6 * s5;
        double h11 = -4 * s3 + 7 * s4 - 3 * s5;
        double h21 = 0.5 * (s3 - 2 * s4 + s5);
        return f0 * h00 + d0 * h10 + c0 * h20 + f1 * h01 + d1 * h11 + c1 * h21;
    }
};

const EnergyTable& energy_table() {
    static const EnergyTable tab;
    return tab;
}

}  // namespace

double transit_time(double E) {
    if (!(E > 0)) throw ValidationError("transit_time: requires E > 0");
    return transit_time_raw(E);
}

double energy_of_T(double T) {
    if (!(T >= 4.0))
        throw ValidationError("energy_of_T: T below the inversion range");
    const EnergyTable& tab = energy_table();
    if (T > kSeparatrixSwitchT) return tab.c_asym * std::exp(-T);
    return std::exp(tab.eval(T));
}

PeriodicOrbit::PeriodicOrbit(double T) : T_(T) {
    if (!(T >= kPendulumTMin))
        throw ValidationError("PeriodicOrbit: T below the admissible minimum");
    E_ = energy_of_T(T);
    sep_ = (T > kSeparatrixSwitchT);
    if (sep_) return;
    // March q' = rotation_speed(E, q) from q(0) = -pi over [0, T/2] and
    // tabulate on a uniform grid; the second half follows by odd symmetry.
    int m = std::max(96, (int)std::ceil(64.0 * T / 2.0));
    h_ = (0.5 * T) / m;
    tq_.resize(m + 1);
    qq_.resize(m + 1);
    Vec y{-PI};
    OdeOptions opt;
    opt.rel_tol = 5e-14;
    opt.abs_tol = 1e-15;
    opt.initial_step = 0.25 * h_;
    opt.max_step = h_;
    double E = E_;
    OdeRhs rhs = [E](double, const double* q, double* dq) {
        dq[0] = rotation_speed(E, q[0]);
    };
    tq_[0] = 0.0;
    qq_[0] = -PI;
    for (int j = 1; j <= m; ++j) {
        integrate_dp5(rhs, y, (j - 1) * h_, j * h_, opt);
        tq_[j] = j * h_;
        qq_[j] = y[0];
    }
    mid_defect_ = std::abs(qq_[m]);
}

double PeriodicOrbit::q_half(double t) const {
    // quintic Hermite between table nodes; q', q'' analytic at the nodes
    double x = t / h_;
    int i = std::clamp((int)std::floor(x), 0, (int)tq_.size() - 2);
    double s = x - i;
    double f0 = qq_[i], f1 = qq_[i + 1];
    double d0 = rotation_speed(E_, f0) * h_, d1 = rotation_speed(E_, f1) * h_;
    double c0 = std::sin(f0) * h_ * h_, c1 = std::sin(f1) * h_ * h_;
    double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    double h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    double h10 = s - 6 * s3 + 8 * s4 - 3 * s5;
    double h20 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    double h01 = 10 * s3 - 15 * s4 + 6 * s5;
    double h11 = -4 * s3 + 7 * s4 - 3 * s5;
    double h21 = 0.5 * (s3 - 2 * s4 + s5);
    return f0 * h00 + d0 * h10 + c0 * h20 + f1 * h01 + d1 * h11 + c1 * h21;
}

double PeriodicOrbit::q(double t) const {
    double k = std::floor(t / T_);
    double tr = t - k * T_;
    double base;
    if (sep_) {
        base = (tr <= 0.5 * T_) ? separatrix_q(tr) - TWO_PI : separatrix_q(tr - T_);
    } else {
        base = (tr <= 0.5 * T_) ? q_half(tr) : -q_half(T_ - tr);
    }
    return base + TWO_PI * k;
}

double PeriodicOrbit::qdot(double t) const {
    if (sep_) {
        double k = std::floor(t / T_);
        double tr = t - k * T_;
        return (tr <= 0.5 * T_) ? separatrix_qdot(tr) : separatrix_qdot(tr - T_);
    }
    return rotation_speed(E_, q(t));
}

double PeriodicOrbit::qddot(double t) const { return std::sin(q(t)); }

namespace {
// Librational integrand substitution xi = sin^2(alpha) removes both
// inverse-square-root endpoint singularities.
double libr_integral(int which, double E) {
    const int n_panels = 64;
    double Et = E + 2.0;
    auto f = [&](double alpha) {
        double sa = std::sin(alpha), ca = std::cos(alpha);
        double xi = sa * sa;
        double core = Et * xi - E;  // >= -E > 0 at xi=0, = 2 at xi=1
        double jac = 2.0 * sa * ca;
        switch (which) {
            case 1:
                return jac * std::sqrt(2.0) /
                       (PI * std::sqrt(xi) * std::sqrt(1.0 - xi) * std::sqrt(core));
            case 2:
                return jac * std::sqrt(6.0) * std::sqrt(1.0 - xi) /
                       (2.0 * PI * std::sqrt(xi) * std::pow(core, 1.5));
            default:
                return jac * 3.0 * std::sqrt(2.0) * std::pow(1.0 - xi, 1.5) /
                       (4.0 * PI * std::sqrt(xi) * std::pow(core, 2.5));
        }
    };
    return integrate_gl(f, 0.0, 0.5 * PI, n_panels, 10);
}

double rot_integral(double E, double power) {
    // int_0^pi (E + 1 + cos psi)^{-power} dpsi, singular-ish at psi = pi
    return integrate_tanh_sinh(
        [&](double psi) {
            double u = 0.5 * (PI - psi);
            double su = std::sin(u);
            double core = E + 2.0 * su * su;  // E + 1 + cos(psi), exact form
            return std::pow(core, -power);
        },
        0.0, PI, 1e-13, 14);
}
}  // namespace

double steepness_F1(double xi, double E) {
    double Et = E + 2.0;
    return std::sqrt(2.0) / (PI * std::sqrt(xi) * std::sqrt(1 - xi) * std::sqrt(Et * xi - E));
}

double steepness_F2(double xi, double E) {
    double Et = E + 2.0;
    return std::sqrt(6.0) * std::sqrt(1 - xi) / (2.0 * PI * std::sqrt(xi) * std::pow(Et * xi - E, 1.5));
}

double steepness_F3(double xi, double E) {
    double Et = E + 2.0;
    return 3.0 * std::sqrt(2.0) * std::pow(1 - xi, 1.5) /
           (4.0 * PI * std::sqrt(xi) * std::pow(Et * xi - E, 2.5));
}

ActionAngleSample action_angle(Branch branch, double E) {
    ActionAngleSample s;
    s.E = E;
    if (branch == Branch::rotational) {
        if (!(E > 0)) throw ValidationError("action_angle: rotational branch needs E > 0");
        double sq2pi = std::sqrt(2.0) / PI;
        s.P = sq2pi * integrate_tanh_sinh(
                          [&](double psi) {
                              double u = 0.5 * (PI - psi);
                              double su = std::sin(u);
                              return std::sqrt(E + 2.0 * su * su);
                          },
                          0.0, PI, 1e-13, 13);
        s.dP_dE = 0.5 * sq2pi * rot_integral(E, 0.5);
        s.d2P_dE2 = -0.25 * sq2pi * rot_integral(E, 1.5);
        s.d3P_dE3 = 0.375 * sq2pi * rot_integral(E, 2.5);
    } else {
        if (!(E > -2.0 && E < 0.0))
            throw ValidationError("action_angle: librational branch needs E in (-2, 0)");
        double psi0 = std::acos(-1.0 - E);
        s.P = (2.0 * std::sqrt(2.0) / PI) *
              integrate_tanh_sinh(
                  [&](double psi) {
                      double c = E + 1.0 + std::cos(psi);
                      return (c > 0) ? std::sqrt(c) : 0.0;
                  },
                  0.0, psi0, 1e-13, 13);
        s.dP_dE = libr_integral(1, E);
        s.d2P_dE2 = libr_integral(2, E) / std::sqrt(3.0);
        s.d3P_dE3 = libr_integral(3, E);
    }
    return s;
}

double steepness_third_derivative(const ActionAngleSample& s) {
    double dP = s.dP_dE;
    return -(dP * s.d3P_dE3 - 3.0 * s.d2P_dE2 * s.d2P_dE2) / std::pow(dP, 5);
}

namespace {
DecayFit fit_loglinear(const Vec& T, const Vec& y) {
    // least squares ln y = ln K1 - K2 T
    int n = (int)T.size();
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (int i = 0; i < n; ++i) {
        double ly = std::log(y[i]);
        st += T[i];
        sy += ly;
        stt += T[i] * T[i];
        sty += T[i] * ly;
    }
    double slope = (n * sty - st * sy) / (n * stt - st * st);
    double intercept = (sy - slope * st) / n;
    return DecayFit{std::exp(intercept), -slope};
}
}  // namespace

DecayFit fit_rotation_energy_decay() {
    Vec Ts = {14, 18, 22, 26, 30}, ys;
    for (double T : Ts) ys.push_back(energy_of_T(T));
    return fit_loglinear(Ts, ys);
}

DecayFit fit_rotation_sup_decay() {
    Vec Ts = {14, 18, 22, 26, 30}, ys;
    for (double T : Ts) {
        PeriodicOrbit orb(T);
        double sup = 0.0;
        for (int i = 0; i <= 400; ++i) {
            double t = 1.0 + (T - 2.0) * i / 400.0;
            double qi = (t < 0.5 * T) ? separatrix_q(t) - TWO_PI : separatrix_q(t - T);
            sup = std::max(sup, std::abs(orb.q(t) - qi));
        }
        ys.push_back(sup);
    }
    return fit_loglinear(Ts, ys);
}

}  // namespace arnold
