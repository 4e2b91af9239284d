#pragma once
// Unperturbed pendulum -q'' + sin q = 0: separatrix, periodic rotations Q_T,
// transit-time/energy maps, and action-angle quadratures on both branches.

#include "arnold/common.hpp"

namespace arnold {

/// Separatrix q0(t) = 4 arctan(e^t); q0(0) = pi, energy 0.
double separatrix_q(double t);
double separatrix_qdot(double t);  // 2 / cosh t

/// Pendulum energy E(p, q) = p^2/2 + cos q - 1.
double pendulum_energy(double p, double q);

/// Transit time -pi -> pi of the rotation with energy E > 0:
/// T(E) = int_{-pi}^{pi} dq / sqrt(2(E + 1 - cos q)). Monotone decreasing.
double transit_time(double E);

/// Inverse of transit_time; requires T >= kPendulumTMin.
double energy_of_T(double T);

constexpr double kPendulumTMin = 10.0;

/// Above this transit time the rotation is represented by the separatrix
/// (gap |Q_T - q_inf| ~ 4 e^{-T/2} is below every tolerance in use).
constexpr double kSeparatrixSwitchT = 58.0;

/// The T-periodic rotation Q_T with Q_T(0) = -pi, Q_T(T) = pi and
/// Q_T(t + T) = Q_T(t) + 2*pi. Immutable after construction.
class PeriodicOrbit {
  public:
    explicit PeriodicOrbit(double T);

    double T() const { return T_; }
    double E() const { return E_; }
    bool separatrix_backed() const { return sep_; }

    /// Defined for all t (time-shifted continuation of the rotation).
    double q(double t) const;
    double qdot(double t) const;
    double qddot(double t) const;

    /// Construction-time grid on [0, T/2] (empty for separatrix-backed).
    const Vec& table_times() const { return tq_; }
    const Vec& table_values() const { return qq_; }

    /// |q(T/2)| symmetry defect, a construction accuracy report.
    double midpoint_defect() const { return mid_defect_; }

  private:
    double q_half(double t) const;  // t in [0, T/2]
    double T_, E_;
    bool sep_;
    double h_ = 0.0;
    double mid_defect_ = 0.0;
    Vec tq_, qq_;
};

enum class Branch { rotational, librational };

/// Action P(E) with derivatives by quadrature. rotational: E > 0,
/// librational: -2 < E < 0.
struct ActionAngleSample {
    double E = 0.0;
    double P = 0.0;
    double dP_dE = 0.0;
    double d2P_dE2 = 0.0;
    double d3P_dE3 = 0.0;
};

ActionAngleSample action_angle(Branch branch, double E);

/// E'''(P) from an ActionAngleSample: -(dP)^{-5} (dP * d3P - 3 (d2P)^2).
double steepness_third_derivative(const ActionAngleSample& s);

/// Integrands of the librational derivative quadratures on xi in (0,1).
double steepness_F1(double xi, double E);
double steepness_F2(double xi, double E);
double steepness_F3(double xi, double E);

struct DecayFit {
    double K1 = 0.0, K2 = 0.0;
};

/// Fit of E(T) ~ K1 exp(-K2 T) over a transit-time grid; K2 is the measured
/// rate the endpoint data (hence the hyperbolic exponent) decays with.
DecayFit fit_rotation_energy_decay();

/// Fit of sup_t |Q_T - q_inf| ~ K1 exp(-K2 T). The sup sits at the orbit
/// midpoint and decays with half the exponent of the endpoint fit.
DecayFit fit_rotation_sup_decay();

}  // namespace arnold
