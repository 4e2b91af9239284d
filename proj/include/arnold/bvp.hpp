#pragma once
// One pendulum transition: the boundary-value problem
//   phi'' = -mu d_phi f(phi, q, t),   -q'' + sin q = mu d_q f(phi, q, t)
// with phi(theta+-) = phi+-, q(theta+) = -pi, q(theta-) = pi, solved by the
// fixed-point scheme v <- J(v,w), w <- K(v,w) = Green(-S(w) + mu F_q) around
// the straight line + rotation Q_T, and independently by damped-Newton
// collocation as an oracle.

#include <optional>

#include "arnold/common.hpp"
#include "arnold/pendulum.hpp"
#include "arnold/perturbation.hpp"

namespace arnold {

struct TransitionParams {
    double theta_p = 0.0, theta_m = 0.0;  // theta+ < theta-
    Vec phi_p, phi_m;

    double T() const { return theta_m - theta_p; }
    Vec omega() const {
        Vec w = phi_m;
        for (size_t j = 0; j < w.size(); ++j) w[j] = (phi_m[j] - phi_p[j]) / T();
        return w;
    }
};

struct SolverSettings {
    double mu = 0.0;
    double C0 = 0.5;   // admissible domain: C0 beta^2 > mu, T <= C0 beta / mu
    double C1 = 4.0;   // T >= C1 |ln mu|
    double c1_norm = 1.0;
    double contraction_tol = 1e-13;
    int max_iterations = 80;
    int n_per_unit = 0;       // 0 = oscillation-aware default
    bool relax_domain = false;  // perturbations vanishing on the tori
    double T_max = 5e4;
};

/// Solved transition on a uniform mesh covering [theta+-ext, theta-+ext],
/// ext >= 1. Node arrays are in local time tau = t - theta+.
struct ConnectingOrbit {
    TransitionParams lambda;
    double mu = 0.0;
    int d = 0;
    int n = 0, i0 = 0, iT = 0;  // node count; indices of tau = 0 and tau = T
    double h = 0.0;
    Vec v, vdot;    // n*d, row-major per node
    Vec w, wdot;    // n
    Vec Q, Qdot;    // rotation samples on the mesh
    Vec fphi_node;  // n*d, d_phi f at the solution (last evaluation pass)
    Vec fq_node, f_node, ft_node;
    // endpoint data in global time
    Vec phidot_p, phidot_m;
    double qdot_p = 0.0, qdot_m = 0.0;
    // diagnostics
    int iterations = 0;
    double contraction_factor = 0.0;
    double update_norm = 0.0;
    double beta = 0.0;
    double action = 0.0;  // integral of L_mu over [theta+, theta-]
    double sup_v = 0.0, sup_vdot = 0.0, sup_w = 0.0, sup_wdot = 0.0;
    double green_constant = 0.0;
    double discrete_residual = 0.0;  // final defect of the solved discrete system

    double tau_of(int i) const { return (i - i0) * h; }
    Vec phi_at(double t) const;     // global time
    Vec phidot_at(double t) const;
    double q_at(double t) const;
    double qdot_at(double t) const;
};

/// Green operator of Lemma-type -h'' + cos(Q_T(tau)) h = f with h(0) = h(T) = 0
/// on a uniform mesh (i0, iT are the node indices of tau = 0, T). Returns the
/// solution, its derivative, and the measured stability constant.
struct GreenResult {
    Vec h, hdot;
    double stability_constant = 0.0;
};
GreenResult green_solve(const PeriodicOrbit& QT, const Vec& f, int n, int i0, int iT,
                        double h_mesh);

class TransitionSolver {
  public:
    TransitionSolver(const TrigPerturbation& P, SolverSettings s);

    const TrigPerturbation& perturbation() const { return *P_; }
    const SolverSettings& settings() const { return s_; }

    /// Throws ValidationError when lambda is outside the admissible domain.
    void validate_domain(const TransitionParams& lambda) const;

    /// Fixed-point solve. warm (same mesh) seeds the iteration; m_in_hint
    /// freezes the interior interval count (mesh continuity across nearby
    /// lambdas). Throws NumericalError when the iteration is not contracting.
    ConnectingOrbit solve(const TransitionParams& lambda,
                          const ConnectingOrbit* warm = nullptr,
                          int m_in_hint = 0) const;

    /// Independent damped-Newton collocation on its own finer mesh;
    /// density_factor scales the mesh relative to the main solver.
    ConnectingOrbit solve_collocation(const TransitionParams& lambda,
                                      double density_factor = 3.0) const;

    /// Max-norm residuals of the equations of motion measured with 7-point
    /// stencils on the stored mesh (excludes a band near the mesh edges).
    struct Residuals {
        double phi = 0.0, q = 0.0;
    };
    Residuals residuals(const ConnectingOrbit& orbit) const;

    /// Max deviation of d/dt[|phidot|^2/2 + qdot^2/2 + cos q - 1 + mu f] from
    /// mu d_t f along the solution (energy-rate identity).
    double energy_rate_defect(const ConnectingOrbit& orbit) const;

  private:
    const TrigPerturbation* P_;
    SolverSettings s_;
};

/// Endpoint-velocity sensitivities by re-solving at lambda +- h e_j.
/// Components of lambda are ordered [theta+, theta-, phi+ (d), phi- (d)].
struct Sensitivity {
    int d = 0;
    std::vector<Vec> dphidot_p;  // per component j: d phidot(theta+) / d lambda_j
    std::vector<Vec> dphidot_m;
    std::vector<bool> ok;  // per component: both re-solves succeeded
};
Sensitivity transition_sensitivity(const TransitionSolver& solver,
                                   const TransitionParams& lambda, double h_fd = 1e-5);

}  // namespace arnold
