#pragma once
// Poincare-Melnikov primitives along the separatrix:
//   Gamma(omega, theta0, phi0) = -int_R [f(omega t + phi0, q0(t), t + theta0)
//                                        - f(omega t + phi0, 0, t + theta0)] dt
// with stable/unstable half-line variants, the resonant boundary term F, local
// minima by Newton, continuation along frequency curves, and the certification
// of the box constants used by the chain minimization.
//
// Gradient/Hessian component ordering throughout: index 0 is theta0, indices
// 1..d are phi0.

#include <vector>

#include "arnold/common.hpp"
#include "arnold/perturbation.hpp"
#include "arnold/resonance.hpp"

namespace arnold {

enum class GammaKind { full, unstable, stable };

/// Node/sample cache shared by every frequency: quadrature grid on
/// [-T_cut, T_cut] and the per-mode separatrix samples f_{n,l}(q0(t)) - f_{n,l}(0).
class MelnikovFamily {
  public:
    /// omega_max bounds |omega|_1 for every later evaluation (panel sizing);
    /// tail_tol is the certified truncation error budget.
    explicit MelnikovFamily(const TrigPerturbation& P, double omega_max = 4.0,
                            double tail_tol = 1e-12, double t_cut_override = 0.0);

    const TrigPerturbation& perturbation() const { return P_; }
    double t_cut() const { return t_cut_; }
    double tail_bound() const { return tail_bound_; }
    int d() const { return P_.d(); }

    struct Integrals {
        // per canonical mode: full/unstable/stable integrals and t-moments
        std::vector<Complex> I, Iu, Is, J, Ju, Js;
        Vec nu;
        double I00 = 0.0, Iu00 = 0.0, Is00 = 0.0;  // (0,0) contributions
    };
    Integrals integrals(const Vec& omega) const;

  private:
    TrigPerturbation P_;
    double omega_max_, t_cut_, tail_bound_;
    Vec nodes_, weights_;                      // t <= 0 first, then t >= 0
    int n_neg_ = 0;                            // nodes in the t <= 0 half
    std::vector<std::vector<Complex>> gsamp_;  // [mode][node]
    std::vector<int> mode_l_;
    std::vector<std::vector<int>> mode_n_;
    int zero_mode_ = -1;  // index of the (0,0) mode or -1
};

/// Gamma and derivatives at one frequency; construct once per omega and query
/// many (theta0, phi0).
class Melnikov {
  public:
    Melnikov(const MelnikovFamily& family, Vec omega);

    const Vec& omega() const { return omega_; }
    double value(GammaKind kind, double theta0, const Vec& phi0) const;
    Vec gradient(GammaKind kind, double theta0, const Vec& phi0) const;
    Vec hessian(GammaKind kind, double theta0, const Vec& phi0) const;
    /// d/d omega_j of Gamma(kind); uses the t-moment integrals.
    Vec domega(GammaKind kind, double theta0, const Vec& phi0) const;

  private:
    const MelnikovFamily* fam_;
    Vec omega_;
    MelnikovFamily::Integrals ints_;
};

/// Resonant boundary term F(omega, theta0, phi0) of the reduced functional:
/// -f_{0,0}(0) theta0 - sum f_{n,l}(0) e^{i(n phi0 + l theta0)} / (i(n.omega+l)).
struct FTermEval {
    double value = 0.0;
    Vec grad;    // d+1, ordering as above
    Vec domega;  // d
};
FTermEval f_term(const TrigPerturbation& P, const Vec& omega, double theta0,
                 const Vec& phi0);

struct MelnikovMinimum {
    Vec omega;
    double theta0 = 0.0;
    Vec phi0;
    Vec hessian;            // (d+1)^2 row-major, theta first
    double lambda_min = 0.0;
    double grad_norm = 0.0;
};

/// Coarse grid scan (n_grid^{d+1} points) for a minimization seed.
std::pair<double, Vec> grid_seed(const Melnikov& gamma, int n_grid = 32);

/// Newton refinement of a local minimum from a seed (theta0, phi0).
MelnikovMinimum find_minimum(const MelnikovFamily& family, const Vec& omega,
                             double theta0_seed, const Vec& phi0_seed);

/// Continuation of minima along a frequency curve; minima[i] corresponds to
/// curve.at(s_values[i]). Also reports the fitted Lipschitz constant of
/// s -> (theta0, phi0).
struct ContinuationResult {
    std::vector<MelnikovMinimum> minima;
    double lipschitz_K = 0.0;
};
ContinuationResult continue_minima(const MelnikovFamily& family, const CurvePath& curve,
                                   const Vec& s_values);

/// Box constants for the chain minimization: the certified (r, b_bar) box,
/// margins nu1/nu2, the robustness radius delta, and the frequency step rho.
struct BoxConstants {
    double r = 0.0, b_bar = 0.0;
    double nu1 = 0.0, nu2 = 0.0;
    double delta = 0.0, rho = 0.0;
    double eps = 0.0;           // coercivity floor used for the construction
    double hess_lipschitz = 0.0;
    double C2_used = 0.0;
    int samples = 0;
};

/// Certify the box over the minima samples. C2_config calibrates rho
/// (empirically validated by the remainder-ledger study). Throws
/// NumericalError when no radius in [r_min, r0] certifies.
BoxConstants certify_box(const MelnikovFamily& family,
                         const std::vector<MelnikovMinimum>& samples,
                         double C2_config = 0.25, double r0 = 1.0,
                         double r_min = 1e-3);

/// Direct re-check of the certified conditions on an n-times finer boundary
/// grid; returns the worst margins (used by tests).
struct BoxMargins {
    double margin_ii = 0.0;  // min d_b Gamma~ sign(b) on b = +-b_bar
    double margin_i = 0.0;   // min over |c|=r of max-normalized OR margin
};
BoxMargins recheck_box(const MelnikovFamily& family,
                       const std::vector<MelnikovMinimum>& samples,
                       const BoxConstants& box, int refine = 10);

}  // namespace arnold
