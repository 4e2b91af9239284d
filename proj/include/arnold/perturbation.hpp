#pragma once
// Trigonometric-polynomial perturbations f(phi, q, t) of order N:
//   f = sum_{|(n,l)| <= N} f_{n,l}(q) exp(i(n.phi + l t)),
// with each q-profile a finite trigonometric series. Reality is enforced at
// construction (mode (-n,-l) must be the conjugate of mode (n,l)).

#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "arnold/common.hpp"

namespace arnold {

using Complex = std::complex<double>;

/// Finite trig series in q: p(q) = sum_m a_m cos(m q) + b_m sin(m q),
/// complex coefficients. cos_coeffs has order+1 entries, sin_coeffs has order.
struct QProfile {
    std::vector<Complex> cos_coeffs;  // m = 0..Mq
    std::vector<Complex> sin_coeffs;  // m = 1..Mq

    int order() const { return (int)cos_coeffs.size() - 1; }
    Complex eval(double q) const;
    Complex deriv(double q) const;
    Complex deriv2(double q) const;
    Complex value_at_zero() const;   // sum of cos coefficients
    Complex deriv_at_zero() const;   // sum of m * b_m
    double coeff_norm() const;       // sum |a_m| + |b_m|
    double lipschitz_bound() const;  // sum m (|a_m| + |b_m|)
    QProfile conjugate() const;
};

struct Mode {
    std::vector<int> n;  // length d
    int l = 0;
    QProfile profile;
};

struct ModeKey {
    std::vector<int> n;
    int l;
    bool operator<(const ModeKey& o) const {
        if (n != o.n) return n < o.n;
        return l < o.l;
    }
};

/// Immutable after construction; safe for concurrent read-only use.
class TrigPerturbation {
  public:
    /// Validates |(n,l)|_inf <= N and the reality pairing. With
    /// symmetrize = true, missing conjugate modes are added instead.
    TrigPerturbation(int d, int N, std::vector<Mode> modes, bool symmetrize = false);

    int d() const { return d_; }
    int order() const { return N_; }

    double eval(const double* phi, double q, double t) const;
    double eval(const Vec& phi, double q, double t) const { return eval(phi.data(), q, t); }

    /// Analytic first derivatives: d_phi f (d entries), d_q f, d_t f.
    void grad(const double* phi, double q, double t, double* dphi, double& dq,
              double& dt) const;

    /// Second derivatives needed by the collocation Jacobian:
    /// d2_phiphi (d*d row-major), d2_phiq (d), d2_qq.
    void hess(const double* phi, double q, double t, double* dpp, double* dpq,
              double& dqq) const;

    /// Fourier data of f(phi, 0, t): map (n,l) -> f_{n,l}(0), all modes
    /// including conjugates.
    std::map<ModeKey, Complex> fourier_at_zero() const;

    /// True when every profile has f_{n,l}(0) = 0 and f'_{n,l}(0) = 0, i.e.
    /// the perturbation and its gradient vanish on the unperturbed tori
    /// (Arnold's class (cos q - 1) * ftilde).
    bool vanishes_on_tori() const;

    /// Largest |n . omega + l| over stored modes; sets oscillation scale.
    double max_frequency(const Vec& omega) const;

    /// Canonical internal modes: one representative per conjugate pair plus
    /// the (0,0) mode. Evaluation sums 2*Re over representatives.
    const std::vector<Mode>& canonical_modes() const { return modes_; }

    /// All modes (representatives plus conjugates) for brute-force oracles.
    std::vector<Mode> all_modes() const;

    double coeff_norm() const;
    double lipschitz_bound() const;

    /// f + scale * other, merged mode-wise (orders may differ).
    TrigPerturbation combined(const TrigPerturbation& other, double scale) const;

    static TrigPerturbation load(const std::string& path);
    void save(const std::string& path) const;
    std::string to_json() const;
    static TrigPerturbation from_json(const std::string& text);

    /// Built-in Arnold family f = (cos q - 1)(sin phi_1 + cos t) for given d.
    static TrigPerturbation arnold_example(int d = 1);

  private:
    int d_, N_;
    std::vector<Mode> modes_;  // canonical: (0,0) first if present, then reps
    int max_profile_order_ = 0;
};

}  // namespace arnold
