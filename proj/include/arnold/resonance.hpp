#pragma once
// Resonant webs and ergodization: small denominators beta_N, distance to the
// non-ergodizing set Q_M, dual lattices, alpha(Lambda, Omega, R), the two-sided
// ergodization-time bounds, an empirical covering-time measurement, and the
// admissibility check for connecting curves.

#include <optional>
#include <vector>

#include "arnold/common.hpp"

namespace arnold {

struct ResonancePair {
    std::vector<int> n;
    int l = 0;
};

/// beta_N(omega) = min |n.omega + l| over 0 < |(n,l)|_inf <= N, with witness.
struct SmallDenominator {
    double beta = 0.0;
    ResonancePair witness;
};
SmallDenominator small_denominator(const Vec& omega, int N);

/// Primitive pairs h = (n,l), n != 0, l >= 0, 0 < |h|_inf <= M (the index set
/// of the resonance planes E_h forming Q_M).
std::vector<ResonancePair> primitive_pairs(int d, int M);

/// min over h in S_M of |n.omega + l| / |n|_2 (distance to Q_M), with witness.
struct DistToQM {
    double dist = 0.0;
    ResonancePair witness;
};
DistToQM dist_to_QM(const Vec& omega, int M);

struct Lattice {
    int dim = 0;
    Vec basis;  // dim x dim, row-major, columns generate the lattice

    static Lattice cubic(int dim, double scale = 1.0);
    double condition_number() const;
};

/// Dual lattice: basis of Lambda* is the inverse transpose.
Lattice dual_lattice(const Lattice& L);

/// alpha(Lambda, Omega, R) = min |p . Omega| over dual points 0 < |p| <= R.
/// Returns +infinity when no dual point lies in the ball. Enumeration budget
/// guards against runaway R.
struct AlphaResult {
    double alpha = 0.0;
    bool empty = false;  // alpha = +infinity
    Vec witness;
};
AlphaResult alpha_min(const Lattice& L, const Vec& Omega, double R,
                      long budget = 10'000'000);

/// a_l recursion: a_1 = 1/2, a_l = (sqrt(7)/2) sqrt(4 a_{l-1}^2/3 + 4).
double ergodization_constant(int l);

/// [lower, upper] bounds for the time the flow A + t*Omega needs to fill
/// R^l/Z^l within delta: upper = 1/alpha(a_l/delta), lower = (1/4)/alpha(1/(4 delta)).
struct ErgodizationBounds {
    double lower = 0.0;
    double upper = 0.0;
};
ErgodizationBounds ergodization_bounds(const Vec& Omega, double delta,
                                       const Lattice* lattice = nullptr);

/// Empirical covering time on the unit torus: marches with step
/// delta/(4|Omega|), maintains a grid of cells of side delta/2, and returns
/// the first time every cell is within the certification radius of a visited
/// cell. Throws ResourceError with coverage attached when the budget runs out.
struct ErgodizationMeasurement {
    double time = 0.0;
    bool covered = true;
    double coverage_fraction = 1.0;
};
ErgodizationMeasurement measure_ergodization_time(const Vec& Omega, double delta,
                                                  const Vec& start,
                                                  double time_budget = 1e7);

/// Return time of the resonant flow (omega*, 1) on T^{d+1}: the largest gap
/// between consecutive instants with dist((t omega*, t), 2 pi Z^{d+1}) <= delta/4.
double measure_return_time(const Vec& omega_star, double delta, double horizon);

/// Admissibility of a polyline curve gamma (arc-length parametrized) w.r.t.
/// the resonance planes of S_M: all crossings transversal with margin >= nu_min.
struct CurveCrossing {
    double s = 0.0;          // arc-length location
    ResonancePair plane;
    double margin = 0.0;     // |gamma'(s) . n| / |n|_2
};
struct AdmissibilityReport {
    bool admissible = false;
    double nu = 0.0;   // min margin over crossings (1 if none)
    double d0 = 0.0;   // basin radius of property (*)
    std::vector<CurveCrossing> crossings;
    std::vector<std::pair<double, double>> basins;  // [S_m, S'_m]
    std::string reason;
};

class CurvePath {
  public:
    /// Points are vertices in frequency space; reparametrized to unit speed.
    explicit CurvePath(std::vector<Vec> points);
    int d() const { return d_; }
    double length() const { return length_; }
    Vec at(double s) const;
    Vec tangent(double s) const;
    const std::vector<Vec>& vertices() const { return pts_; }

  private:
    int d_;
    double length_;
    std::vector<Vec> pts_;
    Vec cum_;
};

AdmissibilityReport check_admissible(const CurvePath& curve, int M,
                                     double nu_min = 1e-3);

/// Randomized repair: shifts the curve interior by a random offset, doubling
/// the magnitude until admissible or the cap eta is passed.
CurvePath repair_curve(const CurvePath& curve, int M, double eta, uint64_t seed,
                       double nu_min = 1e-3);

}  // namespace arnold
