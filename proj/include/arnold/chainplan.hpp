#pragma once
// The unperturbed pseudo-diffusion chain: frequencies omega_bar_i along an
// admissible curve with spacing ~ rho*mu, junction times theta_bar_i chosen so
// the linear flow lands delta-close (mod 2 pi) to the Melnikov minima, and the
// resulting angles phi_bar_i with the integer shifts h_i and defects chi_i.

#include <string>
#include <vector>

#include "arnold/common.hpp"
#include "arnold/melnikov.hpp"
#include "arnold/resonance.hpp"

namespace arnold {

struct ChainScheduleOptions {
    double mu = 0.0;
    double rho = 0.1;
    double delta_sched = 0.3;  // waypoint closeness target
    double delta_box = 0.0;    // certified robustness radius (recorded)
    double C1 = 4.0;
    int M_sched = 0;           // 0 = auto (return-time feasible cap)
    double nu_min = 1e-3;      // transversality threshold for admissibility
    double beta2_gap_coeff = 0.0;  // > 0: extra lower bound coeff/beta_i^2 on gaps
    long max_k = 200000;
    double window_scan_safety = 1.0;  // multiplies the scan cap (diagnostics only)
};

struct ChainWaypoint {
    double s = 0.0;          // arc-length position of omega_bar_i
    Vec omega_bar;           // d
    double theta_bar = 0.0;
    Vec phi_bar;             // d
    std::vector<long> h_shift;  // d+1 (theta first)
    Vec chi;                 // d+1
    double chi_norm = 0.0;
    int regime = 0;          // 0 fast, 1 resonance-crossing
    double dist_qm = 0.0;
    double beta = 0.0;       // small denominator of omega_bar_i
    double window_lo = 0.0, window_hi = 0.0;  // window used to pick the NEXT gap
    double minimum_theta = 0.0;  // continuation minima at omega_bar_i
    Vec minimum_phi;
};

struct ResonanceCrossingInfo {
    ResonancePair plane;
    Vec omega_star;
    double return_time = 0.0;  // measured T* of the frozen flow at delta/4
    int first_index = 0, last_index = 0;
};

struct ChainPlan {
    int d = 0;
    long k = 0;  // junctions 1..k
    double mu = 0.0, rho = 0.0, delta_sched = 0.0, delta_box = 0.0, C1 = 0.0;
    int M_sched = 0;
    double M_theory = 0.0;
    double curve_length = 0.0;
    double band_used = 0.0, band_paper = 0.0;  // regime-(ii) split distances
    Vec omega_I, omega_F;
    std::vector<ChainWaypoint> pts;  // size k
    std::vector<ResonanceCrossingInfo> crossings;
    std::vector<Vec> curve_vertices;  // provenance

    double total_time() const { return pts.back().theta_bar - pts.front().theta_bar; }
    double fitted_K() const {
        return total_time() * rho * mu / std::abs(std::log(mu));
    }

    std::string to_json() const;
    static ChainPlan from_json(const std::string& text);
    void save(const std::string& path) const;
    static ChainPlan load(const std::string& path);
};

/// Build waypoints and schedule times along an admissible curve. Throws
/// ValidationError for inadmissible input, NumericalError when a scheduling
/// window is exhausted (the observable meaning of "mu too large").
ChainPlan build_chain_plan(const MelnikovFamily& family, const CurvePath& curve,
                           const ChainScheduleOptions& opt);

/// Independent re-validation of all plan invariants (spacings, jump sizes,
/// the exact phi iteration, defects against freshly refined minima, window
/// bounds). Throws NumericalError on any violation.
void validate_chain_plan(const ChainPlan& plan, const MelnikovFamily& family,
                         double tol = 1e-9);

}  // namespace arnold
