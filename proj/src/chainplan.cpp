#include "arnold/chainplan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace arnold {

namespace {

// wrapped offset of x from target: x - target - 2 pi h with h integer,
// components in (-pi, pi]
void wrap_offset(const Vec& x, const Vec& target, std::vector<long>& h, Vec& chi) {
    size_t n = x.size();
    h.resize(n);
    chi.resize(n);
    for (size_t i = 0; i < n; ++i) {
        double raw = x[i] - target[i];
        double k = std::round(raw / TWO_PI);
        h[i] = (long)k;
        chi[i] = raw - TWO_PI * k;
    }
}

}  // namespace

ChainPlan build_chain_plan(const MelnikovFamily& family, const CurvePath& curve,
                           const ChainScheduleOptions& opt) {
    if (!(opt.mu > 0)) throw ValidationError("chain plan: mu must be positive");
    if (!(opt.rho > 0)) throw ValidationError("chain plan: rho must be positive");
    if (!(opt.delta_sched > 0)) throw ValidationError("chain plan: delta must be positive");
    const int d = family.d();
    if (curve.d() != d) throw ValidationError("chain plan: curve dimension mismatch");
    const double mu = opt.mu, L = curve.length();
    const double lnmu = std::abs(std::log(mu));
    const double C1 = opt.C1;

    const double a_d1 = ergodization_constant(d + 1);
    int M_sched = opt.M_sched;
    if (M_sched <= 0)
        M_sched = std::max(1, std::min(64, (int)std::floor(2.0 * C1 * lnmu / TWO_PI)));

    // admissibility with respect to the scheduling resonance set
    auto rep = check_admissible(curve, M_sched, opt.nu_min);
    if (!rep.admissible)
        throw ValidationError("chain plan: curve not admissible (" + rep.reason + ")");

    // waypoints: uniform arc-length spacing at 0.75 rho mu inside the band
    if (L < 1.5 * opt.rho * mu)
        throw ValidationError("chain plan: curve shorter than the waypoint spacing band");
    long k = (long)std::ceil(L / (0.75 * opt.rho * mu));
    if (k > opt.max_k) throw ResourceError("chain plan: k exceeds the configured budget");
    double spacing = L / k;
    if (spacing < 0.5 * opt.rho * mu || spacing > opt.rho * mu)
        throw NumericalError("chain plan: waypoint spacing left the admissible band");

    // regime split: the paper's sqrt(mu)/|ln mu| band, capped by the defect
    // budget of a crossing (each in-band step drifts chi by ~2 pi m epsilon)
    const double m_min = std::max(1.0, std::floor(C1 * lnmu / TWO_PI));
    const double band_paper = std::sqrt(mu) / lnmu;
    const double band_feas =
        std::sqrt(opt.delta_sched * 0.75 * opt.rho * mu / (4.0 * PI * m_min));
    const double band = std::min(band_paper, band_feas);

    ChainPlan plan;
    plan.d = d;
    plan.k = k;
    plan.mu = mu;
    plan.rho = opt.rho;
    plan.delta_sched = opt.delta_sched;
    plan.delta_box = opt.delta_box;
    plan.C1 = C1;
    plan.M_sched = M_sched;
    plan.M_theory = 8.0 * PI * a_d1 / opt.delta_sched;
    plan.curve_length = L;
    plan.omega_I = curve.at(0.0);
    plan.omega_F = curve.at(L);
    plan.curve_vertices = curve.vertices();

    // minima continuation at the junction frequencies s_i = i * spacing
    Vec svals(k);
    for (long i = 0; i < k; ++i) svals[i] = (i + 1) * spacing;
    auto cont = continue_minima(family, curve, svals);

    const double delta = opt.delta_sched;
    plan.pts.resize(k);
    for (long i = 0; i < k; ++i) {
        ChainWaypoint& w = plan.pts[i];
        w.s = svals[i];
        w.omega_bar = curve.at(w.s);
        w.minimum_theta = cont.minima[i].theta0;
        w.minimum_phi = cont.minima[i].phi0;
        auto dq = dist_to_QM(w.omega_bar, M_sched);
        w.dist_qm = dq.dist;
        w.beta = small_denominator(w.omega_bar, std::max(1, family.perturbation().order())).beta;
        w.regime = (w.dist_qm <= band) ? 1 : 0;
    }
    plan.band_used = band;
    plan.band_paper = band_paper;

    // initial junction sits exactly on the first minimum
    plan.pts[0].theta_bar = plan.pts[0].minimum_theta;
    plan.pts[0].phi_bar = plan.pts[0].minimum_phi;
    plan.pts[0].h_shift.assign(d + 1, 0);
    plan.pts[0].chi.assign(d + 1, 0.0);
    plan.pts[0].chi_norm = 0.0;

    // resonance-crossing bookkeeping (diagnostics): measure the frozen-flow
    // return time once per crossing plane
    auto record_crossing = [&](long i, const ResonancePair& h) {
        for (auto& c : plan.crossings)
            if (c.plane.n == h.n && c.plane.l == h.l) {
                c.last_index = (int)i;
                return;
            }
        ResonanceCrossingInfo info;
        info.plane = h;
        // omega* = projection of omega_bar onto the plane E_h
        Vec om = plan.pts[i].omega_bar;
        double val = h.l, nn = 0.0;
        for (int j = 0; j < d; ++j) {
            val += h.n[j] * om[j];
            nn += double(h.n[j]) * h.n[j];
        }
        info.omega_star = om;
        for (int j = 0; j < d; ++j) info.omega_star[j] -= val * h.n[j] / nn;
        info.return_time =
            measure_return_time(info.omega_star, delta, 4.0 * C1 * lnmu * 2.0);
        info.first_index = info.last_index = (int)i;
        plan.crossings.push_back(std::move(info));
    };

    for (long i = 0; i + 1 < k; ++i) {
        const ChainWaypoint& cur = plan.pts[i];
        ChainWaypoint& nxt = plan.pts[i + 1];
        // window for the next gap
        double lo = C1 * lnmu;
        double hi = 2.0 * std::max(C1 * lnmu, TWO_PI / std::max(cur.dist_qm, 1e-300));
        if (cur.regime == 1) {
            hi = 2.0 * C1 * lnmu;
            record_crossing(i, dist_to_QM(cur.omega_bar, M_sched).witness);
        }
        if (opt.beta2_gap_coeff > 0)
            lo = std::max(lo, opt.beta2_gap_coeff / (cur.beta * cur.beta));
        hi = std::max(hi * opt.window_scan_safety, lo + C1 * lnmu);
        plan.pts[i].window_lo = lo;
        plan.pts[i].window_hi = hi;

        double omn = norm2(cur.omega_bar);
        const double step = delta / (4.0 * (omn + 1.0));
        // target: the minimum at the NEXT junction frequency
        Vec target(d + 1);
        target[0] = nxt.minimum_theta;
        for (int j = 0; j < d; ++j) target[1 + j] = nxt.minimum_phi[j];
        // scan for the first hit within delta/2 (headroom for downstream
        // drift); fall back to the best candidate still under delta
        bool found = false;
        Vec cand(d + 1), chi;
        std::vector<long> hshift;
        double best_norm = 1e300, best_gap = 0.0;
        for (double gap = lo; gap <= hi; gap += step) {
            cand[0] = cur.theta_bar + gap;
            for (int j = 0; j < d; ++j)
                cand[1 + j] = cur.phi_bar[j] + cur.omega_bar[j] * gap;
            wrap_offset(cand, target, hshift, chi);
            double nn = norm2(chi);
            if (nn < best_norm) {
                best_norm = nn;
                best_gap = gap;
            }
            if (nn < 0.5 * delta) {
                nxt.theta_bar = cand[0];
                nxt.phi_bar.assign(cand.begin() + 1, cand.end());
                nxt.h_shift = hshift;
                nxt.chi = chi;
                nxt.chi_norm = nn;
                found = true;
                break;
            }
        }
        if (!found && best_norm < delta) {
            double gap = best_gap;
            cand[0] = cur.theta_bar + gap;
            for (int j = 0; j < d; ++j)
                cand[1 + j] = cur.phi_bar[j] + cur.omega_bar[j] * gap;
            wrap_offset(cand, target, hshift, chi);
            nxt.theta_bar = cand[0];
            nxt.phi_bar.assign(cand.begin() + 1, cand.end());
            nxt.h_shift = hshift;
            nxt.chi = chi;
            nxt.chi_norm = norm2(chi);
            found = true;
        }
        if (!found) {
            std::ostringstream msg;
            msg << "chain plan: scheduling window exhausted at junction " << (i + 1)
                << " (s = " << cur.s << ", dist to Q_M = " << cur.dist_qm
                << ", window [" << lo << ", " << hi
                << "], ergodization upper bound 2 pi / dist = "
                << TWO_PI / std::max(cur.dist_qm, 1e-300)
                << "); mu is too large for this curve/delta";
            throw NumericalError(msg.str());
        }
    }
    return plan;
}

void validate_chain_plan(const ChainPlan& plan, const MelnikovFamily& family, double tol) {
    const int d = plan.d;
    const double mu = plan.mu, rho = plan.rho;
    const double lnmu = std::abs(std::log(mu));
    CurvePath curve(plan.curve_vertices);
    // spacing band and frequency jumps
    double prev_s = 0.0;
    Vec prev_omega = plan.omega_I;
    for (long i = 0; i < plan.k; ++i) {
        const auto& w = plan.pts[i];
        double ds = w.s - prev_s;
        if (ds < 0.5 * rho * mu - tol || ds > rho * mu + tol)
            throw NumericalError("plan validation: waypoint spacing outside the band");
        double jump = norm2(w.omega_bar - prev_omega);
        if (jump > rho * mu + tol)
            throw NumericalError("plan validation: frequency jump above rho mu");
        prev_s = w.s;
        prev_omega = w.omega_bar;
    }
    if (norm2(curve.at(plan.curve_length) - plan.omega_F) > 1e-12)
        throw NumericalError("plan validation: curve endpoint mismatch");
    // exact phi iteration and windows
    for (long i = 0; i + 1 < plan.k; ++i) {
        const auto& cur = plan.pts[i];
        const auto& nxt = plan.pts[i + 1];
        double gap = nxt.theta_bar - cur.theta_bar;
        for (int j = 0; j < d; ++j) {
            double expect = cur.phi_bar[j] + cur.omega_bar[j] * gap;
            if (std::abs(expect - nxt.phi_bar[j]) > 1e-9 * std::max(1.0, std::abs(expect)))
                throw NumericalError("plan validation: phi iteration violated");
        }
        if (gap < cur.window_lo - tol || gap > cur.window_hi + tol)
            throw NumericalError("plan validation: gap outside its window");
        if (gap < plan.C1 * lnmu - 1e-6)
            throw NumericalError("plan validation: gap below C1 |ln mu|");
    }
    // defects against freshly refined minima
    for (long i = 0; i < plan.k; ++i) {
        const auto& w = plan.pts[i];
        auto m = find_minimum(family, w.omega_bar, w.minimum_theta, w.minimum_phi);
        Vec x(d + 1), target(d + 1);
        x[0] = w.theta_bar;
        target[0] = m.theta0;
        for (int j = 0; j < d; ++j) {
            x[1 + j] = w.phi_bar[j];
            target[1 + j] = m.phi0[j];
        }
        std::vector<long> h;
        Vec chi;
        wrap_offset(x, target, h, chi);
        if (norm2(chi) >= plan.delta_sched + 1e-9)
            throw NumericalError("plan validation: waypoint defect at or above delta");
    }
}

std::string ChainPlan::to_json() const {
    nlohmann::json j;
    j["d"] = d;
    j["k"] = k;
    j["mu"] = mu;
    j["rho"] = rho;
    j["delta_sched"] = delta_sched;
    j["delta_box"] = delta_box;
    j["C1"] = C1;
    j["M_sched"] = M_sched;
    j["M_theory"] = M_theory;
    j["curve_length"] = curve_length;
    j["band_used"] = band_used;
    j["band_paper"] = band_paper;
    j["omega_I"] = omega_I;
    j["omega_F"] = omega_F;
    j["curve_vertices"] = curve_vertices;
    nlohmann::json jpts = nlohmann::json::array();
    for (const auto& w : pts) {
        nlohmann::json jw;
        jw["s"] = w.s;
        jw["omega_bar"] = w.omega_bar;
        jw["theta_bar"] = w.theta_bar;
        jw["phi_bar"] = w.phi_bar;
        jw["h_shift"] = w.h_shift;
        jw["chi"] = w.chi;
        jw["chi_norm"] = w.chi_norm;
        jw["regime"] = w.regime;
        jw["dist_qm"] = w.dist_qm;
        jw["beta"] = w.beta;
        jw["window_lo"] = w.window_lo;
        jw["window_hi"] = w.window_hi;
        jw["minimum_theta"] = w.minimum_theta;
        jw["minimum_phi"] = w.minimum_phi;
        jpts.push_back(std::move(jw));
    }
    j["waypoints"] = jpts;
    nlohmann::json cr = nlohmann::json::array();
    for (const auto& c : crossings) {
        nlohmann::json jc;
        jc["n"] = c.plane.n;
        jc["l"] = c.plane.l;
        jc["omega_star"] = c.omega_star;
        jc["return_time"] = c.return_time;
        jc["first_index"] = c.first_index;
        jc["last_index"] = c.last_index;
        cr.push_back(jc);
    }
    j["crossings"] = cr;
    return j.dump();
}

ChainPlan ChainPlan::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ChainPlan p;
    p.d = j.at("d").get<int>();
    p.k = j.at("k").get<long>();
    p.mu = j.at("mu").get<double>();
    p.rho = j.at("rho").get<double>();
    p.delta_sched = j.at("delta_sched").get<double>();
    p.delta_box = j.at("delta_box").get<double>();
    p.C1 = j.at("C1").get<double>();
    p.M_sched = j.at("M_sched").get<int>();
    p.M_theory = j.at("M_theory").get<double>();
    p.curve_length = j.at("curve_length").get<double>();
    p.band_used = j.value("band_used", 0.0);
    p.band_paper = j.value("band_paper", 0.0);
    p.omega_I = j.at("omega_I").get<Vec>();
    p.omega_F = j.at("omega_F").get<Vec>();
    p.curve_vertices = j.at("curve_vertices").get<std::vector<Vec>>();
    for (const auto& jw : j.at("waypoints")) {
        ChainWaypoint w;
        w.s = jw.at("s").get<double>();
        w.omega_bar = jw.at("omega_bar").get<Vec>();
        w.theta_bar = jw.at("theta_bar").get<double>();
        w.phi_bar = jw.at("phi_bar").get<Vec>();
        w.h_shift = jw.at("h_shift").get<std::vector<long>>();
        w.chi = jw.at("chi").get<Vec>();
        w.chi_norm = jw.at("chi_norm").get<double>();
        w.regime = jw.at("regime").get<int>();
        w.dist_qm = jw.at("dist_qm").get<double>();
        w.beta = jw.at("beta").get<double>();
        w.window_lo = jw.at("window_lo").get<double>();
        w.window_hi = jw.at("window_hi").get<double>();
        w.minimum_theta = jw.at("minimum_theta").get<double>();
        w.minimum_phi = jw.at("minimum_phi").get<Vec>();
        p.pts.push_back(std::move(w));
    }
    for (const auto& jc : j.at("crossings")) {
        ResonanceCrossingInfo c;
        c.plane.n = jc.at("n").get<std::vector<int>>();
        c.plane.l = jc.at("l").get<int>();
        c.omega_star = jc.at("omega_star").get<Vec>();
        c.return_time = jc.at("return_time").get<double>();
        c.first_index = jc.at("first_index").get<int>();
        c.last_index = jc.at("last_index").get<int>();
        p.crossings.push_back(std::move(c));
    }
    return p;
}

void ChainPlan::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write plan file: " + path);
    out << to_json() << "\n";
}

ChainPlan ChainPlan::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open plan file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace arnold
