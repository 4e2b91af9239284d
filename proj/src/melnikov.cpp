#include "arnold/melnikov.hpp"

#include <algorithm>
#include <cmath>

#include "arnold/linalg.hpp"
#include "arnold/pendulum.hpp"
#include "arnold/quadrature.hpp"

namespace arnold {

namespace {
bool is_zero_mode(const Mode& m) {
    for (int x : m.n)
        if (x) return false;
    return m.l == 0;
}
}  // namespace

MelnikovFamily::MelnikovFamily(const TrigPerturbation& P, double omega_max,
                               double tail_tol, double t_cut_override)
    : P_(P), omega_max_(omega_max) {
    const auto& modes = P_.canonical_modes();
    double lip_total = 0.0;
    double nu_bound = 1.0;
    for (const Mode& m : modes) {
        lip_total += 2.0 * m.profile.lipschitz_bound();
        double nb = std::abs((double)m.l);
        for (int x : m.n) nb += std::abs(x) * omega_max_;
        nu_bound = std::max(nu_bound, nb);
    }
    // certified truncation: |g(t)| <= Lip * |q0(|t|) - 2 pi| <= Lip * 4 e^{-|t|}
    auto bound_at = [&](double T) {
        return 2.0 * lip_total * 4.0 * std::exp(-T) * (T + 2.0);
    };
    if (t_cut_override > 0) {
        t_cut_ = t_cut_override;
        tail_bound_ = bound_at(t_cut_);
        if (tail_bound_ > tail_tol) {
            double need = t_cut_;
            while (bound_at(need) > tail_tol && need < 80) need += 1.0;
            throw NumericalError(
                "melnikov: tail bound exceeds tolerance; suggested T_cut >= " +
                std::to_string(need));
        }
    } else {
        t_cut_ = 33.0;
        while (bound_at(t_cut_) > tail_tol && t_cut_ < 80.0) t_cut_ += 1.0;
        tail_bound_ = bound_at(t_cut_);
        if (tail_bound_ > tail_tol)
            throw NumericalError("melnikov: no admissible T_cut for the tail tolerance");
    }
    // panel grid: oscillation-aware width, Gauss-Legendre 12 per panel
    double h = std::min(0.5, 2.0 / nu_bound);
    int panels = (int)std::ceil(t_cut_ / h);
    const GaussLegendre& gl = gauss_legendre(12);
    auto add_half = [&](double sign) {
        for (int p = 0; p < panels; ++p) {
            double a = sign * t_cut_ * p / panels;
            double b = sign * t_cut_ * (p + 1) / panels;
            double c = 0.5 * (a + b), r = 0.5 * (b - a);
            for (int i = 0; i < 12; ++i) {
                nodes_.push_back(c + r * gl.x[i]);
                weights_.push_back(std::abs(r) * gl.w[i]);
            }
        }
    };
    add_half(-1.0);
    n_neg_ = (int)nodes_.size();
    add_half(+1.0);
    // per-mode samples of f_{n,l}(q0(t)) - f_{n,l}(0)
    gsamp_.resize(modes.size());
    for (size_t mi = 0; mi < modes.size(); ++mi) {
        const Mode& m = modes[mi];
        mode_l_.push_back(m.l);
        mode_n_.push_back(m.n);
        if (is_zero_mode(m)) zero_mode_ = (int)mi;
        Complex at0 = m.profile.value_at_zero();
        gsamp_[mi].resize(nodes_.size());
        for (size_t k = 0; k < nodes_.size(); ++k)
            gsamp_[mi][k] = m.profile.eval(separatrix_q(nodes_[k])) - at0;
    }
}

MelnikovFamily::Integrals MelnikovFamily::integrals(const Vec& omega) const {
    const size_t nm = gsamp_.size();
    Integrals out;
    out.I.assign(nm, 0.0);
    out.Iu.assign(nm, 0.0);
    out.Is.assign(nm, 0.0);
    out.J.assign(nm, 0.0);
    out.Ju.assign(nm, 0.0);
    out.Js.assign(nm, 0.0);
    out.nu.assign(nm, 0.0);
    for (size_t mi = 0; mi < nm; ++mi) {
        double nu = mode_l_[mi];
        for (size_t j = 0; j < omega.size(); ++j) nu += mode_n_[mi][j] * omega[j];
        out.nu[mi] = nu;
        double nb = std::abs((double)mode_l_[mi]);
        for (int x : mode_n_[mi]) nb += std::abs(x) * omega_max_;
        if (std::abs(nu) > nb + 1e-9)
            throw ValidationError("melnikov: |omega| outside the family's range");
        Complex iu = 0.0, is = 0.0, ju = 0.0, js = 0.0;
        const auto& g = gsamp_[mi];
        for (int k = 0; k < n_neg_; ++k) {
            double t = nodes_[k];
            Complex e = std::polar(weights_[k], nu * t);
            Complex ge = g[k] * e;
            iu += ge;
            ju += t * ge;
        }
        for (size_t k = n_neg_; k < nodes_.size(); ++k) {
            double t = nodes_[k];
            Complex e = std::polar(weights_[k], nu * t);
            Complex ge = g[k] * e;
            is += ge;
            js += t * ge;
        }
        if ((int)mi == zero_mode_) {
            out.Iu00 = iu.real();
            out.Is00 = is.real();
            out.I00 = (iu + is).real();
        } else {
            out.Iu[mi] = iu;
            out.Is[mi] = is;
            out.I[mi] = iu + is;
            out.Ju[mi] = ju;
            out.Js[mi] = js;
            out.J[mi] = ju + js;
        }
    }
    return out;
}

Melnikov::Melnikov(const MelnikovFamily& family, Vec omega)
    : fam_(&family), omega_(std::move(omega)), ints_(family.integrals(omega_)) {}

namespace {
struct Assembled {
    const std::vector<Complex>* I;
    const std::vector<Complex>* J;
    double I00;
};

Assembled pick(const MelnikovFamily::Integrals& ints, GammaKind kind) {
    switch (kind) {
        case GammaKind::full:
            return {&ints.I, &ints.J, ints.I00};
        case GammaKind::unstable:
            return {&ints.Iu, &ints.Ju, ints.Iu00};
        default:
            return {&ints.Is, &ints.Js, ints.Is00};
    }
}
}  // namespace

double Melnikov::value(GammaKind kind, double theta0, const Vec& phi0) const {
    auto A = pick(ints_, kind);
    const auto& modes = fam_->perturbation().canonical_modes();
    double s = A.I00;
    for (size_t mi = 0; mi < modes.size(); ++mi) {
        const Mode& m = modes[mi];
        if (is_zero_mode(m)) continue;
        double alpha = m.l * theta0;
        for (size_t j = 0; j < phi0.size(); ++j) alpha += m.n[j] * phi0[j];
        s += 2.0 * ((*A.I)[mi] * std::polar(1.0, alpha)).real();
    }
    return -s;
}

Vec Melnikov::gradient(GammaKind kind, double theta0, const Vec& phi0) const {
    auto A = pick(ints_, kind);
    const auto& modes = fam_->perturbation().canonical_modes();
    const int d = fam_->d();
    Vec g(d + 1, 0.0);
    for (size_t mi = 0; mi < modes.size(); ++mi) {
        const Mode& m = modes[mi];
        if (is_zero_mode(m)) continue;
        double alpha = m.l * theta0;
        for (int j = 0; j < d; ++j) alpha += m.n[j] * phi0[j];
        double im = ((*A.I)[mi] * std::polar(1.0, alpha)).imag();
        g[0] += 2.0 * m.l * im;
        for (int j = 0; j < d; ++j) g[1 + j] += 2.0 * m.n[j] * im;
    }
    return g;
}

Vec Melnikov::hessian(GammaKind kind, double theta0, const Vec& phi0) const {
    auto A = pick(ints_, kind);
    const auto& modes = fam_->perturbation().canonical_modes();
    const int d = fam_->d();
    Vec H((d + 1) * (d + 1), 0.0);
    for (size_t mi = 0; mi < modes.size(); ++mi) {
        const Mode& m = modes[mi];
        if (is_zero_mode(m)) continue;
        double alpha = m.l * theta0;
        for (int j = 0; j < d; ++j) alpha += m.n[j] * phi0[j];
        double re = ((*A.I)[mi] * std::polar(1.0, alpha)).real();
        double w[9];
        w[0] = (double)m.l;
        for (int j = 0; j < d; ++j) w[1 + j] = (double)m.n[j];
        for (int a = 0; a <= d; ++a)
            for (int b = 0; b <= d; ++b) H[a * (d + 1) + b] += 2.0 * w[a] * w[b] * re;
    }
    return H;
}

Vec Melnikov::domega(GammaKind kind, double theta0, const Vec& phi0) const {
    auto A = pick(ints_, kind);
    const auto& modes = fam_->perturbation().canonical_modes();
    const int d = fam_->d();
    Vec g(d, 0.0);
    for (size_t mi = 0; mi < modes.size(); ++mi) {
        const Mode& m = modes[mi];
        if (is_zero_mode(m)) continue;
        double alpha = m.l * theta0;
        for (int j = 0; j < d; ++j) alpha += m.n[j] * phi0[j];
        double im = ((*A.J)[mi] * std::polar(1.0, alpha)).imag();
        for (int j = 0; j < d; ++j) g[j] += 2.0 * m.n[j] * im;
    }
    return g;
}

FTermEval f_term(const TrigPerturbation& P, const Vec& omega, double theta0,
                 const Vec& phi0) {
    const int d = P.d();
    FTermEval out;
    out.grad.assign(d + 1, 0.0);
    out.domega.assign(d, 0.0);
    for (const Mode& m : P.canonical_modes()) {
        Complex f0 = m.profile.value_at_zero();
        if (std::abs(f0) < 1e-15) continue;
        if (is_zero_mode(m)) {
            out.value += -f0.real() * theta0;
            out.grad[0] += -f0.real();
            continue;
        }
        double nu = m.l;
        for (int j = 0; j < d; ++j) nu += m.n[j] * omega[j];
        if (std::abs(nu) < 1e-12 * (1.0 + norm2(omega))) {
            std::string w = "(n,l) = ([";
            for (int j = 0; j < d; ++j) w += std::to_string(m.n[j]) + (j + 1 < d ? "," : "");
            w += "], " + std::to_string(m.l) + ")";
            throw ValidationError("f_term: vanishing denominator at mode " + w);
        }
        double alpha = m.l * theta0;
        for (int j = 0; j < d; ++j) alpha += m.n[j] * phi0[j];
        Complex e = std::polar(1.0, alpha);
        Complex z = f0 * e;
        // value: -2 Re(z / (i nu)) = -(2/nu) Im(z)
        out.value += -2.0 * z.imag() / nu;
        // d/dtheta and d/dphi_j: -2 Re(z) * (l or n_j) / nu
        out.grad[0] += -2.0 * m.l * z.real() / nu;
        for (int j = 0; j < d; ++j) out.grad[1 + j] += -2.0 * m.n[j] * z.real() / nu;
        // d/domega_j: 2 Re(z n_j / (i nu^2)) = (2 n_j / nu^2) Im(z)
        for (int j = 0; j < d; ++j) out.domega[j] += 2.0 * m.n[j] * z.imag() / (nu * nu);
    }
    return out;
}

std::pair<double, Vec> grid_seed(const Melnikov& gamma, int n_grid) {
    const int d = (int)gamma.omega().size();
    double best = 1e300;
    double best_theta = 0.0;
    Vec best_phi(d, 0.0), phi(d, 0.0);
    std::vector<int> idx(d + 1, 0);
    while (true) {
        double theta = TWO_PI * idx[0] / n_grid;
        for (int j = 0; j < d; ++j) phi[j] = TWO_PI * idx[1 + j] / n_grid;
        double v = gamma.value(GammaKind::full, theta, phi);
        if (v < best) {
            best = v;
            best_theta = theta;
            best_phi = phi;
        }
        int j = 0;
        while (j <= d && ++idx[j] >= n_grid) idx[j++] = 0;
        if (j > d) break;
    }
    Vec seed(d + 1);
    seed[0] = best_theta;
    for (int j = 0; j < d; ++j) seed[1 + j] = best_phi[j];
    return {best, seed};
}

MelnikovMinimum find_minimum(const MelnikovFamily& family, const Vec& omega,
                             double theta0_seed, const Vec& phi0_seed) {
    const int d = family.d();
    Melnikov gamma(family, omega);
    double theta = theta0_seed;
    Vec phi = phi0_seed;
    Vec g = gamma.gradient(GammaKind::full, theta, phi);
    double gn = norm2(g);
    bool converged = false;
    for (int it = 0; it < 80; ++it) {
        if (gn <= 1e-11) {
            converged = true;
            break;
        }
        Vec H = gamma.hessian(GammaKind::full, theta, phi);
        Vec step = solve_dense(H, g, d + 1);
        double lam = 1.0;
        for (int bt = 0; bt < 10; ++bt) {
            double th2 = theta - lam * step[0];
            Vec ph2 = phi;
            for (int j = 0; j < d; ++j) ph2[j] -= lam * step[1 + j];
            Vec g2 = gamma.gradient(GammaKind::full, th2, ph2);
            double gn2 = norm2(g2);
            if (gn2 < gn || lam < 1e-3) {
                theta = th2;
                phi = ph2;
                g = g2;
                gn = gn2;
                break;
            }
            lam *= 0.5;
        }
    }
    if (!converged && gn > 1e-10)
        throw NumericalError("find_minimum: Newton did not converge (|grad| = " +
                             std::to_string(gn) + ")");
    MelnikovMinimum out;
    out.omega = omega;
    out.theta0 = theta;
    out.phi0 = phi;
    out.hessian = gamma.hessian(GammaKind::full, theta, phi);
    Vec ev = symmetric_eigenvalues(out.hessian, d + 1);
    out.lambda_min = ev[0];
    out.grad_norm = gn;
    if (out.lambda_min <= 0)
        throw NumericalError("find_minimum: converged to a degenerate or non-minimal "
                             "critical point (lambda_min <= 0)");
    return out;
}

ContinuationResult continue_minima(const MelnikovFamily& family, const CurvePath& curve,
                                   const Vec& s_values) {
    ContinuationResult res;
    const int d = family.d();
    double K = 0.0;
    for (size_t i = 0; i < s_values.size(); ++i) {
        Vec omega = curve.at(s_values[i]);
        MelnikovMinimum m;
        if (i == 0) {
            Melnikov gamma(family, omega);
            auto seed = grid_seed(gamma, 32);
            Vec phi(seed.second.begin() + 1, seed.second.end());
            m = find_minimum(family, omega, seed.second[0], phi);
        } else {
            const MelnikovMinimum& prev = res.minima.back();
            m = find_minimum(family, omega, prev.theta0, prev.phi0);
            double dmin = std::abs(m.theta0 - prev.theta0);
            double dom = norm2(omega - prev.omega);
            for (int j = 0; j < d; ++j)
                dmin = std::hypot(dmin, m.phi0[j] - prev.phi0[j]);
            if (dom > 0) K = std::max(K, dmin / dom);
        }
        res.minima.push_back(std::move(m));
    }
    res.lipschitz_K = K;
    return res;
}

namespace {

// (b,c)-frame derivatives of Gamma~ at offsets (b, c) from a minimum
struct BcFrame {
    const Melnikov& gamma;
    const MelnikovMinimum& min;
    int d;

    void grads(double b, const Vec& c, double& db, Vec& dc) const {
        double theta = min.theta0 + b;
        Vec phi = min.phi0;
        for (int j = 0; j < d; ++j) phi[j] += min.omega[j] * b + c[j];
        Vec g = gamma.gradient(GammaKind::full, theta, phi);
        db = g[0];
        dc.assign(d, 0.0);
        for (int j = 0; j < d; ++j) {
            db += min.omega[j] * g[1 + j];
            dc[j] = g[1 + j];
        }
    }

    // (d+1)^2 Hessian in (b, c) coordinates, b first
    Vec hess(double b, const Vec& c) const {
        double theta = min.theta0 + b;
        Vec phi = min.phi0;
        for (int j = 0; j < d; ++j) phi[j] += min.omega[j] * b + c[j];
        Vec H = gamma.hessian(GammaKind::full, theta, phi);
        int n = d + 1;
        // J columns: b -> (1, omega), c_j -> e_{1+j}
        Vec out(n * n, 0.0);
        auto Hat = [&](int a, int bcol) { return H[a * n + bcol]; };
        // bb
        double bb = Hat(0, 0);
        for (int j = 0; j < d; ++j) bb += 2.0 * min.omega[j] * Hat(0, 1 + j);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) bb += min.omega[j] * min.omega[k] * Hat(1 + j, 1 + k);
        out[0] = bb;
        for (int j = 0; j < d; ++j) {
            double bc = Hat(0, 1 + j);
            for (int k = 0; k < d; ++k) bc += min.omega[k] * Hat(1 + k, 1 + j);
            out[0 * n + 1 + j] = bc;
            out[(1 + j) * n + 0] = bc;
            for (int k = 0; k < d; ++k) out[(1 + j) * n + 1 + k] = Hat(1 + j, 1 + k);
        }
        return out;
    }
};

std::vector<Vec> sphere_grid(int d, double r, int n_ang) {
    std::vector<Vec> out;
    if (d == 1) {
        out.push_back({r});
        out.push_back({-r});
    } else if (d == 2) {
        for (int k = 0; k < n_ang; ++k) {
            double a = TWO_PI * k / n_ang;
            out.push_back({r * std::cos(a), r * std::sin(a)});
        }
    } else {
        throw ValidationError("certify_box: supports d <= 2");
    }
    return out;
}

std::vector<Vec> ball_grid(int d, double r, int n_rad, int n_ang) {
    std::vector<Vec> out;
    out.push_back(Vec(d, 0.0));
    for (int i = 1; i <= n_rad; ++i) {
        double ri = r * i / n_rad;
        for (Vec& c : sphere_grid(d, ri, n_ang)) out.push_back(std::move(c));
    }
    return out;
}

}  // namespace

BoxConstants certify_box(const MelnikovFamily& family,
                         const std::vector<MelnikovMinimum>& samples, double C2_config,
                         double r0, double r_min) {
    if (samples.empty()) throw ValidationError("certify_box: no samples");
    const int d = family.d();
    // per-sample quadratic data in the (b,c) frame
    double eps = 1e300, max_alpha = 0.0, max_beta = 0.0, h_norm = 0.0;
    std::vector<Melnikov> gammas;
    gammas.reserve(samples.size());
    for (const auto& s : samples) gammas.emplace_back(family, s.omega);
    std::vector<double> betas(samples.size()), alphas(samples.size());
    for (size_t si = 0; si < samples.size(); ++si) {
        BcFrame frame{gammas[si], samples[si], d};
        Vec H = frame.hess(0.0, Vec(d, 0.0));
        int n = d + 1;
        double beta = H[0];
        Vec alpha(d);
        for (int j = 0; j < d; ++j) alpha[j] = H[1 + j];
        Vec gam(d * d);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) gam[j * d + k] = H[(1 + j) * n + 1 + k];
        Vec ev = symmetric_eigenvalues(H, n);
        double hn = std::max(std::abs(ev[0]), std::abs(ev[n - 1]));
        h_norm = std::max(h_norm, hn);
        Vec D(d * d);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) D[j * d + k] = beta * gam[j * d + k] - alpha[j] * alpha[k];
        double dmin = symmetric_eigenvalues(D, d)[0];
        eps = std::min(eps, std::min(beta, dmin / std::max(hn, 1e-300)));
        betas[si] = beta;
        alphas[si] = norm2(alpha);
        max_alpha = std::max(max_alpha, alphas[si]);
        max_beta = std::max(max_beta, beta);
    }
    if (!(eps > 1e-10 * std::max(1.0, h_norm)))
        throw NumericalError("certify_box: degenerate minimum data (flat direction); "
                             "coercivity floor ~ " + std::to_string(eps));
    const double nu1_bar = eps / (4.0 * max_alpha);
    const double nu2_bar = eps / (4.0 * max_beta);
    // scale-invariant box aspect (ratios of Hessian-scale quantities only)
    double bbar_factor = 0.0;
    for (size_t si = 0; si < samples.size(); ++si)
        bbar_factor =
            std::max(bbar_factor, (3.0 * nu1_bar * h_norm + alphas[si]) / betas[si]);

    for (double r = r0; r >= r_min; r *= 0.8) {
        double b_bar = r * bbar_factor;
        // boundary grids
        const int n_b = 65, n_ang = 128, n_rad = (d == 1) ? 64 : 16;
        auto cs_sphere = sphere_grid(d, r, n_ang);
        auto cs_ball = ball_grid(d, r, n_rad, n_ang);
        // Hessian (gradient-Lipschitz) bound over the inflated box
        double L2 = 0.0;
        for (size_t si = 0; si < samples.size(); ++si) {
            BcFrame frame{gammas[si], samples[si], d};
            for (double bfrac : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
                for (const Vec& c : sphere_grid(d, 1.2 * r, 24)) {
                    Vec H = frame.hess(1.2 * bfrac * b_bar, c);
                    Vec ev = symmetric_eigenvalues(H, d + 1);
                    L2 = std::max(L2, std::max(std::abs(ev[0]), std::abs(ev[d])));
                }
            }
        }
        L2 *= 1.2;  // grid safety
        // grid-to-continuum inflation: at interior minima of the margin
        // function the loss is quadratic in the spacing (endpoints are on the
        // grid exactly), so a Hessian-based bound applies
        double h_grid_b = 2.0 * b_bar / (n_b - 1);
        double h_grid_c = (d == 1) ? (2.0 * r / (2 * n_rad)) : (r * TWO_PI / n_ang);
        double h_max = std::max(h_grid_b, h_grid_c);
        double inflation = 0.5 * L2 * h_max * h_max;

        // condition (ii): d_b Gamma~ sign(b) on b = +-b_bar, |c| <= r
        double nu1_meas = 1e300;
        bool ok = true;
        for (size_t si = 0; si < samples.size() && ok; ++si) {
            BcFrame frame{gammas[si], samples[si], d};
            for (double bs : {-1.0, 1.0}) {
                for (const Vec& c : cs_ball) {
                    double db;
                    Vec dc;
                    frame.grads(bs * b_bar, c, db, dc);
                    nu1_meas = std::min(nu1_meas, db * bs);
                }
            }
        }
        nu1_meas -= inflation;
        if (nu1_meas <= 0) continue;
        // condition (i): on |c| = r, |b| <= b_bar, need A >= nu2 or B >= nu1
        double nu2_meas = 1e300;
        bool any_A = false;
        for (size_t si = 0; si < samples.size() && ok; ++si) {
            BcFrame frame{gammas[si], samples[si], d};
            for (int bi = 0; bi < n_b; ++bi) {
                double b = -b_bar + 2.0 * b_bar * bi / (n_b - 1);
                for (const Vec& c : cs_sphere) {
                    double db;
                    Vec dc;
                    frame.grads(b, c, db, dc);
                    double A = dot(dc, c);
                    double B = std::abs(db);
                    if (B - inflation >= nu1_meas) continue;  // satisfied via (b)-part
                    any_A = true;
                    nu2_meas = std::min(nu2_meas, A - 2.0 * inflation * r);
                    if (nu2_meas <= 0) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) break;
            }
        }
        if (!ok) continue;
        if (!any_A) nu2_meas = nu2_bar * r * r;
        BoxConstants out;
        out.r = r;
        out.b_bar = b_bar;
        out.nu1 = nu1_meas;
        out.nu2 = nu2_meas;
        out.eps = eps;
        out.hess_lipschitz = L2;
        out.C2_used = C2_config;
        out.samples = (int)samples.size();
        // robustness radius: gradient conditions keep 3/4 margins under
        // (eta, xi) shifts up to delta
        double delta = 0.9 * std::min(out.nu1, out.nu2 / r) / (4.0 * std::sqrt(2.0) * L2);
        delta = std::min(delta, 0.5 * std::min(r, b_bar));
        delta = std::min(delta, 1.0);
        if (delta <= 1e-4) continue;
        out.delta = delta;
        out.rho = std::min(out.nu1 / 2.0, out.nu2 / r) / (6.0 * C2_config);
        return out;
    }
    throw NumericalError("certify_box: no radius in [r_min, r0] certifies the box");
}

BoxMargins recheck_box(const MelnikovFamily& family,
                       const std::vector<MelnikovMinimum>& samples,
                       const BoxConstants& box, int refine) {
    const int d = family.d();
    BoxMargins m;
    m.margin_ii = 1e300;
    m.margin_i = 1e300;
    const int n_b = 33 * refine / 2, n_ang = 48 * refine / 2, n_rad = 8 * refine / 2;
    auto cs_sphere = sphere_grid(d, box.r, n_ang);
    auto cs_ball = ball_grid(d, box.r, n_rad, n_ang);
    for (const auto& s : samples) {
        Melnikov gamma(family, s.omega);
        BcFrame frame{gamma, s, d};
        for (double bs : {-1.0, 1.0})
            for (const Vec& c : cs_ball) {
                double db;
                Vec dc;
                frame.grads(bs * box.b_bar, c, db, dc);
                m.margin_ii = std::min(m.margin_ii, db * bs);
            }
        for (int bi = 0; bi < n_b; ++bi) {
            double b = -box.b_bar + 2.0 * box.b_bar * bi / (n_b - 1);
            for (const Vec& c : cs_sphere) {
                double db;
                Vec dc;
                frame.grads(b, c, db, dc);
                double A = dot(dc, c);
                double B = std::abs(db);
                // OR margin normalized against the certified thresholds
                double orm = std::max(A / box.nu2, B / box.nu1);
                m.margin_i = std::min(m.margin_i, orm);
            }
        }
    }
    return m;
}

}  // namespace arnold
