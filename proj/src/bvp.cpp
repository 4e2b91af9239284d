#include "arnold/bvp.hpp"

#include <algorithm>
#include <cmath>

#include "arnold/linalg.hpp"
#include "arnold/quadrature.hpp"
#include "arnold/resonance.hpp"

namespace arnold {

namespace {

struct Mesh {
    int n, i0, iT, m_in, m_ext;
    double h;
};

Mesh build_mesh(double T, int n_per_unit, int m_in_hint) {
    Mesh m;
    m.m_in = (m_in_hint > 0) ? m_in_hint : std::max((int)std::ceil(T * n_per_unit), 8);
    if ((double)m.m_in > 6e6) throw ResourceError("transition mesh exceeds the node budget");
    m.h = T / m.m_in;
    m.m_ext = (int)std::ceil(1.0 / m.h - 1e-12);
    m.n = m.m_in + 2 * m.m_ext + 1;
    m.i0 = m.m_ext;
    m.iT = m.m_ext + m.m_in;
    return m;
}

// cubic Hermite on a uniform grid from values and derivatives
double hermite_eval(const Vec& y, const Vec& dy, int n, double h, double x0, double x,
                    int stride = 1, int offset = 0) {
    double s = (x - x0) / h;
    int i = std::clamp((int)std::floor(s), 0, n - 2);
    s -= i;
    double f0 = y[(size_t)(i)*stride + offset], f1 = y[(size_t)(i + 1) * stride + offset];
    double d0 = dy[(size_t)(i)*stride + offset] * h, d1 = dy[(size_t)(i + 1) * stride + offset] * h;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return f0 * h00 + d0 * h10 + f1 * h01 + d1 * h11;
}

// derivative of the cubic Hermite interpolant
double hermite_eval_d(const Vec& y, const Vec& dy, int n, double h, double x0, double x,
                      int stride = 1, int offset = 0) {
    double s = (x - x0) / h;
    int i = std::clamp((int)std::floor(s), 0, n - 2);
    s -= i;
    double f0 = y[(size_t)(i)*stride + offset], f1 = y[(size_t)(i + 1) * stride + offset];
    double d0 = dy[(size_t)(i)*stride + offset] * h, d1 = dy[(size_t)(i + 1) * stride + offset] * h;
    double s2 = s * s;
    double g00 = 6 * s2 - 6 * s, g10 = 3 * s2 - 4 * s + 1;
    double g01 = -6 * s2 + 6 * s, g11 = 3 * s2 - 2 * s;
    return (f0 * g00 + d0 * g10 + f1 * g01 + d1 * g11) / h;
}

// ODE-aware derivative of mesh samples: y' from neighbors plus y'' = g data,
// O(h^4); one-sided O(h^3) at the mesh edges.
void derivative_from_ode(const Vec& y, const Vec& g, int n, double h, Vec& dy) {
    dy.resize(n);
    for (int i = 1; i + 1 < n; ++i)
        dy[i] = (y[i + 1] - y[i - 1]) / (2 * h) - (h / 12.0) * (g[i + 1] - g[i - 1]);
    dy[0] = (y[1] - y[0]) / h - h * (2 * g[0] + g[1]) / 6.0;
    dy[n - 1] = (y[n - 1] - y[n - 2]) / h + h * (2 * g[n - 1] + g[n - 2]) / 6.0;
}

GreenResult green_solve_cached(const Vec& cosQ, const Vec& f, int n, int i0, int iT,
                               double h) {
    // Numerov factors for -y'' + c y = f  (y'' = c y - f)
    const double h2 = h * h;
    Vec A(n), F(n);
    for (int i = 0; i < n; ++i) {
        A[i] = 1.0 - (h2 / 12.0) * cosQ[i];
        F[i] = (h2 / 12.0) * f[i];
    }
    GreenResult out;
    out.h.assign(n, 0.0);
    // Dirichlet solve on [i0, iT]
    int m = iT - i0 - 1;  // interior unknowns
    if (m < 1) throw ValidationError("green_solve: degenerate interior mesh");
    Vec sub(m), diag(m), sup(m), rhs(m);
    for (int k = 0; k < m; ++k) {
        int i = i0 + 1 + k;
        sub[k] = A[i - 1];
        diag[k] = -(2.0 + (10.0 * h2 / 12.0) * cosQ[i]);
        sup[k] = A[i + 1];
        rhs[k] = -(F[i + 1] + 10.0 * F[i] + F[i - 1]);
    }
    solve_tridiagonal(sub, diag, sup, rhs);
    for (int k = 0; k < m; ++k) out.h[i0 + 1 + k] = rhs[k];
    // march outward with the same recurrence (the equation holds at i0, iT)
    for (int i = i0; i >= 1; --i) {
        double num = -(F[i + 1] + 10.0 * F[i] + F[i - 1]) +
                     (2.0 + (10.0 * h2 / 12.0) * cosQ[i]) * out.h[i] - A[i + 1] * out.h[i + 1];
        out.h[i - 1] = num / A[i - 1];
    }
    for (int i = iT; i + 1 < n; ++i) {
        double num = -(F[i + 1] + 10.0 * F[i] + F[i - 1]) +
                     (2.0 + (10.0 * h2 / 12.0) * cosQ[i]) * out.h[i] - A[i - 1] * out.h[i - 1];
        out.h[i + 1] = num / A[i + 1];
    }
    // derivative via y'' = c y - f
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = cosQ[i] * out.h[i] - f[i];
    derivative_from_ode(out.h, g, n, h, out.hdot);
    double sup_h = 0.0, sup_f = 0.0;
    for (int i = 0; i < n; ++i) {
        sup_h = std::max(sup_h, std::abs(out.h[i]) + std::abs(out.hdot[i]));
        sup_f = std::max(sup_f, std::abs(f[i]));
    }
    out.stability_constant = (sup_f > 0) ? sup_h / sup_f : 0.0;
    return out;
}

}  // namespace

GreenResult green_solve(const PeriodicOrbit& QT, const Vec& f, int n, int i0, int iT,
                        double h_mesh) {
    if ((int)f.size() != n) throw ValidationError("green_solve: sample count mismatch");
    Vec cosQ(n);
    for (int i = 0; i < n; ++i) cosQ[i] = std::cos(QT.q((i - i0) * h_mesh));
    return green_solve_cached(cosQ, f, n, i0, iT, h_mesh);
}

Vec ConnectingOrbit::phi_at(double t) const {
    double tau = t - lambda.theta_p;
    Vec out(d);
    Vec om = lambda.omega();
    for (int j = 0; j < d; ++j)
        out[j] = lambda.phi_p[j] + om[j] * tau +
                 hermite_eval(v, vdot, n, h, tau_of(0), tau, d, j);
    return out;
}

Vec ConnectingOrbit::phidot_at(double t) const {
    double tau = t - lambda.theta_p;
    Vec out(d);
    Vec om = lambda.omega();
    for (int j = 0; j < d; ++j)
        out[j] = om[j] + hermite_eval_d(v, vdot, n, h, tau_of(0), tau, d, j);
    return out;
}

double ConnectingOrbit::q_at(double t) const {
    double tau = t - lambda.theta_p;
    double wv = hermite_eval(w, wdot, n, h, tau_of(0), tau);
    double qv = hermite_eval(Q, Qdot, n, h, tau_of(0), tau);
    return qv + wv;
}

double ConnectingOrbit::qdot_at(double t) const {
    double tau = t - lambda.theta_p;
    double wd = hermite_eval_d(w, wdot, n, h, tau_of(0), tau);
    // Qdot interpolated with its own derivative sin(Q) at the nodes
    double s = (tau - tau_of(0)) / h;
    int i = std::clamp((int)std::floor(s), 0, n - 2);
    s -= i;
    double f0 = Qdot[i], f1 = Qdot[i + 1];
    double d0 = std::sin(Q[i]) * h, d1 = std::sin(Q[i + 1]) * h;
    double s2 = s * s, s3 = s2 * s;
    double qd = f0 * (2 * s3 - 3 * s2 + 1) + d0 * (s3 - 2 * s2 + s) +
                f1 * (-2 * s3 + 3 * s2) + d1 * (s3 - s2);
    return qd + wd;
}

TransitionSolver::TransitionSolver(const TrigPerturbation& P, SolverSettings s)
    : P_(&P), s_(s) {
    if (s_.relax_domain == false && P.vanishes_on_tori()) s_.relax_domain = true;
}

void TransitionSolver::validate_domain(const TransitionParams& lambda) const {
    const double T = lambda.T();
    if (!(T > 0)) throw ValidationError("transition: theta+ must precede theta-");
    if ((int)lambda.phi_p.size() != P_->d() || (int)lambda.phi_m.size() != P_->d())
        throw ValidationError("transition: phi dimension mismatch");
    if (T < kPendulumTMin)
        throw ValidationError("transition: T below the rotation regime minimum");
    if (T > s_.T_max) throw ValidationError("transition: T exceeds T_max");
    if (s_.mu <= 0.0) return;
    double lnmu = std::abs(std::log(s_.mu));
    if (T < s_.C1 * lnmu - 1e-9)
        throw ValidationError("transition: T below C1 |ln mu|");
    if (!s_.relax_domain) {
        double beta = small_denominator(lambda.omega(), P_->order()).beta;
        if (!(s_.C0 * beta * beta > s_.mu))
            throw ValidationError("transition: C0 beta^2 <= mu (too resonant)");
        if (!(T <= s_.C0 * beta / s_.mu + 1e-9))
            throw ValidationError("transition: T above C0 beta / mu");
    }
}

ConnectingOrbit TransitionSolver::solve(const TransitionParams& lambda,
                                        const ConnectingOrbit* warm,
                                        int m_in_hint) const {
    validate_domain(lambda);
    const int d = P_->d();
    const double T = lambda.T();
    const double mu = s_.mu;
    const Vec om = lambda.omega();
    int n_unit = s_.n_per_unit > 0
                     ? s_.n_per_unit
                     : std::max(40, (int)std::ceil(P_->max_frequency(om) / 0.025));
    if (warm && warm->n > 0) m_in_hint = warm->iT - warm->i0;
    Mesh mesh = build_mesh(T, n_unit, m_in_hint);

    ConnectingOrbit orb;
    orb.lambda = lambda;
    orb.mu = mu;
    orb.d = d;
    orb.n = mesh.n;
    orb.i0 = mesh.i0;
    orb.iT = mesh.iT;
    orb.h = mesh.h;
    PeriodicOrbit QT(T);
    orb.Q.resize(mesh.n);
    orb.Qdot.resize(mesh.n);
    Vec cosQ(mesh.n), sinQ(mesh.n);
    for (int i = 0; i < mesh.n; ++i) {
        double tau = (i - mesh.i0) * mesh.h;
        orb.Q[i] = QT.q(tau);
        orb.Qdot[i] = QT.qdot(tau);
        cosQ[i] = std::cos(orb.Q[i]);
        sinQ[i] = std::sin(orb.Q[i]);
    }
    orb.beta = small_denominator(om, std::max(1, P_->order())).beta;

    orb.v.assign((size_t)mesh.n * d, 0.0);
    orb.vdot.assign((size_t)mesh.n * d, 0.0);
    orb.w.assign(mesh.n, 0.0);
    orb.wdot.assign(mesh.n, 0.0);
    if (warm && warm->n == mesh.n && warm->d == d) {
        orb.v = warm->v;
        orb.vdot = warm->vdot;
        orb.w = warm->w;
        orb.wdot = warm->wdot;
    }

    // weighted norms of the scheme
    const double beta_t = std::max({orb.beta, std::sqrt(mu / std::max(s_.C0, 1e-9)), 1e-6});
    const double vw_fac = beta_t * beta_t / (1.0 + s_.c1_norm * mu * T * T);
    auto z_norm = [&](const Vec& dv, const Vec& dvd, const Vec& dw, const Vec& dwd) {
        double nv = 0.0, nw = 0.0;
        for (int i = 0; i < mesh.n; ++i) {
            double a = 0.0, b = 0.0;
            for (int j = 0; j < d; ++j) {
                a += dv[(size_t)i * d + j] * dv[(size_t)i * d + j];
                b += dvd[(size_t)i * d + j] * dvd[(size_t)i * d + j];
            }
            nv = std::max(nv, std::sqrt(a) * vw_fac + std::sqrt(b) * beta_t);
            nw = std::max(nw, std::abs(dw[i]) + std::abs(dwd[i]));
        }
        return std::max(nv, nw);
    };

    Vec Fphi((size_t)mesh.n * d), Fq(mesh.n), col(mesh.n), c1(mesh.n), c2(mesh.n);
    Vec vn((size_t)mesh.n * d), vdn((size_t)mesh.n * d), rhs(mesh.n);
    double prev_update = 0.0;
    orb.contraction_factor = 0.0;
    int iter = 0;
    for (;; ++iter) {
        if (iter >= s_.max_iterations)
            throw NumericalError("transition solve: contraction did not converge");
        // evaluate the forcing at the current iterate
        if (mu != 0.0) {
            Vec phi(d);
            for (int i = 0; i < mesh.n; ++i) {
                double tau = (i - mesh.i0) * mesh.h;
                for (int j = 0; j < d; ++j)
                    phi[j] = lambda.phi_p[j] + om[j] * tau + orb.v[(size_t)i * d + j];
                double dq, dt;
                P_->grad(phi.data(), orb.Q[i] + orb.w[i], lambda.theta_p + tau,
                         &Fphi[(size_t)i * d], dq, dt);
                Fq[i] = dq;
            }
        } else {
            std::fill(Fphi.begin(), Fphi.end(), 0.0);
            std::fill(Fq.begin(), Fq.end(), 0.0);
        }
        // v-update: double integral with affine boundary correction
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < mesh.n; ++i) col[i] = Fphi[(size_t)i * d + j];
            cumulative_integral6(col.data(), mesh.n, mesh.h, c1.data());
            cumulative_integral6(c1.data(), mesh.n, mesh.h, c2.data());
            double J0 = -mu * c2[mesh.i0], JT = -mu * c2[mesh.iT];
            double slope = (J0 - JT) / T;
            for (int i = 0; i < mesh.n; ++i) {
                double tau = (i - mesh.i0) * mesh.h;
                vn[(size_t)i * d + j] = -mu * c2[i] - (J0 * (T - tau) + JT * tau) / T;
                vdn[(size_t)i * d + j] = -mu * c1[i] + slope;
            }
        }
        // w-update: Green solve of -S(w) + mu Fq
        for (int i = 0; i < mesh.n; ++i) {
            double cw = std::cos(orb.w[i]) - 1.0, sw = std::sin(orb.w[i]) - orb.w[i];
            double S = sinQ[i] * cw + cosQ[i] * sw;
            rhs[i] = -S + mu * Fq[i];
        }
        GreenResult g = green_solve_cached(cosQ, rhs, mesh.n, mesh.i0, mesh.iT, mesh.h);
        orb.green_constant = g.stability_constant;
        // update norm and convergence control
        Vec dw(mesh.n), dwd(mesh.n), dv((size_t)mesh.n * d), dvd((size_t)mesh.n * d);
        for (int i = 0; i < mesh.n; ++i) {
            dw[i] = g.h[i] - orb.w[i];
            dwd[i] = g.hdot[i] - orb.wdot[i];
        }
        for (size_t k = 0; k < vn.size(); ++k) {
            dv[k] = vn[k] - orb.v[k];
            dvd[k] = vdn[k] - orb.vdot[k];
        }
        double update = z_norm(dv, dvd, dw, dwd);
        orb.v = vn;
        orb.vdot = vdn;
        orb.w = g.h;
        orb.wdot = g.hdot;
        if (iter > 0 && prev_update > 0 && update > 1e-13) {
            double factor = update / prev_update;
            if (update > 1e-10 || factor < 2.0)
                orb.contraction_factor = std::max(orb.contraction_factor,
                                                  (update > 1e-10) ? factor : 0.0);
            if (iter > 5 && factor >= 0.9 && update > 1e-8)
                throw NumericalError(
                    "transition solve: iteration not contracting (mu too large for "
                    "this small denominator)");
        }
        orb.update_norm = update;
        if (update <= s_.contraction_tol) break;
        if (iter > 3 && update < 1e-10 && update >= 0.9 * prev_update) break;  //噪 floor
        prev_update = update;
        if (mu == 0.0) break;
    }
    orb.iterations = iter + 1;
    orb.discrete_residual = orb.update_norm;

    // final evaluation pass: f and its first derivatives at the solution
    orb.fphi_node.assign((size_t)mesh.n * d, 0.0);
    orb.fq_node.assign(mesh.n, 0.0);
    orb.f_node.assign(mesh.n, 0.0);
    Vec ft(mesh.n, 0.0);
    {
        Vec phi(d);
        for (int i = 0; i < mesh.n; ++i) {
            double tau = (i - mesh.i0) * mesh.h;
            for (int j = 0; j < d; ++j)
                phi[j] = lambda.phi_p[j] + om[j] * tau + orb.v[(size_t)i * d + j];
            double q = orb.Q[i] + orb.w[i], t = lambda.theta_p + tau;
            double dq, dtt;
            P_->grad(phi.data(), q, t, &orb.fphi_node[(size_t)i * d], dq, dtt);
            orb.fq_node[i] = dq;
            orb.f_node[i] = P_->eval(phi.data(), q, t);
            ft[i] = dtt;
        }
    }
    orb.ft_node = ft;

    // endpoints and sup norms
    orb.phidot_p.resize(d);
    orb.phidot_m.resize(d);
    for (int j = 0; j < d; ++j) {
        orb.phidot_p[j] = om[j] + orb.vdot[(size_t)mesh.i0 * d + j];
        orb.phidot_m[j] = om[j] + orb.vdot[(size_t)mesh.iT * d + j];
    }
    orb.qdot_p = orb.Qdot[mesh.i0] + orb.wdot[mesh.i0];
    orb.qdot_m = orb.Qdot[mesh.iT] + orb.wdot[mesh.iT];
    for (int i = mesh.i0; i <= mesh.iT; ++i) {
        double a = 0.0, b = 0.0;
        for (int j = 0; j < d; ++j) {
            a += orb.v[(size_t)i * d + j] * orb.v[(size_t)i * d + j];
            b += orb.vdot[(size_t)i * d + j] * orb.vdot[(size_t)i * d + j];
        }
        orb.sup_v = std::max(orb.sup_v, std::sqrt(a));
        orb.sup_vdot = std::max(orb.sup_vdot, std::sqrt(b));
        orb.sup_w = std::max(orb.sup_w, std::abs(orb.w[i]));
        orb.sup_wdot = std::max(orb.sup_wdot, std::abs(orb.wdot[i]));
    }

    // action integral over [theta+, theta-]
    {
        int nin = mesh.iT - mesh.i0 + 1;
        Vec L(nin);
        for (int k = 0; k < nin; ++k) {
            int i = mesh.i0 + k;
            double kin = 0.0;
            for (int j = 0; j < d; ++j) {
                double pd = om[j] + orb.vdot[(size_t)i * d + j];
                kin += pd * pd;
            }
            double qd = orb.Qdot[i] + orb.wdot[i];
            L[k] = 0.5 * kin + 0.5 * qd * qd + (1.0 - std::cos(orb.Q[i] + orb.w[i])) -
                   mu * orb.f_node[i];
        }
        orb.action = integrate_gregory6(L.data(), nin, mesh.h);
    }
    return orb;
}

ConnectingOrbit TransitionSolver::solve_collocation(const TransitionParams& lambda,
                                                    double density_factor) const {
    validate_domain(lambda);
    const int d = P_->d();
    const int nb = d + 1;
    const double T = lambda.T();
    const double mu = s_.mu;
    const Vec om = lambda.omega();
    int n_unit = s_.n_per_unit > 0
                     ? s_.n_per_unit
                     : std::max(40, (int)std::ceil(P_->max_frequency(om) / 0.025));
    n_unit = (int)std::ceil(density_factor * n_unit);
    Mesh mesh = build_mesh(T, n_unit, 0);
    PeriodicOrbit QT(T);
    Vec Q(mesh.n), Qd(mesh.n);
    for (int i = 0; i < mesh.n; ++i) {
        double tau = (i - mesh.i0) * mesh.h;
        Q[i] = QT.q(tau);
        Qd[i] = QT.qdot(tau);
    }
    // state y_i = (phi (d), q) at interior nodes of [i0, iT]; Dirichlet ends
    const int m = mesh.iT - mesh.i0 + 1;  // nodes including ends
    std::vector<Vec> y(m, Vec(nb, 0.0));
    for (int k = 0; k < m; ++k) {
        int i = mesh.i0 + k;
        double tau = (i - mesh.i0) * mesh.h;
        for (int j = 0; j < d; ++j) y[k][j] = lambda.phi_p[j] + om[j] * tau;
        y[k][d] = Q[i];
    }
    const double h2 = mesh.h * mesh.h;
    auto g_of = [&](int k, const Vec& yk, Vec& g) {
        double t = lambda.theta_p + (k)*mesh.h;
        Vec dphi(d);
        double dq, dt;
        P_->grad(yk.data(), yk[d], t, dphi.data(), dq, dt);
        for (int j = 0; j < d; ++j) g[j] = -mu * dphi[j];
        g[d] = std::sin(yk[d]) - mu * dq;
    };
    auto Dg_of = [&](int k, const Vec& yk, Vec& D) {
        double t = lambda.theta_p + (k)*mesh.h;
        Vec dpp(d * d), dpq(d);
        double dqq;
        P_->hess(yk.data(), yk[d], t, dpp.data(), dpq.data(), dqq);
        D.assign(nb * nb, 0.0);
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) D[a * nb + b] = -mu * dpp[a * d + b];
            D[a * nb + d] = -mu * dpq[a];
            D[d * nb + a] = -mu * dpq[a];
        }
        D[d * nb + d] = std::cos(yk[d]) - mu * dqq;
    };
    std::vector<Vec> g(m, Vec(nb));
    auto residual = [&](std::vector<Vec>& G) {
        for (int k = 0; k < m; ++k) g_of(k, y[k], g[k]);
        double worst = 0.0;
        for (int k = 1; k + 1 < m; ++k) {
            for (int c = 0; c < nb; ++c) {
                double r = y[k + 1][c] - 2 * y[k][c] + y[k - 1][c] -
                           (h2 / 12.0) * (g[k + 1][c] + 10 * g[k][c] + g[k - 1][c]);
                G[k - 1][c] = r;
                worst = std::max(worst, std::abs(r));
            }
        }
        return worst;
    };
    std::vector<Vec> G(m - 2, Vec(nb));
    double res = residual(G);
    for (int newton = 0; newton < 40 && res > 1e-13 * (1.0 + h2); ++newton) {
        // block tridiagonal Jacobian
        std::vector<Vec> sub(m - 2, Vec(nb * nb, 0.0)), diag(m - 2, Vec(nb * nb, 0.0)),
            sup(m - 2, Vec(nb * nb, 0.0));
        Vec rhs((size_t)(m - 2) * nb);
        Vec D(nb * nb);
        for (int k = 1; k + 1 < m; ++k) {
            int r = k - 1;
            Dg_of(k - 1, y[k - 1], D);
            for (int a = 0; a < nb * nb; ++a) sub[r][a] = -(h2 / 12.0) * D[a];
            for (int a = 0; a < nb; ++a) sub[r][a * nb + a] += 1.0;
            Dg_of(k, y[k], D);
            for (int a = 0; a < nb * nb; ++a) diag[r][a] = -(10.0 * h2 / 12.0) * D[a];
            for (int a = 0; a < nb; ++a) diag[r][a * nb + a] += -2.0;
            Dg_of(k + 1, y[k + 1], D);
            for (int a = 0; a < nb * nb; ++a) sup[r][a] = -(h2 / 12.0) * D[a];
            for (int a = 0; a < nb; ++a) sup[r][a * nb + a] += 1.0;
            for (int c = 0; c < nb; ++c) rhs[(size_t)r * nb + c] = -G[r][c];
        }
        solve_block_tridiagonal(sub, diag, sup, rhs, nb);
        // damped update
        double lam = 1.0;
        std::vector<Vec> ytry = y;
        for (int bt = 0; bt < 12; ++bt) {
            for (int k = 1; k + 1 < m; ++k)
                for (int c = 0; c < nb; ++c)
                    ytry[k][c] = y[k][c] + lam * rhs[(size_t)(k - 1) * nb + c];
            std::vector<Vec> ysave = y;
            y = ytry;
            double res2 = residual(G);
            if (res2 < res || lam < 1e-3) {
                res = res2;
                break;
            }
            y = ysave;
            lam *= 0.5;
        }
    }
    if (res > 1e-10 * (1.0 + h2))
        throw NumericalError("collocation oracle: Newton did not converge");
    const double final_res = res;

    // package as a ConnectingOrbit (extension by outward marching)
    ConnectingOrbit orb;
    orb.lambda = lambda;
    orb.mu = mu;
    orb.d = d;
    orb.n = mesh.n;
    orb.i0 = mesh.i0;
    orb.iT = mesh.iT;
    orb.h = mesh.h;
    orb.Q = Q;
    orb.Qdot = Qd;
    orb.beta = small_denominator(om, std::max(1, P_->order())).beta;
    std::vector<Vec> yfull(mesh.n, Vec(nb, 0.0));
    for (int k = 0; k < m; ++k) yfull[mesh.i0 + k] = y[k];
    // nonlinear Numerov marching outward, fixed-point corrector per node
    auto march = [&](int from, int dir) {
        Vec gm(nb), g0(nb), gp(nb), ynew(nb);
        for (int i = from; i - dir >= 0 && i - dir < mesh.n; i += -dir) {
            // predict y[i - dir] from nodes i, i + dir
            int knew = i - dir;
            g_of(i - mesh.i0, yfull[i], g0);
            g_of(i + dir - mesh.i0, yfull[i + dir], gp);
            for (int c = 0; c < nb; ++c)
                ynew[c] = 2 * yfull[i][c] - yfull[i + dir][c] + h2 * g0[c];
            for (int fix = 0; fix < 3; ++fix) {
                g_of(knew - mesh.i0, ynew, gm);
                for (int c = 0; c < nb; ++c)
                    ynew[c] = 2 * yfull[i][c] - yfull[i + dir][c] +
                              (h2 / 12.0) * (gp[c] + 10 * g0[c] + gm[c]);
            }
            yfull[knew] = ynew;
        }
    };
    march(mesh.i0, +1);
    march(mesh.iT, -1);
    orb.v.assign((size_t)mesh.n * d, 0.0);
    orb.w.assign(mesh.n, 0.0);
    for (int i = 0; i < mesh.n; ++i) {
        double tau = (i - mesh.i0) * mesh.h;
        for (int j = 0; j < d; ++j)
            orb.v[(size_t)i * d + j] = yfull[i][j] - (lambda.phi_p[j] + om[j] * tau);
        orb.w[i] = yfull[i][d] - Q[i];
    }
    // derivatives from the ODE data
    Vec gq(mesh.n), col(mesh.n), gcol(mesh.n), dcol(mesh.n);
    orb.vdot.assign((size_t)mesh.n * d, 0.0);
    {
        Vec gk(nb);
        std::vector<Vec> gall(mesh.n, Vec(nb));
        for (int i = 0; i < mesh.n; ++i) g_of(i - mesh.i0, yfull[i], gall[i]);
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < mesh.n; ++i) {
                col[i] = orb.v[(size_t)i * d + j];
                gcol[i] = gall[i][j];  // v'' = phi'' (straight line has none)
            }
            derivative_from_ode(col, gcol, mesh.n, mesh.h, dcol);
            for (int i = 0; i < mesh.n; ++i) orb.vdot[(size_t)i * d + j] = dcol[i];
        }
        for (int i = 0; i < mesh.n; ++i) {
            col[i] = yfull[i][d];
            gcol[i] = gall[i][d];
        }
        derivative_from_ode(col, gcol, mesh.n, mesh.h, dcol);
        orb.wdot.resize(mesh.n);
        for (int i = 0; i < mesh.n; ++i) orb.wdot[i] = dcol[i] - Qd[i];
    }
    // final pass data, endpoints, action (same as the main path)
    orb.fphi_node.assign((size_t)mesh.n * d, 0.0);
    orb.fq_node.assign(mesh.n, 0.0);
    orb.f_node.assign(mesh.n, 0.0);
    orb.ft_node.assign(mesh.n, 0.0);
    for (int i = 0; i < mesh.n; ++i) {
        double t = lambda.theta_p + (i - mesh.i0) * mesh.h;
        double dq, dt;
        P_->grad(yfull[i].data(), yfull[i][d], t, &orb.fphi_node[(size_t)i * d], dq, dt);
        orb.fq_node[i] = dq;
        orb.ft_node[i] = dt;
        orb.f_node[i] = P_->eval(yfull[i].data(), yfull[i][d], t);
    }
    orb.phidot_p.resize(d);
    orb.phidot_m.resize(d);
    for (int j = 0; j < d; ++j) {
        orb.phidot_p[j] = om[j] + orb.vdot[(size_t)mesh.i0 * d + j];
        orb.phidot_m[j] = om[j] + orb.vdot[(size_t)mesh.iT * d + j];
    }
    orb.qdot_p = Qd[mesh.i0] + orb.wdot[mesh.i0];
    orb.qdot_m = Qd[mesh.iT] + orb.wdot[mesh.iT];
    for (int i = mesh.i0; i <= mesh.iT; ++i) {
        double a = 0.0;
        for (int j = 0; j < d; ++j)
            a += orb.v[(size_t)i * d + j] * orb.v[(size_t)i * d + j];
        orb.sup_v = std::max(orb.sup_v, std::sqrt(a));
        orb.sup_w = std::max(orb.sup_w, std::abs(orb.w[i]));
    }
    {
        int nin = mesh.iT - mesh.i0 + 1;
        Vec L(nin);
        for (int k = 0; k < nin; ++k) {
            int i = mesh.i0 + k;
            double kin = 0.0;
            for (int j = 0; j < d; ++j) {
                double pd = om[j] + orb.vdot[(size_t)i * d + j];
                kin += pd * pd;
            }
            double qd = Qd[i] + orb.wdot[i];
            L[k] = 0.5 * kin + 0.5 * qd * qd + (1.0 - std::cos(yfull[i][d])) -
                   mu * orb.f_node[i];
        }
        orb.action = integrate_gregory6(L.data(), nin, mesh.h);
    }
    orb.iterations = 0;
    orb.discrete_residual = final_res;
    return orb;
}

TransitionSolver::Residuals TransitionSolver::residuals(const ConnectingOrbit& orb) const {
    Residuals r;
    const int d = orb.d;
    const Vec om = orb.lambda.omega();
    for (int i = orb.i0; i <= orb.iT; ++i) {
        // 7-point second derivative of q = Q + w and phi = phibar + v
        auto d2 = [&](auto f) {
            return (2.0 * (f(i + 3) + f(i - 3)) - 27.0 * (f(i + 2) + f(i - 2)) +
                    270.0 * (f(i + 1) + f(i - 1)) - 490.0 * f(i)) /
                   (180.0 * orb.h * orb.h);
        };
        double qdd = d2([&](int k) { return orb.Q[k] + orb.w[k]; });
        double qres = std::abs(-qdd + std::sin(orb.Q[i] + orb.w[i]) - orb.mu * orb.fq_node[i]);
        r.q = std::max(r.q, qres);
        for (int j = 0; j < d; ++j) {
            double pdd = d2([&](int k) {
                double tau = (k - orb.i0) * orb.h;
                return orb.lambda.phi_p[j] + om[j] * tau + orb.v[(size_t)k * d + j];
            });
            r.phi = std::max(r.phi,
                             std::abs(pdd + orb.mu * orb.fphi_node[(size_t)i * d + j]));
        }
    }
    return r;
}

double TransitionSolver::energy_rate_defect(const ConnectingOrbit& orb) const {
    const int d = orb.d;
    const Vec om = orb.lambda.omega();
    Vec e(orb.n);
    for (int i = 0; i < orb.n; ++i) {
        double kin = 0.0;
        for (int j = 0; j < d; ++j) {
            double pd = om[j] + orb.vdot[(size_t)i * d + j];
            kin += pd * pd;
        }
        double qd = orb.Qdot[i] + orb.wdot[i];
        e[i] = 0.5 * kin + 0.5 * qd * qd + std::cos(orb.Q[i] + orb.w[i]) - 1.0 +
               orb.mu * orb.f_node[i];
    }
    double worst = 0.0;
    for (int i = 3; i + 3 < orb.n; ++i) {
        double de = (-e[i - 3] + 9 * e[i - 2] - 45 * e[i - 1] + 45 * e[i + 1] -
                     9 * e[i + 2] + e[i + 3]) /
                    (60.0 * orb.h);
        worst = std::max(worst, std::abs(de - orb.mu * orb.ft_node[i]));
    }
    return worst;
}

Sensitivity transition_sensitivity(const TransitionSolver& solver,
                                   const TransitionParams& lambda, double h_fd) {
    const int d = (int)lambda.phi_p.size();
    Sensitivity out;
    out.d = d;
    const int ncomp = 2 + 2 * d;
    out.dphidot_p.assign(ncomp, Vec(d, 0.0));
    out.dphidot_m.assign(ncomp, Vec(d, 0.0));
    out.ok.assign(ncomp, false);
    ConnectingOrbit base = solver.solve(lambda);
    for (int c = 0; c < ncomp; ++c) {
        auto shift = [&](double s) {
            TransitionParams lp = lambda;
            if (c == 0) lp.theta_p += s;
            else if (c == 1) lp.theta_m += s;
            else if (c < 2 + d) lp.phi_p[c - 2] += s;
            else lp.phi_m[c - 2 - d] += s;
            return lp;
        };
        try {
            ConnectingOrbit op = solver.solve(shift(+h_fd), &base);
            ConnectingOrbit om = solver.solve(shift(-h_fd), &base);
            for (int j = 0; j < d; ++j) {
                out.dphidot_p[c][j] = (op.phidot_p[j] - om.phidot_p[j]) / (2 * h_fd);
                out.dphidot_m[c][j] = (op.phidot_m[j] - om.phidot_m[j]) / (2 * h_fd);
            }
            out.ok[c] = true;
        } catch (const std::exception&) {
            out.ok[c] = false;
        }
    }
    return out;
}

}  // namespace arnold
