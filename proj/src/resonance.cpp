#include "arnold/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

#include "arnold/linalg.hpp"

namespace arnold {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void enumerate_box(int d, int N, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> n(d, -N);
    while (true) {
        fn(n);
        int j = 0;
        while (j < d && ++n[j] > N) n[j++] = -N;
        if (j == d) break;
    }
}

bool lex_positive(const std::vector<int>& n) {
    for (int x : n) {
        if (x > 0) return true;
        if (x < 0) return false;
    }
    return false;
}
}  // namespace

SmallDenominator small_denominator(const Vec& omega, int N) {
    if (N < 1) throw ValidationError("small_denominator: N >= 1 required");
    const int d = (int)omega.size();
    SmallDenominator best;
    best.beta = kInf;
    enumerate_box(d, N, [&](const std::vector<int>& n) {
        bool nz = false;
        for (int x : n) nz |= (x != 0);
        for (int l = -N; l <= N; ++l) {
            if (!nz && l == 0) continue;
            double v = l;
            for (int j = 0; j < d; ++j) v += n[j] * omega[j];
            if (std::abs(v) < best.beta) {
                best.beta = std::abs(v);
                best.witness = ResonancePair{n, l};
            }
        }
    });
    return best;
}

std::vector<ResonancePair> primitive_pairs(int d, int M) {
    if (M < 1) throw ValidationError("primitive_pairs: M >= 1 required");
    // budget guard: cell count grows like (2M+1)^d (M+1)
    double count = std::pow(2.0 * M + 1.0, d) * (M + 1.0);
    if (count > 8e6) throw ResourceError("primitive_pairs: enumeration budget exceeded");
    static std::map<std::pair<int, int>, std::vector<ResonancePair>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(d, M);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<ResonancePair> out;
    enumerate_box(d, M, [&](const std::vector<int>& n) {
        bool nz = false;
        for (int x : n) nz |= (x != 0);
        if (!nz) return;
        for (int l = 0; l <= M; ++l) {
            if (l == 0 && !lex_positive(n)) continue;  // canonical sign for l = 0
            int g = l;
            for (int x : n) g = std::gcd(g, std::abs(x));
            if (g != 1) continue;
            out.push_back(ResonancePair{n, l});
        }
    });
    cache[key] = out;
    return out;
}

DistToQM dist_to_QM(const Vec& omega, int M) {
    const int d = (int)omega.size();
    DistToQM best;
    best.dist = kInf;
    for (const ResonancePair& h : primitive_pairs(d, M)) {
        double v = h.l;
        double nn = 0.0;
        for (int j = 0; j < d; ++j) {
            v += h.n[j] * omega[j];
            nn += double(h.n[j]) * h.n[j];
        }
        double dist = std::abs(v) / std::sqrt(nn);
        if (dist < best.dist) {
            best.dist = dist;
            best.witness = h;
        }
    }
    return best;
}

Lattice Lattice::cubic(int dim, double scale) {
    Lattice L;
    L.dim = dim;
    L.basis.assign(dim * dim, 0.0);
    for (int i = 0; i < dim; ++i) L.basis[i * dim + i] = scale;
    return L;
}

double Lattice::condition_number() const {
    // singular values from the spectrum of B^T B
    Vec G(dim * dim, 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            double s = 0.0;
            for (int k = 0; k < dim; ++k) s += basis[k * dim + i] * basis[k * dim + j];
            G[i * dim + j] = s;
        }
    Vec ev = symmetric_eigenvalues(G, dim);
    if (ev[0] <= 0) return kInf;
    return std::sqrt(ev[dim - 1] / ev[0]);
}

Lattice dual_lattice(const Lattice& L) {
    Lattice D;
    D.dim = L.dim;
    Vec inv;
    try {
        inv = invert_dense(L.basis, L.dim);
    } catch (const NumericalError&) {
        throw ValidationError("dual_lattice: singular basis");
    }
    D.basis.assign(L.dim * L.dim, 0.0);
    for (int i = 0; i < L.dim; ++i)
        for (int j = 0; j < L.dim; ++j) D.basis[i * L.dim + j] = inv[j * L.dim + i];
    return D;
}

AlphaResult alpha_min(const Lattice& L, const Vec& Omega, double R, long budget) {
    if (!(R > 0)) throw ValidationError("alpha_min: R > 0 required");
    const int l = L.dim;
    Lattice D = dual_lattice(L);
    // p = D.basis * m; bound |m_i| <= ||column i of L.basis|| * R
    std::vector<long> K(l);
    double cells = 1.0;
    for (int i = 0; i < l; ++i) {
        double cn = 0.0;
        for (int k = 0; k < l; ++k) cn += L.basis[k * l + i] * L.basis[k * l + i];
        K[i] = (long)std::ceil(std::sqrt(cn) * R + 1e-9);
        cells *= (2.0 * K[i] + 1.0);
    }
    if (cells > (double)budget) throw ResourceError("alpha_min: enumeration budget exceeded");
    AlphaResult best;
    best.alpha = kInf;
    best.empty = true;
    std::vector<long> m(l, 0);
    for (int i = 0; i < l; ++i) m[i] = -K[i];
    Vec p(l);
    while (true) {
        bool nz = false;
        for (long x : m) nz |= (x != 0);
        if (nz) {
            double norm = 0.0;
            for (int i = 0; i < l; ++i) {
                double s = 0.0;
                for (int j = 0; j < l; ++j) s += D.basis[i * l + j] * m[j];
                p[i] = s;
                norm += s * s;
            }
            if (norm <= R * R * (1 + 1e-12)) {
                double v = std::abs(dot(p, Omega));
                if (best.empty || v < best.alpha) {
                    best.alpha = v;
                    best.empty = false;
                    best.witness = p;
                }
            }
        }
        int j = 0;
        while (j < l && ++m[j] > K[j]) m[j++] = -K[j];
        if (j == l) break;
    }
    if (best.empty) best.alpha = kInf;
    return best;
}

double ergodization_constant(int l) {
    if (l < 1) throw ValidationError("ergodization_constant: l >= 1");
    double a = 0.5;
    for (int i = 2; i <= l; ++i) a = 0.5 * std::sqrt(7.0) * std::sqrt(4.0 * a * a / 3.0 + 4.0);
    return a;
}

ErgodizationBounds ergodization_bounds(const Vec& Omega, double delta,
                                       const Lattice* lattice) {
    if (!(delta > 0)) throw ValidationError("ergodization_bounds: delta > 0 required");
    const int l = (int)Omega.size();
    Lattice L = lattice ? *lattice : Lattice::cubic(l);
    double al = ergodization_constant(l);
    auto inv = [](const AlphaResult& a) {
        if (a.empty) return 0.0;           // alpha = +inf -> T bound 0
        if (a.alpha == 0.0) return kInf;   // exact resonance -> never
        return 1.0 / a.alpha;
    };
    ErgodizationBounds b;
    b.upper = inv(alpha_min(L, Omega, al / delta));
    b.lower = 0.25 * inv(alpha_min(L, Omega, 1.0 / (4.0 * delta)));
    return b;
}

ErgodizationMeasurement measure_ergodization_time(const Vec& Omega, double delta,
                                                  const Vec& start, double time_budget) {
    const int l = (int)Omega.size();
    if (!(delta > 0)) throw ValidationError("measure_ergodization_time: delta > 0");
    double om = norm2(Omega);
    if (om == 0.0) throw ValidationError("measure_ergodization_time: Omega must be nonzero");
    if (l > 3) throw ValidationError("measure_ergodization_time: supports l <= 3");
    // torus diameter check: everything is within sqrt(l)/2 of any point
    if (delta >= 0.5 * std::sqrt((double)l)) return {0.0, true, 1.0};
    if (l == 1) {
        // the trajectory covers a contiguous arc; the residual gap is exact
        const double dt = delta / (4.0 * om);
        double t = 0.0;
        while (1.0 - om * t > 2.0 * delta) {
            t += dt;
            if (t > time_budget) return {t, false, std::min(1.0, om * t + 2 * delta)};
        }
        return {t, true, 1.0};
    }
    const int G = std::max(2, (int)std::ceil(2.0 / delta));  // side <= delta/2
    const double side = 1.0 / G;
    long total = 1;
    for (int i = 0; i < l; ++i) total *= G;
    // first-touch dilation radius: covering a center x_c requires a marked
    // center within delta - side*sqrt(l) (cell radii on both sides)
    double D = delta - side * std::sqrt((double)l);
    int reach = (int)std::floor(D / side + 1e-12);
    std::vector<std::vector<int>> offsets;
    {
        std::vector<int> o(l, -reach);
        while (true) {
            double nn = 0.0;
            for (int x : o) nn += double(x) * x;
            if (side * std::sqrt(nn) <= D) offsets.push_back(o);
            int j = 0;
            while (j < l && ++o[j] > reach) o[j++] = -reach;
            if (j == l) break;
        }
    }
    std::vector<uint8_t> marked(total, 0), covered(total, 0);
    long n_covered = 0;
    auto cell_index = [&](const Vec& x) {
        long idx = 0;
        for (int i = 0; i < l; ++i) {
            double xi = x[i] - std::floor(x[i]);
            int c = std::min(G - 1, (int)(xi * G));
            idx = idx * G + c;
        }
        return idx;
    };
    auto cell_coords = [&](long idx, int* c) {
        for (int i = l - 1; i >= 0; --i) {
            c[i] = idx % G;
            idx /= G;
        }
    };
    const double dt = delta / (4.0 * om);
    Vec x = start;
    if ((int)x.size() != l) x.assign(l, 0.0);
    double t = 0.0;
    int cc[3], oc[3];
    while (true) {
        long idx = cell_index(x);
        if (!marked[idx]) {
            marked[idx] = 1;
            cell_coords(idx, cc);
            for (const auto& o : offsets) {
                long nidx = 0;
                for (int i = 0; i < l; ++i) {
                    oc[i] = (cc[i] + o[i]) % G;
                    if (oc[i] < 0) oc[i] += G;
                    nidx = nidx * G + oc[i];
                }
                if (!covered[nidx]) {
                    covered[nidx] = 1;
                    ++n_covered;
                }
            }
            if (n_covered == total) return {t, true, 1.0};
        }
        if (t > time_budget)
            return {t, false, double(n_covered) / double(total)};
        t += dt;
        for (int i = 0; i < l; ++i) x[i] += Omega[i] * dt;
    }
}

double measure_return_time(const Vec& omega_star, double delta, double horizon) {
    const int d = (int)omega_star.size();
    Vec full(d + 1);
    for (int i = 0; i < d; ++i) full[i] = omega_star[i];
    full[d] = 1.0;
    double om = norm2(full);
    double dt = delta / (8.0 * om);
    double last_hit = 0.0, max_gap = 0.0;
    Vec pos(d + 1, 0.0);
    for (double t = 0.0; t <= horizon; t += dt) {
        for (int i = 0; i <= d; ++i) pos[i] = full[i] * t;
        if (dist_mod(pos, TWO_PI) <= 0.25 * delta) {
            max_gap = std::max(max_gap, t - last_hit);
            last_hit = t;
        }
    }
    max_gap = std::max(max_gap, horizon - last_hit);
    return max_gap;
}

CurvePath::CurvePath(std::vector<Vec> points) {
    if (points.size() < 2) throw ValidationError("CurvePath: need at least 2 points");
    d_ = (int)points[0].size();
    for (const Vec& p : points)
        if ((int)p.size() != d_) throw ValidationError("CurvePath: inconsistent dimensions");
    pts_ = std::move(points);
    cum_.resize(pts_.size());
    cum_[0] = 0.0;
    for (size_t i = 1; i < pts_.size(); ++i) {
        double seg = norm2(pts_[i] - pts_[i - 1]);
        if (seg <= 0) throw ValidationError("CurvePath: degenerate segment");
        cum_[i] = cum_[i - 1] + seg;
    }
    length_ = cum_.back();
}

Vec CurvePath::at(double s) const {
    s = std::clamp(s, 0.0, length_);
    size_t i = std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin();
    if (i == 0) i = 1;
    if (i >= pts_.size()) i = pts_.size() - 1;
    double t = (s - cum_[i - 1]) / (cum_[i] - cum_[i - 1]);
    Vec out(d_);
    for (int j = 0; j < d_; ++j) out[j] = pts_[i - 1][j] + t * (pts_[i][j] - pts_[i - 1][j]);
    return out;
}

Vec CurvePath::tangent(double s) const {
    s = std::clamp(s, 0.0, length_);
    size_t i = std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin();
    if (i == 0) i = 1;
    if (i >= pts_.size()) i = pts_.size() - 1;
    Vec t = pts_[i] - pts_[i - 1];
    double nn = norm2(t);
    for (double& x : t) x /= nn;
    return t;
}

AdmissibilityReport check_admissible(const CurvePath& curve, int M, double nu_min) {
    AdmissibilityReport rep;
    rep.admissible = true;
    rep.nu = 1.0;
    const auto pairs = primitive_pairs(curve.d(), M);
    const auto& v = curve.vertices();
    const double plane_tol = 1e-12;
    // crossings segment by segment (the polyline is piecewise linear)
    double s_acc = 0.0;
    for (size_t i = 0; i + 1 < v.size(); ++i) {
        double seg_len = norm2(v[i + 1] - v[i]);
        Vec tang = v[i + 1] - v[i];
        for (double& x : tang) x /= seg_len;
        for (const ResonancePair& h : pairs) {
            double g0 = h.l, g1 = h.l, nn = 0.0, tn = 0.0;
            for (int j = 0; j < curve.d(); ++j) {
                g0 += h.n[j] * v[i][j];
                g1 += h.n[j] * v[i + 1][j];
                nn += double(h.n[j]) * h.n[j];
                tn += tang[j] * h.n[j];
            }
            double norm_n = std::sqrt(nn);
            if (std::abs(g0) < plane_tol && std::abs(g1) < plane_tol) {
                rep.admissible = false;
                rep.reason = "segment lies inside a resonance plane";
                CurveCrossing c;
                c.s = s_acc;
                c.plane = h;
                c.margin = 0.0;
                rep.crossings.push_back(c);
                continue;
            }
            if ((g0 < 0) != (g1 < 0) || std::abs(g0) < plane_tol) {
                double frac = (std::abs(g1 - g0) > 0) ? -g0 / (g1 - g0) : 0.0;
                CurveCrossing c;
                c.s = s_acc + std::clamp(frac, 0.0, 1.0) * seg_len;
                c.plane = h;
                c.margin = std::abs(tn) / norm_n;
                rep.crossings.push_back(c);
                rep.nu = std::min(rep.nu, c.margin);
                if (c.margin < nu_min) {
                    rep.admissible = false;
                    rep.reason = "tangential crossing below the transversality threshold";
                }
            }
        }
        s_acc += seg_len;
    }
    std::sort(rep.crossings.begin(), rep.crossings.end(),
              [](const CurveCrossing& a, const CurveCrossing& b) { return a.s < b.s; });
    // basin structure: expand around each crossing while dist(gamma, Q_M) grows
    if (rep.admissible && !rep.crossings.empty()) {
        const int ns = 400;
        Vec dists(ns + 1);
        for (int i = 0; i <= ns; ++i)
            dists[i] = dist_to_QM(curve.at(curve.length() * i / ns), M).dist;
        double d0 = kInf;
        for (const CurveCrossing& c : rep.crossings) {
            int ic = (int)std::round(c.s / curve.length() * ns);
            int lo = ic, hi = ic;
            while (lo > 0 && dists[lo - 1] >= dists[lo] - 1e-14) --lo;
            while (hi < ns && dists[hi + 1] >= dists[hi] - 1e-14) ++hi;
            rep.basins.emplace_back(curve.length() * lo / ns, curve.length() * hi / ns);
            d0 = std::min(d0, std::max(dists[lo], dists[ic]));
            d0 = std::min(d0, std::max(dists[hi], dists[ic]));
        }
        rep.d0 = d0;
    } else {
        rep.d0 = rep.crossings.empty() ? kInf : 0.0;
    }
    return rep;
}

CurvePath repair_curve(const CurvePath& curve, int M, double eta, uint64_t seed,
                       double nu_min) {
    auto rep = check_admissible(curve, M, nu_min);
    if (rep.admissible) return curve;
    auto rng = make_rng(seed);
    const int d = curve.d();
    double L = curve.length();
    for (double eps = eta / 64.0; eps <= eta; eps *= 2.0) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            Vec shift(d);
            double nn = 0.0;
            for (int j = 0; j < d; ++j) {
                shift[j] = uniform(rng, -1.0, 1.0);
                nn += shift[j] * shift[j];
            }
            double scale = eps / std::sqrt(std::max(nn, 1e-30));
            for (double& x : shift) x *= scale;
            // bump profile: 0 at the endpoints, 1 in the middle portion
            const int npts = 257;
            std::vector<Vec> pts;
            double r = 0.1 * L;
            for (int i = 0; i < npts; ++i) {
                double s = L * i / (npts - 1);
                double w = 1.0;
                if (s < r) w = s / r;
                else if (s > L - r) w = (L - s) / r;
                w = w * w * (3 - 2 * w);  // smoothstep
                Vec p = curve.at(s);
                for (int j = 0; j < d; ++j) p[j] -= w * shift[j];
                pts.push_back(std::move(p));
            }
            CurvePath cand(std::move(pts));
            if (check_admissible(cand, M, nu_min).admissible) return cand;
        }
    }
    throw NumericalError("repair_curve: no admissible perturbation found within eta");
}

}  // namespace arnold
