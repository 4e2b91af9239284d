#include "arnold/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace arnold {

namespace {
constexpr int kMaxD = 8;
constexpr int kMaxOrder = 16;

int sup_norm(const std::vector<int>& n, int l) {
    int m = std::abs(l);
    for (int x : n) m = std::max(m, std::abs(x));
    return m;
}

ModeKey key_of(const Mode& m) { return ModeKey{m.n, m.l}; }

ModeKey conj_key(const ModeKey& k) {
    ModeKey o = k;
    for (int& x : o.n) x = -x;
    o.l = -k.l;
    return o;
}

/// Lexicographic positivity of (n, l); decides the canonical representative.
bool is_positive(const ModeKey& k) {
    for (int x : k.n) {
        if (x > 0) return true;
        if (x < 0) return false;
    }
    return k.l > 0;
}

bool is_zero(const ModeKey& k) {
    for (int x : k.n)
        if (x != 0) return false;
    return k.l == 0;
}
}  // namespace

Complex QProfile::eval(double q) const {
    Complex s = cos_coeffs.empty() ? Complex(0) : cos_coeffs[0];
    double c1 = std::cos(q), s1 = std::sin(q);
    double cm = 1.0, sm = 0.0;
    int M = order();
    for (int m = 1; m <= M; ++m) {
        double cn = cm * c1 - sm * s1;
        double sn = sm * c1 + cm * s1;
        cm = cn;
        sm = sn;
        s += cos_coeffs[m] * cm;
        if (m - 1 < (int)sin_coeffs.size()) s += sin_coeffs[m - 1] * sm;
    }
    return s;
}

Complex QProfile::deriv(double q) const {
    Complex s = 0.0;
    double c1 = std::cos(q), s1 = std::sin(q);
    double cm = 1.0, sm = 0.0;
    int M = order();
    for (int m = 1; m <= M; ++m) {
        double cn = cm * c1 - sm * s1;
        double sn = sm * c1 + cm * s1;
        cm = cn;
        sm = sn;
        s += cos_coeffs[m] * (-double(m) * sm);
        if (m - 1 < (int)sin_coeffs.size()) s += sin_coeffs[m - 1] * (double(m) * cm);
    }
    return s;
}

Complex QProfile::deriv2(double q) const {
    Complex s = 0.0;
    double c1 = std::cos(q), s1 = std::sin(q);
    double cm = 1.0, sm = 0.0;
    int M = order();
    for (int m = 1; m <= M; ++m) {
        double cn = cm * c1 - sm * s1;
        double sn = sm * c1 + cm * s1;
        cm = cn;
        sm = sn;
        double m2 = double(m) * m;
        s += cos_coeffs[m] * (-m2 * cm);
        if (m - 1 < (int)sin_coeffs.size()) s += sin_coeffs[m - 1] * (-m2 * sm);
    }
    return s;
}

Complex QProfile::value_at_zero() const {
    Complex s = 0.0;
    for (const Complex& a : cos_coeffs) s += a;
    return s;
}

Complex QProfile::deriv_at_zero() const {
    Complex s = 0.0;
    for (size_t m = 0; m < sin_coeffs.size(); ++m) s += double(m + 1) * sin_coeffs[m];
    return s;
}

double QProfile::coeff_norm() const {
    double s = 0.0;
    for (const Complex& a : cos_coeffs) s += std::abs(a);
    for (const Complex& b : sin_coeffs) s += std::abs(b);
    return s;
}

double QProfile::lipschitz_bound() const {
    double s = 0.0;
    for (size_t m = 1; m < cos_coeffs.size(); ++m) s += m * std::abs(cos_coeffs[m]);
    for (size_t m = 0; m < sin_coeffs.size(); ++m) s += (m + 1) * std::abs(sin_coeffs[m]);
    return s;
}

QProfile QProfile::conjugate() const {
    QProfile p = *this;
    for (Complex& a : p.cos_coeffs) a = std::conj(a);
    for (Complex& b : p.sin_coeffs) b = std::conj(b);
    return p;
}

TrigPerturbation::TrigPerturbation(int d, int N, std::vector<Mode> modes, bool symmetrize)
    : d_(d), N_(N) {
    if (d < 1 || d > kMaxD) throw ValidationError("perturbation: d out of range");
    if (N < 0 || N > kMaxOrder) throw ValidationError("perturbation: N out of range");
    std::map<ModeKey, QProfile> table;
    for (Mode& m : modes) {
        if ((int)m.n.size() != d) throw ValidationError("perturbation: mode n has wrong length");
        if (sup_norm(m.n, m.l) > N)
            throw ValidationError("perturbation: mode order |(n,l)| exceeds N");
        // normalize profile list lengths to (Mq+1, Mq)
        size_t Mq = std::max(m.profile.cos_coeffs.empty() ? 0 : m.profile.cos_coeffs.size() - 1,
                             m.profile.sin_coeffs.size());
        if ((int)Mq > kMaxOrder)
            throw ValidationError("perturbation: q-profile order too large");
        m.profile.cos_coeffs.resize(Mq + 1, 0.0);
        m.profile.sin_coeffs.resize(Mq, 0.0);
        ModeKey k = key_of(m);
        auto it = table.find(k);
        if (it == table.end()) {
            table[k] = m.profile;
        } else {
            // merge duplicate keys
            QProfile& p = it->second;
            size_t nc = std::max(p.cos_coeffs.size(), m.profile.cos_coeffs.size());
            size_t ns = std::max(p.sin_coeffs.size(), m.profile.sin_coeffs.size());
            p.cos_coeffs.resize(nc, 0.0);
            p.sin_coeffs.resize(ns, 0.0);
            for (size_t i = 0; i < m.profile.cos_coeffs.size(); ++i)
                p.cos_coeffs[i] += m.profile.cos_coeffs[i];
            for (size_t i = 0; i < m.profile.sin_coeffs.size(); ++i)
                p.sin_coeffs[i] += m.profile.sin_coeffs[i];
        }
    }
    // reality: pair each key with its conjugate
    const double tol = 1e-12;
    std::map<ModeKey, QProfile> canon;
    for (auto& [k, p] : table) {
        if (is_zero(k)) {
            double imag = 0.0;
            for (const Complex& a : p.cos_coeffs) imag += std::abs(a.imag());
            for (const Complex& b : p.sin_coeffs) imag += std::abs(b.imag());
            if (imag > tol * std::max(1.0, p.coeff_norm())) {
                if (!symmetrize) throw ValidationError("perturbation: (0,0) profile not real");
                for (Complex& a : p.cos_coeffs) a = Complex(a.real(), 0.0);
                for (Complex& b : p.sin_coeffs) b = Complex(b.real(), 0.0);
            }
            canon[k] = p;
            continue;
        }
        if (!is_positive(k)) continue;  // handled via its conjugate
        ModeKey kc = conj_key(k);
        auto itc = table.find(kc);
        if (itc == table.end()) {
            if (!symmetrize)
                throw ValidationError("perturbation: missing conjugate mode (reality)");
            canon[k] = p;
            continue;
        }
        QProfile pc = itc->second.conjugate();
        size_t nc = std::max(p.cos_coeffs.size(), pc.cos_coeffs.size());
        size_t ns = std::max(p.sin_coeffs.size(), pc.sin_coeffs.size());
        p.cos_coeffs.resize(nc, 0.0);
        p.sin_coeffs.resize(ns, 0.0);
        pc.cos_coeffs.resize(nc, 0.0);
        pc.sin_coeffs.resize(ns, 0.0);
        double mismatch = 0.0;
        for (size_t i = 0; i < nc; ++i) mismatch += std::abs(p.cos_coeffs[i] - pc.cos_coeffs[i]);
        for (size_t i = 0; i < ns; ++i) mismatch += std::abs(p.sin_coeffs[i] - pc.sin_coeffs[i]);
        if (mismatch > tol * std::max(1.0, p.coeff_norm())) {
            if (!symmetrize)
                throw ValidationError("perturbation: conjugate modes violate reality");
            for (size_t i = 0; i < nc; ++i)
                p.cos_coeffs[i] = 0.5 * (p.cos_coeffs[i] + pc.cos_coeffs[i]);
            for (size_t i = 0; i < ns; ++i)
                p.sin_coeffs[i] = 0.5 * (p.sin_coeffs[i] + pc.sin_coeffs[i]);
        }
        canon[k] = p;
    }
    // stray negative keys without a positive partner (symmetrize only)
    for (auto& [k, p] : table) {
        if (is_zero(k) || is_positive(k)) continue;
        ModeKey kc = conj_key(k);
        if (table.find(kc) == table.end()) {
            if (!symmetrize)
                throw ValidationError("perturbation: missing conjugate mode (reality)");
            canon[kc] = p.conjugate();
        }
    }
    modes_.clear();
    for (auto& [k, p] : canon) {
        Mode m;
        m.n = k.n;
        m.l = k.l;
        m.profile = p;
        max_profile_order_ = std::max(max_profile_order_, p.order());
        modes_.push_back(std::move(m));
    }
}

namespace {
struct PhaseTable {
    // powers[j][N + k] = exp(i k phi_j), k = -N..N; powers_t likewise for t.
    Complex powers[kMaxD + 1][2 * kMaxOrder + 1];
    int N;
    void build(const double* phi, int d, double t, int N_) {
        N = N_;
        for (int j = 0; j <= d; ++j) {
            double ang = (j < d) ? phi[j] : t;
            Complex e1(std::cos(ang), std::sin(ang));
            powers[j][N] = 1.0;
            for (int k = 1; k <= N; ++k) {
                powers[j][N + k] = powers[j][N + k - 1] * e1;
                powers[j][N - k] = std::conj(powers[j][N + k]);
            }
        }
    }
    Complex phase(const std::vector<int>& n, int l, int d) const {
        Complex z = powers[0][N + n[0]];
        for (int j = 1; j < d; ++j) z *= powers[j][N + n[j]];
        z *= powers[d][N + l];
        return z;
    }
};
}  // namespace

double TrigPerturbation::eval(const double* phi, double q, double t) const {
    PhaseTable pt;
    pt.build(phi, d_, t, N_);
    double s = 0.0;
    for (const Mode& m : modes_) {
        Complex val = m.profile.eval(q);
        if (is_zero(key_of(m))) {
            s += val.real();
        } else {
            s += 2.0 * (val * pt.phase(m.n, m.l, d_)).real();
        }
    }
    return s;
}

void TrigPerturbation::grad(const double* phi, double q, double t, double* dphi,
                            double& dq, double& dt) const {
    PhaseTable pt;
    pt.build(phi, d_, t, N_);
    for (int j = 0; j < d_; ++j) dphi[j] = 0.0;
    dq = 0.0;
    dt = 0.0;
    for (const Mode& m : modes_) {
        Complex val = m.profile.eval(q);
        Complex der = m.profile.deriv(q);
        if (is_zero(key_of(m))) {
            dq += der.real();
        } else {
            Complex ph = pt.phase(m.n, m.l, d_);
            Complex vph = val * ph;
            // d/dphi_j 2 Re(v e^{i theta}) = -2 n_j Im(v e^{i theta})
            double im = vph.imag();
            for (int j = 0; j < d_; ++j) dphi[j] += -2.0 * m.n[j] * im;
            dt += -2.0 * m.l * im;
            dq += 2.0 * (der * ph).real();
        }
    }
}

void TrigPerturbation::hess(const double* phi, double q, double t, double* dpp,
                            double* dpq, double& dqq) const {
    PhaseTable pt;
    pt.build(phi, d_, t, N_);
    for (int j = 0; j < d_ * d_; ++j) dpp[j] = 0.0;
    for (int j = 0; j < d_; ++j) dpq[j] = 0.0;
    dqq = 0.0;
    for (const Mode& m : modes_) {
        Complex val = m.profile.eval(q);
        Complex der = m.profile.deriv(q);
        Complex der2 = m.profile.deriv2(q);
        if (is_zero(key_of(m))) {
            dqq += der2.real();
        } else {
            Complex ph = pt.phase(m.n, m.l, d_);
            double re_v = (val * ph).real();
            double im_d = (der * ph).imag();
            for (int j = 0; j < d_; ++j) {
                for (int k = 0; k < d_; ++k)
                    dpp[j * d_ + k] += -2.0 * m.n[j] * m.n[k] * re_v;
                dpq[j] += -2.0 * m.n[j] * im_d;
            }
            dqq += 2.0 * (der2 * ph).real();
        }
    }
}

std::map<ModeKey, Complex> TrigPerturbation::fourier_at_zero() const {
    std::map<ModeKey, Complex> out;
    for (const Mode& m : modes_) {
        ModeKey k = key_of(m);
        Complex v = m.profile.value_at_zero();
        out[k] = v;
        if (!is_zero(k)) out[conj_key(k)] = std::conj(v);
    }
    return out;
}

bool TrigPerturbation::vanishes_on_tori() const {
    for (const Mode& m : modes_) {
        if (std::abs(m.profile.value_at_zero()) > 1e-14 * std::max(1.0, m.profile.coeff_norm()))
            return false;
        if (std::abs(m.profile.deriv_at_zero()) > 1e-14 * std::max(1.0, m.profile.coeff_norm()))
            return false;
    }
    return true;
}

double TrigPerturbation::max_frequency(const Vec& omega) const {
    double mx = 0.0;
    for (const Mode& m : modes_) {
        double nu = m.l;
        for (int j = 0; j < d_; ++j) nu += m.n[j] * omega[j];
        mx = std::max(mx, std::abs(nu));
    }
    return mx;
}

std::vector<Mode> TrigPerturbation::all_modes() const {
    std::vector<Mode> out;
    for (const Mode& m : modes_) {
        out.push_back(m);
        if (!is_zero(key_of(m))) {
            Mode c;
            c.n = m.n;
            for (int& x : c.n) x = -x;
            c.l = -m.l;
            c.profile = m.profile.conjugate();
            out.push_back(std::move(c));
        }
    }
    return out;
}

double TrigPerturbation::coeff_norm() const {
    double s = 0.0;
    for (const Mode& m : modes_) {
        double f = is_zero(key_of(m)) ? 1.0 : 2.0;
        s += f * m.profile.coeff_norm();
    }
    return s;
}

double TrigPerturbation::lipschitz_bound() const {
    double s = 0.0;
    for (const Mode& m : modes_) {
        double f = is_zero(key_of(m)) ? 1.0 : 2.0;
        s += f * m.profile.lipschitz_bound();
    }
    return s;
}

TrigPerturbation TrigPerturbation::combined(const TrigPerturbation& other,
                                            double scale) const {
    if (other.d_ != d_) throw ValidationError("combined: dimension mismatch");
    std::vector<Mode> ms = all_modes();
    for (Mode m : other.all_modes()) {
        for (Complex& a : m.profile.cos_coeffs) a *= scale;
        for (Complex& b : m.profile.sin_coeffs) b *= scale;
        ms.push_back(std::move(m));
    }
    return TrigPerturbation(d_, std::max(N_, other.N_), std::move(ms));
}

std::string TrigPerturbation::to_json() const {
    nlohmann::json j;
    j["d"] = d_;
    j["N"] = N_;
    nlohmann::json ml = nlohmann::json::array();
    for (const Mode& m : all_modes()) {
        nlohmann::json jm;
        jm["n"] = m.n;
        jm["l"] = m.l;
        nlohmann::json cl = nlohmann::json::array();
        for (const Complex& a : m.profile.cos_coeffs) cl.push_back({a.real(), a.imag()});
        nlohmann::json sl = nlohmann::json::array();
        for (const Complex& b : m.profile.sin_coeffs) sl.push_back({b.real(), b.imag()});
        jm["cos"] = cl;
        jm["sin"] = sl;
        ml.push_back(jm);
    }
    j["modes"] = ml;
    return j.dump(2);
}

TrigPerturbation TrigPerturbation::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    int d = j.at("d").get<int>();
    int N = j.at("N").get<int>();
    bool symmetrize = j.value("symmetrize", false);
    std::vector<Mode> modes;
    for (const auto& jm : j.at("modes")) {
        Mode m;
        m.n = jm.at("n").get<std::vector<int>>();
        m.l = jm.at("l").get<int>();
        for (const auto& p : jm.at("cos"))
            m.profile.cos_coeffs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        for (const auto& p : jm.at("sin"))
            m.profile.sin_coeffs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        modes.push_back(std::move(m));
    }
    return TrigPerturbation(d, N, std::move(modes), symmetrize);
}

TrigPerturbation TrigPerturbation::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open perturbation file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void TrigPerturbation::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write perturbation file: " + path);
    out << to_json() << "\n";
}

TrigPerturbation TrigPerturbation::arnold_example(int d) {
    // (cos q - 1)(sin phi_1 + cos t)
    std::vector<Mode> ms;
    QProfile base;  // cos q - 1
    base.cos_coeffs = {Complex(-1.0, 0.0), Complex(1.0, 0.0)};
    base.sin_coeffs = {Complex(0.0, 0.0)};
    {
        Mode m;  // sin phi_1: coefficient -i/2 on e^{i phi_1}
        m.n.assign(d, 0);
        m.n[0] = 1;
        m.l = 0;
        m.profile = base;
        for (Complex& a : m.profile.cos_coeffs) a *= Complex(0.0, -0.5);
        for (Complex& b : m.profile.sin_coeffs) b *= Complex(0.0, -0.5);
        ms.push_back(m);
    }
    {
        Mode m;  // cos t: coefficient 1/2 on e^{i t}
        m.n.assign(d, 0);
        m.l = 1;
        m.profile = base;
        for (Complex& a : m.profile.cos_coeffs) a *= 0.5;
        for (Complex& b : m.profile.sin_coeffs) b *= 0.5;
        ms.push_back(m);
    }
    return TrigPerturbation(d, 1, std::move(ms), /*symmetrize=*/true);
}

}  // namespace arnold
