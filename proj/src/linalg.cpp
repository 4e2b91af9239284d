#include "arnold/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace arnold {

void solve_tridiagonal(Vec& a, Vec& b, Vec& c, Vec& d) {
    const int n = (int)b.size();
    for (int i = 1; i < n; ++i) {
        double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (int i = n - 2; i >= 0; --i) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

namespace {

// In-place LU with partial pivoting for an nb x nb block; returns pivots.
void lu_factor(double* A, int* piv, int nb) {
    for (int k = 0; k < nb; ++k) {
        int p = k;
        for (int i = k + 1; i < nb; ++i)
            if (std::abs(A[i * nb + k]) > std::abs(A[p * nb + k])) p = i;
        piv[k] = p;
        if (p != k)
            for (int j = 0; j < nb; ++j) std::swap(A[k * nb + j], A[p * nb + j]);
        double akk = A[k * nb + k];
        if (akk == 0.0) throw NumericalError("block LU: singular pivot");
        for (int i = k + 1; i < nb; ++i) {
            double m = (A[i * nb + k] /= akk);
            for (int j = k + 1; j < nb; ++j) A[i * nb + j] -= m * A[k * nb + j];
        }
    }
}

void lu_solve(const double* A, const int* piv, int nb, double* x, int ncols) {
    for (int c = 0; c < ncols; ++c) {
        double* xc = x + c;
        for (int k = 0; k < nb; ++k) {
            if (piv[k] != k) std::swap(xc[k * ncols], xc[piv[k] * ncols]);
            for (int i = k + 1; i < nb; ++i) xc[i * ncols] -= A[i * nb + k] * xc[k * ncols];
        }
        for (int k = nb - 1; k >= 0; --k) {
            for (int j = k + 1; j < nb; ++j) xc[k * ncols] -= A[k * nb + j] * xc[j * ncols];
            xc[k * ncols] /= A[k * nb + k];
        }
    }
}

void mat_mul_sub(const double* A, const double* B, double* C, int nb) {
    // C -= A*B
    for (int i = 0; i < nb; ++i)
        for (int k = 0; k < nb; ++k) {
            double a = A[i * nb + k];
            for (int j = 0; j < nb; ++j) C[i * nb + j] -= a * B[k * nb + j];
        }
}

}  // namespace

void solve_block_tridiagonal(std::vector<Vec>& sub, std::vector<Vec>& diag,
                             std::vector<Vec>& sup, Vec& rhs, int nb) {
    const int m = (int)diag.size();
    std::vector<std::vector<int>> piv(m, std::vector<int>(nb));
    // forward elimination
    for (int i = 0; i < m; ++i) {
        if (i > 0) {
            // diag[i] -= sub[i] * inv(diag[i-1]) * sup[i-1]; fold into rhs too.
            // Compute X = inv(diag[i-1]) * sup[i-1] and y = inv(diag[i-1]) * rhs[i-1]
            Vec X = sup[i - 1];  // solve in place column-wise
            lu_solve(diag[i - 1].data(), piv[i - 1].data(), nb, X.data(), nb);
            mat_mul_sub(sub[i].data(), X.data(), diag[i].data(), nb);
            Vec y(rhs.begin() + (i - 1) * nb, rhs.begin() + i * nb);
            lu_solve(diag[i - 1].data(), piv[i - 1].data(), nb, y.data(), 1);
            for (int r = 0; r < nb; ++r) {
                double s = 0.0;
                for (int k = 0; k < nb; ++k) s += sub[i][r * nb + k] * y[k];
                rhs[i * nb + r] -= s;
            }
            sup[i - 1] = X;  // store transformed super-diagonal for back-subst
        }
        lu_factor(diag[i].data(), piv[i].data(), nb);
    }
    // back substitution
    {
        Vec y(rhs.begin() + (m - 1) * nb, rhs.begin() + m * nb);
        lu_solve(diag[m - 1].data(), piv[m - 1].data(), nb, y.data(), 1);
        std::copy(y.begin(), y.end(), rhs.begin() + (m - 1) * nb);
    }
    for (int i = m - 2; i >= 0; --i) {
        Vec y(rhs.begin() + i * nb, rhs.begin() + (i + 1) * nb);
        lu_solve(diag[i].data(), piv[i].data(), nb, y.data(), 1);
        for (int r = 0; r < nb; ++r) {
            double s = 0.0;
            for (int k = 0; k < nb; ++k) s += sup[i][r * nb + k] * rhs[(i + 1) * nb + k];
            y[r] -= s;
        }
        std::copy(y.begin(), y.end(), rhs.begin() + i * nb);
    }
}

Vec symmetric_eigenvalues(Vec A, int n, std::vector<Vec>* vectors) {
    std::vector<Vec> V;
    if (vectors) {
        V.assign(n, Vec(n, 0.0));
        for (int i = 0; i < n; ++i) V[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A[p * n + q] * A[p * n + q];
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = A[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                double theta = 0.5 * (A[q * n + q] - A[p * n + p]) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = A[k * n + p], akq = A[k * n + q];
                    A[k * n + p] = c * akp - s * akq;
                    A[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = A[p * n + k], aqk = A[q * n + k];
                    A[p * n + k] = c * apk - s * aqk;
                    A[q * n + k] = s * apk + c * aqk;
                }
                if (vectors) {
                    for (int k = 0; k < n; ++k) {
                        double vkp = V[k][p], vkq = V[k][q];
                        V[k][p] = c * vkp - s * vkq;
                        V[k][q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    Vec ev(n);
    for (int i = 0; i < n; ++i) ev[i] = A[i * n + i];
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return ev[a] < ev[b]; });
    Vec out(n);
    for (int i = 0; i < n; ++i) out[i] = ev[idx[i]];
    if (vectors) {
        vectors->assign(n, Vec(n));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) (*vectors)[i][k] = V[k][idx[i]];
    }
    return out;
}

Vec solve_dense(Vec A, Vec b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (std::abs(A[piv * n + col]) < 1e-300)
            throw NumericalError("solve_dense: singular matrix");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < n; ++r) {
            double m = A[r * n + col] / A[col * n + col];
            for (int c = col; c < n; ++c) A[r * n + c] -= m * A[col * n + c];
            b[r] -= m * b[col];
        }
    }
    Vec x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return x;
}

Vec invert_dense(Vec A, int n) {
    Vec inv(n * n, 0.0);
    for (int j = 0; j < n; ++j) {
        Vec e(n, 0.0);
        e[j] = 1.0;
        Vec col = solve_dense(A, e, n);
        for (int i = 0; i < n; ++i) inv[i * n + j] = col[i];
    }
    return inv;
}

}  // namespace arnold
