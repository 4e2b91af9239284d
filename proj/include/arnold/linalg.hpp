#pragma once
// Small dense/banded linear algebra used by the solvers: tridiagonal systems,
// block-tridiagonal LU for the collocation Jacobian, symmetric eigenvalues.

#include <vector>

#include "arnold/common.hpp"

namespace arnold {

/// Solve a tridiagonal system in place (Thomas). Diagonals a (sub), b (main),
/// c (super); rhs d. Returns the solution in d.
void solve_tridiagonal(Vec& a, Vec& b, Vec& c, Vec& d);

/// Block-tridiagonal solver, nb x nb blocks, m block rows. Blocks are stored
/// row-major; sub[0] and sup[m-1] are unused. Overwrites inputs.
/// rhs has m*nb entries; solution returned there.
void solve_block_tridiagonal(std::vector<Vec>& sub, std::vector<Vec>& diag,
                             std::vector<Vec>& sup, Vec& rhs, int nb);

/// Eigenvalues (ascending) and optional eigenvectors of a small symmetric
/// matrix (row-major n x n), by cyclic Jacobi. n <= 8 expected.
Vec symmetric_eigenvalues(Vec A, int n, std::vector<Vec>* vectors = nullptr);

/// Solve a small dense system A x = b (row-major n x n) by Gaussian
/// elimination with partial pivoting. Throws NumericalError if singular.
Vec solve_dense(Vec A, Vec b, int n);

/// Inverse of a small dense matrix (row-major).
Vec invert_dense(Vec A, int n);

}  // namespace arnold
