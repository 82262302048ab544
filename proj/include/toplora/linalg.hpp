#pragma once

#include "toplora/matrix.hpp"

namespace toplora {

struct QrResult {
    Matrix q;  // rows x cols, orthonormal columns
    Matrix r;  // cols x cols, upper triangular, non-negative diagonal
};

struct LqResult {
    Matrix l;  // rows x rows, lower triangular, non-negative diagonal
    Matrix q;  // rows x cols, orthonormal rows
};

// Thin QR via Householder reflections; requires rows >= cols and full
// column rank within tolerance. The sign convention forces diag(R) >= 0
// so the factorization is unique and reproducible.
QrResult qr_decompose(const Matrix& m);

// Thin LQ, realized as QR of the transpose: M^T = Q'R' => L = R'^T, Q = Q'^T.
LqResult lq_decompose(const Matrix& m);

// Non-increasing singular values, one-sided Jacobi.
Vector singular_values(const Matrix& m);

// Count of singular values above sigma_max * max(rows, cols) * 2^-52.
std::size_t numerical_rank(const Matrix& m);

}  // namespace toplora
