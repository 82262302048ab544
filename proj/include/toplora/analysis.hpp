#pragma once

#include "toplora/adapter.hpp"
#include "toplora/linalg.hpp"
#include "toplora/matrix.hpp"

namespace toplora {

// Factors of BA = Q_B (R_B L_A) Q_A: input space, output space, and the
// r x r input-output projection coupling them.
struct ProjectionAnalysis {
    Matrix q_a;  // r x n, orthonormal rows
    Matrix l_a;  // r x r, lower triangular
    Matrix q_b;  // m x r, orthonormal columns
    Matrix r_b;  // r x r, upper triangular
    Matrix p;    // r x r, R_B * L_A
};

// A = L_A Q_A (thin LQ), B = Q_B R_B (thin QR), P = R_B L_A.
ProjectionAnalysis decompose(const Matrix& A, const Matrix& B);

// Coefficients of x along the rows of Q_A: alpha = Q_A * x.
Vector input_coefficients(const ProjectionAnalysis& analysis, const Vector& x);

// Q_B * (P * (Q_A * x)); equals B*A*x up to roundoff.
Vector output_via_projection(const ProjectionAnalysis& analysis, const Vector& x);

struct SigmaDispersion {
    std::vector<Vector> per_token_sigma;
    Vector mean_log_sigma;  // element-wise over tokens
    Vector std_log_sigma;   // population std, element-wise over tokens
    double max_abs_dev_from_one = 0.0;
};

// Gate statistics across the token columns of `tokens` (requires >= 2).
SigmaDispersion sigma_dispersion(const TopLoRAAdapter& adapter, const Matrix& tokens);

}  // namespace toplora
