#include "toplora/analysis.hpp"

#include <cmath>

namespace toplora {

ProjectionAnalysis decompose(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.cols()) {
        throw ShapeError("decompose: A rows " + std::to_string(A.rows()) +
                         " must equal B cols " + std::to_string(B.cols()));
    }
    LqResult lq = lq_decompose(A);
    QrResult qr = qr_decompose(B);
    ProjectionAnalysis out;
    out.l_a = std::move(lq.l);
    out.q_a = std::move(lq.q);
    out.q_b = std::move(qr.q);
    out.r_b = std::move(qr.r);
    out.p = matmul(out.r_b, out.l_a);
    return out;
}

Vector input_coefficients(const ProjectionAnalysis& analysis, const Vector& x) {
    return matvec(analysis.q_a, x);
}

Vector output_via_projection(const ProjectionAnalysis& analysis, const Vector& x) {
    return matvec(analysis.q_b, matvec(analysis.p, matvec(analysis.q_a, x)));
}

SigmaDispersion sigma_dispersion(const TopLoRAAdapter& adapter, const Matrix& tokens) {
    const std::size_t T = tokens.cols();
    if (T < 2) {
        throw ConfigError("sigma_dispersion needs at least 2 tokens, got " +
                          std::to_string(T));
    }
    const std::size_t r = adapter.config.rank;

    SigmaDispersion out;
    out.per_token_sigma.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        out.per_token_sigma.push_back(sigma_of(adapter, column(tokens, t)));
    }

    out.mean_log_sigma = Vector(r);
    out.std_log_sigma = Vector(r);
    for (std::size_t i = 0; i < r; ++i) {
        double mean = 0.0;
        for (const Vector& sigma : out.per_token_sigma) mean += std::log(sigma[i]);
        mean /= static_cast<double>(T);
        double var = 0.0;
        for (const Vector& sigma : out.per_token_sigma) {
            const double d = std::log(sigma[i]) - mean;
            var += d * d;
        }
        var /= static_cast<double>(T);
        out.mean_log_sigma[i] = mean;
        out.std_log_sigma[i] = std::sqrt(var);
    }

    for (const Vector& sigma : out.per_token_sigma) {
        for (std::size_t i = 0; i < r; ++i) {
            out.max_abs_dev_from_one =
                std::max(out.max_abs_dev_from_one, std::abs(sigma[i] - 1.0));
        }
    }
    return out;
}

}  // namespace toplora
