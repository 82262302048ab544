#include "toplora/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace toplora {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();  // 2^-52

}  // namespace

QrResult qr_decompose(const Matrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    if (rows < cols) {
        throw ShapeError("qr_decompose requires rows >= cols, got " + shape_str(m));
    }

    // Work matrix accumulates R in its upper triangle; reflectors are
    // stored and applied in reverse to an identity block to form thin Q.
    Matrix work = m;
    Matrix reflectors(cols, rows);
    std::vector<double> betas(cols, 0.0);

    const double norm_m = frobenius_norm(m);
    const double tol = norm_m * static_cast<double>(std::max(rows, cols)) * kEps;

    for (std::size_t k = 0; k < cols; ++k) {
        double sigma = 0.0;
        for (std::size_t i = k; i < rows; ++i) sigma += work(i, k) * work(i, k);
        sigma = std::sqrt(sigma);
        if (sigma <= tol) {
            throw FactorizationError("qr_decompose: rank-deficient input, pivot " +
                                     std::to_string(k) + " below tolerance");
        }
        // Reflector v = x + sign(x_k)*sigma*e_k maps column k to -sign*sigma*e_k.
        const double alpha = work(k, k) >= 0.0 ? sigma : -sigma;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < rows; ++i) {
            double vi = work(i, k);
            if (i == k) vi += alpha;
            reflectors(k, i) = vi;
            vnorm2 += vi * vi;
        }
        const double beta = vnorm2 > 0.0 ? 2.0 / vnorm2 : 0.0;
        betas[k] = beta;
        for (std::size_t j = k; j < cols; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < rows; ++i) s += reflectors(k, i) * work(i, j);
            s *= beta;
            for (std::size_t i = k; i < rows; ++i) work(i, j) -= s * reflectors(k, i);
        }
    }

    // Q = H_0 ... H_{cols-1} [I_cols; 0]: apply reflectors last-to-first.
    Matrix q(rows, cols);
    for (std::size_t j = 0; j < cols; ++j) q(j, j) = 1.0;
    for (std::size_t k = cols; k-- > 0;) {
        for (std::size_t j = 0; j < cols; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < rows; ++i) s += reflectors(k, i) * q(i, j);
            s *= betas[k];
            for (std::size_t i = k; i < rows; ++i) q(i, j) -= s * reflectors(k, i);
        }
    }

    Matrix r(cols, cols);
    for (std::size_t i = 0; i < cols; ++i)
        for (std::size_t j = i; j < cols; ++j) r(i, j) = work(i, j);

    // Force diag(R) >= 0 by flipping the matching column of Q.
    for (std::size_t k = 0; k < cols; ++k) {
        if (r(k, k) < 0.0) {
            for (std::size_t j = k; j < cols; ++j) r(k, j) = -r(k, j);
            for (std::size_t i = 0; i < rows; ++i) q(i, k) = -q(i, k);
        }
    }
    return {std::move(q), std::move(r)};
}

LqResult lq_decompose(const Matrix& m) {
    if (m.cols() < m.rows()) {
        throw ShapeError("lq_decompose requires cols >= rows, got " + shape_str(m));
    }
    QrResult qr = qr_decompose(transpose(m));
    return {transpose(qr.r), transpose(qr.q)};
}

Vector singular_values(const Matrix& m) {
    // One-sided Jacobi on the tall orientation.
    Matrix a = m.rows() >= m.cols() ? m : transpose(m);
    const std::size_t n = a.cols();
    const std::size_t rows = a.rows();

    const double tol = 1e-14;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double x = a(i, p), y = a(i, q);
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
                converged = false;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double x = a(i, p), y = a(i, q);
                    a(i, p) = c * x - s * y;
                    a(i, q) = s * x + c * y;
                }
            }
        }
        if (converged) break;
    }

    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += a(i, j) * a(i, j);
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return Vector(std::move(sv));
}

std::size_t numerical_rank(const Matrix& m) {
    Vector sv = singular_values(m);
    if (sv.size() == 0) return 0;
    const double thresh = sv[0] * static_cast<double>(std::max(m.rows(), m.cols())) * kEps;
    std::size_t rank = 0;
    for (std::size_t i = 0; i < sv.size(); ++i) {
        if (sv[i] > thresh) ++rank;
    }
    return rank;
}

}  // namespace toplora
