#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_util.hpp"
#include "toplora/linalg.hpp"

using namespace toplora;
using test::random_gaussian;
using test::rel_frob_err;

namespace {

// Oracle: eigenvalues of the symmetric matrix M^T M via classical
// two-sided Jacobi rotations; singular values are their square roots.
// Independent of the one-sided Jacobi used by the implementation.
std::vector<double> singular_values_via_gram(const Matrix& m) {
    Matrix s = matmul(transpose(m), m);
    const std::size_t n = s.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(s(p, q)) < 1e-300) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = c * t;
                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = std::sqrt(std::max(0.0, s(i, i)));
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

}  // namespace

TEST_CASE("matmul basics") {
    Matrix a(2, 2, {1, 2, 3, 4});
    CHECK(test::max_abs_diff(matmul(a, Matrix::identity(2)), a) == 0.0);

    Matrix zero(2, 2);
    Matrix b(2, 1, {5, 6});
    Matrix z = matmul(zero, b);
    CHECK(z(0, 0) == 0.0);
    CHECK(z(1, 0) == 0.0);

    Matrix c = matmul(a, b);
    CHECK(c(0, 0) == doctest::Approx(17).epsilon(1e-15));
    CHECK(c(1, 0) == doctest::Approx(39).epsilon(1e-15));

    CHECK_THROWS_AS(matmul(a, Matrix(3, 2)), ShapeError);
}

TEST_CASE("matmul error names both shapes") {
    try {
        matmul(Matrix(2, 3), Matrix(4, 2));
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
        CHECK(msg.find("4x2") != std::string::npos);
    }
}

TEST_CASE("qr of identity") {
    QrResult qr = qr_decompose(Matrix::identity(3));
    CHECK(test::max_abs_diff(qr.q, Matrix::identity(3)) <= 1e-15);
    CHECK(test::max_abs_diff(qr.r, Matrix::identity(3)) <= 1e-15);
}

TEST_CASE("qr of a single column") {
    QrResult qr = qr_decompose(Matrix(2, 1, {3, 4}));
    CHECK(qr.q(0, 0) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(qr.q(1, 0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(qr.r(0, 0) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("qr properties on random tall matrices") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix m = random_gaussian(6, 2, rng);
        QrResult qr = qr_decompose(m);
        CHECK(rel_frob_err(matmul(qr.q, qr.r), m) <= 1e-12);
        CHECK(frobenius_norm(sub(matmul(transpose(qr.q), qr.q), Matrix::identity(2))) <=
              1e-12);
        for (std::size_t k = 0; k < 2; ++k) CHECK(qr.r(k, k) >= 0.0);
        // strictly upper triangular
        CHECK(qr.r(1, 0) == 0.0);
    }
}

TEST_CASE("qr rejects rank-deficient input") {
    Matrix m(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        m(i, 0) = static_cast<double>(i + 1);
        m(i, 1) = 2.0 * static_cast<double>(i + 1);
    }
    CHECK_THROWS_AS(qr_decompose(m), FactorizationError);
    CHECK_THROWS_AS(qr_decompose(Matrix(3, 2)), FactorizationError);
    CHECK_THROWS_AS(qr_decompose(Matrix(2, 3)), ShapeError);
}

TEST_CASE("lq basics") {
    LqResult lq = lq_decompose(Matrix::identity(2));
    CHECK(test::max_abs_diff(lq.l, Matrix::identity(2)) <= 1e-15);
    CHECK(test::max_abs_diff(lq.q, Matrix::identity(2)) <= 1e-15);

    LqResult row = lq_decompose(Matrix(1, 2, {3, 4}));
    CHECK(row.l(0, 0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(row.q(0, 0) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(row.q(0, 1) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("lq properties on random wide matrices") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix m = random_gaussian(2, 7, rng);
        LqResult lq = lq_decompose(m);
        CHECK(rel_frob_err(matmul(lq.l, lq.q), m) <= 1e-12);
        CHECK(frobenius_norm(sub(matmul(lq.q, transpose(lq.q)), Matrix::identity(2))) <=
              1e-12);
        for (std::size_t k = 0; k < 2; ++k) CHECK(lq.l(k, k) >= 0.0);
        CHECK(lq.l(0, 1) == 0.0);
    }
}

TEST_CASE("singular values on known matrices") {
    Vector id = singular_values(Matrix::identity(3));
    for (std::size_t i = 0; i < 3; ++i) CHECK(id[i] == doctest::Approx(1.0).epsilon(1e-14));

    Vector d = singular_values(Matrix(2, 2, {3, 0, 0, 4}));
    CHECK(d[0] == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(d[1] == doctest::Approx(3.0).epsilon(1e-14));

    Vector ones = singular_values(Matrix(2, 2, {1, 1, 1, 1}));
    CHECK(ones[0] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(ones[1] == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("singular values match the Gram eigenvalue oracle") {
    Rng rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t rows = 1 + rng.index(8);
        const std::size_t cols = 1 + rng.index(8);
        Matrix m = random_gaussian(rows, cols, rng);
        Vector got = singular_values(m);
        std::vector<double> want = singular_values_via_gram(m);
        // Oracle eigensolve runs on the Gram of the wide orientation too;
        // compare the leading min(rows, cols) values.
        const std::size_t k = std::min(rows, cols);
        REQUIRE(got.size() == k);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(std::abs(got[i] - want[i]) <= 1e-10 * std::max(1.0, want[0]));
        }
        for (std::size_t i = 0; i + 1 < k; ++i) CHECK(got[i] >= got[i + 1]);
        for (std::size_t i = 0; i < k; ++i) CHECK(got[i] >= 0.0);
    }
}

TEST_CASE("numerical rank") {
    CHECK(numerical_rank(Matrix(4, 5)) == 0);
    CHECK(numerical_rank(Matrix::identity(3)) == 3);

    Rng rng(17);
    Matrix b = random_gaussian(4, 2, rng);
    Matrix a = random_gaussian(2, 5, rng);
    CHECK(numerical_rank(matmul(b, a)) == 2);
}

TEST_CASE("rank of factor products is bounded by factor ranks") {
    Rng rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t r = 1 + rng.index(3);
        const std::size_t m = r + 1 + rng.index(5);
        const std::size_t n = r + 1 + rng.index(5);
        Matrix b = random_gaussian(m, r, rng);
        Matrix a = random_gaussian(r, n, rng);
        const std::size_t prod_rank = numerical_rank(matmul(b, a));
        CHECK(prod_rank <= r);
        CHECK(prod_rank <= numerical_rank(b));
        CHECK(prod_rank <= numerical_rank(a));
    }
}

TEST_CASE("factorizations are deterministic") {
    Rng rng(23);
    Matrix m = random_gaussian(5, 3, rng);
    QrResult a = qr_decompose(m);
    QrResult b = qr_decompose(m);
    CHECK(bit_equal(a.q, b.q));
    CHECK(bit_equal(a.r, b.r));
}
