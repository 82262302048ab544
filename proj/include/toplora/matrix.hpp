#pragma once

#include <cstddef>
#include <vector>

#include "toplora/errors.hpp"

namespace toplora {

// Dense row-major matrix of doubles. Entries are checked finite on
// construction from data; in-place writes through operator() are the
// caller's responsibility.
class Matrix {
public:
    Matrix() = default;

    // Zero-initialized rows x cols.
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    // Throws ValidationError if any entry is NaN or infinite.
    void check_finite(const char* context) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Dense vector of doubles; finite-checked on construction from data.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t len) : data_(len, 0.0) {}
    explicit Vector(std::vector<double> data);

    std::size_t size() const { return data_.size(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::vector<double> data_;
};

std::string shape_str(const Matrix& m);

Matrix matmul(const Matrix& lhs, const Matrix& rhs);
Vector matvec(const Matrix& m, const Vector& x);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);
Matrix outer(const Vector& a, const Vector& b);
Matrix diag(const Vector& d);

double frobenius_norm(const Matrix& m);
double norm(const Vector& v);
double dot(const Vector& a, const Vector& b);

// Column t of m as a Vector.
Vector column(const Matrix& m, std::size_t t);
void set_column(Matrix& m, std::size_t t, const Vector& v);

bool bit_equal(const Matrix& a, const Matrix& b);

}  // namespace toplora
