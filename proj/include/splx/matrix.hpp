#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace splx {

/// Row-major dense matrix of doubles. Always at least 1x1; entries finite
/// when constructed from external data.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols) {
        check_dims(rows, cols);
        data_.assign(rows * cols, fill);
    }

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        check_dims(rows, cols);
        if (data_.size() != rows * cols) {
            throw ShapeError("entry count " + std::to_string(data_.size()) + " != " + std::to_string(rows) + "x" +
                             std::to_string(cols));
        }
        for (double v : data_) {
            if (!std::isfinite(v)) { throw DomainError("matrix entries must be finite"); }
        }
    }

    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        check_dims(rows_, cols_);
        data_.reserve(rows_ * cols_);
        for (const auto &r : rows) {
            if (r.size() != cols_) { throw ShapeError("ragged initializer rows"); }
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) { m(i, i) = 1.0; }
        return m;
    }

    static DenseMatrix diagonal(std::span<const double> diag) {
        DenseMatrix m(diag.size(), diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i) { m(i, i) = diag[i]; }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double &operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> col(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) { out[i] = (*this)(i, j); }
        return out;
    }

    std::span<const double> entries() const noexcept { return data_; }
    std::span<double> entries() noexcept { return data_; }

    DenseMatrix transpose() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) { t(j, i) = (*this)(i, j); }
        }
        return t;
    }

    double frobenius_norm() const noexcept {
        double s = 0.0;
        for (double v : data_) { s += v * v; }
        return std::sqrt(s);
    }

    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : data_) { m = std::max(m, std::abs(v)); }
        return m;
    }

    DenseMatrix &operator+=(const DenseMatrix &o) {
        require_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) { data_[k] += o.data_[k]; }
        return *this;
    }

    DenseMatrix &operator-=(const DenseMatrix &o) {
        require_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) { data_[k] -= o.data_[k]; }
        return *this;
    }

    DenseMatrix &operator*=(double c) noexcept {
        for (double &v : data_) { v *= c; }
        return *this;
    }

    friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix &b) { return a += b; }
    friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix &b) { return a -= b; }
    friend DenseMatrix operator*(DenseMatrix a, double c) { return a *= c; }
    friend DenseMatrix operator*(double c, DenseMatrix a) { return a *= c; }

    friend DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b) {
        if (a.cols_ != b.rows_) {
            throw ShapeError("cannot multiply " + a.shape_string() + " by " + b.shape_string());
        }
        DenseMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) { continue; }
                const double *brow = b.data_.data() + k * b.cols_;
                double *crow = c.data_.data() + i * c.cols_;
                for (std::size_t j = 0; j < b.cols_; ++j) { crow[j] += aik * brow[j]; }
            }
        }
        return c;
    }

    friend bool operator==(const DenseMatrix &, const DenseMatrix &) = default;

    std::string shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
    static void check_dims(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0) { throw ShapeError("matrix dimensions must be >= 1"); }
    }

    void require_same_shape(const DenseMatrix &o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw ShapeError("shape mismatch " + shape_string() + " vs " + o.shape_string());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Frobenius inner product <A, B> = tr(A^T B).
inline double inner(const DenseMatrix &a, const DenseMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("inner product shape mismatch " + a.shape_string() + " vs " + b.shape_string());
    }
    double s = 0.0;
    auto ea = a.entries();
    auto eb = b.entries();
    for (std::size_t k = 0; k < ea.size(); ++k) { s += ea[k] * eb[k]; }
    return s;
}

inline std::vector<double> matvec(const DenseMatrix &a, std::span<const double> x) {
    if (x.size() != a.cols()) { throw ShapeError("matvec: vector length does not match columns"); }
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        auto r = a.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) { s += r[j] * x[j]; }
        y[i] = s;
    }
    return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) { throw ShapeError("dot: length mismatch"); }
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) { s += a[k] * b[k]; }
    return s;
}

}  // namespace splx
