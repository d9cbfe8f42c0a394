#include "resave/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "resave/error.hpp"

namespace resave {

Matrix Matrix::identity(std::size_t d) {
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
}

Vector Matrix::column(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), ErrorCode::invalid_argument, "matrix product shape mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

SymMatrix SymMatrix::identity(std::size_t d) {
    SymMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
}

SymMatrix SymMatrix::from_upper(const Matrix& m) {
    require(m.rows() == m.cols(), ErrorCode::invalid_argument, "from_upper needs a square matrix");
    SymMatrix s(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j) s(i, j) = m(i, j);
    return s;
}

Matrix SymMatrix::to_dense() const {
    Matrix m(d_, d_);
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t j = 0; j < d_; ++j) m(i, j) = (*this)(i, j);
    return m;
}

double SymMatrix::frobenius_norm() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < d_; ++i)
        for (std::size_t j = i; j < d_; ++j) {
            const double v = (*this)(i, j);
            sum += (i == j ? 1.0 : 2.0) * v * v;
        }
    return std::sqrt(sum);
}

Vector operator*(const SymMatrix& m, std::span<const double> v) {
    require(m.dim() == v.size(), ErrorCode::invalid_argument, "matrix-vector shape mismatch");
    Vector out(v.size(), 0.0);
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) out[i] += m(i, j) * v[j];
    return out;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    for (std::size_t p = 0; p < a.rows(); ++p)
        for (std::size_t q = p + 1; q < a.cols(); ++q) sum += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(sum);
}

// Applies the rotation that zeroes a(p, q) to A (both sides) and to V (right).
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
    const double apq = a(p, q);
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const std::size_t d = a.rows();

    for (std::size_t k = 0; k < d; ++k) {
        const double akp = a(k, p);
        const double akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
    }
    for (std::size_t k = 0; k < d; ++k) {
        const double apk = a(p, k);
        const double aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double vkp = v(k, p);
        const double vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
    }
}

}  // namespace

SymEigen sym_eigen(const SymMatrix& m, int max_sweeps) {
    const std::size_t d = m.dim();
    require(d >= 1, ErrorCode::invalid_argument, "sym_eigen needs d >= 1");
    for (double x : m.packed())
        require(std::isfinite(x), ErrorCode::invalid_argument, "sym_eigen input has non-finite entries");

    Matrix a = m.to_dense();
    Matrix v = Matrix::identity(d);
    const double tol = 1e-12 * m.frobenius_norm();

    int sweep = 0;
    while (off_diagonal_norm(a) > tol) {
        if (sweep == max_sweeps)
            fail(ErrorCode::numerical_failure,
                 "Jacobi did not converge after " + std::to_string(max_sweeps) + " sweeps");
        for (std::size_t p = 0; p + 1 < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q)
                if (a(p, q) != 0.0) rotate(a, v, p, q);
        ++sweep;
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&a](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymEigen out{Vector(d), Matrix(d, d), sweep};
    for (std::size_t c = 0; c < d; ++c) {
        out.values[c] = a(order[c], order[c]);
        for (std::size_t r = 0; r < d; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

SymMatrix inv_sqrt(const SymMatrix& m, double floor_ratio) {
    const SymEigen eig = sym_eigen(m);
    const std::size_t d = m.dim();
    const double largest = eig.values.front();
    require(largest > 0.0, ErrorCode::singular_covariance, "matrix has no positive eigenvalue");

    Vector scale(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (!(eig.values[i] > floor_ratio * largest))
            fail(ErrorCode::singular_covariance,
                 "eigenvalue " + std::to_string(i) + " (" + std::to_string(eig.values[i]) +
                     ") is below the floor relative to the largest");
        scale[i] = 1.0 / std::sqrt(eig.values[i]);
    }

    SymMatrix out(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < d; ++k) sum += eig.vectors(i, k) * scale[k] * eig.vectors(j, k);
            out(i, j) = sum;
        }
    return out;
}

CovarianceEstimate sample_covariance(std::span<const Vector> rows) {
    require(!rows.empty(), ErrorCode::insufficient_data, "no rows");
    const std::size_t d = rows.front().size();
    require(d >= 1, ErrorCode::invalid_argument, "rows must have at least one column");
    require(rows.size() >= d + 1, ErrorCode::insufficient_data,
            "covariance needs at least d + 1 = " + std::to_string(d + 1) + " rows, got " +
                std::to_string(rows.size()));

    const double n = static_cast<double>(rows.size());
    Vector mean(d, 0.0);
    for (const Vector& row : rows) {
        require(row.size() == d, ErrorCode::invalid_argument, "ragged rows");
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= n;

    SymMatrix cov(d);
    Vector centered(d);
    for (const Vector& row : rows) {
        for (std::size_t j = 0; j < d; ++j) centered[j] = row[j] - mean[j];
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) cov(i, j) += centered[i] * centered[j];
    }
    for (double& c : cov.packed()) c /= (n - 1.0);
    return {std::move(mean), std::move(cov)};
}

void RunningCovariance::add(std::span<const double> row) {
    const std::size_t d = dim();
    require(row.size() == d, ErrorCode::invalid_argument, "row has wrong dimension");
    ++count_;
    const double n = static_cast<double>(count_);
    delta_.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        delta_[j] = row[j] - mean_[j];
        mean_[j] += delta_[j] / n;
    }
    // m2 += delta_old * delta_new^T
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) m2_(i, j) += delta_[i] * (row[j] - mean_[j]);
}

CovarianceEstimate RunningCovariance::estimate() const {
    const std::size_t d = dim();
    if (d == 0 || count_ < d + 1)
        fail(ErrorCode::insufficient_data,
             "covariance needs at least d + 1 = " + std::to_string(d + 1) + " rows, got " + std::to_string(count_));
    SymMatrix cov = m2_;
    for (double& c : cov.packed()) c /= static_cast<double>(count_ - 1);
    return {mean_, std::move(cov)};
}

RunningCovariance RunningCovariance::from_parts(std::size_t count, Vector mean, SymMatrix scatter) {
    require(scatter.dim() == mean.size(), ErrorCode::invalid_argument, "running covariance parts disagree");
    RunningCovariance rc;
    rc.count_ = count;
    rc.mean_ = std::move(mean);
    rc.m2_ = std::move(scatter);
    return rc;
}

}  // namespace resave
