#pragma once

// Small dense linear algebra for the d x d matrices that appear in SAVE:
// symmetric eigendecomposition (cyclic Jacobi), inverse square roots and
// sample covariances. d is 5 or 6 in practice, so nothing here is blocked
// or vectorized.

#include <cstddef>
#include <span>
#include <vector>

namespace resave {

using Vector = std::vector<double>;

/// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    Vector column(std::size_t c) const;
    Matrix transposed() const;
    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

/// Symmetric matrix in packed upper-triangle storage. Symmetry is exact by
/// construction: (i, j) and (j, i) address the same slot.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(std::size_t d, double fill = 0.0) : d_(d), data_(packed_size(d), fill) {}

    static SymMatrix identity(std::size_t d);
    /// Reads the upper triangle of a square matrix.
    static SymMatrix from_upper(const Matrix& m);

    static constexpr std::size_t packed_size(std::size_t d) noexcept { return d * (d + 1) / 2; }

    /// Position of (i, j), i <= j, in row-major upper-triangle order.
    static constexpr std::size_t packed_index(std::size_t d, std::size_t i, std::size_t j) noexcept {
        if (i > j) {
            const std::size_t t = i;
            i = j;
            j = t;
        }
        return i * d - i * (i + 1) / 2 + j;
    }

    std::size_t dim() const noexcept { return d_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[packed_index(d_, i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[packed_index(d_, i, j)]; }

    std::span<const double> packed() const noexcept { return data_; }
    std::span<double> packed() noexcept { return data_; }

    Matrix to_dense() const;
    double frobenius_norm() const;

private:
    std::size_t d_ = 0;
    std::vector<double> data_;
};

Vector operator*(const SymMatrix& m, std::span<const double> v);

/// Eigenpairs with values in descending order; vectors are the columns.
struct SymEigen {
    Vector values;
    Matrix vectors;
    int sweeps = 0;
};

/// Cyclic Jacobi. Stops when the off-diagonal Frobenius norm falls below
/// 1e-12 * ||m||_F; throws numerical-failure after max_sweeps.
SymEigen sym_eigen(const SymMatrix& m, int max_sweeps = 100);

/// V diag(lambda^{-1/2}) V^T. Throws singular-covariance when an eigenvalue
/// is at or below floor_ratio times the largest one.
SymMatrix inv_sqrt(const SymMatrix& m, double floor_ratio = 1e-10);

struct CovarianceEstimate {
    Vector mean;
    SymMatrix cov;
};

/// Unbiased (1/(n-1)) two-pass covariance. Needs at least d + 1 rows.
CovarianceEstimate sample_covariance(std::span<const Vector> rows);

/// Welford accumulator for the same estimate, one row at a time.
class RunningCovariance {
public:
    RunningCovariance() = default;
    explicit RunningCovariance(std::size_t d) : mean_(d, 0.0), m2_(d) {}

    void add(std::span<const double> row);

    std::size_t dim() const noexcept { return mean_.size(); }
    std::size_t count() const noexcept { return count_; }
    const Vector& mean() const noexcept { return mean_; }
    /// Sum of centered outer products.
    const SymMatrix& scatter() const noexcept { return m2_; }
    /// Throws insufficient-data below d + 1 rows.
    CovarianceEstimate estimate() const;

    static RunningCovariance from_parts(std::size_t count, Vector mean, SymMatrix scatter);

private:
    std::size_t count_ = 0;
    Vector mean_;
    SymMatrix m2_;
    Vector delta_;
};

}  // namespace resave
