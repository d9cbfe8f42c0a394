#pragma once

// Truncated kernel SAVE matrix
//
//   Lambda_hat = (1/n) sum_i (I - C_hat(Y_i))^2,
//   C_hat(y)   = R_hat(y) - r_hat(y) r_hat(y)^T,
//   r_hat = g_hat / max(f_hat, b_n),  R_hat = G_hat / max(f_hat, b_n),
//
// built either from the recursive estimates (Save-R) or from one-bandwidth
// batch kernel sums (Save-NR), plus extraction of the leading eigenvectors.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "resave/kernels.hpp"
#include "resave/linalg.hpp"
#include "resave/recursive_estimators.hpp"
#include "resave/sequences.hpp"

namespace resave {

struct SaveMatrix {
    std::size_t d = 0;
    std::size_t n = 0;
    double b_n = 0.0;
    SymMatrix lambda;
};

/// Per-point ratio rows [f_trunc, r_1..r_d, R packed], same layout as the
/// moment rows they are derived from.
class RatioEstimates {
public:
    RatioEstimates(std::size_t d, double b_n, std::vector<double> rows);

    std::size_t dim() const noexcept { return d_; }
    std::size_t size() const noexcept { return rows_.size() / moment_width(d_); }
    double truncation() const noexcept { return b_n_; }

    double f_trunc(std::size_t i) const { return row(i)[0]; }
    std::span<const double> r_hat(std::size_t i) const { return row(i).subspan(1, d_); }
    double R_hat(std::size_t i, std::size_t k, std::size_t l) const {
        return row(i)[1 + d_ + SymMatrix::packed_index(d_, k, l)];
    }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(rows_).subspan(i * moment_width(d_), moment_width(d_));
    }

private:
    std::size_t d_;
    double b_n_;
    std::vector<double> rows_;
};

inline double truncate_density(double f_hat, double b_n) { return f_hat > b_n ? f_hat : b_n; }

/// Divides g and G by max(f, b_n) for every moment row.
RatioEstimates compute_ratios(std::size_t d, std::span<const double> moment_rows, double b_n);
RatioEstimates compute_ratios(std::span<const EvalPoint> points, double b_n);

/// Averages (I - R + r r^T)^2 over the points. Throws no-data when empty.
SaveMatrix assemble_save(const RatioEstimates& ratios);

struct EdrEstimate {
    Vector eigenvalues;
    Matrix eigenvectors;
    /// d x N, unit columns; equals the leading eigenvectors when no
    /// back-transform was supplied.
    Matrix directions_original_scale;
    std::size_t N = 0;

    Vector direction(std::size_t j) const { return eigenvectors.column(j); }
    Vector direction_original(std::size_t j) const { return directions_original_scale.column(j); }
};

/// Flips v so that its largest-magnitude entry is positive.
void fix_sign(std::span<double> v);

EdrEstimate extract_directions(const SaveMatrix& save, std::size_t N,
                               const std::optional<SymMatrix>& sigma_inv_sqrt_back = std::nullopt);

/// Centering and whitening X = Sigma^{-1/2} (Z - mu).
struct Whitening {
    Vector mean;
    SymMatrix inv_sqrt;

    static Whitening identity(std::size_t d);
    static Whitening from_sample(std::span<const Vector> rows);

    std::size_t dim() const noexcept { return mean.size(); }
    /// Zero mean and an exact identity matrix.
    bool is_identity() const;
    Vector apply(std::span<const double> z) const;
    Observation apply(const Observation& obs) const;
};

/// Kernel weights depend on Y only, so moments of Z map exactly to moments
/// of X = A (Z - mu):
///   g_X = A (g_Z - mu f),  G_X = A (G_Z - mu g_Z^T - g_Z mu^T + f mu mu^T) A.
std::vector<double> whiten_moment_rows(std::size_t d, std::span<const double> moment_rows, const Whitening& w);

struct FitOptions {
    SequencePlan plan;
    Kernel kernel;
    std::size_t N = 1;
    /// Standardize with the sample mean and covariance of the data seen so
    /// far. Ignored when an explicit whitening is given.
    bool standardize = true;
    std::optional<Whitening> whitening;
};

struct FitResult {
    SaveMatrix save;
    EdrEstimate edr;
};

/// Save-R: absorb observations one by one, standardize, truncate at
/// b_n = truncation_level(n), assemble and eigendecompose.
FitResult fit_recursive(std::span<const Observation> data, const FitOptions& options);

/// Save-NR with bandwidth h = bandwidth(n, plan).
FitResult fit_batch(std::span<const Observation> data, const FitOptions& options);
FitResult fit_batch(std::span<const Observation> data, double h, const FitOptions& options);

/// A Save-R fit that keeps absorbing observations.
///
/// The recursive state holds the predictors minus a constant shift (the
/// initial sample mean, or the mean of a fixed whitening). With
/// standardization on, the mean and covariance are tracked online and
/// applied to the moment estimates at every refresh, so the result after k
/// updates equals a one-shot fit on all rows seen.
class StreamingFit {
public:
    static StreamingFit fit(std::span<const Observation> data, const FitOptions& options);

    /// update_fit: absorbs one raw observation and refreshes the SAVE matrix.
    const FitResult& update(const Observation& raw);

    const FitResult& result() const noexcept { return result_; }
    const RecursiveState& state() const noexcept { return parts_.state; }
    /// Current whitening in the original predictor coordinates.
    Whitening whitening() const;
    bool tracks_covariance() const noexcept { return !parts_.fixed_inv_sqrt.has_value(); }
    std::size_t retained_dim() const noexcept { return parts_.N; }

    struct Parts {
        RecursiveState state;
        Vector shift;
        /// Set: fixed whitening {mean = shift, inv_sqrt}; unset: running.
        std::optional<SymMatrix> fixed_inv_sqrt;
        /// Shifted predictors seen so far (used only without a fixed whitening).
        RunningCovariance running;
        std::size_t N = 1;
    };
    const Parts& parts() const noexcept { return parts_; }
    /// Validates shapes and recomputes the result.
    static StreamingFit from_parts(Parts parts);

private:
    explicit StreamingFit(Parts parts);
    void refresh();

    Parts parts_;
    FitResult result_;
};

FitResult update_fit(StreamingFit& bundle, const Observation& obs);

}  // namespace resave
