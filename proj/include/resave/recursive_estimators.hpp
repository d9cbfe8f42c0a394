#pragma once

// Online kernel estimates of
//
//   f(y)         density of Y,
//   g_j(y)       E(X_j | Y = y) f(y),
//   G_kl(y)      E(X_k X_l | Y = y) f(y),
//
// kept at every sample point Y_i seen so far. Absorbing observation n+1
// applies, at each stored point y,
//
//   H_{n+1}(y) = (1 - gamma_{n+1}) H_n(y) + (gamma_{n+1} / h_{n+1}) K((y - Y_{n+1}) / h_{n+1}) phi(X_{n+1})
//
// with phi(x) = (1, x_j, x_k x_l), and seeds the new point Y_{n+1} from the
// closed form sum_i w_{i,n+1} (1/h_i) K((y - Y_i) / h_i) phi(X_i).
//
// Moments for one point are stored as a single row of width
// 1 + d + d(d+1)/2: [f, g_1..g_d, G packed upper triangle]. All rows share
// one multiplicative factor, so the (1 - gamma) shrink costs O(1) and an
// update only touches points inside the kernel support of the new Y.

#include <cstddef>
#include <span>
#include <vector>

#include "resave/kernels.hpp"
#include "resave/linalg.hpp"
#include "resave/sequences.hpp"

namespace resave {

struct Observation {
    double y = 0.0;
    Vector x;
};

constexpr std::size_t moment_width(std::size_t d) noexcept { return 1 + d + SymMatrix::packed_size(d); }

/// phi(x) = (1, x_1..x_d, x_k x_l for k <= l).
void fill_features(std::span<const double> x, std::span<double> out);

struct EvalPoint {
    double y = 0.0;
    double f = 0.0;
    Vector g;
    SymMatrix G;

    static EvalPoint from_row(double y, std::size_t d, std::span<const double> row);
};

class RecursiveState {
public:
    RecursiveState(std::size_t d, SequencePlan plan, Kernel kernel);

    std::size_t dim() const noexcept { return d_; }
    std::size_t size() const noexcept { return ys_.size(); }
    const SequencePlan& plan() const noexcept { return plan_; }
    const Kernel& kernel() const noexcept { return kernel_; }
    const WeightLedger& ledger() const noexcept { return ledger_; }

    /// Absorbs one observation; O(n d^2).
    void update(const Observation& obs);

    /// Same estimates as calling update() on each element in turn (up to
    /// rounding), computed from the closed form in one pass over the pairs.
    void update_batch(std::span<const Observation> batch);

    /// Closed-form estimate at an arbitrary y from the weighted history.
    EvalPoint evaluate_at(double y) const;

    /// Current estimates at the i-th sample point (0-based).
    EvalPoint point(std::size_t i) const;
    std::vector<double> moment_row(std::size_t i) const;
    /// All point estimates, row-major n x moment_width(d).
    std::vector<double> moment_rows() const;

    std::span<const double> responses() const noexcept { return ys_; }
    std::span<const double> bandwidths() const noexcept { return hs_; }
    std::span<const double> feature_row(std::size_t i) const;
    Vector predictors(std::size_t i) const;

    struct Parts {
        std::size_t d = 0;
        SequencePlan plan;
        Kernel kernel;
        WeightLedger ledger;
        std::vector<double> ys;
        std::vector<double> hs;
        std::vector<double> features;
        /// Stored rows times row_scale are the estimates.
        std::vector<double> moments;
        double row_scale = 1.0;
    };
    /// Raw storage for checkpointing; from_parts validates shapes.
    Parts parts() const;
    static RecursiveState from_parts(Parts parts);

private:
    /// Writes sum_i w_{i,n} (1/h_i) K((y - Y_i)/h_i) phi(X_i) into a zeroed out[0..width).
    void accumulate_closed_form(double y, double* out) const;

    std::size_t d_;
    std::size_t width_;
    SequencePlan plan_;
    Kernel kernel_;
    WeightLedger ledger_;
    std::vector<double> ys_;
    std::vector<double> hs_;
    std::vector<double> inv_hs_;
    std::vector<double> features_;
    std::vector<double> moments_;
    double row_scale_ = 1.0;
};

/// Empty state; d = 0 is rejected.
RecursiveState init(std::size_t d, const SequencePlan& plan, const Kernel& kernel);

/// Value-semantics update: returns the state after absorbing obs.
RecursiveState update(RecursiveState state, const Observation& obs);

EvalPoint evaluate_at(const RecursiveState& state, double y);

/// Non-recursive estimate (1/n) sum_i (1/h) K((y - Y_i)/h) phi(X_i).
EvalPoint batch_estimate(std::span<const Observation> observations, double h, const Kernel& kernel, double y);

/// batch_estimate at every Y_i, as moment rows (n x moment_width(d)).
std::vector<double> batch_estimates_at_samples(std::span<const Observation> observations, double h,
                                               const Kernel& kernel);

}  // namespace resave
