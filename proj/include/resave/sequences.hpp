#pragma once

// Stepsize, bandwidth and truncation sequences of the stochastic
// approximation recursion, and the per-observation weights they induce.
//
//   gamma_n = gamma_scale / n            (clamped to (0, 1])
//   h_n     = n^{-c1}                    (or a fixed bandwidth, if set)
//   b_n     = min(epsilon, n^{-c2})
//
// Starting from zero, n steps of theta <- (1 - gamma) theta + gamma * term
// leave observation i with weight
//
//   w_{i,n} = gamma_i * prod_{k=i+1..n} (1 - gamma_k),
//
// and the weights sum to 1 - pi_n with pi_n = prod_{i<=n} (1 - gamma_i).
// Everything here is expressed through w_{i,n}, never through 1 / pi_i,
// so gamma_1 = 1 (pi_n = 0) is an ordinary case.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace resave {

struct SequencePlan {
    double gamma_scale = 1.0;
    /// Power of n in gamma_n; only 1 is supported.
    double gamma_exponent = 1.0;
    double c1 = 0.2;
    double c2 = 0.03;
    double epsilon_trunc = 0.05;
    /// Enforce 1/5 < c1 < 1/4 - 2 c2 and 1/50 < c2 < 1/25.
    bool strict_assumptions = false;
    /// When set, h_n is this constant instead of n^{-c1}.
    std::optional<double> fixed_bandwidth;

    /// Throws invalid-argument on an inadmissible plan.
    void validate() const;
};

double gamma(std::size_t n, const SequencePlan& plan);
double bandwidth(std::size_t n, const SequencePlan& plan);
double truncation_level(std::size_t n, const SequencePlan& plan);

/// Weights w_{i,n} for i = 1..n together with pi_n.
class WeightLedger {
public:
    WeightLedger() = default;

    std::size_t size() const noexcept { return weights_.size(); }
    double pi() const noexcept { return pi_; }
    std::vector<double> weights() const;
    double weight(std::size_t i) const { return weights_.at(i) * scale_; }

    /// Stored weights; the actual weights are raw_weights()[i] * scale().
    std::span<const double> raw_weights() const noexcept { return weights_; }
    double scale() const noexcept { return scale_; }

    /// In-place version of extend_ledger. O(1) amortized.
    void extend(double gamma_next);

    /// Rebuilds a ledger from stored parts (checkpoint loading).
    static WeightLedger from_parts(std::vector<double> raw_weights, double scale, double pi);

private:
    std::vector<double> weights_;
    double scale_ = 1.0;
    double pi_ = 1.0;
};

/// Returns the ledger after one more step with stepsize gamma_next in (0, 1]:
/// existing weights scale by (1 - gamma_next), the new weight is gamma_next.
WeightLedger extend_ledger(const WeightLedger& ledger, double gamma_next);

}  // namespace resave
