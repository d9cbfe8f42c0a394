#pragma once

// Simulation models, direction-accuracy criteria and the Monte Carlo
// harnesses comparing Save-R (recursive) with Save-NR (batch kernel).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "resave/linalg.hpp"
#include "resave/recursive_estimators.hpp"
#include "resave/rng.hpp"
#include "resave/save_estimator.hpp"

namespace resave {

enum class ModelId { model1, model2 };
enum class Estimator { save_r, save_nr };

std::string_view to_string(ModelId id) noexcept;
std::string_view to_string(Estimator e) noexcept;
/// Accepts "1", "2", "model1", "model2".
ModelId parse_model(std::string_view text);
/// Accepts "save-r", "save_r", "save-nr", "save_nr".
Estimator parse_estimator(std::string_view text);

/// Model 1: Y = X1 + X2 + X3 + X4 + eps.
/// Model 2: Y = (X1 + X2 + X3 + X4)^3 + eps.
/// X ~ N(0, I_5), eps ~ N(0, 1), direction (1, 1, 1, 1, 0).
struct ModelSpec {
    ModelId id = ModelId::model1;
    std::size_t d = 5;
    Vector beta_true{1.0, 1.0, 1.0, 1.0, 0.0};
    double noise_sd = 1.0;

    static ModelSpec make(ModelId id) { return ModelSpec{id}; }
    double response(std::span<const double> x, double eps) const;
};

/// Draws n observations: d standard normals for X, then one for eps.
std::vector<Observation> generate(const ModelSpec& model, std::size_t n, Rng& rng);

/// Squared cosine of the angle between two nonzero vectors.
double r_squared(std::span<const double> beta_hat, std::span<const double> beta_true);

/// Squared cosine between (b_j x_j)_j and (bhat_j x_j)_j; nullopt when either
/// scaled vector is zero.
std::optional<double> r_squared_projected(std::span<const double> beta_hat, std::span<const double> beta_ref,
                                          std::span<const double> x);

struct SummaryStats {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation, 0 for a single value
    double median = 0.0;
    std::size_t count = 0;
};
SummaryStats summarize(std::span<const double> values);

struct ReplicationReport {
    ModelId model = ModelId::model1;
    Estimator estimator = Estimator::save_r;
    std::size_t n0 = 0;
    std::size_t p = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::size_t failures = 0;
    double r2_mean = 0.0;
    double r2_std = 0.0;
    SummaryStats wall_times;
    /// Per completed replication, in replication order.
    std::vector<std::size_t> rep_index;
    std::vector<double> r2;
    std::vector<Vector> beta_hat;  ///< leading direction, original scale
};

/// How simulated predictors are whitened before fitting. `sample` uses the
/// mean and covariance of the rows fitted so far (tracked online by Save-R);
/// `population` uses the known N(0, I) law, i.e. the identity map.
enum class Standardization { population, sample };

std::string_view to_string(Standardization s) noexcept;
Standardization parse_standardization(std::string_view text);

struct ReplicationConfig {
    ModelId model = ModelId::model1;
    std::size_t n0 = 100;
    std::size_t p = 400;
    std::size_t reps = 200;
    Estimator estimator = Estimator::save_r;
    std::uint64_t seed = 1;
    Standardization standardization = Standardization::sample;
    FitOptions fit;
    /// 0 means: RESAVE_THREADS if set, otherwise hardware concurrency.
    std::size_t threads = 0;
};

/// Worker count honoring RESAVE_THREADS.
std::size_t default_thread_count();

/// Leading direction (original scale) for one replication's data:
/// Save-R fits the first n0 rows and streams the remaining p one at a time;
/// Save-NR fits all n0 + p rows at once.
Vector estimate_direction(std::span<const Observation> data, std::size_t n0, Estimator estimator,
                          const FitOptions& options);

/// Replication r uses Rng::stream(seed, r), so Save-R and Save-NR runs with
/// the same seed see identical samples.
ReplicationReport run_replications(const ReplicationConfig& config);

struct TimingComparison {
    std::size_t p = 0;
    ReplicationReport recursive;
    ReplicationReport batch;
    /// mean Save-R time / mean Save-NR time
    double ratio = 0.0;
};

/// Save-R: fit n0 rows then p single updates. Save-NR: fit n0 rows then one
/// full refit per added row (sizes n0+1 .. n0+p). Runs on the calling
/// thread; one untimed warm-up per p.
std::vector<TimingComparison> run_timing(ModelId model, std::size_t n0, std::span<const std::size_t> p_values,
                                         std::size_t reps, std::uint64_t seed, const FitOptions& options,
                                         Standardization standardization = Standardization::sample);

/// Options with the whitening implied by `standardization` for `model`.
FitOptions simulation_fit_options(const ModelSpec& model, FitOptions options, Standardization standardization);

}  // namespace resave
