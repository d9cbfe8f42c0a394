#include "resave/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "resave/error.hpp"

namespace resave {

std::string_view to_string(ModelId id) noexcept { return id == ModelId::model1 ? "model1" : "model2"; }

std::string_view to_string(Estimator e) noexcept { return e == Estimator::save_r ? "save-r" : "save-nr"; }

ModelId parse_model(std::string_view text) {
    if (text == "1" || text == "model1") return ModelId::model1;
    if (text == "2" || text == "model2") return ModelId::model2;
    fail(ErrorCode::invalid_argument, "unknown model '" + std::string(text) + "' (expected 1 or 2)");
}

Estimator parse_estimator(std::string_view text) {
    if (text == "save-r" || text == "save_r") return Estimator::save_r;
    if (text == "save-nr" || text == "save_nr") return Estimator::save_nr;
    fail(ErrorCode::invalid_argument, "unknown estimator '" + std::string(text) + "'");
}

std::string_view to_string(Standardization s) noexcept {
    return s == Standardization::population ? "population" : "sample";
}

Standardization parse_standardization(std::string_view text) {
    if (text == "population") return Standardization::population;
    if (text == "sample") return Standardization::sample;
    fail(ErrorCode::invalid_argument, "unknown standardization '" + std::string(text) + "'");
}

FitOptions simulation_fit_options(const ModelSpec& model, FitOptions options, Standardization standardization) {
    if (standardization == Standardization::population) {
        options.whitening = Whitening::identity(model.d);
    } else {
        options.whitening.reset();
        options.standardize = true;
    }
    return options;
}

double ModelSpec::response(std::span<const double> x, double eps) const {
    require(x.size() == d, ErrorCode::invalid_argument, "model predictor has wrong dimension");
    double index = 0.0;
    for (std::size_t j = 0; j < d; ++j) index += beta_true[j] * x[j];
    const double signal = id == ModelId::model1 ? index : index * index * index;
    return signal + eps;
}

std::vector<Observation> generate(const ModelSpec& model, std::size_t n, Rng& rng) {
    std::vector<Observation> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Observation obs;
        obs.x.resize(model.d);
        for (double& v : obs.x) v = rng.normal();
        const double eps = model.noise_sd * rng.normal();
        obs.y = model.response(obs.x, eps);
        out.push_back(std::move(obs));
    }
    return out;
}

double r_squared(std::span<const double> beta_hat, std::span<const double> beta_true) {
    require(beta_hat.size() == beta_true.size(), ErrorCode::invalid_argument, "R^2 vectors differ in length");
    double dot = 0.0;
    double nh = 0.0;
    double nt = 0.0;
    for (std::size_t j = 0; j < beta_hat.size(); ++j) {
        dot += beta_hat[j] * beta_true[j];
        nh += beta_hat[j] * beta_hat[j];
        nt += beta_true[j] * beta_true[j];
    }
    require(nh > 0.0 && nt > 0.0, ErrorCode::invalid_argument, "R^2 is undefined for a zero vector");
    return std::clamp(dot * dot / (nh * nt), 0.0, 1.0);
}

std::optional<double> r_squared_projected(std::span<const double> beta_hat, std::span<const double> beta_ref,
                                          std::span<const double> x) {
    require(beta_hat.size() == x.size() && beta_ref.size() == x.size(), ErrorCode::invalid_argument,
            "projected R^2 vectors differ in length");
    Vector a(x.size());
    Vector b(x.size());
    bool a_zero = true;
    bool b_zero = true;
    for (std::size_t j = 0; j < x.size(); ++j) {
        a[j] = beta_ref[j] * x[j];
        b[j] = beta_hat[j] * x[j];
        a_zero = a_zero && a[j] == 0.0;
        b_zero = b_zero && b[j] == 0.0;
    }
    if (a_zero || b_zero) return std::nullopt;
    return r_squared(b, a);
}

SummaryStats summarize(std::span<const double> values) {
    SummaryStats s;
    s.count = values.size();
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return s;
}

std::size_t default_thread_count() {
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RESAVE_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) threads = std::min(threads, static_cast<std::size_t>(cap));
    }
    return threads;
}

Vector estimate_direction(std::span<const Observation> data, std::size_t n0, Estimator estimator,
                          const FitOptions& options) {
    if (estimator == Estimator::save_nr) return fit_batch(data, options).edr.direction_original(0);
    require(n0 <= data.size(), ErrorCode::invalid_argument, "n0 exceeds the sample size");
    StreamingFit bundle = StreamingFit::fit(data.first(n0), options);
    for (const Observation& obs : data.subspan(n0)) bundle.update(obs);
    return bundle.result().edr.direction_original(0);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct RepOutcome {
    bool ok = false;
    double r2 = 0.0;
    double seconds = 0.0;
    Vector beta;
};

}  // namespace

ReplicationReport run_replications(const ReplicationConfig& config) {
    require(config.reps >= 1, ErrorCode::invalid_argument, "reps must be at least 1");
    require(config.n0 >= 1, ErrorCode::invalid_argument, "n0 must be at least 1");
    const ModelSpec model = ModelSpec::make(config.model);
    const FitOptions options = simulation_fit_options(model, config.fit, config.standardization);

    std::vector<RepOutcome> outcomes(config.reps);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < config.reps; r = next++) {
            Rng rng = Rng::stream(config.seed, r);
            const std::vector<Observation> data = generate(model, config.n0 + config.p, rng);
            RepOutcome& out = outcomes[r];
            const auto start = Clock::now();
            try {
                out.beta = estimate_direction(data, config.n0, config.estimator, options);
                out.seconds = seconds_since(start);
                out.r2 = r_squared(out.beta, model.beta_true);
                out.ok = true;
            } catch (const Error&) {
                out.ok = false;
            }
        }
    };

    const std::size_t threads =
        std::min(config.reps, config.threads > 0 ? config.threads : default_thread_count());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ReplicationReport report;
    report.model = config.model;
    report.estimator = config.estimator;
    report.n0 = config.n0;
    report.p = config.p;
    report.reps = config.reps;
    report.seed = config.seed;
    std::vector<double> times;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        if (!outcomes[r].ok) {
            ++report.failures;
            continue;
        }
        report.rep_index.push_back(r);
        report.r2.push_back(outcomes[r].r2);
        report.beta_hat.push_back(std::move(outcomes[r].beta));
        times.push_back(outcomes[r].seconds);
    }
    const SummaryStats r2 = summarize(report.r2);
    report.r2_mean = r2.mean;
    report.r2_std = r2.std;
    report.wall_times = summarize(times);
    return report;
}

std::vector<TimingComparison> run_timing(ModelId model_id, std::size_t n0, std::span<const std::size_t> p_values,
                                         std::size_t reps, std::uint64_t seed, const FitOptions& fit_options,
                                         Standardization standardization) {
    require(reps >= 1, ErrorCode::invalid_argument, "reps must be at least 1");
    const ModelSpec model = ModelSpec::make(model_id);
    const FitOptions options = simulation_fit_options(model, fit_options, standardization);

    auto time_recursive = [&](std::span<const Observation> data, std::size_t p, Vector& beta) {
        const auto start = Clock::now();
        StreamingFit bundle = StreamingFit::fit(data.first(n0), options);
        for (std::size_t k = 0; k < p; ++k) bundle.update(data[n0 + k]);
        const double s = seconds_since(start);
        beta = bundle.result().edr.direction_original(0);
        return s;
    };
    auto time_batch = [&](std::span<const Observation> data, std::size_t p, Vector& beta) {
        const auto start = Clock::now();
        FitResult fit = fit_batch(data.first(n0), options);
        for (std::size_t k = 1; k <= p; ++k) fit = fit_batch(data.first(n0 + k), options);
        const double s = seconds_since(start);
        beta = fit.edr.direction_original(0);
        return s;
    };

    std::vector<TimingComparison> out;
    for (std::size_t pi = 0; pi < p_values.size(); ++pi) {
        const std::size_t p = p_values[pi];
        TimingComparison cmp;
        cmp.p = p;
        for (ReplicationReport* rep : {&cmp.recursive, &cmp.batch}) {
            rep->model = model_id;
            rep->n0 = n0;
            rep->p = p;
            rep->reps = reps;
            rep->seed = seed;
        }
        cmp.recursive.estimator = Estimator::save_r;
        cmp.batch.estimator = Estimator::save_nr;

        std::vector<double> t_rec;
        std::vector<double> t_bat;
        // Stream index 0 is the warm-up, replications use 1..reps.
        for (std::size_t r = 0; r <= reps; ++r) {
            Rng rng = Rng::stream(seed, r);
            const std::vector<Observation> data = generate(model, n0 + p, rng);
            Vector beta_r;
            Vector beta_nr;
            const double tr = time_recursive(data, p, beta_r);
            const double tb = time_batch(data, p, beta_nr);
            if (r == 0) continue;
            t_rec.push_back(tr);
            t_bat.push_back(tb);
            cmp.recursive.rep_index.push_back(r);
            cmp.batch.rep_index.push_back(r);
            cmp.recursive.r2.push_back(r_squared(beta_r, model.beta_true));
            cmp.batch.r2.push_back(r_squared(beta_nr, model.beta_true));
            cmp.recursive.beta_hat.push_back(std::move(beta_r));
            cmp.batch.beta_hat.push_back(std::move(beta_nr));
        }
        for (auto [rep, times] : {std::pair{&cmp.recursive, &t_rec}, std::pair{&cmp.batch, &t_bat}}) {
            const SummaryStats r2 = summarize(rep->r2);
            rep->r2_mean = r2.mean;
            rep->r2_std = r2.std;
            rep->wall_times = summarize(*times);
        }
        cmp.ratio = cmp.batch.wall_times.mean > 0.0 ? cmp.recursive.wall_times.mean / cmp.batch.wall_times.mean : 0.0;
        out.push_back(std::move(cmp));
    }
    return out;
}

}  // namespace resave
