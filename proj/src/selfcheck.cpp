#include "resave/selfcheck.hpp"

#include <algorithm>
#include <cmath>

#include "resave/error.hpp"
#include "resave/linalg.hpp"
#include "resave/recursive_estimators.hpp"
#include "resave/rng.hpp"
#include "resave/save_estimator.hpp"
#include "resave/sequences.hpp"

namespace resave {

namespace {

std::vector<Observation> random_data(Rng& rng, std::size_t n, std::size_t d) {
    std::vector<Observation> out(n);
    for (auto& obs : out) {
        obs.x.resize(d);
        double s = 0.0;
        for (double& v : obs.x) {
            v = rng.normal();
            s += v;
        }
        obs.y = 0.6 * s + 0.5 * rng.normal();
    }
    return out;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

CheckResult make(std::string name, double error, double tol) {
    return CheckResult{std::move(name), error <= tol, error, tol};
}

// Sample-point estimates summed directly from w_{i,n} = (1/i) prod (1 - 1/k)
// with hand-coded kernel formulas; nothing from the estimator is reused.
CheckResult recursion_vs_closed_form(const Kernel& kernel, Rng& rng) {
    const std::size_t d = 3;
    const std::size_t n = 60;
    SequencePlan plan;
    RecursiveState state(d, plan, kernel);
    const auto data = random_data(rng, n, d);
    for (const auto& obs : data) state.update(obs);

    const bool quartic = kernel.id() == KernelId::quartic4;
    auto kern = [quartic](double u) {
        if (std::abs(u) >= 1.0) return 0.0;
        return quartic ? 15.0 / 32.0 * (1.0 - u * u) * (3.0 - 7.0 * u * u) : 0.75 * (1.0 - u * u);
    };
    const std::size_t width = moment_width(d);
    double worst = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        std::vector<double> oracle(width, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double w = 1.0 / static_cast<double>(i + 1);
            for (std::size_t k = i + 2; k <= n; ++k) w *= 1.0 - 1.0 / static_cast<double>(k);
            const double h = std::pow(static_cast<double>(i + 1), -0.2);
            const double kv = w / h * kern((data[p].y - data[i].y) / h);
            const auto& x = data[i].x;
            std::size_t c = 0;
            oracle[c++] += kv;
            for (std::size_t j = 0; j < d; ++j) oracle[c++] += kv * x[j];
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t l = k; l < d; ++l) oracle[c++] += kv * x[k] * x[l];
        }
        const auto row = state.moment_row(p);
        for (std::size_t c = 0; c < width; ++c) worst = std::max(worst, rel_diff(row[c], oracle[c]));
    }
    return make("recursion-vs-closed-form", worst, 1e-10);
}

CheckResult weight_sum_identity() {
    double worst = 0.0;
    for (double scale : {1.0, 0.5, 0.9}) {
        SequencePlan plan;
        plan.gamma_scale = scale;
        WeightLedger ledger;
        double pi = 1.0;
        for (std::size_t n = 1; n <= 10000; ++n) {
            const double g = gamma(n, plan);
            ledger.extend(g);
            pi *= 1.0 - g;
            if (n % 250 == 0 || n < 20) {
                double sum = 0.0;
                for (double w : ledger.weights()) sum += w;
                worst = std::max(worst, std::abs(sum - (1.0 - pi)));
            }
        }
    }
    return make("weight-sum-identity", worst, 1e-12);
}

// gamma_n = 1/n with a constant bandwidth reduces the recursion to the
// plain batch kernel average.
CheckResult batch_bridge(const Kernel& kernel, Rng& rng) {
    const std::size_t d = 4;
    const auto data = random_data(rng, 150, d);
    FitOptions opts;
    opts.kernel = kernel;
    opts.plan.fixed_bandwidth = 0.45;
    opts.whitening = Whitening::identity(d);
    const FitResult r = fit_recursive(data, opts);
    const FitResult b = fit_batch(data, 0.45, opts);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.save.lambda.packed().size(); ++i)
        worst = std::max(worst, rel_diff(r.save.lambda.packed()[i], b.save.lambda.packed()[i]));
    return make("batch-bridge", worst, 1e-10);
}

SymMatrix random_spd(Rng& rng, std::size_t d) {
    Matrix a(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.normal();
    SymMatrix m(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            double s = i == j ? 0.1 : 0.0;
            for (std::size_t k = 0; k < d; ++k) s += a(i, k) * a(j, k);
            m(i, j) = s;
        }
    return m;
}

CheckResult eigen_reconstruction(Rng& rng) {
    double worst = 0.0;
    for (std::size_t d = 1; d <= 10; ++d) {
        const SymMatrix m = random_spd(rng, d);
        const SymEigen e = sym_eigen(m);
        double err = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < d; ++k) s += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
                err += (s - m(i, j)) * (s - m(i, j));
            }
        worst = std::max(worst, std::sqrt(err) / m.frobenius_norm());
    }
    return make("eigen-reconstruction", worst, 1e-9);
}

CheckResult whitening_identity(Rng& rng) {
    double worst = 0.0;
    for (std::size_t d = 1; d <= 10; ++d) {
        const SymMatrix m = random_spd(rng, d);
        const Matrix w = inv_sqrt(m).to_dense();
        const Matrix prod = w * m.to_dense() * w;
        double err = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = prod(i, j) - (i == j ? 1.0 : 0.0);
                err += diff * diff;
            }
        worst = std::max(worst, std::sqrt(err));
    }
    return make("whitening-identity", worst, 1e-8);
}

CheckResult streaming_vs_one_shot(const Kernel& kernel, Rng& rng) {
    const std::size_t d = 5;
    const auto data = random_data(rng, 160, d);
    FitOptions opts;
    opts.kernel = kernel;
    const std::span<const Observation> all(data);
    StreamingFit bundle = StreamingFit::fit(all.first(100), opts);
    for (const auto& obs : all.subspan(100)) bundle.update(obs);
    const FitResult one = fit_recursive(all, opts);
    double worst = 0.0;
    for (std::size_t i = 0; i < one.save.lambda.packed().size(); ++i)
        worst = std::max(worst, std::abs(bundle.result().save.lambda.packed()[i] - one.save.lambda.packed()[i]));
    return make("streaming-vs-one-shot", worst, 1e-10);
}

CheckResult zero_predictors(const Kernel& kernel, Rng& rng) {
    const std::size_t d = 3;
    std::vector<Observation> data(40);
    for (auto& obs : data) obs = Observation{rng.normal(), Vector(d, 0.0)};
    FitOptions opts;
    opts.kernel = kernel;
    opts.whitening = Whitening::identity(d);
    double worst = 0.0;
    for (const FitResult& f : {fit_recursive(data, opts), fit_batch(data, opts)}) {
        const SymMatrix eye = SymMatrix::identity(d);
        for (std::size_t i = 0; i < eye.packed().size(); ++i)
            worst = std::max(worst, std::abs(f.save.lambda.packed()[i] - eye.packed()[i]));
    }
    return make("zero-predictors-identity", worst, 0.0);
}

template <class F>
CheckResult guarded(const char* name, F&& f) {
    try {
        return f();
    } catch (const Error&) {
        return CheckResult{name, false, INFINITY, 0.0};
    }
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options) {
    Rng rng(options.seed);
    const Kernel& k = options.kernel;
    std::vector<CheckResult> out;
    out.push_back(guarded("recursion-vs-closed-form", [&] { return recursion_vs_closed_form(k, rng); }));
    out.push_back(guarded("weight-sum-identity", [&] { return weight_sum_identity(); }));
    out.push_back(guarded("batch-bridge", [&] { return batch_bridge(k, rng); }));
    out.push_back(guarded("eigen-reconstruction", [&] { return eigen_reconstruction(rng); }));
    out.push_back(guarded("whitening-identity", [&] { return whitening_identity(rng); }));
    out.push_back(guarded("streaming-vs-one-shot", [&] { return streaming_vs_one_shot(k, rng); }));
    out.push_back(guarded("zero-predictors-identity", [&] { return zero_predictors(k, rng); }));
    return out;
}

}  // namespace resave
