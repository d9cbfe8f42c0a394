#include "resave/save_estimator.hpp"

#include <cmath>
#include <string>

#include "resave/error.hpp"

namespace resave {

RatioEstimates::RatioEstimates(std::size_t d, double b_n, std::vector<double> rows)
    : d_(d), b_n_(b_n), rows_(std::move(rows)) {
    require(d >= 1, ErrorCode::invalid_argument, "dimension must be at least 1");
    require(rows_.size() % moment_width(d) == 0, ErrorCode::invalid_argument, "ratio rows have the wrong width");
}

RatioEstimates compute_ratios(std::size_t d, std::span<const double> moment_rows, double b_n) {
    require(b_n > 0.0, ErrorCode::invalid_argument, "truncation level must be positive");
    const std::size_t width = moment_width(d);
    require(moment_rows.size() % width == 0, ErrorCode::invalid_argument, "moment rows have the wrong width");
    std::vector<double> rows(moment_rows.begin(), moment_rows.end());
    for (std::size_t start = 0; start < rows.size(); start += width) {
        const double floor = truncate_density(rows[start], b_n);
        rows[start] = floor;
        const double inv = 1.0 / floor;
        for (std::size_t c = 1; c < width; ++c) rows[start + c] *= inv;
    }
    return RatioEstimates(d, b_n, std::move(rows));
}

RatioEstimates compute_ratios(std::span<const EvalPoint> points, double b_n) {
    require(!points.empty(), ErrorCode::no_data, "no evaluation points");
    const std::size_t d = points.front().g.size();
    const std::size_t width = moment_width(d);
    std::vector<double> rows;
    rows.reserve(points.size() * width);
    for (const EvalPoint& p : points) {
        require(p.g.size() == d && p.G.dim() == d, ErrorCode::invalid_argument, "mixed point dimensions");
        rows.push_back(p.f);
        rows.insert(rows.end(), p.g.begin(), p.g.end());
        rows.insert(rows.end(), p.G.packed().begin(), p.G.packed().end());
    }
    return compute_ratios(d, rows, b_n);
}

SaveMatrix assemble_save(const RatioEstimates& ratios) {
    const std::size_t n = ratios.size();
    const std::size_t d = ratios.dim();
    require(n >= 1, ErrorCode::no_data, "cannot assemble a SAVE matrix from zero points");

    SymMatrix lambda(d);
    auto acc = lambda.packed();
    std::vector<double> m(d * d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = ratios.r_hat(i);
        // m = I - C_hat(Y_i) with C_hat = R_hat - r_hat r_hat^T
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k; l < d; ++l) {
                const double v = (k == l ? 1.0 : 0.0) - ratios.R_hat(i, k, l) + r[k] * r[l];
                m[k * d + l] = v;
                m[l * d + k] = v;
            }
        std::size_t idx = 0;
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k; l < d; ++l) {
                double sum = 0.0;
                for (std::size_t j = 0; j < d; ++j) sum += m[k * d + j] * m[j * d + l];
                acc[idx++] += sum;
            }
    }
    // divide rather than multiply by 1/n: n copies of 1 must average to exactly 1
    const double count = static_cast<double>(n);
    for (double& v : acc) v /= count;
    for (double v : acc)
        require(std::isfinite(v), ErrorCode::numerical_failure, "SAVE matrix has non-finite entries");
    return SaveMatrix{d, n, ratios.truncation(), std::move(lambda)};
}

void fix_sign(std::span<double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (!v.empty() && v[best] < 0.0)
        for (double& x : v) x = -x;
}

EdrEstimate extract_directions(const SaveMatrix& save, std::size_t N,
                               const std::optional<SymMatrix>& sigma_inv_sqrt_back) {
    const std::size_t d = save.lambda.dim();
    require(N >= 1 && N <= d, ErrorCode::invalid_argument,
            "retained dimension N must be in 1.." + std::to_string(d));
    if (sigma_inv_sqrt_back)
        require(sigma_inv_sqrt_back->dim() == d, ErrorCode::invalid_argument, "back-transform has wrong dimension");

    SymEigen eig = sym_eigen(save.lambda);
    Vector col(d);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t r = 0; r < d; ++r) col[r] = eig.vectors(r, c);
        fix_sign(col);
        for (std::size_t r = 0; r < d; ++r) eig.vectors(r, c) = col[r];
    }

    Matrix directions(d, N);
    for (std::size_t c = 0; c < N; ++c) {
        Vector dir = eig.vectors.column(c);
        if (sigma_inv_sqrt_back) {
            dir = *sigma_inv_sqrt_back * dir;
            double norm = 0.0;
            for (double x : dir) norm += x * x;
            norm = std::sqrt(norm);
            require(norm > 0.0, ErrorCode::numerical_failure, "back-transformed direction vanished");
            for (double& x : dir) x /= norm;
            fix_sign(dir);
        }
        for (std::size_t r = 0; r < d; ++r) directions(r, c) = dir[r];
    }
    return EdrEstimate{std::move(eig.values), std::move(eig.vectors), std::move(directions), N};
}

Whitening Whitening::identity(std::size_t d) { return Whitening{Vector(d, 0.0), SymMatrix::identity(d)}; }

Whitening Whitening::from_sample(std::span<const Vector> rows) {
    CovarianceEstimate est = sample_covariance(rows);
    return Whitening{std::move(est.mean), resave::inv_sqrt(est.cov)};
}

bool Whitening::is_identity() const {
    for (double m : mean)
        if (m != 0.0) return false;
    const std::size_t d = dim();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j)
            if (inv_sqrt(i, j) != (i == j ? 1.0 : 0.0)) return false;
    return true;
}

Vector Whitening::apply(std::span<const double> z) const {
    require(z.size() == dim(), ErrorCode::invalid_argument,
            "observation has " + std::to_string(z.size()) + " predictors, expected " + std::to_string(dim()));
    Vector centered(z.begin(), z.end());
    for (std::size_t j = 0; j < centered.size(); ++j) centered[j] -= mean[j];
    return inv_sqrt * centered;
}

Observation Whitening::apply(const Observation& obs) const { return Observation{obs.y, apply(obs.x)}; }

std::vector<double> whiten_moment_rows(std::size_t d, std::span<const double> moment_rows, const Whitening& w) {
    const std::size_t width = moment_width(d);
    require(w.dim() == d, ErrorCode::invalid_argument, "whitening has wrong dimension");
    require(moment_rows.size() % width == 0, ErrorCode::invalid_argument, "moment rows have the wrong width");
    const Matrix a = w.inv_sqrt.to_dense();
    const Vector& mu = w.mean;
    std::vector<double> out(moment_rows.size());
    Vector u(d);
    Matrix s(d, d);
    Matrix as(d, d);
    for (std::size_t start = 0; start < moment_rows.size(); start += width) {
        const double* row = moment_rows.data() + start;
        const double f = row[0];
        const double* g = row + 1;
        const double* G = row + 1 + d;
        for (std::size_t k = 0; k < d; ++k) u[k] = g[k] - mu[k] * f;
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k; l < d; ++l) {
                const double v = G[SymMatrix::packed_index(d, k, l)] - mu[k] * g[l] - g[k] * mu[l] + f * mu[k] * mu[l];
                s(k, l) = v;
                s(l, k) = v;
            }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t l = 0; l < d; ++l) {
                double acc = 0.0;
                for (std::size_t k = 0; k < d; ++k) acc += a(i, k) * s(k, l);
                as(i, l) = acc;
            }
        double* o = out.data() + start;
        o[0] = f;
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += a(i, k) * u[k];
            o[1 + i] = acc;
        }
        std::size_t idx = 1 + d;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) {
                double acc = 0.0;
                for (std::size_t l = 0; l < d; ++l) acc += as(i, l) * a(j, l);
                o[idx++] = acc;
            }
    }
    return out;
}

namespace {

std::size_t check_fit_input(std::span<const Observation> data) {
    require(!data.empty(), ErrorCode::insufficient_data, "no observations");
    const std::size_t d = data.front().x.size();
    require(d >= 1, ErrorCode::invalid_argument, "observations need at least one predictor");
    require(data.size() >= d + 1, ErrorCode::insufficient_data,
            "need at least d + 1 = " + std::to_string(d + 1) + " observations, got " + std::to_string(data.size()));
    for (const Observation& obs : data)
        require(obs.x.size() == d, ErrorCode::invalid_argument, "ragged observations");
    return d;
}

Vector sample_mean(std::span<const Observation> data, std::size_t d) {
    Vector mean(d, 0.0);
    for (const Observation& obs : data)
        for (std::size_t j = 0; j < d; ++j) mean[j] += obs.x[j];
    for (double& m : mean) m /= static_cast<double>(data.size());
    return mean;
}

Observation shifted(const Observation& obs, std::span<const double> shift) {
    Observation out{obs.y, obs.x};
    for (std::size_t j = 0; j < shift.size(); ++j) out.x[j] -= shift[j];
    return out;
}

// `whitening` acts on the (shifted) coordinates the moment rows are in.
FitResult finish(std::size_t d, std::span<const double> moment_rows, std::size_t n, const SequencePlan& plan,
                 const Whitening& whitening, std::size_t N) {
    const double b_n = truncation_level(n, plan);
    RatioEstimates ratios = whitening.is_identity()
                                ? compute_ratios(d, moment_rows, b_n)
                                : compute_ratios(d, whiten_moment_rows(d, moment_rows, whitening), b_n);
    SaveMatrix save = assemble_save(ratios);
    EdrEstimate edr = extract_directions(save, N, whitening.inv_sqrt);
    return FitResult{std::move(save), std::move(edr)};
}

}  // namespace

FitResult fit_recursive(std::span<const Observation> data, const FitOptions& options) {
    return StreamingFit::fit(data, options).result();
}

FitResult fit_batch(std::span<const Observation> data, const FitOptions& options) {
    check_fit_input(data);
    return fit_batch(data, bandwidth(data.size(), options.plan), options);
}

FitResult fit_batch(std::span<const Observation> data, double h, const FitOptions& options) {
    const std::size_t d = check_fit_input(data);
    options.plan.validate();
    require(options.N >= 1 && options.N <= d, ErrorCode::invalid_argument, "retained dimension N must be in 1..d");

    Vector shift(d, 0.0);
    Whitening local = Whitening::identity(d);
    if (options.whitening) {
        require(options.whitening->dim() == d, ErrorCode::invalid_argument, "whitening has wrong dimension");
        shift = options.whitening->mean;
        local.inv_sqrt = options.whitening->inv_sqrt;
    } else if (options.standardize) {
        shift = sample_mean(data, d);
    }
    std::vector<Observation> centered;
    centered.reserve(data.size());
    for (const Observation& obs : data) centered.push_back(shifted(obs, shift));
    if (!options.whitening && options.standardize) {
        RunningCovariance cov(d);
        for (const Observation& obs : centered) cov.add(obs.x);
        local.inv_sqrt = inv_sqrt(cov.estimate().cov);
    }
    const std::vector<double> rows = batch_estimates_at_samples(centered, h, options.kernel);
    return finish(d, rows, data.size(), options.plan, local, options.N);
}

StreamingFit StreamingFit::fit(std::span<const Observation> data, const FitOptions& options) {
    const std::size_t d = check_fit_input(data);
    require(options.N >= 1 && options.N <= d, ErrorCode::invalid_argument, "retained dimension N must be in 1..d");
    Parts parts{RecursiveState(d, options.plan, options.kernel), Vector(d, 0.0), std::nullopt, RunningCovariance(d),
                options.N};
    if (options.whitening) {
        require(options.whitening->dim() == d, ErrorCode::invalid_argument, "whitening has wrong dimension");
        parts.shift = options.whitening->mean;
        parts.fixed_inv_sqrt = options.whitening->inv_sqrt;
    } else if (options.standardize) {
        parts.shift = sample_mean(data, d);
    } else {
        parts.fixed_inv_sqrt = SymMatrix::identity(d);
    }
    std::vector<Observation> centered;
    centered.reserve(data.size());
    for (const Observation& obs : data) {
        centered.push_back(shifted(obs, parts.shift));
        if (!parts.fixed_inv_sqrt) parts.running.add(centered.back().x);
    }
    parts.state.update_batch(centered);
    return StreamingFit(std::move(parts));
}

StreamingFit StreamingFit::from_parts(Parts parts) {
    const std::size_t d = parts.state.dim();
    require(parts.shift.size() == d, ErrorCode::invalid_argument, "shift has wrong dimension");
    require(!parts.fixed_inv_sqrt || parts.fixed_inv_sqrt->dim() == d, ErrorCode::invalid_argument,
            "whitening has wrong dimension");
    require(parts.fixed_inv_sqrt || (parts.running.dim() == d && parts.running.count() == parts.state.size()),
            ErrorCode::invalid_argument, "running covariance does not match the state");
    require(parts.N >= 1 && parts.N <= d, ErrorCode::invalid_argument, "retained dimension N must be in 1..d");
    return StreamingFit(std::move(parts));
}

StreamingFit::StreamingFit(Parts parts) : parts_(std::move(parts)) {
    require(parts_.state.size() >= 1, ErrorCode::no_data, "streaming fit needs at least one absorbed observation");
    refresh();
}

Whitening StreamingFit::whitening() const {
    const std::size_t d = parts_.state.dim();
    if (parts_.fixed_inv_sqrt) return Whitening{parts_.shift, *parts_.fixed_inv_sqrt};
    const CovarianceEstimate est = parts_.running.estimate();
    Vector mean = parts_.shift;
    for (std::size_t j = 0; j < d; ++j) mean[j] += est.mean[j];
    return Whitening{std::move(mean), inv_sqrt(est.cov)};
}

const FitResult& StreamingFit::update(const Observation& raw) {
    if (raw.x.size() != parts_.state.dim())
        fail(ErrorCode::invalid_argument, "observation has " + std::to_string(raw.x.size()) +
                                              " predictors, expected " + std::to_string(parts_.state.dim()));
    const Observation z = shifted(raw, parts_.shift);
    parts_.state.update(z);
    if (!parts_.fixed_inv_sqrt) parts_.running.add(z.x);
    refresh();
    return result_;
}

void StreamingFit::refresh() {
    const RecursiveState& state = parts_.state;
    Whitening local;
    if (parts_.fixed_inv_sqrt) {
        local = Whitening{Vector(state.dim(), 0.0), *parts_.fixed_inv_sqrt};
    } else {
        const CovarianceEstimate est = parts_.running.estimate();
        local = Whitening{est.mean, inv_sqrt(est.cov)};
    }
    result_ = finish(state.dim(), state.moment_rows(), state.size(), state.plan(), local, parts_.N);
}

FitResult update_fit(StreamingFit& bundle, const Observation& obs) { return bundle.update(obs); }

}  // namespace resave
