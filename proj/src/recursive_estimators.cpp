#include "resave/recursive_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "resave/error.hpp"

namespace resave {

void fill_features(std::span<const double> x, std::span<double> out) {
    const std::size_t d = x.size();
    out[0] = 1.0;
    for (std::size_t j = 0; j < d; ++j) out[1 + j] = x[j];
    std::size_t idx = 1 + d;
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = k; l < d; ++l) out[idx++] = x[k] * x[l];
}

EvalPoint EvalPoint::from_row(double y, std::size_t d, std::span<const double> row) {
    EvalPoint p{y, row[0], Vector(row.begin() + 1, row.begin() + 1 + static_cast<std::ptrdiff_t>(d)),
                SymMatrix(d)};
    auto packed = p.G.packed();
    for (std::size_t i = 0; i < packed.size(); ++i) packed[i] = row[1 + d + i];
    return p;
}

namespace {

void check_observation(const Observation& obs, std::size_t d) {
    if (obs.x.size() != d)
        fail(ErrorCode::invalid_argument,
             "observation has " + std::to_string(obs.x.size()) + " predictors, expected " + std::to_string(d));
    require(std::isfinite(obs.y), ErrorCode::invalid_argument, "non-finite response");
    for (double v : obs.x) require(std::isfinite(v), ErrorCode::invalid_argument, "non-finite predictor");
}

}  // namespace

RecursiveState::RecursiveState(std::size_t d, SequencePlan plan, Kernel kernel)
    : d_(d), width_(moment_width(d)), plan_(plan), kernel_(kernel) {
    require(d >= 1, ErrorCode::invalid_argument, "dimension must be at least 1");
    plan_.validate();
}

void RecursiveState::update(const Observation& obs) {
    check_observation(obs, d_);
    const std::size_t n = size();
    const double step = gamma(n + 1, plan_);
    const double h = bandwidth(n + 1, plan_);
    const double keep = 1.0 - step;
    const double radius = kernel_.support_radius();

    features_.resize((n + 1) * width_);
    const double* phi = features_.data() + n * width_;
    fill_features(obs.x, std::span<double>(features_).subspan(n * width_, width_));

    // (1 - gamma) applies to every stored row, so it goes into row_scale_;
    // only rows inside the kernel support of the new response are touched.
    if (keep == 0.0) {
        std::fill(moments_.begin(), moments_.end(), 0.0);
        row_scale_ = 1.0;
    } else {
        row_scale_ *= keep;
    }
    const double inv_h = 1.0 / h;
    const double factor = step / (h * row_scale_);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (ys_[i] - obs.y) * inv_h;
        if (std::abs(u) >= radius) continue;
        const double scale = factor * kernel_(u);
        double* row = moments_.data() + i * width_;
        for (std::size_t c = 0; c < width_; ++c) row[c] += scale * phi[c];
    }

    ledger_.extend(step);
    ys_.push_back(obs.y);
    hs_.push_back(h);
    inv_hs_.push_back(inv_h);
    moments_.resize((n + 1) * width_, 0.0);
    double* fresh = moments_.data() + n * width_;
    accumulate_closed_form(obs.y, fresh);
    for (std::size_t c = 0; c < width_; ++c) fresh[c] /= row_scale_;

    if (row_scale_ < 1e-150) {
        for (double& v : moments_) v *= row_scale_;
        row_scale_ = 1.0;
    }
}

void RecursiveState::update_batch(std::span<const Observation> batch) {
    if (batch.empty()) return;
    for (const Observation& obs : batch) check_observation(obs, d_);
    const std::size_t m = size();
    const std::size_t k = batch.size();
    const double radius = kernel_.support_radius();

    // Ledger, responses and features for all new observations first; the
    // final weights of the new observations then give their contribution to
    // every older point, and every new point is seeded in closed form.
    ys_.reserve(m + k);
    hs_.reserve(m + k);
    inv_hs_.reserve(m + k);
    features_.reserve((m + k) * width_);
    double keep_all = 1.0;
    bool wiped = false;
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t n = m + j + 1;
        const double step = gamma(n, plan_);
        const double h = bandwidth(n, plan_);
        ledger_.extend(step);
        keep_all *= 1.0 - step;
        wiped = wiped || step == 1.0;
        ys_.push_back(batch[j].y);
        hs_.push_back(h);
        inv_hs_.push_back(1.0 / h);
        features_.resize(n * width_);
        fill_features(batch[j].x, std::span<double>(features_).subspan((n - 1) * width_, width_));
    }

    if (wiped) {
        std::fill(moments_.begin(), moments_.end(), 0.0);
        row_scale_ = 1.0;
    } else {
        row_scale_ *= keep_all;
    }
    if (row_scale_ < 1e-150) {
        for (double& v : moments_) v *= row_scale_;
        row_scale_ = 1.0;
    }

    const auto weights = ledger_.raw_weights();
    const double factor = ledger_.scale() / row_scale_;
    for (std::size_t i = 0; i < m; ++i) {
        double* row = moments_.data() + i * width_;
        for (std::size_t j = m; j < m + k; ++j) {
            const double u = (ys_[i] - ys_[j]) * inv_hs_[j];
            if (std::abs(u) >= radius) continue;
            const double scale = factor * weights[j] * inv_hs_[j] * kernel_(u);
            const double* phi = features_.data() + j * width_;
            for (std::size_t c = 0; c < width_; ++c) row[c] += scale * phi[c];
        }
    }

    // new points in closed form; w_i / h_i is shared by every target point
    std::vector<double> coef(m + k);
    for (std::size_t i = 0; i < m + k; ++i) coef[i] = weights[i] * inv_hs_[i];
    moments_.resize((m + k) * width_, 0.0);
    for (std::size_t p = m; p < m + k; ++p) {
        double* fresh = moments_.data() + p * width_;
        const double y = ys_[p];
        for (std::size_t i = 0; i < m + k; ++i) {
            const double u = (y - ys_[i]) * inv_hs_[i];
            if (std::abs(u) >= radius) continue;
            const double scale = coef[i] * kernel_(u);
            const double* phi = features_.data() + i * width_;
            for (std::size_t c = 0; c < width_; ++c) fresh[c] += scale * phi[c];
        }
        for (std::size_t c = 0; c < width_; ++c) fresh[c] *= factor;
    }
}

void RecursiveState::accumulate_closed_form(double y, double* out) const {
    const auto weights = ledger_.raw_weights();
    const double wscale = ledger_.scale();
    const double radius = kernel_.support_radius();
    for (std::size_t i = 0; i < ys_.size(); ++i) {
        const double u = (y - ys_[i]) * inv_hs_[i];
        if (std::abs(u) >= radius) continue;
        const double scale = weights[i] * inv_hs_[i] * kernel_(u);
        const double* phi = features_.data() + i * width_;
        for (std::size_t c = 0; c < width_; ++c) out[c] += scale * phi[c];
    }
    for (std::size_t c = 0; c < width_; ++c) out[c] *= wscale;
}

EvalPoint RecursiveState::evaluate_at(double y) const {
    require(size() > 0, ErrorCode::no_data, "no observations absorbed yet");
    std::vector<double> acc(width_, 0.0);
    accumulate_closed_form(y, acc.data());
    return EvalPoint::from_row(y, d_, acc);
}

EvalPoint RecursiveState::point(std::size_t i) const { return EvalPoint::from_row(ys_.at(i), d_, moment_row(i)); }

std::vector<double> RecursiveState::moment_row(std::size_t i) const {
    require(i < size(), ErrorCode::invalid_argument, "point index out of range");
    std::vector<double> row(moments_.begin() + static_cast<std::ptrdiff_t>(i * width_),
                            moments_.begin() + static_cast<std::ptrdiff_t>((i + 1) * width_));
    for (double& v : row) v *= row_scale_;
    return row;
}

std::vector<double> RecursiveState::moment_rows() const {
    std::vector<double> rows = moments_;
    for (double& v : rows) v *= row_scale_;
    return rows;
}

std::span<const double> RecursiveState::feature_row(std::size_t i) const {
    require(i < size(), ErrorCode::invalid_argument, "observation index out of range");
    return std::span<const double>(features_).subspan(i * width_, width_);
}

Vector RecursiveState::predictors(std::size_t i) const {
    const auto row = feature_row(i);
    return Vector(row.begin() + 1, row.begin() + 1 + static_cast<std::ptrdiff_t>(d_));
}

RecursiveState::Parts RecursiveState::parts() const {
    return Parts{d_, plan_, kernel_, ledger_, ys_, hs_, features_, moments_, row_scale_};
}

RecursiveState RecursiveState::from_parts(Parts parts) {
    RecursiveState state(parts.d, parts.plan, parts.kernel);
    const std::size_t n = parts.ys.size();
    require(parts.hs.size() == n && parts.ledger.size() == n && parts.features.size() == n * state.width_ &&
                parts.moments.size() == n * state.width_,
            ErrorCode::invalid_argument, "inconsistent recursive state parts");
    require(parts.row_scale > 0.0 && std::isfinite(parts.row_scale), ErrorCode::invalid_argument,
            "row scale must be positive");
    state.ledger_ = std::move(parts.ledger);
    state.ys_ = std::move(parts.ys);
    state.hs_ = std::move(parts.hs);
    state.inv_hs_.reserve(state.hs_.size());
    for (double h : state.hs_) {
        require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument, "stored bandwidths must be positive");
        state.inv_hs_.push_back(1.0 / h);
    }
    state.features_ = std::move(parts.features);
    state.moments_ = std::move(parts.moments);
    state.row_scale_ = parts.row_scale;
    return state;
}

RecursiveState init(std::size_t d, const SequencePlan& plan, const Kernel& kernel) {
    return RecursiveState(d, plan, kernel);
}

RecursiveState update(RecursiveState state, const Observation& obs) {
    state.update(obs);
    return state;
}

EvalPoint evaluate_at(const RecursiveState& state, double y) { return state.evaluate_at(y); }

EvalPoint batch_estimate(std::span<const Observation> observations, double h, const Kernel& kernel, double y) {
    require(!observations.empty(), ErrorCode::no_data, "batch estimate needs observations");
    require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument, "bandwidth must be positive");
    const std::size_t d = observations.front().x.size();
    const std::size_t width = moment_width(d);
    std::vector<double> acc(width, 0.0);
    std::vector<double> phi(width);
    const double radius = kernel.support_radius();
    for (const Observation& obs : observations) {
        check_observation(obs, d);
        const double u = (y - obs.y) / h;
        if (std::abs(u) >= radius) continue;
        fill_features(obs.x, phi);
        const double scale = kernel(u) / h;
        for (std::size_t c = 0; c < width; ++c) acc[c] += scale * phi[c];
    }
    const double inv_n = 1.0 / static_cast<double>(observations.size());
    for (double& a : acc) a *= inv_n;
    return EvalPoint::from_row(y, d, acc);
}

std::vector<double> batch_estimates_at_samples(std::span<const Observation> observations, double h,
                                               const Kernel& kernel) {
    require(!observations.empty(), ErrorCode::no_data, "batch estimate needs observations");
    require(h > 0.0 && std::isfinite(h), ErrorCode::invalid_argument, "bandwidth must be positive");
    const std::size_t n = observations.size();
    const std::size_t d = observations.front().x.size();
    const std::size_t width = moment_width(d);

    std::vector<double> features(n * width);
    for (std::size_t i = 0; i < n; ++i) {
        check_observation(observations[i], d);
        fill_features(observations[i].x, std::span<double>(features).subspan(i * width, width));
    }

    const double radius = kernel.support_radius();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_h = 1.0 / h;
    std::vector<double> rows(n * width, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        double* acc = rows.data() + p * width;
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (observations[p].y - observations[i].y) * inv_h;
            if (std::abs(u) >= radius) continue;
            const double scale = kernel(u) * inv_h;
            const double* phi = features.data() + i * width;
            for (std::size_t c = 0; c < width; ++c) acc[c] += scale * phi[c];
        }
        for (std::size_t c = 0; c < width; ++c) acc[c] *= inv_n;
    }
    return rows;
}

}  // namespace resave
