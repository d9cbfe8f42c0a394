#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "resave/recursive_estimators.hpp"
#include "resave/rng.hpp"

namespace testing {

inline std::vector<resave::Observation> random_data(resave::Rng& rng, std::size_t n, std::size_t d) {
    std::vector<resave::Observation> out(n);
    for (auto& obs : out) {
        obs.x.resize(d);
        double s = 0.0;
        for (double& v : obs.x) {
            v = rng.normal();
            s += v;
        }
        obs.y = 0.7 * s + 0.4 * rng.normal();
    }
    return out;
}

inline double textbook_epanechnikov(double u) { return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0; }

// w_{i,n} straight from the product, 0-based i.
inline std::vector<double> product_weights(std::span<const double> gammas) {
    const std::size_t n = gammas.size();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = gammas[i];
        for (std::size_t k = i + 1; k < n; ++k) v *= 1.0 - gammas[k];
        w[i] = v;
    }
    return w;
}

// sum_i w_i / h_i K((y - Y_i)/h_i) (1, x, x x^T) for explicit stepsizes and bandwidths
inline std::vector<double> oracle_row(std::span<const resave::Observation> data, double y,
                                      std::span<const double> gammas, std::span<const double> hs) {
    const std::size_t n = data.size();
    const std::size_t d = data.front().x.size();
    const std::vector<double> w = product_weights(gammas);
    std::vector<double> out(resave::moment_width(d), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double kv = w[i] / hs[i] * textbook_epanechnikov((y - data[i].y) / hs[i]);
        const auto& x = data[i].x;
        std::size_t c = 0;
        out[c++] += kv;
        for (std::size_t j = 0; j < d; ++j) out[c++] += kv * x[j];
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k; l < d; ++l) out[c++] += kv * x[k] * x[l];
    }
    return out;
}

// default plan: gamma_i = 1/i, h_i = i^-0.2
inline std::vector<double> oracle_row(std::span<const resave::Observation> data, double y) {
    std::vector<double> gammas(data.size()), hs(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        gammas[i] = 1.0 / static_cast<double>(i + 1);
        hs[i] = std::pow(static_cast<double>(i + 1), -0.2);
    }
    return oracle_row(data, y, gammas, hs);
}

inline double max_rel_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
    return worst;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace testing
