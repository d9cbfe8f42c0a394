#include "resave/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "resave/error.hpp"

namespace resave {

void SequencePlan::validate() const {
    require(std::isfinite(gamma_scale) && gamma_scale > 0.0, ErrorCode::invalid_argument,
            "gamma_scale must be positive");
    require(gamma_exponent == 1.0, ErrorCode::invalid_argument, "gamma_exponent must be 1");
    require(c1 > 0.0 && c1 < 1.0, ErrorCode::invalid_argument, "c1 must lie in (0, 1)");
    require(c2 > 0.0 && c2 < 1.0, ErrorCode::invalid_argument, "c2 must lie in (0, 1)");
    require(std::isfinite(epsilon_trunc) && epsilon_trunc > 0.0, ErrorCode::invalid_argument,
            "epsilon_trunc must be positive");
    if (fixed_bandwidth)
        require(std::isfinite(*fixed_bandwidth) && *fixed_bandwidth > 0.0, ErrorCode::invalid_argument,
                "fixed bandwidth must be positive");
    if (strict_assumptions) {
        require(c2 > 1.0 / 50.0 && c2 < 1.0 / 25.0, ErrorCode::invalid_argument,
                "strict assumptions need 1/50 < c2 < 1/25, got c2 = " + std::to_string(c2));
        require(c1 > 1.0 / 5.0 && c1 < 0.25 - 2.0 * c2, ErrorCode::invalid_argument,
                "strict assumptions need 1/5 < c1 < 1/4 - 2 c2, got c1 = " + std::to_string(c1));
    }
}

namespace {
void require_index(std::size_t n, const char* what) {
    if (n == 0) fail(ErrorCode::invalid_argument, std::string(what) + " is indexed from n = 1");
}
}  // namespace

double gamma(std::size_t n, const SequencePlan& plan) {
    require_index(n, "gamma");
    return std::min(1.0, plan.gamma_scale / static_cast<double>(n));
}

double bandwidth(std::size_t n, const SequencePlan& plan) {
    require_index(n, "bandwidth");
    if (plan.fixed_bandwidth) return *plan.fixed_bandwidth;
    return std::pow(static_cast<double>(n), -plan.c1);
}

double truncation_level(std::size_t n, const SequencePlan& plan) {
    require_index(n, "truncation_level");
    return std::min(plan.epsilon_trunc, std::pow(static_cast<double>(n), -plan.c2));
}

void WeightLedger::extend(double gamma_next) {
    require(gamma_next > 0.0 && gamma_next <= 1.0, ErrorCode::invalid_argument,
            "stepsize must lie in (0, 1]");
    const double keep = 1.0 - gamma_next;
    if (keep == 0.0) {
        std::fill(weights_.begin(), weights_.end(), 0.0);
        scale_ = 1.0;
    } else {
        scale_ *= keep;
    }
    weights_.push_back(gamma_next / scale_);
    pi_ *= keep;
    if (scale_ < 1e-150) {
        for (double& w : weights_) w *= scale_;
        scale_ = 1.0;
    }
}

std::vector<double> WeightLedger::weights() const {
    std::vector<double> out = weights_;
    for (double& w : out) w *= scale_;
    return out;
}

WeightLedger WeightLedger::from_parts(std::vector<double> raw_weights, double scale, double pi) {
    require(scale > 0.0 && std::isfinite(scale), ErrorCode::invalid_argument, "ledger scale must be positive");
    require(pi >= 0.0 && pi <= 1.0, ErrorCode::invalid_argument, "ledger pi must lie in [0, 1]");
    WeightLedger ledger;
    ledger.weights_ = std::move(raw_weights);
    ledger.scale_ = scale;
    ledger.pi_ = pi;
    return ledger;
}

WeightLedger extend_ledger(const WeightLedger& ledger, double gamma_next) {
    WeightLedger next = ledger;
    next.extend(gamma_next);
    return next;
}

}  // namespace resave
