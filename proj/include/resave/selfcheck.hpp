#pragma once

// Fast internal consistency checks, each against an independent oracle.

#include <cstdint>
#include <string>
#include <vector>

#include "resave/kernels.hpp"

namespace resave {

struct CheckResult {
    std::string name;
    bool passed = false;
    /// Worst observed discrepancy, compared against `tolerance`.
    double error = 0.0;
    double tolerance = 0.0;
};

struct SelfcheckOptions {
    /// Kernel handed to the estimators. The oracles use their own kernel
    /// formulas (picked by id), so a perturbed constant here must be caught.
    Kernel kernel;
    std::uint64_t seed = 20240917;
};

/// recursion-vs-closed-form, weight-sum identity, batch bridge, eigen
/// reconstruction, whitening, streaming-vs-one-shot, zero predictors.
std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options = {});

}  // namespace resave
