#include "resave/kernels.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "resave/error.hpp"

namespace resave {

Kernel Kernel::from_name(std::string_view name) {
    if (name == "epanechnikov") return Kernel(KernelId::epanechnikov);
    if (name == "quartic4") return Kernel(KernelId::quartic4);
    fail(ErrorCode::invalid_argument, "unknown kernel '" + std::string(name) + "'");
}

std::string_view Kernel::name() const noexcept {
    return id_ == KernelId::epanechnikov ? "epanechnikov" : "quartic4";
}

double moment(const Kernel& kernel, int s, bool squared) {
    require(s >= 0 && s <= 8, ErrorCode::invalid_argument, "moment order must be in 0..8");
    // Integrand degree is at most 8 + 8 = 16; 10 nodes integrate degree 19 exactly.
    auto integrand = [&](double u) {
        const double k = kernel(u);
        return std::pow(u, s) * (squared ? k * k : k);
    };
    const double r = kernel.support_radius();
    return boost::math::quadrature::gauss<double, 10>::integrate(integrand, -r, r);
}

}  // namespace resave
