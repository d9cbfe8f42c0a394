#pragma once

#include <string>
#include <string_view>

namespace resave {

enum class KernelId { epanechnikov, quartic4 };

/// Compactly supported polynomial smoothing kernel on [-1, 1].
///
/// epanechnikov: 0.75 (1 - u^2), second order, nonnegative.
/// quartic4:     (15/32)(1 - u^2)(3 - 7 u^2), fourth order (its second
///               moment vanishes), negative near the edges of the support.
class Kernel {
public:
    constexpr Kernel() = default;
    constexpr explicit Kernel(KernelId id) : id_(id), constant_(default_constant(id)) {}

    static Kernel from_name(std::string_view name);

    /// Test hook: same kernel shape with a perturbed leading constant.
    static constexpr Kernel with_constant(KernelId id, double constant) {
        Kernel k(id);
        k.constant_ = constant;
        return k;
    }

    constexpr KernelId id() const noexcept { return id_; }
    constexpr double constant() const noexcept { return constant_; }
    constexpr double support_radius() const noexcept { return 1.0; }
    constexpr bool nonnegative() const noexcept { return id_ == KernelId::epanechnikov; }
    std::string_view name() const noexcept;

    constexpr double operator()(double u) const noexcept {
        if (!(u > -1.0 && u < 1.0)) return 0.0;
        const double u2 = u * u;
        if (id_ == KernelId::epanechnikov) return constant_ * (1.0 - u2);
        return constant_ * (1.0 - u2) * (3.0 - 7.0 * u2);
    }

    friend constexpr bool operator==(const Kernel&, const Kernel&) = default;

private:
    static constexpr double default_constant(KernelId id) noexcept {
        return id == KernelId::epanechnikov ? 0.75 : 15.0 / 32.0;
    }

    KernelId id_ = KernelId::epanechnikov;
    double constant_ = 0.75;
};

inline double evaluate(const Kernel& kernel, double u) noexcept { return kernel(u); }

/// int u^s K(u) du (or int u^s K(u)^2 du) by Gauss-Legendre quadrature over
/// the support; exact up to rounding for these polynomial kernels. s <= 8.
double moment(const Kernel& kernel, int s, bool squared);

}  // namespace resave
