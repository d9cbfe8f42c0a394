#include <doctest.h>

#include "resave/error.hpp"
#include "resave/kernels.hpp"

using namespace resave;

TEST_SUITE("kernels") {

TEST_CASE("epanechnikov values") {
    const Kernel k(KernelId::epanechnikov);
    CHECK(evaluate(k, 0.0) == 0.75);
    CHECK(evaluate(k, 1.0) == 0.0);
    CHECK(evaluate(k, 2.0) == 0.0);
    CHECK(evaluate(k, 0.5) == doctest::Approx(0.5625));
    CHECK(k.nonnegative());
}

TEST_CASE("quartic4 values") {
    const Kernel k(KernelId::quartic4);
    CHECK(k(0.0) == doctest::Approx(45.0 / 32.0));
    CHECK(k(0.9) < 0.0);
    CHECK(k(-1.0) == 0.0);
    CHECK_FALSE(k.nonnegative());
}

TEST_CASE("symmetry is exact") {
    for (const Kernel k : {Kernel(KernelId::epanechnikov), Kernel(KernelId::quartic4)})
        for (double u = -1.3; u <= 1.3; u += 0.01) REQUIRE(k(u) == k(-u));
}

TEST_CASE("moments against exact integrals") {
    // exact rationals from symbolic integration
    const Kernel e(KernelId::epanechnikov);
    const double e_moments[9] = {1.0, 0.0, 1.0 / 5, 0.0, 3.0 / 35, 0.0, 1.0 / 21, 0.0, 1.0 / 33};
    for (int s = 0; s <= 8; ++s) CHECK(std::abs(moment(e, s, false) - e_moments[s]) < 1e-10);
    CHECK(std::abs(moment(e, 0, true) - 3.0 / 5) < 1e-10);

    const Kernel q(KernelId::quartic4);
    const double q_moments[9] = {1.0, 0.0, 0.0, 0.0, -1.0 / 21, 0.0, -10.0 / 231, 0.0, -5.0 / 143};
    for (int s = 0; s <= 8; ++s) CHECK(std::abs(moment(q, s, false) - q_moments[s]) < 1e-10);
    CHECK(std::abs(moment(q, 0, true) - 5.0 / 4) < 1e-10);
    CHECK(std::abs(moment(q, 2, true) - 25.0 / 308) < 1e-10);
}

TEST_CASE("odd moments vanish") {
    for (const Kernel k : {Kernel(KernelId::epanechnikov), Kernel(KernelId::quartic4)})
        for (int s : {1, 3, 5, 7}) {
            CHECK(std::abs(moment(k, s, false)) < 1e-12);
            CHECK(std::abs(moment(k, s, true)) < 1e-12);
        }
}

TEST_CASE("moment order is bounded") {
    CHECK_THROWS_AS(moment(Kernel{}, 9, false), Error);
    CHECK_THROWS_AS(moment(Kernel{}, -1, false), Error);
}

TEST_CASE("lookup by name") {
    CHECK(Kernel::from_name("epanechnikov").id() == KernelId::epanechnikov);
    CHECK(Kernel::from_name("quartic4").id() == KernelId::quartic4);
    CHECK(Kernel::from_name("quartic4").name() == "quartic4");
    CHECK_THROWS_AS(Kernel::from_name("gaussian"), Error);
}

}
