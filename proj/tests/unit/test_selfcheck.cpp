#include <doctest.h>

#include "resave/selfcheck.hpp"

using namespace resave;

TEST_SUITE("selfcheck") {

TEST_CASE("all checks pass on both kernels") {
    for (const Kernel k : {Kernel(KernelId::epanechnikov), Kernel(KernelId::quartic4)}) {
        SelfcheckOptions o;
        o.kernel = k;
        const auto results = run_selfcheck(o);
        CHECK(results.size() == 7);
        for (const auto& r : results) {
            CAPTURE(r.name);
            CAPTURE(r.error);
            CHECK(r.passed);
        }
    }
}

TEST_CASE("a perturbed kernel constant fails the recursion oracle") {
    SelfcheckOptions o;
    o.kernel = Kernel::with_constant(KernelId::epanechnikov, 0.75 * 1.1);
    const auto results = run_selfcheck(o);
    REQUIRE(results.front().name == "recursion-vs-closed-form");
    CHECK_FALSE(results.front().passed);
}

}
