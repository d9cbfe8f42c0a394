#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "resave/error.hpp"
#include "resave/experiments.hpp"
#include "resave/save_estimator.hpp"

using namespace resave;

namespace {

// The averaged expression written out term by term, without matrix products.
SymMatrix literal_save(std::size_t d, std::span<const double> rows) {
    const std::size_t w = moment_width(d);
    const std::size_t n = rows.size() / w;
    SymMatrix out(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = rows.data() + i * w;
        auto r = [&](std::size_t k) { return row[1 + k]; };
        auto R = [&](std::size_t k, std::size_t l) { return row[1 + d + SymMatrix::packed_index(d, k, l)]; };
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = k; l < d; ++l) {
                double v = (k == l ? 1.0 : 0.0) - 2.0 * (R(k, l) - r(k) * r(l));
                for (std::size_t j = 0; j < d; ++j)
                    v += R(k, j) * R(j, l) - R(k, j) * r(j) * r(l) - r(k) * r(j) * R(j, l) + r(k) * r(l) * r(j) * r(j);
                out(k, l) += v / static_cast<double>(n);
            }
    }
    return out;
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::numerical_failure;
}

FitOptions identity_options(std::size_t d) {
    FitOptions o;
    o.whitening = Whitening::identity(d);
    return o;
}

}  // namespace

TEST_SUITE("save_estimator") {

TEST_CASE("truncate_density") {
    CHECK(truncate_density(0.001, 0.05) == 0.05);
    CHECK(truncate_density(0.3, 0.05) == 0.3);
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        const double f = rng.uniform(), fh = rng.uniform() * 1.2 - 0.1, b = 0.05;
        REQUIRE(std::abs(truncate_density(fh, b) - truncate_density(f, b)) <= std::abs(fh - f));
    }
}

TEST_CASE("ratios never divide by less than b_n") {
    const std::vector<double> rows{0.01, 0.2, 0.3, /**/ 0.5, 0.2, 0.3};
    const RatioEstimates r = compute_ratios(1, rows, 0.05);
    CHECK(r.f_trunc(0) == 0.05);
    CHECK(r.r_hat(0)[0] == doctest::Approx(4.0));
    CHECK(r.R_hat(0, 0, 0) == doctest::Approx(6.0));
    CHECK(r.f_trunc(1) == 0.5);
    CHECK(r.r_hat(1)[0] == doctest::Approx(0.4));
}

TEST_CASE("assemble: zero ratios give the identity") {
    const RatioEstimates r(3, 0.05, std::vector<double>(7 * moment_width(3), 0.0));
    const SaveMatrix s = assemble_save(r);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l) CHECK(s.lambda(k, l) == (k == l ? 1.0 : 0.0));
    CHECK(s.n == 7);
}

TEST_CASE("assemble: single point with r = 0, R = 1 gives 0") {
    const RatioEstimates r(1, 0.05, {1.0, 0.0, 1.0});
    CHECK(assemble_save(r).lambda(0, 0) == 0.0);
}

TEST_CASE("assemble matches the literal formula") {
    Rng rng(19);
    for (std::size_t d : {1u, 2u, 5u, 6u}) {
        std::vector<double> rows(40 * moment_width(d));
        for (double& v : rows) v = rng.normal();
        const RatioEstimates r(d, 0.05, rows);
        const SaveMatrix s = assemble_save(r);
        const SymMatrix oracle = literal_save(d, rows);
        CAPTURE(d);
        CHECK(testing::max_abs_diff(s.lambda.packed(), oracle.packed()) < 1e-12);
    }
    CHECK(code_of([] { assemble_save(RatioEstimates(2, 0.05, {})); }) == ErrorCode::no_data);
}

TEST_CASE("extract_directions") {
    SaveMatrix diag{2, 1, 0.05, SymMatrix(2)};
    diag.lambda(0, 0) = 3.0;
    diag.lambda(1, 1) = 1.0;
    const EdrEstimate a = extract_directions(diag, 1);
    CHECK(a.eigenvalues[0] == 3.0);
    CHECK(a.direction(0) == Vector{1.0, 0.0});
    CHECK(a.directions_original_scale.cols() == 1);

    SaveMatrix m{2, 1, 0.05, SymMatrix(2)};
    m.lambda(0, 0) = 2.0;
    m.lambda(0, 1) = 1.0;
    m.lambda(1, 1) = 2.0;
    const EdrEstimate b = extract_directions(m, 2, SymMatrix::identity(2));
    const double s = std::sqrt(0.5);
    CHECK(b.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(b.eigenvalues[1] == doctest::Approx(1.0));
    CHECK(std::abs(b.direction(0)[0] - s) < 1e-14);
    CHECK(std::abs(b.direction(0)[1] - s) < 1e-14);
    CHECK(std::abs(std::abs(b.direction(1)[0]) - s) < 1e-14);
    CHECK(b.direction(1)[0] == -b.direction(1)[1]);
    CHECK(testing::max_abs_diff(b.direction_original(1), b.direction(1)) < 1e-15);

    CHECK(code_of([&] { extract_directions(m, 3); }) == ErrorCode::invalid_argument);
    CHECK(code_of([&] { extract_directions(m, 0); }) == ErrorCode::invalid_argument);
}

TEST_CASE("back-transform maps to the original scale") {
    SaveMatrix m{2, 1, 0.05, SymMatrix(2)};
    m.lambda(0, 0) = 1.0;
    m.lambda(1, 1) = 5.0;
    SymMatrix a(2);
    a(0, 0) = 2.0;
    a(1, 1) = 0.5;
    a(0, 1) = 0.5;
    const EdrEstimate e = extract_directions(m, 1, a);
    // e_2 -> A e_2 = (0.5, 0.5), normalized
    CHECK(e.direction_original(0)[0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(e.direction_original(0)[1] == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("fix_sign makes the largest component positive") {
    Vector v{0.1, -0.9, 0.3};
    fix_sign(v);
    CHECK(v == Vector{-0.1, 0.9, -0.3});
}

TEST_CASE("zero predictors give the identity exactly") {
    Rng rng(3);
    std::vector<Observation> data(50);
    for (auto& obs : data) obs = {rng.normal(), Vector(4, 0.0)};
    for (const FitResult& f : {fit_recursive(data, identity_options(4)), fit_batch(data, identity_options(4))})
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t l = 0; l < 4; ++l) CHECK(f.save.lambda(k, l) == (k == l ? 1.0 : 0.0));
    // standardizing a constant column is impossible
    FitOptions standardize;
    CHECK(code_of([&] { fit_recursive(data, standardize); }) == ErrorCode::singular_covariance);
}

TEST_CASE("too few observations") {
    Rng rng(3);
    const auto data = testing::random_data(rng, 5, 5);
    CHECK(code_of([&] { fit_recursive(data, FitOptions{}); }) == ErrorCode::insufficient_data);
    CHECK(code_of([&] { fit_batch(data, FitOptions{}); }) == ErrorCode::insufficient_data);
    CHECK(code_of([&] { fit_recursive({}, FitOptions{}); }) == ErrorCode::insufficient_data);
}

TEST_CASE("equal weights and constant bandwidth bridge the two pipelines") {
    Rng rng(55);
    const auto data = testing::random_data(rng, 200, 5);
    FitOptions o;
    o.plan.fixed_bandwidth = 0.4;
    for (bool standardize : {false, true}) {
        o.standardize = standardize;
        const FitResult r = fit_recursive(data, o);
        const FitResult b = fit_batch(data, 0.4, o);
        CAPTURE(standardize);
        CHECK(testing::max_abs_diff(r.save.lambda.packed(), b.save.lambda.packed()) < 1e-10);
        CHECK(r.save.b_n == b.save.b_n);
    }
}

TEST_CASE("update_fit equals a one-shot fit on the concatenation") {
    Rng rng(61);
    const auto data = testing::random_data(rng, 300, 5);
    const std::span<const Observation> all(data);
    for (bool standardize : {true, false}) {
        FitOptions o;
        o.standardize = standardize;
        StreamingFit bundle = StreamingFit::fit(all.first(100), o);
        double worst = 0.0;
        for (std::size_t n = 100; n < 300; ++n) {
            const FitResult u = update_fit(bundle, data[n]);
            if (n % 40 == 0 || n == 299) {
                const FitResult f = fit_recursive(all.first(n + 1), o);
                worst = std::max(worst, testing::max_abs_diff(u.save.lambda.packed(), f.save.lambda.packed()));
                CHECK(u.save.n == n + 1);
                CHECK(u.save.b_n == truncation_level(n + 1, o.plan));
            }
        }
        CAPTURE(standardize);
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("update_fit rejects a dimension mismatch") {
    Rng rng(6);
    const auto data = testing::random_data(rng, 30, 3);
    StreamingFit bundle = StreamingFit::fit(data, FitOptions{});
    CHECK(code_of([&] { update_fit(bundle, {0.0, {1.0, 2.0}}); }) == ErrorCode::invalid_argument);
    CHECK(bundle.state().size() == 30);
}

TEST_CASE("whitening the moments equals whitening the observations") {
    Rng rng(71);
    auto data = testing::random_data(rng, 150, 3);
    for (auto& obs : data) {
        obs.x[0] = 2.0 + 3.0 * obs.x[0] + obs.x[1];
        obs.x[2] = -1.0 + 0.5 * obs.x[2];
    }
    std::vector<Vector> xs;
    for (const auto& obs : data) xs.push_back(obs.x);
    const Whitening w = Whitening::from_sample(xs);

    std::vector<Observation> white;
    for (const auto& obs : data) white.push_back(w.apply(obs));

    const Kernel k;
    const auto raw_rows = batch_estimates_at_samples(data, 0.5, k);
    const auto white_rows = batch_estimates_at_samples(white, 0.5, k);
    CHECK(testing::max_rel_diff(whiten_moment_rows(3, raw_rows, w), white_rows) < 1e-11);

    FitOptions explicit_w;
    explicit_w.whitening = w;
    const FitResult a = fit_recursive(data, explicit_w);
    const FitResult b = fit_recursive(white, identity_options(3));
    CHECK(testing::max_abs_diff(a.save.lambda.packed(), b.save.lambda.packed()) < 1e-10);
    // standardize = true uses the same sample whitening
    const FitResult c = fit_recursive(data, FitOptions{});
    CHECK(testing::max_abs_diff(c.save.lambda.packed(), b.save.lambda.packed()) < 1e-10);
    const FitResult d = fit_batch(data, FitOptions{});
    const FitResult e = fit_batch(white, identity_options(3));
    CHECK(testing::max_abs_diff(d.save.lambda.packed(), e.save.lambda.packed()) < 1e-10);
}

TEST_CASE("streaming whitening tracks every row seen") {
    Rng rng(72);
    auto data = testing::random_data(rng, 120, 2);
    for (auto& obs : data) obs.x[1] = 5.0 + 2.0 * obs.x[1];
    const std::span<const Observation> all(data);
    StreamingFit bundle = StreamingFit::fit(all.first(50), FitOptions{});
    for (const auto& obs : all.subspan(50)) bundle.update(obs);
    std::vector<Vector> xs;
    for (const auto& obs : data) xs.push_back(obs.x);
    const Whitening expect = Whitening::from_sample(xs);
    const Whitening got = bundle.whitening();
    CHECK(bundle.tracks_covariance());
    CHECK(testing::max_abs_diff(got.mean, expect.mean) < 1e-12);
    CHECK(testing::max_abs_diff(got.inv_sqrt.packed(), expect.inv_sqrt.packed()) < 1e-10);

    FitOptions fixed;
    fixed.whitening = expect;
    CHECK_FALSE(StreamingFit::fit(data, fixed).tracks_covariance());
}

TEST_CASE("lambda is exactly symmetric and finite") {
    Rng rng(90);
    const auto data = testing::random_data(rng, 120, 4);
    const FitResult f = fit_recursive(data, FitOptions{});
    const Matrix dense = f.save.lambda.to_dense();
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l) {
            CHECK(dense(k, l) == dense(l, k));
            CHECK(std::isfinite(dense(k, l)));
        }
    CHECK(std::is_sorted(f.edr.eigenvalues.rbegin(), f.edr.eigenvalues.rend()));
}

TEST_CASE("eigenvectors are orthonormal") {
    Rng rng(91);
    const auto data = testing::random_data(rng, 200, 6);
    FitOptions o;
    o.N = 6;
    const FitResult f = fit_batch(data, o);
    const Matrix vtv = f.edr.eigenvectors.transposed() * f.edr.eigenvectors;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) CHECK(std::abs(vtv(i, j) - (i == j ? 1.0 : 0.0)) < 1e-10);
    for (std::size_t j = 0; j < 6; ++j) {
        const Vector v = f.edr.direction_original(j);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        CHECK(norm == doctest::Approx(1.0));
    }
}

TEST_CASE("model 1, n0 = 100, p = 400: leading direction found") {
    Rng rng = Rng::stream(7, 0);
    const ModelSpec model = ModelSpec::make(ModelId::model1);
    const auto data = generate(model, 500, rng);
    const Vector beta = estimate_direction(data, 100, Estimator::save_r, FitOptions{});
    CHECK(r_squared(beta, model.beta_true) >= 0.98);
}

TEST_CASE("independent X and Y: no dominant direction") {
    Rng rng(2000);
    std::vector<Observation> noise(2000);
    for (auto& obs : noise) obs = {rng.normal(), {rng.normal(), rng.normal()}};
    const FitResult f = fit_recursive(noise, FitOptions{});

    const ModelSpec model = ModelSpec::make(ModelId::model1);
    const auto signal = generate(model, 2000, rng);
    const FitResult g = fit_recursive(signal, FitOptions{});
    MESSAGE("independent eigenvalues " << f.edr.eigenvalues[0] << ", " << f.edr.eigenvalues[1]
                                       << "; model 1 leading " << g.edr.eigenvalues[0]);
    CHECK(f.edr.eigenvalues[0] < 0.25 * g.edr.eigenvalues[0]);
}

}
