#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "resave/error.hpp"
#include "resave/linalg.hpp"
#include "resave/rng.hpp"

using namespace resave;

namespace {

SymMatrix random_spd(Rng& rng, std::size_t d) {
    Matrix a(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.normal();
    SymMatrix m(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            double s = i == j ? 0.05 : 0.0;
            for (std::size_t k = 0; k < d; ++k) s += a(i, k) * a(j, k);
            m(i, j) = s;
        }
    return m;
}

double dense_dist(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
    return std::sqrt(s);
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("packed storage is symmetric by construction") {
    SymMatrix m(3);
    m(2, 0) = 4.0;
    CHECK(m(0, 2) == 4.0);
    CHECK(SymMatrix::packed_index(3, 1, 2) == SymMatrix::packed_index(3, 2, 1));
    CHECK(m.packed().size() == 6);
}

TEST_CASE("eigen of identity and diagonals") {
    const SymEigen e = sym_eigen(SymMatrix::identity(4));
    for (double v : e.values) CHECK(v == 1.0);
    CHECK(dense_dist(e.vectors, Matrix::identity(4)) == 0.0);

    SymMatrix m(2);
    m(0, 0) = 4.0;
    m(1, 1) = 9.0;
    const SymEigen f = sym_eigen(m);
    CHECK(f.values[0] == 9.0);
    CHECK(f.values[1] == 4.0);
}

TEST_CASE("eigen of [[2,1],[1,2]]") {
    SymMatrix m(2);
    m(0, 0) = 2.0;
    m(0, 1) = 1.0;
    m(1, 1) = 2.0;
    const SymEigen e = sym_eigen(m);
    // roots of t^2 - 4t + 3
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(std::abs(e.vectors(0, 0)) - std::sqrt(0.5)) < 1e-14);
    CHECK(e.vectors(0, 0) * e.vectors(1, 0) > 0.0);
    CHECK(e.vectors(0, 1) * e.vectors(1, 1) < 0.0);
}

TEST_CASE("random SPD reconstruction and orthonormality") {
    Rng rng(42);
    for (std::size_t d = 1; d <= 12; ++d) {
        const SymMatrix m = random_spd(rng, d);
        const SymEigen e = sym_eigen(m);
        Matrix dv(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) dv(i, j) = e.vectors(i, j) * e.values[j];
        const Matrix rec = dv * e.vectors.transposed();
        CAPTURE(d);
        CHECK(dense_dist(rec, m.to_dense()) < 1e-9 * m.frobenius_norm());
        CHECK(dense_dist(e.vectors.transposed() * e.vectors, Matrix::identity(d)) < 1e-10);
        CHECK(std::is_sorted(e.values.rbegin(), e.values.rend()));
    }
}

TEST_CASE("eigen rejects non-finite input") {
    SymMatrix m(2);
    m(0, 1) = NAN;
    CHECK_THROWS_AS(sym_eigen(m), Error);
}

TEST_CASE("inv_sqrt") {
    CHECK(dense_dist(inv_sqrt(SymMatrix::identity(3)).to_dense(), Matrix::identity(3)) < 1e-15);
    SymMatrix m(2);
    m(0, 0) = 4.0;
    m(1, 1) = 9.0;
    const SymMatrix a = inv_sqrt(m);
    CHECK(a(0, 0) == doctest::Approx(0.5));
    CHECK(a(1, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(a(0, 1) == 0.0);

    Rng rng(3);
    for (std::size_t d = 1; d <= 10; ++d) {
        const SymMatrix s = random_spd(rng, d);
        const Matrix w = inv_sqrt(s).to_dense();
        const Matrix sd = s.to_dense();
        CHECK(dense_dist(w * sd * w, Matrix::identity(d)) < 1e-8);
        CHECK(dense_dist(w * sd, sd * w) < 1e-8 * s.frobenius_norm());
    }
}

TEST_CASE("inv_sqrt rejects singular matrices") {
    SymMatrix m(2);
    m(0, 0) = 1.0;
    m(0, 1) = 1.0;
    m(1, 1) = 1.0;
    try {
        inv_sqrt(m);
        FAIL("expected singular-covariance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::singular_covariance);
    }
}

TEST_CASE("sample covariance small cases") {
    const std::vector<Vector> two{{0.0}, {2.0}};
    const CovarianceEstimate c = sample_covariance(two);
    CHECK(c.mean[0] == 1.0);
    CHECK(c.cov(0, 0) == 2.0);

    const std::vector<Vector> same(5, Vector{1.5, -2.0});
    const CovarianceEstimate z = sample_covariance(same);
    for (double v : z.cov.packed()) CHECK(v == 0.0);

    const std::vector<Vector> few{{1.0, 2.0}, {3.0, 4.0}};
    try {
        sample_covariance(few);
        FAIL("expected insufficient-data");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::insufficient_data);
    }
}

TEST_CASE("sample covariance of a large normal sample") {
    Rng rng(17);
    std::vector<Vector> rows(10000, Vector(5));
    for (auto& r : rows)
        for (double& v : r) v = rng.normal();
    const CovarianceEstimate c = sample_covariance(rows);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(c.cov(i, j) - (i == j ? 1.0 : 0.0)) < 0.1);

    // whitened covariance is the identity
    const SymMatrix a = inv_sqrt(c.cov);
    std::vector<Vector> white;
    for (const auto& r : rows) {
        Vector centered(5);
        for (std::size_t j = 0; j < 5; ++j) centered[j] = r[j] - c.mean[j];
        white.push_back(a * centered);
    }
    const CovarianceEstimate w = sample_covariance(white);
    CHECK(dense_dist(w.cov.to_dense(), Matrix::identity(5)) < 1e-10);

    std::vector<Vector> perm = rows;
    std::reverse(perm.begin(), perm.end());
    std::rotate(perm.begin(), perm.begin() + 1234, perm.end());
    const CovarianceEstimate p = sample_covariance(perm);
    CHECK(testing::max_abs_diff(p.cov.packed(), c.cov.packed()) < 1e-12);
}

TEST_CASE("running covariance matches the two-pass estimate") {
    Rng rng(9);
    std::vector<Vector> rows(300, Vector(4));
    for (auto& r : rows)
        for (double& v : r) v = 3.0 + 2.0 * rng.normal();
    RunningCovariance run(4);
    for (const auto& r : rows) run.add(r);
    const CovarianceEstimate a = run.estimate();
    const CovarianceEstimate b = sample_covariance(rows);
    CHECK(testing::max_abs_diff(a.mean, b.mean) < 1e-12);
    CHECK(testing::max_abs_diff(a.cov.packed(), b.cov.packed()) < 1e-11);
    CHECK_THROWS_AS(RunningCovariance(4).estimate(), Error);
}

}
