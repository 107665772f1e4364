#include <doctest.h>

#include "bolasso/active_cholesky.hpp"
#include "bolasso/errors.hpp"
#include "bolasso/lasso.hpp"
#include "bolasso/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace bolasso;
using namespace testutil;

TEST_CASE("compute_moments on identity design") {
    Dataset d(Matrix::Identity(2, 2), Vector{{1.0, 2.0}});
    const MomentForm m = compute_moments(d);
    CHECK((m.Q() - 0.5 * Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0));
    CHECK(m.c()[0] == doctest::Approx(0.5));
    CHECK(m.c()[1] == doctest::Approx(1.0));
    CHECK(*m.lambda_min == doctest::Approx(0.5));
    CHECK(m.full_rank());
}

TEST_CASE("compute_moments flags duplicated columns") {
    Rng rng(3);
    Matrix X = gaussian_matrix(rng, 10, 3);
    X.col(2) = X.col(0);
    const MomentForm m = compute_moments(Dataset(X, gaussian_vector(rng, 10)));
    CHECK(*m.lambda_min == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(m.full_rank());
}

TEST_CASE("compute_moments matches dense multiply") {
    Rng rng(11);
    const Matrix X = gaussian_matrix(rng, 8, 4);
    const Vector y = gaussian_vector(rng, 8);
    const MomentForm m = compute_moments(Dataset(X, y));
    Matrix ref = Matrix::Zero(4, 4);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int i = 0; i < 8; ++i) ref(a, b) += X(i, a) * X(i, b) / 8.0;
    CHECK((m.Q() - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("compute_moments rejects non-finite input") {
    Matrix X = Matrix::Ones(3, 2);
    X(1, 1) = std::nan("");
    CHECK_THROWS_AS(compute_moments(Dataset(X, Vector::Ones(3))), InputError);
    CHECK_THROWS_AS(compute_moments(Dataset(Matrix::Ones(3, 2), Vector::Ones(2))), InputError);
}

TEST_CASE("orthonormal design path equals soft thresholding") {
    Rng rng(5);
    const int n = 40, p = 6;
    const Matrix X = orthonormal_design(rng, n, p);
    const Vector y = gaussian_vector(rng, n);
    const Dataset d(X, y);
    const MomentForm m = compute_moments(d);
    const RegularizationPath path = lasso_path(d);
    CHECK_FALSE(path.terminated_degenerate());
    CHECK(path.mu_end() == 0.0);
    for (int k = 0; k <= 40; ++k) {
        const double mu = path.mu_max() * 1.2 * k / 40.0;
        const Vector w = path.solve_at(mu).weights;
        const Vector ref = oracle::soft_threshold(m.c(), mu);
        CHECK((w - ref).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("zero solution above mu_max and kkt formula") {
    Rng rng(8);
    const Dataset d(gaussian_matrix(rng, 20, 5), gaussian_vector(rng, 20));
    const MomentForm m = compute_moments(d);
    const RegularizationPath path = lasso_path(d);
    const double cmax = m.c().lpNorm<Eigen::Infinity>();
    CHECK(path.mu_max() == doctest::Approx(cmax));
    CHECK(path.solve_at(cmax).weights.isZero(0.0));
    CHECK(path.solve_at(2 * cmax).support.empty());
    CHECK(kkt_check(d, cmax, Vector::Zero(5)) == doctest::Approx(0.0));
    CHECK(kkt_check(d, cmax / 2, Vector::Zero(5)) == doctest::Approx(cmax / 2));
    CHECK_THROWS_AS(kkt_check(d, 1.0, Vector::Zero(4)), InputError);
}

TEST_CASE("path agrees with proximal gradient oracle") {
    Rng rng(2024);
    for (int inst = 0; inst < 20; ++inst) {
        const Dataset d(gaussian_matrix(rng, 30, 6), gaussian_vector(rng, 30));
        const RegularizationPath path = lasso_path(d);
        for (int k = 1; k <= 10; ++k) {
            const double mu = path.mu_max() * k / 11.0;
            const LassoSolution sol = path.solve_at(mu);
            double gap = 0.0;
            const Vector ref = oracle::proximal_gradient(d.X, d.y, mu, 1e-10, &gap);
            REQUIRE(gap <= 1e-10);
            CHECK((sol.weights - ref).cwiseAbs().maxCoeff() <= 1e-6);
            CHECK(sol.kkt_residual <= 1e-8);
        }
    }
}

TEST_CASE("segments are continuous and affine") {
    Rng rng(77);
    const Dataset d(gaussian_matrix(rng, 25, 8), gaussian_vector(rng, 25));
    const RegularizationPath path = lasso_path(d);
    const auto& segs = path.segments();
    REQUIRE(segs.size() >= 2);
    for (size_t s = 0; s + 1 < segs.size(); ++s) {
        const double mu = segs[s].mu_lo;
        CHECK(segs[s + 1].mu_hi == mu);
        Vector upper = Vector::Zero(8), lower = Vector::Zero(8);
        const Vector a = segs[s].intercept + mu * segs[s].slope;
        const Vector b = segs[s + 1].intercept + mu * segs[s + 1].slope;
        for (size_t k = 0; k < segs[s].active.size(); ++k) upper[segs[s].active[k]] = a[k];
        for (size_t k = 0; k < segs[s + 1].active.size(); ++k) lower[segs[s + 1].active[k]] = b[k];
        CHECK((upper - lower).cwiseAbs().maxCoeff() <= 1e-8);
    }
    for (const auto& seg : segs) {
        const double m1 = seg.mu_lo + 0.2 * (seg.mu_hi - seg.mu_lo);
        const double m2 = seg.mu_lo + 0.9 * (seg.mu_hi - seg.mu_lo);
        for (double t : {0.0, 0.3, 0.7, 1.0}) {
            const Vector mid = path.solve_at(t * m1 + (1 - t) * m2).weights;
            const Vector lin = t * path.solve_at(m1).weights + (1 - t) * path.solve_at(m2).weights;
            CHECK((mid - lin).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("rank-deficient designs terminate degenerate") {
    Rng rng(99);
    SUBCASE("p > n") {
        const Dataset d(gaussian_matrix(rng, 5, 9), gaussian_vector(rng, 5));
        const RegularizationPath path = lasso_path(d);
        CHECK(path.terminated_degenerate());
        CHECK(path.last_support().size() <= 5);
        CHECK(path.solve_at(path.mu_end()).kkt_residual <= 1e-8);
    }
    SUBCASE("duplicated column") {
        Matrix X = gaussian_matrix(rng, 20, 4);
        X.col(3) = X.col(1);
        const Dataset d(X, gaussian_vector(rng, 20));
        const RegularizationPath path = lasso_path(d);
        CHECK(path.terminated_degenerate());
        CHECK(path.solve_at(path.mu_end()).kkt_residual <= 1e-8);
        const Support last = path.last_support();
        CHECK_FALSE((std::find(last.begin(), last.end(), 1) != last.end() &&
                     std::find(last.begin(), last.end(), 3) != last.end()));
    }
    SUBCASE("convex combination of two active columns") {
        Matrix X = gaussian_matrix(rng, 20, 4);
        X.col(3) = 0.4 * X.col(0) + 0.6 * X.col(1);
        const Dataset d(X, X.col(0) + X.col(1) + 0.3 * gaussian_vector(rng, 20));
        const RegularizationPath path = lasso_path(d);
        // The homotopy either stops where the tie becomes singular or continues on one valid branch.
        CHECK(path.terminated_degenerate());
        CHECK(path.solve_at(path.mu_end()).kkt_residual <= 1e-8);
        if (path.mu_end() > 1e-10 * std::max(1.0, path.mu_max())) CHECK_THROWS_AS(path.solve_at(path.mu_end() / 2), RangeError);
        CHECK_THROWS_AS(path.solve_at(-1.0), InputError);
    }
}

TEST_CASE("max_active and mu_floor stop the path early") {
    Rng rng(4);
    const Dataset d(gaussian_matrix(rng, 30, 8), gaussian_vector(rng, 30));
    const RegularizationPath p2 = lasso_path(d, 2);
    CHECK(p2.stop_reason() == PathStop::max_active);
    CHECK(p2.last_support().size() == 2);
    PathOptions opt;
    opt.mu_floor = 0.05;
    const RegularizationPath pf = lasso_path(d, opt);
    CHECK(pf.mu_end() == doctest::Approx(0.05));
    const RegularizationPath full = lasso_path(d);
    CHECK((pf.solve_at(0.05).weights - full.solve_at(0.05).weights).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(lasso_path(d, 9), InputError);
}

TEST_CASE("refit_ols") {
    Rng rng(6);
    const Matrix X = gaussian_matrix(rng, 4, 4);
    const Vector y = gaussian_vector(rng, 4);
    const Dataset d(X, y);
    CHECK((refit_ols(d, {0, 1, 2, 3}) - X.lu().solve(y)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(refit_ols(d, {}).isZero(0.0));

    const Matrix X2 = gaussian_matrix(rng, 30, 6);
    Vector wbar = Vector::Zero(6);
    wbar << 1.5, 0, -2.0, 0, 0.7, 0;
    const Vector w = refit_ols(Dataset(X2, X2 * wbar), {0, 2, 4});
    CHECK((w - wbar).cwiseAbs().maxCoeff() <= 1e-10);

    Matrix X3 = X2;
    X3.col(4) = 2.0 * X3.col(0);
    try {
        refit_ols(Dataset(X3, X2 * wbar), {0, 2, 4});
        FAIL("expected SingularError");
    } catch (const SingularError& e) {
        CHECK(e.indices() == std::vector<int>{0, 2, 4});
    }
}

TEST_CASE("error_bound") {
    CHECK(error_bound(make_moments(std::make_shared<Matrix>(Matrix::Identity(3, 3)), Vector::Zero(3)), 0.0, 0.0) ==
          0.0);
    const MomentForm m = make_moments(std::make_shared<Matrix>(0.5 * Matrix::Identity(4, 4)), Vector::Zero(4));
    CHECK(error_bound(m, 0.1, 0.2) == doctest::Approx(0.8));
    const MomentForm sing = make_moments(std::make_shared<Matrix>(Matrix::Ones(2, 2)), Vector::Zero(2));
    CHECK_THROWS_AS(error_bound(sing, 0.1, 0.1), SingularError);
}

TEST_CASE("error bound holds on synthetic full-rank data") {
    Rng rng(31);
    const int n = 60, p = 5;
    Vector wbar(p);
    wbar << 1.0, -0.5, 0.0, 0.0, 2.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix X = gaussian_matrix(rng, n, p);
        const Vector eps = 0.5 * gaussian_vector(rng, n);
        const Dataset d(X, X * wbar + eps);
        const MomentForm m = compute_moments(d);
        const Vector q = X.transpose() * eps / n;
        const double mu = 0.05 + 0.3 * rng.uniform();
        const Vector w = lasso_path(d).solve_at(mu).weights;
        CHECK((w - wbar).norm() <= error_bound(m, mu, q.norm()));
    }
}

TEST_CASE("ActiveCholesky append/remove matches direct factorization") {
    Rng rng(12);
    const Matrix X = gaussian_matrix(rng, 20, 7);
    const Matrix Q = X.transpose() * X / 20.0;
    ActiveCholesky ch(Q);
    for (int j : {3, 0, 5, 1, 6}) REQUIRE(ch.append(j));
    ch.remove_at(1);
    ch.remove_at(3);
    REQUIRE(ch.indices() == std::vector<int>{3, 5, 1});
    const Matrix L = ch.factor();
    const Matrix sub = submatrix(Q, ch.indices(), ch.indices());
    CHECK((L * L.transpose() - sub).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(L.isLowerTriangular(1e-14));
    const Vector rhs = Vector::Ones(3);
    CHECK((sub * ch.solve(rhs) - rhs).norm() <= 1e-12);

    Matrix Qd = Q;
    Qd.row(2) = Qd.row(4);
    Qd.col(2) = Qd.col(4);
    ActiveCholesky cd(Qd);
    REQUIRE(cd.append(4));
    CHECK_FALSE(cd.append(2));
    CHECK(cd.size() == 1);
}
