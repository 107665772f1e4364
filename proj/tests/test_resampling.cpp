#include <doctest.h>

#include "bolasso/errors.hpp"
#include "bolasso/lasso.hpp"
#include "bolasso/resampling.hpp"
#include "test_util.hpp"

#include <cmath>
#include <cstring>
#include <set>

using namespace bolasso;
using namespace testutil;

TEST_CASE("bootstrap of pairs") {
    Rng rng(11);
    SUBCASE("single row is reproduced") {
        Dataset d(Matrix::Constant(1, 3, 2.5), Vector::Constant(1, -1.0));
        const Dataset r = bootstrap_pairs(d, rng);
        CHECK(r.X == d.X);
        CHECK(r.y == d.y);
    }
    SUBCASE("same seed gives the same replicate") {
        Dataset d(gaussian_matrix(rng, 20, 4), gaussian_vector(rng, 20));
        Rng a = replication_stream(5, 3), b = replication_stream(5, 3);
        const Dataset ra = bootstrap_pairs(d, a), rb = bootstrap_pairs(d, b);
        CHECK(std::memcmp(ra.X.data(), rb.X.data(), sizeof(double) * ra.X.size()) == 0);
        CHECK(std::memcmp(ra.y.data(), rb.y.data(), sizeof(double) * ra.y.size()) == 0);
    }
    SUBCASE("rows are copied as pairs") {
        Matrix X(5, 2);
        for (int i = 0; i < 5; ++i) X.row(i) << i, 10 * i;
        Dataset d(X, Vector::LinSpaced(5, 0, 4));
        const Dataset r = bootstrap_pairs(d, rng);
        for (int i = 0; i < 5; ++i) {
            CHECK(r.X(i, 1) == 10 * r.X(i, 0));
            CHECK(r.y[i] == r.X(i, 0));
        }
    }
}

TEST_CASE("per-row inclusion frequency of the pairs bootstrap") {
    const int n = 10, reps = 40000;
    std::vector<int> hits(n, 0);
    for (int r = 0; r < reps; ++r) {
        Rng rng = replication_stream(2024, static_cast<uint64_t>(r));
        std::set<int> seen;
        for (int i : bootstrap_indices(n, rng)) seen.insert(i);
        for (int i : seen) ++hits[static_cast<size_t>(i)];
    }
    const double expected = 1.0 - std::pow(0.9, 10);
    for (int i = 0; i < n; ++i) CHECK(std::abs(hits[static_cast<size_t>(i)] / double(reps) - expected) <= 0.01);
}

TEST_CASE("compute_residuals") {
    Rng rng(3);
    SUBCASE("exact interpolant leaves no residual") {
        const Matrix X = gaussian_matrix(rng, 5, 5);
        const Vector w = gaussian_vector(rng, 5);
        Dataset d(X, X * w);
        const Vector w_fit = X.fullPivLu().solve(d.y);
        const ResidualSet r = compute_residuals(d, w_fit);
        CHECK(r.raw.cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(r.mean) < 1e-10);
    }
    SUBCASE("zero weights give the response") {
        Dataset d(gaussian_matrix(rng, 7, 2), gaussian_vector(rng, 7));
        const ResidualSet r = compute_residuals(d, Vector::Zero(2));
        CHECK(r.raw == d.y);
        CHECK(r.mean == doctest::Approx(d.y.mean()).epsilon(1e-14));
    }
    SUBCASE("matches direct evaluation and is centered") {
        Dataset d(gaussian_matrix(rng, 30, 4), gaussian_vector(rng, 30));
        const Vector w = gaussian_vector(rng, 4);
        const ResidualSet r = compute_residuals(d, w);
        for (int i = 0; i < 30; ++i) {
            double direct = d.y[i];
            for (int j = 0; j < 4; ++j) direct -= d.X(i, j) * w[j];
            CHECK(std::abs(r.raw[i] - direct) <= 1e-12);
            CHECK(r.centered[i] == doctest::Approx(direct - r.mean));
        }
        CHECK(std::abs(r.centered.sum()) <= 1e-10 * 30 * std::max(1.0, r.raw.cwiseAbs().maxCoeff()));
    }
    SUBCASE("dimension mismatch") {
        Dataset d(gaussian_matrix(rng, 4, 2), gaussian_vector(rng, 4));
        CHECK_THROWS_AS(compute_residuals(d, Vector::Zero(3)), InputError);
    }
}

TEST_CASE("bootstrap of residuals") {
    Rng rng(8);
    const Matrix X = gaussian_matrix(rng, 25, 3);
    SUBCASE("zero residuals reproduce the fit") {
        const Vector w = gaussian_vector(rng, 3);
        Dataset d(X, X * w);
        Rng r(1);
        const Dataset rep = bootstrap_residuals(d, w, r);
        CHECK(rep.y == X * w);
    }
    SUBCASE("design untouched and deterministic") {
        Dataset d(X, gaussian_vector(rng, 25));
        const Matrix before = d.X;
        const Vector w = gaussian_vector(rng, 3);
        Rng a(4), b(4);
        const Dataset ra = bootstrap_residuals(d, w, a), rb = bootstrap_residuals(d, w, b);
        CHECK(std::memcmp(ra.X.data(), before.data(), sizeof(double) * before.size()) == 0);
        CHECK(std::memcmp(d.X.data(), before.data(), sizeof(double) * before.size()) == 0);
        CHECK(ra.y == rb.y);
    }
}

TEST_CASE("residual bootstrap first moment: E[q* | eps] = q + mu Q alpha_hat") {
    Rng rng(77);
    const int n = 60, p = 4, reps = 100000;
    const Matrix X = gaussian_matrix(rng, n, p);
    const Vector w_true{{1.0, -0.5, 0.0, 0.0}};
    const Vector eps = 0.7 * gaussian_vector(rng, n);
    Dataset d(X, X * w_true + eps);
    const MomentForm mom = compute_moments(d);
    const RegularizationPath path = lasso_path(mom);
    const double mu = 0.3 * path.mu_max();
    const LassoSolution sol = path.solve_at(mu);
    const Vector q = X.transpose() * eps / n;
    const Vector expected = q + mu * mom.Q() * alpha_hat(mom, sol);

    Vector sum = Vector::Zero(p), sumsq = Vector::Zero(p);
    for (int r = 0; r < reps; ++r) {
        Rng rr = replication_stream(31, static_cast<uint64_t>(r));
        const Dataset rep = bootstrap_residuals(d, sol.weights, rr);
        const Vector q_star = X.transpose() * (rep.y - X * w_true) / n;
        sum += q_star;
        sumsq += q_star.cwiseProduct(q_star);
    }
    const Vector mean = sum / reps;
    for (int j = 0; j < p; ++j) {
        const double var = sumsq[j] / reps - mean[j] * mean[j];
        const double se = std::sqrt(var / reps);
        CHECK(std::abs(mean[j] - expected[j]) <= 3.0 * se);
    }
}

TEST_CASE("split_pieces") {
    Rng rng(9);
    Dataset d(gaussian_matrix(rng, 10, 2), gaussian_vector(rng, 10));
    SUBCASE("one piece is a permutation") {
        Rng r(2);
        const SplitResult s = split_pieces(d, 1, r);
        REQUIRE(s.pieces.size() == 1);
        CHECK(s.dropped == 0);
        std::multiset<double> a(d.y.data(), d.y.data() + 10), b(s.pieces[0].y.data(), s.pieces[0].y.data() + 10);
        CHECK(a == b);
    }
    SUBCASE("n=10, m=3") {
        Rng r(2);
        const SplitResult s = split_pieces(d, 3, r);
        REQUIRE(s.pieces.size() == 3);
        CHECK(s.dropped == 1);
        std::set<int> all;
        size_t total = 0;
        for (size_t k = 0; k < 3; ++k) {
            CHECK(s.pieces[k].rows() == 3);
            for (size_t i = 0; i < s.rows[k].size(); ++i) {
                const int row = s.rows[k][i];
                CHECK(s.pieces[k].y[static_cast<Eigen::Index>(i)] == d.y[row]);
                all.insert(row);
                ++total;
            }
        }
        CHECK(all.size() == total);
    }
    SUBCASE("more pieces than rows") {
        Rng r(2);
        CHECK_THROWS_AS(split_pieces(d, 11, r), InputError);
    }
}

TEST_CASE("oracle noise replicates") {
    Rng rng(12);
    const Matrix X = gaussian_matrix(rng, 15, 3);
    const Vector w{{1.0, 0.0, -2.0}};
    SUBCASE("zero variance") {
        Rng r(1);
        CHECK(oracle_noise_replicate(X, w, gaussian_noise(0.0), r).y == X * w);
    }
    SUBCASE("deterministic") {
        Rng a(6), b(6);
        CHECK(oracle_noise_replicate(X, w, gaussian_noise(1.0), a).y ==
              oracle_noise_replicate(X, w, gaussian_noise(1.0), b).y);
    }
    SUBCASE("sample variance") {
        const double sigma = 1.7;
        const NoiseSampler noise = gaussian_noise(sigma);
        Rng r(99);
        double s = 0, s2 = 0;
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) {
            const double e = noise(r);
            s += e;
            s2 += e * e;
        }
        const double var = s2 / draws - (s / draws) * (s / draws);
        CHECK(std::abs(var / (sigma * sigma) - 1.0) <= 0.02);
    }
}

TEST_CASE("scheme names") {
    CHECK(parse_scheme_kind("pairs") == SchemeKind::pairs);
    CHECK(parse_scheme_kind("noise") == SchemeKind::oracle_noise);
    CHECK(std::string(to_string(SchemeKind::residuals)) == "residuals");
    CHECK_THROWS_AS(parse_scheme_kind("jackknife"), InputError);
    ReplicationScheme s;
    s.replications = 0;
    CHECK_THROWS_AS(s.validate(), InputError);
}
