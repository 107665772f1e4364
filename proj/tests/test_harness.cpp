#include <doctest.h>

#include "bolasso/errors.hpp"
#include "bolasso/harness.hpp"
#include "bolasso/io.hpp"
#include "bolasso/lasso.hpp"
#include "test_util.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>

using namespace bolasso;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

std::string scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("bolasso_test_" + name);
    fs::remove_all(d);
    return d.string();
}

ExperimentConfig toy_config(const std::string& dir) {
    ExperimentConfig c;
    c.generator.n = 400;
    c.generator.p = 4;
    c.generator.j_count = 2;
    c.generator.covariance = CovarianceKind::identity;
    c.generator.w_min = 1.0;
    c.generator.w_max = 1.0;
    c.generator.noise_sigma = 1e-3;
    c.mu_grid = {0.08, 0.3, 4};
    c.schemes = {{"lasso", false}, {"pairs", false}, {"residuals", false}};
    c.outer_trials = 3;
    c.m_values = {1, 2, 4, 8};
    c.output_dir = dir;
    c.seed = 12;
    return c;
}

}  // namespace

TEST_CASE("csv round trip") {
    const std::string dir = scratch_dir("csv");
    fs::create_directories(dir);
    Rng rng(1);
    const Matrix M = gaussian_matrix(rng, 5, 3);
    write_csv(dir + "/m.csv", M, {"a", "b", "c"});
    const CsvTable t = read_csv(dir + "/m.csv");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    CHECK(t.values == M);
    write_csv(dir + "/nohdr.csv", M);
    CHECK(read_csv(dir + "/nohdr.csv").header.empty());
    write_text(dir + "/bad.csv", "1,2\n3,x\n");
    CHECK_THROWS_AS(read_csv(dir + "/bad.csv"), InputError);
    write_text(dir + "/ragged.csv", "1,2\n3\n");
    CHECK_THROWS_AS(read_csv(dir + "/ragged.csv"), InputError);
    CHECK_THROWS_AS(read_csv(dir + "/missing.csv"), IoError);

    Dataset d(gaussian_matrix(rng, 6, 2), gaussian_vector(rng, 6));
    write_dataset(dir + "/d.csv", d);
    const Dataset back = read_dataset(dir + "/d.csv");
    CHECK(back.X == d.X);
    CHECK(back.y == d.y);
}

TEST_CASE("path breakpoint table") {
    const std::string dir = scratch_dir("path");
    fs::create_directories(dir);
    Rng rng(2);
    Dataset d(gaussian_matrix(rng, 20, 3), gaussian_vector(rng, 20));
    const RegularizationPath path = lasso_path(d);
    write_path_table(dir + "/p.csv", path);
    const std::string text = read_text(dir + "/p.csv");
    CHECK(text.rfind("mu,active,w1,w2,w3\n", 0) == 0);
    size_t lines = 0;
    for (char ch : text) lines += ch == '\n';
    CHECK(lines == path.breakpoints().size() + 1);
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("log-spaced grid") {
    const MuGrid g{0.01, 1.0, 5};
    const auto v = g.values();
    REQUIRE(v.size() == 5);
    CHECK(v.front() == 1.0);
    CHECK(v.back() == 0.01);
    for (size_t i = 1; i < v.size(); ++i) CHECK(v[i] / v[i - 1] == doctest::Approx(std::pow(0.01, 0.25)));
}

TEST_CASE("config parsing") {
    const std::string text = R"({
        "generator": {"n": 64, "p": 8, "j_count": 2, "covariance": "identity", "noise_sigma": 0.5},
        "mu_grid": {"min": 0.01, "max": 1, "count": 8},
        "schemes": ["lasso", {"kind": "residuals", "two_step": true}],
        "outer_trials": 4, "m_values": [1, 4], "seed": 5, "workers": 2, "output_dir": "x"
    })";
    const ExperimentConfig c = config_from_json(text);
    CHECK(c.generator.p == 8);
    CHECK(c.schemes.size() == 2);
    CHECK(c.schemes[1].label() == "residuals_two_step");
    CHECK(c.workers == 2);
    ExperimentConfig other = c;
    other.workers = 7;
    other.output_dir = "elsewhere";
    CHECK(config_hash(other) == config_hash(c));
    other.seed = 6;
    CHECK(config_hash(other) != config_hash(c));
    CHECK_THROWS_AS(config_from_json(R"({"outer_trails": 3})"), InputError);
    CHECK_THROWS_AS(config_from_json(R"({"mu_grid": {"min": 1, "max": 0.5}})"), InputError);
    CHECK_THROWS_AS(config_from_json("{not json"), InputError);
    CHECK_THROWS_AS(config_from_json(R"({"m_values": [4, 2]})"), InputError);
}

TEST_CASE("selection sweep on a toy problem") {
    const std::string dir = scratch_dir("sel");
    ExperimentConfig c = toy_config(dir);
    SUBCASE("relevant rows near one, irrelevant rows near zero") {
        const SelectionSweep s = sweep_selection_probability(c);
        for (const auto* set : {&s.before, &s.after})
            for (const ProbabilityMatrix& pm : *set) {
                CHECK(pm.values.rows() == 4);
                CHECK(pm.values.cols() == 4);
                for (Eigen::Index k = 0; k < 4; ++k) {
                    CHECK(pm.values(0, k) >= 0.95);
                    CHECK(pm.values(1, k) >= 0.95);
                    CHECK(pm.values(2, k) <= 0.05);
                    CHECK(pm.values(3, k) <= 0.05);
                }
            }
        CHECK(fs::exists(dir + "/selection_pairs_before.csv"));
        CHECK(fs::exists(dir + "/selection_residuals_after.json"));
        const auto meta = nlohmann::json::parse(read_text(dir + "/selection_pairs_after.json"));
        CHECK(meta["seed"] == 12);
        CHECK(meta["config_hash"].get<std::string>().size() == 16);
    }
    SUBCASE("column above mu_max is zero; single trial and m=1 gives indicators") {
        c.mu_grid = {0.01, 1e3, 6};
        c.outer_trials = 1;
        c.m_values = {1};
        c.generator.noise_sigma = 0.5;
        const SelectionSweep s = sweep_selection_probability(c, false);
        for (size_t i = 0; i < s.before.size(); ++i) {
            CHECK(s.before[i].values.col(0).isZero(0.0));
            for (const Matrix* m : {&s.before[i].values, &s.after[i].values})
                for (Eigen::Index a = 0; a < m->size(); ++a) CHECK((m->data()[a] == 0.0 || m->data()[a] == 1.0));
        }
    }
    SUBCASE("variables in the intersection have frequency one") {
        c.outer_trials = 1;
        c.generator.noise_sigma = 2.0;
        const SelectionSweep s = sweep_selection_probability(c, false);
        for (size_t i = 0; i < s.before.size(); ++i)
            for (Eigen::Index a = 0; a < s.after[i].values.size(); ++a)
                if (s.after[i].values.data()[a] == 1.0) CHECK(s.before[i].values.data()[a] == 1.0);
    }
}

TEST_CASE("pattern sweep") {
    const std::string dir = scratch_dir("pat");
    ExperimentConfig c = toy_config(dir);
    c.generator.noise_sigma = 3.0;
    c.generator.n = 60;
    c.outer_trials = 6;
    const auto curves = sweep_pattern_probability(c);
    for (const PatternCurves& pc : curves) {
        for (Eigen::Index a = 0; a < pc.exact.size(); ++a) {
            CHECK(pc.exact.data()[a] >= 0.0);
            CHECK(pc.exact.data()[a] <= pc.superset.data()[a]);
            CHECK(pc.superset.data()[a] <= 1.0);
        }
        for (Eigen::Index a = 1; a < pc.superset.rows(); ++a)
            for (Eigen::Index k = 0; k < pc.superset.cols(); ++k) CHECK(pc.superset(a, k) <= pc.superset(a - 1, k));
    }
    const std::string text = read_text(dir + "/pattern_pairs.csv");
    CHECK(text.rfind("mu,m,probability,trials\n", 0) == 0);
    CHECK(fs::exists(dir + "/superset_residuals.csv"));
}

TEST_CASE("outputs are identical for any worker count") {
    ExperimentConfig c = toy_config(scratch_dir("w1"));
    c.generator.noise_sigma = 1.0;
    c.schemes.push_back({"split", false});
    c.schemes.push_back({"pairs", true});
    sweep_selection_probability(c);
    sweep_pattern_probability(c);
    const std::string first = c.output_dir;
    c.output_dir = scratch_dir("w3");
    c.workers = 3;
    sweep_selection_probability(c);
    sweep_pattern_probability(c);
    size_t files = 0;
    for (const auto& e : fs::directory_iterator(first)) {
        const std::string other = (fs::path(c.output_dir) / e.path().filename()).string();
        CHECK(read_text(e.path().string()) == read_text(other));
        ++files;
    }
    CHECK(files >= 10);
}

TEST_CASE("unwritable output directory fails before computing") {
    ExperimentConfig c = toy_config("/proc/bolasso_cannot_exist/out");
    CHECK_THROWS_AS(sweep_selection_probability(c), IoError);
    c.phase = {{50}, {1}, 10};
    CHECK_THROWS_AS(sweep_condition_phase(c), IoError);
}

TEST_CASE("phase sweep edge cases") {
    ExperimentConfig c = toy_config(scratch_dir("phase"));
    c.generator.p = 8;
    c.generator.covariance = CovarianceKind::identity;
    c.phase.n_values = {400};
    c.phase.j_values = {0, 1};
    c.phase.draws = 50;
    const PhaseResult r = sweep_condition_phase(c);
    CHECK(r.p_consistency(0, 0) == 1.0);
    CHECK(r.p_a6(0, 0) == 1.0);
    CHECK(r.qualifying(0, 0) == 0.0);
    CHECK(std::isnan(r.mean_log_theta(0, 0)));
    CHECK(r.p_consistency(0, 1) >= 0.95);
    CHECK(r.p_a6(0, 1) >= 0.95);
    CHECK(r.qualifying(0, 1) > 0);
    CHECK(fs::exists(c.output_dir + "/phase_a6.csv"));
    CHECK(fs::exists(c.output_dir + "/phase.json"));
}
