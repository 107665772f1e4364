#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bolasso/bolasso.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

bl_dataset* small_dataset() {
    // y = 2 x1 - x2 exactly on a 6 x 3 design.
    const double X[] = {1, 0, 0.5, 0, 1, 0.2, 1, 1, -0.3, 2, -1, 0.1, -1, 2, 0.7, 0.5, 0.5, -0.4};
    double y[6];
    for (int i = 0; i < 6; ++i) y[i] = 2 * X[3 * i] - X[3 * i + 1];
    bl_dataset* d = nullptr;
    REQUIRE(bl_dataset_create(X, y, 6, 3, &d) == BL_OK);
    return d;
}

}  // namespace

TEST_CASE("dataset handles") {
    bl_dataset* d = small_dataset();
    int64_t n = 0, p = 0;
    CHECK(bl_dataset_shape(d, &n, &p) == BL_OK);
    CHECK(n == 6);
    CHECK(p == 3);
    const fs::path dir = fs::temp_directory_path() / "bolasso_capi";
    fs::create_directories(dir);
    const std::string file = (dir / "d.csv").string();
    CHECK(bl_dataset_save_csv(d, file.c_str()) == BL_OK);
    bl_dataset* back = nullptr;
    CHECK(bl_dataset_load_csv(file.c_str(), &back) == BL_OK);
    CHECK(bl_dataset_shape(back, &n, &p) == BL_OK);
    CHECK(p == 3);
    bl_dataset_free(back);
    bl_dataset_free(d);
    bl_dataset_free(nullptr);
}

TEST_CASE("errors carry codes and messages") {
    bl_dataset* d = nullptr;
    const double bad[] = {1.0, NAN};
    const double y[] = {1.0, 2.0};
    CHECK(bl_dataset_create(bad, y, 2, 1, &d) == BL_ERR_INPUT);
    CHECK(std::strlen(bl_last_error()) > 0);
    CHECK(d == nullptr);
    CHECK(bl_dataset_load_csv("/nonexistent/file.csv", &d) == BL_ERR_IO);
    CHECK(std::string(bl_status_name(BL_ERR_RANGE)) == "range_error");
    CHECK(bl_dataset_shape(nullptr, nullptr, nullptr) == BL_ERR_INPUT);
}

TEST_CASE("path through the C API") {
    bl_dataset* d = small_dataset();
    bl_path* path = nullptr;
    REQUIRE(bl_path_compute(d, -1, 0.0, &path) == BL_OK);
    double mu_max = 0, mu_end = 0;
    int64_t bps = 0;
    int degenerate = 1;
    CHECK(bl_path_info(path, &mu_max, &mu_end, &bps, &degenerate) == BL_OK);
    CHECK(mu_max > 0);
    CHECK(degenerate == 0);
    double w[3], kkt = 1;
    CHECK(bl_path_solve(path, 0.0, w, 3, &kkt) == BL_OK);
    CHECK(w[0] == doctest::Approx(2.0));
    CHECK(w[1] == doctest::Approx(-1.0));
    CHECK(std::abs(w[2]) < 1e-9);
    CHECK(kkt <= 1e-8);
    CHECK(bl_path_solve(path, mu_max * 2, w, 3, nullptr) == BL_OK);
    CHECK(w[0] == 0.0);
    CHECK(bl_path_solve(path, 0.1, w, 2, nullptr) == BL_ERR_INPUT);
    CHECK(bl_path_solve(path, -1.0, w, 3, nullptr) == BL_ERR_INPUT);
    bl_path_free(path);
    bl_path* floored = nullptr;
    REQUIRE(bl_path_compute(d, -1, 0.5 * mu_max, &floored) == BL_OK);
    CHECK(bl_path_solve(floored, 0.1 * mu_max, w, 3, nullptr) == BL_ERR_RANGE);
    bl_path_free(floored);
    bl_dataset_free(d);
}

TEST_CASE("selection through the C API") {
    bl_dataset* d = small_dataset();
    bl_selection* sel = nullptr;
    REQUIRE(bl_selection_run(d, 0.01, "residuals", 4, 9, 0, 1, &sel) == BL_OK);
    int32_t idx[3];
    int64_t count = 0;
    CHECK(bl_selection_intersection(sel, idx, 3, &count) == BL_OK);
    CHECK(count >= 2);
    double f[3], w[3];
    int ok = 0;
    CHECK(bl_selection_frequencies(sel, f, 3) == BL_OK);
    CHECK(bl_selection_refit(sel, w, 3, &ok) == BL_OK);
    CHECK(ok == 1);
    CHECK(std::string(bl_selection_manifest(sel)).find("\"intersection\"") != std::string::npos);
    bl_selection_free(sel);
    CHECK(bl_selection_run(d, 0.01, "bogus", 4, 9, 0, 1, &sel) == BL_ERR_INPUT);
    bl_dataset_free(d);
}

TEST_CASE("diagnostics through the C API") {
    const double Q[] = {1.0, 0.4, 0.4, 1.0};
    const double w[] = {1.0, 0.0};
    bl_report* r = nullptr;
    REQUIRE(bl_diagnose(Q, w, 2, &r) == BL_OK);
    double cond = 0, theta = 0;
    int a5 = 0, a6 = 0;
    CHECK(bl_report_flags(r, &cond, &theta, &a5, &a6) == BL_OK);
    CHECK(cond == doctest::Approx(0.4));
    CHECK(theta == doctest::Approx(0.6));
    CHECK(a5 == 1);
    CHECK(a6 == 1);
    double delta[2];
    CHECK(bl_report_delta(r, delta, 2) == BL_OK);
    CHECK(delta[0] == doctest::Approx(-1.0));
    CHECK(std::string(bl_report_json(r)).find("\"theta\"") != std::string::npos);
    bl_report_free(r);
    const double asym[] = {1.0, 0.4, 0.0, 1.0};
    CHECK(bl_diagnose(asym, w, 2, &r) == BL_ERR_INPUT);
}

TEST_CASE("generation and experiments through the C API") {
    bl_problem* prob = nullptr;
    REQUIRE(bl_problem_generate(R"({"n": 40, "p": 5, "j_count": 2})", 3, &prob) == BL_OK);
    std::vector<double> w(5);
    CHECK(bl_problem_w_true(prob, w.data(), 5) == BL_OK);
    CHECK(w[0] != 0.0);
    CHECK(w[4] == 0.0);
    const fs::path dir = fs::temp_directory_path() / "bolasso_capi_gen";
    fs::remove_all(dir);
    CHECK(bl_problem_save(prob, dir.string().c_str()) == BL_OK);
    CHECK(fs::exists(dir / "dataset.csv"));
    CHECK(fs::exists(dir / "w_true.csv"));
    bl_problem_free(prob);
    CHECK(bl_problem_generate(R"({"n": 40, "colour": 1})", 3, &prob) == BL_ERR_INPUT);

    bl_experiment* exp = nullptr;
    REQUIRE(bl_experiment_load(R"({"generator": {"n": 30, "p": 4, "j_count": 1, "covariance": "identity"},
        "phase": {"n_values": [10], "j_values": [1], "draws": 5}})",
                                &exp) == BL_OK);
    const fs::path out = fs::temp_directory_path() / "bolasso_capi_exp";
    CHECK(bl_experiment_set_output(exp, out.string().c_str()) == BL_OK);
    CHECK(bl_experiment_set_workers(exp, 0) == BL_ERR_INPUT);
    CHECK(bl_experiment_run(exp, "phase") == BL_OK);
    CHECK(fs::exists(out / "phase_consistency.csv"));
    CHECK(bl_experiment_run(exp, "nonsense") == BL_ERR_INPUT);
    bl_experiment_free(exp);
}
