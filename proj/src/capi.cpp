#include "bolasso/bolasso.h"

#include "bolasso/conditions.hpp"
#include "bolasso/errors.hpp"
#include "bolasso/harness.hpp"
#include "bolasso/io.hpp"
#include "bolasso/lasso.hpp"
#include "bolasso/selection.hpp"
#include "bolasso/synthetic.hpp"

#include <filesystem>
#include <string>

using namespace bolasso;

struct bl_dataset {
    Dataset data;
};
struct bl_problem {
    SyntheticProblem problem;
    GeneratorSpec spec;
};
struct bl_path {
    RegularizationPath path;
};
struct bl_selection {
    SelectionRun run;
    std::string manifest;
};
struct bl_report {
    DiagnosticsReport report;
    std::string json;
};
struct bl_experiment {
    ExperimentConfig config;
};

namespace {

thread_local std::string g_error;

bl_status fail(bl_status s, const std::string& msg) {
    g_error = msg;
    return s;
}

template <class F>
bl_status guard(F&& body) {
    try {
        body();
        g_error.clear();
        return BL_OK;
    } catch (const RangeError& e) {
        return fail(BL_ERR_RANGE, e.what());
    } catch (const InputError& e) {
        return fail(BL_ERR_INPUT, e.what());
    } catch (const SingularError& e) {
        return fail(BL_ERR_SINGULAR, e.what());
    } catch (const IoError& e) {
        return fail(BL_ERR_IO, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(BL_ERR_INPUT, e.what());
    } catch (const std::exception& e) {
        return fail(BL_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(BL_ERR_INTERNAL, "unknown error");
    }
}

void need(const void* ptr, const char* name) {
    if (!ptr) throw InputError(std::string(name) + " must not be NULL");
}

void need_len(int64_t len, Eigen::Index want, const char* name) {
    if (len != want) throw InputError(std::string(name) + " has length " + std::to_string(len) + ", expected " +
                                      std::to_string(want));
}

}  // namespace

extern "C" {

const char* bl_last_error(void) { return g_error.c_str(); }

const char* bl_status_name(bl_status status) {
    switch (status) {
        case BL_OK: return "ok";
        case BL_ERR_INPUT: return "input_error";
        case BL_ERR_RANGE: return "range_error";
        case BL_ERR_SINGULAR: return "singular_error";
        case BL_ERR_IO: return "io_error";
        case BL_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* bl_version(void) { return "1.0.0"; }

bl_status bl_dataset_create(const double* X, const double* y, int64_t n, int64_t p, bl_dataset** out) {
    return guard([&] {
        need(X, "X");
        need(y, "y");
        need(out, "out");
        if (n < 1 || p < 1) throw InputError("dataset needs n >= 1 and p >= 1");
        Matrix m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(X, n, p);
        Dataset d(std::move(m), Eigen::Map<const Vector>(y, n));
        d.validate();
        *out = new bl_dataset{std::move(d)};
    });
}

bl_status bl_dataset_load_csv(const char* path, bl_dataset** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = new bl_dataset{read_dataset(path)};
    });
}

bl_status bl_dataset_save_csv(const bl_dataset* data, const char* path) {
    return guard([&] {
        need(data, "data");
        need(path, "path");
        write_dataset(path, data->data);
    });
}

bl_status bl_dataset_shape(const bl_dataset* data, int64_t* n, int64_t* p) {
    return guard([&] {
        need(data, "data");
        if (n) *n = data->data.rows();
        if (p) *p = data->data.cols();
    });
}

void bl_dataset_free(bl_dataset* data) { delete data; }

bl_status bl_problem_generate(const char* generator_json, uint64_t seed, bl_problem** out) {
    return guard([&] {
        need(generator_json, "generator_json");
        need(out, "out");
        GeneratorSpec spec = generator_from_json(generator_json);
        spec.seed = seed;
        *out = new bl_problem{generate(spec), spec};
    });
}

bl_status bl_problem_dataset(const bl_problem* problem, bl_dataset** out) {
    return guard([&] {
        need(problem, "problem");
        need(out, "out");
        *out = new bl_dataset{problem->problem.data};
    });
}

bl_status bl_problem_w_true(const bl_problem* problem, double* w, int64_t len) {
    return guard([&] {
        need(problem, "problem");
        need(w, "w");
        const Vector& v = problem->problem.truth.w_true;
        need_len(len, v.size(), "w");
        Eigen::Map<Vector>(w, len) = v;
    });
}

bl_status bl_problem_save(const bl_problem* problem, const char* dir) {
    return guard([&] {
        need(problem, "problem");
        need(dir, "dir");
        ensure_output_dir(dir);
        const std::filesystem::path d(dir);
        const SyntheticProblem& pr = problem->problem;
        write_dataset((d / "dataset.csv").string(), pr.data);
        write_vector((d / "w_true.csv").string(), pr.truth.w_true, "w_true");
        std::vector<std::string> header;
        for (Eigen::Index j = 0; j < pr.covariance.cols(); ++j) header.push_back("c" + std::to_string(j + 1));
        write_csv((d / "covariance.csv").string(), pr.covariance, header);
        std::string meta = "{\n  \"seed\": " + std::to_string(problem->spec.seed) +
                           ",\n  \"population_condition\": " + format_double(pr.cond_value) +
                           ",\n  \"covariance_retries\": " + std::to_string(pr.retries) +
                           ",\n  \"generator\": " + generator_to_json(problem->spec) + "\n}\n";
        write_text((d / "generate.json").string(), meta);
    });
}

void bl_problem_free(bl_problem* problem) { delete problem; }

bl_status bl_path_compute(const bl_dataset* data, int max_active, double mu_floor, bl_path** out) {
    return guard([&] {
        need(data, "data");
        need(out, "out");
        PathOptions opt;
        opt.max_active = max_active;
        opt.mu_floor = mu_floor;
        *out = new bl_path{lasso_path(data->data, opt)};
    });
}

bl_status bl_path_info(const bl_path* path, double* mu_max, double* mu_end, int64_t* breakpoints, int* degenerate) {
    return guard([&] {
        need(path, "path");
        if (mu_max) *mu_max = path->path.mu_max();
        if (mu_end) *mu_end = path->path.mu_end();
        if (breakpoints) *breakpoints = static_cast<int64_t>(path->path.breakpoints().size());
        if (degenerate) *degenerate = path->path.terminated_degenerate() ? 1 : 0;
    });
}

bl_status bl_path_solve(const bl_path* path, double mu, double* w, int64_t len, double* kkt) {
    return guard([&] {
        need(path, "path");
        need(w, "w");
        need_len(len, path->path.dim(), "w");
        const LassoSolution s = path->path.solve_at(mu);
        Eigen::Map<Vector>(w, len) = s.weights;
        if (kkt) *kkt = s.kkt_residual;
    });
}

bl_status bl_path_save_table(const bl_path* path, const char* file) {
    return guard([&] {
        need(path, "path");
        need(file, "file");
        write_path_table(file, path->path);
    });
}

void bl_path_free(bl_path* path) { delete path; }

bl_status bl_selection_run(const bl_dataset* data, double mu, const char* scheme, int m, uint64_t seed, int two_step,
                           int workers, bl_selection** out) {
    return guard([&] {
        need(data, "data");
        need(scheme, "scheme");
        need(out, "out");
        ReplicationScheme rs;
        rs.kind = parse_scheme_kind(scheme);
        if (rs.kind == SchemeKind::oracle_noise)
            throw InputError("oracle_noise needs the generating model; use an experiment config instead");
        rs.replications = m;
        rs.seed = seed;
        SelectionOptions opts;
        opts.workers = workers < 1 ? 1 : workers;
        SelectionRun run = two_step ? run_two_step(data->data, mu, rs, opts) : run_bolasso(data->data, mu, rs, opts);
        std::string manifest = selection_manifest(run);
        *out = new bl_selection{std::move(run), std::move(manifest)};
    });
}

bl_status bl_selection_intersection(const bl_selection* sel, int32_t* idx, int64_t cap, int64_t* count) {
    return guard([&] {
        need(sel, "selection");
        const Support& s = sel->run.intersected;
        if (count) *count = static_cast<int64_t>(s.size());
        if (cap > 0) need(idx, "idx");
        for (int64_t i = 0; i < cap && i < static_cast<int64_t>(s.size()); ++i) idx[i] = s[static_cast<size_t>(i)];
    });
}

bl_status bl_selection_frequencies(const bl_selection* sel, double* freq, int64_t len) {
    return guard([&] {
        need(sel, "selection");
        need(freq, "freq");
        need_len(len, sel->run.frequencies.size(), "freq");
        Eigen::Map<Vector>(freq, len) = sel->run.frequencies;
    });
}

bl_status bl_selection_refit(const bl_selection* sel, double* w, int64_t len, int* ok) {
    return guard([&] {
        need(sel, "selection");
        need(w, "w");
        need_len(len, sel->run.refit_weights.size(), "w");
        Eigen::Map<Vector>(w, len) = sel->run.refit_weights;
        if (ok) *ok = sel->run.refit_ok ? 1 : 0;
    });
}

const char* bl_selection_manifest(const bl_selection* sel) { return sel ? sel->manifest.c_str() : ""; }

void bl_selection_free(bl_selection* sel) { delete sel; }

bl_status bl_diagnose(const double* Q, const double* w_true, int64_t p, bl_report** out) {
    return guard([&] {
        need(Q, "Q");
        need(w_true, "w_true");
        need(out, "out");
        if (p < 1) throw InputError("p must be >= 1");
        auto gram = std::make_shared<Matrix>(
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(Q, p, p));
        const Vector w = Eigen::Map<const Vector>(w_true, p);
        const MomentForm mom = make_moments(gram, Vector::Zero(p));
        DiagnosticsReport r = assumption_check(mom, make_truth(w));
        std::string json = report_to_json(r);
        *out = new bl_report{std::move(r), std::move(json)};
    });
}

bl_status bl_diagnose_files(const char* gram_csv, const char* w_true_csv, bl_report** out) {
    return guard([&] {
        need(gram_csv, "gram_csv");
        need(w_true_csv, "w_true_csv");
        need(out, "out");
        const CsvTable q = read_csv(gram_csv);
        const Vector w = read_vector(w_true_csv);
        if (q.values.rows() != q.values.cols() || q.values.rows() != w.size())
            throw InputError("Gram matrix must be p x p with p = length of w_true");
        const MomentForm mom = make_moments(std::make_shared<Matrix>(q.values), Vector::Zero(w.size()));
        DiagnosticsReport r = assumption_check(mom, make_truth(w));
        std::string json = report_to_json(r);
        *out = new bl_report{std::move(r), std::move(json)};
    });
}

bl_status bl_report_flags(const bl_report* report, double* cond_value, double* theta, int* a5, int* a6) {
    return guard([&] {
        need(report, "report");
        if (cond_value) *cond_value = report->report.cond_value;
        if (theta) *theta = report->report.theta;
        if (a5) *a5 = report->report.a5_holds ? 1 : 0;
        if (a6) *a6 = report->report.a6_holds ? 1 : 0;
    });
}

bl_status bl_report_delta(const bl_report* report, double* delta, int64_t len) {
    return guard([&] {
        need(report, "report");
        need(delta, "delta");
        need_len(len, report->report.delta.size(), "delta");
        Eigen::Map<Vector>(delta, len) = report->report.delta;
    });
}

const char* bl_report_json(const bl_report* report) { return report ? report->json.c_str() : ""; }

void bl_report_free(bl_report* report) { delete report; }

bl_status bl_experiment_load(const char* config_json, bl_experiment** out) {
    return guard([&] {
        need(config_json, "config_json");
        need(out, "out");
        *out = new bl_experiment{config_from_json(config_json)};
    });
}

bl_status bl_experiment_set_seed(bl_experiment* exp, uint64_t seed) {
    return guard([&] {
        need(exp, "experiment");
        exp->config.seed = seed;
    });
}

bl_status bl_experiment_set_output(bl_experiment* exp, const char* dir) {
    return guard([&] {
        need(exp, "experiment");
        need(dir, "dir");
        exp->config.output_dir = dir;
    });
}

bl_status bl_experiment_set_workers(bl_experiment* exp, int workers) {
    return guard([&] {
        need(exp, "experiment");
        if (workers < 1) throw InputError("workers must be >= 1");
        exp->config.workers = workers;
    });
}

bl_status bl_experiment_run(bl_experiment* exp, const char* kind) {
    return guard([&] {
        need(exp, "experiment");
        need(kind, "kind");
        const std::string k = kind;
        if (k == "selection") sweep_selection_probability(exp->config);
        else if (k == "pattern") sweep_pattern_probability(exp->config);
        else if (k == "phase") sweep_condition_phase(exp->config);
        else throw InputError("unknown experiment kind '" + k + "'");
    });
}

void bl_experiment_free(bl_experiment* exp) { delete exp; }

}  // extern "C"
