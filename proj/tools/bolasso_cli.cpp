// Command-line front end over the C API.
#include "bolasso/bolasso.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Failure {
    bl_status status;
    std::string message;
};

void check(bl_status s) {
    if (s != BL_OK) throw Failure{s, bl_last_error()};
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{BL_ERR_IO, "cannot open '" + path + "' for reading"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text << "\n";
        return;
    }
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f || !(f << text << "\n")) throw Failure{BL_ERR_IO, "cannot write '" + out + "'"};
}

template <class T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    ~Handle() { Free(ptr); }
};

void run_sweep(const std::string& kind, const std::string& config, uint64_t seed, bool have_seed,
               const std::string& out, int workers) {
    Handle<bl_experiment, bl_experiment_free> exp;
    check(bl_experiment_load(slurp(config).c_str(), &exp.ptr));
    if (have_seed) check(bl_experiment_set_seed(exp.ptr, seed));
    if (!out.empty()) check(bl_experiment_set_output(exp.ptr, out.c_str()));
    check(bl_experiment_set_workers(exp.ptr, workers));
    check(bl_experiment_run(exp.ptr, kind.c_str()));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lasso paths, Bolasso model selection and consistency diagnostics"};
    app.fallthrough();
    app.require_subcommand(1);
    uint64_t seed = 0;
    std::string out;
    int workers = 1;
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--out", out, "Output file or directory");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

    std::string spec_file, data_file, scheme = "pairs", gram_file, w_file, config_file;
    int max_active = -1, m = 128;
    double mu_floor = 0.0, mu = 0.0;
    bool two_step = false;

    auto* gen = app.add_subcommand("generate", "Draw a synthetic dataset from a generator spec (JSON)");
    gen->add_option("--spec", spec_file, "Generator spec file")->required();

    auto* path = app.add_subcommand("path", "Compute the Lasso path and write its breakpoint table");
    path->add_option("--data", data_file, "Dataset CSV (covariates then response)")->required();
    path->add_option("--max-active", max_active, "Stop before more variables would be active");
    path->add_option("--mu-floor", mu_floor, "Lowest level to trace");

    auto* bol = app.add_subcommand("bolasso", "Run Bolasso at one regularization level");
    bol->add_option("--data", data_file, "Dataset CSV")->required();
    bol->add_option("--mu", mu, "Regularization level")->required();
    bol->add_option("--scheme", scheme, "pairs, residuals or split");
    bol->add_option("--m", m, "Number of replications");
    bol->add_flag("--two-step", two_step, "Restrict columns with a first Lasso at mu * ln p");

    auto* diag = app.add_subcommand("diagnose", "Consistency condition, local problem, theta, (A5)/(A6)");
    diag->add_option("--gram", gram_file, "Gram or covariance matrix CSV")->required();
    diag->add_option("--w", w_file, "True loadings CSV")->required();

    std::vector<std::pair<CLI::App*, std::string>> sweeps;
    for (auto [name, kind] : {std::pair{"sweep-selection", "selection"}, std::pair{"sweep-pattern", "pattern"},
                              std::pair{"sweep-phase", "phase"}}) {
        auto* sub = app.add_subcommand(name, std::string("Monte Carlo ") + kind + " sweep from a JSON config");
        sub->add_option("--config", config_file, "Experiment config file")->required();
        sweeps.emplace_back(sub, kind);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "{\"error\":\"usage_error\",\"message\":\"" << json_escape(e.what()) << "\"}\n";
        return 2;
    }

    const bool have_seed = app.count("--seed") > 0;
    try {
        if (*gen) {
            Handle<bl_problem, bl_problem_free> prob;
            check(bl_problem_generate(slurp(spec_file).c_str(), seed, &prob.ptr));
            check(bl_problem_save(prob.ptr, out.empty() ? "." : out.c_str()));
        } else if (*path) {
            Handle<bl_dataset, bl_dataset_free> data;
            check(bl_dataset_load_csv(data_file.c_str(), &data.ptr));
            Handle<bl_path, bl_path_free> p;
            check(bl_path_compute(data.ptr, max_active, mu_floor, &p.ptr));
            check(bl_path_save_table(p.ptr, out.empty() ? "/dev/stdout" : out.c_str()));
        } else if (*bol) {
            Handle<bl_dataset, bl_dataset_free> data;
            check(bl_dataset_load_csv(data_file.c_str(), &data.ptr));
            Handle<bl_selection, bl_selection_free> sel;
            check(bl_selection_run(data.ptr, mu, scheme.c_str(), m, seed, two_step ? 1 : 0, workers, &sel.ptr));
            emit(bl_selection_manifest(sel.ptr), out);
        } else if (*diag) {
            Handle<bl_report, bl_report_free> rep;
            check(bl_diagnose_files(gram_file.c_str(), w_file.c_str(), &rep.ptr));
            emit(bl_report_json(rep.ptr), out);
        } else {
            for (const auto& [sub, kind] : sweeps)
                if (*sub) run_sweep(kind, config_file, seed, have_seed, out, workers);
        }
    } catch (const Failure& f) {
        std::cerr << "{\"error\":\"" << bl_status_name(f.status) << "\",\"message\":\"" << json_escape(f.message)
                  << "\"}\n";
        return 1;
    }
    return 0;
}
