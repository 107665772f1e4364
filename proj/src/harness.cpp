#include "bolasso/harness.hpp"

#include "bolasso/conditions.hpp"
#include "bolasso/errors.hpp"
#include "bolasso/io.hpp"
#include "bolasso/lasso.hpp"
#include "bolasso/parallel.hpp"
#include "bolasso/selection.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

namespace bolasso {

using nlohmann::ordered_json;

namespace {

constexpr uint64_t kGeneratorKey = 0x67656e;
constexpr uint64_t kDesignKey = 0x64657369;
constexpr uint64_t kNoiseKey = 0x6e6f6973;
constexpr uint64_t kReplicationKey = 0x7265706c;
constexpr uint64_t kPhaseKey = 0x70686173;

template <class T>
T take(const ordered_json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config field '") + key + "': " + e.what());
    }
}

void reject_unknown(const ordered_json& j, std::initializer_list<const char*> keys, const char* where) {
    if (!j.is_object()) throw InputError(std::string(where) + " must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (std::none_of(keys.begin(), keys.end(), [&](const char* name) { return k == name; }))
            throw InputError(std::string("unknown key '") + k + "' in " + where);
    }
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

ordered_json generator_json(const GeneratorSpec& g) {
    ordered_json j;
    j["n"] = g.n;
    j["p"] = g.p;
    j["j_count"] = g.j_count;
    j["covariance"] = to_string(g.covariance);
    if (g.covariance == CovarianceKind::user) {
        ordered_json rows = ordered_json::array();
        for (Eigen::Index i = 0; i < g.user_covariance.rows(); ++i) {
            ordered_json row = ordered_json::array();
            for (Eigen::Index k = 0; k < g.user_covariance.cols(); ++k) row.push_back(g.user_covariance(i, k));
            rows.push_back(row);
        }
        j["user_covariance"] = rows;
    }
    j["spectrum_ratio"] = g.spectrum_ratio;
    j["w_min"] = g.w_min;
    j["w_max"] = g.w_max;
    j["noise_sigma"] = g.noise_sigma;
    j["want_condition"] = to_string(g.want_condition);
    j["condition_margin"] = g.condition_margin;
    j["max_retries"] = g.max_retries;
    return j;
}

GeneratorSpec generator_from(const ordered_json& j) {
    reject_unknown(j,
                   {"n", "p", "j_count", "covariance", "user_covariance", "spectrum_ratio", "w_min", "w_max",
                    "noise_sigma", "want_condition", "condition_margin", "max_retries"},
                   "generator");
    GeneratorSpec g;
    g.n = take(j, "n", g.n);
    g.p = take(j, "p", g.p);
    g.j_count = take(j, "j_count", g.j_count);
    g.covariance = parse_covariance_kind(take<std::string>(j, "covariance", to_string(g.covariance)));
    if (j.contains("user_covariance")) {
        const auto rows = take<std::vector<std::vector<double>>>(j, "user_covariance", {});
        g.user_covariance.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        for (size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != rows.size()) throw InputError("user_covariance must be square");
            for (size_t c = 0; c < rows.size(); ++c)
                g.user_covariance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    g.spectrum_ratio = take(j, "spectrum_ratio", g.spectrum_ratio);
    g.w_min = take(j, "w_min", g.w_min);
    g.w_max = take(j, "w_max", g.w_max);
    g.noise_sigma = take(j, "noise_sigma", g.noise_sigma);
    g.want_condition = parse_want_condition(take<std::string>(j, "want_condition", to_string(g.want_condition)));
    g.condition_margin = take(j, "condition_margin", g.condition_margin);
    g.max_retries = take(j, "max_retries", g.max_retries);
    return g;
}

// Per-trial contributions of one scheme; summed over trials in trial order.
struct Tally {
    Matrix before;
    Matrix after;
    Matrix exact;
    Matrix superset;
    long degenerate = 0;
};

struct SchemeResult {
    SchemeSpec scheme;
    std::vector<int> m_values;
    int m = 0;
    Tally sum;
};

bool contains_all(const Support& big, const Support& small) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

SignPattern signs_at_or_last(const RegularizationPath& path, double mu, bool* covered) {
    const Support s = path.support_at_or_last(mu, covered);
    if (*covered) return path.solve_at(mu).signs;
    SignPattern out(static_cast<size_t>(path.dim()), 0);
    if (!path.segments().empty()) {
        const PathSegment& seg = path.segments().back();
        for (size_t i = 0; i < seg.active.size(); ++i) out[static_cast<size_t>(seg.active[i])] = seg.active_signs[i];
    }
    return out;
}

Tally run_one(const ExperimentConfig& config, const SchemeSpec& scheme, const std::vector<int>& m_values,
              const Dataset& data, const GroundTruth& truth, const std::vector<double>& mus, uint64_t rep_seed) {
    const auto p = data.cols();
    const auto K = static_cast<Eigen::Index>(mus.size());
    const auto M = static_cast<Eigen::Index>(m_values.size());
    Tally t{Matrix::Zero(p, K), Matrix::Zero(p, K), Matrix::Zero(M, K), Matrix::Zero(M, K), 0};
    if (scheme.kind == "lasso") {
        PathOptions opt;
        opt.mu_floor = *std::min_element(mus.begin(), mus.end());
        const RegularizationPath path = lasso_path(compute_moments(data, false), opt);
        const SignPattern want = signs_of(truth.w_true);
        for (Eigen::Index k = 0; k < K; ++k) {
            bool covered = true;
            const SignPattern s = signs_at_or_last(path, mus[static_cast<size_t>(k)], &covered);
            Support sup;
            for (Eigen::Index j = 0; j < p; ++j)
                if (s[static_cast<size_t>(j)] != 0) sup.push_back(static_cast<int>(j));
            for (int j : sup) t.before(j, k) = t.after(j, k) = 1.0;
            t.exact(0, k) = s == want ? 1.0 : 0.0;
            t.superset(0, k) = contains_all(sup, truth.J) ? 1.0 : 0.0;
            t.degenerate += covered ? 0 : 1;
        }
        return t;
    }
    ReplicationScheme rs;
    rs.kind = parse_scheme_kind(scheme.kind);
    rs.replications = m_values.back();
    rs.seed = rep_seed;
    SelectionOptions opts;
    if (rs.kind == SchemeKind::oracle_noise) opts.oracle = OracleNoise{truth.w_true, config.generator.noise_sigma};
    const GridSelection g =
        scheme.two_step ? replicate_supports_two_step(data, mus, rs, opts) : replicate_supports(data, mus, rs, opts);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& reps = g.supports[static_cast<size_t>(k)];
        t.degenerate += g.degenerate[static_cast<size_t>(k)];
        for (const Support& s : reps)
            for (int j : s) t.before(j, k) += 1.0;
        if (!reps.empty()) t.before.col(k) /= static_cast<double>(reps.size());
        Support acc = reps.empty() ? Support{} : reps.front();
        Eigen::Index next = 0;
        for (size_t r = 0; r < reps.size() && next < M; ++r) {
            if (r > 0) {
                Support merged;
                std::set_intersection(acc.begin(), acc.end(), reps[r].begin(), reps[r].end(),
                                      std::back_inserter(merged));
                acc.swap(merged);
            }
            while (next < M && static_cast<size_t>(m_values[static_cast<size_t>(next)]) == r + 1) {
                t.exact(next, k) = acc == truth.J ? 1.0 : 0.0;
                t.superset(next, k) = contains_all(acc, truth.J) ? 1.0 : 0.0;
                ++next;
            }
        }
        const Support final_set = reps.empty() ? Support{} : intersect_supports(reps);
        for (int j : final_set) t.after(j, k) = 1.0;
    }
    return t;
}

std::vector<SchemeResult> run_schemes(const ExperimentConfig& config) {
    const TrialSource src = prepare_trials(config);
    const std::vector<double> mus = config.mu_grid.values();
    std::vector<SchemeResult> results;
    for (const SchemeSpec& s : config.schemes) {
        SchemeResult r;
        r.scheme = s;
        r.m_values = s.kind == "lasso" ? std::vector<int>{1} : config.m_values;
        r.m = r.m_values.back();
        results.push_back(std::move(r));
    }
    const auto trials = static_cast<size_t>(config.outer_trials);
    std::vector<std::vector<Tally>> slots(trials);
    parallel_for(config.outer_trials, config.workers, [&](int t) {
        const Dataset data = src.trial(config, t);
        const uint64_t rep_seed = Rng::derive(config.seed, {kReplicationKey, static_cast<uint64_t>(t)});
        auto& mine = slots[static_cast<size_t>(t)];
        for (const SchemeResult& r : results)
            mine.push_back(run_one(config, r.scheme, r.m_values, data, src.base.truth, mus, rep_seed));
    });
    for (size_t s = 0; s < results.size(); ++s) {
        Tally& sum = results[s].sum;
        sum = slots[0][s];
        for (size_t t = 1; t < trials; ++t) {
            const Tally& x = slots[t][s];
            sum.before += x.before;
            sum.after += x.after;
            sum.exact += x.exact;
            sum.superset += x.superset;
            sum.degenerate += x.degenerate;
        }
        const double inv = 1.0 / static_cast<double>(trials);
        sum.before *= inv;
        sum.after *= inv;
        sum.exact *= inv;
        sum.superset *= inv;
    }
    return results;
}

ordered_json metadata(const ExperimentConfig& config, const std::string& kind) {
    ordered_json j;
    j["kind"] = kind;
    j["seed"] = config.seed;
    j["config_hash"] = hex64(config_hash(config));
    return j;
}

std::string file_in(const ExperimentConfig& config, const std::string& name) {
    return (std::filesystem::path(config.output_dir) / name).string();
}

void write_json(const std::string& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<std::string> mu_header(const std::string& first, const std::vector<double>& mus) {
    std::vector<std::string> h{first};
    for (double mu : mus) h.push_back(format_double(mu));
    return h;
}

void write_matrix_file(const ExperimentConfig& config, const ProbabilityMatrix& pm, const TrialSource* src) {
    const std::string stem = "selection_" + pm.scheme + "_" + pm.mode;
    Matrix out(pm.values.rows(), pm.values.cols() + 1);
    for (Eigen::Index j = 0; j < pm.values.rows(); ++j) out(j, 0) = static_cast<double>(j + 1);
    out.rightCols(pm.values.cols()) = pm.values;
    write_csv(file_in(config, stem + ".csv"), out, mu_header("variable", pm.mus));
    ordered_json meta = metadata(config, "selection_probability");
    meta["scheme"] = pm.scheme;
    meta["mode"] = pm.mode;
    meta["m"] = pm.m;
    meta["trials"] = pm.trials;
    meta["degenerate_replicates"] = pm.degenerate_replicates;
    meta["mu_grid"] = {{"min", config.mu_grid.min}, {"max", config.mu_grid.max}, {"count", config.mu_grid.count}};
    if (src) {
        meta["design_tries"] = src->design_tries;
        meta["covariance_retries"] = src->base.retries;
        meta["population_condition"] = src->base.cond_value;
    }
    write_json(file_in(config, stem + ".json"), meta);
}

void write_curve_file(const ExperimentConfig& config, const PatternCurves& pc, const Matrix& values,
                      const std::string& stem) {
    const auto M = static_cast<Eigen::Index>(pc.m_values.size());
    const auto K = static_cast<Eigen::Index>(pc.mus.size());
    Matrix out(M * K, 4);
    Eigen::Index row = 0;
    for (Eigen::Index a = 0; a < M; ++a)
        for (Eigen::Index k = 0; k < K; ++k, ++row)
            out.row(row) << pc.mus[static_cast<size_t>(k)], pc.m_values[static_cast<size_t>(a)], values(a, k), pc.trials;
    write_csv(file_in(config, stem + ".csv"), out, {"mu", "m", "probability", "trials"});
    ordered_json meta = metadata(config, stem.substr(0, stem.find('_')));
    meta["scheme"] = pc.scheme;
    meta["m_values"] = pc.m_values;
    meta["trials"] = pc.trials;
    write_json(file_in(config, stem + ".json"), meta);
}

Matrix phase_covariance(const ExperimentConfig& config) {
    const GeneratorSpec& g = config.generator;
    if (g.covariance == CovarianceKind::identity) return Matrix::Identity(g.p, g.p);
    if (g.covariance == CovarianceKind::user) return g.user_covariance;
    GeneratorSpec any = g;
    any.want_condition = WantCondition::any;
    Rng rng = Rng::substream(config.seed, {kPhaseKey, kGeneratorKey});
    return sample_covariance(any, make_truth(Vector::Zero(g.p)), rng);
}

}  // namespace

GeneratorSpec generator_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("generator spec is not valid JSON: ") + e.what());
    }
    GeneratorSpec g = generator_from(j);
    g.validate();
    return g;
}

std::string generator_to_json(const GeneratorSpec& spec) { return generator_json(spec).dump(2); }

namespace {

ordered_json one_based(const Support& s) {
    ordered_json a = ordered_json::array();
    for (int j : s) a.push_back(j + 1);
    return a;
}

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

std::string selection_manifest(const SelectionRun& run) {
    ordered_json j;
    j["seed"] = run.scheme.seed;
    j["scheme"] = to_string(run.scheme.kind);
    j["two_step"] = run.two_step;
    j["mu"] = run.mu;
    j["m"] = run.scheme.replications;
    j["frequencies"] = std::vector<double>(run.frequencies.data(), run.frequencies.data() + run.frequencies.size());
    j["intersection"] = one_based(run.intersected);
    j["refit_ok"] = run.refit_ok;
    j["refit_weights"] =
        std::vector<double>(run.refit_weights.data(), run.refit_weights.data() + run.refit_weights.size());
    j["degenerate_replicates"] = run.degenerate_replicates;
    j["base_degenerate"] = run.base_degenerate;
    j["dropped_rows"] = run.dropped_rows;
    if (run.two_step) {
        j["restricted"] = one_based(run.restricted);
        j["empty_restriction"] = run.empty_restriction;
    }
    return j.dump(2);
}

std::string report_to_json(const DiagnosticsReport& r) {
    ordered_json j;
    j["cond_value"] = finite_or_null(r.cond_value);
    ordered_json delta = ordered_json::array();
    for (Eigen::Index i = 0; i < r.delta.size(); ++i) delta.push_back(finite_or_null(r.delta[i]));
    j["delta"] = delta;
    j["K"] = one_based(r.K);
    j["L"] = one_based(r.L);
    j["hinge"] = one_based(r.hinge);
    ordered_json t = ordered_json::array();
    for (int8_t v : r.t) t.push_back(static_cast<int>(v));
    j["t"] = t;
    j["reduced_degenerate"] = r.reduced_degenerate;
    j["lambda_min_LL"] = finite_or_null(r.lmin_LL);
    j["stability_norm"] = finite_or_null(r.stability_norm);
    j["theta"] = finite_or_null(r.theta);
    j["a5_holds"] = r.a5_holds;
    j["a6_holds"] = r.a6_holds;
    return j.dump(2);
}

std::vector<double> MuGrid::values() const {
    std::vector<double> out(static_cast<size_t>(count));
    const double lmax = std::log(max);
    const double lmin = std::log(min);
    for (int k = 0; k < count; ++k) out[static_cast<size_t>(k)] = std::exp(lmax + (lmin - lmax) * k / (count - 1));
    out.front() = max;
    out.back() = min;
    return out;
}

std::string SchemeSpec::label() const { return two_step ? kind + "_two_step" : kind; }

void ExperimentConfig::validate() const {
    generator.validate();
    if (mu_grid.count < 2) throw InputError("mu_grid.count must be >= 2");
    if (!(mu_grid.min > 0.0) || !(mu_grid.max > mu_grid.min) || !std::isfinite(mu_grid.max))
        throw InputError("mu_grid needs 0 < min < max");
    if (outer_trials < 1) throw InputError("outer_trials must be >= 1");
    if (m_values.empty()) throw InputError("m_values must not be empty");
    for (size_t i = 0; i < m_values.size(); ++i) {
        if (m_values[i] < 1) throw InputError("m_values entries must be >= 1");
        if (i && m_values[i] <= m_values[i - 1]) throw InputError("m_values must be strictly increasing");
    }
    std::set<std::string> labels;
    for (const SchemeSpec& s : schemes) {
        if (s.kind != "lasso") parse_scheme_kind(s.kind);
        if (s.kind == "lasso" && s.two_step) throw InputError("two_step applies to replication schemes only");
        if (s.two_step && s.kind == "oracle_noise") throw InputError("two_step does not support oracle_noise");
        if (s.kind == "split" && m_values.back() > generator.n) throw InputError("split needs m <= n");
        if (!labels.insert(s.label()).second) throw InputError("duplicate scheme '" + s.label() + "'");
    }
    if (requirement.a5_a6 && requirement.max_tries < 1) throw InputError("design_requirement.max_tries must be >= 1");
    for (int n : phase.n_values)
        if (n < 1) throw InputError("phase n_values must be >= 1");
    for (int j : phase.j_values)
        if (j < 0 || j > generator.p) throw InputError("phase j_values must lie in [0, p]");
    if (phase.draws < 1) throw InputError("phase.draws must be >= 1");
    if (workers < 1) throw InputError("workers must be >= 1");
}

ExperimentConfig config_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(j,
                   {"generator", "mu_grid", "schemes", "outer_trials", "m_values", "design", "design_requirement",
                    "phase", "output_dir", "seed", "workers"},
                   "config");
    ExperimentConfig c;
    if (j.contains("generator")) c.generator = generator_from(j["generator"]);
    if (j.contains("mu_grid")) {
        const auto& g = j["mu_grid"];
        reject_unknown(g, {"min", "max", "count"}, "mu_grid");
        c.mu_grid.min = take(g, "min", c.mu_grid.min);
        c.mu_grid.max = take(g, "max", c.mu_grid.max);
        c.mu_grid.count = take(g, "count", c.mu_grid.count);
    }
    if (j.contains("schemes")) {
        if (!j["schemes"].is_array()) throw InputError("schemes must be an array");
        for (const auto& s : j["schemes"]) {
            SchemeSpec spec;
            if (s.is_string()) {
                spec.kind = s.get<std::string>();
            } else {
                reject_unknown(s, {"kind", "two_step"}, "scheme");
                spec.kind = take<std::string>(s, "kind", spec.kind);
                spec.two_step = take(s, "two_step", false);
            }
            if (spec.kind == "noise") spec.kind = "oracle_noise";
            c.schemes.push_back(spec);
        }
    }
    c.outer_trials = take(j, "outer_trials", c.outer_trials);
    c.m_values = take(j, "m_values", c.m_values);
    const std::string design = take<std::string>(j, "design", "fixed");
    if (design == "fixed") c.design = DesignMode::fixed;
    else if (design == "fresh") c.design = DesignMode::fresh;
    else throw InputError("design must be 'fixed' or 'fresh'");
    if (j.contains("design_requirement")) {
        const auto& r = j["design_requirement"];
        reject_unknown(r, {"a5_a6", "theta_min", "max_tries"}, "design_requirement");
        c.requirement.a5_a6 = take(r, "a5_a6", false);
        c.requirement.theta_min = take(r, "theta_min", 0.0);
        c.requirement.max_tries = take(r, "max_tries", c.requirement.max_tries);
    }
    if (j.contains("phase")) {
        const auto& ph = j["phase"];
        reject_unknown(ph, {"n_values", "j_values", "draws"}, "phase");
        c.phase.n_values = take(ph, "n_values", c.phase.n_values);
        c.phase.j_values = take(ph, "j_values", c.phase.j_values);
        c.phase.draws = take(ph, "draws", c.phase.draws);
    }
    c.output_dir = take(j, "output_dir", c.output_dir);
    c.seed = take<uint64_t>(j, "seed", 0);
    c.workers = take(j, "workers", 1);
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["generator"] = generator_json(c.generator);
    j["mu_grid"] = {{"min", c.mu_grid.min}, {"max", c.mu_grid.max}, {"count", c.mu_grid.count}};
    ordered_json schemes = ordered_json::array();
    for (const SchemeSpec& s : c.schemes) schemes.push_back({{"kind", s.kind}, {"two_step", s.two_step}});
    j["schemes"] = schemes;
    j["outer_trials"] = c.outer_trials;
    j["m_values"] = c.m_values;
    j["design"] = c.design == DesignMode::fixed ? "fixed" : "fresh";
    j["design_requirement"] = {{"a5_a6", c.requirement.a5_a6},
                               {"theta_min", c.requirement.theta_min},
                               {"max_tries", c.requirement.max_tries}};
    j["phase"] = {{"n_values", c.phase.n_values}, {"j_values", c.phase.j_values}, {"draws", c.phase.draws}};
    j["seed"] = c.seed;
    return j.dump();
}

uint64_t config_hash(const ExperimentConfig& config) { return fnv1a64(config_to_json(config)); }

TrialSource prepare_trials(const ExperimentConfig& config) {
    config.validate();
    TrialSource src;
    const int tries = config.requirement.a5_a6 ? config.requirement.max_tries : 1;
    for (int attempt = 0; attempt < tries; ++attempt) {
        GeneratorSpec g = config.generator;
        g.seed = Rng::derive(config.seed, {kGeneratorKey, static_cast<uint64_t>(attempt)});
        src.base = generate(g);
        src.design_tries = attempt + 1;
        if (!config.requirement.a5_a6) return src;
        try {
            const DiagnosticsReport r = assumption_check(compute_moments(src.base.data), src.base.truth);
            if (r.a5_holds && r.a6_holds && r.theta >= config.requirement.theta_min) return src;
        } catch (const SingularError&) {
        }
    }
    throw InputError("no design satisfied (A5)-(A6) with theta >= " + format_double(config.requirement.theta_min) +
                     " after " + std::to_string(tries) + " draws");
}

Dataset TrialSource::trial(const ExperimentConfig& config, int t) const {
    const auto tt = static_cast<uint64_t>(t);
    Matrix X;
    if (config.design == DesignMode::fresh) {
        Rng dr = Rng::substream(config.seed, {kDesignKey, tt});
        X = sample_design(base.covariance, config.generator.n, dr);
    } else {
        X = base.data.X;
    }
    Rng nr = Rng::substream(config.seed, {kNoiseKey, tt});
    Vector y = sample_response(X, base.truth.w_true, config.generator.noise_sigma, nr);
    return Dataset(std::move(X), std::move(y));
}

SelectionSweep sweep_selection_probability(const ExperimentConfig& config, bool write_files) {
    config.validate();
    if (write_files) ensure_output_dir(config.output_dir);
    const TrialSource src = prepare_trials(config);
    const std::vector<SchemeResult> results = run_schemes(config);
    const std::vector<double> mus = config.mu_grid.values();
    SelectionSweep out;
    for (const SchemeResult& r : results) {
        ProbabilityMatrix pm;
        pm.scheme = r.scheme.label();
        pm.m = r.m;
        pm.trials = config.outer_trials;
        pm.mus = mus;
        pm.degenerate_replicates = r.sum.degenerate;
        pm.mode = "before";
        pm.values = r.sum.before;
        out.before.push_back(pm);
        pm.mode = "after";
        pm.values = r.sum.after;
        out.after.push_back(pm);
    }
    if (write_files) {
        for (const auto& pm : out.before) write_matrix_file(config, pm, &src);
        for (const auto& pm : out.after) write_matrix_file(config, pm, &src);
    }
    return out;
}

std::vector<PatternCurves> sweep_pattern_probability(const ExperimentConfig& config, bool write_files) {
    config.validate();
    if (write_files) ensure_output_dir(config.output_dir);
    const std::vector<SchemeResult> results = run_schemes(config);
    std::vector<PatternCurves> out;
    for (const SchemeResult& r : results) {
        PatternCurves pc;
        pc.scheme = r.scheme.label();
        pc.mus = config.mu_grid.values();
        pc.m_values = r.m_values;
        pc.exact = r.sum.exact;
        pc.superset = r.sum.superset;
        pc.trials = config.outer_trials;
        if (write_files) {
            write_curve_file(config, pc, pc.exact, "pattern_" + pc.scheme);
            write_curve_file(config, pc, pc.superset, "superset_" + pc.scheme);
        }
        out.push_back(std::move(pc));
    }
    return out;
}

PhaseResult sweep_condition_phase(const ExperimentConfig& config, bool write_files) {
    config.validate();
    if (config.phase.n_values.empty() || config.phase.j_values.empty())
        throw InputError("phase sweep needs nonempty n_values and j_values");
    if (write_files) ensure_output_dir(config.output_dir);
    const Matrix cov = phase_covariance(config);
    const int p = config.generator.p;
    const auto NN = static_cast<Eigen::Index>(config.phase.n_values.size());
    const auto NJ = static_cast<Eigen::Index>(config.phase.j_values.size());
    PhaseResult res;
    res.n_values = config.phase.n_values;
    res.j_values = config.phase.j_values;
    res.draws = config.phase.draws;
    res.p_consistency = Matrix::Zero(NN, NJ);
    res.p_a6 = Matrix::Zero(NN, NJ);
    res.mean_log_theta = Matrix::Zero(NN, NJ);
    res.qualifying = Matrix::Zero(NN, NJ);

    struct Draw {
        bool consistency_holds = false;
        bool a6 = false;
        double log_theta = 0.0;
    };
    const auto D = static_cast<size_t>(config.phase.draws);
    for (Eigen::Index a = 0; a < NN; ++a) {
        for (Eigen::Index b = 0; b < NJ; ++b) {
            const int n = res.n_values[static_cast<size_t>(a)];
            const int jc = res.j_values[static_cast<size_t>(b)];
            std::vector<Draw> draws(D);
            parallel_for(config.phase.draws, config.workers, [&](int d) {
                Rng rng = Rng::substream(config.seed, {kPhaseKey, static_cast<uint64_t>(n), static_cast<uint64_t>(jc),
                                                       static_cast<uint64_t>(d)});
                Matrix X = sample_design(cov, n, rng);
                Vector w = Vector::Zero(p);
                for (int j = 0; j < jc; ++j) w[j] = rng.uniform() < 0.5 ? -1.0 : 1.0;
                const MomentForm mom = compute_moments(Dataset(std::move(X), Vector::Zero(n)));
                const GroundTruth truth = make_truth(w);
                Draw& out = draws[static_cast<size_t>(d)];
                try {
                    out.consistency_holds = consistency_condition(mom, truth) < 1.0;
                } catch (const SingularError&) {
                    out.consistency_holds = false;
                }
                try {
                    const DiagnosticsReport r = assumption_check(mom, truth);
                    out.a6 = r.a5_holds && r.a6_holds;
                    if (out.a6) out.log_theta = std::log(r.theta);
                } catch (const SingularError&) {
                    out.a6 = false;
                }
            });
            double q = 0.0;
            double lt = 0.0;
            for (const Draw& d : draws) {
                res.p_consistency(a, b) += d.consistency_holds ? 1.0 : 0.0;
                res.p_a6(a, b) += d.a6 ? 1.0 : 0.0;
                if (d.a6 && jc > 0) {
                    q += 1.0;
                    lt += d.log_theta;
                }
            }
            res.p_consistency(a, b) /= static_cast<double>(D);
            res.p_a6(a, b) /= static_cast<double>(D);
            res.qualifying(a, b) = q;
            res.mean_log_theta(a, b) = q > 0 ? lt / q : std::numeric_limits<double>::quiet_NaN();
        }
    }
    if (write_files) {
        std::vector<std::string> header{"n"};
        for (int j : res.j_values) header.push_back("j=" + std::to_string(j));
        auto emit = [&](const Matrix& m, const std::string& name) {
            Matrix out(NN, NJ + 1);
            for (Eigen::Index a = 0; a < NN; ++a) out(a, 0) = res.n_values[static_cast<size_t>(a)];
            out.rightCols(NJ) = m;
            write_csv(file_in(config, name), out, header);
        };
        emit(res.p_consistency, "phase_consistency.csv");
        emit(res.p_a6, "phase_a6.csv");
        emit(res.mean_log_theta, "phase_log_theta.csv");
        emit(res.qualifying, "phase_qualifying.csv");
        ordered_json meta = metadata(config, "condition_phase");
        meta["p"] = p;
        meta["draws"] = res.draws;
        meta["n_values"] = res.n_values;
        meta["j_values"] = res.j_values;
        meta["covariance"] = to_string(config.generator.covariance);
        meta["files"] = {"phase_consistency.csv", "phase_a6.csv", "phase_log_theta.csv", "phase_qualifying.csv"};
        write_json(file_in(config, "phase.json"), meta);
    }
    return res;
}

}  // namespace bolasso
