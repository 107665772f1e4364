#include "bolasso/selection.hpp"

#include "bolasso/errors.hpp"
#include "bolasso/lasso.hpp"
#include "bolasso/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>

namespace bolasso {

namespace {

void check_grid(const std::vector<double>& mus) {
    if (mus.empty()) throw InputError("at least one regularization level is required");
    for (double mu : mus)
        if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("regularization levels must be finite and positive");
}

double min_level(const std::vector<double>& mus) { return *std::min_element(mus.begin(), mus.end()); }

// Reads supports at every level off one path; counts levels the path did not reach.
void read_supports(const RegularizationPath& path, const std::vector<double>& mus, size_t rep,
                   std::vector<std::vector<Support>>& out, std::vector<std::vector<char>>& degenerate) {
    for (size_t k = 0; k < mus.size(); ++k) {
        bool covered = true;
        out[k][rep] = path.support_at_or_last(mus[k], &covered);
        degenerate[k][rep] = covered ? 0 : 1;
    }
}

GridSelection finish(std::vector<double> mus, std::vector<std::vector<Support>> supports,
                     const std::vector<std::vector<char>>& degenerate) {
    GridSelection g;
    g.mus = std::move(mus);
    g.supports = std::move(supports);
    g.degenerate.assign(g.mus.size(), 0);
    g.base_degenerate.assign(g.mus.size(), 0);
    for (size_t k = 0; k < g.mus.size(); ++k)
        for (char d : degenerate[k]) g.degenerate[k] += d;
    return g;
}

GridSelection pairs_grid(const Dataset& data, const std::vector<double>& mus, const ReplicationScheme& scheme,
                         int workers) {
    const auto m = static_cast<size_t>(scheme.replications);
    std::vector<std::vector<Support>> supports(mus.size(), std::vector<Support>(m));
    std::vector<std::vector<char>> degenerate(mus.size(), std::vector<char>(m, 0));
    PathOptions opt;
    opt.mu_floor = min_level(mus);
    parallel_for(static_cast<int>(m), workers, [&](int r) {
        Rng rng = replication_stream(scheme.seed, static_cast<uint64_t>(r));
        const Dataset rep = bootstrap_pairs(data, rng);
        const RegularizationPath path = lasso_path(compute_moments(rep, false), opt);
        read_supports(path, mus, static_cast<size_t>(r), supports, degenerate);
    });
    return finish(mus, std::move(supports), degenerate);
}

GridSelection noise_grid(const Dataset& data, const std::vector<double>& mus, const ReplicationScheme& scheme,
                         const SelectionOptions& options) {
    if (!options.oracle) throw InputError("oracle_noise scheme needs the generating model (w_true, sigma)");
    const OracleNoise& truth = *options.oracle;
    const auto m = static_cast<size_t>(scheme.replications);
    std::vector<std::vector<Support>> supports(mus.size(), std::vector<Support>(m));
    std::vector<std::vector<char>> degenerate(mus.size(), std::vector<char>(m, 0));
    const MomentForm base = compute_moments(data, false);
    const NoiseSampler noise = gaussian_noise(truth.sigma);
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    PathOptions opt;
    opt.mu_floor = min_level(mus);
    parallel_for(static_cast<int>(m), options.workers, [&](int r) {
        Rng rng = replication_stream(scheme.seed, static_cast<uint64_t>(r));
        const Dataset rep = oracle_noise_replicate(data.X, truth.w_true, noise, rng);
        const RegularizationPath path = lasso_path(with_linear(base, inv_n * (data.X.transpose() * rep.y)), opt);
        read_supports(path, mus, static_cast<size_t>(r), supports, degenerate);
    });
    return finish(mus, std::move(supports), degenerate);
}

GridSelection split_grid(const Dataset& data, const std::vector<double>& mus, const ReplicationScheme& scheme,
                         int workers) {
    Rng rng = Rng::substream(scheme.seed, {0x73706c6974ULL});
    const SplitResult split = split_pieces(data, scheme.replications, rng);
    const auto m = split.pieces.size();
    std::vector<std::vector<Support>> supports(mus.size(), std::vector<Support>(m));
    std::vector<std::vector<char>> degenerate(mus.size(), std::vector<char>(m, 0));
    PathOptions opt;
    opt.mu_floor = min_level(mus);
    parallel_for(static_cast<int>(m), workers, [&](int r) {
        const RegularizationPath path = lasso_path(compute_moments(split.pieces[static_cast<size_t>(r)], false), opt);
        read_supports(path, mus, static_cast<size_t>(r), supports, degenerate);
    });
    GridSelection g = finish(mus, std::move(supports), degenerate);
    g.dropped_rows = split.dropped;
    return g;
}

GridSelection residuals_grid(const Dataset& data, const std::vector<double>& mus, const ReplicationScheme& scheme,
                             int workers) {
    const auto m = static_cast<size_t>(scheme.replications);
    const auto n = static_cast<int>(data.rows());
    const double inv_n = 1.0 / static_cast<double>(n);
    const MomentForm base = compute_moments(data, false);
    PathOptions full_opt;
    full_opt.mu_floor = min_level(mus);
    const RegularizationPath full = lasso_path(base, full_opt);

    // The resampled indices of replication r are shared by every level.
    std::vector<std::vector<int>> draws(m);
    for (size_t r = 0; r < m; ++r) {
        Rng rng = replication_stream(scheme.seed, r);
        draws[r] = bootstrap_indices(n, rng);
    }

    struct LevelData {
        Vector centered;
        Vector gram_w;
        bool degenerate = false;
    };
    std::vector<LevelData> levels(mus.size());
    parallel_for(static_cast<int>(mus.size()), workers, [&](int k) {
        bool covered = true;
        full.support_at_or_last(mus[static_cast<size_t>(k)], &covered);
        const double at = covered ? mus[static_cast<size_t>(k)] : full.mu_end();
        const Vector w_hat = full.solve_at(at).weights;
        LevelData& ld = levels[static_cast<size_t>(k)];
        ld.centered = compute_residuals(data, w_hat).centered;
        ld.gram_w = base.Q() * w_hat;
        ld.degenerate = !covered;
    });

    std::vector<std::vector<Support>> supports(mus.size(), std::vector<Support>(m));
    std::vector<std::vector<char>> degenerate(mus.size(), std::vector<char>(m, 0));
    const int total = static_cast<int>(mus.size() * m);
    parallel_for(total, workers, [&](int task) {
        const size_t k = static_cast<size_t>(task) / m;
        const size_t r = static_cast<size_t>(task) % m;
        const LevelData& ld = levels[k];
        Vector eps(n);
        for (int i = 0; i < n; ++i) eps[i] = ld.centered[draws[r][static_cast<size_t>(i)]];
        Vector c = ld.gram_w + inv_n * (data.X.transpose() * eps);
        PathOptions opt;
        opt.mu_floor = mus[k];
        const RegularizationPath path = lasso_path(with_linear(base, std::move(c)), opt);
        bool covered = true;
        supports[k][r] = path.support_at_or_last(mus[k], &covered);
        degenerate[k][r] = covered ? 0 : 1;
    });
    GridSelection g = finish(mus, std::move(supports), degenerate);
    for (size_t k = 0; k < mus.size(); ++k) g.base_degenerate[k] = levels[k].degenerate ? 1 : 0;
    return g;
}

}  // namespace

Support intersect_supports(const std::vector<Support>& supports) {
    if (supports.empty()) throw InputError("cannot intersect an empty sequence of supports");
    Support acc = supports.front();
    for (size_t i = 1; i < supports.size() && !acc.empty(); ++i) {
        Support next;
        std::set_intersection(acc.begin(), acc.end(), supports[i].begin(), supports[i].end(), std::back_inserter(next));
        acc.swap(next);
    }
    return acc;
}

GridSelection replicate_supports(const Dataset& data, const std::vector<double>& mus, const ReplicationScheme& scheme,
                                 const SelectionOptions& options) {
    data.validate();
    scheme.validate();
    check_grid(mus);
    GridSelection g;
    switch (scheme.kind) {
        case SchemeKind::pairs: g = pairs_grid(data, mus, scheme, options.workers); break;
        case SchemeKind::residuals: g = residuals_grid(data, mus, scheme, options.workers); break;
        case SchemeKind::split: g = split_grid(data, mus, scheme, options.workers); break;
        case SchemeKind::oracle_noise: g = noise_grid(data, mus, scheme, options); break;
    }
    return g;
}

GridSelection replicate_supports_two_step(const Dataset& data, const std::vector<double>& mus,
                                          const ReplicationScheme& scheme, const SelectionOptions& options) {
    data.validate();
    scheme.validate();
    check_grid(mus);
    const auto p = static_cast<int>(data.cols());
    if (p < 2) throw InputError("two-step selection needs p >= 2");
    if (scheme.kind == SchemeKind::oracle_noise) throw InputError("two-step selection supports pairs, residuals and split");
    const double factor = std::log(static_cast<double>(p));

    PathOptions opt;
    opt.mu_floor = min_level(mus) * factor;
    const RegularizationPath first = lasso_path(compute_moments(data, false), opt);

    std::vector<Support> restricted(mus.size());
    std::map<Support, std::vector<size_t>> groups;
    for (size_t k = 0; k < mus.size(); ++k) {
        restricted[k] = first.support_at_or_last(mus[k] * factor);
        groups[restricted[k]].push_back(k);
    }

    const auto m = static_cast<size_t>(scheme.replications);
    GridSelection g;
    g.mus = mus;
    g.supports.assign(mus.size(), std::vector<Support>(m));
    g.degenerate.assign(mus.size(), 0);
    g.base_degenerate.assign(mus.size(), 0);
    g.restricted = restricted;
    for (const auto& [cols, ks] : groups) {
        if (cols.empty()) continue;
        const Dataset sub(select_columns(data.X, cols), data.y);
        std::vector<double> sub_mus;
        for (size_t k : ks) sub_mus.push_back(mus[k]);
        const GridSelection inner = replicate_supports(sub, sub_mus, scheme, options);
        g.dropped_rows = inner.dropped_rows;
        for (size_t i = 0; i < ks.size(); ++i) {
            const size_t k = ks[i];
            g.degenerate[k] = inner.degenerate[i];
            g.base_degenerate[k] = inner.base_degenerate[i];
            for (size_t r = 0; r < inner.supports[i].size(); ++r) {
                Support mapped;
                mapped.reserve(inner.supports[i][r].size());
                for (int j : inner.supports[i][r]) mapped.push_back(cols[static_cast<size_t>(j)]);
                g.supports[k][r] = std::move(mapped);
            }
            g.supports[k].resize(inner.supports[i].size());
        }
    }
    return g;
}

SelectionRun summarize(const Dataset& data, const GridSelection& grid, size_t k, const ReplicationScheme& scheme) {
    SelectionRun run;
    run.mu = grid.mus.at(k);
    run.scheme = scheme;
    run.per_replication_supports = grid.supports[k];
    run.degenerate_replicates = grid.degenerate[k];
    run.base_degenerate = grid.base_degenerate[k] != 0;
    run.dropped_rows = grid.dropped_rows;
    const auto p = data.cols();
    run.frequencies = Vector::Zero(p);
    const auto m = run.per_replication_supports.size();
    std::vector<long> counts(static_cast<size_t>(p), 0);
    for (const auto& s : run.per_replication_supports)
        for (int j : s) ++counts[static_cast<size_t>(j)];
    for (Eigen::Index j = 0; j < p; ++j)
        run.frequencies[j] = m ? static_cast<double>(counts[static_cast<size_t>(j)]) / static_cast<double>(m) : 0.0;
    run.intersected = m ? intersect_supports(run.per_replication_supports) : Support{};
    try {
        run.refit_weights = refit_ols(data, run.intersected);
    } catch (const SingularError&) {
        run.refit_ok = false;
        run.refit_weights = Vector::Zero(p);
    }
    if (!grid.restricted.empty()) {
        run.two_step = true;
        run.restricted = grid.restricted[k];
        run.empty_restriction = run.restricted.empty();
    }
    return run;
}

SelectionRun run_bolasso(const Dataset& data, double mu, const ReplicationScheme& scheme,
                         const SelectionOptions& options) {
    const GridSelection g = replicate_supports(data, {mu}, scheme, options);
    return summarize(data, g, 0, scheme);
}

SelectionRun run_two_step(const Dataset& data, double mu, const ReplicationScheme& scheme,
                          const SelectionOptions& options) {
    const GridSelection g = replicate_supports_two_step(data, {mu}, scheme, options);
    return summarize(data, g, 0, scheme);
}

}  // namespace bolasso
