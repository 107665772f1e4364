#include "bolasso/resampling.hpp"

#include "bolasso/errors.hpp"

#include <numeric>

namespace bolasso {

const char* to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::pairs: return "pairs";
        case SchemeKind::residuals: return "residuals";
        case SchemeKind::split: return "split";
        case SchemeKind::oracle_noise: return "oracle_noise";
    }
    return "unknown";
}

SchemeKind parse_scheme_kind(const std::string& name) {
    if (name == "pairs") return SchemeKind::pairs;
    if (name == "residuals") return SchemeKind::residuals;
    if (name == "split") return SchemeKind::split;
    if (name == "oracle_noise" || name == "noise") return SchemeKind::oracle_noise;
    throw InputError("unknown replication scheme '" + name + "'");
}

void ReplicationScheme::validate() const {
    if (replications < 1) throw InputError("replication count must be >= 1");
}

std::vector<int> bootstrap_indices(int n, Rng& rng) {
    std::vector<int> idx(static_cast<size_t>(n));
    for (auto& i : idx) i = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(n)));
    return idx;
}

Dataset bootstrap_pairs(const Dataset& data, Rng& rng) {
    const auto n = static_cast<int>(data.rows());
    if (n < 1) throw InputError("cannot bootstrap an empty dataset");
    const std::vector<int> idx = bootstrap_indices(n, rng);
    Dataset out;
    out.X.resize(n, data.cols());
    out.y.resize(n);
    for (int i = 0; i < n; ++i) {
        out.X.row(i) = data.X.row(idx[static_cast<size_t>(i)]);
        out.y[i] = data.y[idx[static_cast<size_t>(i)]];
    }
    return out;
}

ResidualSet compute_residuals(const Dataset& data, const Vector& w_hat) {
    if (w_hat.size() != data.cols()) throw InputError("weight vector length does not match design columns");
    ResidualSet r;
    r.raw = data.y - data.X * w_hat;
    r.mean = r.raw.mean();
    r.centered = r.raw.array() - r.mean;
    return r;
}

Dataset bootstrap_residuals(const Dataset& data, const Vector& w_hat, Rng& rng) {
    const ResidualSet res = compute_residuals(data, w_hat);
    const Vector fitted = data.X * w_hat;
    const auto n = static_cast<int>(data.rows());
    Dataset out;
    out.X = data.X;
    out.y.resize(n);
    for (int i = 0; i < n; ++i) out.y[i] = fitted[i] + res.centered[static_cast<Eigen::Index>(rng.uniform_index(n))];
    return out;
}

SplitResult split_pieces(const Dataset& data, int m, Rng& rng) {
    const auto n = static_cast<int>(data.rows());
    if (m < 1) throw InputError("number of pieces must be >= 1");
    if (m > n) throw InputError("cannot split " + std::to_string(n) + " rows into " + std::to_string(m) + " pieces");
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[static_cast<size_t>(i)], perm[rng.uniform_index(i + 1)]);
    const int size = n / m;
    SplitResult out;
    out.dropped = n - size * m;
    for (int k = 0; k < m; ++k) {
        std::vector<int> rows(perm.begin() + k * size, perm.begin() + (k + 1) * size);
        Dataset piece;
        piece.X.resize(size, data.cols());
        piece.y.resize(size);
        for (int i = 0; i < size; ++i) {
            piece.X.row(i) = data.X.row(rows[static_cast<size_t>(i)]);
            piece.y[i] = data.y[rows[static_cast<size_t>(i)]];
        }
        out.pieces.push_back(std::move(piece));
        out.rows.push_back(std::move(rows));
    }
    return out;
}

NoiseSampler gaussian_noise(double sigma) {
    if (!(sigma >= 0.0)) throw InputError("noise sigma must be nonnegative");
    return [sigma](Rng& rng) { return sigma == 0.0 ? 0.0 : sigma * rng.normal(); };
}

Dataset oracle_noise_replicate(const Matrix& design, const Vector& w_true, const NoiseSampler& noise, Rng& rng) {
    if (w_true.size() != design.cols()) throw InputError("w_true length does not match design columns");
    Dataset out;
    out.X = design;
    out.y = design * w_true;
    for (Eigen::Index i = 0; i < out.y.size(); ++i) out.y[i] += noise(rng);
    return out;
}

}  // namespace bolasso
