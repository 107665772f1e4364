#include "bolasso/synthetic.hpp"

#include "bolasso/errors.hpp"
#include "bolasso/lasso.hpp"

#include <cmath>

namespace bolasso {

namespace {

constexpr uint64_t kLoadingsKey = 1;
constexpr uint64_t kCovarianceKey = 2;
constexpr uint64_t kDesignKey = 3;
constexpr uint64_t kNoiseKey = 4;

bool accepted(WantCondition want, double margin, double value) {
    switch (want) {
        case WantCondition::any: return true;
        case WantCondition::satisfied: return value < 1.0 - margin;
        case WantCondition::violated: return value > 1.0 + margin;
    }
    return true;
}

Matrix random_correlation(int p, double ratio, Rng& rng) {
    const Matrix U = random_orthogonal(p, rng);
    Vector spectrum(p);
    for (int i = 0; i < p; ++i) spectrum[i] = std::exp(-std::log(ratio) * rng.uniform());
    Matrix S = U * spectrum.asDiagonal() * U.transpose();
    const Vector d = S.diagonal().cwiseSqrt().cwiseInverse();
    S = d.asDiagonal() * S * d.asDiagonal();
    S = (0.5 * (S + S.transpose())).eval();
    S.diagonal().setOnes();
    return S;
}

}  // namespace

const char* to_string(CovarianceKind kind) {
    switch (kind) {
        case CovarianceKind::identity: return "identity";
        case CovarianceKind::random: return "random";
        case CovarianceKind::user: return "user";
    }
    return "unknown";
}

const char* to_string(WantCondition want) {
    switch (want) {
        case WantCondition::any: return "any";
        case WantCondition::satisfied: return "satisfied";
        case WantCondition::violated: return "violated";
    }
    return "unknown";
}

CovarianceKind parse_covariance_kind(const std::string& name) {
    if (name == "identity") return CovarianceKind::identity;
    if (name == "random") return CovarianceKind::random;
    if (name == "user") return CovarianceKind::user;
    throw InputError("unknown covariance kind '" + name + "'");
}

WantCondition parse_want_condition(const std::string& name) {
    if (name == "any") return WantCondition::any;
    if (name == "satisfied") return WantCondition::satisfied;
    if (name == "violated") return WantCondition::violated;
    throw InputError("unknown condition requirement '" + name + "'");
}

void GeneratorSpec::validate() const {
    if (n < 1 || p < 1) throw InputError("generator needs n >= 1 and p >= 1");
    if (j_count < 0 || j_count > p) throw InputError("j_count must lie in [0, p]");
    if (!(noise_sigma > 0.0)) throw InputError("noise_sigma must be positive");
    if (!(w_min > 0.0) || !(w_max >= w_min)) throw InputError("loading range must satisfy 0 < w_min <= w_max");
    if (!(spectrum_ratio >= 1.0)) throw InputError("spectrum_ratio must be >= 1");
    if (!(condition_margin >= 0.0)) throw InputError("condition_margin must be nonnegative");
    if (max_retries < 1) throw InputError("max_retries must be >= 1");
    if (covariance == CovarianceKind::user) {
        if (user_covariance.rows() != p || user_covariance.cols() != p)
            throw InputError("user covariance must be p x p");
        if (!user_covariance.allFinite()) throw InputError("user covariance has non-finite entries");
    }
}

Vector sample_loadings(const GeneratorSpec& spec, Rng& rng) {
    Vector w = Vector::Zero(spec.p);
    for (int j = 0; j < spec.j_count; ++j) {
        const double mag = spec.w_min + (spec.w_max - spec.w_min) * rng.uniform();
        w[j] = rng.uniform() < 0.5 ? -mag : mag;
    }
    return w;
}

Matrix random_orthogonal(int p, Rng& rng) {
    Matrix G(p, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) G(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Qm = qr.householderQ() * Matrix::Identity(p, p);
    const Matrix R = qr.matrixQR();
    for (int j = 0; j < p; ++j)
        if (R(j, j) < 0) Qm.col(j) *= -1.0;
    return Qm;
}

Matrix sample_covariance(const GeneratorSpec& spec, const GroundTruth& truth, Rng& rng, int* retries,
                         double* cond_value) {
    spec.validate();
    const int p = spec.p;
    auto value_of = [&](const Matrix& S) {
        return consistency_condition(make_moments(std::make_shared<Matrix>(S), S * truth.w_true, true), truth);
    };
    auto finish = [&](Matrix S, int tries, double value) {
        if (retries) *retries = tries;
        if (cond_value) *cond_value = value;
        return S;
    };
    if (spec.covariance != CovarianceKind::random) {
        Matrix S = spec.covariance == CovarianceKind::identity ? Matrix::Identity(p, p) : spec.user_covariance;
        const double v = value_of(S);
        if (!accepted(spec.want_condition, spec.condition_margin, v))
            throw InputError("fixed covariance does not meet the requested consistency condition (value " +
                             std::to_string(v) + ")");
        return finish(std::move(S), 0, v);
    }
    for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
        Matrix S = random_correlation(p, spec.spectrum_ratio, rng);
        const double v = value_of(S);
        if (accepted(spec.want_condition, spec.condition_margin, v)) return finish(std::move(S), attempt, v);
    }
    throw InputError("no covariance met the requested consistency condition after " +
                     std::to_string(spec.max_retries) + " draws; change spectrum_ratio, j_count or want_condition");
}

Matrix sample_design(const Matrix& covariance, int n, Rng& rng) {
    const auto p = covariance.rows();
    Eigen::LLT<Matrix> llt(covariance);
    if (llt.info() != Eigen::Success) throw InputError("covariance is not positive definite");
    Matrix Z(n, p);
    for (int i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) Z(i, j) = rng.normal();
    return Z * llt.matrixU();
}

Vector sample_response(const Matrix& X, const Vector& w, double sigma, Rng& rng) {
    Vector y = X * w;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sigma * rng.normal();
    return y;
}

SyntheticProblem generate(const GeneratorSpec& spec) {
    spec.validate();
    SyntheticProblem out;
    Rng lr = Rng::substream(spec.seed, {kLoadingsKey});
    out.truth = make_truth(sample_loadings(spec, lr));
    Rng cr = Rng::substream(spec.seed, {kCovarianceKey});
    out.covariance = sample_covariance(spec, out.truth, cr, &out.retries, &out.cond_value);
    out.population = make_moments(std::make_shared<Matrix>(out.covariance), out.covariance * out.truth.w_true);
    Rng dr = Rng::substream(spec.seed, {kDesignKey});
    Rng nr = Rng::substream(spec.seed, {kNoiseKey});
    Matrix X = sample_design(out.covariance, spec.n, dr);
    Vector y = sample_response(X, out.truth.w_true, spec.noise_sigma, nr);
    out.data = Dataset(std::move(X), std::move(y));
    return out;
}

}  // namespace bolasso
