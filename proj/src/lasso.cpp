#include "bolasso/lasso.hpp"

#include "bolasso/active_cholesky.hpp"
#include "bolasso/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace bolasso {

namespace {

std::atomic<uint64_t> g_audit_count{0};
std::atomic<double> g_audit_max{0.0};

void record_kkt(double r) {
    g_audit_count.fetch_add(1, std::memory_order_relaxed);
    double cur = g_audit_max.load(std::memory_order_relaxed);
    while (r > cur && !g_audit_max.compare_exchange_weak(cur, r, std::memory_order_relaxed)) {
    }
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void fill_spectrum(MomentForm& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(*m.gram, Eigen::EigenvaluesOnly);
    m.lambda_min = std::max(0.0, es.eigenvalues().minCoeff());
    m.lambda_max = es.eigenvalues().maxCoeff();
}

}  // namespace

MomentForm compute_moments(const Dataset& data, bool with_spectrum) {
    data.validate();
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    auto gram = std::make_shared<Matrix>(data.cols(), data.cols());
    gram->setZero();
    gram->selfadjointView<Eigen::Lower>().rankUpdate(data.X.transpose(), inv_n);
    *gram = gram->selfadjointView<Eigen::Lower>();
    MomentForm m;
    m.gram = std::move(gram);
    m.linear = inv_n * (data.X.transpose() * data.y);
    if (with_spectrum) fill_spectrum(m);
    return m;
}

MomentForm make_moments(std::shared_ptr<const Matrix> gram, Vector linear, bool with_spectrum) {
    if (!gram || gram->rows() != gram->cols()) throw InputError("Gram matrix must be square");
    if (gram->rows() != linear.size()) throw InputError("linear term length does not match Gram matrix");
    if (!gram->allFinite() || !linear.allFinite()) throw InputError("moment form contains non-finite entries");
    const double scale = std::max(1.0, gram->cwiseAbs().maxCoeff());
    if ((*gram - gram->transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw InputError("Gram matrix is not symmetric");
    MomentForm m;
    m.gram = std::move(gram);
    m.linear = std::move(linear);
    if (with_spectrum) fill_spectrum(m);
    return m;
}

MomentForm with_linear(const MomentForm& base, Vector linear) {
    MomentForm m = base;
    m.linear = std::move(linear);
    return m;
}

// ---------------------------------------------------------------------------
// Homotopy

namespace {

struct Event {
    int index;
    double mu;
};

class Homotopy {
public:
    Homotopy(const MomentForm& mf, const PathOptions& opt)
        : Q_(mf.Q()), c_(mf.c()), p_(static_cast<int>(mf.dim())), chol_(mf.Q()) {
        max_active_ = opt.max_active < 0 ? p_ : std::min(opt.max_active, p_);
        floor_ = std::max(0.0, opt.mu_floor);
        in_active_.assign(static_cast<size_t>(p_), false);
        sign_.assign(static_cast<size_t>(p_), 0);
    }

    void run(double& mu_max, double& mu_end, PathStop& stop, std::vector<PathSegment>& segs) {
        mu_max = p_ > 0 ? c_.cwiseAbs().maxCoeff() : 0.0;
        scale_ = mu_max;
        if (mu_max <= 0.0) {
            mu_end = 0.0;
            stop = PathStop::reached_zero;
            return;
        }
        if (mu_max <= floor_) {
            mu_end = mu_max;
            stop = PathStop::reached_floor;
            return;
        }
        const double tie = kTie * scale_;
        double mu = mu_max;
        std::vector<int> entering;
        std::vector<int> leaving;
        for (int j = 0; j < p_; ++j)
            if (std::abs(c_[j]) >= mu_max - tie) entering.push_back(j);

        const int guard = 50 * p_ + 1000;
        for (int iter = 0;; ++iter) {
            if (iter > guard) {
                stop = PathStop::degenerate;
                mu_end = mu;
                return;
            }
            if (!apply_events(mu, entering, leaving, stop)) {
                mu_end = mu;
                return;
            }
            solve_direction();
            const std::vector<int> just_entered = entering;
            const std::vector<int> just_left = leaving;
            entering.clear();
            leaving.clear();

            double next = -std::numeric_limits<double>::infinity();
            std::vector<Event> events;
            collect_events(mu, just_entered, just_left, events);
            for (const auto& e : events) next = std::max(next, e.mu);
            bool terminal = false;
            if (events.empty() || next <= floor_) {
                next = floor_;
                terminal = true;
            }
            if (next < mu) {
                if (!segment_end_valid(next)) {
                    mu_end = mu;
                    stop = PathStop::degenerate;
                    return;
                }
                segs.push_back(make_segment(mu, next));
            }
            if (terminal) {
                mu_end = floor_;
                stop = floor_ > 0.0 ? PathStop::reached_floor : PathStop::reached_zero;
                return;
            }
            for (const auto& e : events) {
                if (e.mu < next - tie) continue;
                if (in_active_[static_cast<size_t>(e.index)])
                    leaving.push_back(e.index);
                else
                    entering.push_back(e.index);
            }
            mu = next;
        }
    }

private:
    static constexpr double kTie = 1e-11;
    static constexpr double kSegmentTolerance = 1e-9;

    // Applies pending removals and additions at level mu. Returns false if the
    // path has to stop here.
    bool apply_events(double mu, std::vector<int>& entering, const std::vector<int>& leaving,
                      PathStop& stop) {
        // Correlations at mu (from the previous segment) decide the entering signs.
        if (!entering.empty()) {
            const auto& idx = chol_.indices();
            const Vector wA = current_active_weights(mu);
            for (int j : entering) {
                double r = c_[j];
                for (size_t k = 0; k < idx.size(); ++k) r -= Q_(j, idx[k]) * wA[static_cast<Eigen::Index>(k)];
                sign_[static_cast<size_t>(j)] = static_cast<int8_t>(r >= 0.0 ? 1 : -1);
            }
        }
        for (int j : leaving) {
            const auto& idx = chol_.indices();
            const auto pos = std::find(idx.begin(), idx.end(), j) - idx.begin();
            chol_.remove_at(static_cast<int>(pos));
            in_active_[static_cast<size_t>(j)] = false;
            sign_[static_cast<size_t>(j)] = 0;
        }
        if (entering.empty()) return true;
        if (chol_.size() + static_cast<int>(entering.size()) > max_active_) {
            stop = PathStop::max_active;
            return false;
        }
        if (entering.size() == 1) return add_all(entering, stop);
        return add_tied(mu, entering, stop);
    }

    bool add_all(const std::vector<int>& vars, PathStop& stop) {
        const std::vector<int> before = chol_.indices();
        for (int j : vars) {
            if (!chol_.append(j)) {
                chol_.rebuild(before);
                for (int v : vars)
                    if (std::find(before.begin(), before.end(), v) == before.end()) {
                        in_active_[static_cast<size_t>(v)] = false;
                    }
                stop = PathStop::degenerate;
                return false;
            }
            in_active_[static_cast<size_t>(j)] = true;
        }
        return true;
    }

    // Several variables reach the boundary together: add the largest subset
    // whose joint direction keeps the optimality conditions just below mu.
    bool add_tied(double mu, const std::vector<int>& tied, PathStop& stop) {
        const int t = static_cast<int>(tied.size());
        if (t > 10) return add_all(tied, stop);
        const std::vector<int> base = chol_.indices();
        std::vector<unsigned> masks;
        for (unsigned m = 1; m < (1u << t); ++m) masks.push_back(m);
        std::stable_sort(masks.begin(), masks.end(),
                         [](unsigned a, unsigned b) { return __builtin_popcount(a) > __builtin_popcount(b); });
        bool any_singular = false;
        for (unsigned mask : masks) {
            std::vector<int> chosen;
            for (int i = 0; i < t; ++i)
                if (mask & (1u << i)) chosen.push_back(tied[static_cast<size_t>(i)]);
            chol_.rebuild(base);
            bool ok = true;
            for (int j : chosen) {
                if (!chol_.append(j)) {
                    ok = false;
                    any_singular = true;
                    break;
                }
            }
            if (!ok) continue;
            for (int j : chosen) in_active_[static_cast<size_t>(j)] = true;
            solve_direction();
            if (tie_consistent(mu, tied)) return true;
            for (int j : chosen) in_active_[static_cast<size_t>(j)] = false;
        }
        chol_.rebuild(base);
        (void)any_singular;
        stop = PathStop::degenerate;
        return false;
    }

    bool tie_consistent(double /*mu*/, const std::vector<int>& tied) const {
        const double tol = 1e-9;
        const auto& idx = chol_.indices();
        for (int j : tied) {
            const int8_t s = sign_[static_cast<size_t>(j)];
            if (in_active_[static_cast<size_t>(j)]) {
                const auto pos = std::find(idx.begin(), idx.end(), j) - idx.begin();
                // w_j = a_j + mu b_j must move towards sign s as mu decreases.
                if (!(-slope_[pos] * s > tol)) return false;
            } else {
                // |r_j| must not exceed mu just below: s * beta_j >= 1.
                double beta = 0.0;
                for (size_t k = 0; k < idx.size(); ++k) beta -= Q_(j, idx[k]) * slope_[static_cast<Eigen::Index>(k)];
                if (s * beta < 1.0 - tol) return false;
            }
        }
        return true;
    }

    // Optimality at the low end of the current segment; fails when a
    // near-singular active block makes the direction unreliable.
    bool segment_end_valid(double mu) const {
        const auto& idx = chol_.indices();
        const Vector wA = current_active_weights(mu);
        const double tol = kSegmentTolerance * std::max(1.0, scale_);
        Vector grad = c_;
        for (size_t k = 0; k < idx.size(); ++k) grad -= Q_.col(idx[k]) * wA[static_cast<Eigen::Index>(k)];
        for (int j = 0; j < p_; ++j) {
            if (!in_active_[static_cast<size_t>(j)] && std::abs(grad[j]) > mu + tol) return false;
        }
        for (size_t k = 0; k < idx.size(); ++k) {
            const double sgn = sign_[static_cast<size_t>(idx[k])];
            if (std::abs(grad[idx[k]] - mu * sgn) > tol) return false;
            if (wA[static_cast<Eigen::Index>(k)] * sgn < -tol) return false;
        }
        return true;
    }

    Vector current_active_weights(double mu) const {
        if (intercept_.size() != chol_.size()) return Vector::Zero(chol_.size());
        return intercept_ + mu * slope_;
    }

    void solve_direction() {
        const auto& idx = chol_.indices();
        const auto k = static_cast<Eigen::Index>(idx.size());
        Vector cA(k);
        Vector sA(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            cA[i] = c_[idx[static_cast<size_t>(i)]];
            sA[i] = sign_[static_cast<size_t>(idx[static_cast<size_t>(i)])];
        }
        intercept_ = chol_.solve(cA);
        slope_ = -chol_.solve(sA);
    }

    void collect_events(double mu, const std::vector<int>& just_entered, const std::vector<int>& just_left,
                        std::vector<Event>& events) const {
        const double tie = kTie * scale_;
        const double upper = mu + tie;
        const auto& idx = chol_.indices();
        auto was = [](const std::vector<int>& v, int j) { return std::find(v.begin(), v.end(), j) != v.end(); };

        for (size_t k = 0; k < idx.size(); ++k) {
            const int j = idx[k];
            const double a = intercept_[static_cast<Eigen::Index>(k)];
            const double b = slope_[static_cast<Eigen::Index>(k)];
            if (b == 0.0) continue;
            const double root = -a / b;
            if (!(root >= 0.0)) continue;
            const double lim = was(just_entered, j) ? mu - tie : upper;
            if (root < lim) events.push_back({j, std::min(root, mu)});
        }
        for (int j = 0; j < p_; ++j) {
            if (in_active_[static_cast<size_t>(j)]) continue;
            double alpha = c_[j];
            double beta = 0.0;
            for (size_t k = 0; k < idx.size(); ++k) {
                const double q = Q_(j, idx[k]);
                alpha -= q * intercept_[static_cast<Eigen::Index>(k)];
                beta -= q * slope_[static_cast<Eigen::Index>(k)];
            }
            const double lim = was(just_left, j) ? mu - tie : upper;
            double best = -1.0;
            // alpha + mu beta = +mu  and  alpha + mu beta = -mu
            for (double side : {1.0, -1.0}) {
                const double denom = side - beta;
                if (denom == 0.0) continue;
                const double root = alpha / denom;
                if (root >= 0.0 && root < lim) best = std::max(best, root);
            }
            if (best >= 0.0) events.push_back({j, std::min(best, mu)});
        }
    }

    PathSegment make_segment(double hi, double lo) const {
        PathSegment s;
        s.mu_hi = hi;
        s.mu_lo = lo;
        s.active = chol_.indices();
        s.active_signs.reserve(s.active.size());
        for (int j : s.active) s.active_signs.push_back(sign_[static_cast<size_t>(j)]);
        s.intercept = intercept_;
        s.slope = slope_;
        return s;
    }

    const Matrix& Q_;
    const Vector& c_;
    int p_;
    int max_active_ = 0;
    double floor_ = 0.0;
    double scale_ = 1.0;
    ActiveCholesky chol_;
    std::vector<bool> in_active_;
    std::vector<int8_t> sign_;
    Vector intercept_;
    Vector slope_;
};

}  // namespace

RegularizationPath lasso_path(const MomentForm& moments, const PathOptions& options) {
    if (!moments.gram) throw InputError("moment form has no Gram matrix");
    if (options.mu_floor < 0.0 || !std::isfinite(options.mu_floor)) throw InputError("mu_floor must be finite and >= 0");
    RegularizationPath path;
    path.moments_ = moments;
    Homotopy h(moments, options);
    h.run(path.mu_max_, path.mu_end_, path.stop_, path.segments_);
    return path;
}

RegularizationPath lasso_path(const Dataset& data, int max_active) {
    PathOptions opt;
    opt.max_active = max_active;
    return lasso_path(data, opt);
}

RegularizationPath lasso_path(const Dataset& data, const PathOptions& options) {
    if (options.max_active > data.cols()) throw InputError("max_active exceeds the number of variables");
    return lasso_path(compute_moments(data, false), options);
}

std::vector<double> RegularizationPath::breakpoints() const {
    std::vector<double> out{mu_max_};
    for (const auto& s : segments_) out.push_back(s.mu_lo);
    return out;
}

LassoSolution RegularizationPath::solve_at(double mu) const {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw InputError("mu must be finite and nonnegative");
    const auto p = dim();
    LassoSolution sol;
    sol.mu = mu;
    sol.weights = Vector::Zero(p);
    if (mu < mu_max_) {
        const double slack = 1e-13 * std::max(1.0, mu_max_);
        if (mu < mu_end_ - slack) {
            throw RangeError("mu = " + fmt_double(mu) + " is outside the covered interval [" + fmt_double(mu_end_) +
                                 ", " + fmt_double(mu_max_) + "]",
                             mu_end_, mu_max_);
        }
        // Segments are ordered by decreasing level; pick the first one with mu >= mu_lo.
        auto it = std::lower_bound(segments_.begin(), segments_.end(), mu,
                                   [](const PathSegment& s, double v) { return s.mu_lo > v; });
        if (it == segments_.end() && !segments_.empty()) it = std::prev(segments_.end());
        if (it != segments_.end()) {
            const Vector wA = it->intercept + mu * it->slope;
            for (size_t k = 0; k < it->active.size(); ++k) sol.weights[it->active[k]] = wA[static_cast<Eigen::Index>(k)];
        }
    }
    sol.support = support_of(sol.weights);
    sol.signs = signs_of(sol.weights);
    // Only active columns of Q contribute to Qw.
    Vector grad = -moments_.c();
    for (int j : sol.support) grad += moments_.Q().col(j) * sol.weights[j];
    sol.subgradient = mu > 0.0 ? Vector(-grad / mu) : Vector(Vector::Zero(p));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        const int s = sol.signs[static_cast<size_t>(j)];
        const double v = s != 0 ? std::abs(grad[j] + mu * s) : std::max(0.0, std::abs(grad[j]) - mu);
        worst = std::max(worst, v);
    }
    sol.kkt_residual = worst;
    record_kkt(worst);
    return sol;
}

Support RegularizationPath::last_support() const {
    if (segments_.empty()) return {};
    Support s = segments_.back().active;
    std::sort(s.begin(), s.end());
    return s;
}

Support RegularizationPath::support_at_or_last(double mu, bool* covered) const {
    const double slack = 1e-13 * std::max(1.0, mu_max_);
    const bool ok = mu >= mu_end_ - slack || mu >= mu_max_;
    if (covered) *covered = ok;
    if (ok) return solve_at(mu).support;
    return last_support();
}

// ---------------------------------------------------------------------------

double kkt_check(const MomentForm& moments, double mu, const Vector& w) {
    if (w.size() != moments.dim()) throw InputError("weight vector length does not match moment form");
    if (!(mu >= 0.0)) throw InputError("mu must be nonnegative");
    const Vector grad = moments.Q() * w - moments.c();
    const SignPattern s = signs_of(w);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const int sj = s[static_cast<size_t>(j)];
        const double v = sj != 0 ? std::abs(grad[j] + mu * sj) : std::max(0.0, std::abs(grad[j]) - mu);
        worst = std::max(worst, v);
    }
    return worst;
}

double kkt_check(const Dataset& data, double mu, const Vector& w) {
    return kkt_check(compute_moments(data, false), mu, w);
}

Vector refit_ols(const Dataset& data, const Support& support) {
    data.validate();
    Vector w = Vector::Zero(data.cols());
    if (support.empty()) return w;
    for (int j : support)
        if (j < 0 || j >= data.cols()) throw InputError("support index out of range");
    const Matrix Xs = select_columns(data.X, support);
    Eigen::ColPivHouseholderQR<Matrix> qr(Xs);
    if (qr.rank() < static_cast<Eigen::Index>(support.size()))
        throw SingularError("design restricted to the support is rank deficient", support);
    const Vector ws = qr.solve(data.y);
    for (size_t k = 0; k < support.size(); ++k) w[support[k]] = ws[static_cast<Eigen::Index>(k)];
    return w;
}

double error_bound(const MomentForm& moments, double mu, double q_norm) {
    double lmin;
    double lmax;
    if (moments.lambda_min) {
        lmin = *moments.lambda_min;
        lmax = moments.lambda_max.value_or(1.0);
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(moments.Q(), Eigen::EigenvaluesOnly);
        lmin = es.eigenvalues().minCoeff();
        lmax = es.eigenvalues().maxCoeff();
    }
    if (!(lmin > kRankTolerance * std::max(1.0, lmax)))
        throw SingularError("error bound needs a full-rank Gram matrix", {});
    const double p = static_cast<double>(moments.dim());
    return (std::sqrt(p) * mu + q_norm) / lmin;
}

Vector alpha_hat(const MomentForm& moments, const LassoSolution& sol) {
    Eigen::LDLT<Matrix> ldlt(moments.Q());
    if (ldlt.info() != Eigen::Success || !moments.full_rank())
        throw SingularError("alpha_hat needs a full-rank Gram matrix with known spectrum", {});
    return -ldlt.solve(sol.subgradient);
}

KktAudit kkt_audit() { return {g_audit_max.load(), g_audit_count.load()}; }

void reset_kkt_audit() {
    g_audit_max.store(0.0);
    g_audit_count.store(0);
}

}  // namespace bolasso
