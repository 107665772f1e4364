#include "bolasso/conditions.hpp"

#include "bolasso/errors.hpp"
#include "bolasso/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace bolasso {

namespace {

double min_eigenvalue(const Matrix& A) {
    if (A.rows() == 0) return std::numeric_limits<double>::infinity();
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void check_dims(const MomentForm& moments, const GroundTruth& truth) {
    if (truth.w_true.size() != moments.dim()) throw InputError("ground truth length does not match moment dimension");
    if (truth.s_bar.size() != truth.J.size()) throw InputError("ground truth signs do not match its support");
}

Vector sign_vector(const SignPattern& s) {
    Vector v(static_cast<Eigen::Index>(s.size()));
    for (size_t i = 0; i < s.size(); ++i) v[static_cast<Eigen::Index>(i)] = s[i];
    return v;
}

// Factorization of Q_{S,S} after a singularity check against the moments' rank tolerance.
Eigen::LDLT<Matrix> factor_block(const MomentForm& moments, const Support& S, const char* what, double* lmin = nullptr) {
    const Matrix block = submatrix(moments.Q(), S, S);
    const double lo = min_eigenvalue(block);
    if (lmin) *lmin = lo;
    if (!(lo > moments.rank_tolerance())) throw SingularError(std::string(what) + " is singular", S);
    return Eigen::LDLT<Matrix>(block);
}

Support set_union(const Support& a, const Support& b) {
    Support out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

GroundTruth make_truth(const Vector& w_true) {
    if (!w_true.allFinite()) throw InputError("w_true has non-finite entries");
    GroundTruth t;
    t.w_true = w_true;
    t.J = support_of(w_true);
    t.w_min = 0.0;
    for (size_t i = 0; i < t.J.size(); ++i) {
        const double v = w_true[t.J[i]];
        t.s_bar.push_back(v > 0 ? 1 : -1);
        t.w_min = i == 0 ? std::abs(v) : std::min(t.w_min, std::abs(v));
    }
    return t;
}

double consistency_condition(const MomentForm& moments, const GroundTruth& truth) {
    check_dims(moments, truth);
    const int p = static_cast<int>(moments.dim());
    if (truth.J.empty()) return 0.0;
    const Support Jc = complement(truth.J, p);
    if (Jc.empty()) return 0.0;
    const auto ldlt = factor_block(moments, truth.J, "Q_JJ");
    const Vector v = ldlt.solve(sign_vector(truth.s_bar));
    return (submatrix(moments.Q(), Jc, truth.J) * v).cwiseAbs().maxCoeff();
}

DiagnosticsReport local_problem(const MomentForm& moments, const GroundTruth& truth) {
    check_dims(moments, truth);
    const int p = static_cast<int>(moments.dim());
    const Support& J = truth.J;
    const Support Jc = complement(J, p);
    DiagnosticsReport r;
    r.delta = Vector::Zero(p);
    r.t.assign(static_cast<size_t>(p), 0);
    for (size_t i = 0; i < J.size(); ++i) r.t[static_cast<size_t>(J[i])] = truth.s_bar[i];

    if (J.empty()) {
        r.L = J;
        return r;
    }
    const Matrix& Q = moments.Q();
    const auto ldlt = factor_block(moments, J, "Q_JJ");
    const Vector s = sign_vector(truth.s_bar);
    if (Jc.empty()) {
        const Vector dJ = -ldlt.solve(s);
        for (size_t i = 0; i < J.size(); ++i) r.delta[J[i]] = dJ[static_cast<Eigen::Index>(i)];
        r.L = J;
        return r;
    }

    const Matrix Q_cJ = submatrix(Q, Jc, J);
    const Matrix A = ldlt.solve(Q_cJ.transpose()).transpose();  // Q_{Jc,J} Q_JJ^{-1}
    const Vector b = A * s;
    r.cond_value = b.cwiseAbs().maxCoeff();

    auto gram = std::make_shared<Matrix>(submatrix(Q, Jc, Jc) - A * Q_cJ.transpose());
    *gram = (0.5 * (*gram + gram->transpose())).eval();
    PathOptions opt;
    opt.mu_floor = 1.0;
    const RegularizationPath path = lasso_path(make_moments(gram, b, false), opt);
    if (path.mu_end() > 1.0) {
        r.reduced_degenerate = true;
        r.delta.setConstant(std::numeric_limits<double>::quiet_NaN());
        r.L = J;
        return r;
    }
    const Vector dc = path.solve_at(1.0).weights;
    const Vector resid = b - (*gram) * dc;
    const double thr = kZeroThreshold * std::max(1.0, dc.cwiseAbs().maxCoeff());
    for (size_t i = 0; i < Jc.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const int j = Jc[i];
        const bool nonzero = std::abs(dc[ii]) > thr;
        if (nonzero) {
            r.delta[j] = dc[ii];
            r.t[static_cast<size_t>(j)] = dc[ii] > 0 ? 1 : -1;
            r.K.push_back(j);
        } else if (std::abs(resid[ii]) >= 1.0 - kTightTolerance) {
            r.K.push_back(j);
            r.hinge.push_back(j);
        }
    }
    const Vector dJ = ldlt.solve(-s - Q_cJ.transpose() * subvector(r.delta, Jc));
    for (size_t i = 0; i < J.size(); ++i) r.delta[J[i]] = dJ[static_cast<Eigen::Index>(i)];
    r.L = set_union(J, r.K);

    // Polish: with the sign pattern fixed, Delta_L solves Q_LL Delta_L = -t_L.
    if (r.hinge.empty() && !r.K.empty()) {
        Vector tL(static_cast<Eigen::Index>(r.L.size()));
        for (size_t i = 0; i < r.L.size(); ++i) tL[static_cast<Eigen::Index>(i)] = r.t[static_cast<size_t>(r.L[i])];
        const Matrix QLL = submatrix(Q, r.L, r.L);
        if (min_eigenvalue(QLL) > moments.rank_tolerance()) {
            const Vector dL = -QLL.ldlt().solve(tL);
            bool same_signs = true;
            for (size_t i = 0; i < r.L.size(); ++i) {
                const double v = dL[static_cast<Eigen::Index>(i)];
                const bool in_k = std::binary_search(r.K.begin(), r.K.end(), r.L[i]);
                if (in_k && r.t[static_cast<size_t>(r.L[i])] * v <= 0.0) same_signs = false;
            }
            if (same_signs)
                for (size_t i = 0; i < r.L.size(); ++i) r.delta[r.L[i]] = dL[static_cast<Eigen::Index>(i)];
        }
    }
    return r;
}

double stability_theta(const MomentForm& moments, const DiagnosticsReport& report) {
    const int p = static_cast<int>(moments.dim());
    const Support& L = report.L;
    const Support Lc = complement(L, p);
    if (L.empty() && Lc.empty()) throw InputError("theta is undefined for an empty problem");
    if (report.t.size() != static_cast<size_t>(p)) throw InputError("report sign vector has wrong length");
    Vector tL(static_cast<Eigen::Index>(L.size()));
    for (size_t i = 0; i < L.size(); ++i) tL[static_cast<Eigen::Index>(i)] = report.t[static_cast<size_t>(L[i])];
    Vector v = Vector::Zero(tL.size());
    if (!L.empty()) v = factor_block(moments, L, "Q_LL").solve(tL);

    double theta = std::numeric_limits<double>::infinity();
    if (!Lc.empty()) {
        const double norm = L.empty() ? 0.0 : (submatrix(moments.Q(), Lc, L) * v).cwiseAbs().maxCoeff();
        theta = 1.0 - norm;
    }
    for (int k : report.K) {
        const auto pos = std::lower_bound(L.begin(), L.end(), k) - L.begin();
        theta = std::min(theta, std::abs(v[pos] * moments.Q()(k, k)));
    }
    return theta;
}

DiagnosticsReport assumption_check(const MomentForm& moments, const GroundTruth& truth) {
    DiagnosticsReport r = local_problem(moments, truth);
    if (r.reduced_degenerate) {
        r.stability_norm = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    const int p = static_cast<int>(moments.dim());
    const Support Lc = complement(r.L, p);
    const Matrix QLL = submatrix(moments.Q(), r.L, r.L);
    r.lmin_LL = min_eigenvalue(QLL);
    r.a5_holds = r.L.empty() || r.lmin_LL > moments.rank_tolerance();
    if (!r.a5_holds) {
        r.stability_norm = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    if (!r.L.empty() && !Lc.empty()) {
        Vector tL(static_cast<Eigen::Index>(r.L.size()));
        for (size_t i = 0; i < r.L.size(); ++i) tL[static_cast<Eigen::Index>(i)] = r.t[static_cast<size_t>(r.L[i])];
        const Vector v = Eigen::LDLT<Matrix>(QLL).solve(tL);
        r.stability_norm = (submatrix(moments.Q(), Lc, r.L) * v).cwiseAbs().maxCoeff();
    }
    r.a6_holds = r.hinge.empty() && r.stability_norm < 1.0 - kTightTolerance;
    if (r.a6_holds) r.theta = stability_theta(moments, r);
    return r;
}

}  // namespace bolasso
