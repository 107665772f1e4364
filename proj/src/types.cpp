#include "bolasso/types.hpp"

#include "bolasso/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bolasso {

Dataset::Dataset(Matrix x, Vector resp) : X(std::move(x)), y(std::move(resp)) {}

double Dataset::row_bound() const { return X.size() == 0 ? 0.0 : X.cwiseAbs().maxCoeff(); }

void Dataset::validate() const {
    if (X.rows() < 1 || X.cols() < 1) throw InputError("dataset must have n >= 1 and p >= 1");
    if (y.size() != X.rows()) {
        throw InputError("response length " + std::to_string(y.size()) + " does not match " +
                         std::to_string(X.rows()) + " design rows");
    }
    if (!X.allFinite()) throw InputError("design matrix contains non-finite entries");
    if (!y.allFinite()) throw InputError("response contains non-finite entries");
}

double MomentForm::rank_tolerance() const noexcept {
    return kRankTolerance * std::max(1.0, lambda_max.value_or(1.0));
}

bool MomentForm::full_rank() const noexcept {
    return lambda_min.has_value() && *lambda_min > rank_tolerance();
}

Support support_of(const Vector& w) {
    Support s;
    if (w.size() == 0) return s;
    const double thr = kZeroThreshold * std::max(1.0, w.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (std::abs(w[j]) > thr) s.push_back(static_cast<int>(j));
    }
    return s;
}

SignPattern signs_of(const Vector& w) {
    SignPattern s(static_cast<size_t>(w.size()), 0);
    for (int j : support_of(w)) s[static_cast<size_t>(j)] = w[j] > 0 ? 1 : -1;
    return s;
}

Matrix submatrix(const Matrix& A, const std::vector<int>& rows, const std::vector<int>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j)
        for (size_t i = 0; i < rows.size(); ++i) out(i, j) = A(rows[i], cols[j]);
    return out;
}

Vector subvector(const Vector& v, const std::vector<int>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

Matrix select_columns(const Matrix& A, const std::vector<int>& cols) {
    Matrix out(A.rows(), static_cast<Eigen::Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) out.col(j) = A.col(cols[j]);
    return out;
}

Support complement(const Support& s, int p) {
    Support out;
    out.reserve(static_cast<size_t>(p) - std::min(s.size(), static_cast<size_t>(p)));
    size_t k = 0;
    for (int j = 0; j < p; ++j) {
        if (k < s.size() && s[k] == j) {
            ++k;
            continue;
        }
        out.push_back(j);
    }
    return out;
}

}  // namespace bolasso
