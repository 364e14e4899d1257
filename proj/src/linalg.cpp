#include "opelab/linalg.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "opelab/errors.hpp"

namespace opelab {

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double condition_number(const Eigen::MatrixXd& sym) {
    const Eigen::VectorXd ev = symmetric_eigenvalues(sym);
    const double lo = ev(0), hi = ev(ev.size() - 1);
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

int numerical_rank(const Eigen::MatrixXd& sym) {
    const Eigen::VectorXd ev = symmetric_eigenvalues(sym);
    const double hi = ev(ev.size() - 1);
    if (!(hi > 0.0)) return 0;
    int rank = 0;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > hi / kMaxCondition) ++rank;
    return rank;
}

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& m, const Eigen::VectorXd& weights) {
    const Eigen::Index rows = m.rows(), cols = m.cols();
    std::vector<long double> acc(static_cast<std::size_t>(rows * rows), 0.0L);
    const bool unit = weights.size() == 0;
    for (Eigen::Index c = 0; c < cols; ++c) {
        const long double w = unit ? 1.0L : static_cast<long double>(weights(c));
        if (w == 0.0L) continue;
        for (Eigen::Index i = 0; i < rows; ++i) {
            const long double wi = w * m(i, c);
            if (wi == 0.0L) continue;
            for (Eigen::Index j = i; j < rows; ++j) acc[i * rows + j] += wi * m(j, c);
        }
    }
    Eigen::MatrixXd g(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = i; j < rows; ++j) g(i, j) = g(j, i) = static_cast<double>(acc[i * rows + j]);
    return g;
}

Eigen::VectorXd singular_values_wide(const Eigen::MatrixXd& m) {
    Eigen::VectorXd ev = symmetric_eigenvalues(weighted_gram(m, Eigen::VectorXd()));
    for (int i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
    return ev;
}

Eigen::VectorXd guarded_solve(const Eigen::MatrixXd& sym, const Eigen::VectorXd& rhs, const std::string& what) {
    const Eigen::VectorXd ev = symmetric_eigenvalues(sym);
    const double lo = ev(0), hi = ev(ev.size() - 1);
    if (!(lo > 0.0) || hi / lo > kMaxCondition)
        throw ConditioningError(what + " is too close to singular (lambda_min = " + std::to_string(lo) +
                                    ", lambda_max = " + std::to_string(hi) + ")",
                                std::sqrt(std::max(lo, 0.0)));
    return sym.partialPivLu().solve(rhs);
}

Eigen::VectorXd anchored_psd_solve(const Eigen::MatrixXd& sym, const Eigen::VectorXd& rhs,
                                   const Eigen::VectorXd& anchor, const std::string& what, double tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const Eigen::MatrixXd& q = es.eigenvectors();
    const double hi = ev(ev.size() - 1);
    if (!(hi > 0.0)) throw ConditioningError(what + " is zero", 0.0);

    if (ev(0) > hi / kMaxCondition) {
        // Full rank: plain solve.
        return sym.partialPivLu().solve(rhs);
    }
    const Eigen::VectorXd residual = rhs - sym * anchor;
    Eigen::VectorXd coeff = q.transpose() * residual;
    double inconsistency = 0.0;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) > hi / kMaxCondition) {
            coeff(i) /= ev(i);
        } else {
            inconsistency = std::max(inconsistency, std::abs(coeff(i)));
            coeff(i) = 0.0;
        }
    }
    if (inconsistency > tol)
        throw ConditioningError(what + " is singular and the right-hand side leaves its range (gap " +
                                    std::to_string(inconsistency) + ")",
                                std::sqrt(std::max(ev(0), 0.0)));
    return anchor + q * coeff;
}

}  // namespace opelab
