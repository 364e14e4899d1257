#pragma once

#include <string>

#include <Eigen/Dense>

namespace opelab {

/// Condition-number guard applied to every covariance-like solve.
inline constexpr double kMaxCondition = 1e12;

/// Eigenvalues (ascending) of a symmetric matrix.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& sym);

/// lambda_max / lambda_min of a symmetric PSD matrix; +inf when lambda_min <= 0.
double condition_number(const Eigen::MatrixXd& sym);

/// Number of eigenvalues above kMaxCondition^-1 * lambda_max.
int numerical_rank(const Eigen::MatrixXd& sym);

/// G = M diag(weights) M^T accumulated in extended precision. Entries with
/// weight 0 are skipped. Pass an empty weight vector for unit weights.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& m, const Eigen::VectorXd& weights);

/// Singular values of a wide matrix M (ascending), read off the eigenvalues of M M^T.
Eigen::VectorXd singular_values_wide(const Eigen::MatrixXd& m);

/// Solves sym * x = rhs by LU with partial pivoting after checking the
/// condition number. Throws ConditioningError naming `what`.
Eigen::VectorXd guarded_solve(const Eigen::MatrixXd& sym, const Eigen::VectorXd& rhs, const std::string& what);

/**
 * Solution of sym * x = rhs nearest to `anchor` in the 2-norm, for a PSD `sym`
 * that may be rank deficient: x = anchor + sym^+ (rhs - sym * anchor).
 * Directions with eigenvalue below kMaxCondition^-1 * lambda_max are treated as null.
 * Throws ConditioningError when the system is inconsistent beyond `tol`.
 */
Eigen::VectorXd anchored_psd_solve(const Eigen::MatrixXd& sym, const Eigen::VectorXd& rhs,
                                   const Eigen::VectorXd& anchor, const std::string& what, double tol);

}  // namespace opelab
