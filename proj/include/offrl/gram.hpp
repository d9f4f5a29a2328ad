#pragma once

#include <Eigen/Dense>
#include <vector>

namespace offrl {

/// Regularized gradient Gram accumulator M = sum_k w_k g_k g_k^T + lambda I
/// with an eagerly computed Cholesky factor. Immutable after construction;
/// bonus/solve are pure. All quadratic forms go through the factor, never an
/// explicit inverse.
class GramMatrix {
  public:
    /// Builds M and its factor. Non-finite gradient entries are rejected
    /// with the offending sample index. If rounding ever defeats the
    /// factorization the ridge escalates lambda -> 10*lambda (at most 3
    /// times, logged).
    GramMatrix(const std::vector<Eigen::VectorXd>& grads, const std::vector<double>& weights,
               double ridge);

    int dim() const { return static_cast<int>(matrix_.rows()); }
    double ridge() const { return ridge_; }
    std::size_t count() const { return count_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const Eigen::MatrixXd& cholesky_lower() const { return chol_lower_; }

    /// beta * sqrt(g^T M^{-1} g); zero iff g = 0 or beta = 0.
    double bonus(const Eigen::VectorXd& g, double beta) const;

    /// x with M x = b by forward/back substitution.
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  private:
    Eigen::MatrixXd matrix_;
    Eigen::MatrixXd chol_lower_;
    double ridge_ = 0.0;
    std::size_t count_ = 0;
};

/// Smallest eigenvalue of a symmetric matrix; rejects asymmetry beyond 1e-9.
double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace offrl
