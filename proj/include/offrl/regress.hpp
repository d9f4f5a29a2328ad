#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "offrl/models.hpp"

namespace offrl {

/// Weighted ridge-regularized squared-loss problem
///   L(theta) = sum_k w_k (f(theta, phi_k) - y_k)^2 + lambda ||theta||^2
/// over the C_Theta ball of the referenced model.
struct RegressionProblem {
    std::vector<Eigen::VectorXd> features;
    std::vector<double> targets;
    std::vector<double> weights;  // empty means all ones
    double ridge = 1e-3;
    const Model* model = nullptr;  // non-owning; must outlive the fit

    void validate() const;
    double weight(std::size_t k) const { return weights.empty() ? 1.0 : weights[k]; }
};

struct OptimizerConfig {
    int max_iters = 5000;
    double grad_tol = 0.0;  // 0 resolves to 1e-8 * K at fit time
    int num_restarts = 5;   // restart 0 at theta = 0, the rest random in the ball
    double backtrack_shrink = 0.5;
    double armijo_c = 1e-4;
    std::uint64_t seed = 0;
    bool force_gradient = false;     // tests: exercise the gradient path on linear kind
    std::string trace_file;          // optional per-iteration CSV (iter, loss, grad-norm)

    void validate() const;
    double resolved_grad_tol(std::size_t num_samples) const {
        return grad_tol > 0 ? grad_tol : 1e-8 * static_cast<double>(num_samples);
    }
};

struct FitResult {
    Eigen::VectorXd theta;
    double loss = 0.0;
    int iterations = 0;       // total accepted iterations over restarts
    double grad_norm = 0.0;   // projected-gradient norm at the returned point
    int failed_restarts = 0;  // restarts aborted on non-finite loss/gradient
};

/// Unconstrained weighted ridge solution
///   (sum_k w_k phi_k phi_k^T + lambda I)^{-1} sum_k w_k phi_k y_k
/// via Cholesky. Throws when the factorization fails (non-finite input).
Eigen::VectorXd closed_form_linear(const std::vector<Eigen::VectorXd>& features,
                                   const std::vector<double>& targets,
                                   const std::vector<double>& weights, double ridge);

double loss_at(const RegressionProblem& problem, const Eigen::VectorXd& theta);
Eigen::VectorXd loss_gradient(const RegressionProblem& problem, const Eigen::VectorXd& theta);

/// Best-of-restarts projected gradient descent with Armijo backtracking.
/// Linear models route to the closed form (exact stationary point; if the
/// ball constraint is active the exact constrained minimizer is found by
/// ridge bisection). Deterministic for fixed (problem, config, seed).
FitResult fit(const RegressionProblem& problem, const OptimizerConfig& config);

}  // namespace offrl
