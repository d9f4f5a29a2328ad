#include "offrl/gram.hpp"

#include <stdexcept>
#include <string>

#include "offrl/csv.hpp"
#include "offrl/log.hpp"

namespace offrl {

GramMatrix::GramMatrix(const std::vector<Eigen::VectorXd>& grads,
                       const std::vector<double>& weights, double ridge) {
    if (!(ridge > 0)) throw std::invalid_argument("gram ridge must be positive");
    if (!weights.empty() && weights.size() != grads.size())
        throw std::invalid_argument("gradient/weight count mismatch");
    int d = grads.empty() ? 0 : static_cast<int>(grads[0].size());
    if (grads.empty())
        throw std::invalid_argument("gram accumulation needs the dimension; pass at least "
                                    "lambda*I via a zero gradient or use a nonempty list");
    for (std::size_t k = 0; k < grads.size(); ++k) {
        if (grads[k].size() != d)
            throw std::invalid_argument("gradient " + std::to_string(k) + " has wrong dimension");
        if (!grads[k].allFinite())
            throw std::invalid_argument("non-finite gradient entry at sample " + std::to_string(k));
        if (!weights.empty() && !(weights[k] > 0 && std::isfinite(weights[k])))
            throw std::invalid_argument("non-positive or non-finite weight at sample " +
                                        std::to_string(k));
    }

    Eigen::MatrixXd accum = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t k = 0; k < grads.size(); ++k)
        accum.selfadjointView<Eigen::Lower>().rankUpdate(grads[k],
                                                         weights.empty() ? 1.0 : weights[k]);
    accum.triangularView<Eigen::StrictlyUpper>() = accum.transpose();

    ridge_ = ridge;
    count_ = grads.size();
    for (int attempt = 0; attempt <= 3; ++attempt) {
        matrix_ = accum + ridge_ * Eigen::MatrixXd::Identity(d, d);
        Eigen::LLT<Eigen::MatrixXd> llt(matrix_);
        if (llt.info() == Eigen::Success) {
            chol_lower_ = llt.matrixL();
            return;
        }
        if (attempt == 3) break;
        ridge_ *= 10.0;
        log::warn("gram factorization failed; escalating ridge to " + csv::format_double(ridge_));
    }
    throw std::runtime_error("gram factorization failed after ridge escalation");
}

double GramMatrix::bonus(const Eigen::VectorXd& g, double beta) const {
    if (beta < 0) throw std::invalid_argument("bonus requires beta >= 0");
    if (g.size() != dim()) throw std::invalid_argument("bonus vector has wrong dimension");
    // g^T M^{-1} g = ||L^{-1} g||^2
    Eigen::VectorXd y = chol_lower_.triangularView<Eigen::Lower>().solve(g);
    return beta * y.norm();
}

Eigen::VectorXd GramMatrix::solve(const Eigen::VectorXd& b) const {
    if (b.size() != dim()) throw std::invalid_argument("solve vector has wrong dimension");
    if (!b.allFinite()) throw std::invalid_argument("solve requires finite right-hand side");
    Eigen::VectorXd y = chol_lower_.triangularView<Eigen::Lower>().solve(b);
    return chol_lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("min_eigenvalue requires a square matrix");
    double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9)
        throw std::invalid_argument("matrix is asymmetric by " + csv::format_double(asym));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()),
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");
    return solver.eigenvalues()(0);
}

}  // namespace offrl
