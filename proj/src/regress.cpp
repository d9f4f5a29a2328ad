#include "offrl/regress.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "offrl/csv.hpp"
#include "offrl/log.hpp"
#include "offrl/rng.hpp"

namespace offrl {

void RegressionProblem::validate() const {
    if (model == nullptr) throw std::invalid_argument("regression problem has no model");
    if (features.empty()) throw std::invalid_argument("regression problem needs K >= 1 samples");
    if (targets.size() != features.size())
        throw std::invalid_argument("feature/target count mismatch");
    if (!weights.empty() && weights.size() != features.size())
        throw std::invalid_argument("feature/weight count mismatch");
    if (!(ridge > 0)) throw std::invalid_argument("ridge must be positive");
    for (double w : weights)
        if (!(w > 0)) throw std::invalid_argument("weights must be positive");
    for (const auto& phi : features)
        if (phi.size() != model->feature_dim())
            throw std::invalid_argument("feature dimension does not match model");
}

void OptimizerConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (grad_tol < 0) throw std::invalid_argument("grad_tol must be >= 0");
    if (num_restarts < 1) throw std::invalid_argument("num_restarts must be >= 1");
    if (!(backtrack_shrink > 0 && backtrack_shrink < 1))
        throw std::invalid_argument("backtrack_shrink must be in (0,1)");
    if (!(armijo_c > 0 && armijo_c < 1)) throw std::invalid_argument("armijo_c must be in (0,1)");
}

Eigen::VectorXd closed_form_linear(const std::vector<Eigen::VectorXd>& features,
                                   const std::vector<double>& targets,
                                   const std::vector<double>& weights, double ridge) {
    if (features.empty()) throw std::invalid_argument("closed_form_linear needs samples");
    if (!(ridge > 0)) throw std::invalid_argument("closed_form_linear needs ridge > 0");
    const int d = static_cast<int>(features[0].size());
    Eigen::MatrixXd gram = ridge * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < features.size(); ++k) {
        double w = weights.empty() ? 1.0 : weights[k];
        gram.selfadjointView<Eigen::Lower>().rankUpdate(features[k], w);
        rhs += w * targets[k] * features[k];
    }
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("closed_form_linear: Cholesky failed (non-finite input?)");
    return llt.solve(rhs);
}

double loss_at(const RegressionProblem& problem, const Eigen::VectorXd& theta) {
    double loss = problem.ridge * theta.squaredNorm();
    for (std::size_t k = 0; k < problem.features.size(); ++k) {
        double res = problem.model->value(theta, problem.features[k]) - problem.targets[k];
        loss += problem.weight(k) * res * res;
    }
    return loss;
}

Eigen::VectorXd loss_gradient(const RegressionProblem& problem, const Eigen::VectorXd& theta) {
    Eigen::VectorXd g = 2.0 * problem.ridge * theta;
    for (std::size_t k = 0; k < problem.features.size(); ++k) {
        double res = problem.model->value(theta, problem.features[k]) - problem.targets[k];
        g += 2.0 * problem.weight(k) * res * problem.model->gradient(theta, problem.features[k]);
    }
    return g;
}

namespace {

// Exact minimizer of the linear weighted ridge objective subject to
// ||theta|| <= c: if the unconstrained solution leaves the ball, bisect the
// extra ridge nu in (G + (lambda+nu) I) theta = b until ||theta(nu)|| = c
// (the KKT multiplier), which is the constrained argmin.
Eigen::VectorXd constrained_linear(const RegressionProblem& problem) {
    Eigen::VectorXd theta =
        closed_form_linear(problem.features, problem.targets, problem.weights, problem.ridge);
    const double c = problem.model->c_theta();
    if (theta.norm() <= c) return theta;

    log::info("linear fit hit the C_Theta boundary; solving the constrained problem");
    const int d = static_cast<int>(theta.size());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (std::size_t k = 0; k < problem.features.size(); ++k) {
        double w = problem.weight(k);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(problem.features[k], w);
        rhs += w * problem.targets[k] * problem.features[k];
    }
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

    auto solve_with = [&](double nu) {
        Eigen::MatrixXd m = gram + (problem.ridge + nu) * Eigen::MatrixXd::Identity(d, d);
        return Eigen::LLT<Eigen::MatrixXd>(m).solve(rhs);
    };
    double lo = 0.0, hi = 1.0;
    while (solve_with(hi).norm() > c) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (solve_with(mid).norm() > c) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-15 * (1.0 + hi)) break;
    }
    return solve_with(hi);
}

struct RestartOutcome {
    Eigen::VectorXd theta;
    double loss = std::numeric_limits<double>::infinity();
    int iterations = 0;
    double grad_norm = std::numeric_limits<double>::infinity();
    bool ok = false;
};

RestartOutcome run_restart(const RegressionProblem& problem, const OptimizerConfig& cfg,
                           Eigen::VectorXd theta, double tol, std::ofstream* trace) {
    const Model& model = *problem.model;
    RestartOutcome out;
    double fx = loss_at(problem, theta);
    if (!std::isfinite(fx)) return out;
    double step = 1.0;
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        Eigen::VectorXd g = loss_gradient(problem, theta);
        if (!g.allFinite()) return out;
        // projected-gradient stationarity measure (= ||g|| when interior)
        double pg = (theta - model.project(theta - g)).norm();
        if (trace != nullptr)
            (*trace) << iter << "," << csv::format_double(fx) << "," << csv::format_double(pg)
                     << "\n";
        if (pg <= tol) {
            out.grad_norm = pg;
            break;
        }
        double alpha = std::min(step * 4.0, 1e6);
        bool accepted = false;
        while (alpha > 1e-18) {
            Eigen::VectorXd cand = model.project(theta - alpha * g);
            double fc = loss_at(problem, cand);
            if (std::isfinite(fc) && fc <= fx - cfg.armijo_c * g.dot(theta - cand)) {
                theta = std::move(cand);
                fx = fc;
                step = alpha;
                accepted = true;
                break;
            }
            alpha *= cfg.backtrack_shrink;
        }
        if (!accepted) {  // no descent direction left at machine precision
            out.grad_norm = pg;
            break;
        }
    }
    if (!std::isfinite(out.grad_norm)) {
        Eigen::VectorXd g = loss_gradient(problem, theta);
        out.grad_norm = (theta - model.project(theta - g)).norm();
    }
    out.theta = std::move(theta);
    out.loss = fx;
    out.iterations = iter;
    out.ok = true;
    return out;
}

}  // namespace

FitResult fit(const RegressionProblem& problem, const OptimizerConfig& config) {
    problem.validate();
    config.validate();
    const Model& model = *problem.model;

    if (model.kind() == Model::Kind::Linear && !config.force_gradient) {
        FitResult r;
        r.theta = constrained_linear(problem);
        r.loss = loss_at(problem, r.theta);
        Eigen::VectorXd g = loss_gradient(problem, r.theta);
        r.grad_norm = (r.theta - model.project(r.theta - g)).norm();
        return r;
    }

    std::ofstream trace;
    if (!config.trace_file.empty()) {
        trace.open(config.trace_file, std::ios::binary);
        trace << "iter,loss,grad_norm\n";
    }

    const double tol = config.resolved_grad_tol(problem.features.size());
    rng::Stream stream(config.seed, 0x72657374ULL);
    FitResult best;
    best.loss = std::numeric_limits<double>::infinity();
    bool any_ok = false;
    for (int r = 0; r < config.num_restarts; ++r) {
        Eigen::VectorXd start = Eigen::VectorXd::Zero(model.param_dim());
        if (r > 0) {
            for (int i = 0; i < model.param_dim(); ++i) start(i) = stream.normal();
            double n = start.norm();
            if (n > 0)
                start *= model.c_theta() *
                         std::pow(stream.uniform(), 1.0 / model.param_dim()) / n;
        }
        RestartOutcome out =
            run_restart(problem, config, std::move(start), tol, trace.is_open() ? &trace : nullptr);
        if (!out.ok) {
            best.failed_restarts += 1;
            log::warn("fit restart " + std::to_string(r) + " aborted on non-finite loss/gradient");
            continue;
        }
        best.iterations += out.iterations;
        if (!any_ok || out.loss < best.loss) {
            best.theta = std::move(out.theta);
            best.loss = out.loss;
            best.grad_norm = out.grad_norm;
            any_ok = true;
        }
    }
    if (!any_ok) throw std::runtime_error("fit failed: all restarts diverged");
    return best;
}

}  // namespace offrl
