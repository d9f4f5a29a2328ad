#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace offrl {

/// Tabular feature map: one row of the table per (s,a) pair. phi_max is the
/// exact max row norm (the instance is finite, so it is checked exhaustively).
class FeatureMap {
  public:
    static FeatureMap one_hot(int num_states, int num_actions);
    /// Rows drawn uniformly on the unit sphere (seeded); generic features
    /// for GLM/MLP experiments.
    static FeatureMap random_unit(int num_states, int num_actions, int dim, std::uint64_t seed);

    int dim() const { return dim_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double phi_max() const { return phi_max_; }

    Eigen::VectorXd operator()(int s, int a) const { return table_.row(row(s, a)); }
    const Eigen::MatrixXd& table() const { return table_; }

  private:
    FeatureMap(int S, int A, Eigen::MatrixXd table);
    int row(int s, int a) const { return s * num_actions_ + a; }

    int num_states_ = 0;
    int num_actions_ = 0;
    int dim_ = 0;
    double phi_max_ = 0.0;
    Eigen::MatrixXd table_;  // (S*A) x m
};

enum class LinkKind { Identity, Sigmoid, Tanh };

LinkKind parse_link(const std::string& name);
std::string link_name(LinkKind link);

/// Parametric differentiable model f(theta, phi) with analytic gradient.
/// Kinds: linear <theta,phi>; GLM link(<theta,phi>) with a scaled monotone
/// link; two-layer tanh MLP with theta the flattened weights. Value objects,
/// safe to share; eval/grad are pure.
class Model {
  public:
    enum class Kind { Linear, Glm, Mlp };

    static Model linear(int dim, double c_theta);
    static Model glm(int feature_dim, LinkKind link, double scale, double c_theta);
    static Model mlp(int feature_dim, int hidden_width, double c_theta);

    Kind kind() const { return kind_; }
    int param_dim() const { return param_dim_; }
    int feature_dim() const { return feature_dim_; }
    double c_theta() const { return c_theta_; }
    double value_bound() const { return value_bound_; }
    LinkKind link() const { return link_; }
    double link_scale() const { return scale_; }
    int hidden_width() const { return hidden_; }
    std::string describe() const;

    /// f(theta, phi). Norm violations ||theta|| > C_Theta are logged, not
    /// rejected. Dimension mismatches are rejected.
    double value(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi) const;

    /// Analytic gradient with respect to theta.
    Eigen::VectorXd gradient(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi) const;

    /// Radial projection onto the C_Theta ball; idempotent.
    Eigen::VectorXd project(const Eigen::VectorXd& theta) const;

    /// Max over coordinates of |analytic_i - central_diff_i| / max(1, |central_diff_i|).
    double check_gradient(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi,
                          double step) const;

    /// link'(z) for the GLM kind (including the scale factor).
    double link_slope(double z) const;

    /// Upper estimate of sup ||grad f||_2 over a tabular feature map: exact
    /// for linear and GLM, probe-based for the MLP.
    double grad_bound(const FeatureMap& features, int probes = 64,
                      std::uint64_t seed = 0x67726164) const;

  private:
    Model() = default;
    void check_dims(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi) const;
    double link_value(double z) const;

    Kind kind_ = Kind::Linear;
    LinkKind link_ = LinkKind::Identity;
    double scale_ = 1.0;
    int feature_dim_ = 0;
    int param_dim_ = 0;
    int hidden_ = 0;
    double c_theta_ = 0.0;
    double value_bound_ = 0.0;
};

}  // namespace offrl
