#include "offrl/models.hpp"

#include <cmath>
#include <stdexcept>

#include "offrl/csv.hpp"
#include "offrl/log.hpp"
#include "offrl/rng.hpp"

namespace offrl {

FeatureMap::FeatureMap(int S, int A, Eigen::MatrixXd table)
    : num_states_(S), num_actions_(A), dim_(static_cast<int>(table.cols())),
      table_(std::move(table)) {
    phi_max_ = 0.0;
    for (Eigen::Index r = 0; r < table_.rows(); ++r)
        phi_max_ = std::max(phi_max_, table_.row(r).norm());
}

FeatureMap FeatureMap::one_hot(int num_states, int num_actions) {
    if (num_states < 1 || num_actions < 1)
        throw std::invalid_argument("one_hot requires positive state/action counts");
    const int n = num_states * num_actions;
    return FeatureMap(num_states, num_actions, Eigen::MatrixXd::Identity(n, n));
}

FeatureMap FeatureMap::random_unit(int num_states, int num_actions, int dim, std::uint64_t seed) {
    if (num_states < 1 || num_actions < 1 || dim < 1)
        throw std::invalid_argument("random_unit requires positive dimensions");
    rng::Stream stream(seed, 0x66656174ULL);
    Eigen::MatrixXd table(num_states * num_actions, dim);
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
        for (int c = 0; c < dim; ++c) table(r, c) = stream.normal();
        double n = table.row(r).norm();
        if (n == 0.0) table(r, 0) = 1.0;
        else table.row(r) /= n;
    }
    return FeatureMap(num_states, num_actions, std::move(table));
}

LinkKind parse_link(const std::string& name) {
    if (name == "identity") return LinkKind::Identity;
    if (name == "sigmoid") return LinkKind::Sigmoid;
    if (name == "tanh") return LinkKind::Tanh;
    throw std::invalid_argument("unknown link '" + name + "' (expected identity|sigmoid|tanh)");
}

std::string link_name(LinkKind link) {
    switch (link) {
        case LinkKind::Identity: return "identity";
        case LinkKind::Sigmoid: return "sigmoid";
        case LinkKind::Tanh: return "tanh";
    }
    return "?";
}

Model Model::linear(int dim, double c_theta) {
    if (dim < 1) throw std::invalid_argument("linear model needs positive dimension");
    if (c_theta <= 0) throw std::invalid_argument("c_theta must be positive");
    Model m;
    m.kind_ = Kind::Linear;
    m.feature_dim_ = dim;
    m.param_dim_ = dim;
    m.c_theta_ = c_theta;
    m.value_bound_ = c_theta;  // times phi_max; exact bound depends on the map
    return m;
}

Model Model::glm(int feature_dim, LinkKind link, double scale, double c_theta) {
    if (feature_dim < 1) throw std::invalid_argument("glm model needs positive dimension");
    if (scale <= 0) throw std::invalid_argument("glm scale must be positive");
    if (c_theta <= 0) throw std::invalid_argument("c_theta must be positive");
    Model m;
    m.kind_ = Kind::Glm;
    m.link_ = link;
    m.scale_ = scale;
    m.feature_dim_ = feature_dim;
    m.param_dim_ = feature_dim;
    m.c_theta_ = c_theta;
    m.value_bound_ = link == LinkKind::Identity ? scale * c_theta : scale;
    return m;
}

Model Model::mlp(int feature_dim, int hidden_width, double c_theta) {
    if (feature_dim < 1 || hidden_width < 1)
        throw std::invalid_argument("mlp model needs positive dimensions");
    if (c_theta <= 0) throw std::invalid_argument("c_theta must be positive");
    Model m;
    m.kind_ = Kind::Mlp;
    m.feature_dim_ = feature_dim;
    m.hidden_ = hidden_width;
    m.param_dim_ = hidden_width * (feature_dim + 2) + 1;
    m.c_theta_ = c_theta;
    // |w2|.|tanh| + |b2| <= C_Theta*(sqrt(width) + 1); crude but valid on the ball
    m.value_bound_ = c_theta * (std::sqrt(static_cast<double>(hidden_width)) + 1.0);
    return m;
}

std::string Model::describe() const {
    switch (kind_) {
        case Kind::Linear: return "linear(d=" + std::to_string(param_dim_) + ")";
        case Kind::Glm:
            return "glm(" + link_name(link_) + ",scale=" + csv::format_double(scale_) +
                   ",d=" + std::to_string(param_dim_) + ")";
        case Kind::Mlp:
            return "mlp(width=" + std::to_string(hidden_) + ",d=" + std::to_string(param_dim_) + ")";
    }
    return "?";
}

void Model::check_dims(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi) const {
    if (theta.size() != param_dim_)
        throw std::invalid_argument("theta has dimension " + std::to_string(theta.size()) +
                                    ", model expects " + std::to_string(param_dim_));
    if (phi.size() != feature_dim_)
        throw std::invalid_argument("phi has dimension " + std::to_string(phi.size()) +
                                    ", model expects " + std::to_string(feature_dim_));
    double n = theta.norm();
    if (n > c_theta_ * (1.0 + 1e-12)) {
        log::debug("theta norm " + csv::format_double(n) + " exceeds C_Theta " +
                   csv::format_double(c_theta_));
    }
}

double Model::link_value(double z) const {
    switch (link_) {
        case LinkKind::Identity: return scale_ * z;
        case LinkKind::Sigmoid: return scale_ / (1.0 + std::exp(-z));
        case LinkKind::Tanh: return scale_ * std::tanh(z);
    }
    return 0.0;
}

double Model::link_slope(double z) const {
    switch (link_) {
        case LinkKind::Identity: return scale_;
        case LinkKind::Sigmoid: {
            double s = 1.0 / (1.0 + std::exp(-z));
            return scale_ * s * (1.0 - s);
        }
        case LinkKind::Tanh: {
            double t = std::tanh(z);
            return scale_ * (1.0 - t * t);
        }
    }
    return 0.0;
}

double Model::value(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi) const {
    check_dims(theta, phi);
    switch (kind_) {
        case Kind::Linear: return theta.dot(phi);
        case Kind::Glm: return link_value(theta.dot(phi));
        case Kind::Mlp: {
            const int w = hidden_, m = feature_dim_;
            double out = theta(param_dim_ - 1);  // b2
            for (int j = 0; j < w; ++j) {
                double z = theta(w * m + j);  // b1_j
                for (int i = 0; i < m; ++i) z += theta(j * m + i) * phi(i);
                out += theta(w * m + w + j) * std::tanh(z);  // w2_j
            }
            return out;
        }
    }
    return 0.0;
}

Eigen::VectorXd Model::gradient(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi) const {
    check_dims(theta, phi);
    switch (kind_) {
        case Kind::Linear: return phi;
        case Kind::Glm: return link_slope(theta.dot(phi)) * phi;
        case Kind::Mlp: {
            const int w = hidden_, m = feature_dim_;
            Eigen::VectorXd g(param_dim_);
            for (int j = 0; j < w; ++j) {
                double z = theta(w * m + j);
                for (int i = 0; i < m; ++i) z += theta(j * m + i) * phi(i);
                double t = std::tanh(z);
                double back = theta(w * m + w + j) * (1.0 - t * t);  // dL/dz_j
                for (int i = 0; i < m; ++i) g(j * m + i) = back * phi(i);
                g(w * m + j) = back;
                g(w * m + w + j) = t;
            }
            g(param_dim_ - 1) = 1.0;
            return g;
        }
    }
    return Eigen::VectorXd::Zero(param_dim_);
}

Eigen::VectorXd Model::project(const Eigen::VectorXd& theta) const {
    double n = theta.norm();
    if (n <= c_theta_) return theta;
    return theta * (c_theta_ / n);
}

double Model::check_gradient(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi,
                             double step) const {
    if (step <= 0) throw std::invalid_argument("check_gradient requires step > 0");
    Eigen::VectorXd analytic = gradient(theta, phi);
    Eigen::VectorXd probe = theta;
    double worst = 0.0;
    for (int i = 0; i < param_dim_; ++i) {
        probe(i) = theta(i) + step;
        double plus = value(probe, phi);
        probe(i) = theta(i) - step;
        double minus = value(probe, phi);
        probe(i) = theta(i);
        double numeric = (plus - minus) / (2.0 * step);
        worst = std::max(worst, std::abs(analytic(i) - numeric) / std::max(1.0, std::abs(numeric)));
    }
    return worst;
}

double Model::grad_bound(const FeatureMap& features, int probes, std::uint64_t seed) const {
    double best = 0.0;
    const int S = features.num_states(), A = features.num_actions();
    if (kind_ == Kind::Linear) return features.phi_max();
    if (kind_ == Kind::Glm) {
        double max_slope = 0.0;
        switch (link_) {
            case LinkKind::Identity: max_slope = scale_; break;
            case LinkKind::Sigmoid: max_slope = scale_ / 4.0; break;
            case LinkKind::Tanh: max_slope = scale_; break;
        }
        return max_slope * features.phi_max();
    }
    rng::Stream stream(seed, 0x6b31ULL);
    for (int p = 0; p < probes; ++p) {
        Eigen::VectorXd theta(param_dim_);
        for (int i = 0; i < param_dim_; ++i) theta(i) = stream.normal();
        theta *= c_theta_ * std::pow(stream.uniform(), 1.0 / param_dim_) / theta.norm();
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                best = std::max(best, gradient(theta, features(s, a)).norm());
    }
    return best;
}

}  // namespace offrl
