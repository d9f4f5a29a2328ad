#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "offrl/rng.hpp"

namespace offrl {

enum class RewardNoise { None, Bernoulli };

/// Finite tabular time-inhomogeneous episodic MDP. Steps are 0-based in
/// code (h = 0..H-1); serialized formats use 1-based steps.
/// Immutable after construction; validate() enforces the invariants
/// (stochastic rows, d1 a distribution, rewards in [0,1]).
struct EpisodicMDP {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    RewardNoise reward_noise = RewardNoise::None;
    std::vector<double> transitions;   // H*S*A*S, P_h(s'|s,a)
    std::vector<double> rewards;       // H*S*A, mean reward in [0,1]
    std::vector<double> initial_dist;  // S

    double transition(int h, int s, int a, int s_next) const {
        return transitions[((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
                               num_states +
                           s_next];
    }
    std::span<const double> next_dist(int h, int s, int a) const {
        return {transitions.data() +
                    ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) * num_states,
                static_cast<std::size_t>(num_states)};
    }
    double reward(int h, int s, int a) const {
        return rewards[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double& reward_ref(int h, int s, int a) {
        return rewards[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double& transition_ref(int h, int s, int a, int s_next) {
        return transitions[((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
                               num_states +
                           s_next];
    }

    static EpisodicMDP zeros(int S, int A, int H);

    /// Throws std::invalid_argument with a descriptive message when any
    /// invariant fails (row sums off by more than 1e-12, rewards outside
    /// [0,1], negative probabilities, bad dimensions).
    void validate() const;

    void write(std::ostream& out) const;
    static EpisodicMDP read(std::istream& in);
    void save(const std::string& path) const;
    static EpisodicMDP load(const std::string& path);
};

/// Per-step action rule; stochastic rows always populated, deterministic
/// stacks additionally carry the action table.
struct PolicyStack {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    bool deterministic = false;
    std::vector<int> actions;  // H*S when deterministic, else empty
    std::vector<double> probs; // H*S*A

    double prob(int h, int s, int a) const {
        return probs[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    int action(int h, int s) const { return actions[static_cast<std::size_t>(h) * num_states + s]; }
    int sample(int h, int s, rng::Stream& stream) const;

    static PolicyStack make_deterministic(int H, int S, int A, std::vector<int> action_table);
    static PolicyStack make_stochastic(int H, int S, int A, std::vector<double> prob_table);
    static PolicyStack uniform(int H, int S, int A);

    void validate() const;

    void write(std::ostream& out) const;
    static PolicyStack read(std::istream& in);
    void save(const std::string& path) const;
    static PolicyStack load(const std::string& path);
};

/// Q_h and V_h tables with the terminal convention V_{H} == 0 (0-based;
/// i.e. V_{H+1} in 1-based notation). V has H+1 rows so v(H, s) is valid.
struct ValueStack {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> q;  // H*S*A
    std::vector<double> v;  // (H+1)*S

    double q_at(int h, int s, int a) const {
        return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double v_at(int h, int s) const { return v[static_cast<std::size_t>(h) * num_states + s]; }
    double& q_ref(int h, int s, int a) {
        return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double& v_ref(int h, int s) { return v[static_cast<std::size_t>(h) * num_states + s]; }

    static ValueStack zeros(int H, int S, int A);
};

/// K episodes of H logged transitions each, stored flat in episode-major
/// order. The one input the learning algorithms see.
struct OfflineDataset {
    int num_episodes = 0;
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::uint64_t seed = 0;
    std::string behavior_tag;
    std::vector<int> state;       // K*H
    std::vector<int> action;      // K*H
    std::vector<double> reward;   // K*H
    std::vector<int> next_state;  // K*H

    std::size_t index(int episode, int h) const {
        return static_cast<std::size_t>(episode) * horizon + h;
    }

    void validate() const;

    /// Even/odd episode-parity halves (pairwise equal size; an odd final
    /// episode is dropped). Used to feed VAFQL's independent split.
    std::pair<OfflineDataset, OfflineDataset> split_even_odd() const;

    /// CSV with header `episode,h,s,a,r,s_next`, h 1-based, LF endings,
    /// rewards with 17 significant digits.
    void write_csv(std::ostream& out) const;
    static OfflineDataset read_csv(std::istream& in);
    void save_csv(const std::string& path) const;
    static OfflineDataset load_csv(const std::string& path);
};

struct PolicyValue {
    ValueStack values;
    double v1 = 0.0;  // <d1, V_1>
};

struct OptimalSolution {
    PolicyStack policy;  // argmax ties broken by lowest action index
    ValueStack values;
    double v_star = 0.0;
};

struct MonteCarloValue {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Occupancy measures d^pi_h(s,a), one simplex per step.
struct Occupancy {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> d;  // H*S*A

    double at(int h, int s, int a) const {
        return d[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
    double& ref(int h, int s, int a) {
        return d[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
    }
};

/// Exact policy evaluation by backward recursion Q_h = r_h + P_h V_{h+1},
/// V_h = E_{a~pi_h} Q_h. Throws on policy/MDP dimension mismatch.
PolicyValue exact_value(const EpisodicMDP& mdp, const PolicyStack& policy);

/// Bellman optimality recursion; greedy ties broken by lowest action index.
OptimalSolution optimal(const EpisodicMDP& mdp);

/// K seeded episodes under the behavior policy; identical inputs reproduce
/// bit-identical datasets.
OfflineDataset rollout(const EpisodicMDP& mdp, const PolicyStack& behavior, int num_episodes,
                       std::uint64_t seed);

/// Forward recursion for d^pi_h(s,a).
Occupancy occupancy(const EpisodicMDP& mdp, const PolicyStack& policy);

/// Sample mean of episode returns over n seeded rollouts with its standard
/// error (sample stdev / sqrt(n)).
MonteCarloValue monte_carlo_value(const EpisodicMDP& mdp, const PolicyStack& policy, long n,
                                  std::uint64_t seed);

}  // namespace offrl
