#include "offrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "offrl/csv.hpp"

namespace offrl {

namespace {

constexpr double kSimplexTol = 1e-12;

void check_positive(int value, const char* name) {
    if (value <= 0) {
        throw std::invalid_argument(std::string(name) + " must be positive, got " +
                                    std::to_string(value));
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: keep LF endings everywhere
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

}  // namespace

EpisodicMDP EpisodicMDP::zeros(int S, int A, int H) {
    check_positive(S, "num_states");
    check_positive(A, "num_actions");
    check_positive(H, "horizon");
    EpisodicMDP m;
    m.num_states = S;
    m.num_actions = A;
    m.horizon = H;
    m.transitions.assign(static_cast<std::size_t>(H) * S * A * S, 0.0);
    m.rewards.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    m.initial_dist.assign(S, 0.0);
    return m;
}

void EpisodicMDP::validate() const {
    check_positive(num_states, "num_states");
    check_positive(num_actions, "num_actions");
    check_positive(horizon, "horizon");
    const std::size_t S = num_states, A = num_actions, H = horizon;
    if (transitions.size() != H * S * A * S)
        throw std::invalid_argument("transitions has wrong size");
    if (rewards.size() != H * S * A) throw std::invalid_argument("rewards has wrong size");
    if (initial_dist.size() != S) throw std::invalid_argument("initial_dist has wrong size");

    double d1_sum = 0.0;
    for (double p : initial_dist) {
        if (!(p >= 0.0)) throw std::invalid_argument("initial_dist has a negative entry");
        d1_sum += p;
    }
    if (std::abs(d1_sum - 1.0) > kSimplexTol)
        throw std::invalid_argument("initial_dist sums to " + csv::format_double(d1_sum) +
                                    ", expected 1");

    for (int h = 0; h < horizon; ++h) {
        for (int s = 0; s < num_states; ++s) {
            for (int a = 0; a < num_actions; ++a) {
                double r = reward(h, s, a);
                if (!(r >= 0.0 && r <= 1.0))
                    throw std::invalid_argument("reward out of [0,1] at (h=" + std::to_string(h + 1) +
                                                ",s=" + std::to_string(s) + ",a=" + std::to_string(a) +
                                                "): " + csv::format_double(r));
                double row = 0.0;
                for (double p : next_dist(h, s, a)) {
                    if (!(p >= 0.0))
                        throw std::invalid_argument("negative transition probability at (h=" +
                                                    std::to_string(h + 1) + ",s=" + std::to_string(s) +
                                                    ",a=" + std::to_string(a) + ")");
                    row += p;
                }
                if (std::abs(row - 1.0) > kSimplexTol)
                    throw std::invalid_argument("transition row sums to " + csv::format_double(row) +
                                                " at (h=" + std::to_string(h + 1) + ",s=" +
                                                std::to_string(s) + ",a=" + std::to_string(a) + ")");
            }
        }
    }
}

void EpisodicMDP::write(std::ostream& out) const {
    out << "offrl-mdp 1\n";
    out << "states " << num_states << "\n";
    out << "actions " << num_actions << "\n";
    out << "horizon " << horizon << "\n";
    out << "reward_noise " << (reward_noise == RewardNoise::Bernoulli ? "bernoulli" : "none")
        << "\n";
    out << "d1";
    for (double p : initial_dist) out << " " << csv::format_double(p);
    out << "\n";
    for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < num_states; ++s)
            for (int a = 0; a < num_actions; ++a) {
                out << "P " << (h + 1) << " " << s << " " << a;
                for (double p : next_dist(h, s, a)) out << " " << csv::format_double(p);
                out << "\n";
            }
    for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < num_states; ++s)
            for (int a = 0; a < num_actions; ++a)
                out << "R " << (h + 1) << " " << s << " " << a << " "
                    << csv::format_double(reward(h, s, a)) << "\n";
}

EpisodicMDP EpisodicMDP::read(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "offrl-mdp" || version != 1)
        throw std::invalid_argument("not an offrl-mdp v1 document");
    std::string key;
    int S = 0, A = 0, H = 0;
    std::string noise = "none";
    in >> key >> S;
    if (key != "states") throw std::invalid_argument("expected 'states'");
    in >> key >> A;
    if (key != "actions") throw std::invalid_argument("expected 'actions'");
    in >> key >> H;
    if (key != "horizon") throw std::invalid_argument("expected 'horizon'");
    in >> key >> noise;
    if (key != "reward_noise") throw std::invalid_argument("expected 'reward_noise'");

    EpisodicMDP m = EpisodicMDP::zeros(S, A, H);
    m.reward_noise = noise == "bernoulli" ? RewardNoise::Bernoulli : RewardNoise::None;
    in >> key;
    if (key != "d1") throw std::invalid_argument("expected 'd1'");
    for (int s = 0; s < S; ++s) in >> m.initial_dist[s];

    while (in >> key) {
        int h = 0, s = 0, a = 0;
        in >> h >> s >> a;
        if (h < 1 || h > H || s < 0 || s >= S || a < 0 || a >= A)
            throw std::invalid_argument("index out of range in mdp document");
        if (key == "P") {
            for (int t = 0; t < S; ++t) in >> m.transition_ref(h - 1, s, a, t);
        } else if (key == "R") {
            in >> m.reward_ref(h - 1, s, a);
        } else {
            throw std::invalid_argument("unknown record '" + key + "' in mdp document");
        }
    }
    m.validate();
    return m;
}

void EpisodicMDP::save(const std::string& path) const {
    auto out = open_out(path);
    write(out);
}

EpisodicMDP EpisodicMDP::load(const std::string& path) {
    auto in = open_in(path);
    return read(in);
}

int PolicyStack::sample(int h, int s, rng::Stream& stream) const {
    if (deterministic) return action(h, s);
    return stream.categorical(
        std::span<const double>(probs.data() + (static_cast<std::size_t>(h) * num_states + s) * num_actions,
                                static_cast<std::size_t>(num_actions)));
}

PolicyStack PolicyStack::make_deterministic(int H, int S, int A, std::vector<int> action_table) {
    if (action_table.size() != static_cast<std::size_t>(H) * S)
        throw std::invalid_argument("action table has wrong size");
    PolicyStack p;
    p.horizon = H;
    p.num_states = S;
    p.num_actions = A;
    p.deterministic = true;
    p.actions = std::move(action_table);
    p.probs.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) {
            int a = p.action(h, s);
            if (a < 0 || a >= A) throw std::invalid_argument("action index out of range");
            p.probs[(static_cast<std::size_t>(h) * S + s) * A + a] = 1.0;
        }
    return p;
}

PolicyStack PolicyStack::make_stochastic(int H, int S, int A, std::vector<double> prob_table) {
    if (prob_table.size() != static_cast<std::size_t>(H) * S * A)
        throw std::invalid_argument("probability table has wrong size");
    PolicyStack p;
    p.horizon = H;
    p.num_states = S;
    p.num_actions = A;
    p.deterministic = false;
    p.probs = std::move(prob_table);
    p.validate();
    return p;
}

PolicyStack PolicyStack::uniform(int H, int S, int A) {
    return make_stochastic(H, S, A,
                           std::vector<double>(static_cast<std::size_t>(H) * S * A, 1.0 / A));
}

void PolicyStack::validate() const {
    check_positive(horizon, "horizon");
    check_positive(num_states, "num_states");
    check_positive(num_actions, "num_actions");
    if (probs.size() != static_cast<std::size_t>(horizon) * num_states * num_actions)
        throw std::invalid_argument("policy probability table has wrong size");
    for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < num_states; ++s) {
            double row = 0.0;
            for (int a = 0; a < num_actions; ++a) {
                double p = prob(h, s, a);
                if (!(p >= 0.0)) throw std::invalid_argument("negative policy probability");
                row += p;
            }
            if (std::abs(row - 1.0) > kSimplexTol)
                throw std::invalid_argument("policy row sums to " + csv::format_double(row) +
                                            " at (h=" + std::to_string(h + 1) + ",s=" +
                                            std::to_string(s) + ")");
        }
}

void PolicyStack::write(std::ostream& out) const {
    out << "h,s";
    for (int a = 0; a < num_actions; ++a) out << ",p" << a;
    out << "\n";
    for (int h = 0; h < horizon; ++h)
        for (int s = 0; s < num_states; ++s) {
            out << (h + 1) << "," << s;
            for (int a = 0; a < num_actions; ++a) out << "," << csv::format_double(prob(h, s, a));
            out << "\n";
        }
}

PolicyStack PolicyStack::read(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty policy file");
    auto header = csv::split_row(line);
    if (header.size() < 3 || header[0] != "h" || header[1] != "s")
        throw std::invalid_argument("policy file must start with header h,s,p0,...");
    int A = static_cast<int>(header.size()) - 2;
    int H = 0, S = 0;
    struct Row {
        int h, s;
        std::vector<double> p;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = csv::split_row(line);
        if (f.size() != header.size())
            throw std::invalid_argument("policy row has wrong field count");
        Row r;
        r.h = std::stoi(f[0]);
        r.s = std::stoi(f[1]);
        for (int a = 0; a < A; ++a) r.p.push_back(std::stod(f[2 + a]));
        H = std::max(H, r.h);
        S = std::max(S, r.s + 1);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw std::invalid_argument("policy file has no rows");
    std::vector<double> table(static_cast<std::size_t>(H) * S * A, 0.0);
    for (const auto& r : rows)
        for (int a = 0; a < A; ++a)
            table[(static_cast<std::size_t>(r.h - 1) * S + r.s) * A + a] = r.p[a];
    return make_stochastic(H, S, A, std::move(table));
}

void PolicyStack::save(const std::string& path) const {
    auto out = open_out(path);
    write(out);
}

PolicyStack PolicyStack::load(const std::string& path) {
    auto in = open_in(path);
    return read(in);
}

ValueStack ValueStack::zeros(int H, int S, int A) {
    ValueStack v;
    v.horizon = H;
    v.num_states = S;
    v.num_actions = A;
    v.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    v.v.assign(static_cast<std::size_t>(H + 1) * S, 0.0);
    return v;
}

void OfflineDataset::validate() const {
    const std::size_t n = static_cast<std::size_t>(num_episodes) * horizon;
    if (state.size() != n || action.size() != n || reward.size() != n || next_state.size() != n)
        throw std::invalid_argument("dataset arrays have inconsistent sizes");
    for (std::size_t i = 0; i < n; ++i) {
        if (state[i] < 0 || state[i] >= num_states || next_state[i] < 0 ||
            next_state[i] >= num_states)
            throw std::invalid_argument("dataset state index out of range");
        if (action[i] < 0 || action[i] >= num_actions)
            throw std::invalid_argument("dataset action index out of range");
    }
}

std::pair<OfflineDataset, OfflineDataset> OfflineDataset::split_even_odd() const {
    int pairs = num_episodes / 2;
    OfflineDataset even, odd;
    for (OfflineDataset* d : {&even, &odd}) {
        d->num_episodes = pairs;
        d->horizon = horizon;
        d->num_states = num_states;
        d->num_actions = num_actions;
        d->seed = seed;
    }
    even.behavior_tag = behavior_tag + "|even";
    odd.behavior_tag = behavior_tag + "|odd";
    for (int k = 0; k < pairs; ++k) {
        for (int h = 0; h < horizon; ++h) {
            std::size_t se = index(2 * k, h);
            std::size_t so = index(2 * k + 1, h);
            even.state.push_back(state[se]);
            even.action.push_back(action[se]);
            even.reward.push_back(reward[se]);
            even.next_state.push_back(next_state[se]);
            odd.state.push_back(state[so]);
            odd.action.push_back(action[so]);
            odd.reward.push_back(reward[so]);
            odd.next_state.push_back(next_state[so]);
        }
    }
    return {std::move(even), std::move(odd)};
}

void OfflineDataset::write_csv(std::ostream& out) const {
    out << "episode,h,s,a,r,s_next\n";
    for (int k = 0; k < num_episodes; ++k)
        for (int h = 0; h < horizon; ++h) {
            std::size_t i = index(k, h);
            out << k << "," << (h + 1) << "," << state[i] << "," << action[i] << ","
                << csv::format_double(reward[i]) << "," << next_state[i] << "\n";
        }
}

OfflineDataset OfflineDataset::read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty dataset CSV");
    if (csv::split_row(line) != std::vector<std::string>{"episode", "h", "s", "a", "r", "s_next"})
        throw std::invalid_argument("dataset CSV must start with header episode,h,s,a,r,s_next");
    OfflineDataset d;
    int max_state = -1, max_action = -1, expected_h = 1, episodes = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = csv::split_row(line);
        if (f.size() != 6) throw std::invalid_argument("dataset row has wrong field count");
        int k = std::stoi(f[0]);
        int h = std::stoi(f[1]);
        int s = std::stoi(f[2]);
        int a = std::stoi(f[3]);
        double r = std::stod(f[4]);
        int sn = std::stoi(f[5]);
        if (k == episodes) {  // a new episode begins
            episodes = k + 1;
            expected_h = 1;
        } else if (k != episodes - 1) {
            throw std::invalid_argument("episodes out of order in dataset CSV");
        }
        if (h != expected_h)
            throw std::invalid_argument("transitions out of order: expected h=" +
                                        std::to_string(expected_h) + ", got " + std::to_string(h));
        ++expected_h;
        d.state.push_back(s);
        d.action.push_back(a);
        d.reward.push_back(r);
        d.next_state.push_back(sn);
        max_state = std::max({max_state, s, sn});
        max_action = std::max(max_action, a);
    }
    d.num_episodes = episodes;
    if (episodes == 0) throw std::invalid_argument("dataset CSV has no rows");
    d.horizon = static_cast<int>(d.state.size()) / episodes;
    if (static_cast<std::size_t>(d.horizon) * episodes != d.state.size())
        throw std::invalid_argument("episodes have unequal lengths");
    d.num_states = max_state + 1;
    d.num_actions = max_action + 1;
    d.validate();
    return d;
}

void OfflineDataset::save_csv(const std::string& path) const {
    auto out = open_out(path);
    write_csv(out);
}

OfflineDataset OfflineDataset::load_csv(const std::string& path) {
    auto in = open_in(path);
    return read_csv(in);
}

namespace {

void check_policy_matches(const EpisodicMDP& mdp, const PolicyStack& policy) {
    if (policy.horizon != mdp.horizon || policy.num_states != mdp.num_states ||
        policy.num_actions != mdp.num_actions)
        throw std::invalid_argument(
            "policy/MDP dimension mismatch: policy is (H=" + std::to_string(policy.horizon) +
            ",S=" + std::to_string(policy.num_states) + ",A=" + std::to_string(policy.num_actions) +
            "), MDP is (H=" + std::to_string(mdp.horizon) + ",S=" + std::to_string(mdp.num_states) +
            ",A=" + std::to_string(mdp.num_actions) + ")");
}

}  // namespace

PolicyValue exact_value(const EpisodicMDP& mdp, const PolicyStack& policy) {
    check_policy_matches(mdp, policy);
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    ValueStack vs = ValueStack::zeros(H, S, A);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double v = 0.0;
            for (int a = 0; a < A; ++a) {
                double q = mdp.reward(h, s, a);
                auto dist = mdp.next_dist(h, s, a);
                for (int t = 0; t < S; ++t) q += dist[t] * vs.v_at(h + 1, t);
                vs.q_ref(h, s, a) = q;
                v += policy.prob(h, s, a) * q;
            }
            vs.v_ref(h, s) = v;
        }
    }
    double v1 = 0.0;
    for (int s = 0; s < S; ++s) v1 += mdp.initial_dist[s] * vs.v_at(0, s);
    return {std::move(vs), v1};
}

OptimalSolution optimal(const EpisodicMDP& mdp) {
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    ValueStack vs = ValueStack::zeros(H, S, A);
    std::vector<int> greedy(static_cast<std::size_t>(H) * S, 0);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            int best_a = 0;
            double best_q = -1.0;
            for (int a = 0; a < A; ++a) {
                double q = mdp.reward(h, s, a);
                auto dist = mdp.next_dist(h, s, a);
                for (int t = 0; t < S; ++t) q += dist[t] * vs.v_at(h + 1, t);
                vs.q_ref(h, s, a) = q;
                if (q > best_q) {  // strict: ties keep the lowest index
                    best_q = q;
                    best_a = a;
                }
            }
            vs.v_ref(h, s) = best_q;
            greedy[static_cast<std::size_t>(h) * S + s] = best_a;
        }
    }
    double v_star = 0.0;
    for (int s = 0; s < S; ++s) v_star += mdp.initial_dist[s] * vs.v_at(0, s);
    OptimalSolution sol;
    sol.policy = PolicyStack::make_deterministic(H, S, A, std::move(greedy));
    sol.values = std::move(vs);
    sol.v_star = v_star;
    return sol;
}

OfflineDataset rollout(const EpisodicMDP& mdp, const PolicyStack& behavior, int num_episodes,
                       std::uint64_t seed) {
    check_policy_matches(mdp, behavior);
    if (num_episodes < 1) throw std::invalid_argument("rollout requires at least one episode");
    const int H = mdp.horizon;
    OfflineDataset d;
    d.num_episodes = num_episodes;
    d.horizon = H;
    d.num_states = mdp.num_states;
    d.num_actions = mdp.num_actions;
    d.seed = seed;
    const std::size_t n = static_cast<std::size_t>(num_episodes) * H;
    d.state.reserve(n);
    d.action.reserve(n);
    d.reward.reserve(n);
    d.next_state.reserve(n);
    rng::Stream stream(seed, 0x6f66666c696e65ULL);  // rollout stream
    for (int k = 0; k < num_episodes; ++k) {
        int s = stream.categorical(mdp.initial_dist);
        for (int h = 0; h < H; ++h) {
            int a = behavior.sample(h, s, stream);
            double mean = mdp.reward(h, s, a);
            double r = mdp.reward_noise == RewardNoise::Bernoulli
                           ? (stream.bernoulli(mean) ? 1.0 : 0.0)
                           : mean;
            int s_next = stream.categorical(mdp.next_dist(h, s, a));
            d.state.push_back(s);
            d.action.push_back(a);
            d.reward.push_back(r);
            d.next_state.push_back(s_next);
            s = s_next;
        }
    }
    return d;
}

Occupancy occupancy(const EpisodicMDP& mdp, const PolicyStack& policy) {
    check_policy_matches(mdp, policy);
    const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
    Occupancy occ;
    occ.horizon = H;
    occ.num_states = S;
    occ.num_actions = A;
    occ.d.assign(static_cast<std::size_t>(H) * S * A, 0.0);
    std::vector<double> state_dist = mdp.initial_dist;
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) occ.ref(h, s, a) = state_dist[s] * policy.prob(h, s, a);
        if (h + 1 < H) {
            std::vector<double> next(S, 0.0);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    double mass = occ.at(h, s, a);
                    if (mass == 0.0) continue;
                    auto dist = mdp.next_dist(h, s, a);
                    for (int t = 0; t < S; ++t) next[t] += mass * dist[t];
                }
            state_dist = std::move(next);
        }
    }
    return occ;
}

MonteCarloValue monte_carlo_value(const EpisodicMDP& mdp, const PolicyStack& policy, long n,
                                  std::uint64_t seed) {
    check_policy_matches(mdp, policy);
    if (n < 1) throw std::invalid_argument("monte_carlo_value requires n >= 1");
    rng::Stream stream(seed, 0x6d63ULL);  // mc stream
    double sum = 0.0, sum_sq = 0.0;
    for (long i = 0; i < n; ++i) {
        int s = stream.categorical(mdp.initial_dist);
        double ret = 0.0;
        for (int h = 0; h < mdp.horizon; ++h) {
            int a = policy.sample(h, s, stream);
            double mean = mdp.reward(h, s, a);
            ret += mdp.reward_noise == RewardNoise::Bernoulli
                       ? (stream.bernoulli(mean) ? 1.0 : 0.0)
                       : mean;
            s = stream.categorical(mdp.next_dist(h, s, a));
        }
        sum += ret;
        sum_sq += ret * ret;
    }
    double mean = sum / static_cast<double>(n);
    double var = n > 1 ? std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(n - 1)) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace offrl
