#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rcp/envs.hpp"
#include "rcp/policy.hpp"
#include "rcp/replay.hpp"
#include "rcp/target_model.hpp"

namespace rcp {

enum class Algorithm { rcp_r, rcp_a, awr, bc };

std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct TrainConfig {
    Algorithm algorithm = Algorithm::rcp_a;
    std::string env_name = "pointmass";
    CondMode architecture = CondMode::multiply;
    bool weighted = false;     // exponential weights; always on for awr, off for bc
    double beta = 1.0;         // shared tilt / weighting coefficient
    double weight_clip = 20.0;
    double gamma = 0.99;
    double lambda = 0.95;
    std::size_t buffer_capacity = 100000;
    int samples_per_iteration = 2000;
    int minibatch = 256;
    int value_steps = 200;
    int policy_steps = 1000;
    int iterations = 100;
    std::uint64_t seed = 1;
    int eval_episodes = 10;
    int diag_episodes = 10;
    int hidden_width = 128;
    int embed_width = 64;
    double policy_lr = 3e-4;
    double value_lr = 1e-3;
    double target_tau_rel = 0.1;        // soft-max temperature as fraction of value range
    double target_sigma_min_rel = 0.05; // std floor as fraction of value range
    double target_tau_abs = 1.0;        // used when the rel knob is 0
    double target_sigma_min_abs = 0.05;
    int value_warmup_iterations = 10;   // offline only: value fitting before relabeling

    bool uses_value() const { return algorithm == Algorithm::rcp_a || algorithm == Algorithm::awr; }
    bool conditioned() const { return algorithm == Algorithm::rcp_r || algorithm == Algorithm::rcp_a; }
    bool uses_weights() const {
        return algorithm == Algorithm::awr || (conditioned() && weighted);
    }
    void validate() const;  // throws ConfigError
};

struct IterationMetrics {
    int iteration = 0;
    double eval_return_mean = 0.0;
    double eval_return_max = 0.0;
    double mu_z = 0.0;
    double sigma_z = 0.0;
    double policy_loss_mean = 0.0;
    double value_loss_mean = 0.0;
    std::size_t buffer_size = 0;
    double wall_seconds = 0.0;  // console only; kept out of the metrics file
};

/// One rollout before relabeling. `obs` holds s_0..s_T plus, when
/// `has_final_obs`, the post-terminal state s_{T+1} used to bootstrap
/// time-limit cutoffs.
struct TrajectoryRecord {
    std::vector<Vector> obs;
    std::vector<Action> actions;
    Vector rewards;
    TerminalKind end = TerminalKind::timeout;
    bool has_final_obs = true;

    std::size_t length() const { return rewards.size(); }
};

struct ValuePair {
    Vector obs;
    double target = 0.0;
};

/// Running buffer-Z normalizer for the conditioning input.
struct Normalizer {
    double mean = 0.0;
    double stddev = 1.0;
    double norm(double z) const { return (z - mean) / stddev; }
};

struct DiagPair {
    int iteration = 0;
    double commanded = 0.0;  // sampled target value (raw units)
    double observed = 0.0;   // value actually achieved (raw units)
};

struct Trainer {
    TrainConfig config;
    EnvSpec env;
    PolicyNet policy;
    ValueNet value;  // meaningful only when config.uses_value()
    OptimizerState trunk_opt, embed_opt, log_std_opt, value_opt;
    TransitionBuffer buffer;
    RingBuffer<ValuePair> value_buffer;
    TargetModel target;
    Normalizer normalizer;
    int iteration = 0;
    std::uint64_t episode_counter = 0;
    Rng rollout_rng, minibatch_rng, target_rng;
    std::vector<DiagPair> diagnostics;

    explicit Trainer(const TrainConfig& cfg);
};

/// Relabel a rollout into supervised examples. For advantage-based
/// algorithms also produces the lambda-return value-fitting pairs.
struct Relabeled {
    std::vector<Transition> transitions;
    std::vector<ValuePair> value_pairs;
};
Relabeled relabel_trajectory(const Trainer& t, const TrajectoryRecord& traj);

/// One pass of the online algorithm: collect, relabel, store, fit value,
/// fit policy, update the target model, then evaluate.
IterationMetrics run_iteration(Trainer& t);

/// Load a static dataset: relabel once, fill the buffer, fit value function
/// first when the algorithm needs one (value warmup), no env interaction.
void fill_from_dataset(Trainer& t, const std::vector<TrajectoryRecord>& dataset);

/// Offline pass: gradient phases and target update only (no collection).
IterationMetrics run_offline_iteration(Trainer& t);

/// Full offline training per config.iterations. Trainer must be freshly
/// constructed; dataset trajectories are relabeled exactly once.
std::vector<IterationMetrics> train_offline(Trainer& t,
                                            const std::vector<TrajectoryRecord>& dataset);

/// Advantage-weighted-regression baseline update: the same weighted
/// regression as policy_loss on a policy that never sees Z.
PolicyGrads awr_update(const PolicyNet& net, std::span<const Transition> batch);

using Actor = std::function<Action(const Vector& obs, double z_norm, ActMode mode, Rng& rng)>;

struct EvalResult {
    double mean_return = 0.0;
    double max_return = 0.0;
    Vector returns;                        // deterministic episodes
    std::vector<DiagPair> diag;            // from the stochastic diagnostic episodes
};

/// Deterministic episodes conditioned on eval_target(model), plus stochastic
/// diagnostic episodes with sampled targets recording (commanded, observed)
/// pairs. For advantage conditioning the observed value is the per-step
/// advantage against `value_net`. Returns are discounted by `gamma`.
EvalResult evaluate(const Actor& actor, const EnvSpec& env, const TargetModel& model,
                    const Normalizer& normalizer, Algorithm algorithm, double gamma,
                    int episodes, int diag_episodes, std::uint64_t seed,
                    const ValueNet* value_net);

/// Same, acting with the policy network.
EvalResult evaluate(const PolicyNet& policy, const EnvSpec& env, const TargetModel& model,
                    const Normalizer& normalizer, Algorithm algorithm, double gamma,
                    int episodes, int diag_episodes, std::uint64_t seed,
                    const ValueNet* value_net);

/// Roll one stochastic episode with the trainer's current policy and streams.
TrajectoryRecord collect_episode(Trainer& t);

}  // namespace rcp
