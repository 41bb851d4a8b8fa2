#include "rcp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "rcp/batch.hpp"
#include "rcp/estimators.hpp"

namespace rcp {

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::rcp_r: return "rcp-r";
        case Algorithm::rcp_a: return "rcp-a";
        case Algorithm::awr: return "awr";
        case Algorithm::bc: return "bc";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "rcp-r") return Algorithm::rcp_r;
    if (s == "rcp-a") return Algorithm::rcp_a;
    if (s == "awr") return Algorithm::awr;
    if (s == "bc") return Algorithm::bc;
    throw ConfigError("unknown algorithm: " + s + " (expected rcp-r|rcp-a|awr|bc)");
}

void TrainConfig::validate() const {
    auto positive = [](long v, const char* what) {
        if (v < 1) throw ConfigError(std::string(what) + " must be >= 1");
    };
    positive(long(buffer_capacity), "buffer_capacity");
    positive(samples_per_iteration, "samples_per_iteration");
    positive(minibatch, "minibatch");
    positive(value_steps, "value_steps");
    positive(policy_steps, "policy_steps");
    positive(eval_episodes, "eval_episodes");
    positive(hidden_width, "hidden_width");
    positive(embed_width, "embed_width");
    if (iterations < 0) throw ConfigError("iterations must be >= 0");
    if (diag_episodes < 0) throw ConfigError("diag_episodes must be >= 0");
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must be in [0,1]");
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0,1]");
    if (beta <= 0.0) throw ConfigError("beta must be > 0");
    if (weight_clip <= 0.0) throw ConfigError("weight_clip must be > 0");
    if (policy_lr <= 0.0 || value_lr <= 0.0) throw ConfigError("learning rates must be > 0");
}

namespace {

CondMode policy_mode(const TrainConfig& cfg) {
    return cfg.conditioned() ? cfg.architecture : CondMode::none;
}

TrainConfig validated(TrainConfig cfg) {
    cfg.validate();
    // awr is defined by its exponential weighting; bc is plain regression
    if (cfg.algorithm == Algorithm::awr) cfg.weighted = true;
    if (cfg.algorithm == Algorithm::bc) cfg.weighted = false;
    return cfg;
}

TargetModel initial_target(const TrainConfig& cfg) {
    TargetModel m;
    m.mu = 0.0;
    m.sigma = 1.0;
    m.beta = cfg.beta;
    m.tau_rel = cfg.target_tau_rel;
    m.sigma_min_rel = cfg.target_sigma_min_rel;
    m.tau_s = cfg.target_tau_abs;
    m.sigma_min = cfg.target_sigma_min_abs;
    return m;
}

Vector batch_values(const ValueNet& net, const std::vector<Vector>& obs, std::size_t count) {
    Matrix m(int(count), int(obs[0].size()));
    for (std::size_t i = 0; i < count; ++i)
        std::copy(obs[i].begin(), obs[i].end(), m.row(int(i)));
    Matrix out = dense_forward_batch(net, m);
    Vector v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = out(int(i), 0);
    return v;
}

void refresh_batch(const Trainer& t, std::vector<Transition>& batch) {
    const bool weighted = t.config.uses_weights();
    for (Transition& tr : batch) {
        tr.z_norm = t.normalizer.norm(tr.z_raw);
        tr.weight = weighted ? exp_weight(tr.z_raw, t.config.beta, t.config.weight_clip) : 1.0;
    }
}

void update_normalizer(Trainer& t) {
    const Vector zs = buffer_all_values(t.buffer);
    if (zs.empty()) return;
    double mean = 0.0;
    for (double z : zs) mean += z;
    mean /= double(zs.size());
    double var = 0.0;
    for (double z : zs) var += (z - mean) * (z - mean);
    var /= double(zs.size());
    t.normalizer.mean = mean;
    t.normalizer.stddev = std::max(1e-6, std::sqrt(var));
}

double policy_phase(Trainer& t) {
    double loss_sum = 0.0;
    for (int s = 0; s < t.config.policy_steps; ++s) {
        auto batch = t.buffer.sample(std::size_t(t.config.minibatch), t.minibatch_rng);
        refresh_batch(t, batch);
        PolicyGrads g = policy_loss(t.policy, batch);
        optimizer_step(t.policy.trunk, g.trunk, t.trunk_opt);
        if (t.policy.mode == CondMode::multiply)
            optimizer_step(t.policy.z_embed, g.embed, t.embed_opt);
        if (t.policy.kind == ActionKind::continuous) {
            adam_step(t.policy.log_std, g.dlog_std, t.log_std_opt);
            for (double& ls : t.policy.log_std) ls = clamp(ls, kLogStdMin, kLogStdMax);
        }
        loss_sum += g.loss;
    }
    return loss_sum / double(t.config.policy_steps);
}

double value_phase(Trainer& t) {
    if (!t.config.uses_value() || t.value_buffer.size() == 0) return 0.0;
    double loss_sum = 0.0;
    const int dim = t.env.obs_dim;
    for (int s = 0; s < t.config.value_steps; ++s) {
        auto batch = t.value_buffer.sample(std::size_t(t.config.minibatch), t.minibatch_rng);
        Matrix obs(int(batch.size()), dim);
        Vector targets(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::copy(batch[i].obs.begin(), batch[i].obs.end(), obs.row(int(i)));
            targets[i] = batch[i].target;
        }
        ValueLoss vl = value_loss(t.value, obs, targets);
        optimizer_step(t.value, vl.grads, t.value_opt);
        loss_sum += vl.loss;
    }
    return loss_sum / double(t.config.value_steps);
}

}  // namespace

Trainer::Trainer(const TrainConfig& cfg)
    : config(validated(cfg)),
      env(make_env(config.env_name)),
      buffer(config.buffer_capacity),
      value_buffer(config.buffer_capacity),
      target(initial_target(config)),
      rollout_rng(substream(config.seed, Stream::rollout)),
      minibatch_rng(substream(config.seed, Stream::minibatch)),
      target_rng(substream(config.seed, Stream::target_sampling)) {
    Rng init(substream(config.seed, Stream::policy_init));
    policy = make_policy(policy_mode(config), env.kind, env.obs_dim, env.act_dim,
                         config.hidden_width, config.embed_width, env.act_low, env.act_high, init);
    trunk_opt = make_optimizer(policy.trunk, config.policy_lr);
    if (policy.mode == CondMode::multiply)
        embed_opt = make_optimizer(policy.z_embed, config.policy_lr);
    if (policy.kind == ActionKind::continuous)
        log_std_opt = make_optimizer(policy.log_std.size(), config.policy_lr);
    if (config.uses_value()) {
        value = make_value(env.obs_dim, config.hidden_width, init);
        value_opt = make_optimizer(value, config.value_lr);
    }
}

TrajectoryRecord collect_episode(Trainer& t) {
    TrajectoryRecord traj;
    const std::uint64_t env_seed = substream_seed(t.config.seed, Stream::env, t.episode_counter);
    t.episode_counter += 1;
    auto [state, obs] = env_reset(t.env, env_seed);
    traj.obs.push_back(obs);

    double zhat = 0.0;
    if (t.config.algorithm == Algorithm::rcp_r) zhat = sample_target(t.target, t.target_rng);

    while (!state.terminal) {
        if (t.config.algorithm == Algorithm::rcp_a) zhat = sample_target(t.target, t.target_rng);
        const double z = t.config.conditioned() ? t.normalizer.norm(zhat) : 0.0;
        Action a = act(t.policy, obs, z, ActMode::stochastic, t.rollout_rng);
        StepResult res = env_step(state, a);
        traj.actions.push_back(a);
        traj.rewards.push_back(res.reward);
        traj.obs.push_back(res.obs);
        obs = res.obs;
        if (res.terminal) traj.end = res.kind;
        if (!std::isfinite(res.reward))
            throw ContractViolation("collect: environment produced non-finite reward");
    }
    traj.has_final_obs = true;
    return traj;
}

Relabeled relabel_trajectory(const Trainer& t, const TrajectoryRecord& traj) {
    const std::size_t n = traj.length();
    require(n >= 1, "relabel: empty trajectory");
    Relabeled out;

    Vector z;
    if (t.config.uses_value()) {
        // values for s_0..s_{n-1}; bootstrap from the post-cutoff state on
        // timeouts (last recorded state when the dataset lacks it), 0 on goals
        Vector values = batch_values(t.value, traj.obs, n);
        double bootstrap = 0.0;
        if (traj.end == TerminalKind::timeout) {
            const Vector& bs = traj.has_final_obs ? traj.obs[n] : traj.obs[n - 1];
            bootstrap = dense_forward(t.value, bs)[0];
        }
        Vector aug = traj.rewards;
        aug.push_back(bootstrap);
        Vector rtg = reward_to_go(aug, t.config.gamma);  // rtg[t] carries the bootstrap tail
        z.resize(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = rtg[i] - values[i];

        Vector targets = td_lambda_targets(traj.rewards, values, bootstrap, t.config.gamma,
                                           t.config.lambda);
        out.value_pairs.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            out.value_pairs.push_back({traj.obs[i], targets[i]});
    } else {
        z = reward_to_go(traj.rewards, t.config.gamma);
    }

    out.transitions.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Transition tr;
        tr.obs = traj.obs[i];
        tr.action = traj.actions[i].c;
        tr.action_index = traj.actions[i].d;
        tr.z_raw = z[i];
        out.transitions.push_back(std::move(tr));
    }
    return out;
}

IterationMetrics run_iteration(Trainer& t) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationMetrics m;
    t.iteration += 1;
    m.iteration = t.iteration;

    // (1) collect whole episodes until the sample quota is reached
    std::vector<TrajectoryRecord> rollouts;
    std::size_t count = 0;
    while (count < std::size_t(t.config.samples_per_iteration)) {
        rollouts.push_back(collect_episode(t));
        count += rollouts.back().length();
    }

    // (2)-(3) relabel and store exactly samples_per_iteration transitions
    std::size_t stored = 0;
    for (const TrajectoryRecord& traj : rollouts) {
        if (stored == std::size_t(t.config.samples_per_iteration)) break;
        Relabeled r = relabel_trajectory(t, traj);
        for (std::size_t i = 0; i < r.transitions.size(); ++i) {
            if (stored == std::size_t(t.config.samples_per_iteration)) break;
            t.buffer.push(r.transitions[i]);
            if (t.config.uses_value()) t.value_buffer.push(r.value_pairs[i]);
            ++stored;
        }
    }
    update_normalizer(t);

    // (4) value regression, (5) policy regression, (6) target distribution
    m.value_loss_mean = value_phase(t);
    m.policy_loss_mean = policy_phase(t);
    t.target = target_update(t.target, buffer_all_values(t.buffer));

    EvalResult ev = evaluate(t.policy, t.env, t.target, t.normalizer, t.config.algorithm,
                             t.config.gamma, t.config.eval_episodes, t.config.diag_episodes,
                             substream_seed(t.config.seed, Stream::eval, std::uint64_t(t.iteration)),
                             t.config.uses_value() ? &t.value : nullptr);
    for (DiagPair& d : ev.diag) d.iteration = t.iteration;
    t.diagnostics.insert(t.diagnostics.end(), ev.diag.begin(), ev.diag.end());

    m.eval_return_mean = ev.mean_return;
    m.eval_return_max = ev.max_return;
    m.mu_z = t.target.mu;
    m.sigma_z = t.target.sigma;
    m.buffer_size = t.buffer.size();
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

void fill_from_dataset(Trainer& t, const std::vector<TrajectoryRecord>& dataset) {
    require(!dataset.empty(), "offline: empty dataset");
    std::size_t total = 0;
    for (const auto& traj : dataset) total += traj.length();
    if (t.buffer.capacity() < total) {
        t.buffer = TransitionBuffer(total);
        t.value_buffer = RingBuffer<ValuePair>(total);
    }

    // Iterated value fitting before the single relabeling pass, so
    // advantages are taken against a fitted baseline rather than noise.
    // Skipped entirely for a zero-iteration run (pure fill, no updates).
    const int warmup = t.config.iterations > 0 ? t.config.value_warmup_iterations : 0;
    if (t.config.uses_value()) {
        for (int w = 0; w < warmup; ++w) {
            t.value_buffer = RingBuffer<ValuePair>(std::max(total, std::size_t(1)));
            for (const auto& traj : dataset) {
                const std::size_t n = traj.length();
                Vector values = batch_values(t.value, traj.obs, n);
                double bootstrap = 0.0;
                if (traj.end == TerminalKind::timeout) {
                    const Vector& bs = traj.has_final_obs ? traj.obs[n] : traj.obs[n - 1];
                    bootstrap = dense_forward(t.value, bs)[0];
                }
                Vector targets = td_lambda_targets(traj.rewards, values, bootstrap,
                                                   t.config.gamma, t.config.lambda);
                for (std::size_t i = 0; i < n; ++i) t.value_buffer.push({traj.obs[i], targets[i]});
            }
            value_phase(t);
        }
        // drop warmup pairs; the fill below stores targets from the final fit
        t.value_buffer = RingBuffer<ValuePair>(std::max(t.buffer.capacity(), std::size_t(1)));
    }

    for (const auto& traj : dataset) {
        Relabeled r = relabel_trajectory(t, traj);
        for (std::size_t i = 0; i < r.transitions.size(); ++i) {
            t.buffer.push(r.transitions[i]);
            if (t.config.uses_value()) t.value_buffer.push(r.value_pairs[i]);
        }
    }
    update_normalizer(t);
    t.target = target_update(t.target, buffer_all_values(t.buffer));
}

IterationMetrics run_offline_iteration(Trainer& t) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationMetrics m;
    t.iteration += 1;
    m.iteration = t.iteration;
    m.value_loss_mean = value_phase(t);
    m.policy_loss_mean = policy_phase(t);
    t.target = target_update(t.target, buffer_all_values(t.buffer));

    EvalResult ev = evaluate(t.policy, t.env, t.target, t.normalizer, t.config.algorithm,
                             t.config.gamma, t.config.eval_episodes, t.config.diag_episodes,
                             substream_seed(t.config.seed, Stream::eval, std::uint64_t(t.iteration)),
                             t.config.uses_value() ? &t.value : nullptr);
    for (DiagPair& d : ev.diag) d.iteration = t.iteration;
    t.diagnostics.insert(t.diagnostics.end(), ev.diag.begin(), ev.diag.end());

    m.eval_return_mean = ev.mean_return;
    m.eval_return_max = ev.max_return;
    m.mu_z = t.target.mu;
    m.sigma_z = t.target.sigma;
    m.buffer_size = t.buffer.size();
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

std::vector<IterationMetrics> train_offline(Trainer& t,
                                            const std::vector<TrajectoryRecord>& dataset) {
    fill_from_dataset(t, dataset);
    std::vector<IterationMetrics> out;
    out.reserve(std::size_t(t.config.iterations));
    for (int k = 0; k < t.config.iterations; ++k) out.push_back(run_offline_iteration(t));
    return out;
}

PolicyGrads awr_update(const PolicyNet& net, std::span<const Transition> batch) {
    require(net.mode == CondMode::none, "awr_update: policy must be unconditioned");
    return policy_loss(net, batch);
}

EvalResult evaluate(const Actor& actor, const EnvSpec& env, const TargetModel& model,
                    const Normalizer& normalizer, Algorithm algorithm, double gamma,
                    int episodes, int diag_episodes, std::uint64_t seed,
                    const ValueNet* value_net) {
    require(episodes >= 1, "evaluate: episodes must be >= 1");
    const bool conditioned = algorithm == Algorithm::rcp_r || algorithm == Algorithm::rcp_a;
    if (!conditioned) diag_episodes = 0;
    require(algorithm != Algorithm::rcp_a || diag_episodes == 0 || value_net != nullptr,
            "evaluate: advantage diagnostics need the value network");

    EvalResult out;
    out.returns.assign(std::size_t(episodes), 0.0);
    std::vector<std::vector<DiagPair>> diag(std::size_t(std::max(diag_episodes, 0)));

    const double eval_z = eval_target(model);

#pragma omp parallel for schedule(static)
    for (int e = 0; e < episodes + diag_episodes; ++e) {
        const bool diagnostic = e >= episodes;
        Rng action_rng = substream(seed, Stream::rollout, std::uint64_t(e));
        Rng target_draw = substream(seed, Stream::target_sampling, std::uint64_t(e));
        auto [state, obs] = env_reset(env, substream_seed(seed, Stream::env, std::uint64_t(e)));

        TrajectoryRecord traj;
        traj.obs.push_back(obs);
        double commanded = eval_z;
        if (diagnostic && algorithm == Algorithm::rcp_r)
            commanded = sample_target(model, target_draw);

        Vector commanded_steps;
        double ret = 0.0, disc = 1.0;
        while (!state.terminal) {
            if (diagnostic && algorithm == Algorithm::rcp_a)
                commanded = sample_target(model, target_draw);
            if (diagnostic) commanded_steps.push_back(commanded);
            const double z = conditioned ? normalizer.norm(commanded) : 0.0;
            Action a = actor(obs, z, diagnostic ? ActMode::stochastic : ActMode::deterministic,
                             action_rng);
            StepResult res = env_step(state, a);
            ret += disc * res.reward;
            disc *= gamma;
            traj.rewards.push_back(res.reward);
            traj.obs.push_back(res.obs);
            obs = res.obs;
            if (res.terminal) traj.end = res.kind;
        }

        if (!diagnostic) {
            out.returns[std::size_t(e)] = ret;
        } else {
            auto& pairs = diag[std::size_t(e - episodes)];
            if (algorithm == Algorithm::rcp_r) {
                pairs.push_back({0, commanded, ret});
            } else {
                // per-step advantage actually obtained, against the current value net
                const std::size_t n = traj.length();
                Vector values = batch_values(*value_net, traj.obs, n);
                double bootstrap = 0.0;
                if (traj.end == TerminalKind::timeout)
                    bootstrap = dense_forward(*value_net, traj.obs[n])[0];
                Vector aug = traj.rewards;
                aug.push_back(bootstrap);
                Vector rtg = reward_to_go(aug, gamma);
                for (std::size_t i = 0; i < n; ++i)
                    pairs.push_back({0, commanded_steps[i], rtg[i] - values[i]});
            }
        }
    }

    double sum = 0.0, mx = -1e300;
    for (double r : out.returns) {
        sum += r;
        mx = std::max(mx, r);
    }
    out.mean_return = sum / double(episodes);
    out.max_return = mx;
    for (auto& d : diag) out.diag.insert(out.diag.end(), d.begin(), d.end());
    return out;
}

EvalResult evaluate(const PolicyNet& policy, const EnvSpec& env, const TargetModel& model,
                    const Normalizer& normalizer, Algorithm algorithm, double gamma,
                    int episodes, int diag_episodes, std::uint64_t seed,
                    const ValueNet* value_net) {
    Actor actor = [&policy](const Vector& obs, double z, ActMode mode, Rng& rng) {
        return act(policy, obs, z, mode, rng);
    };
    return evaluate(actor, env, model, normalizer, algorithm, gamma, episodes, diag_episodes,
                    seed, value_net);
}

}  // namespace rcp
