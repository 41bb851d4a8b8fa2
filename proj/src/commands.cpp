#include "rcp/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "rcp/io.hpp"

namespace rcp {

namespace {

namespace fs = std::filesystem;

RunConfig load_with_overrides(const std::string& config_path, const CliOverrides& ov) {
    RunConfig cfg = load_run_config(config_path);
    if (ov.seed) cfg.train.seed = *ov.seed;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    for (const auto& w : cfg.warnings) std::cerr << w << "\n";
    return cfg;
}

Checkpoint trainer_checkpoint(const Trainer& t) {
    Checkpoint c;
    c.algorithm = t.config.algorithm;
    c.policy = t.policy;
    c.has_value = t.config.uses_value();
    if (c.has_value) c.value = t.value;
    c.target = t.target;
    c.normalizer = t.normalizer;
    return c;
}

void write_run_artifacts(const RunConfig& cfg, const Trainer& t,
                         const std::vector<IterationMetrics>& metrics) {
    fs::create_directories(cfg.out_dir);
    write_metrics(cfg.out_dir + "/metrics.csv", metrics);
    write_diagnostics(cfg.out_dir + "/diagnostics.csv", t.diagnostics);
    write_checkpoint(cfg.out_dir + "/checkpoint.bin", trainer_checkpoint(t));
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

void print_progress(const IterationMetrics& m) {
    std::fprintf(stderr,
                 "iter %4d  return %9.3f (max %9.3f)  mu_z %9.3f sigma_z %8.3f  "
                 "ploss %8.4f vloss %8.4f  buffer %zu  %.1fs\n",
                 m.iteration, m.eval_return_mean, m.eval_return_max, m.mu_z, m.sigma_z,
                 m.policy_loss_mean, m.value_loss_mean, m.buffer_size, m.wall_seconds);
}

}  // namespace

int cmd_train(const std::string& config_path, const CliOverrides& ov) {
    return guarded([&] {
        RunConfig cfg = load_with_overrides(config_path, ov);
        Trainer t(cfg.train);
        fs::create_directories(cfg.out_dir);
        std::vector<IterationMetrics> metrics;
        for (int k = 0; k < cfg.train.iterations; ++k) {
            metrics.push_back(run_iteration(t));
            print_progress(metrics.back());
            if (cfg.checkpoint_every > 0 && (k + 1) % cfg.checkpoint_every == 0 &&
                k + 1 < cfg.train.iterations)
                write_checkpoint(cfg.out_dir + "/checkpoint_" + std::to_string(k + 1) + ".bin",
                                 trainer_checkpoint(t));
        }
        write_run_artifacts(cfg, t, metrics);
        return 0;
    });
}

int cmd_train_offline(const std::string& config_path, const std::string& dataset_path,
                      const CliOverrides& ov) {
    return guarded([&] {
        RunConfig cfg = load_with_overrides(config_path, ov);
        Dataset ds = read_dataset(dataset_path);
        if (ds.env_name != cfg.train.env_name)
            throw ConfigError("dataset env '" + ds.env_name + "' does not match config env '" +
                              cfg.train.env_name + "'");
        if (ds.trajectories.empty()) throw FormatError(dataset_path + ": dataset has no records");
        Trainer t(cfg.train);
        if (ds.obs_dim != t.env.obs_dim || ds.act_dim != t.env.act_dim || ds.kind != t.env.kind)
            throw ConfigError("dataset dimensions do not match environment");
        std::vector<IterationMetrics> metrics = train_offline(t, ds.trajectories);
        for (const auto& m : metrics) print_progress(m);
        write_run_artifacts(cfg, t, metrics);
        return 0;
    });
}

int cmd_collect(const std::string& config_path, const std::string& policy_src,
                const std::string& out_path, long n_transitions, const CliOverrides& ov) {
    return guarded([&] {
        RunConfig cfg = load_with_overrides(config_path, ov);
        if (n_transitions < 0) throw ConfigError("transitions must be >= 0");
        EnvSpec env = make_env(cfg.train.env_name);

        std::optional<Checkpoint> ckpt;
        if (policy_src != "random" && policy_src != "scripted-mediocre") {
            ckpt = read_checkpoint(policy_src);
            if (ckpt->policy.obs_dim != env.obs_dim)
                throw ConfigError("checkpoint does not match environment observation size");
        }

        const std::uint64_t seed = cfg.train.seed;
        std::vector<TrajectoryRecord> trajectories;
        std::size_t total = 0;
        std::uint64_t episode = 0;
        Rng action_rng = substream(seed, Stream::rollout);
        Rng target_rng = substream(seed, Stream::target_sampling);
        while (total < std::size_t(n_transitions)) {
            auto [state, obs] = env_reset(env, substream_seed(seed, Stream::env, episode));
            ++episode;
            TrajectoryRecord traj;
            traj.obs.push_back(obs);
            double zhat = 0.0;
            const bool conditioned =
                ckpt && (ckpt->algorithm == Algorithm::rcp_r || ckpt->algorithm == Algorithm::rcp_a);
            if (ckpt && ckpt->algorithm == Algorithm::rcp_r)
                zhat = sample_target(ckpt->target, target_rng);
            while (!state.terminal) {
                Action a;
                if (policy_src == "random") {
                    if (env.kind == ActionKind::continuous) {
                        a.c.resize(std::size_t(env.act_dim));
                        for (double& v : a.c) v = action_rng.uniform(env.act_low, env.act_high);
                    } else {
                        a.d = int(action_rng.uniform_index(std::uint64_t(env.act_dim)));
                    }
                } else if (policy_src == "scripted-mediocre") {
                    a = scripted_mediocre_action(env, obs, action_rng);
                } else {
                    if (ckpt->algorithm == Algorithm::rcp_a)
                        zhat = sample_target(ckpt->target, target_rng);
                    const double z = conditioned ? ckpt->normalizer.norm(zhat) : 0.0;
                    a = act(ckpt->policy, obs, z, ActMode::stochastic, action_rng);
                }
                StepResult res = env_step(state, a);
                traj.actions.push_back(a);
                traj.rewards.push_back(res.reward);
                traj.obs.push_back(res.obs);
                obs = res.obs;
                if (res.terminal) traj.end = res.kind;
            }
            total += traj.length();
            trajectories.push_back(std::move(traj));
        }
        write_dataset(out_path, env, trajectories);
        std::fprintf(stderr, "wrote %zu transitions in %zu trajectories to %s\n", total,
                     trajectories.size(), out_path.c_str());
        return 0;
    });
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const CliOverrides& ov) {
    return guarded([&] {
        RunConfig cfg = load_with_overrides(config_path, ov);
        Checkpoint c = read_checkpoint(checkpoint_path);
        EnvSpec env = make_env(cfg.train.env_name);
        if (c.policy.obs_dim != env.obs_dim)
            throw ConfigError("checkpoint does not match environment observation size");
        EvalResult ev = evaluate(c.policy, env, c.target, c.normalizer, c.algorithm,
                                 cfg.train.gamma, cfg.train.eval_episodes, 0,
                                 substream_seed(cfg.train.seed, Stream::eval, 0),
                                 c.has_value ? &c.value : nullptr);
        for (std::size_t i = 0; i < ev.returns.size(); ++i)
            std::printf("episode %zu: %.17g\n", i, ev.returns[i]);
        std::printf("mean_return %.17g\nmax_return %.17g\n", ev.mean_return, ev.max_return);
        return 0;
    });
}

int cmd_export_heatmap(const std::string& run_dir, const std::string& out_path, int bins) {
    return guarded([&] {
        const std::string diag_path = run_dir + "/diagnostics.csv";
        if (!fs::exists(diag_path))
            throw IoError("no diagnostics found at " + diag_path +
                          " (run train with diag_episodes > 0 first)");
        std::vector<DiagPair> pairs = read_diagnostics(diag_path);
        if (pairs.empty())
            throw FormatError(diag_path + ": no diagnostic pairs recorded "
                              "(run train with diag_episodes > 0)");
        Heatmap h = bin_pairs(pairs, bins);
        const std::string out = out_path.empty() ? run_dir + "/heatmap.csv" : out_path;
        write_heatmap(out, h);
        std::printf("pearson %.17g\n", h.pearson);
        return 0;
    });
}

}  // namespace rcp
