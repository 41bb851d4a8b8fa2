#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rcp/commands.hpp"
#include "rcp/estimators.hpp"
#include "rcp/io.hpp"

using namespace rcp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("rcp_test_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

const char* kTinyGridConfig =
    "[run]\n"
    "algorithm = rcp-a\n"
    "iterations = 3\n"
    "seed = 9\n"
    "eval_episodes = 2\n"
    "diag_episodes = 2\n"
    "[env]\n"
    "name = gridworld\n"
    "[buffer]\n"
    "capacity = 2048\n"
    "samples_per_iteration = 64\n"
    "minibatch = 16\n"
    "[optim]\n"
    "value_steps = 4\n"
    "policy_steps = 8\n"
    "hidden_width = 8\n"
    "embed_width = 4\n";

std::vector<TrajectoryRecord> random_trajectories(const EnvSpec& env, int episodes,
                                                  std::uint64_t seed) {
    std::vector<TrajectoryRecord> out;
    Rng rng(seed);
    for (int e = 0; e < episodes; ++e) {
        auto [state, obs] = env_reset(env, seed + std::uint64_t(e));
        TrajectoryRecord traj;
        traj.obs.push_back(obs);
        while (!state.terminal) {
            Action a;
            if (env.kind == ActionKind::continuous) {
                a.c.resize(std::size_t(env.act_dim));
                for (double& v : a.c) v = rng.uniform(env.act_low, env.act_high);
            } else {
                a.d = int(rng.uniform_index(std::uint64_t(env.act_dim)));
            }
            StepResult r = env_step(state, a);
            traj.actions.push_back(a);
            traj.rewards.push_back(r.reward);
            traj.obs.push_back(r.obs);
            traj.end = r.kind;
        }
        out.push_back(std::move(traj));
    }
    return out;
}

}  // namespace

TEST_CASE("config defaults and warnings") {
    RunConfig cfg = parse_run_config("[env]\nname = gridworld\n", "<test>");
    CHECK(cfg.train.env_name == "gridworld");
    CHECK(cfg.train.samples_per_iteration == 2000);
    CHECK(cfg.train.buffer_capacity == 100000);
    CHECK(cfg.train.minibatch == 256);
    CHECK(cfg.train.value_steps == 200);
    CHECK(cfg.train.policy_steps == 1000);
    CHECK(cfg.train.hidden_width == 128);
    // one warning per key left at its default
    CHECK(!cfg.warnings.empty());
    bool saw_seed = false;
    for (const auto& w : cfg.warnings) saw_seed |= w.find("run.seed") != std::string::npos;
    CHECK(saw_seed);
}

TEST_CASE("config rejects unknown keys with the line number") {
    const char* text = "[run]\nalgorithm = rcp-r\nfoo = 1\n";
    try {
        parse_run_config(text, "bad.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.ini:3") != std::string::npos);
        CHECK(msg.find("run.foo") != std::string::npos);
    }
}

TEST_CASE("config rejects malformed input") {
    CHECK_THROWS_AS(parse_run_config("algorithm = rcp-r\n", "<t>"), ConfigError);   // no section
    CHECK_THROWS_AS(parse_run_config("[run]\nalgorithm\n", "<t>"), ConfigError);    // no '='
    CHECK_THROWS_AS(parse_run_config("[run]\nseed = x\n", "<t>"), ConfigError);     // bad value
    CHECK_THROWS_AS(parse_run_config("[run]\nseed = 1\nseed = 2\n", "<t>"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("[run]\nalgorithm = ppo\n", "<t>"), ConfigError);
}

TEST_CASE("config key set is stable") {
    // golden: parsing the documented defaults reproduces them with no warnings
    RunConfig cfg = parse_run_config(default_config_text(), "<defaults>");
    CHECK(cfg.warnings.empty());
    CHECK(cfg.train.algorithm == Algorithm::rcp_a);
    CHECK(default_config_text().find("samples_per_iteration = 2000") != std::string::npos);
    CHECK(default_config_text().find("minibatch = 256") != std::string::npos);
    CHECK(default_config_text().find("value_steps = 200") != std::string::npos);
    CHECK(default_config_text().find("policy_steps = 1000") != std::string::npos);
    CHECK(default_config_text().find("capacity = 100000") != std::string::npos);
}

TEST_CASE("metrics column order is stable") {
    CHECK(metrics_header() ==
          "iteration,eval_return_mean,eval_return_max,mu_z,sigma_z,policy_loss,value_loss,"
          "buffer_size");
    IterationMetrics m;
    m.iteration = 3;
    m.eval_return_mean = -1.5;
    m.buffer_size = 42;
    const std::string row = metrics_row(m);
    CHECK(row.substr(0, 2) == "3,");
    CHECK(row.find("-1.5") != std::string::npos);
    CHECK(row.rfind(",42") == row.size() - 3);
}

TEST_CASE("dataset round trip is exact") {
    TempDir tmp;
    for (const char* env_name : {"pointmass", "gridworld"}) {
        EnvSpec env = make_env(env_name);
        auto trajs = random_trajectories(env, 3, 17);
        const std::string path = tmp.file(std::string("ds_") + env_name + ".csv");
        write_dataset(path, env, trajs);
        Dataset ds = read_dataset(path);
        CHECK(ds.env_name == env.name);
        CHECK(ds.obs_dim == env.obs_dim);
        CHECK(ds.kind == env.kind);
        CHECK(ds.act_dim == env.act_dim);
        REQUIRE(ds.trajectories.size() == trajs.size());
        for (std::size_t k = 0; k < trajs.size(); ++k) {
            const auto& a = trajs[k];
            const auto& b = ds.trajectories[k];
            REQUIRE(b.length() == a.length());
            CHECK(b.end == a.end);
            CHECK(b.has_final_obs == false);
            for (std::size_t t = 0; t < a.length(); ++t) {
                CHECK(b.obs[t] == a.obs[t]);
                CHECK(b.rewards[t] == a.rewards[t]);
                if (env.kind == ActionKind::continuous)
                    CHECK(b.actions[t].c == a.actions[t].c);
                else
                    CHECK(b.actions[t].d == a.actions[t].d);
            }
        }
    }
}

TEST_CASE("dataset reader rejects broken files") {
    TempDir tmp;
    const std::string path = tmp.file("bad.csv");
    atomic_write_text(path, "not a header\n");
    CHECK_THROWS_AS(read_dataset(path), FormatError);

    // missing end marker on the trajectory
    atomic_write_text(path, "rcpdata,1,gridworld,64,discrete,4\n");
    Dataset empty = read_dataset(path);
    CHECK(empty.trajectories.empty());

    std::string row = "0,0";
    for (int i = 0; i < 64; ++i) row += ",0";
    row += ",1,-1,none\n";
    atomic_write_text(path, "rcpdata,1,gridworld,64,discrete,4\n" + row);
    CHECK_THROWS_AS(read_dataset(path), FormatError);

    // non-contiguous step index
    std::string row2 = "0,2";
    for (int i = 0; i < 64; ++i) row2 += ",0";
    row2 += ",1,-1,timeout\n";
    atomic_write_text(path, "rcpdata,1,gridworld,64,discrete,4\n" + row2);
    CHECK_THROWS_AS(read_dataset(path), FormatError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
    TempDir tmp;
    Rng rng(23);
    Checkpoint c;
    c.algorithm = Algorithm::rcp_a;
    c.policy = make_policy(CondMode::multiply, ActionKind::continuous, 4, 2, 8, 4, -1, 1, rng);
    for (double& v : c.policy.z_embed.w[1].a) v = rng.normal();
    c.has_value = true;
    c.value = make_value(4, 8, rng);
    c.target.mu = 1.25;
    c.target.sigma = 0.75;
    c.normalizer.mean = -3.5;
    c.normalizer.stddev = 2.25;

    const std::string path = tmp.file("ck.bin");
    write_checkpoint(path, c);
    Checkpoint r = read_checkpoint(path);
    CHECK(r.algorithm == c.algorithm);
    CHECK(r.policy.mode == c.policy.mode);
    CHECK(r.policy.log_std == c.policy.log_std);
    for (int l = 0; l < c.policy.trunk.layers(); ++l) {
        CHECK(r.policy.trunk.w[l].a == c.policy.trunk.w[l].a);
        CHECK(r.policy.trunk.b[l] == c.policy.trunk.b[l]);
    }
    for (int l = 0; l < c.policy.z_embed.layers(); ++l)
        CHECK(r.policy.z_embed.w[l].a == c.policy.z_embed.w[l].a);
    for (int l = 0; l < c.value.layers(); ++l) CHECK(r.value.w[l].a == c.value.w[l].a);
    CHECK(r.target.mu == c.target.mu);
    CHECK(r.target.sigma == c.target.sigma);
    CHECK(r.normalizer.mean == c.normalizer.mean);
    CHECK(r.normalizer.stddev == c.normalizer.stddev);

    // a reloaded policy evaluates identically
    EnvSpec env = make_env("pointmass");
    EvalResult e1 = evaluate(c.policy, env, c.target, c.normalizer, c.algorithm, 0.99, 3, 0, 5,
                             &c.value);
    EvalResult e2 = evaluate(r.policy, env, r.target, r.normalizer, r.algorithm, 0.99, 3, 0, 5,
                             &r.value);
    CHECK(e1.returns == e2.returns);
}

TEST_CASE("checkpoint reader rejects garbage") {
    TempDir tmp;
    const std::string path = tmp.file("junk.bin");
    atomic_write_text(path, "RCPWRONG????????");
    CHECK_THROWS_AS(read_checkpoint(path), FormatError);
}

TEST_CASE("cmd_train writes one metrics row per iteration, byte-identical across runs") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("grid.ini");
    atomic_write_text(cfg_path, kTinyGridConfig);

    CliOverrides ov1;
    ov1.out_dir = tmp.file("run1");
    REQUIRE(cmd_train(cfg_path, ov1) == 0);
    const std::string m1 = read_file(tmp.file("run1") + "/metrics.csv");
    CHECK(count_lines(m1) == 4);  // header + 3 rows

    CliOverrides ov2;
    ov2.out_dir = tmp.file("run2");
    REQUIRE(cmd_train(cfg_path, ov2) == 0);
    const std::string m2 = read_file(tmp.file("run2") + "/metrics.csv");
    CHECK(m1 == m2);
    CHECK(read_file(tmp.file("run1") + "/diagnostics.csv") ==
          read_file(tmp.file("run2") + "/diagnostics.csv"));
    CHECK(read_file(tmp.file("run1") + "/checkpoint.bin") ==
          read_file(tmp.file("run2") + "/checkpoint.bin"));

    // a different seed changes the metrics
    CliOverrides ov3;
    ov3.out_dir = tmp.file("run3");
    ov3.seed = 1234;
    REQUIRE(cmd_train(cfg_path, ov3) == 0);
    CHECK(read_file(tmp.file("run3") + "/metrics.csv") != m1);
}

TEST_CASE("cmd_train rejects a bad config with a nonzero exit") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("bad.ini");
    atomic_write_text(cfg_path, "[run]\nnot_a_key = 1\n");
    CHECK(cmd_train(cfg_path) != 0);
    CHECK(cmd_train(tmp.file("missing.ini")) != 0);
}

TEST_CASE("cmd_collect writes a header-only file for n=0") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("pm.ini");
    atomic_write_text(cfg_path, "[env]\nname = pointmass\n");
    const std::string out = tmp.file("empty.csv");
    REQUIRE(cmd_collect(cfg_path, "random", out, 0) == 0);
    const std::string text = read_file(out);
    CHECK(count_lines(text) == 1);
    CHECK(text.find("rcpdata,1,pointmass,4,continuous,2") == 0);
}

TEST_CASE("cmd_collect random gridworld meets the quota with contiguous ids") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("grid.ini");
    atomic_write_text(cfg_path, "[env]\nname = gridworld\n");
    const std::string out = tmp.file("grid.csv");
    REQUIRE(cmd_collect(cfg_path, "random", out, 5000) == 0);
    Dataset ds = read_dataset(out);  // the reader enforces id/step contiguity
    CHECK(ds.transition_count() >= 5000);
    for (const auto& t : ds.trajectories) CHECK(t.end != TerminalKind::none);
}

TEST_CASE("scripted-mediocre pointmass lands mid-range between floor and oracle") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("pm.ini");
    atomic_write_text(cfg_path, "[env]\nname = pointmass\n");
    const std::string out = tmp.file("med.csv");
    REQUIRE(cmd_collect(cfg_path, "scripted-mediocre", out, 10000) == 0);
    Dataset ds = read_dataset(out);

    const double gamma = 0.99;
    const double mean_ret = ds.mean_trajectory_return(gamma);
    EnvSpec env = make_env("pointmass");
    const double opt = optimal_return(env, gamma);
    // return of holding still at the canonical start
    double floor = 0.0, disc = 1.0;
    const double d0 = std::hypot(env.pm.start_x - env.pm.goal_x, env.pm.start_y - env.pm.goal_y);
    for (int t = 0; t < env.max_steps; ++t) {
        floor += disc * -d0;
        disc *= gamma;
    }
    const double score = (mean_ret - floor) / (opt - floor);
    CHECK(score >= 0.3);
    CHECK(score <= 0.7);
}

TEST_CASE("cmd_train_offline rejects mismatched or empty datasets") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("grid.ini");
    atomic_write_text(cfg_path, kTinyGridConfig);

    // env mismatch: a pointmass dataset against a gridworld config
    EnvSpec pm = make_env("pointmass");
    const std::string ds_path = tmp.file("pm.csv");
    write_dataset(ds_path, pm, random_trajectories(pm, 1, 3));
    CHECK(cmd_train_offline(cfg_path, ds_path) != 0);

    // empty dataset
    EnvSpec grid = make_env("gridworld");
    const std::string empty_path = tmp.file("empty.csv");
    write_dataset(empty_path, grid, {});
    CHECK(cmd_train_offline(cfg_path, empty_path) != 0);
}

TEST_CASE("cmd_train_offline runs end to end on a small dataset") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("grid.ini");
    atomic_write_text(cfg_path, kTinyGridConfig);
    EnvSpec grid = make_env("gridworld");
    const std::string ds_path = tmp.file("grid.csv");
    write_dataset(ds_path, grid, random_trajectories(grid, 6, 21));
    CliOverrides ov;
    ov.out_dir = tmp.file("offline_run");
    REQUIRE(cmd_train_offline(cfg_path, ds_path, ov) == 0);
    CHECK(count_lines(read_file(tmp.file("offline_run") + "/metrics.csv")) == 4);
}

TEST_CASE("heatmap binning puts identical pairs in one diagonal cell") {
    std::vector<DiagPair> pairs(10, {0, 2.5, 2.5});
    Heatmap h = bin_pairs(pairs, 5);
    long total = 0;
    int nonzero = 0;
    for (const auto& row : h.counts)
        for (long c : row) {
            total += c;
            nonzero += c > 0;
        }
    CHECK(total == 10);
    CHECK(nonzero == 1);
    // the nonzero bin sits on the diagonal because both axes use one grid
    for (std::size_t y = 0; y < h.counts.size(); ++y)
        for (std::size_t x = 0; x < h.counts[y].size(); ++x)
            if (h.counts[y][x] > 0) CHECK(x == y);
}

TEST_CASE("heatmap of {(0,0),(1,1)} with 2 bins is the identity") {
    std::vector<DiagPair> pairs{{0, 0.0, 0.0}, {0, 1.0, 1.0}};
    Heatmap h = bin_pairs(pairs, 2);
    CHECK(h.counts[0][0] == 1);
    CHECK(h.counts[1][1] == 1);
    CHECK(h.counts[0][1] == 0);
    CHECK(h.counts[1][0] == 0);
    CHECK(h.x_edges == Vector{0.0, 0.5, 1.0});
}

TEST_CASE("export-heatmap correlation matches a recompute oracle") {
    TempDir tmp;
    const std::string cfg_path = tmp.file("grid.ini");
    atomic_write_text(cfg_path, kTinyGridConfig);
    CliOverrides ov;
    ov.out_dir = tmp.file("run");
    REQUIRE(cmd_train(cfg_path, ov) == 0);
    REQUIRE(cmd_export_heatmap(tmp.file("run")) == 0);

    auto pairs = read_diagnostics(tmp.file("run") + "/diagnostics.csv");
    REQUIRE(pairs.size() >= 2);
    double mx = 0, my = 0;
    for (const auto& p : pairs) {
        mx += p.commanded;
        my += p.observed;
    }
    mx /= double(pairs.size());
    my /= double(pairs.size());
    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& p : pairs) {
        sxy += (p.commanded - mx) * (p.observed - my);
        sxx += (p.commanded - mx) * (p.commanded - mx);
        syy += (p.observed - my) * (p.observed - my);
    }
    const double oracle = sxy / std::sqrt(sxx * syy);

    const std::string text = read_file(tmp.file("run") + "/heatmap.csv");
    REQUIRE(text.rfind("pearson,", 0) == 0);
    const double reported = std::stod(text.substr(8, text.find('\n') - 8));
    CHECK(std::abs(reported - oracle) <= 1e-12 * std::max(1.0, std::abs(oracle)));
}

TEST_CASE("export-heatmap without diagnostics explains the problem") {
    TempDir tmp;
    fs::create_directories(tmp.file("empty_run"));
    CHECK(cmd_export_heatmap(tmp.file("empty_run")) != 0);
}
