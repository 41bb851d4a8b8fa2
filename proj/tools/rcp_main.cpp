// Command-line front end: train, train-offline, collect, eval, export-heatmap.

#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rcp/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"reward-conditioned policy training"};
    app.require_subcommand(1);

    std::string config, dataset, out, checkpoint, policy_src, run_dir;
    long transitions = 0;
    std::optional<std::uint64_t> seed;
    int bins = 20;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "override the config's root seed");
    };

    auto* train = app.add_subcommand("train", "online training from a config file");
    train->add_option("--config", config, "config file")->required();
    train->add_option("--out", out, "override the run output directory");
    add_seed(train);

    auto* offline = app.add_subcommand("train-offline", "train from a static dataset");
    offline->add_option("--config", config, "config file")->required();
    offline->add_option("--dataset", dataset, "dataset file")->required();
    offline->add_option("--out", out, "override the run output directory");
    add_seed(offline);

    auto* collect = app.add_subcommand("collect", "roll out a policy into a dataset file");
    collect->add_option("--config", config, "config file (env and seed)")->required();
    collect->add_option("--policy", policy_src,
                        "checkpoint path, 'random', or 'scripted-mediocre'")
        ->required();
    collect->add_option("--out", out, "dataset output path")->required();
    collect->add_option("--transitions", transitions, "minimum transition count")->required();
    add_seed(collect);

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint deterministically");
    ev->add_option("--config", config, "config file")->required();
    ev->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    add_seed(ev);

    auto* heatmap = app.add_subcommand("export-heatmap",
                                       "bin recorded target-vs-observed pairs of a run");
    heatmap->add_option("run_dir", run_dir, "run directory containing diagnostics.csv")
        ->required();
    heatmap->add_option("--out", out, "output path (default <run_dir>/heatmap.csv)");
    heatmap->add_option("--bins", bins, "bins per axis");

    CLI11_PARSE(app, argc, argv);

    rcp::CliOverrides ov;
    ov.seed = seed;
    if (!out.empty() && !heatmap->parsed() && !collect->parsed()) ov.out_dir = out;

    if (train->parsed()) return rcp::cmd_train(config, ov);
    if (offline->parsed()) return rcp::cmd_train_offline(config, dataset, ov);
    if (collect->parsed()) return rcp::cmd_collect(config, policy_src, out, transitions, ov);
    if (ev->parsed()) return rcp::cmd_eval(config, checkpoint, ov);
    if (heatmap->parsed()) return rcp::cmd_export_heatmap(run_dir, out, bins);
    return 1;
}
