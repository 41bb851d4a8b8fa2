#pragma once

#include <optional>
#include <string>

#include "rcp/config.hpp"

namespace rcp {

/// Command-line overrides that take precedence over the config file.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

// Each command returns a process exit status (0 = success) and reports
// failures on stderr; they are plain functions so tests can drive them
// without spawning the binary.

/// Online training: writes metrics.csv, diagnostics.csv and checkpoints
/// under the run directory.
int cmd_train(const std::string& config_path, const CliOverrides& ov = {});

/// Offline training from a dataset file; same artifacts as cmd_train.
int cmd_train_offline(const std::string& config_path, const std::string& dataset_path,
                      const CliOverrides& ov = {});

/// Collect whole trajectories totaling at least n_transitions into a
/// dataset file. `policy_src` is a checkpoint path, "random", or
/// "scripted-mediocre".
int cmd_collect(const std::string& config_path, const std::string& policy_src,
                const std::string& out_path, long n_transitions, const CliOverrides& ov = {});

/// Evaluate a checkpoint; prints per-episode and mean returns.
int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const CliOverrides& ov = {});

/// Bin the recorded (commanded, observed) diagnostics of a run directory
/// into heatmap.csv (20x20 by default).
int cmd_export_heatmap(const std::string& run_dir, const std::string& out_path = "",
                       int bins = 20);

}  // namespace rcp
