#pragma once

#include <string>
#include <vector>

#include "rcp/config.hpp"
#include "rcp/trainer.hpp"

namespace rcp {

// All files are written atomically (temp file in place, then rename).
// Text formats print doubles with 17 significant digits so that a
// write-read round trip reproduces every value exactly.

// ---- dataset files -------------------------------------------------------
// Line-delimited, comma-separated. First record is the header:
//   rcpdata,1,<env>,<obs_dim>,<continuous|discrete>,<act_dim>
// then one record per transition:
//   <traj_id>,<step>,<obs...>,<action...>,<reward>,<none|goal|timeout>
// Discrete actions occupy a single column (the action index). The last
// record of every trajectory must carry `goal` or `timeout`.

struct Dataset {
    std::string env_name;
    int obs_dim = 0;
    ActionKind kind = ActionKind::continuous;
    int act_dim = 0;
    std::vector<TrajectoryRecord> trajectories;  // loaded without final observations

    std::size_t transition_count() const;
    /// Mean of the per-trajectory discounted returns.
    double mean_trajectory_return(double gamma) const;
};

void write_dataset(const std::string& path, const EnvSpec& env,
                   const std::vector<TrajectoryRecord>& trajectories);
Dataset read_dataset(const std::string& path);

// ---- metrics files -------------------------------------------------------
// One comma-separated row per iteration. Wall-clock time is deliberately
// not a column: the file is a pure function of (config, seed).

std::string metrics_header();
std::string metrics_row(const IterationMetrics& m);
void write_metrics(const std::string& path, const std::vector<IterationMetrics>& rows);

// ---- diagnostics ---------------------------------------------------------
// (commanded, observed) target-value pairs from the stochastic evaluation
// episodes; input of the heatmap export.

void write_diagnostics(const std::string& path, const std::vector<DiagPair>& pairs);
std::vector<DiagPair> read_diagnostics(const std::string& path);

// ---- checkpoints ---------------------------------------------------------
// Flat binary: magic "RCPCKPT1", int64 dimension header, row-major float64
// parameter blocks, then the target model and normalizer. Bit-exact.

struct Checkpoint {
    Algorithm algorithm = Algorithm::rcp_a;
    PolicyNet policy;
    bool has_value = false;
    ValueNet value;
    TargetModel target;
    Normalizer normalizer;
};

void write_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& path);

// ---- heatmap export ------------------------------------------------------

struct Heatmap {
    double pearson = 0.0;
    Vector x_edges, y_edges;            // bins+1 entries each
    std::vector<std::vector<long>> counts;  // counts[y_bin][x_bin]
};

Heatmap bin_pairs(const std::vector<DiagPair>& pairs, int bins);
double pearson_correlation(const std::vector<DiagPair>& pairs);

/// First line `pearson,<r>`, then `x_edges,...` / `y_edges,...`, then one
/// row of counts per y bin (top row = highest y bin).
void write_heatmap(const std::string& path, const Heatmap& h);

/// Write text to `path` via a temp file and rename.
void atomic_write_text(const std::string& path, const std::string& text);

}  // namespace rcp
