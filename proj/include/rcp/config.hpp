#pragma once

#include <string>
#include <vector>

#include "rcp/trainer.hpp"

namespace rcp {

/// A training run as described by a config file, plus output plumbing.
struct RunConfig {
    TrainConfig train;
    std::string out_dir = "run";
    int checkpoint_every = 50;  // iterations between periodic checkpoints
    std::vector<std::string> warnings;  // one line per key filled from defaults
};

// Config files are ini-style: [section] headers, `key = value` lines and
// `#` comments. Unknown sections or keys are rejected with the offending
// line number; missing keys fall back to the documented defaults and are
// reported in RunConfig::warnings.
RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::string& path);

/// The full key set with defaults, as a valid config file (documentation
/// and golden-file anchor).
std::string default_config_text();

}  // namespace rcp
