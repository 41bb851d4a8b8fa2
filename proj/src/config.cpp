#include "rcp/config.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rcp {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Key {
    std::string default_value;
    std::function<void(RunConfig&, const std::string&)> apply;
};

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw ConfigError("invalid value '" + value + "' for key " + key);
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) bad_value(key, v);
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_value(key, v);
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) bad_value(key, v);
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        bad_value(key, v);
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v);
}

CondMode to_arch(const std::string& key, const std::string& v) {
    if (v == "concat") return CondMode::concat;
    if (v == "multiply") return CondMode::multiply;
    bad_value(key, v);
}

// Full key table: section.key -> default + setter. Order here is the
// documented order of default_config_text().
const std::vector<std::pair<std::string, Key>>& key_table() {
    static const std::vector<std::pair<std::string, Key>> table = {
        {"run.algorithm", {"rcp-a", [](RunConfig& c, const std::string& v) {
                               c.train.algorithm = parse_algorithm(v);
                           }}},
        {"run.iterations", {"100", [](RunConfig& c, const std::string& v) {
                                c.train.iterations = int(to_long("run.iterations", v));
                            }}},
        {"run.seed", {"1", [](RunConfig& c, const std::string& v) {
                          c.train.seed = std::uint64_t(to_long("run.seed", v));
                      }}},
        {"run.out_dir", {"run", [](RunConfig& c, const std::string& v) { c.out_dir = v; }}},
        {"run.eval_episodes", {"10", [](RunConfig& c, const std::string& v) {
                                   c.train.eval_episodes = int(to_long("run.eval_episodes", v));
                               }}},
        {"run.diag_episodes", {"10", [](RunConfig& c, const std::string& v) {
                                   c.train.diag_episodes = int(to_long("run.diag_episodes", v));
                               }}},
        {"run.checkpoint_every", {"50", [](RunConfig& c, const std::string& v) {
                                      c.checkpoint_every = int(to_long("run.checkpoint_every", v));
                                  }}},
        {"env.name", {"pointmass", [](RunConfig& c, const std::string& v) {
                          c.train.env_name = v;
                      }}},
        {"algo.gamma", {"0.99", [](RunConfig& c, const std::string& v) {
                            c.train.gamma = to_double("algo.gamma", v);
                        }}},
        {"algo.lambda", {"0.95", [](RunConfig& c, const std::string& v) {
                             c.train.lambda = to_double("algo.lambda", v);
                         }}},
        {"algo.weighted", {"false", [](RunConfig& c, const std::string& v) {
                               c.train.weighted = to_bool("algo.weighted", v);
                           }}},
        {"algo.beta", {"1.0", [](RunConfig& c, const std::string& v) {
                           c.train.beta = to_double("algo.beta", v);
                       }}},
        {"algo.weight_clip", {"20.0", [](RunConfig& c, const std::string& v) {
                                  c.train.weight_clip = to_double("algo.weight_clip", v);
                              }}},
        {"algo.architecture", {"multiply", [](RunConfig& c, const std::string& v) {
                                   c.train.architecture = to_arch("algo.architecture", v);
                               }}},
        {"buffer.capacity", {"100000", [](RunConfig& c, const std::string& v) {
                                 c.train.buffer_capacity =
                                     std::size_t(to_long("buffer.capacity", v));
                             }}},
        {"buffer.samples_per_iteration",
         {"2000", [](RunConfig& c, const std::string& v) {
              c.train.samples_per_iteration = int(to_long("buffer.samples_per_iteration", v));
          }}},
        {"buffer.minibatch", {"256", [](RunConfig& c, const std::string& v) {
                                  c.train.minibatch = int(to_long("buffer.minibatch", v));
                              }}},
        {"optim.value_steps", {"200", [](RunConfig& c, const std::string& v) {
                                   c.train.value_steps = int(to_long("optim.value_steps", v));
                               }}},
        {"optim.policy_steps", {"1000", [](RunConfig& c, const std::string& v) {
                                    c.train.policy_steps = int(to_long("optim.policy_steps", v));
                                }}},
        {"optim.policy_lr", {"3e-4", [](RunConfig& c, const std::string& v) {
                                 c.train.policy_lr = to_double("optim.policy_lr", v);
                             }}},
        {"optim.value_lr", {"1e-3", [](RunConfig& c, const std::string& v) {
                                c.train.value_lr = to_double("optim.value_lr", v);
                            }}},
        {"optim.hidden_width", {"128", [](RunConfig& c, const std::string& v) {
                                    c.train.hidden_width = int(to_long("optim.hidden_width", v));
                                }}},
        {"optim.embed_width", {"64", [](RunConfig& c, const std::string& v) {
                                   c.train.embed_width = int(to_long("optim.embed_width", v));
                               }}},
        {"target.tau_rel", {"0.1", [](RunConfig& c, const std::string& v) {
                                c.train.target_tau_rel = to_double("target.tau_rel", v);
                            }}},
        {"target.sigma_min_rel", {"0.05", [](RunConfig& c, const std::string& v) {
                                      c.train.target_sigma_min_rel =
                                          to_double("target.sigma_min_rel", v);
                                  }}},
        {"target.tau_abs", {"1.0", [](RunConfig& c, const std::string& v) {
                                c.train.target_tau_abs = to_double("target.tau_abs", v);
                            }}},
        {"target.sigma_min_abs", {"0.05", [](RunConfig& c, const std::string& v) {
                                      c.train.target_sigma_min_abs =
                                          to_double("target.sigma_min_abs", v);
                                  }}},
        {"offline.value_warmup_iterations",
         {"10", [](RunConfig& c, const std::string& v) {
              c.train.value_warmup_iterations =
                  int(to_long("offline.value_warmup_iterations", v));
          }}},
    };
    return table;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::map<std::string, std::string> seen;  // section.key -> value

    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError(where + ": key outside any [section]");
        const std::string full = section + "." + key;
        const auto& table = key_table();
        const auto it = std::find_if(table.begin(), table.end(),
                                     [&](const auto& kv) { return kv.first == full; });
        if (it == table.end()) throw ConfigError(where + ": unknown key " + full);
        if (seen.count(full)) throw ConfigError(where + ": duplicate key " + full);
        seen[full] = value;
        try {
            it->second.apply(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }

    for (const auto& [full, key] : key_table()) {
        if (!seen.count(full))
            cfg.warnings.push_back("config: " + full + " not set, using default " +
                                   key.default_value);
    }
    cfg.train.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_run_config(ss.str(), path);
}

std::string default_config_text() {
    std::string out;
    std::string section;
    for (const auto& [full, key] : key_table()) {
        const auto dot = full.find('.');
        const std::string sec = full.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) out += "\n";
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += full.substr(dot + 1) + " = " + key.default_value + "\n";
    }
    return out;
}

}  // namespace rcp
