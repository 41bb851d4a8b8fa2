#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "rcp/common.hpp"
#include "rcp/rng.hpp"

namespace rcp {

struct GridMap {
    int width = 8, height = 8;
    std::vector<std::uint8_t> blocked;  // row-major, y * width + x
    int start_x = 0, start_y = 0;
    int goal_x = 7, goal_y = 7;
    double step_reward = -1.0;
    double goal_bonus = 10.0;
    int max_steps = 64;

    bool is_blocked(int x, int y) const { return blocked[std::size_t(y) * width + x] != 0; }
    int cells() const { return width * height; }
};

struct PointMassParams {
    double dt = 0.1;
    double damping = 0.9;        // velocity retained per step before the force acts
    double start_x = -1.0, start_y = -1.0;
    double goal_x = 1.0, goal_y = 1.0;
    double init_noise = 0.1;     // uniform box around the start position
    double pos_bound = 2.0;      // positions clipped to [-bound, bound]
    int max_steps = 50;
};

struct PendulumParams {
    double dt = 0.05;
    double gravity = 10.0, length = 1.0, mass = 1.0;
    double max_torque = 2.0, max_speed = 8.0;
    double init_angle_spread = 1.0;  // angle drawn from pi +- spread
    double init_speed_spread = 0.5;
    int max_steps = 100;
};

struct EnvSpec {
    std::string name;
    int obs_dim = 0;
    ActionKind kind = ActionKind::continuous;
    int act_dim = 0;  // action dimension, or number of discrete actions
    double act_low = -1.0, act_high = 1.0;
    int max_steps = 0;
    double reward_min = 0.0, reward_max = 0.0;

    // Parameter block of the active environment; the others are ignored.
    GridMap grid;
    PointMassParams pm;
    PendulumParams pend;
};

/// Named suite: "pointmass", "pendulum", "gridworld".
/// Unknown names raise ConfigError.
EnvSpec make_env(const std::string& name);

EnvSpec make_pointmass(const PointMassParams& p);
EnvSpec make_pendulum(const PendulumParams& p);
EnvSpec make_gridworld(const GridMap& map);

/// The fixed 8x8 obstacle layout behind make_env("gridworld").
GridMap default_grid_map();

struct EnvState {
    EnvSpec spec;
    Vector internal;
    int steps = 0;
    bool terminal = false;
    TerminalKind terminal_kind = TerminalKind::none;
};

struct StepResult {
    Vector obs;
    double reward = 0.0;
    bool terminal = false;
    TerminalKind kind = TerminalKind::none;
};

/// Deterministic given (spec, seed). Initial-state spread comes entirely
/// from the seed, so recorded episodes replay bit-exactly.
std::pair<EnvState, Vector> env_reset(const EnvSpec& spec, std::uint64_t seed);

/// Continuous actions are clipped to the spec's box before the dynamics.
/// Stepping a terminal state raises ContractViolation.
StepResult env_step(EnvState& state, const Action& action);

/// Exact discounted optimal return from the canonical start state.
/// Gridworld: value iteration to 1e-10. Point-mass: return of the
/// documented straight-line stop-at-goal control law evaluated through the
/// exact dynamics. Other environments raise NotAvailable.
double optimal_return(const EnvSpec& spec, double gamma);

// Point-mass control law behind the optimal_return oracle; also usable as a
// strong reference controller. Gains tuned against the env dynamics.
inline constexpr double kPmOracleKp = 8.0;
inline constexpr double kPmOracleKd = 3.0;

/// Greedy action per cell extracted from gridworld value iteration
/// (-1 on blocked cells and the goal).
std::vector<int> gridworld_optimal_actions(const GridMap& map, double gamma);

/// Deliberately weak reference controller used by dataset collection:
/// a low-gain proportional policy plus exploration noise.
Action scripted_mediocre_action(const EnvSpec& spec, const Vector& obs, Rng& rng);

}  // namespace rcp
