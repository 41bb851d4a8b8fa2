#include "rcp/envs.hpp"

#include <algorithm>
#include <cmath>

namespace rcp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

Vector pointmass_obs(const Vector& s) { return s; }

Vector gridworld_obs(const GridMap& m, int x, int y) {
    Vector obs(m.cells(), 0.0);
    obs[std::size_t(y) * m.width + x] = 1.0;
    return obs;
}

Vector pendulum_obs(const Vector& s) { return {std::cos(s[0]), std::sin(s[0]), s[1]}; }

// Gridworld action order: 0 +x, 1 -x, 2 +y, 3 -y. Moves into walls or
// blocked cells leave the agent in place.
void grid_move(const GridMap& m, int& x, int& y, int action) {
    int nx = x, ny = y;
    switch (action) {
        case 0: nx = x + 1; break;
        case 1: nx = x - 1; break;
        case 2: ny = y + 1; break;
        case 3: ny = y - 1; break;
        default: throw ContractViolation("gridworld: action index out of range");
    }
    if (nx < 0 || nx >= m.width || ny < 0 || ny >= m.height || m.is_blocked(nx, ny)) return;
    x = nx;
    y = ny;
}

// Shared by env_step and the optimal_return oracle's duplicated integrator:
// semi-implicit Euler with velocity damping, positions clipped to the box.
void pointmass_dynamics(const PointMassParams& p, double& px, double& py, double& vx, double& vy,
                        double fx, double fy) {
    vx = p.damping * vx + p.dt * fx;
    vy = p.damping * vy + p.dt * fy;
    px = clamp(px + p.dt * vx, -p.pos_bound, p.pos_bound);
    py = clamp(py + p.dt * vy, -p.pos_bound, p.pos_bound);
}

std::vector<double> grid_value_iteration(const GridMap& m, double gamma) {
    const int n = m.cells();
    const int goal = m.goal_y * m.width + m.goal_x;
    std::vector<double> v(n, 0.0);
    for (int sweep = 0; sweep < 100000; ++sweep) {
        double max_change = 0.0;
        for (int s = 0; s < n; ++s) {
            if (s == goal) continue;
            const int x = s % m.width, y = s / m.width;
            if (m.is_blocked(x, y)) continue;
            double best = -1e300;
            for (int a = 0; a < 4; ++a) {
                int nx = x, ny = y;
                grid_move(m, nx, ny, a);
                const int ns = ny * m.width + nx;
                double r = m.step_reward + (ns == goal ? m.goal_bonus : 0.0);
                best = std::max(best, r + gamma * v[ns]);
            }
            max_change = std::max(max_change, std::abs(best - v[s]));
            v[s] = best;
        }
        if (max_change < 1e-12) break;
    }
    return v;
}

}  // namespace

GridMap default_grid_map() {
    GridMap m;
    m.blocked.assign(std::size_t(m.cells()), 0);
    auto block = [&](int x, int y) { m.blocked[std::size_t(y) * m.width + x] = 1; };
    for (int y = 0; y <= 5; ++y) block(3, y);
    for (int y = 0; y <= 2; ++y) block(5, y);
    return m;
}

EnvSpec make_pointmass(const PointMassParams& p) {
    EnvSpec s;
    s.name = "pointmass";
    s.obs_dim = 4;
    s.kind = ActionKind::continuous;
    s.act_dim = 2;
    s.act_low = -1.0;
    s.act_high = 1.0;
    s.max_steps = p.max_steps;
    const double reach = 2.0 * p.pos_bound * std::sqrt(2.0);  // box diagonal
    s.reward_min = -reach;
    s.reward_max = 0.0;
    s.pm = p;
    return s;
}

EnvSpec make_pendulum(const PendulumParams& p) {
    EnvSpec s;
    s.name = "pendulum";
    s.obs_dim = 3;
    s.kind = ActionKind::continuous;
    s.act_dim = 1;
    s.act_low = -p.max_torque;
    s.act_high = p.max_torque;
    s.max_steps = p.max_steps;
    s.reward_min = -(kPi * kPi + 0.1 * p.max_speed * p.max_speed +
                     0.001 * p.max_torque * p.max_torque);
    s.reward_max = 0.0;
    s.pend = p;
    return s;
}

EnvSpec make_gridworld(const GridMap& map) {
    require(map.width >= 1 && map.height >= 1, "gridworld: degenerate map");
    require(int(map.blocked.size()) == map.cells(), "gridworld: blocked mask size mismatch");
    require(!map.is_blocked(map.start_x, map.start_y) && !map.is_blocked(map.goal_x, map.goal_y),
            "gridworld: start or goal blocked");
    EnvSpec s;
    s.name = "gridworld";
    s.obs_dim = map.cells();
    s.kind = ActionKind::discrete;
    s.act_dim = 4;
    s.max_steps = map.max_steps;
    s.reward_min = std::min(map.step_reward, map.step_reward + map.goal_bonus);
    s.reward_max = std::max(map.step_reward, map.step_reward + map.goal_bonus);
    s.grid = map;
    return s;
}

EnvSpec make_env(const std::string& name) {
    if (name == "pointmass") return make_pointmass(PointMassParams{});
    if (name == "pendulum") return make_pendulum(PendulumParams{});
    if (name == "gridworld") return make_gridworld(default_grid_map());
    throw ConfigError("unknown environment name: " + name);
}

std::pair<EnvState, Vector> env_reset(const EnvSpec& spec, std::uint64_t seed) {
    EnvState st;
    st.spec = spec;
    Rng rng(seed);
    Vector obs;
    if (spec.name == "pointmass") {
        const auto& p = spec.pm;
        const double px = p.start_x + p.init_noise * rng.uniform(-1.0, 1.0);
        const double py = p.start_y + p.init_noise * rng.uniform(-1.0, 1.0);
        st.internal = {px, py, 0.0, 0.0};
        obs = pointmass_obs(st.internal);
    } else if (spec.name == "pendulum") {
        const auto& p = spec.pend;
        const double theta = kPi + p.init_angle_spread * rng.uniform(-1.0, 1.0);
        const double omega = p.init_speed_spread * rng.uniform(-1.0, 1.0);
        st.internal = {theta, omega};
        obs = pendulum_obs(st.internal);
    } else if (spec.name == "gridworld") {
        st.internal = {double(spec.grid.start_x), double(spec.grid.start_y)};
        obs = gridworld_obs(spec.grid, spec.grid.start_x, spec.grid.start_y);
    } else {
        throw ConfigError("unknown environment name: " + spec.name);
    }
    return {std::move(st), std::move(obs)};
}

StepResult env_step(EnvState& state, const Action& action) {
    require(!state.terminal, "env_step: episode already terminal");
    const EnvSpec& spec = state.spec;
    StepResult r;

    if (spec.kind == ActionKind::continuous)
        require(int(action.c.size()) == spec.act_dim, "env_step: action dimension mismatch");

    if (spec.name == "pointmass") {
        const auto& p = spec.pm;
        const double fx = clamp(action.c[0], spec.act_low, spec.act_high);
        const double fy = clamp(action.c[1], spec.act_low, spec.act_high);
        pointmass_dynamics(p, state.internal[0], state.internal[1], state.internal[2],
                           state.internal[3], fx, fy);
        const double dx = state.internal[0] - p.goal_x;
        const double dy = state.internal[1] - p.goal_y;
        r.reward = -std::sqrt(dx * dx + dy * dy);
        r.obs = pointmass_obs(state.internal);
        state.steps += 1;
        if (state.steps >= spec.max_steps) {
            state.terminal = true;
            state.terminal_kind = TerminalKind::timeout;
        }
    } else if (spec.name == "pendulum") {
        const auto& p = spec.pend;
        const double u = clamp(action.c[0], spec.act_low, spec.act_high);
        const double theta = state.internal[0];
        const double omega = state.internal[1];
        // explicit Euler
        const double alpha = 1.5 * p.gravity / p.length * std::sin(theta) +
                             3.0 / (p.mass * p.length * p.length) * u;
        state.internal[0] = theta + p.dt * omega;
        state.internal[1] = clamp(omega + p.dt * alpha, -p.max_speed, p.max_speed);
        const double a = wrap_angle(state.internal[0]);
        r.reward = -(a * a + 0.1 * state.internal[1] * state.internal[1] + 0.001 * u * u);
        r.obs = pendulum_obs(state.internal);
        state.steps += 1;
        if (state.steps >= spec.max_steps) {
            state.terminal = true;
            state.terminal_kind = TerminalKind::timeout;
        }
    } else if (spec.name == "gridworld") {
        const auto& m = spec.grid;
        require(action.d >= 0 && action.d < 4, "env_step: discrete action out of range");
        int x = int(state.internal[0]), y = int(state.internal[1]);
        grid_move(m, x, y, action.d);
        state.internal[0] = x;
        state.internal[1] = y;
        const bool at_goal = (x == m.goal_x && y == m.goal_y);
        r.reward = m.step_reward + (at_goal ? m.goal_bonus : 0.0);
        r.obs = gridworld_obs(m, x, y);
        state.steps += 1;
        if (at_goal) {
            state.terminal = true;
            state.terminal_kind = TerminalKind::goal;
        } else if (state.steps >= spec.max_steps) {
            state.terminal = true;
            state.terminal_kind = TerminalKind::timeout;
        }
    } else {
        throw ConfigError("unknown environment name: " + spec.name);
    }

    r.terminal = state.terminal;
    r.kind = state.terminal_kind;
    return r;
}

double optimal_return(const EnvSpec& spec, double gamma) {
    if (spec.name == "gridworld") {
        const auto v = grid_value_iteration(spec.grid, gamma);
        return v[std::size_t(spec.grid.start_y) * spec.grid.width + spec.grid.start_x];
    }
    if (spec.name == "pointmass") {
        // Straight-line stop-at-goal law through a duplicate of the exact
        // dynamics, from the canonical (noise-free) start.
        const auto& p = spec.pm;
        double px = p.start_x, py = p.start_y, vx = 0.0, vy = 0.0;
        double ret = 0.0, disc = 1.0;
        for (int t = 0; t < p.max_steps; ++t) {
            const double fx = clamp(kPmOracleKp * (p.goal_x - px) - kPmOracleKd * vx, -1.0, 1.0);
            const double fy = clamp(kPmOracleKp * (p.goal_y - py) - kPmOracleKd * vy, -1.0, 1.0);
            pointmass_dynamics(p, px, py, vx, vy, fx, fy);
            const double dx = px - p.goal_x, dy = py - p.goal_y;
            ret += disc * -std::sqrt(dx * dx + dy * dy);
            disc *= gamma;
        }
        return ret;
    }
    throw NotAvailable("optimal_return: no oracle for environment " + spec.name);
}

std::vector<int> gridworld_optimal_actions(const GridMap& m, double gamma) {
    const auto v = grid_value_iteration(m, gamma);
    const int goal = m.goal_y * m.width + m.goal_x;
    std::vector<int> pi(std::size_t(m.cells()), -1);
    for (int s = 0; s < m.cells(); ++s) {
        const int x = s % m.width, y = s / m.width;
        if (s == goal || m.is_blocked(x, y)) continue;
        double best = -1e300;
        for (int a = 0; a < 4; ++a) {
            int nx = x, ny = y;
            grid_move(m, nx, ny, a);
            const int ns = ny * m.width + nx;
            const double q = m.step_reward + (ns == goal ? m.goal_bonus : 0.0) + gamma * v[ns];
            if (q > best) {
                best = q;
                pi[std::size_t(s)] = a;
            }
        }
    }
    return pi;
}

Action scripted_mediocre_action(const EnvSpec& spec, const Vector& obs, Rng& rng) {
    Action a;
    if (spec.name == "pointmass") {
        const auto& p = spec.pm;
        const double fx = 0.35 * (p.goal_x - obs[0]) - 0.5 * obs[2] + 0.35 * rng.normal();
        const double fy = 0.35 * (p.goal_y - obs[1]) - 0.5 * obs[3] + 0.35 * rng.normal();
        a.c = {clamp(fx, spec.act_low, spec.act_high), clamp(fy, spec.act_low, spec.act_high)};
    } else if (spec.name == "pendulum") {
        const double theta = std::atan2(obs[1], obs[0]);
        const double u = -2.0 * theta - 0.5 * obs[2] + 0.5 * rng.normal();
        a.c = {clamp(u, spec.act_low, spec.act_high)};
    } else if (spec.name == "gridworld") {
        const auto& m = spec.grid;
        int cell = 0;
        for (int i = 0; i < int(obs.size()); ++i)
            if (obs[i] > 0.5) cell = i;
        const int x = cell % m.width, y = cell / m.width;
        if (rng.uniform01() < 0.45) {
            a.d = int(rng.uniform_index(4));
        } else {
            const int dx = m.goal_x - x, dy = m.goal_y - y;
            if (std::abs(dx) >= std::abs(dy) && dx != 0)
                a.d = dx > 0 ? 0 : 1;
            else if (dy != 0)
                a.d = dy > 0 ? 2 : 3;
            else
                a.d = dx > 0 ? 0 : 1;
        }
    } else {
        throw ConfigError("unknown environment name: " + spec.name);
    }
    return a;
}

}  // namespace rcp
