#include "rcp/estimators.hpp"

namespace rcp {

Vector reward_to_go(const Vector& rewards, double gamma) {
    require(!rewards.empty(), "reward_to_go: empty reward sequence");
    require(gamma >= 0.0 && gamma <= 1.0, "reward_to_go: gamma outside [0,1]");
    require(all_finite(rewards), "reward_to_go: non-finite reward");
    const int n = int(rewards.size());
    Vector out(n);
    out[n - 1] = rewards[n - 1];
    for (int t = n - 2; t >= 0; --t) out[t] = rewards[t] + gamma * out[t + 1];
    return out;
}

Vector advantages(const Vector& rewards, const Vector& baselines, double gamma) {
    require(rewards.size() == baselines.size(), "advantages: length mismatch");
    Vector out = reward_to_go(rewards, gamma);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] -= baselines[t];
    return out;
}

Vector td_lambda_targets(const Vector& rewards, const Vector& values, double bootstrap,
                         double gamma, double lambda) {
    require(gamma >= 0.0 && gamma <= 1.0, "td_lambda_targets: gamma outside [0,1]");
    require(lambda >= 0.0 && lambda <= 1.0, "td_lambda_targets: lambda outside [0,1]");
    require(rewards.size() == values.size(), "td_lambda_targets: length mismatch");
    require(!rewards.empty(), "td_lambda_targets: empty sequence");
    const int n = int(rewards.size());
    Vector out(n);
    out[n - 1] = rewards[n - 1] + gamma * bootstrap;
    for (int t = n - 2; t >= 0; --t) {
        const double next_v = values[t + 1];
        out[t] = rewards[t] + gamma * ((1.0 - lambda) * next_v + lambda * out[t + 1]);
    }
    return out;
}

}  // namespace rcp
