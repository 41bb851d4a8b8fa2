#pragma once

#include "rcp/common.hpp"

namespace rcp {

/// Discounted reward-to-go: out[t] = rewards[t] + gamma * out[t+1].
Vector reward_to_go(const Vector& rewards, double gamma);

/// Monte-Carlo advantages: reward_to_go(rewards, gamma)[t] - baselines[t].
Vector advantages(const Vector& rewards, const Vector& baselines, double gamma);

// Lambda-return value targets, backward recursion:
//   out[t] = r[t] + gamma * ((1-lambda) * V(s_{t+1}) + lambda * out[t+1])
// values[t] is the current estimate V(s_t); `bootstrap` stands in for
// V(s_{T+1}) - zero when the episode ended at a goal, the fitted value of
// the post-cutoff state when it was cut off by the time limit.
Vector td_lambda_targets(const Vector& rewards, const Vector& values, double bootstrap,
                         double gamma, double lambda);

}  // namespace rcp
