#pragma once

#include <span>

#include "rcp/batch.hpp"
#include "rcp/numerics.hpp"
#include "rcp/replay.hpp"

namespace rcp {

// How the target value reaches the network.
//   concat   - z appended to the observation.
//   multiply - per-layer gates from a z-embedding scale each hidden activation.
//   none     - unconditioned (behavior cloning / advantage-weighted baseline).
enum class CondMode { none, concat, multiply };

inline constexpr int kTrunkHiddenLayers = 3;

struct PolicyNet {
    CondMode mode = CondMode::multiply;
    ActionKind kind = ActionKind::continuous;
    int obs_dim = 0;
    int act_dim = 0;  // action dimension (continuous) or action count (discrete)
    int width = 0;
    int embed_width = 0;
    double act_low = -1.0, act_high = 1.0;

    DenseParams trunk;   // 3 hidden layers + linear head
    Vector log_std;      // state-independent, continuous heads only
    DenseParams z_embed; // 1 -> embed_width -> 3*width raw gates (multiply only)
};

// The gate head (second embedding layer) starts at zero so all gates are
// exactly 1 and the net begins as an unconditioned policy; the first
// embedding layer is random so the head can move away from neutral.
PolicyNet make_policy(CondMode mode, ActionKind kind, int obs_dim, int act_dim, int width,
                      int embed_width, double act_low, double act_high, Rng& rng);

using ValueNet = DenseParams;

ValueNet make_value(int obs_dim, int width, Rng& rng);

struct PolicyCache {
    std::vector<Vector> act;  // act[0] = trunk input, act[l+1] = (gated) output of layer l
    std::vector<Vector> pre;  // trunk pre-activations
    std::vector<Vector> hidden;  // post-relu, pre-gate hidden activations
    std::vector<Vector> gates;   // 1 + tanh(raw), multiply mode only
    ForwardCache embed;
    Vector embed_raw;
    Vector head;
};

/// Distribution parameters (Gaussian mean or logits) for one (obs, z) pair.
/// z is the normalized target value; ignored in `none` mode.
Vector policy_forward(const PolicyNet& net, const Vector& obs, double z,
                      PolicyCache* cache = nullptr);

struct PolicyGrads {
    GradientBundle trunk;
    GradientBundle embed;
    Vector dlog_std;
    double loss = 0.0;
};

PolicyGrads zero_policy_grads(const PolicyNet& net);

/// Backpropagate a gradient on the head outputs through trunk, gates and
/// z-embedding, accumulating into `out`.
void policy_backward(const PolicyNet& net, const PolicyCache& cache, const Vector& dhead,
                     PolicyGrads& out);

enum class ActMode { stochastic, deterministic };

/// Sample or pick the modal action. Deterministic mode ignores the rng.
/// Continuous actions are clipped to the net's action bounds.
Action act(const PolicyNet& net, const Vector& obs, double z, ActMode mode, Rng& rng);

// Weighted maximum-likelihood regression loss over a batch:
//   loss = sum_i w_i * NLL_i / sum_i w_i
// using each transition's stored weight and normalized z. The parallel
// version is the production path (chunk-deterministic, see batch.hpp);
// the serial version is the reference kept for testing.
PolicyGrads policy_loss(const PolicyNet& net, std::span<const Transition> batch);
PolicyGrads policy_loss_serial(const PolicyNet& net, std::span<const Transition> batch);

/// Mean squared error of the value network on an observation batch.
ValueLoss value_loss(const ValueNet& net, const Matrix& obs, const Vector& targets);

/// Exponential-advantage weight: min(exp(z_raw / beta), w_max).
double exp_weight(double z_raw, double beta, double w_max);

}  // namespace rcp
