#pragma once

#include <span>
#include <vector>

#include "rcp/common.hpp"
#include "rcp/rng.hpp"

namespace rcp {

/// Dense row-major matrix. Rows index the output (fan-out), columns the input.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(std::size_t(r) * std::size_t(c), 0.0) {}

    double& operator()(int r, int c) { return a[std::size_t(r) * cols + c]; }
    double operator()(int r, int c) const { return a[std::size_t(r) * cols + c]; }

    const double* row(int r) const { return a.data() + std::size_t(r) * cols; }
    double* row(int r) { return a.data() + std::size_t(r) * cols; }
};

// Parameters of a fully-connected stack: y = W_L(...relu(W_1 x + b_1)...) + b_L.
// Rectifier on hidden layers, identity on the last layer.
struct DenseParams {
    std::vector<Matrix> w;
    std::vector<Vector> b;

    int layers() const { return int(w.size()); }
    int fan_in() const { return w.front().cols; }
    int fan_out() const { return w.back().rows; }
    std::size_t param_count() const;

    /// Throws ContractViolation if layer dimensions do not chain.
    void check_shapes() const;
};

/// Fan-in-scaled uniform weights, zero biases. `dims` = {in, h1, ..., out}.
DenseParams make_dense(const std::vector<int>& dims, Rng& rng);
/// All-zero parameters with the given layer dimensions.
DenseParams make_dense_zero(const std::vector<int>& dims);

/// Per-layer activations kept from a forward pass; consumed by dense_backward.
struct ForwardCache {
    std::vector<Vector> act;  // act[0] = input, act[l] = post-activation of layer l
    std::vector<Vector> pre;  // pre[l] = pre-activation of layer l
};

Vector dense_forward(const DenseParams& p, const Vector& input, ForwardCache* cache = nullptr);

struct GradientBundle {
    std::vector<Matrix> dw;
    std::vector<Vector> db;
    double loss = 0.0;

    void add(const GradientBundle& other);
    void scale(double s);
};

GradientBundle zero_gradients(const DenseParams& p);

/// Backpropagate `output_grad` through the pass recorded in `cache`,
/// accumulating parameter gradients into `out`. Returns the gradient with
/// respect to the input vector (needed to chain sub-networks).
Vector dense_backward(const DenseParams& p, const ForwardCache& cache, const Vector& output_grad,
                      GradientBundle& out);

struct GaussianNll {
    double loss = 0.0;
    Vector dmean;
    Vector dlog_std;
};

// Negative log density of a diagonal Gaussian:
//   sum_d [ 0.5*((a_d - m_d)/sigma_d)^2 + log sigma_d + 0.5*log(2*pi) ]
GaussianNll gaussian_nll(const Vector& mean, const Vector& log_std, const Vector& action);

// log_std entries are clamped to this range everywhere they are used.
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct CategoricalNll {
    double loss = 0.0;
    Vector dlogits;
};

/// loss = logsumexp(logits) - logits[index]; gradient = softmax - onehot.
CategoricalNll categorical_nll(const Vector& logits, int action_index);

Vector softmax(const Vector& logits);
double logsumexp(const Vector& v);

// Adaptive-moment estimation over a flat view of the parameters.
struct OptimizerState {
    Vector m, v;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9, beta2 = 0.999;
    double eps = 1e-8;
};

OptimizerState make_optimizer(std::size_t param_count, double lr);
OptimizerState make_optimizer(const DenseParams& p, double lr);

/// One update on a flat parameter array. Pure function of its inputs.
void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state);

/// One update on a dense stack; grads must be shape-congruent and finite.
void optimizer_step(DenseParams& p, const GradientBundle& g, OptimizerState& state);

}  // namespace rcp
