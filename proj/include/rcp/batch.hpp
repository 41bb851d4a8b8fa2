#pragma once

#include "rcp/numerics.hpp"

namespace rcp {

// Batched kernels for the training hot loops. The parallel versions are the
// production path; the *_serial versions are plain single-loop references
// kept for testing and benchmarking.
//
// Determinism: the parallel kernels split the batch into kGradChunks slices
// by sample index, accumulate each slice serially, and reduce the slices in
// index order. The result is bit-identical for any OpenMP thread count
// (including builds without OpenMP).

inline constexpr int kGradChunks = 16;

/// Forward every row of `inputs` through `p`. Row i of the result is the
/// network output for row i of the input.
Matrix dense_forward_batch(const DenseParams& p, const Matrix& inputs);
Matrix dense_forward_batch_serial(const DenseParams& p, const Matrix& inputs);

struct ValueLoss {
    double loss = 0.0;
    GradientBundle grads;
};

/// Mean squared error of the scalar network output against `targets`,
/// with gradients for all parameters.
ValueLoss value_loss_batch(const DenseParams& p, const Matrix& obs, const Vector& targets);
ValueLoss value_loss_batch_serial(const DenseParams& p, const Matrix& obs, const Vector& targets);

}  // namespace rcp
