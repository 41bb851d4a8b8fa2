#include "rcp/batch.hpp"

namespace rcp {

namespace {

// One sample of the squared-error objective: (V(x) - y)^2 contribution to the
// batch mean. Accumulates scaled gradients into `out`.
double value_sample(const DenseParams& p, const double* obs, int obs_dim, double target,
                    double inv_n, GradientBundle& out) {
    Vector x(obs, obs + obs_dim);
    ForwardCache cache;
    Vector pred = dense_forward(p, x, &cache);
    const double resid = pred[0] - target;
    Vector dout{2.0 * resid * inv_n};
    dense_backward(p, cache, dout, out);
    return resid * resid * inv_n;
}

}  // namespace

Matrix dense_forward_batch_serial(const DenseParams& p, const Matrix& inputs) {
    require(inputs.cols == p.fan_in(), "dense_forward_batch: input width != fan-in");
    Matrix out(inputs.rows, p.fan_out());
    for (int i = 0; i < inputs.rows; ++i) {
        Vector x(inputs.row(i), inputs.row(i) + inputs.cols);
        Vector y = dense_forward(p, x);
        std::copy(y.begin(), y.end(), out.row(i));
    }
    return out;
}

Matrix dense_forward_batch(const DenseParams& p, const Matrix& inputs) {
    require(inputs.cols == p.fan_in(), "dense_forward_batch: input width != fan-in");
    Matrix out(inputs.rows, p.fan_out());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < inputs.rows; ++i) {
        Vector x(inputs.row(i), inputs.row(i) + inputs.cols);
        Vector y = dense_forward(p, x);
        std::copy(y.begin(), y.end(), out.row(i));
    }
    return out;
}

ValueLoss value_loss_batch_serial(const DenseParams& p, const Matrix& obs, const Vector& targets) {
    require(obs.rows == int(targets.size()), "value_loss: batch length mismatch");
    require(obs.rows > 0, "value_loss: empty batch");
    require(p.fan_out() == 1, "value_loss: network output must be scalar");
    ValueLoss r;
    r.grads = zero_gradients(p);
    const double inv_n = 1.0 / double(obs.rows);
    for (int i = 0; i < obs.rows; ++i)
        r.loss += value_sample(p, obs.row(i), obs.cols, targets[i], inv_n, r.grads);
    r.grads.loss = r.loss;
    return r;
}

ValueLoss value_loss_batch(const DenseParams& p, const Matrix& obs, const Vector& targets) {
    require(obs.rows == int(targets.size()), "value_loss: batch length mismatch");
    require(obs.rows > 0, "value_loss: empty batch");
    require(p.fan_out() == 1, "value_loss: network output must be scalar");

    const int n = obs.rows;
    const int chunks = std::min(kGradChunks, n);
    std::vector<GradientBundle> partial(chunks);
    std::vector<double> losses(chunks, 0.0);
    const double inv_n = 1.0 / double(n);

#pragma omp parallel for schedule(static)
    for (int c = 0; c < chunks; ++c) {
        GradientBundle g = zero_gradients(p);
        double loss = 0.0;
        const int lo = int(std::size_t(c) * n / chunks);
        const int hi = int(std::size_t(c + 1) * n / chunks);
        for (int i = lo; i < hi; ++i)
            loss += value_sample(p, obs.row(i), obs.cols, targets[i], inv_n, g);
        partial[c] = std::move(g);
        losses[c] = loss;
    }

    ValueLoss r;
    r.grads = std::move(partial[0]);
    r.loss = losses[0];
    for (int c = 1; c < chunks; ++c) {  // fixed reduction order
        r.grads.add(partial[c]);
        r.loss += losses[c];
    }
    r.grads.loss = r.loss;
    return r;
}

}  // namespace rcp
