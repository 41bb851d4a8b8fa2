#include "rcp/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace rcp {

std::size_t DenseParams::param_count() const {
    std::size_t n = 0;
    for (int l = 0; l < layers(); ++l) n += w[l].a.size() + b[l].size();
    return n;
}

void DenseParams::check_shapes() const {
    require(!w.empty() && w.size() == b.size(), "dense: empty or mismatched layer lists");
    for (int l = 0; l < layers(); ++l) {
        require(int(b[l].size()) == w[l].rows, "dense: bias length != fan-out");
        if (l > 0) require(w[l].cols == w[l - 1].rows, "dense: layer dimensions do not chain");
    }
}

DenseParams make_dense(const std::vector<int>& dims, Rng& rng) {
    require(dims.size() >= 2, "dense: need at least input and output dims");
    DenseParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Matrix w(dims[l + 1], dims[l]);
        const double bound = 1.0 / std::sqrt(double(dims[l]));
        for (double& x : w.a) x = rng.uniform(-bound, bound);
        p.w.push_back(std::move(w));
        p.b.emplace_back(dims[l + 1], 0.0);
    }
    return p;
}

DenseParams make_dense_zero(const std::vector<int>& dims) {
    require(dims.size() >= 2, "dense: need at least input and output dims");
    DenseParams p;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        p.w.emplace_back(dims[l + 1], dims[l]);
        p.b.emplace_back(dims[l + 1], 0.0);
    }
    return p;
}

Vector dense_forward(const DenseParams& p, const Vector& input, ForwardCache* cache) {
    p.check_shapes();
    require(int(input.size()) == p.fan_in(), "dense_forward: input length != fan-in");
    if (cache) {
        cache->act.assign(1, input);
        cache->pre.clear();
    }
    Vector x = input;
    for (int l = 0; l < p.layers(); ++l) {
        const Matrix& w = p.w[l];
        Vector z(w.rows);
        for (int r = 0; r < w.rows; ++r) {
            const double* wr = w.row(r);
            double s = p.b[l][r];
            for (int c = 0; c < w.cols; ++c) s += wr[c] * x[c];
            z[r] = s;
        }
        if (cache) cache->pre.push_back(z);
        if (l + 1 < p.layers())
            for (double& v : z) v = v > 0.0 ? v : 0.0;
        if (cache) cache->act.push_back(z);
        x = std::move(z);
    }
    return x;
}

void GradientBundle::add(const GradientBundle& other) {
    for (std::size_t l = 0; l < dw.size(); ++l) {
        for (std::size_t i = 0; i < dw[l].a.size(); ++i) dw[l].a[i] += other.dw[l].a[i];
        for (std::size_t i = 0; i < db[l].size(); ++i) db[l][i] += other.db[l][i];
    }
    loss += other.loss;
}

void GradientBundle::scale(double s) {
    for (auto& m : dw)
        for (double& x : m.a) x *= s;
    for (auto& v : db)
        for (double& x : v) x *= s;
    loss *= s;
}

GradientBundle zero_gradients(const DenseParams& p) {
    GradientBundle g;
    for (int l = 0; l < p.layers(); ++l) {
        g.dw.emplace_back(p.w[l].rows, p.w[l].cols);
        g.db.emplace_back(p.b[l].size(), 0.0);
    }
    return g;
}

Vector dense_backward(const DenseParams& p, const ForwardCache& cache, const Vector& output_grad,
                      GradientBundle& out) {
    const int L = p.layers();
    require(int(cache.act.size()) == L + 1 && int(cache.pre.size()) == L,
            "dense_backward: cache does not match a forward pass");
    require(int(output_grad.size()) == p.fan_out(), "dense_backward: bad output_grad length");
    require(int(out.dw.size()) == L, "dense_backward: gradient bundle shape mismatch");

    Vector delta = output_grad;
    for (int l = L - 1; l >= 0; --l) {
        const Matrix& w = p.w[l];
        if (l < L - 1)  // rectifier mask of this layer's pre-activation
            for (int r = 0; r < w.rows; ++r)
                if (cache.pre[l][r] <= 0.0) delta[r] = 0.0;
        const Vector& in = cache.act[l];
        Matrix& dw = out.dw[l];
        for (int r = 0; r < w.rows; ++r) {
            const double d = delta[r];
            out.db[l][r] += d;
            double* dwr = dw.row(r);
            for (int c = 0; c < w.cols; ++c) dwr[c] += d * in[c];
        }
        Vector prev(w.cols, 0.0);
        for (int r = 0; r < w.rows; ++r) {
            const double d = delta[r];
            const double* wr = w.row(r);
            for (int c = 0; c < w.cols; ++c) prev[c] += d * wr[c];
        }
        delta = std::move(prev);  // at l == 0 this is the input gradient
    }
    return delta;
}

GaussianNll gaussian_nll(const Vector& mean, const Vector& log_std, const Vector& action) {
    require(mean.size() == log_std.size() && mean.size() == action.size(),
            "gaussian_nll: length mismatch");
    require(all_finite(mean) && all_finite(log_std) && all_finite(action),
            "gaussian_nll: non-finite input");
    for (double ls : log_std)
        require(ls >= kLogStdMin && ls <= kLogStdMax, "gaussian_nll: log_std outside clamp range");

    constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)
    GaussianNll r;
    r.dmean.assign(mean.size(), 0.0);
    r.dlog_std.assign(mean.size(), 0.0);
    for (std::size_t d = 0; d < mean.size(); ++d) {
        const double inv_sigma = std::exp(-log_std[d]);
        const double u = (action[d] - mean[d]) * inv_sigma;
        r.loss += 0.5 * u * u + log_std[d] + kHalfLog2Pi;
        r.dmean[d] = -u * inv_sigma;
        r.dlog_std[d] = 1.0 - u * u;
    }
    return r;
}

double logsumexp(const Vector& v) {
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

Vector softmax(const Vector& logits) {
    double mx = logits[0];
    for (double x : logits) mx = std::max(mx, x);
    Vector p(logits.size());
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        s += p[i];
    }
    for (double& x : p) x /= s;
    return p;
}

CategoricalNll categorical_nll(const Vector& logits, int action_index) {
    require(action_index >= 0 && action_index < int(logits.size()),
            "categorical_nll: action index out of range");
    require(all_finite(logits), "categorical_nll: non-finite logits");
    CategoricalNll r;
    r.dlogits = softmax(logits);
    r.loss = logsumexp(logits) - logits[action_index];
    r.dlogits[action_index] -= 1.0;
    return r;
}

OptimizerState make_optimizer(std::size_t param_count, double lr) {
    OptimizerState s;
    s.m.assign(param_count, 0.0);
    s.v.assign(param_count, 0.0);
    s.lr = lr;
    return s;
}

OptimizerState make_optimizer(const DenseParams& p, double lr) {
    return make_optimizer(p.param_count(), lr);
}

void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state) {
    require(params.size() == grads.size() && params.size() == state.m.size(),
            "adam_step: size mismatch");
    for (double g : grads) require(std::isfinite(g), "adam_step: non-finite gradient");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

void optimizer_step(DenseParams& p, const GradientBundle& g, OptimizerState& state) {
    require(g.dw.size() == p.w.size(), "optimizer_step: bundle shape mismatch");
    // Flat order: per layer, weights then bias.
    std::size_t total = p.param_count();
    require(state.m.size() == total, "optimizer_step: optimizer sized for different params");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
    std::size_t i = 0;
    auto update = [&](double& prm, double grd) {
        require(std::isfinite(grd), "optimizer_step: non-finite gradient");
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grd;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grd * grd;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        prm -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        ++i;
    };
    for (int l = 0; l < p.layers(); ++l) {
        require(g.dw[l].rows == p.w[l].rows && g.dw[l].cols == p.w[l].cols,
                "optimizer_step: gradient shape mismatch");
        for (std::size_t k = 0; k < p.w[l].a.size(); ++k) update(p.w[l].a[k], g.dw[l].a[k]);
        for (std::size_t k = 0; k < p.b[l].size(); ++k) update(p.b[l][k], g.db[l][k]);
    }
}

}  // namespace rcp
