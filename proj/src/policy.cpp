#include "rcp/policy.hpp"

#include <algorithm>
#include <cmath>

namespace rcp {

PolicyNet make_policy(CondMode mode, ActionKind kind, int obs_dim, int act_dim, int width,
                      int embed_width, double act_low, double act_high, Rng& rng) {
    require(obs_dim >= 1 && act_dim >= 1 && width >= 1, "make_policy: bad dimensions");
    PolicyNet net;
    net.mode = mode;
    net.kind = kind;
    net.obs_dim = obs_dim;
    net.act_dim = act_dim;
    net.width = width;
    net.embed_width = embed_width;
    net.act_low = act_low;
    net.act_high = act_high;

    const int in = obs_dim + (mode == CondMode::concat ? 1 : 0);
    net.trunk = make_dense({in, width, width, width, act_dim}, rng);
    if (kind == ActionKind::continuous) net.log_std.assign(std::size_t(act_dim), -0.5);
    if (mode == CondMode::multiply) {
        require(embed_width >= 1, "make_policy: embed width required in multiply mode");
        net.z_embed = make_dense({1, embed_width, kTrunkHiddenLayers * width}, rng);
        // zero the gate head: neutral gates at initialization
        std::fill(net.z_embed.w[1].a.begin(), net.z_embed.w[1].a.end(), 0.0);
        std::fill(net.z_embed.b[1].begin(), net.z_embed.b[1].end(), 0.0);
    }
    return net;
}

ValueNet make_value(int obs_dim, int width, Rng& rng) {
    return make_dense({obs_dim, width, width, width, 1}, rng);
}

Vector policy_forward(const PolicyNet& net, const Vector& obs, double z, PolicyCache* cache) {
    require(int(obs.size()) == net.obs_dim, "policy_forward: observation dimension mismatch");
    require(std::isfinite(z), "policy_forward: non-finite target value");

    Vector input = obs;
    if (net.mode == CondMode::concat) input.push_back(z);
    require(int(input.size()) == net.trunk.fan_in(), "policy_forward: trunk fan-in mismatch");

    Vector embed_raw;
    if (net.mode == CondMode::multiply) {
        embed_raw = dense_forward(net.z_embed, Vector{z}, cache ? &cache->embed : nullptr);
        if (cache) cache->embed_raw = embed_raw;
    }

    if (cache) {
        cache->act.assign(1, input);
        cache->pre.clear();
        cache->hidden.clear();
        cache->gates.clear();
    }

    const int layers = net.trunk.layers();
    Vector x = std::move(input);
    for (int l = 0; l < layers; ++l) {
        const Matrix& w = net.trunk.w[l];
        Vector zv(w.rows);
        for (int r = 0; r < w.rows; ++r) {
            const double* wr = w.row(r);
            double s = net.trunk.b[l][r];
            for (int c = 0; c < w.cols; ++c) s += wr[c] * x[c];
            zv[r] = s;
        }
        if (cache) cache->pre.push_back(zv);
        if (l + 1 == layers) {  // linear head
            if (cache) {
                cache->act.push_back(zv);
                cache->head = zv;
            }
            return zv;
        }
        for (double& v : zv) v = v > 0.0 ? v : 0.0;
        if (cache) cache->hidden.push_back(zv);
        if (net.mode == CondMode::multiply) {
            Vector gate(std::size_t(net.width));
            for (int j = 0; j < net.width; ++j)
                gate[std::size_t(j)] = 1.0 + std::tanh(embed_raw[std::size_t(l * net.width + j)]);
            for (int j = 0; j < net.width; ++j) zv[std::size_t(j)] *= gate[std::size_t(j)];
            if (cache) cache->gates.push_back(std::move(gate));
        }
        if (cache) cache->act.push_back(zv);
        x = std::move(zv);
    }
    return x;  // unreachable
}

PolicyGrads zero_policy_grads(const PolicyNet& net) {
    PolicyGrads g;
    g.trunk = zero_gradients(net.trunk);
    if (net.mode == CondMode::multiply) g.embed = zero_gradients(net.z_embed);
    if (net.kind == ActionKind::continuous) g.dlog_std.assign(net.log_std.size(), 0.0);
    return g;
}

void policy_backward(const PolicyNet& net, const PolicyCache& cache, const Vector& dhead,
                     PolicyGrads& out) {
    const int layers = net.trunk.layers();
    require(int(dhead.size()) == net.trunk.fan_out(), "policy_backward: bad head gradient");

    Vector embed_raw_grad;
    if (net.mode == CondMode::multiply)
        embed_raw_grad.assign(std::size_t(kTrunkHiddenLayers * net.width), 0.0);

    Vector delta = dhead;  // gradient wrt output of layer l (post-gate)
    for (int l = layers - 1; l >= 0; --l) {
        const Matrix& w = net.trunk.w[l];
        if (l < layers - 1) {
            if (net.mode == CondMode::multiply) {
                const Vector& gate = cache.gates[std::size_t(l)];
                const Vector& hidden = cache.hidden[std::size_t(l)];
                for (int j = 0; j < net.width; ++j) {
                    const double g = gate[std::size_t(j)];
                    const double dh = delta[std::size_t(j)];
                    // d(1+tanh)/draw = 1 - tanh^2 = g*(2-g)
                    embed_raw_grad[std::size_t(l * net.width + j)] +=
                        dh * hidden[std::size_t(j)] * g * (2.0 - g);
                    delta[std::size_t(j)] = dh * g;
                }
            }
            for (int r = 0; r < w.rows; ++r)  // rectifier mask
                if (cache.pre[std::size_t(l)][std::size_t(r)] <= 0.0) delta[std::size_t(r)] = 0.0;
        }
        const Vector& in = cache.act[std::size_t(l)];
        Matrix& dw = out.trunk.dw[std::size_t(l)];
        for (int r = 0; r < w.rows; ++r) {
            const double d = delta[std::size_t(r)];
            out.trunk.db[std::size_t(l)][std::size_t(r)] += d;
            double* dwr = dw.row(r);
            for (int c = 0; c < w.cols; ++c) dwr[c] += d * in[std::size_t(c)];
        }
        if (l == 0) break;
        Vector prev(w.cols, 0.0);
        for (int r = 0; r < w.rows; ++r) {
            const double d = delta[std::size_t(r)];
            const double* wr = w.row(r);
            for (int c = 0; c < w.cols; ++c) prev[std::size_t(c)] += d * wr[c];
        }
        delta = std::move(prev);
    }

    if (net.mode == CondMode::multiply)
        dense_backward(net.z_embed, cache.embed, embed_raw_grad, out.embed);
}

Action act(const PolicyNet& net, const Vector& obs, double z, ActMode mode, Rng& rng) {
    Vector head = policy_forward(net, obs, z);
    Action a;
    if (net.kind == ActionKind::continuous) {
        a.c.resize(head.size());
        for (std::size_t d = 0; d < head.size(); ++d) {
            double v = head[d];
            if (mode == ActMode::stochastic) {
                const double sigma = std::exp(clamp(net.log_std[d], kLogStdMin, kLogStdMax));
                v += sigma * rng.normal();
            }
            a.c[d] = clamp(v, net.act_low, net.act_high);
        }
    } else {
        if (mode == ActMode::deterministic) {
            a.d = int(std::max_element(head.begin(), head.end()) - head.begin());
        } else {
            const Vector p = softmax(head);
            const double u = rng.uniform01();
            double acc = 0.0;
            a.d = int(p.size()) - 1;
            for (std::size_t i = 0; i < p.size(); ++i) {
                acc += p[i];
                if (u < acc) {
                    a.d = int(i);
                    break;
                }
            }
        }
    }
    return a;
}

double exp_weight(double z_raw, double beta, double w_max) {
    require(beta > 0.0 && w_max > 0.0, "exp_weight: beta and clip must be positive");
    return std::min(std::exp(z_raw / beta), w_max);
}

namespace {

// One sample's weighted NLL contribution; normalized weight `wn`.
double policy_sample(const PolicyNet& net, const Transition& tr, double wn, PolicyGrads& out) {
    PolicyCache cache;
    Vector head = policy_forward(net, tr.obs, tr.z_norm, &cache);
    double nll;
    Vector dhead;
    if (net.kind == ActionKind::continuous) {
        Vector ls(net.log_std.size());
        for (std::size_t d = 0; d < ls.size(); ++d)
            ls[d] = clamp(net.log_std[d], kLogStdMin, kLogStdMax);
        GaussianNll g = gaussian_nll(head, ls, tr.action);
        nll = g.loss;
        dhead = std::move(g.dmean);
        for (std::size_t d = 0; d < ls.size(); ++d) {
            // clamp mask: no gradient when the raw parameter sits outside the range
            const bool inside = net.log_std[d] > kLogStdMin && net.log_std[d] < kLogStdMax;
            if (inside) out.dlog_std[d] += wn * g.dlog_std[d];
        }
    } else {
        CategoricalNll c = categorical_nll(head, tr.action_index);
        nll = c.loss;
        dhead = std::move(c.dlogits);
    }
    for (double& d : dhead) d *= wn;
    policy_backward(net, cache, dhead, out);
    return wn * nll;
}

double weight_sum(std::span<const Transition> batch) {
    require(!batch.empty(), "policy_loss: empty batch");
    double sum = 0.0;
    for (const Transition& t : batch) {
        require(t.weight >= 0.0 && std::isfinite(t.weight), "policy_loss: bad weight");
        sum += t.weight;
    }
    require(sum > 0.0, "policy_loss: all-zero weights");
    return sum;
}

}  // namespace

PolicyGrads policy_loss_serial(const PolicyNet& net, std::span<const Transition> batch) {
    const double wsum = weight_sum(batch);
    PolicyGrads out = zero_policy_grads(net);
    for (const Transition& t : batch) out.loss += policy_sample(net, t, t.weight / wsum, out);
    out.trunk.loss = out.loss;
    return out;
}

PolicyGrads policy_loss(const PolicyNet& net, std::span<const Transition> batch) {
    const double wsum = weight_sum(batch);
    const int n = int(batch.size());
    const int chunks = std::min(kGradChunks, n);

    std::vector<PolicyGrads> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
    for (int c = 0; c < chunks; ++c) {
        PolicyGrads g = zero_policy_grads(net);
        const int lo = int(std::size_t(c) * n / chunks);
        const int hi = int(std::size_t(c + 1) * n / chunks);
        for (int i = lo; i < hi; ++i)
            g.loss += policy_sample(net, batch[std::size_t(i)], batch[std::size_t(i)].weight / wsum, g);
        partial[std::size_t(c)] = std::move(g);
    }

    PolicyGrads out = std::move(partial[0]);
    for (int c = 1; c < chunks; ++c) {  // fixed reduction order
        out.trunk.add(partial[std::size_t(c)].trunk);
        if (net.mode == CondMode::multiply) out.embed.add(partial[std::size_t(c)].embed);
        for (std::size_t d = 0; d < out.dlog_std.size(); ++d)
            out.dlog_std[d] += partial[std::size_t(c)].dlog_std[d];
        out.loss += partial[std::size_t(c)].loss;
    }
    out.trunk.loss = out.loss;
    return out;
}

ValueLoss value_loss(const ValueNet& net, const Matrix& obs, const Vector& targets) {
    return value_loss_batch(net, obs, targets);
}

}  // namespace rcp
