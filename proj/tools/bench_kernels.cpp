// Timing comparison of the serial reference kernels against the OpenMP
// production kernels, across a few batch/width combinations.

#include <chrono>
#include <functional>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rcp/batch.hpp"
#include "rcp/policy.hpp"

using namespace rcp;

namespace {

double time_ms(const std::function<void()>& f, int reps) {
    f();  // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<Transition> random_batch(int n, int obs_dim, int act_dim, Rng& rng) {
    std::vector<Transition> batch(static_cast<std::size_t>(n));
    for (auto& t : batch) {
        t.obs.resize(std::size_t(obs_dim));
        for (double& v : t.obs) v = rng.normal();
        t.action.resize(std::size_t(act_dim));
        for (double& v : t.action) v = rng.normal();
        t.z_norm = rng.normal();
        t.weight = 1.0;
    }
    return batch;
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    const int reps = quick ? 3 : 20;
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp\n");
#endif
    std::printf("%-28s %8s %10s %10s %8s\n", "kernel", "batch", "serial ms", "parallel", "speedup");

    Rng rng(42);
    for (int width : {64, 128}) {
        for (int batch_size : {256, 1024}) {
            const int obs_dim = 16;

            DenseParams value = make_dense({obs_dim, width, width, width, 1}, rng);
            Matrix obs(batch_size, obs_dim);
            Vector targets(static_cast<std::size_t>(batch_size));
            for (double& v : obs.a) v = rng.normal();
            for (double& v : targets) v = rng.normal();

            double s = time_ms([&] { value_loss_batch_serial(value, obs, targets); }, reps);
            double p = time_ms([&] { value_loss_batch(value, obs, targets); }, reps);
            std::printf("value_loss w=%-13d %8d %10.3f %10.3f %7.2fx\n", width, batch_size, s, p,
                        s / p);

            PolicyNet net = make_policy(CondMode::multiply, ActionKind::continuous, obs_dim, 4,
                                        width, width / 2, -1.0, 1.0, rng);
            auto batch = random_batch(batch_size, obs_dim, 4, rng);
            s = time_ms([&] { policy_loss_serial(net, batch); }, reps);
            p = time_ms([&] { policy_loss(net, batch); }, reps);
            std::printf("policy_loss w=%-12d %8d %10.3f %10.3f %7.2fx\n", width, batch_size, s, p,
                        s / p);

            s = time_ms([&] { dense_forward_batch_serial(value, obs); }, reps);
            p = time_ms([&] { dense_forward_batch(value, obs); }, reps);
            std::printf("forward w=%-16d %8d %10.3f %10.3f %7.2fx\n", width, batch_size, s, p,
                        s / p);
        }
    }
    return 0;
}
