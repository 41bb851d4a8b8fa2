#include "rcp/target_model.hpp"

#include <algorithm>
#include <cmath>

namespace rcp {

TargetModel target_update(const TargetModel& model, const Vector& buffer_values) {
    if (buffer_values.empty()) return model;
    require(all_finite(buffer_values), "target_update: non-finite buffer value");

    const double mx = *std::max_element(buffer_values.begin(), buffer_values.end());
    const double mn = *std::min_element(buffer_values.begin(), buffer_values.end());
    const double range = mx - mn;

    TargetModel out = model;
    if (model.tau_rel > 0.0) out.tau_s = std::max(kTargetTauFloor, model.tau_rel * range);
    if (model.sigma_min_rel > 0.0)
        out.sigma_min = std::max(kTargetSigmaFloor, model.sigma_min_rel * range);

    // mu <- tau * log( (1/N) sum exp(Z_i / tau) ), max-subtracted
    const std::size_t n = buffer_values.size();
    double sum_exp = 0.0;
    for (double z : buffer_values) sum_exp += std::exp((z - mx) / out.tau_s);
    out.mu = mx + out.tau_s * std::log(sum_exp / double(n));

    double mean = 0.0;
    for (double z : buffer_values) mean += z;
    mean /= double(n);
    double var = 0.0;
    for (double z : buffer_values) var += (z - mean) * (z - mean);
    var /= double(n);
    out.sigma = std::max(out.sigma_min, std::sqrt(var));
    return out;
}

double sample_target(const TargetModel& model, Rng& rng) {
    return model.mu + model.sigma * rng.normal();
}

double eval_target(const TargetModel& model) { return model.mu + model.sigma; }

std::pair<double, double> tilt_gaussian(double mean, double std_dev, double beta) {
    require(std_dev > 0.0, "tilt_gaussian: std must be positive");
    require(beta > 0.0, "tilt_gaussian: beta must be positive");
    return {mean + std_dev * std_dev / beta, std_dev};
}

}  // namespace rcp
