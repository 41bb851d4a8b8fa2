#pragma once

#include "rcp/common.hpp"
#include "rcp/rng.hpp"

namespace rcp {

// Scalar Gaussian over target values. The mean tracks a soft-maximum
// (temperature-scaled log-mean-exp) of the values seen in the buffer, so it
// interpolates between the buffer mean (large tau_s) and the buffer max
// (small tau_s). The std floor keeps the evaluation target mu + sigma
// strictly above the mean even when the buffer collapses.
struct TargetModel {
    double mu = 0.0;
    double sigma = 1.0;
    double tau_s = 1.0;      // soft-max temperature, units of Z
    double sigma_min = 0.05; // variance floor, units of Z
    double beta = 1.0;       // tilt coefficient shared with the exponential weights

    // When > 0, tau_s and sigma_min are recomputed at every update as a
    // fraction of the current buffer value range (scale-free across envs).
    // Zero freezes the manual values above.
    double tau_rel = 0.1;
    double sigma_min_rel = 0.05;
};

// Floors used by the relative mode when the buffer range degenerates.
inline constexpr double kTargetTauFloor = 1e-6;
inline constexpr double kTargetSigmaFloor = 1e-6;

/// Soft-maximum update of (mu, sigma) from the buffer's raw values.
/// An empty sequence is a no-op and returns the model unchanged.
TargetModel target_update(const TargetModel& model, const Vector& buffer_values);

/// One draw from Normal(mu, sigma^2) on the given stream.
double sample_target(const TargetModel& model, Rng& rng);

/// Deterministic evaluation target: mu + sigma.
double eval_target(const TargetModel& model);

/// Exponentially tilted Gaussian p(z) * exp(z / beta), renormalized:
/// the mean shifts by std^2 / beta, the std is unchanged.
std::pair<double, double> tilt_gaussian(double mean, double std_dev, double beta);

}  // namespace rcp
