#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rcp/estimators.hpp"
#include "rcp/rng.hpp"

using namespace rcp;

namespace {

// brute-force double loop: out[t] = sum_{k>=t} gamma^(k-t) r_k
Vector oracle_rtg(const Vector& r, double gamma) {
    Vector out(r.size(), 0.0);
    for (std::size_t t = 0; t < r.size(); ++t) {
        double d = 1.0;
        for (std::size_t k = t; k < r.size(); ++k) {
            out[t] += d * r[k];
            d *= gamma;
        }
    }
    return out;
}

// forward-view lambda-return: weighted sum of n-step returns, the last one
// running to the end of the episode and bootstrapping.
Vector oracle_lambda_return(const Vector& r, const Vector& v, double bootstrap, double gamma,
                            double lambda) {
    const int n = int(r.size());
    Vector out(r.size(), 0.0);
    for (int t = 0; t < n; ++t) {
        const int horizon = n - t;  // steps remaining
        double total = 0.0;
        for (int k = 1; k <= horizon; ++k) {
            // k-step return from t
            double g = 0.0, d = 1.0;
            for (int j = 0; j < k; ++j) {
                g += d * r[std::size_t(t + j)];
                d *= gamma;
            }
            g += d * (t + k < n ? v[std::size_t(t + k)] : bootstrap);
            const double w = k < horizon ? (1.0 - lambda) * std::pow(lambda, k - 1)
                                         : std::pow(lambda, k - 1);
            total += w * g;
        }
        out[std::size_t(t)] = total;
    }
    return out;
}

Vector random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
    Vector v(n);
    for (double& x : v) x = scale * rng.normal();
    return v;
}

}  // namespace

TEST_CASE("reward_to_go zero discount") {
    Vector r{3.0, -1.0, 2.5, 0.0};
    CHECK(reward_to_go(r, 0.0) == r);
}

TEST_CASE("reward_to_go frozen example") {
    Vector out = reward_to_go({1.0, 1.0, 1.0}, 0.5);
    CHECK(out[0] == doctest::Approx(1.75).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(out[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(oracle_rtg({1.0, 1.0, 1.0}, 0.5)[0] == doctest::Approx(1.75).epsilon(1e-15));
}

TEST_CASE("reward_to_go all zeros") {
    Vector out = reward_to_go(Vector(7, 0.0), 0.9);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("reward_to_go matches double-loop oracle") {
    Rng rng(1);
    for (int draw = 0; draw < 100; ++draw) {
        const std::size_t n = 1 + rng.uniform_index(50);
        Vector r = random_vec(n, rng, 2.0);
        const double gamma = rng.uniform01();
        Vector fast = reward_to_go(r, gamma);
        Vector slow = oracle_rtg(r, gamma);
        for (std::size_t t = 0; t < n; ++t) CHECK(std::abs(fast[t] - slow[t]) <= 1e-10);
    }
}

TEST_CASE("reward_to_go is linear in the rewards") {
    Rng rng(2);
    Vector r = random_vec(20, rng);
    const double c = 3.7;
    Vector scaled = r;
    for (double& v : scaled) v *= c;
    Vector a = reward_to_go(r, 0.97);
    Vector b = reward_to_go(scaled, 0.97);
    for (std::size_t t = 0; t < r.size(); ++t)
        CHECK(std::abs(b[t] - c * a[t]) <= 1e-12 * std::max(1.0, std::abs(b[t])));
}

TEST_CASE("reward_to_go contract checks") {
    CHECK_THROWS_AS(reward_to_go({}, 0.5), ContractViolation);
    CHECK_THROWS_AS(reward_to_go({1.0}, 1.5), ContractViolation);
    CHECK_THROWS_AS(reward_to_go({std::nan("")}, 0.5), ContractViolation);
}

TEST_CASE("advantages trivial baselines") {
    Vector r{1.0, 2.0, 3.0};
    Vector rtg = reward_to_go(r, 0.9);
    CHECK(advantages(r, Vector(3, 0.0), 0.9) == rtg);
    Vector perfect = advantages(r, rtg, 0.9);
    for (double v : perfect) CHECK(v == 0.0);
}

TEST_CASE("advantages matches brute-force oracle") {
    Rng rng(3);
    for (int draw = 0; draw < 50; ++draw) {
        Vector r = random_vec(10, rng);
        Vector b = random_vec(10, rng);
        const double gamma = rng.uniform01();
        Vector a = advantages(r, b, gamma);
        Vector slow = oracle_rtg(r, gamma);
        for (std::size_t t = 0; t < 10; ++t) CHECK(std::abs(a[t] - (slow[t] - b[t])) <= 1e-12);
    }
}

TEST_CASE("advantages shift with the baseline") {
    Rng rng(4);
    Vector r = random_vec(12, rng);
    Vector b = random_vec(12, rng);
    const double c = 2.5;
    Vector b2 = b;
    for (double& v : b2) v += c;
    Vector a1 = advantages(r, b, 0.95);
    Vector a2 = advantages(r, b2, 0.95);
    for (std::size_t t = 0; t < 12; ++t) CHECK(a2[t] == doctest::Approx(a1[t] - c).epsilon(1e-13));
}

TEST_CASE("advantages length mismatch") {
    CHECK_THROWS_AS(advantages({1.0, 2.0}, {0.0}, 0.9), ContractViolation);
}

TEST_CASE("td_lambda at lambda=1 equals reward_to_go") {
    Rng rng(5);
    Vector r = random_vec(9, rng);
    Vector v = random_vec(9, rng);
    Vector targets = td_lambda_targets(r, v, 0.0, 0.93, 1.0);
    Vector rtg = reward_to_go(r, 0.93);
    for (std::size_t t = 0; t < r.size(); ++t)
        CHECK(targets[t] == doctest::Approx(rtg[t]).epsilon(1e-14));
}

TEST_CASE("td_lambda at lambda=0 is one-step TD") {
    Rng rng(6);
    Vector r = random_vec(9, rng);
    Vector v = random_vec(9, rng);
    const double gamma = 0.9, bootstrap = 1.25;
    Vector targets = td_lambda_targets(r, v, bootstrap, gamma, 0.0);
    for (std::size_t t = 0; t + 1 < r.size(); ++t)
        CHECK(targets[t] == doctest::Approx(r[t] + gamma * v[t + 1]).epsilon(1e-14));
    CHECK(targets.back() == doctest::Approx(r.back() + gamma * bootstrap).epsilon(1e-14));
}

TEST_CASE("td_lambda matches forward-view oracle") {
    Rng rng(7);
    for (int draw = 0; draw < 60; ++draw) {
        const std::size_t n = 1 + rng.uniform_index(50);
        Vector r = random_vec(n, rng);
        Vector v = random_vec(n, rng);
        const double bootstrap = rng.normal();
        const double gamma = rng.uniform01();
        const double lambda = draw % 3 == 0 ? 0.95 : rng.uniform01();
        Vector fast = td_lambda_targets(r, v, bootstrap, gamma, lambda);
        Vector slow = oracle_lambda_return(r, v, bootstrap, gamma, lambda);
        for (std::size_t t = 0; t < n; ++t)
            CHECK(std::abs(fast[t] - slow[t]) <= 1e-10 * std::max(1.0, std::abs(slow[t])));
    }
}

TEST_CASE("td_lambda rejects bad parameters") {
    CHECK_THROWS_AS(td_lambda_targets({1.0}, {1.0}, 0.0, -0.1, 0.5), ContractViolation);
    CHECK_THROWS_AS(td_lambda_targets({1.0}, {1.0}, 0.0, 0.9, 1.5), ContractViolation);
    CHECK_THROWS_AS(td_lambda_targets({1.0, 2.0}, {1.0}, 0.0, 0.9, 0.5), ContractViolation);
}
