#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <deque>

#include "rcp/replay.hpp"

using namespace rcp;

namespace {

Transition tr(double z) {
    Transition t;
    t.z_raw = z;
    return t;
}

Vector sorted_values(const TransitionBuffer& b) {
    Vector v = buffer_all_values(b);
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("fifo eviction") {
    TransitionBuffer b(3);
    for (double z : {1.0, 2.0, 3.0, 4.0}) b.push(tr(z));
    CHECK(b.size() == 3);
    CHECK(b.at(0).z_raw == 2.0);
    CHECK(b.at(1).z_raw == 3.0);
    CHECK(b.at(2).z_raw == 4.0);
}

TEST_CASE("under capacity keeps order") {
    TransitionBuffer b(10);
    for (double z : {5.0, 6.0}) b.push(tr(z));
    CHECK(b.size() == 2);
    CHECK(b.total_inserted() == 2);
    CHECK(b.at(0).z_raw == 5.0);
    CHECK(b.at(1).z_raw == 6.0);
}

TEST_CASE("interleaved pushes match a list-slicing oracle") {
    // same pattern as training: repeated 2000-element pushes into a ring
    const std::size_t capacity = 9000;
    TransitionBuffer b(capacity);
    std::deque<double> oracle;
    double z = 0.0;
    for (int round = 0; round < 9; ++round) {
        for (int i = 0; i < 2000; ++i) {
            b.push(tr(z));
            oracle.push_back(z);
            if (oracle.size() > capacity) oracle.pop_front();
            z += 1.0;
        }
        CHECK(b.size() == oracle.size());
        CHECK(b.total_inserted() == std::uint64_t((round + 1) * 2000));
        for (std::size_t k = 0; k < b.size(); k += 499) CHECK(b.at(k).z_raw == oracle[k]);
    }
    for (std::size_t k = 0; k < b.size(); ++k) CHECK(b.at(k).z_raw == oracle[k]);
}

TEST_CASE("size law holds through random operation streams") {
    Rng rng(3);
    for (int round = 0; round < 20; ++round) {
        const std::size_t cap = 1 + rng.uniform_index(64);
        TransitionBuffer b(cap);
        std::uint64_t inserted = 0;
        for (int op = 0; op < 200; ++op) {
            const std::size_t n = rng.uniform_index(10);
            for (std::size_t i = 0; i < n; ++i) b.push(tr(double(inserted + i)));
            inserted += n;
            CHECK(b.size() == std::min<std::uint64_t>(inserted, cap));
            CHECK(b.total_inserted() == inserted);
        }
        // contents are exactly the last size() insertions, in order
        const std::size_t sz = b.size();
        for (std::size_t k = 0; k < sz; ++k)
            CHECK(b.at(k).z_raw == double(inserted - sz + k));
    }
}

TEST_CASE("sampling a singleton") {
    TransitionBuffer b(4);
    b.push(tr(7.5));
    Rng rng(1);
    auto batch = b.sample(16, rng);
    CHECK(batch.size() == 16);
    for (const auto& t : batch) CHECK(t.z_raw == 7.5);
}

TEST_CASE("sampling determinism") {
    TransitionBuffer b(100);
    for (int i = 0; i < 100; ++i) b.push(tr(double(i)));
    Rng a(42), c(42);
    auto b1 = b.sample(32, a);
    auto b2 = b.sample(32, c);
    for (std::size_t i = 0; i < b1.size(); ++i) CHECK(b1[i].z_raw == b2[i].z_raw);
}

TEST_CASE("sampling is uniform") {
    TransitionBuffer b(10);
    for (int i = 0; i < 10; ++i) b.push(tr(double(i)));
    Rng rng(99);
    std::vector<long> counts(10, 0);
    const long draws = 100000;
    auto batch = b.sample(std::size_t(draws), rng);
    for (const auto& t : batch) counts[std::size_t(t.z_raw)] += 1;
    // binomial: mean n*p, sd sqrt(n*p*(1-p))
    const double expect = draws / 10.0;
    const double sd = std::sqrt(draws * 0.1 * 0.9);
    for (long c : counts) CHECK(std::abs(double(c) - expect) < 4.0 * sd);
}

TEST_CASE("sampling never returns an evicted record") {
    TransitionBuffer b(8);
    for (int i = 0; i < 50; ++i) b.push(tr(double(i)));
    Rng rng(5);
    auto batch = b.sample(200, rng);
    for (const auto& t : batch) CHECK(t.z_raw >= 42.0);  // 50 - 8
}

TEST_CASE("sampling an empty buffer throws") {
    TransitionBuffer b(4);
    Rng rng(1);
    CHECK_THROWS_AS(b.sample(1, rng), ContractViolation);
}

TEST_CASE("buffer_all_values") {
    TransitionBuffer b(3);
    CHECK(buffer_all_values(b).empty());
    for (double z : {1.0, 2.0, 3.0}) b.push(tr(z));
    CHECK(sorted_values(b) == Vector{1.0, 2.0, 3.0});
    b.push(tr(9.0));  // evicts 1.0
    CHECK(sorted_values(b) == Vector{2.0, 3.0, 9.0});
}

TEST_CASE("zero capacity rejected") {
    CHECK_THROWS_AS(TransitionBuffer(0), ContractViolation);
}
