#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "modal/rng.hpp"

using namespace modal;

TEST_CASE("rng streams are reproducible per seed") {
    Rng a(42), b(42), c(43);
    bool all_equal = true;
    bool any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const double x = a.uniform01();
        all_equal = all_equal && x == b.uniform01();
        any_diff = any_diff || x != c.uniform01();
    }
    CHECK(all_equal);
    CHECK(any_diff);

    Rng d(7), e(7);
    for (int i = 0; i < 1000; ++i) {
        CHECK(d.normal() == e.normal());
    }
}

TEST_CASE("uniform01 stays in [0, 1) with the right mean and variance") {
    Rng rng(1);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sq += u * u;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    // 1/sqrt(12) / sqrt(n) ~ 6.5e-4; allow 4 standard errors.
    CHECK(std::abs(mean - 0.5) < 4.0 * 0.2887 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0 / 12.0) < 0.001);
}

TEST_CASE("normal draws have standard moments") {
    Rng rng(2);
    const int n = 200000;
    double sum = 0.0, sq = 0.0, cube = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
        cube += z * z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 0.02);
    CHECK(std::abs(cube / n) < 0.05);  // odd moment vanishes
}

TEST_CASE("normal_vec matches consecutive scalar draws") {
    Rng a(9), b(9);
    const Vec v = a.normal_vec(17);
    REQUIRE(v.size() == 17);
    for (double x : v) CHECK(x == b.normal());
}

TEST_CASE("index covers [0, n) and rejects n = 0") {
    Rng rng(3);
    std::vector<int> counts(8, 0);
    for (int i = 0; i < 80000; ++i) {
        const std::size_t k = rng.index(8);
        REQUIRE(k < 8);
        counts[k] += 1;
    }
    for (int c : counts) {
        CHECK(c > 8000);  // each bin near 10000
        CHECK(c < 12000);
    }
    for (int i = 0; i < 100; ++i) CHECK(rng.index(1) == 0);
    CHECK_THROWS_AS(rng.index(0), std::invalid_argument);
}

TEST_CASE("uniform_int is inclusive on both ends") {
    Rng rng(4);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 10000; ++i) {
        const int v = rng.uniform_int(-3, 5);
        REQUIRE(v >= -3);
        REQUIRE(v <= 5);
        saw_lo = saw_lo || v == -3;
        saw_hi = saw_hi || v == 5;
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
    for (int i = 0; i < 10; ++i) CHECK(rng.uniform_int(7, 7) == 7);
    CHECK_THROWS_AS(rng.uniform_int(2, 1), std::invalid_argument);
}

TEST_CASE("categorical follows the weights") {
    Rng rng(5);
    const std::vector<double> sure = {1.0, 0.0};
    for (int i = 0; i < 1000; ++i) CHECK(rng.categorical(sure) == 0);

    const std::vector<double> other = {0.0, 1.0};
    for (int i = 0; i < 1000; ++i) CHECK(rng.categorical(other) == 1);

    const std::vector<double> w = {0.2, 0.5, 0.3};
    std::vector<int> counts(3, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[rng.categorical(w)] += 1;
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(counts[i] / double(n) - w[i]) < 0.01);
    }
    CHECK_THROWS_AS(rng.categorical(std::vector<double>{}), std::invalid_argument);
}
