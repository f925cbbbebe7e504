#include "doctest.h"

#include "passdrop/errors.hpp"
#include "passdrop/stats.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <random>

using namespace passdrop;
using stats::Vector;

namespace {

Vector<double> vec(std::vector<double> v) { return stats::as_vector(v); }

} // namespace

TEST_CASE("spearman basics") {
    CHECK(stats::spearman(vec({1, 2, 3, 4, 5}), vec({1, 2, 3, 4, 5})).r_s == 1.0);
    CHECK(stats::spearman(vec({1, 2, 3}), vec({3, 2, 1})).r_s == -1.0);
    const auto r = stats::spearman(vec({1, 2, 2, 3}), vec({1, 3, 2, 4}));
    CHECK(r.r_s == doctest::Approx(oracle::brute_spearman({1, 2, 2, 3}, {1, 3, 2, 4})).epsilon(1e-12));
    CHECK(r.n == 4);
}

TEST_CASE("spearman errors") {
    CHECK_THROWS_AS(stats::spearman(vec({1, 2, 3}), vec({1, 2})), StatsError);
    CHECK_THROWS_AS(stats::spearman(vec({1}), vec({1})), StatsError);
    CHECK_THROWS_AS(stats::spearman(vec({2, 2, 2}), vec({1, 2, 3})), StatsError);
    CHECK_THROWS_AS(stats::spearman(vec({1, 2, 3}), vec({5, 5, 5})), StatsError);
}

TEST_CASE("average ranks share tied positions") {
    const auto r = stats::average_ranks(vec({10, 20, 20, 5, 20}));
    CHECK(r(0) == 2.0);
    CHECK(r(1) == 4.0);
    CHECK(r(2) == 4.0);
    CHECK(r(3) == 1.0);
    CHECK(r(4) == 4.0);
}

TEST_CASE("spearman matches the brute-force oracle on random tied data") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 11);
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = static_cast<double>(rng() % 5);
            y[i] = static_cast<double>(rng() % 4);
        }
        if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; }) ||
            std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; }))
            continue;
        CHECK(std::abs(stats::spearman(vec(x), vec(y)).r_s - oracle::brute_spearman(x, y)) <= 1e-12);
    }
}

TEST_CASE("spearman symmetry and rank invariance") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 20);
        std::vector<double> x(n), y(n), fx(n);
        for (int i = 0; i < n; ++i) {
            x[i] = nd(rng);
            y[i] = nd(rng);
            fx[i] = std::exp(3 * x[i]) + 7; // strictly increasing
        }
        const double r = stats::spearman(vec(x), vec(y)).r_s;
        CHECK(r == doctest::Approx(stats::spearman(vec(y), vec(x)).r_s).epsilon(1e-12));
        CHECK(r == doctest::Approx(stats::spearman(vec(fx), vec(y)).r_s).epsilon(1e-12));
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
    }
}

TEST_CASE("spearman is templated on the scalar type") {
    Vector<float> x(4), y(4);
    x << 1, 2, 3, 4;
    y << 2, 1, 4, 3;
    const auto r = stats::spearman(x, y);
    CHECK(r.r_s == doctest::Approx(0.6));
}

TEST_CASE("type 7 quantiles") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(stats::quantile_sorted<double>(v, 0.25) == doctest::Approx(1.75));
    CHECK(stats::quantile_sorted<double>(v, 0.5) == doctest::Approx(2.5));
    CHECK(stats::quantile_sorted<double>(v, 0.0) == 1.0);
    CHECK(stats::quantile_sorted<double>(v, 1.0) == 4.0);
}

TEST_CASE("bootstrap_ci") {
    const auto c = stats::bootstrap_ci(vec({3, 3, 3, 3}), stats::Statistic::mean, 500, 0.95, 1);
    CHECK(c.low == 3.0);
    CHECK(c.high == 3.0);
    CHECK_THROWS_AS(stats::bootstrap_ci(vec({}), stats::Statistic::mean, 10, 0.95, 1), StatsError);
    CHECK_THROWS_AS(stats::bootstrap_ci(vec({1, 2}), stats::Statistic::mean, 0, 0.95, 1), StatsError);
    CHECK_THROWS_AS(stats::bootstrap_ci(vec({1, 2}), stats::Statistic::mean, 10, 1.0, 1), StatsError);

    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd(5, 3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(1 + rng() % 30);
        for (auto& x : v) x = nd(rng);
        const auto a = stats::bootstrap_ci(vec(v), stats::Statistic::mean, 300, 0.9, trial);
        const auto b = stats::bootstrap_ci(vec(v), stats::Statistic::mean, 300, 0.9, trial);
        CHECK(a.low == b.low);
        CHECK(a.high == b.high);
        CHECK(a.low <= a.high);
        CHECK(a.low >= *std::min_element(v.begin(), v.end()));
        CHECK(a.high <= *std::max_element(v.begin(), v.end()));
    }
}

TEST_CASE("bootstrap replicates depend only on their index") {
    // Replicate b draws from substream(seed, b), so a run with more
    // iterations extends rather than reshuffles the replicate set.
    std::vector<double> first;
    std::vector<double> seen;
    stats::bootstrap_percentile<double>(5, 10, 0.5, 77, [&](std::span<const std::size_t> idx) {
        first.push_back(static_cast<double>(idx[0]));
        return 0.0;
    });
    stats::bootstrap_percentile<double>(5, 20, 0.5, 77, [&](std::span<const std::size_t> idx) {
        seen.push_back(static_cast<double>(idx[0]));
        return 0.0;
    });
    CHECK(std::equal(first.begin(), first.end(), seen.begin()));
}

TEST_CASE("permutation test on identical groups") {
    const auto r = stats::permutation_test(vec({1, 2, 3}), vec({1, 2, 3}), 999, 1);
    CHECK(r.observed_diff == 0.0);
    CHECK(r.p_value == 1.0);
    const auto mc = stats::permutation_test(vec({4, 4, 4, 4, 4}), vec({4, 4, 4, 4, 4, 4, 4}), 99, 1,
                                            stats::PermutationMode::monte_carlo);
    CHECK(mc.p_value == 1.0);
}

TEST_CASE("fully separated groups against enumeration of all 20 splits") {
    const std::vector<double> t{10, 11, 12}, b{0, 1, 2};
    const auto e = oracle::enumerate_splits(t, b);
    CHECK(e.total == 20);
    CHECK(e.extreme == 2);
    const auto exact = stats::permutation_test(vec(t), vec(b), 999, 1);
    CHECK(exact.exact);
    CHECK(exact.n_permutations == 20);
    CHECK(exact.p_value == e.p());
    CHECK(exact.observed_diff == 10.0);

    const auto mc = stats::permutation_test(vec(t), vec(b), 999, 1, stats::PermutationMode::monte_carlo);
    CHECK_FALSE(mc.exact);
    CHECK(mc.p_value >= 1.0 / 1000.0);
    CHECK(mc.p_value == doctest::Approx(0.1).epsilon(0.3));
    const auto again = stats::permutation_test(vec(t), vec(b), 999, 1, stats::PermutationMode::monte_carlo);
    CHECK(again.p_value == mc.p_value);
}

TEST_CASE("automatic mode enumerates small problems exactly") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> t(1 + rng() % 5), b(1 + rng() % 5);
        for (auto& x : t) x = nd(rng);
        for (auto& x : b) x = std::round(nd(rng) * 2) / 2;
        const auto r = stats::permutation_test(vec(t), vec(b), 9999, trial);
        const auto e = oracle::enumerate_splits(t, b);
        CHECK(r.exact);
        CHECK(r.n_permutations == e.total);
        CHECK(r.p_value == e.p());
    }
}

TEST_CASE("permutation test preconditions") {
    CHECK_THROWS_AS(stats::permutation_test(vec({}), vec({1}), 999, 1), StatsError);
    CHECK_THROWS_AS(stats::permutation_test(vec({1}), vec({}), 999, 1), StatsError);
    CHECK_THROWS_AS(stats::permutation_test(vec({1}), vec({2}), 98, 1), StatsError);
}

TEST_CASE("monte carlo p-values respect the floor") {
    std::vector<double> t(30), b(30);
    for (int i = 0; i < 30; ++i) {
        t[i] = 100 + i;
        b[i] = i;
    }
    const auto r = stats::permutation_test(vec(t), vec(b), 199, 5);
    CHECK_FALSE(r.exact);
    CHECK(r.n_permutations == 199);
    CHECK(r.p_value == 1.0 / 200.0);
}
