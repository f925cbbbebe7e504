#pragma once

// Seeded statistical kernel: Spearman correlation, percentile bootstrap and
// two-sample permutation tests. Functions are templated on the scalar type and
// accept any Eigen dense vector expression.

#include "passdrop/errors.hpp"
#include "passdrop/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace passdrop::stats {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar = double>
struct CorrelationResult {
    Scalar r_s = 0;
    Eigen::Index n = 0;
    std::optional<Scalar> ci_low;
    std::optional<Scalar> ci_high;
};

template <typename Scalar = double>
struct Interval {
    Scalar low = 0;
    Scalar high = 0;
};

template <typename Scalar = double>
struct PermutationResult {
    Scalar observed_diff = 0;
    Scalar p_value = 1;
    std::uint64_t n_permutations = 0;
    bool exact = false; // all relabelings enumerated
};

enum class Statistic { mean };

enum class PermutationMode {
    automatic,   // enumerate when the number of relabelings is at most n_perm
    monte_carlo, // always sample n_perm relabelings
    exact,       // always enumerate (throws StatsError above 10^7 relabelings)
};

// Ranks 1..n; tied values share the mean of the ranks they span.
template <typename Derived>
Vector<typename Derived::Scalar> average_ranks(const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
    Vector<Scalar> ranks(n);
    for (Eigen::Index i = 0; i < n;) {
        Eigen::Index j = i + 1;
        while (j < n && x(order[static_cast<std::size_t>(j)]) == x(order[static_cast<std::size_t>(i)])) ++j;
        const Scalar rank = Scalar(i + j + 1) / Scalar(2); // mean of (i+1)..j
        for (Eigen::Index k = i; k < j; ++k) ranks(order[static_cast<std::size_t>(k)]) = rank;
        i = j;
    }
    return ranks;
}

template <typename Derived>
typename Derived::Scalar pearson(const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<Derived>& y) {
    using Scalar = typename Derived::Scalar;
    const Vector<Scalar> cx = x.array() - x.mean();
    const Vector<Scalar> cy = y.array() - y.mean();
    const Scalar denom = std::sqrt(cx.squaredNorm() * cy.squaredNorm());
    if (!(denom > 0)) throw StatsError("correlation undefined: constant input");
    return std::clamp(cx.dot(cy) / denom, Scalar(-1), Scalar(1));
}

template <typename DerivedX, typename DerivedY>
CorrelationResult<typename DerivedX::Scalar> spearman(const Eigen::MatrixBase<DerivedX>& x,
                                                      const Eigen::MatrixBase<DerivedY>& y) {
    using Scalar = typename DerivedX::Scalar;
    if (x.size() != y.size())
        throw StatsError("spearman: length mismatch (" + std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()) + ")");
    if (x.size() < 2) throw StatsError("spearman: need at least two observations");
    if ((x.array() == x(0)).all() || (y.array() == y(0)).all())
        throw StatsError("spearman: constant input, rank correlation undefined");
    const Vector<Scalar> rx = average_ranks(x);
    const Vector<Scalar> ry = average_ranks(y.template cast<Scalar>());
    return {pearson(rx, ry), x.size(), std::nullopt, std::nullopt};
}

// Linear interpolation between order statistics (the common "type 7" rule).
template <typename Scalar>
Scalar quantile_sorted(std::span<const Scalar> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + static_cast<Scalar>(h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Percentile bootstrap over `n_units` exchangeable units. `stat` receives the
// resampled unit indices and returns the replicate statistic; NaN replicates
// (statistic undefined on that resample) are dropped before taking quantiles.
template <typename Scalar, typename StatFn>
Interval<Scalar> bootstrap_percentile(std::size_t n_units, int iterations, double level, std::uint64_t seed,
                                      StatFn&& stat) {
    if (n_units == 0) throw StatsError("bootstrap: empty input");
    if (iterations < 1) throw StatsError("bootstrap: need at least one iteration");
    if (!(level > 0.0 && level < 1.0)) throw StatsError("bootstrap: level must lie in (0, 1)");
    std::vector<Scalar> replicates;
    replicates.reserve(static_cast<std::size_t>(iterations));
    std::vector<std::size_t> idx(n_units);
    for (int b = 0; b < iterations; ++b) {
        Engine eng = substream(seed, static_cast<std::uint64_t>(b));
        for (auto& i : idx) i = static_cast<std::size_t>(uniform_index(eng, n_units));
        const Scalar s = stat(std::span<const std::size_t>(idx));
        if (!std::isnan(s)) replicates.push_back(s);
    }
    if (replicates.empty()) throw StatsError("bootstrap: statistic undefined on every resample");
    std::sort(replicates.begin(), replicates.end());
    const double alpha = (1.0 - level) / 2.0;
    return {quantile_sorted<Scalar>(replicates, alpha), quantile_sorted<Scalar>(replicates, 1.0 - alpha)};
}

template <typename Derived>
Interval<typename Derived::Scalar> bootstrap_ci(const Eigen::MatrixBase<Derived>& values, Statistic statistic,
                                                int iterations, double level, std::uint64_t seed) {
    using Scalar = typename Derived::Scalar;
    if (values.size() == 0) throw StatsError("bootstrap_ci: empty input");
    const Vector<Scalar> v = values;
    switch (statistic) {
    case Statistic::mean:
        break;
    }
    return bootstrap_percentile<Scalar>(static_cast<std::size_t>(v.size()), iterations, level, seed,
                                        [&](std::span<const std::size_t> idx) {
                                            Scalar sum = 0;
                                            for (auto i : idx) sum += v(static_cast<Eigen::Index>(i));
                                            return sum / static_cast<Scalar>(idx.size());
                                        });
}

// Number of ways to choose k of n, saturating at `cap`.
inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    k = std::min(k, n - k);
    long double c = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
        if (c > static_cast<long double>(cap)) return cap + 1;
    }
    return static_cast<std::uint64_t>(std::llround(c));
}

// Two-sided test of mean(treatment) - mean(baseline) under random relabeling
// of the pooled values. Monte Carlo p = (1 + #extreme) / (n_perm + 1);
// enumerated p = #extreme / #relabelings, the observed labeling included.
template <typename DerivedT, typename DerivedB>
PermutationResult<typename DerivedT::Scalar> permutation_test(const Eigen::MatrixBase<DerivedT>& treatment,
                                                              const Eigen::MatrixBase<DerivedB>& baseline,
                                                              int n_perm, std::uint64_t seed,
                                                              PermutationMode mode = PermutationMode::automatic) {
    using Scalar = typename DerivedT::Scalar;
    if (treatment.size() == 0 || baseline.size() == 0) throw StatsError("permutation_test: empty group");
    if (n_perm < 99) throw StatsError("permutation_test: n_perm must be at least 99");

    const auto n1 = static_cast<std::size_t>(treatment.size());
    const auto n = n1 + static_cast<std::size_t>(baseline.size());
    Vector<Scalar> pooled(static_cast<Eigen::Index>(n));
    pooled << treatment, baseline.template cast<Scalar>();
    const Scalar total = pooled.sum();
    auto diff_of = [&](Scalar selected_sum) {
        return selected_sum / Scalar(n1) - (total - selected_sum) / Scalar(n - n1);
    };

    Scalar observed_sum = 0;
    for (std::size_t i = 0; i < n1; ++i) observed_sum += pooled(static_cast<Eigen::Index>(i));
    const Scalar observed = diff_of(observed_sum);
    const Scalar tol = Scalar(1e-9) * std::max(Scalar(1), pooled.cwiseAbs().maxCoeff());
    auto extreme = [&](Scalar d) { return std::abs(d) >= std::abs(observed) - tol; };

    constexpr std::uint64_t kExactLimit = 10'000'000;
    const std::uint64_t splits = binomial_capped(n, n1, kExactLimit);
    const bool enumerate = mode == PermutationMode::exact ||
                           (mode == PermutationMode::automatic && splits <= static_cast<std::uint64_t>(n_perm));

    PermutationResult<Scalar> out;
    out.observed_diff = observed;
    if (enumerate) {
        if (splits > kExactLimit) throw StatsError("permutation_test: too many relabelings to enumerate");
        std::vector<char> mask(n, 0);
        std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n1), 1);
        std::uint64_t hits = 0;
        std::uint64_t count = 0;
        do {
            Scalar s = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask[i]) s += pooled(static_cast<Eigen::Index>(i));
            hits += extreme(diff_of(s)) ? 1 : 0;
            ++count;
        } while (std::prev_permutation(mask.begin(), mask.end()));
        out.p_value = Scalar(hits) / Scalar(count);
        out.n_permutations = count;
        out.exact = true;
        return out;
    }

    std::vector<std::size_t> perm(n);
    std::uint64_t hits = 0;
    for (int r = 0; r < n_perm; ++r) {
        Engine eng = substream(seed, static_cast<std::uint64_t>(r));
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        // Partial Fisher-Yates: the first n1 slots are a uniform n1-subset.
        Scalar s = 0;
        for (std::size_t i = 0; i < n1; ++i) {
            const auto j = i + static_cast<std::size_t>(uniform_index(eng, n - i));
            std::swap(perm[i], perm[j]);
            s += pooled(static_cast<Eigen::Index>(perm[i]));
        }
        hits += extreme(diff_of(s)) ? 1 : 0;
    }
    out.p_value = Scalar(1 + hits) / Scalar(n_perm + 1);
    out.n_permutations = static_cast<std::uint64_t>(n_perm);
    return out;
}

// Convenience overloads for std containers.
inline Eigen::Map<const Vector<double>> as_vector(std::span<const double> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

} // namespace passdrop::stats
