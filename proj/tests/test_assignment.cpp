#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "pcot/errors.hpp"
#include "pcot/metrics.hpp"

using namespace pcot;

TEST_CASE("emd_exact on identical clouds is zero") {
    const PointCloud x = oracles::random_cloud(16, 1);
    const auto [value, assignment] = emd_exact(x, x);
    CHECK(value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(assignment.cost == value);
    // mapping is a bijection
    std::set<std::size_t> targets(assignment.mapping.begin(), assignment.mapping.end());
    CHECK(targets.size() == x.size());
}

TEST_CASE("emd_exact two-point hand example") {
    PointCloud x, y;
    x.points = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    y.points = {{0.5, 0.0, 0.0}, {1.5, 0.0, 0.0}};
    // the two bijections cost (0.5+0.5)/2 and (1.5+0.5)/2
    CHECK(emd_exact(x, y, Reduction::kMean).first == doctest::Approx(0.5));
    CHECK(emd_exact(x, y, Reduction::kSum).first == doctest::Approx(1.0));
}

TEST_CASE("emd_exact agrees with exhaustive enumeration at n=7") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const PointCloud x = oracles::random_cloud(7, 2 * s);
        const PointCloud y = oracles::random_cloud(7, 2 * s + 1);
        const auto [value, assignment] = emd_exact(x, y, Reduction::kSum);
        CHECK(std::abs(value - oracles::brute_emd_sum(x, y)) < 1e-9);
        // the returned mapping achieves the returned cost exactly
        double recompute = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            recompute += distance(x[i], y[assignment.mapping[i]]);
        CHECK(recompute == value);
    }
}

TEST_CASE("emd_exact enforces the documented cap and equal sizes") {
    const PointCloud big = oracles::random_cloud(600, 3);
    CHECK_THROWS_WITH_AS(emd_exact(big, big).first,
                         doctest::Contains("512"), CapacityError);
    const PointCloud x = oracles::random_cloud(4, 4);
    const PointCloud y = oracles::random_cloud(5, 5);
    CHECK_THROWS_AS(emd_exact(x, y), std::invalid_argument);
}

TEST_CASE("auction on identical distinct clouds finds the zero assignment") {
    const PointCloud x = oracles::random_cloud(64, 6);
    const double value = emd_auction(x, x, 1e-3, Reduction::kSum);
    CHECK(value >= 0.0);
    CHECK(value <= 64 * 1e-3);
}

TEST_CASE("auction resolves the two-point example within its bound") {
    PointCloud x, y;
    x.points = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    y.points = {{0.5, 0.0, 0.0}, {1.5, 0.0, 0.0}};
    const double value = emd_auction(x, y, 1e-4, Reduction::kMean);
    CHECK(std::abs(value - 0.5) <= 2e-4);
}

TEST_CASE("auction stays within n*epsilon of the exact optimum") {
    const double epsilon = 1e-3;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const PointCloud x = oracles::random_cloud(128, 100 + s);
        const PointCloud y = oracles::random_cloud(128, 200 + s);
        const double exact = emd_exact(x, y, Reduction::kSum).first;
        const double approx = emd_auction(x, y, epsilon, Reduction::kSum);
        CHECK(approx >= exact - 1e-9);
        CHECK(approx <= exact + 128 * epsilon + 1e-9);
    }
}

TEST_CASE("auction always returns a complete bijection") {
    const PointCloud x = oracles::random_cloud(50, 7);
    const PointCloud y = oracles::random_cloud(50, 8);
    const Assignment a = emd_auction_assignment(x, y, 1e-2);
    std::set<std::size_t> targets(a.mapping.begin(), a.mapping.end());
    CHECK(targets.size() == x.size());
    double recompute = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) recompute += distance(x[i], y[a.mapping[i]]);
    CHECK(recompute == a.cost);
}

TEST_CASE("auction validates epsilon and its own cap") {
    const PointCloud x = oracles::random_cloud(4, 9);
    CHECK_THROWS_AS(emd_auction(x, x, 0.0, Reduction::kSum), std::invalid_argument);
    CHECK_THROWS_AS(emd_auction(x, x, -1.0, Reduction::kSum), std::invalid_argument);
    const PointCloud huge = oracles::random_cloud(8193, 10);
    CHECK_THROWS_AS(emd_auction(huge, huge, 1e-3, Reduction::kSum), CapacityError);
}
