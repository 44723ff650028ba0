#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcot/errors.hpp"
#include "pcot/metrics.hpp"

namespace pcot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

void require_equal_sizes(const PointCloud& x, const PointCloud& y, const char* op) {
    if (x.empty() || y.empty())
        throw std::invalid_argument(std::string(op) + ": clouds must be non-empty");
    if (x.size() != y.size())
        throw std::invalid_argument(std::string(op) + ": size mismatch (" +
                                    std::to_string(x.size()) + " vs " + std::to_string(y.size()) +
                                    ")");
}

// Recompute the bijection cost in index order so the returned Assignment
// reproduces the reported value bit-for-bit.
double mapping_cost(const PointCloud& x, const PointCloud& y,
                    const std::vector<std::size_t>& mapping) {
    double sum = 0.0;
    for (std::size_t i = 0; i < mapping.size(); ++i) sum += distance(x[i], y[mapping[i]]);
    return sum;
}

// Shortest-augmenting-path assignment with dual potentials (the classic
// O(n^3) Jonker-Volgenant/Hungarian scheme over a dense cost matrix).
std::vector<std::size_t> solve_hungarian(const std::vector<double>& cost, std::size_t n) {
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0);  // column -> row (1-based, 0 = free)
    std::vector<std::size_t> way(n + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            const double* row = cost.data() + (i0 - 1) * n;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> mapping(n);
    for (std::size_t j = 1; j <= n; ++j) mapping[match[j] - 1] = j - 1;
    return mapping;
}

}  // namespace

std::pair<double, Assignment> emd_exact(const PointCloud& x, const PointCloud& y,
                                        Reduction reduction, std::size_t cap) {
    require_equal_sizes(x, y, "emd_exact");
    const std::size_t n = x.size();
    if (n > cap)
        throw CapacityError("emd_exact: n=" + std::to_string(n) + " exceeds the practical cap " +
                            std::to_string(cap) + " (exact assignment is cubic; use emd_auction)");

    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = distance(x[i], y[j]);

    Assignment a;
    a.mapping = solve_hungarian(cost, n);
    double value = mapping_cost(x, y, a.mapping);
    if (reduction == Reduction::kMean) value /= static_cast<double>(n);
    a.cost = value;
    return {value, std::move(a)};
}

Assignment emd_auction_assignment(const PointCloud& x, const PointCloud& y, double epsilon) {
    require_equal_sizes(x, y, "emd_auction");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("emd_auction: epsilon must be finite and > 0");
    const std::size_t n = x.size();
    if (n > kEmdAuctionCap)
        throw CapacityError("emd_auction: n=" + std::to_string(n) + " exceeds the cap " +
                            std::to_string(kEmdAuctionCap));

    // Cost range estimate for the epsilon-scaling schedule.
    double max_x = 0.0, max_y = 0.0;
    for (const Point3& p : x.points) max_x = std::max(max_x, p.norm());
    for (const Point3& p : y.points) max_y = std::max(max_y, p.norm());
    const double cost_scale = std::max(max_x + max_y, epsilon);

    std::vector<double> price(n, 0.0);
    std::vector<std::size_t> owner(n, kNone);
    std::vector<std::size_t> assigned(n, kNone);

    double eps = std::max(epsilon, cost_scale / 4.0);
    for (;;) {
        // Forward auction round at this epsilon: everyone starts unassigned,
        // prices persist between rounds.
        std::fill(owner.begin(), owner.end(), kNone);
        std::fill(assigned.begin(), assigned.end(), kNone);
        std::deque<std::size_t> queue;
        for (std::size_t i = 0; i < n; ++i) queue.push_back(i);

        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            // Best and second-best value of object j for bidder i.
            double best = -kInf, second = -kInf;
            std::size_t best_j = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const double value = -distance(x[i], y[j]) - price[j];
                if (value > best) {
                    second = best;
                    best = value;
                    best_j = j;
                } else if (value > second) {
                    second = value;
                }
            }
            const double increment = (second == -kInf ? 0.0 : best - second) + eps;
            price[best_j] += increment;
            const std::size_t displaced = owner[best_j];
            owner[best_j] = i;
            assigned[i] = best_j;
            if (displaced != kNone) {
                assigned[displaced] = kNone;
                queue.push_back(displaced);
            }
        }
        if (eps <= epsilon) break;
        eps = std::max(epsilon, eps / 5.0);
    }

    Assignment a;
    a.mapping.assign(assigned.begin(), assigned.end());
    a.cost = mapping_cost(x, y, a.mapping);
    return a;
}

double emd_auction(const PointCloud& x, const PointCloud& y, double epsilon,
                   Reduction reduction) {
    const Assignment a = emd_auction_assignment(x, y, epsilon);
    return reduction == Reduction::kMean ? a.cost / static_cast<double>(x.size()) : a.cost;
}

}  // namespace pcot
