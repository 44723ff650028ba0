#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pcot/metrics.hpp"
#include "pcot/parallel.hpp"

namespace pcot {

namespace {

constexpr double kTieEps = 1e-12;

void require_swd_inputs(const PointCloud& x, const PointCloud& y, const DirectionSet& dirs) {
    if (x.empty() || y.empty()) throw std::invalid_argument("swd: clouds must be non-empty");
    if (x.size() != y.size())
        throw std::invalid_argument("swd: size mismatch (" + std::to_string(x.size()) + " vs " +
                                    std::to_string(y.size()) + ")");
    if (dirs.empty()) throw std::invalid_argument("swd: direction set is empty");
}

// Order-preserving map from double to uint64 (finite values): flip all
// bits of negatives, flip the sign bit of non-negatives. Sorting the keys
// sorts the values.
inline std::uint64_t sort_key(double d) {
    const std::uint64_t u = std::bit_cast<std::uint64_t>(d);
    return (u & 0x8000000000000000ull) ? ~u : (u ^ 0x8000000000000000ull);
}

inline double key_value(std::uint64_t k) {
    const std::uint64_t u =
        (k & 0x8000000000000000ull) ? (k ^ 0x8000000000000000ull) : ~k;
    return std::bit_cast<double>(u);
}

// LSD radix sort, 8-bit digits. Much faster than comparison sort on the
// hot path (8192-point projections) and trivially deterministic.
void radix_sort(std::vector<std::uint64_t>& keys, std::vector<std::uint64_t>& scratch) {
    const std::size_t n = keys.size();
    scratch.resize(n);
    std::uint64_t* src = keys.data();
    std::uint64_t* dst = scratch.data();
    for (int pass = 0; pass < 8; ++pass) {
        const int shift = pass * 8;
        std::array<std::size_t, 256> count{};
        for (std::size_t i = 0; i < n; ++i) ++count[(src[i] >> shift) & 0xFF];
        std::size_t total = 0;
        for (std::size_t b = 0; b < 256; ++b) {
            const std::size_t c = count[b];
            count[b] = total;
            total += c;
        }
        for (std::size_t i = 0; i < n; ++i) dst[count[(src[i] >> shift) & 0xFF]++] = src[i];
        std::swap(src, dst);
    }
    // 8 passes: data ends up back in `keys`.
}

struct SwdScratch {
    std::vector<std::uint64_t> px, py, tmp;
};

// Sorted-projection L1 mismatch along one direction (the 1D W1 value).
double directional_w1(const PointCloud& x, const PointCloud& y, const Point3& dir,
                      SwdScratch& s) {
    const std::size_t n = x.size();
    s.px.resize(n);
    s.py.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.px[i] = sort_key(x[i].dot(dir));
    for (std::size_t i = 0; i < n; ++i) s.py[i] = sort_key(y[i].dot(dir));
    radix_sort(s.px, s.tmp);
    radix_sort(s.py, s.tmp);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum += std::abs(key_value(s.px[i]) - key_value(s.py[i]));
    return sum / static_cast<double>(n);
}

}  // namespace

double swd(const PointCloud& x, const PointCloud& y, const DirectionSet& dirs) {
    require_swd_inputs(x, y, dirs);
    const std::size_t l = dirs.size();
    std::vector<double> per_direction(l);
    // One slot per direction, folded in direction order afterwards: the
    // result is identical for any thread count.
    parallel_for(l, [&](std::size_t d) {
        thread_local SwdScratch scratch;  // per worker thread
        per_direction[d] = directional_w1(x, y, dirs[d], scratch);
    });
    double total = 0.0;
    for (double v : per_direction) total += v;
    return total / static_cast<double>(l);
}

std::pair<double, Gradient> swd_value_gradient(const PointCloud& x, const PointCloud& y,
                                               const DirectionSet& dirs) {
    require_swd_inputs(x, y, dirs);
    const std::size_t n = x.size();
    const std::size_t l = dirs.size();

    // Per-direction signed coefficients for each x point; accumulated
    // sequentially over directions at the end (deterministic reduction).
    std::vector<double> per_direction(l);
    std::vector<std::int8_t> coeff(l * n);

    parallel_for(l, [&](std::size_t d) {
        const Point3& dir = dirs[d];
        // (projection, index) pairs; ties resolved by original index.
        std::vector<std::pair<double, std::size_t>> px(n), py(n);
        for (std::size_t i = 0; i < n; ++i) px[i] = {x[i].dot(dir), i};
        for (std::size_t i = 0; i < n; ++i) py[i] = {y[i].dot(dir), i};
        std::sort(px.begin(), px.end());
        std::sort(py.begin(), py.end());
        double sum = 0.0;
        std::int8_t* row = coeff.data() + d * n;
        for (std::size_t r = 0; r < n; ++r) {
            const double diff = px[r].first - py[r].first;
            sum += std::abs(diff);
            row[px[r].second] = diff > kTieEps ? 1 : (diff < -kTieEps ? -1 : 0);
        }
        per_direction[d] = sum / static_cast<double>(n);
    });

    double value = 0.0;
    for (double v : per_direction) value += v;
    value /= static_cast<double>(l);

    Gradient grad(n);
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(l));
    for (std::size_t d = 0; d < l; ++d) {
        const Point3& dir = dirs[d];
        const std::int8_t* row = coeff.data() + d * n;
        for (std::size_t i = 0; i < n; ++i) {
            if (row[i] != 0) grad[i] += dir * (static_cast<double>(row[i]) * scale);
        }
    }
    return {value, std::move(grad)};
}

Gradient swd_gradient(const PointCloud& x, const PointCloud& y, const DirectionSet& dirs) {
    return swd_value_gradient(x, y, dirs).second;
}

}  // namespace pcot
