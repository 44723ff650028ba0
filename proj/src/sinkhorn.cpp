#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pcot/metrics.hpp"

namespace pcot {

namespace {

// log(sum(exp(v))) over a strided row, max-shifted.
double log_sum_exp(const double* v, std::size_t n, std::size_t stride) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i * stride]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i * stride] - m);
    return m + std::log(s);
}

}  // namespace

double sinkhorn(const PointCloud& x, const PointCloud& y, double regularization,
                std::size_t max_iters) {
    if (x.empty() || y.empty()) throw std::invalid_argument("sinkhorn: clouds must be non-empty");
    if (!(regularization > 0.0) || !std::isfinite(regularization))
        throw std::invalid_argument("sinkhorn: regularization must be finite and > 0");

    const std::size_t n = x.size();
    const std::size_t m = y.size();
    const double eps = regularization;
    const double log_a = -std::log(static_cast<double>(n));  // uniform marginals
    const double log_b = -std::log(static_cast<double>(m));

    std::vector<double> cost(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = distance(x[i], y[j]);

    // Scaled potentials: P_ij = exp(f_i + g_j - C_ij / eps) with f, g
    // already divided by eps. Alternate exact row/column balancing in the
    // log domain.
    std::vector<double> f(n, 0.0), g(m, 0.0);
    std::vector<double> row_buf(m), col_buf(n);

    double violation = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < max_iters && violation >= 1e-9; ++it) {
        // f_i <- log(a_i) - LSE_j(g_j - C_ij/eps)
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = cost.data() + i * m;
            for (std::size_t j = 0; j < m; ++j) row_buf[j] = g[j] - row[j] / eps;
            f[i] = log_a - log_sum_exp(row_buf.data(), m, 1);
        }
        // g_j <- log(b_j) - LSE_i(f_i - C_ij/eps)
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) col_buf[i] = f[i] - cost[i * m + j] / eps;
            g[j] = log_b - log_sum_exp(col_buf.data(), n, 1);
        }
        // Column marginals are exact after the g update; the row marginals
        // carry the residual.
        violation = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = cost.data() + i * m;
            double row_sum = 0.0;
            for (std::size_t j = 0; j < m; ++j) row_sum += std::exp(f[i] + g[j] - row[j] / eps);
            violation = std::max(violation, std::abs(row_sum - std::exp(log_a)));
        }
    }

    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = cost.data() + i * m;
        for (std::size_t j = 0; j < m; ++j)
            value += std::exp(f[i] + g[j] - row[j] / eps) * row[j];
    }
    return std::max(value, 0.0);
}

}  // namespace pcot
