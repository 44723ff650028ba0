#include "pcot/transforms.hpp"

#include <cmath>
#include <stdexcept>

#include "pcot/rng.hpp"

namespace pcot {

PointCloud jitter(const PointCloud& cloud, double sigma, std::uint64_t seed) {
    if (!std::isfinite(sigma) || sigma < 0.0)
        throw std::invalid_argument("jitter: sigma must be finite and >= 0");
    if (sigma == 0.0) return cloud;
    PointCloud out = cloud;
    Rng rng(seed);
    for (Point3& p : out.points) {
        p.x += sigma * rng.normal();
        p.y += sigma * rng.normal();
        p.z += sigma * rng.normal();
    }
    return out;
}

PointCloud rotate_yaw(const PointCloud& cloud, double angle) {
    if (!std::isfinite(angle)) throw std::invalid_argument("rotate_yaw: angle must be finite");
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    PointCloud out = cloud;
    for (Point3& p : out.points) {
        const double x = p.x;
        const double y = p.y;
        p.x = c * x - s * y;
        p.y = s * x + c * y;
    }
    return out;
}

Normalization normalize_to_unit_sphere(const PointCloud& cloud) {
    if (cloud.empty()) throw std::invalid_argument("normalize_to_unit_sphere: empty cloud");
    Normalization result;
    result.center = cloud.centroid();
    result.cloud = cloud;
    for (Point3& p : result.cloud.points) p -= result.center;

    double max_norm = 0.0;
    for (const Point3& p : result.cloud.points) max_norm = std::max(max_norm, p.norm());
    result.scale = max_norm < 1e-12 ? 1.0 : max_norm;
    if (result.scale != 1.0) {
        for (Point3& p : result.cloud.points) p = p / result.scale;
    }
    return result;
}

PointCloud denormalize(const PointCloud& cloud, const Point3& center, double scale) {
    PointCloud out = cloud;
    for (Point3& p : out.points) p = p * scale + center;
    return out;
}

DirectionSet sample_directions(std::size_t count, std::uint64_t seed) {
    if (count == 0) throw std::invalid_argument("sample_directions: count must be >= 1");
    DirectionSet set;
    set.seed = seed;
    set.directions.reserve(count);
    Rng rng(seed);
    while (set.directions.size() < count) {
        Point3 d{rng.normal(), rng.normal(), rng.normal()};
        const double n = d.norm();
        if (n < 1e-12) continue;  // essentially never
        set.directions.push_back(d / n);
    }
    return set;
}

PointCloud apply_perturbation(const PointCloud& cloud, const RigidPerturbation& p) {
    switch (p.kind) {
        case PerturbationKind::kGaussianJitter:
            return jitter(cloud, p.magnitude, p.seed);
        case PerturbationKind::kYawRotation:
            return rotate_yaw(cloud, p.magnitude);
    }
    throw std::invalid_argument("apply_perturbation: unknown kind");
}

}  // namespace pcot
