#pragma once

#include <cstdint>

#include "pcot/point_cloud.hpp"

namespace pcot {

/// Adds an independent zero-mean Gaussian of standard deviation `sigma`
/// to every coordinate. sigma = 0 returns a bitwise copy.
PointCloud jitter(const PointCloud& cloud, double sigma, std::uint64_t seed);

/// Rotates every point about the z axis by `angle` radians.
PointCloud rotate_yaw(const PointCloud& cloud, double angle);

struct Normalization {
    PointCloud cloud;
    Point3 center;
    double scale = 1.0;
};

/// Centers the cloud at its centroid and scales the farthest point to unit
/// norm. An all-coincident cloud keeps scale 1 so the transform stays
/// invertible.
Normalization normalize_to_unit_sphere(const PointCloud& cloud);

/// Inverse of normalize_to_unit_sphere.
PointCloud denormalize(const PointCloud& cloud, const Point3& center, double scale);

/// L i.i.d. uniform directions on the unit sphere (normalized isotropic
/// Gaussians), deterministic per seed.
DirectionSet sample_directions(std::size_t count, std::uint64_t seed);

/// Applies a perturbation record (jitter or yaw rotation).
PointCloud apply_perturbation(const PointCloud& cloud, const RigidPerturbation& p);

}  // namespace pcot
