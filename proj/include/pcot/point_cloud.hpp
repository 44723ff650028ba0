#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pcot {

/// A single lidar return / 3D point, coordinates in meters.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Point3() = default;
    Point3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Point3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Point3& operator+=(const Point3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Point3& operator-=(const Point3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }

    double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
    double squared_norm() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(squared_norm()); }

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double squared_distance(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Point3& a, const Point3& b) {
    return std::sqrt(squared_distance(a, b));
}

/// Ordered set of 3D points. Order is part of the identity: indices are
/// stable and observable through every transform that preserves size.
struct PointCloud {
    std::vector<Point3> points;

    PointCloud() = default;
    explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    Point3& operator[](std::size_t i) { return points[i]; }
    const Point3& operator[](std::size_t i) const { return points[i]; }

    auto begin() const { return points.begin(); }
    auto end() const { return points.end(); }

    Point3 centroid() const;
    /// Max distance of any point from the centroid.
    double radius() const;
    bool all_finite() const;
};

/// L unit directions on S^2, tagged with the seed that produced them so a
/// run can be replayed exactly. Constructing from explicit vectors checks
/// the unit-norm invariant (1e-12).
struct DirectionSet {
    std::vector<Point3> directions;
    std::uint64_t seed = 0;

    DirectionSet() = default;
    DirectionSet(std::vector<Point3> dirs, std::uint64_t seed_);

    std::size_t size() const { return directions.size(); }
    bool empty() const { return directions.empty(); }
    const Point3& operator[](std::size_t i) const { return directions[i]; }
};

enum class PerturbationKind { kGaussianJitter, kYawRotation };

/// One point of a sensitivity sweep: either Gaussian jitter of a given
/// sigma (meters) or a yaw rotation of a given angle (radians).
struct RigidPerturbation {
    PerturbationKind kind = PerturbationKind::kGaussianJitter;
    double magnitude = 0.0;
    std::uint64_t seed = 0;
};

}  // namespace pcot
