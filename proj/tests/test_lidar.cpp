#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "pcot/errors.hpp"
#include "pcot/lidar.hpp"

using namespace pcot;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::set<std::array<double, 3>> as_set(const PointCloud& c) {
    std::set<std::array<double, 3>> s;
    for (const Point3& p : c.points) s.insert({p.x, p.y, p.z});
    return s;
}

}  // namespace

TEST_CASE("read_scan rejects empty and malformed files") {
    TempDir dir("pcot_scan_err");
    const std::string empty = (dir.path / "empty.bin").string();
    std::ofstream(empty, std::ios::binary).close();
    CHECK_THROWS_AS(read_scan(empty), IoError);

    const std::string ragged = (dir.path / "ragged.bin").string();
    {
        std::ofstream out(ragged, std::ios::binary);
        const char junk[21] = {0};
        out.write(junk, sizeof(junk));
    }
    CHECK_THROWS_WITH_AS(read_scan(ragged), doctest::Contains("offset"), IoError);
}

TEST_CASE("read_scan parses hand-written records in order") {
    TempDir dir("pcot_scan_two");
    const std::string path = (dir.path / "two.bin").string();
    {
        std::ofstream out(path, std::ios::binary);
        const float records[8] = {1.5f, -2.0f, 0.25f, 0.9f, 3.0f, 4.0f, 5.0f, 0.1f};
        out.write(reinterpret_cast<const char*>(records), sizeof(records));
    }
    const PointCloud cloud = read_scan(path);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud[0].x == 1.5);
    CHECK(cloud[0].y == -2.0);
    CHECK(cloud[0].z == 0.25);
    CHECK(cloud[1].x == 3.0);
}

TEST_CASE("read_scan skips non-finite records with a count") {
    TempDir dir("pcot_scan_nan");
    const std::string path = (dir.path / "nan.bin").string();
    {
        std::ofstream out(path, std::ios::binary);
        const float nanf = std::numeric_limits<float>::quiet_NaN();
        const float records[8] = {1.0f, 2.0f, 3.0f, 0.0f, nanf, 0.0f, 0.0f, 0.0f};
        out.write(reinterpret_cast<const char*>(records), sizeof(records));
    }
    std::size_t skipped = 0;
    const PointCloud cloud = read_scan(path, &skipped);
    CHECK(cloud.size() == 1);
    CHECK(skipped == 1);
}

TEST_CASE("scan writer and reader round trip") {
    TempDir dir("pcot_scan_rt");
    const std::string path = (dir.path / "scan.bin").string();
    PointCloud cloud;
    {
        Rng rng(5);
        for (int i = 0; i < 1000; ++i) {
            // float-representable coordinates round trip exactly
            cloud.points.push_back({static_cast<float>(rng.normal() * 20.0),
                                    static_cast<float>(rng.normal() * 20.0),
                                    static_cast<float>(rng.normal() * 2.0)});
        }
    }
    write_scan(path, cloud);
    const PointCloud back = read_scan(path);
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK(back[i].x == cloud[i].x);
        CHECK(back[i].y == cloud[i].y);
        CHECK(back[i].z == cloud[i].z);
    }
}

TEST_CASE("rasterize maps the +x mid-fov ray to the grid center") {
    const std::size_t h = 64, w = 2048;
    const double mid_elev_deg = (kDefaultFovUpDeg + kDefaultFovDownDeg) / 2.0;
    const double elev = mid_elev_deg * std::numbers::pi / 180.0;
    const double range = 10.0;
    PointCloud cloud;
    cloud.points.push_back({range * std::cos(elev), 0.0, range * std::sin(elev)});
    const RangeImage img = rasterize(cloud, h, w);
    REQUIRE(img.occupied_count() == 1);
    // azimuth 0 lands in the middle column, mid elevation in the middle row
    CHECK(img.at(h / 2, w / 2).occupied);
    CHECK(img.at(h / 2, w / 2).depth == doctest::Approx(range));
}

TEST_CASE("rasterize keeps the nearer return on collision") {
    PointCloud cloud;
    const double elev = -0.1, az = 0.3;
    for (const double range : {7.0, 5.0}) {
        cloud.points.push_back({range * std::cos(elev) * std::cos(az),
                                range * std::cos(elev) * std::sin(az),
                                range * std::sin(elev)});
    }
    const RangeImage img = rasterize(cloud, 64, 2048);
    CHECK(img.occupied_count() == 1);
    CHECK(img.collisions == 1);
    const PointCloud kept = img.collect_points();
    CHECK(kept[0].norm() == doctest::Approx(5.0));
}

TEST_CASE("rasterize skips zero-range points and accounts for every loss") {
    PointCloud cloud = oracles::random_cloud(500, 3, 10.0);
    cloud.points.push_back({0.0, 0.0, 0.0});
    const RangeImage img = rasterize(cloud, 16, 64);
    CHECK(img.skipped_zero_range == 1);
    CHECK(cloud.size() - img.occupied_count() == img.collisions + img.skipped_zero_range);
}

TEST_CASE("synthetic scans rasterize bijectively") {
    const std::size_t h = 16, w = 128;
    const PointCloud scan = synthetic_scan(h, w, kDefaultFovUpDeg, kDefaultFovDownDeg, 9);
    REQUIRE(scan.size() == h * w);
    const RangeImage img = rasterize(scan, h, w);
    CHECK(img.occupied_count() == h * w);
    CHECK(img.collisions == 0);
    // row-major generation means cell (r,c) holds point r*w+c
    CHECK(img.at(3, 17).point_index == 3 * w + 17);
}

TEST_CASE("decimate_rows keeps the requested phase") {
    const std::size_t h = 16, w = 64;
    const PointCloud scan = synthetic_scan(h, w, kDefaultFovUpDeg, kDefaultFovDownDeg, 4);
    const RangeImage img = rasterize(scan, h, w);
    const PointCloud low = decimate_rows(img, 2);
    CHECK(low.size() == h * w / 2);
    // surviving points come from even rows: indices r*w+c with even r
    const auto low_set = as_set(low);
    for (std::size_t r = 0; r < h; ++r) {
        const bool should_survive = r % 2 == 0;
        const Point3& probe = scan[r * w + 7];
        CHECK(low_set.count({probe.x, probe.y, probe.z}) == (should_survive ? 1u : 0u));
    }
    const PointCloud odd = decimate_rows(img, 2, 1);
    CHECK(odd.size() == h * w / 2);
}

TEST_CASE("decimate_rows errors") {
    const PointCloud scan = synthetic_scan(16, 64, kDefaultFovUpDeg, kDefaultFovDownDeg, 4);
    const RangeImage img = rasterize(scan, 16, 64);
    CHECK_THROWS_AS(decimate_rows(img, 3), std::invalid_argument);   // does not divide 16
    CHECK_THROWS_AS(decimate_rows(img, 1), std::invalid_argument);
    CHECK_THROWS_AS(decimate_rows(img, 2, 2), std::invalid_argument);

    // a single occupied cell in an odd row leaves nothing after factor-2
    PointCloud one;
    const double elev_row1 = (kDefaultFovUpDeg - (1.5 / 16.0) * (kDefaultFovUpDeg - kDefaultFovDownDeg)) *
                             std::numbers::pi / 180.0;
    one.points.push_back(
        {5.0 * std::cos(elev_row1), 0.0, 5.0 * std::sin(elev_row1)});
    const RangeImage single = rasterize(one, 16, 64);
    REQUIRE(single.occupied_count() == 1);
    CHECK_THROWS_AS(decimate_rows(single, 2), EmptyResultError);
}

TEST_CASE("make_pair halves fully occupied grids and nests exactly") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const PointCloud scan = synthetic_scan(64, 256, kDefaultFovUpDeg, kDefaultFovDownDeg, seed);
        const RangeImage img = rasterize(scan, 64, 256);
        const auto [low, high] = make_pair(img, 2);
        CHECK(high.size() == 64 * 256);
        CHECK(low.size() == high.size() / 2);
        const auto high_set = as_set(high);
        for (const Point3& p : low.points) CHECK(high_set.count({p.x, p.y, p.z}) == 1);
    }
    const PointCloud scan = synthetic_scan(64, 128, kDefaultFovUpDeg, kDefaultFovDownDeg, 5);
    const RangeImage img = rasterize(scan, 64, 128);
    const auto [low4, high4] = make_pair(img, 4);
    CHECK(low4.size() == high4.size() / 4);
}

TEST_CASE("decimated output re-occupies a half-height grid exactly") {
    // surviving rows land bijectively on the rows of an H/factor raster
    const std::size_t h = 16, w = 64;
    const PointCloud scan = synthetic_scan(h, w, kDefaultFovUpDeg, kDefaultFovDownDeg, 11);
    const RangeImage img = rasterize(scan, h, w);
    const auto [low, high] = make_pair(img, 2);
    const RangeImage relow = rasterize(low, h / 2, w, kDefaultFovUpDeg, kDefaultFovDownDeg);
    CHECK(relow.occupied_count() == low.size());
    CHECK(relow.collisions == 0);
    // cell (r, c) of the half grid holds the point of original row 2r
    CHECK(relow.at(3, 10).occupied);
    const Point3 expect = scan[(2 * 3) * w + 10];
    const Point3 got = relow.source[relow.at(3, 10).point_index];
    CHECK(got.x == expect.x);
    CHECK(got.z == expect.z);
}

TEST_CASE("make_pair on partial scans keeps low inside high") {
    const PointCloud scan = synthetic_scan(32, 128, kDefaultFovUpDeg, kDefaultFovDownDeg, 6, 0.7);
    const RangeImage img = rasterize(scan, 32, 128);
    const auto [low, high] = make_pair(img, 2);
    CHECK(low.size() <= high.size());
    const auto high_set = as_set(high);
    for (const Point3& p : low.points) CHECK(high_set.count({p.x, p.y, p.z}) == 1);
}

TEST_CASE("extract_patches covers the whole cloud when patch_size == n") {
    const PointCloud cloud = oracles::random_cloud(50, 7);
    const auto patches = extract_patches(cloud, 50, 1, 3, "scan0");
    REQUIRE(patches.size() == 1);
    CHECK(patches[0].points.size() == 50);
    CHECK(patches[0].scan_id == "scan0");
    CHECK(as_set(patches[0].points) == as_set(cloud));
    // ordered ascending by distance from the center
    const Point3 center = cloud[patches[0].center_index];
    double prev = -1.0;
    for (const Point3& p : patches[0].points.points) {
        const double d = oracles::dist(p, center);
        CHECK(d >= prev - 1e-12);
        prev = d;
    }
}

TEST_CASE("extract_patches separates well-separated clusters") {
    PointCloud cloud;
    const PointCloud a = oracles::random_cloud(100, 8);
    for (const Point3& p : a.points) cloud.points.push_back(p);
    for (const Point3& p : a.points) cloud.points.push_back(p + Point3{100.0, 0.0, 0.0});
    const auto patches = extract_patches(cloud, 100, 2, 1);
    REQUIRE(patches.size() == 2);
    for (const auto& patch : patches) {
        // every patch stays within one cluster
        const double x0 = patch.points[0].x;
        for (const Point3& p : patch.points.points)
            CHECK(std::abs(p.x - x0) < 50.0);
    }
}

TEST_CASE("extract_patches is deterministic and validates sizes") {
    const PointCloud cloud = oracles::random_cloud(64, 9);
    const auto a = extract_patches(cloud, 16, 3, 42);
    const auto b = extract_patches(cloud, 16, 3, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].center_index == b[i].center_index);
        CHECK(as_set(a[i].points) == as_set(b[i].points));
    }
    CHECK_THROWS_AS(extract_patches(cloud, 65, 1, 0), std::invalid_argument);
}

TEST_CASE("range dump shape") {
    PointCloud one;
    one.points.push_back({5.0, 0.0, -1.0});
    const RangeImage img = rasterize(one, 2, 4);
    std::ostringstream os;
    write_range_dump(os, img);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header.rfind("# pcot range image rows=2 cols=4", 0) == 0);
    std::size_t zero_count = 0, lines = 0;
    std::string tok;
    while (is >> tok) {
        ++lines;
        if (tok == "0") ++zero_count;
    }
    CHECK(lines == 8);
    CHECK(zero_count == 7);  // one occupied cell
}
