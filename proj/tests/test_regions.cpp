// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "alpc/regions.hpp"
#include "alpc/scene.hpp"
#include "oracles.hpp"

using namespace alpc;

namespace {

PointCloud cloud_from_xyz(std::vector<double> x, std::vector<double> y,
                          std::vector<double> z) {
  PointCloud cloud;
  cloud.class_count = 2;
  const std::size_t n = x.size();
  cloud.x = std::move(x);
  cloud.y = std::move(y);
  cloud.z = std::move(z);
  cloud.r.assign(n, 0);
  cloud.g.assign(n, 0);
  cloud.b.assign(n, 0);
  cloud.gt.assign(n, 0);
  cloud.known.assign(n, 0);
  return cloud;
}

const Region& region_of(const RegionSet& set, std::int64_t i, std::int64_t j) {
  for (const Region& region : set.regions)
    if (region.cell && (*region.cell)[0] == i && (*region.cell)[1] == j) return region;
  REQUIRE(false);
  return set.regions.front();
}

}  // namespace

TEST_CASE("column coordinates follow floor semantics") {
  const PointCloud cloud =
      cloud_from_xyz({1.2, 0.0, -0.1}, {0.3, 0.0, 0.0}, {5.0, -2.0, 7.0});
  const RegionSet set = assign_columns(cloud, 0.5);
  validate_partition(set);
  CHECK(region_of(set, 2, 0).points == std::vector<std::uint32_t>{0});
  CHECK(region_of(set, 0, 0).points == std::vector<std::uint32_t>{1});
  CHECK(region_of(set, -1, 0).points == std::vector<std::uint32_t>{2});
  CHECK(set.resolution == 0.5);
}

TEST_CASE("negative x lands in column -1 at r=1") {
  const PointCloud cloud = cloud_from_xyz({-0.1}, {0.0}, {0.0});
  const RegionSet set = assign_columns(cloud, 1.0);
  CHECK(set.regions.size() == 1);
  CHECK((*set.regions[0].cell)[0] == -1);
  CHECK((*set.regions[0].cell)[1] == 0);
}

TEST_CASE("assign_columns rejects non-positive r") {
  const PointCloud cloud = cloud_from_xyz({0.0}, {0.0}, {0.0});
  CHECK_THROWS_AS(assign_columns(cloud, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(assign_columns(cloud, -1.0), std::invalid_argument);
}

TEST_CASE("assign_columns rejects coordinates beyond the cell range") {
  const PointCloud cloud = cloud_from_xyz({1e300}, {0.0}, {0.0});
  CHECK_THROWS_AS(assign_columns(cloud, 0.5), std::invalid_argument);
}

TEST_CASE("columns partition random scenes and respect the count bound") {
  for (const std::uint64_t seed : {10u, 11u, 12u}) {
    SceneSpec spec;
    spec.extent_x = 12.0;
    spec.extent_y = 9.0;
    spec.density = 6.0;
    spec.buildings = 1;
    spec.trees = 2;
    spec.bushes = 2;
    spec.seed = seed;
    const PointCloud cloud = generate_scene(spec);
    for (const double r : {0.5, 1.0, 3.0}) {
      const RegionSet set = assign_columns(cloud, r);
      validate_partition(set);
      const std::size_t bound = static_cast<std::size_t>(std::ceil(12.0 / r)) *
                                static_cast<std::size_t>(std::ceil(9.0 / r));
      CHECK(set.regions.size() <= bound);
      for (const Region& region : set.regions) {
        CHECK(region.kind == RegionKind::Column);
        const AABB box = bounding_box(cloud, region.points);
        CHECK(region.bbox.min.x == box.min.x);
        CHECK(region.bbox.max.z == box.max.z);
      }
    }
  }
}

TEST_CASE("column assignment is translation covariant") {
  const PointCloud base = oracles::random_cloud(21, 300, 7.0);
  const double r = 0.5;
  const RegionSet before = assign_columns(base, r);
  PointCloud shifted = base;
  const std::int64_t mx = 3, my = -2;
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    shifted.x[i] += static_cast<double>(mx) * r;
    shifted.y[i] += static_cast<double>(my) * r;
  }
  const RegionSet after = assign_columns(shifted, r);
  REQUIRE(after.regions.size() == before.regions.size());
  for (std::size_t k = 0; k < before.regions.size(); ++k) {
    CHECK((*after.regions[k].cell)[0] == (*before.regions[k].cell)[0] + mx);
    CHECK((*after.regions[k].cell)[1] == (*before.regions[k].cell)[1] + my);
    CHECK(after.regions[k].points == before.regions[k].points);
  }
}

TEST_CASE("ransac recovers a dominant plane among outliers") {
  std::vector<double> x, y, z;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    x.push_back(u(rng));
    y.push_back(u(rng));
    z.push_back(0.0);
  }
  for (int i = 0; i < 5; ++i) {
    x.push_back(u(rng));
    y.push_back(u(rng));
    z.push_back(10.0);
  }
  const PointCloud cloud = cloud_from_xyz(x, y, z);
  const auto [plane, inliers] = fit_ground_plane(cloud, 100, 0.1, 7);
  CHECK(plane.normal.z == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::fabs(plane.offset) < 1e-9);
  CHECK(inliers.size() == 100);
}

TEST_CASE("all coplanar points are all inliers") {
  const PointCloud cloud = oracles::random_cloud(31, 60, 5.0, /*planar=*/true);
  const auto [plane, inliers] = fit_ground_plane(cloud, 50, 0.05, 1);
  CHECK(inliers.size() == cloud.size());
}

TEST_CASE("tilted plane z = 0.1 x is recovered analytically") {
  std::vector<double> x, y, z;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    const double px = u(rng), py = u(rng);
    x.push_back(px);
    y.push_back(py);
    z.push_back(0.1 * px);
  }
  const PointCloud cloud = cloud_from_xyz(x, y, z);
  const auto [plane, inliers] = fit_ground_plane(cloud, 100, 0.01, 9);
  const double s = std::sqrt(1.01);
  CHECK(plane.normal.x == doctest::Approx(-0.1 / s).epsilon(1e-6));
  CHECK(std::fabs(plane.normal.y) < 1e-6);
  CHECK(plane.normal.z == doctest::Approx(1.0 / s).epsilon(1e-6));
  CHECK(inliers.size() == cloud.size());
}

TEST_CASE("collinear points cannot fit a plane") {
  std::vector<double> x, y, z;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i);
    z.push_back(-i);
  }
  const PointCloud cloud = cloud_from_xyz(x, y, z);
  CHECK_THROWS_AS(fit_ground_plane(cloud, 50, 0.1, 1), std::runtime_error);
}

namespace {

std::vector<int> run_dbscan(const PointCloud& cloud, double eps, int min_pts) {
  std::vector<std::uint32_t> all(cloud.size());
  for (std::uint32_t i = 0; i < cloud.size(); ++i) all[i] = i;
  const SpatialIndex index = SpatialIndex::build(cloud);
  return dbscan(cloud, all, eps, min_pts, index);
}

}  // namespace

TEST_CASE("two far blobs become two clusters") {
  std::vector<double> x, y, z;
  for (int i = 0; i < 5; ++i) {
    x.push_back(0.1 * i);
    y.push_back(0.0);
    z.push_back(0.0);
  }
  for (int i = 0; i < 5; ++i) {
    x.push_back(100.0 + 0.1 * i);
    y.push_back(0.0);
    z.push_back(0.0);
  }
  const PointCloud cloud = cloud_from_xyz(x, y, z);
  const std::vector<int> labels = run_dbscan(cloud, 1.0, 3);
  std::set<int> clusters(labels.begin(), labels.end());
  CHECK(clusters == std::set<int>{0, 1});
  CHECK(labels[0] == labels[4]);
  CHECK(labels[5] == labels[9]);
  CHECK(labels[0] != labels[5]);
}

TEST_CASE("an isolated point is noise under min_pts=2") {
  std::vector<double> x = {0.0, 0.1, 0.2, 50.0};
  std::vector<double> y(4, 0.0), z(4, 0.0);
  const PointCloud cloud = cloud_from_xyz(x, y, z);
  const std::vector<int> labels = run_dbscan(cloud, 1.0, 2);
  CHECK(labels[3] == -1);
  CHECK(labels[0] == 0);
}

TEST_CASE("a unit-spaced chain is one cluster") {
  std::vector<double> x, y, z;
  for (int i = 0; i < 30; ++i) {
    x.push_back(static_cast<double>(i));
    y.push_back(0.0);
    z.push_back(0.0);
  }
  const PointCloud cloud = cloud_from_xyz(x, y, z);
  const std::vector<int> labels = run_dbscan(cloud, 1.0, 2);
  for (const int l : labels) CHECK(l == 0);
}

TEST_CASE("dbscan matches the naive oracle up to relabeling") {
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<std::size_t> size(2, 250);
  std::uniform_real_distribution<double> eps(0.2, 2.5);
  std::uniform_int_distribution<int> mp(1, 6);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = size(rng);
    const PointCloud cloud =
        oracles::random_cloud(500 + trial, n, 6.0, trial % 3 == 0, trial % 5 == 0);
    const double e = eps(rng);
    const int min_pts = mp(rng);
    const std::vector<int> fast = run_dbscan(cloud, e, min_pts);
    const std::vector<int> slow = oracles::naive_dbscan(cloud, e, min_pts);
    CHECK(oracles::canonical_clusters(fast) == oracles::canonical_clusters(slow));
  }
}

TEST_CASE("kmeans with one cluster returns the mean") {
  const std::vector<double> pts = {0.0, 0.0, 2.0, 0.0, 4.0, 6.0};
  const KmeansResult res = kmeans(pts, 2, 1, 50, 1);
  CHECK(res.centroids[0] == doctest::Approx(2.0));
  CHECK(res.centroids[1] == doctest::Approx(2.0));
  for (const int a : res.assignments) CHECK(a == 0);
}

TEST_CASE("kmeans with k = count reaches objective zero on distinct points") {
  const std::vector<double> pts = {0.0, 0.0, 5.0, 0.0, 0.0, 5.0, 7.0, 7.0};
  const KmeansResult res = kmeans(pts, 2, 4, 50, 3);
  CHECK(res.objective_history.back() == doctest::Approx(0.0));
  std::set<int> used(res.assignments.begin(), res.assignments.end());
  CHECK(used.size() == 4);
}

TEST_CASE("kmeans rejects k above the point count") {
  const std::vector<double> pts = {0.0, 0.0};
  CHECK_THROWS_AS(kmeans(pts, 2, 2, 10, 1), std::invalid_argument);
}

TEST_CASE("two blobs match the best-of-all-partitions oracle") {
  // 12 points, 6 per blob
  std::vector<double> pts;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 6; ++i) {
    pts.push_back(u(rng));
    pts.push_back(u(rng));
  }
  for (int i = 0; i < 6; ++i) {
    pts.push_back(10.0 + u(rng));
    pts.push_back(10.0 + u(rng));
  }
  const std::size_t n = 12;

  // exhaustive best 2-partition by summed squared distance to part means
  double best = 1e300;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < (1u << n) - 1; ++mask) {
    double sum[2][2] = {{0, 0}, {0, 0}};
    int count[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const int side = (mask >> i) & 1;
      sum[side][0] += pts[2 * i];
      sum[side][1] += pts[2 * i + 1];
      ++count[side];
    }
    if (count[0] == 0 || count[1] == 0) continue;
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int side = (mask >> i) & 1;
      const double dx = pts[2 * i] - sum[side][0] / count[side];
      const double dy = pts[2 * i + 1] - sum[side][1] / count[side];
      obj += dx * dx + dy * dy;
    }
    if (obj < best) {
      best = obj;
      best_mask = mask;
    }
  }
  // optimal partition = blob membership
  for (std::size_t i = 1; i < 6; ++i)
    CHECK(((best_mask >> i) & 1) == (best_mask & 1));
  for (std::size_t i = 7; i < 12; ++i)
    CHECK(((best_mask >> i) & 1) == ((best_mask >> 6) & 1));

  const KmeansResult res = kmeans(pts, 2, 2, 100, 5);
  CHECK(res.objective_history.back() == doctest::Approx(best).epsilon(1e-9));
  for (std::size_t i = 1; i < 6; ++i) CHECK(res.assignments[i] == res.assignments[0]);
  for (std::size_t i = 7; i < 12; ++i) CHECK(res.assignments[i] == res.assignments[6]);
  CHECK(res.assignments[0] != res.assignments[6]);
}

TEST_CASE("kmeans objective never increases") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<double> pts;
  for (int i = 0; i < 400; ++i) pts.push_back(u(rng));
  for (const int k : {1, 2, 5, 13}) {
    const KmeansResult res = kmeans(pts, 2, k, 60, 99);
    for (std::size_t i = 1; i < res.objective_history.size(); ++i)
      CHECK(res.objective_history[i] <= res.objective_history[i - 1] + 1e-9);
  }
}

TEST_CASE("supervoxels on a flat plane are ground regions only") {
  SceneSpec spec;
  spec.extent_x = 10.0;
  spec.extent_y = 10.0;
  spec.density = 8.0;
  spec.buildings = 0;
  spec.trees = 0;
  spec.bushes = 0;
  spec.streets = true;  // keeps two classes; geometry is still one plane
  spec.seed = 5;
  const PointCloud cloud = generate_scene(spec);
  SupervoxelParams params;
  params.seed = 11;
  const RegionSet set = build_supervoxels(cloud, params);
  validate_partition(set);
  std::size_t objects = 0;
  for (const Region& region : set.regions)
    objects += region.kind == RegionKind::SupervoxelObject ? 1 : 0;
  CHECK(objects == 0);
  const double area = 100.0;
  const std::size_t expected_k = static_cast<std::size_t>(
      std::ceil(area / params.ground_region_target_area));
  CHECK(set.regions.size() <= expected_k);
  CHECK(set.regions.size() >= expected_k / 2);
}

TEST_CASE("a detached box over a plane becomes object regions") {
  std::vector<double> x, y, z;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (int i = 0; i < 400; ++i) {
    x.push_back(u(rng));
    y.push_back(u(rng));
    z.push_back(0.0);
  }
  const std::size_t box_start = x.size();
  std::uniform_real_distribution<double> v(3.0, 4.0);
  for (int i = 0; i < 60; ++i) {
    x.push_back(v(rng));
    y.push_back(v(rng));
    z.push_back(v(rng));  // 3..4 m up
  }
  const PointCloud cloud = cloud_from_xyz(x, y, z);
  SupervoxelParams params;
  params.eps = 0.6;
  params.min_pts = 4;
  params.seed = 3;
  const RegionSet set = build_supervoxels(cloud, params);
  validate_partition(set);
  std::vector<const Region*> objects;
  for (const Region& region : set.regions)
    if (region.kind == RegionKind::SupervoxelObject) objects.push_back(&region);
  REQUIRE(objects.size() >= 1);
  std::size_t object_points = 0;
  for (const Region* region : objects) {
    object_points += region->points.size();
    for (const std::uint32_t p : region->points) CHECK(p >= box_start);
  }
  CHECK(object_points == 60);
}

TEST_CASE("supervoxels are deterministic under the seed") {
  SceneSpec spec;
  spec.extent_x = 12.0;
  spec.extent_y = 12.0;
  spec.density = 6.0;
  spec.buildings = 1;
  spec.trees = 2;
  spec.bushes = 2;
  spec.seed = 77;
  const PointCloud cloud = generate_scene(spec);
  SupervoxelParams params;
  params.seed = 13;
  const RegionSet a = build_supervoxels(cloud, params);
  const RegionSet b = build_supervoxels(cloud, params);
  REQUIRE(a.regions.size() == b.regions.size());
  for (std::size_t i = 0; i < a.regions.size(); ++i) {
    CHECK(a.regions[i].kind == b.regions[i].kind);
    CHECK(a.regions[i].points == b.regions[i].points);
  }
}
