// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "alpc/regions.hpp"
#include "alpc/scene.hpp"

using namespace alpc;

namespace {

SceneSpec small_spec(std::uint64_t seed) {
  SceneSpec spec;
  spec.extent_x = 14.0;
  spec.extent_y = 14.0;
  spec.density = 10.0;
  spec.buildings = 1;
  spec.trees = 2;
  spec.bushes = 2;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("generation is deterministic under the seed") {
  const SceneSpec spec = small_spec(7);
  const PointCloud a = generate_scene(spec);
  const PointCloud b = generate_scene(spec);
  CHECK(a.x == b.x);
  CHECK(a.gt == b.gt);
  CHECK(a.r == b.r);
  const PointCloud c = generate_scene(small_spec(8));
  CHECK(a.x != c.x);
}

TEST_CASE("every enabled class contributes points, ids contiguous") {
  const SceneSpec spec = small_spec(3);
  REQUIRE(spec.class_count() == 6);
  const PointCloud cloud = generate_scene(spec);
  std::set<int> present(cloud.gt.begin(), cloud.gt.end());
  CHECK(present == std::set<int>{0, 1, 2, 3, 4, 5});
  CHECK(cloud.class_count == 6);
}

TEST_CASE("a five-class spec yields exactly five labels") {
  SceneSpec spec = small_spec(5);
  spec.bushes = 0;
  REQUIRE(spec.class_count() == 5);
  const PointCloud cloud = generate_scene(spec);
  std::set<int> present(cloud.gt.begin(), cloud.gt.end());
  CHECK(present == std::set<int>{0, 1, 2, 3, 4});
  CHECK(cloud.class_count == 5);
  CHECK(spec.class_names().size() == 5);
}

TEST_CASE("points stay inside the declared extents") {
  const PointCloud cloud = generate_scene(small_spec(11));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(cloud.x[i] >= 0.0);
    CHECK(cloud.x[i] <= 14.0);
    CHECK(cloud.y[i] >= 0.0);
    CHECK(cloud.y[i] <= 14.0);
    CHECK(cloud.z[i] >= -1.0);
    CHECK(cloud.z[i] <= 30.0);
  }
}

TEST_CASE("ground-only geometry recovers the flat plane") {
  SceneSpec spec = small_spec(13);
  spec.buildings = 0;
  spec.trees = 0;
  spec.bushes = 0;
  spec.streets = true;  // keeps 2 classes, still flat
  const PointCloud cloud = generate_scene(spec);
  const auto [plane, inliers] = fit_ground_plane(cloud, 200, 0.025, 1);
  CHECK(std::fabs(plane.normal.x) < 1e-3);
  CHECK(std::fabs(plane.normal.y) < 1e-3);
  CHECK(plane.normal.z == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(inliers.size() >= cloud.size() * 9 / 10);
}

TEST_CASE("one-class specs are rejected") {
  SceneSpec spec = small_spec(1);
  spec.streets = false;
  spec.buildings = 0;
  spec.trees = 0;
  spec.bushes = 0;
  CHECK(spec.class_count() == 1);
  CHECK_THROWS_AS(generate_scene(spec), std::invalid_argument);
  spec.density = -1.0;
  CHECK_THROWS_AS(generate_scene(spec), std::invalid_argument);
}

TEST_CASE("scene pair: offset zero duplicates, offset one differs") {
  const SceneSpec spec = small_spec(21);
  const auto [same_a, same_b] = scene_pair(spec, 0);
  CHECK(same_a.x == same_b.x);
  CHECK(same_a.gt == same_b.gt);
  const auto [train, eval] = scene_pair(spec, 1);
  CHECK(train.x != eval.x);
  std::set<int> train_classes(train.gt.begin(), train.gt.end());
  std::set<int> eval_classes(eval.gt.begin(), eval.gt.end());
  CHECK(train_classes == eval_classes);
}

TEST_CASE("pair class frequencies agree within 20 percent at high density") {
  SceneSpec spec;
  spec.extent_x = 30.0;
  spec.extent_y = 30.0;
  spec.density = 50.0;
  spec.buildings = 4;
  spec.trees = 10;
  spec.bushes = 16;
  spec.seed = 31;
  const auto [train, eval] = scene_pair(spec, 1);
  std::vector<double> ft(6, 0.0), fe(6, 0.0);
  for (const int g : train.gt) ft[g] += 1.0;
  for (const int g : eval.gt) fe[g] += 1.0;
  for (int c = 0; c < 6; ++c) {
    ft[c] /= static_cast<double>(train.size());
    fe[c] /= static_cast<double>(eval.size());
    CHECK(std::fabs(ft[c] - fe[c]) <= 0.2 * std::max(ft[c], fe[c]));
  }
}

TEST_CASE("partial mode masks about half of the labels") {
  SceneSpec spec = small_spec(41);
  spec.partial = true;
  const PointCloud cloud = generate_scene(spec);
  std::size_t masked = 0;
  for (const int g : cloud.gt) masked += g == -1 ? 1 : 0;
  CHECK(masked >= cloud.size() * 2 / 5);
  CHECK(masked <= cloud.size() * 3 / 5);
  for (const char k : cloud.known) CHECK(k == 0);
}

TEST_CASE("spec files parse with flag overrides intact") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "alpc_scene_spec.txt";
  {
    std::ofstream out(path);
    out << "# comment line\n"
        << "extent_x=20\n"
        << "extent_y = 18\n"
        << "density=5\n"
        << "buildings=2\n"
        << "trees=0\n"
        << "bushes=1\n"
        << "streets=0\n"
        << "partial=1\n"
        << "seed=99\n";
  }
  const SceneSpec spec = SceneSpec::from_file(path.string());
  CHECK(spec.extent_x == 20.0);
  CHECK(spec.extent_y == 18.0);
  CHECK(spec.density == 5.0);
  CHECK(spec.buildings == 2);
  CHECK(spec.trees == 0);
  CHECK(spec.bushes == 1);
  CHECK_FALSE(spec.streets);
  CHECK(spec.partial);
  CHECK(spec.seed == 99);
  CHECK(spec.class_count() == 3);
  {
    std::ofstream out(path);
    out << "bogus_key=1\n";
  }
  CHECK_THROWS(SceneSpec::from_file(path.string()));
  fs::remove(path);
}
