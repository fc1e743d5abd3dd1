// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "alpc/selection.hpp"
#include "oracles.hpp"

using namespace alpc;

namespace {

ProbabilityTensor tensor_from_rows(int members, std::size_t points, int classes,
                                   const std::vector<double>& values) {
  ProbabilityTensor t;
  t.members = members;
  t.points = points;
  t.classes = classes;
  t.values = values;
  return t;
}

// regions over a 1D arrangement: sizes[i] consecutive points each
RegionSet make_regions(const PointCloud& cloud, const std::vector<std::size_t>& sizes) {
  RegionSet set;
  set.total_points = cloud.size();
  std::uint32_t next = 0;
  int id = 0;
  for (const std::size_t size : sizes) {
    Region region;
    region.id = id++;
    for (std::size_t k = 0; k < size; ++k) region.points.push_back(next++);
    region.bbox = bounding_box(cloud, region.points);
    set.regions.push_back(std::move(region));
  }
  return set;
}

PointCloud line_cloud(std::size_t n, double spacing = 1.0) {
  PointCloud cloud;
  cloud.class_count = 2;
  for (std::size_t i = 0; i < n; ++i) {
    cloud.x.push_back(static_cast<double>(i) * spacing);
    cloud.y.push_back(0.0);
    cloud.z.push_back(0.0);
  }
  cloud.r.assign(n, 0);
  cloud.g.assign(n, 0);
  cloud.b.assign(n, 0);
  cloud.gt.assign(n, 0);
  cloud.known.assign(n, 0);
  return cloud;
}

}  // namespace

TEST_CASE("ensemble mean averages member rows") {
  const ProbabilityTensor t =
      tensor_from_rows(2, 1, 2, {1.0, 0.0, 0.0, 1.0});  // member rows (1,0), (0,1)
  const std::vector<double> mean = ensemble_mean_proba(t);
  CHECK(mean[0] == doctest::Approx(0.5));
  CHECK(mean[1] == doctest::Approx(0.5));
}

TEST_CASE("ensemble mean of a single member is the identity") {
  const ProbabilityTensor t = tensor_from_rows(1, 2, 3, {0.2, 0.3, 0.5, 1.0, 0.0, 0.0});
  CHECK(ensemble_mean_proba(t) == t.values);
}

TEST_CASE("ensemble mean rows stay normalized on random tensors") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbabilityTensor t;
  t.members = 4;
  t.points = 50;
  t.classes = 5;
  t.values.resize(4 * 50 * 5);
  for (int m = 0; m < 4; ++m) {
    for (std::size_t p = 0; p < 50; ++p) {
      double total = 0.0;
      double* row = t.row(m, p);
      for (int c = 0; c < 5; ++c) total += row[c] = u(rng) + 1e-3;
      for (int c = 0; c < 5; ++c) row[c] /= total;
    }
  }
  const std::vector<double> mean = ensemble_mean_proba(t);
  for (std::size_t p = 0; p < 50; ++p) {
    double total = 0.0;
    for (int c = 0; c < 5; ++c) total += mean[p * 5 + c];
    CHECK(std::fabs(total - 1.0) <= 1e-9);
  }
}

TEST_CASE("variation ratio counts diverging votes") {
  // N=4, all vote class 2
  {
    std::vector<double> rows;
    for (int m = 0; m < 4; ++m) rows.insert(rows.end(), {0.1, 0.1, 0.8});
    CHECK(var_point(tensor_from_rows(4, 1, 3, rows), 0) == 0.0);
  }
  // votes A A B C -> 1 - 2/4
  {
    std::vector<double> rows = {
        0.8, 0.1, 0.1,  // A
        0.7, 0.2, 0.1,  // A
        0.1, 0.8, 0.1,  // B
        0.1, 0.2, 0.7,  // C
    };
    CHECK(var_point(tensor_from_rows(4, 1, 3, rows), 0) == doctest::Approx(0.5));
  }
  // votes A A B B -> shared max count 2 -> 0.5
  {
    std::vector<double> rows = {
        0.9, 0.1, 0.0, 0.9, 0.1, 0.0,
        0.1, 0.9, 0.0, 0.1, 0.9, 0.0,
    };
    CHECK(var_point(tensor_from_rows(4, 1, 3, rows), 0) == doctest::Approx(0.5));
  }
  // single member: always 0
  {
    const std::vector<double> rows = {0.4, 0.3, 0.3};
    CHECK(var_point(tensor_from_rows(1, 1, 3, rows), 0) == 0.0);
  }
}

TEST_CASE("variation ratio range and quantization") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int members = 4;
  ProbabilityTensor t;
  t.members = members;
  t.points = 200;
  t.classes = 6;
  t.values.resize(members * 200 * 6);
  for (double& v : t.values) v = u(rng);
  for (std::size_t p = 0; p < t.points; ++p) {
    const double v = var_point(t, p);
    bool quantized = false;
    for (int f = 1; f <= members; ++f)
      if (std::fabs(v - (1.0 - static_cast<double>(f) / members)) < 1e-15)
        quantized = true;
    CHECK(quantized);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 - 1.0 / members);
  }
}

TEST_CASE("variation ratio is invariant under consistent class relabeling") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ProbabilityTensor t;
  t.members = 4;
  t.points = 30;
  t.classes = 5;
  t.values.resize(4 * 30 * 5);
  for (double& v : t.values) v = u(rng);

  std::vector<int> perm = {3, 0, 4, 1, 2};
  ProbabilityTensor relabeled = t;
  for (int m = 0; m < 4; ++m)
    for (std::size_t p = 0; p < 30; ++p)
      for (int c = 0; c < 5; ++c) relabeled.row(m, p)[perm[c]] = t.row(m, p)[c];
  for (std::size_t p = 0; p < 30; ++p)
    CHECK(var_point(t, p) == doctest::Approx(var_point(relabeled, p)));
}

TEST_CASE("entropy of distributions") {
  const std::vector<double> onehot = {0.0, 1.0, 0.0};
  CHECK(ent_point(onehot) == 0.0);
  const std::vector<double> uniform = {0.25, 0.25, 0.25, 0.25};
  CHECK(ent_point(uniform) == doctest::Approx(std::log(4.0)));
  const std::vector<double> skew = {0.5, 0.25, 0.25};
  CHECK(ent_point(skew) == doctest::Approx(1.0397).epsilon(1e-4));
}

TEST_CASE("region mean") {
  const PointCloud cloud = line_cloud(10);
  const RegionSet set = make_regions(cloud, {2, 8});
  std::vector<double> scores(10, 0.25);
  CHECK(region_mean(scores, set.regions[0]) == doctest::Approx(0.25));
  scores = {0.0, 1.0, 0, 0, 0, 0, 0, 0, 0, 0};
  CHECK(region_mean(scores, set.regions[0]) == doctest::Approx(0.5));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& s : scores) s = u(rng);
  double expect = 0.0;
  for (const std::uint32_t p : set.regions[1].points) expect += scores[p];
  expect /= static_cast<double>(set.regions[1].points.size());
  CHECK(region_mean(scores, set.regions[1]) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("color discontinuity") {
  PointCloud cloud = line_cloud(9, 0.5);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cloud.r[i] = 80;
    cloud.g[i] = 80;
    cloud.b[i] = 80;
  }
  const SpatialIndex index = SpatialIndex::build(cloud);
  const std::vector<double> flat = color_discontinuity(cloud, index, 4);
  for (const double v : flat) CHECK(v == 0.0);

  // black point among white neighbors: sqrt(3)
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    cloud.r[i] = 255;
    cloud.g[i] = 255;
    cloud.b[i] = 255;
  }
  cloud.r[4] = 0;
  cloud.g[4] = 0;
  cloud.b[4] = 0;
  const std::vector<double> spike = color_discontinuity(cloud, index, 4);
  CHECK(spike[4] == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("color discontinuity is invariant under point reordering") {
  const PointCloud cloud = oracles::random_cloud(71, 60, 5.0);
  const SpatialIndex index = SpatialIndex::build(cloud);
  const std::vector<double> base = color_discontinuity(cloud, index, 5);

  // reverse the point order and map the values back
  PointCloud reversed = cloud;
  std::reverse(reversed.x.begin(), reversed.x.end());
  std::reverse(reversed.y.begin(), reversed.y.end());
  std::reverse(reversed.z.begin(), reversed.z.end());
  std::reverse(reversed.r.begin(), reversed.r.end());
  std::reverse(reversed.g.begin(), reversed.g.end());
  std::reverse(reversed.b.begin(), reversed.b.end());
  const SpatialIndex rindex = SpatialIndex::build(reversed);
  const std::vector<double> flipped = color_discontinuity(reversed, rindex, 5);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(flipped[cloud.size() - 1 - i] == doctest::Approx(base[i]).epsilon(1e-12));
}

TEST_CASE("redal reduces to mean entropy when diversity is off") {
  const PointCloud cloud = line_cloud(12);
  const RegionSet set = make_regions(cloud, {4, 4, 4});
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  std::vector<double> ent(12), disc(12), sv(12);
  for (std::size_t i = 0; i < 12; ++i) {
    ent[i] = u(rng);
    disc[i] = u(rng);
    sv[i] = u(rng);
  }
  const std::vector<int> candidates = {0, 1, 2};
  std::vector<double> feats(3 * 2);
  for (double& f : feats) f = u(rng);

  const auto scores =
      redal_score(set, candidates, ent, disc, sv, {1.0, 0.0, 0.0}, {1, 1.0}, feats, 2, 3, 0);
  for (std::size_t i = 0; i < 3; ++i) {
    const double expect = region_mean(ent, set.regions[candidates[i]]);
    CHECK(scores[i].score == doctest::Approx(expect).epsilon(1e-12));
    CHECK(scores[i].region_id == candidates[i]);
  }

  // decay=1: clustering never changes the score
  const auto k3 =
      redal_score(set, candidates, ent, disc, sv, {0.7, 0.2, 0.1}, {3, 1.0}, feats, 2, 9, 0);
  for (std::size_t i = 0; i < 3; ++i) {
    const Region& region = set.regions[candidates[i]];
    const double expect = 0.7 * region_mean(ent, region) +
                          0.2 * region_mean(disc, region) + 0.1 * region_mean(sv, region);
    CHECK(k3[i].score == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("redal decay penalizes lower-ranked regions in a cluster") {
  const PointCloud cloud = line_cloud(4);
  const RegionSet set = make_regions(cloud, {2, 2});
  // bases 0.8 and 0.6 via entropy means
  const std::vector<double> ent = {0.8, 0.8, 0.6, 0.6};
  const std::vector<double> zero(4, 0.0);
  const std::vector<int> candidates = {0, 1};
  const std::vector<double> feats = {0.0, 0.0};  // same cluster
  const auto scores = redal_score(set, candidates, ent, zero, zero, {1.0, 0.0, 0.0},
                                  {1, 0.5}, feats, 1, 1, 2);
  CHECK(scores[0].score == doctest::Approx(0.8));
  CHECK(scores[1].score == doctest::Approx(0.3));  // 0.6 * 0.5^1
  CHECK(scores[0].cycle == 2);
  CHECK(scores[0].policy == Policy::Redal);
}

TEST_CASE("redal validates its inputs") {
  const PointCloud cloud = line_cloud(4);
  const RegionSet set = make_regions(cloud, {2, 2});
  const std::vector<double> ent(4, 0.1), zero(4, 0.0);
  const std::vector<int> candidates = {0, 1};
  const std::vector<double> feats = {0.0, 0.0};
  CHECK_THROWS_AS(redal_score(set, candidates, ent, zero, zero, {1, 0, 0}, {3, 1.0},
                              feats, 1, 1, 0),
                  std::invalid_argument);  // more clusters than regions
  CHECK_THROWS_AS(redal_score(set, candidates, ent, zero, zero, {1, 0, 0}, {1, 0.0},
                              feats, 1, 1, 0),
                  std::invalid_argument);  // decay out of range
  CHECK_THROWS_AS(redal_score(set, candidates, ent, zero, zero, {-1, 0, 0}, {1, 1.0},
                              feats, 1, 1, 0),
                  std::invalid_argument);
}

TEST_CASE("select_regions takes the top scores under a region budget") {
  const PointCloud cloud = line_cloud(9);
  const RegionSet set = make_regions(cloud, {3, 3, 3});
  const std::vector<AcquisitionScore> scores = {
      {0, 0.9, Policy::AvgEnt, 1}, {1, 0.1, Policy::AvgEnt, 1}, {2, 0.5, Policy::AvgEnt, 1}};
  const SelectionBudget budget{BudgetMode::RegionCount, 2.0};
  CHECK(select_regions(scores, set, budget, cloud) == std::vector<int>{0, 2});
}

TEST_CASE("a large point budget admits all regions in score order") {
  const PointCloud cloud = line_cloud(9);
  const RegionSet set = make_regions(cloud, {3, 3, 3});
  const std::vector<AcquisitionScore> scores = {
      {0, 0.2, Policy::AvgVar, 1}, {1, 0.7, Policy::AvgVar, 1}, {2, 0.5, Policy::AvgVar, 1}};
  const SelectionBudget budget{BudgetMode::PointFraction, 1.0};
  CHECK(select_regions(scores, set, budget, cloud) == std::vector<int>{1, 2, 0});
}

TEST_CASE("at least one region is taken even over budget") {
  const PointCloud cloud = line_cloud(10);
  const RegionSet set = make_regions(cloud, {6, 4});
  const std::vector<AcquisitionScore> scores = {{0, 0.9, Policy::AvgEnt, 1},
                                                {1, 0.8, Policy::AvgEnt, 1}};
  const SelectionBudget budget{BudgetMode::PointFraction, 0.01};  // 0.1 points
  CHECK(select_regions(scores, set, budget, cloud) == std::vector<int>{0});
}

TEST_CASE("selection is scale invariant and tie-breaks by id") {
  const PointCloud cloud = line_cloud(12);
  const RegionSet set = make_regions(cloud, {3, 3, 3, 3});
  std::vector<AcquisitionScore> scores = {{0, 0.4, Policy::AvgEnt, 1},
                                          {1, 0.9, Policy::AvgEnt, 1},
                                          {2, 0.4, Policy::AvgEnt, 1},
                                          {3, 0.1, Policy::AvgEnt, 1}};
  const SelectionBudget budget{BudgetMode::RegionCount, 3.0};
  const auto base = select_regions(scores, set, budget, cloud);
  CHECK(base == std::vector<int>{1, 0, 2});  // ties 0 vs 2 -> lower id first
  for (AcquisitionScore& s : scores) s.score *= 37.5;
  CHECK(select_regions(scores, set, budget, cloud) == base);
}

TEST_CASE("area budget accumulates region areas") {
  PointCloud cloud = line_cloud(4, 2.0);  // regions of 2 points, extent 2 each
  cloud.y = {0.0, 1.0, 0.0, 1.0};
  cloud.z = {0.0, 0.5, 0.0, 0.5};
  const RegionSet set = make_regions(cloud, {2, 2});
  // each region bbox: dx=2, dy=1, dz=0.5 -> area = 2 + 1 + 0.5 = 3.5
  const std::vector<AcquisitionScore> scores = {{0, 1.0, Policy::AvgEnt, 1},
                                                {1, 0.9, Policy::AvgEnt, 1}};
  CHECK(select_regions(scores, set, {BudgetMode::AreaM2, 4.0}, cloud) ==
        std::vector<int>{0});
  CHECK(select_regions(scores, set, {BudgetMode::AreaM2, 7.0}, cloud) ==
        std::vector<int>{0, 1});
}

TEST_CASE("random policy is deterministic and covers candidates") {
  const PointCloud cloud = line_cloud(12);
  const RegionSet set = make_regions(cloud, {3, 3, 3, 3});
  const std::vector<int> candidates = {0, 1, 2, 3};
  const SelectionBudget all{BudgetMode::PointFraction, 1.0};
  const auto a = random_policy(candidates, set, all, cloud, 42);
  const auto b = random_policy(candidates, set, all, cloud, 42);
  CHECK(a == b);
  std::set<int> unique(a.begin(), a.end());
  CHECK(unique.size() == 4);

  CHECK_THROWS_AS(random_policy({}, set, all, cloud, 1), std::invalid_argument);
}

TEST_CASE("random policy is unbiased across seeds") {
  const PointCloud cloud = line_cloud(8);
  const RegionSet set = make_regions(cloud, {2, 2, 2, 2});
  const std::vector<int> candidates = {0, 1, 2, 3};
  const SelectionBudget one{BudgetMode::RegionCount, 1.0};
  std::array<int, 4> hits = {0, 0, 0, 0};
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    hits[random_policy(candidates, set, one, cloud, seed).front()] += 1;
  for (const int h : hits) {
    CHECK(h >= 190);  // 250 +- 60
    CHECK(h <= 310);
  }
}

TEST_CASE("policy and budget-mode names round trip") {
  for (const Policy p : {Policy::Random, Policy::AvgVar, Policy::AvgEnt, Policy::Redal})
    CHECK(policy_from_name(policy_name(p)) == p);
  for (const BudgetMode m :
       {BudgetMode::PointFraction, BudgetMode::AreaM2, BudgetMode::RegionCount})
    CHECK(budget_mode_from_name(budget_mode_name(m)) == m);
  CHECK_THROWS_AS(policy_from_name("entropy"), std::invalid_argument);
}
