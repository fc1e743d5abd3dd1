// SPDX-License-Identifier: Apache-2.0

#include "alpc/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alpc/kernels.hpp"
#include "alpc/metrics.hpp"
#include "alpc/parallel.hpp"
#include "alpc/rng.hpp"

namespace alpc {

const char* policy_name(Policy policy) {
  switch (policy) {
    case Policy::Random: return "random";
    case Policy::AvgVar: return "avg_var";
    case Policy::AvgEnt: return "avg_ent";
    case Policy::Redal: return "redal";
  }
  return "?";
}

Policy policy_from_name(const std::string& name) {
  if (name == "random") return Policy::Random;
  if (name == "avg_var") return Policy::AvgVar;
  if (name == "avg_ent") return Policy::AvgEnt;
  if (name == "redal") return Policy::Redal;
  throw std::invalid_argument("unknown policy '" + name + "'");
}

const char* budget_mode_name(BudgetMode mode) {
  switch (mode) {
    case BudgetMode::PointFraction: return "point_fraction";
    case BudgetMode::AreaM2: return "area_m2";
    case BudgetMode::RegionCount: return "region_count";
  }
  return "?";
}

BudgetMode budget_mode_from_name(const std::string& name) {
  if (name == "point_fraction") return BudgetMode::PointFraction;
  if (name == "area_m2") return BudgetMode::AreaM2;
  if (name == "region_count") return BudgetMode::RegionCount;
  throw std::invalid_argument("unknown budget mode '" + name + "'");
}

std::vector<double> ensemble_mean_proba(const ProbabilityTensor& tensor) {
  if (tensor.members < 1)
    throw std::invalid_argument("ensemble_mean_proba: empty ensemble");
  std::vector<double> mean(tensor.points * tensor.classes, 0.0);
  for (int m = 0; m < tensor.members; ++m) {
    const double* src = tensor.values.data() +
                        static_cast<std::size_t>(m) * tensor.points * tensor.classes;
    kern::axpy(1.0, src, mean.data(), mean.size());
  }
  kern::scale(1.0 / tensor.members, mean.data(), mean.size());
  return mean;
}

double var_point(const ProbabilityTensor& tensor, std::size_t point) {
  if (tensor.members < 1) throw std::invalid_argument("var_point: empty ensemble");
  // Votes are class ids < classes; count them in place.
  int counts[64];
  std::vector<int> heap_counts;
  int* slot = counts;
  if (tensor.classes > 64) {
    heap_counts.assign(tensor.classes, 0);
    slot = heap_counts.data();
  } else {
    std::fill(counts, counts + tensor.classes, 0);
  }
  for (int m = 0; m < tensor.members; ++m)
    ++slot[argmax_class(tensor.row(m, point), tensor.classes)];
  int modal = 0;
  for (int c = 0; c < tensor.classes; ++c) modal = std::max(modal, slot[c]);
  return 1.0 - static_cast<double>(modal) / static_cast<double>(tensor.members);
}

std::vector<double> var_points(const ProbabilityTensor& tensor) {
  std::vector<double> out(tensor.points);
  for (std::size_t p = 0; p < tensor.points; ++p) out[p] = var_point(tensor, p);
  return out;
}

double ent_point(std::span<const double> distribution) {
  double h = 0.0;
  for (const double p : distribution)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

std::vector<double> ent_points(std::span<const double> mean_proba, int classes) {
  const std::size_t n = mean_proba.size() / classes;
  std::vector<double> out(n);
  for (std::size_t p = 0; p < n; ++p)
    out[p] = ent_point(mean_proba.subspan(p * classes, classes));
  return out;
}

double region_mean(std::span<const double> point_scores, const Region& region) {
  if (region.points.empty()) throw std::invalid_argument("region_mean: empty region");
  const double total =
      kern::sum_gather(point_scores.data(), region.points.data(), region.points.size());
  return total / static_cast<double>(region.points.size());
}

std::vector<double> color_discontinuity(const PointCloud& cloud,
                                        const SpatialIndex& index, int k,
                                        int threads) {
  if (k < 2) throw std::invalid_argument("color_discontinuity: k must be >= 2");
  std::vector<double> out(cloud.size(), 0.0);
  parallel_for(0, cloud.size(), threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<std::uint32_t> neigh;
    for (std::size_t i = lo; i < hi; ++i) {
      // +1 to cover the query point, which gets dropped below
      index.knn_into(static_cast<std::uint32_t>(i), static_cast<std::size_t>(k) + 1, neigh);
      const double r0 = cloud.r[i] / 255.0;
      const double g0 = cloud.g[i] / 255.0;
      const double b0 = cloud.b[i] / 255.0;
      double total = 0.0;
      std::size_t used = 0;
      for (const std::uint32_t j : neigh) {
        if (j == i) continue;
        if (used == static_cast<std::size_t>(k)) break;
        const double dr = cloud.r[j] / 255.0 - r0;
        const double dg = cloud.g[j] / 255.0 - g0;
        const double db = cloud.b[j] / 255.0 - b0;
        total += std::sqrt(dr * dr + dg * dg + db * db);
        ++used;
      }
      out[i] = used == 0 ? 0.0 : total / static_cast<double>(used);
    }
  });
  return out;
}

std::vector<AcquisitionScore> redal_score(
    const RegionSet& regions, std::span<const int> candidate_ids,
    std::span<const double> point_entropy, std::span<const double> color_disc,
    std::span<const double> surf_var, const RedalWeights& weights,
    const RedalDiversity& diversity, std::span<const double> region_features,
    std::size_t feature_dim, std::uint64_t seed, int cycle) {
  if (weights.alpha < 0.0 || weights.beta < 0.0 || weights.gamma < 0.0)
    throw std::invalid_argument("redal_score: weights must be non-negative");
  if (!(diversity.decay > 0.0) || diversity.decay > 1.0)
    throw std::invalid_argument("redal_score: decay must be in (0, 1]");
  if (diversity.clusters < 1)
    throw std::invalid_argument("redal_score: cluster count must be >= 1");
  if (candidate_ids.empty())
    throw std::invalid_argument("redal_score: no candidate regions");
  if (static_cast<std::size_t>(diversity.clusters) > candidate_ids.size())
    throw std::invalid_argument("redal_score: more clusters than regions");
  if (region_features.size() != candidate_ids.size() * feature_dim)
    throw std::invalid_argument("redal_score: region feature shape mismatch");

  std::vector<double> base(candidate_ids.size());
  for (std::size_t i = 0; i < candidate_ids.size(); ++i) {
    const Region& region = regions.regions.at(candidate_ids[i]);
    base[i] = weights.alpha * region_mean(point_entropy, region) +
              weights.beta * region_mean(color_disc, region) +
              weights.gamma * region_mean(surf_var, region);
  }

  const KmeansResult clustering =
      kmeans(region_features, feature_dim, diversity.clusters, 100, seed);

  std::vector<AcquisitionScore> scores(candidate_ids.size());
  std::vector<std::vector<std::size_t>> buckets(diversity.clusters);
  for (std::size_t i = 0; i < candidate_ids.size(); ++i)
    buckets[clustering.assignments[i]].push_back(i);
  for (auto& bucket : buckets) {
    std::sort(bucket.begin(), bucket.end(), [&](std::size_t a, std::size_t b) {
      if (base[a] != base[b]) return base[a] > base[b];
      return candidate_ids[a] < candidate_ids[b];
    });
    for (std::size_t rank = 0; rank < bucket.size(); ++rank) {
      const std::size_t i = bucket[rank];
      scores[i] = {candidate_ids[i],
                   base[i] * std::pow(diversity.decay, static_cast<double>(rank)),
                   Policy::Redal, cycle};
    }
  }
  return scores;
}

namespace {

std::vector<int> greedy_fill(std::vector<int> ordered, const RegionSet& regions,
                             const SelectionBudget& budget, const PointCloud& cloud) {
  if (!(budget.amount > 0.0))
    throw std::invalid_argument("selection budget must be positive");
  if (ordered.empty()) throw std::invalid_argument("no candidate regions to select");

  std::vector<int> picked;
  switch (budget.mode) {
    case BudgetMode::PointFraction: {
      const double cap =
          budget.amount * static_cast<double>(cloud.size()) + 1e-9;
      double used = 0.0;
      for (const int id : ordered) {
        const double size =
            static_cast<double>(regions.regions.at(id).points.size());
        if (!picked.empty() && used + size > cap) break;
        picked.push_back(id);
        used += size;
        if (used > cap) break;  // at-least-one overshoot
      }
      break;
    }
    case BudgetMode::AreaM2: {
      const double cap = budget.amount + 1e-9;
      double used = 0.0;
      for (const int id : ordered) {
        const double area = region_area(cloud, regions.regions.at(id));
        if (!picked.empty() && used + area > cap) break;
        picked.push_back(id);
        used += area;
        if (used > cap) break;
      }
      break;
    }
    case BudgetMode::RegionCount: {
      const std::size_t cap =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(budget.amount)));
      for (const int id : ordered) {
        if (picked.size() == cap) break;
        picked.push_back(id);
      }
      break;
    }
  }
  return picked;
}

}  // namespace

std::vector<int> select_regions(std::span<const AcquisitionScore> scores,
                                const RegionSet& regions,
                                const SelectionBudget& budget,
                                const PointCloud& cloud) {
  if (scores.empty()) throw std::invalid_argument("select_regions: empty candidate set");
  std::vector<const AcquisitionScore*> order;
  order.reserve(scores.size());
  for (const AcquisitionScore& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const AcquisitionScore* a, const AcquisitionScore* b) {
              if (a->score != b->score) return a->score > b->score;
              return a->region_id < b->region_id;
            });
  std::vector<int> ordered;
  ordered.reserve(order.size());
  for (const AcquisitionScore* s : order) ordered.push_back(s->region_id);
  return greedy_fill(std::move(ordered), regions, budget, cloud);
}

std::vector<int> random_policy(std::span<const int> candidate_ids,
                               const RegionSet& regions,
                               const SelectionBudget& budget,
                               const PointCloud& cloud, std::uint64_t seed) {
  if (candidate_ids.empty())
    throw std::invalid_argument("random_policy: empty candidate set");
  std::vector<int> ordered(candidate_ids.begin(), candidate_ids.end());
  Rng rng(seed);
  std::shuffle(ordered.begin(), ordered.end(), rng);
  return greedy_fill(std::move(ordered), regions, budget, cloud);
}

}  // namespace alpc
