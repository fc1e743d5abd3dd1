// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_METRICS_HPP
#define ALPC_METRICS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "alpc/cloud.hpp"
#include "alpc/regions.hpp"

namespace alpc {

struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::int64_t> counts;  // classes x classes, (gt, pred)
  std::int64_t total = 0;

  std::int64_t& at(int gt, int pred) { return counts[gt * classes + pred]; }
  std::int64_t at(int gt, int pred) const { return counts[gt * classes + pred]; }
};

// Counts over points whose ground truth is neither -1 nor in `ignore`.
ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> gt,
                          int classes, std::span<const int> ignore = {});

struct MiouResult {
  double mean = 0.0;
  std::vector<double> per_class;  // NaN for classes with zero support
};

// IoU_c = TP / (TP + FP + FN); classes absent from both prediction and
// ground truth are excluded from the mean.
MiouResult miou(const ConfusionMatrix& cm);

// 90% of the fully supervised mIoU: the usual active-learning target.
double miou_at_90(double full_supervised_miou);

// Half the surface of the axis-aligned cuboid containing the region:
// dx*dy + dx*dz + dy*dz.
double region_area(const PointCloud& cloud, const Region& region);

struct BudgetReport {
  std::int64_t labeled_points = 0;
  double labeled_fraction = 0.0;  // of points that carry ground truth
  double labeled_area_m2 = 0.0;
};

// Accounting over the labeled regions (given by id). Regions must be
// disjoint. Points without ground truth are excluded from the point count
// and the fraction denominator; the area sums region_area over the regions.
BudgetReport budget_report(const PointCloud& cloud, const RegionSet& regions,
                           std::span<const int> labeled_region_ids);

}  // namespace alpc

#endif  // ALPC_METRICS_HPP
