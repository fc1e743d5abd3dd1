// SPDX-License-Identifier: Apache-2.0

#include "alpc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace alpc {

ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> gt,
                          int classes, std::span<const int> ignore) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("confusion: prediction/ground-truth length mismatch");
  if (classes < 1) throw std::invalid_argument("confusion: classes must be >= 1");
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(static_cast<std::size_t>(classes) * classes, 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int g = gt[i];
    if (g == -1) continue;
    if (std::find(ignore.begin(), ignore.end(), g) != ignore.end()) continue;
    if (g < 0 || g >= classes)
      throw std::out_of_range("confusion: ground-truth label " + std::to_string(g) +
                              " out of range at point " + std::to_string(i));
    const int p = pred[i];
    if (p < 0 || p >= classes)
      throw std::out_of_range("confusion: predicted label " + std::to_string(p) +
                              " out of range at point " + std::to_string(i));
    ++cm.at(g, p);
    ++cm.total;
  }
  return cm;
}

MiouResult miou(const ConfusionMatrix& cm) {
  if (cm.total == 0)
    throw std::invalid_argument("miou: empty confusion matrix");
  MiouResult res;
  res.per_class.assign(cm.classes, std::numeric_limits<double>::quiet_NaN());
  double total = 0.0;
  int included = 0;
  for (int c = 0; c < cm.classes; ++c) {
    std::int64_t row = 0, col = 0;
    for (int k = 0; k < cm.classes; ++k) {
      row += cm.at(c, k);
      col += cm.at(k, c);
    }
    if (row + col == 0) continue;  // absent from both: excluded
    const std::int64_t tp = cm.at(c, c);
    const std::int64_t denom = row + col - tp;  // TP + FP + FN
    res.per_class[c] = static_cast<double>(tp) / static_cast<double>(denom);
    total += res.per_class[c];
    ++included;
  }
  if (included == 0)
    throw std::invalid_argument("miou: no class with nonzero support");
  res.mean = total / included;
  return res;
}

double miou_at_90(double full_supervised_miou) {
  if (full_supervised_miou < 0.0 || full_supervised_miou > 1.0)
    throw std::invalid_argument("miou_at_90: input must be in [0,1]");
  return 0.9 * full_supervised_miou;
}

double region_area(const PointCloud& cloud, const Region& region) {
  if (region.points.empty()) throw std::invalid_argument("region_area: empty region");
  const AABB box = bounding_box(cloud, region.points);
  const double dx = box.dx(), dy = box.dy(), dz = box.dz();
  return dx * dy + dx * dz + dy * dz;
}

BudgetReport budget_report(const PointCloud& cloud, const RegionSet& regions,
                           std::span<const int> labeled_region_ids) {
  BudgetReport report;
  std::vector<char> seen(cloud.size(), 0);
  std::int64_t with_gt = 0;
  for (const int g : cloud.gt) with_gt += (g != -1) ? 1 : 0;
  for (const int id : labeled_region_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= regions.regions.size())
      throw std::out_of_range("budget_report: region id out of range");
    const Region& region = regions.regions[id];
    for (const std::uint32_t p : region.points) {
      if (seen[p])
        throw std::invalid_argument("budget_report: overlapping regions at point " +
                                    std::to_string(p));
      seen[p] = 1;
      if (cloud.gt[p] != -1) ++report.labeled_points;
    }
    report.labeled_area_m2 += region_area(cloud, region);
  }
  report.labeled_fraction =
      with_gt == 0 ? 0.0
                   : static_cast<double>(report.labeled_points) /
                         static_cast<double>(with_gt);
  return report;
}

}  // namespace alpc
