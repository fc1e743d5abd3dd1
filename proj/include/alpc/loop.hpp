// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_LOOP_HPP
#define ALPC_LOOP_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alpc/cloud.hpp"
#include "alpc/learner.hpp"
#include "alpc/metrics.hpp"
#include "alpc/regions.hpp"
#include "alpc/selection.hpp"

namespace alpc {

struct SeparationConfig {
  enum class Kind { Columns, Supervoxels };
  Kind kind = Kind::Columns;
  double column_edge = 0.5;
  SupervoxelParams supervoxels;

  const char* name() const {
    return kind == Kind::Columns ? "columns" : "supervoxels";
  }
};

struct ExperimentConfig {
  SeparationConfig separation;
  Policy policy = Policy::AvgEnt;
  SelectionBudget budget{BudgetMode::PointFraction, 0.01};
  SelectionBudget initial_budget{BudgetMode::PointFraction, 0.01};
  int cycles = 10;
  int ensemble_size = 4;
  TrainConfig train;
  AugmentConfig augment{.scale = true, .rotation = true, .elastic = false, .chromatic = true};
  RedalWeights redal_weights;
  RedalDiversity redal_diversity;
  bool redal_single_member = false;  // member-0 entropy instead of the mean
  std::vector<int> ignore_classes;   // excluded from mIoU
  std::uint64_t seed = 1;

  // Effective-config string echoed into the log header. Thread count is
  // excluded: it never changes results.
  std::string fingerprint(bool eval_on_train) const;
};

struct LogRow {
  int cycle = 0;
  std::int64_t labeled_points = 0;
  double labeled_fraction = 0.0;
  double labeled_area_m2 = 0.0;
  double miou = 0.0;
  std::vector<double> per_class_iou;  // NaN = class absent from evaluation
  double wall_seconds = 0.0;
};

struct ExperimentLog {
  std::string fingerprint;
  int class_count = 0;
  std::vector<LogRow> rows;  // cycle 0 = seed-only training
  bool early_stop = false;
  int early_stop_cycle = -1;
};

// `# <fingerprint>` comment, the CSV header
// cycle,labeled_points,labeled_fraction,labeled_area_m2,miou,iou_c0,...,wall_seconds
// and one row per cycle; a trailing `# early_stop ...` marker when the loop
// ran out of unlabeled regions.
void write_log_csv(const ExperimentLog& log, std::ostream& out);

// Label source for the simulated annotator: reveals ground truth per
// region, refusing double reveals.
class Oracle {
 public:
  Oracle(PointCloud& cloud, std::size_t region_count);

  // Marks known for every region point that has ground truth; returns how
  // many labels were newly revealed. Throws if the region was already
  // revealed (the region stays consumed even when it contains no labels).
  std::int64_t reveal(const Region& region);
  bool revealed(int region_id) const { return revealed_[region_id] != 0; }

 private:
  PointCloud* cloud_;
  std::vector<char> revealed_;
};

// Random seed regions under the initial budget; reveals their labels.
// Returns the chosen region ids.
std::vector<int> seed_labels(PointCloud& cloud, const RegionSet& regions,
                             const SelectionBudget& initial_budget,
                             std::uint64_t seed, Oracle& oracle);

struct RunHooks {
  std::function<void(int cycle, std::span<const AcquisitionScore>)> on_scores;
};

// Full active-learning run: cycle 0 seeds + trains + evaluates, every later
// cycle scores, selects, reveals, retrains from scratch and evaluates.
// Evaluation uses eval_cloud when given, otherwise all ground-truth points
// of the training cloud. Deterministic under config.seed for any thread
// count.
ExperimentLog run_experiment(const ExperimentConfig& config, PointCloud& cloud,
                             const PointCloud* eval_cloud,
                             const RunHooks& hooks = {});

// mIoU of the same ensemble trained on every ground-truth label; the
// reference for the mIoU@90 target.
double supervised_baseline(const ExperimentConfig& config, const PointCloud& cloud,
                           const PointCloud* eval_cloud);

}  // namespace alpc

#endif  // ALPC_LOOP_HPP
