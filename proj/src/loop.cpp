// SPDX-License-Identifier: Apache-2.0

#include "alpc/loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "alpc/rng.hpp"

namespace alpc {

namespace {

// seed-derivation stream tags
constexpr std::uint64_t kStreamPlane = 0x706c;
constexpr std::uint64_t kStreamSeparate = 0x7365;
constexpr std::uint64_t kStreamSeedLabels = 0x696e;
constexpr std::uint64_t kStreamTrain = 0x7472;
constexpr std::uint64_t kStreamSelect = 0x7363;

struct EvalContext {
  const PointCloud* cloud = nullptr;
  FeatureMatrix raw;  // unstandardized features of the evaluation cloud
};

RegionSet separate(const ExperimentConfig& config, const PointCloud& cloud) {
  if (config.separation.kind == SeparationConfig::Kind::Columns)
    return assign_columns(cloud, config.separation.column_edge);
  SupervoxelParams params = config.separation.supervoxels;
  params.seed = derive_seed(config.seed, kStreamSeparate);
  return build_supervoxels(cloud, params);
}

LogRow evaluate_cycle(const ExperimentConfig& config, const Ensemble& ensemble,
                      const EvalContext& eval, int cycle,
                      const BudgetReport& budget) {
  const ProbabilityTensor tensor =
      predict_proba(ensemble, eval.raw, config.train.threads);
  const std::vector<double> mean = ensemble_mean_proba(tensor);
  const int classes = tensor.classes;
  std::vector<int> pred(tensor.points);
  for (std::size_t p = 0; p < tensor.points; ++p)
    pred[p] = argmax_class(mean.data() + p * classes, classes);
  const ConfusionMatrix cm =
      confusion(pred, eval.cloud->gt, classes, config.ignore_classes);
  const MiouResult m = miou(cm);

  LogRow row;
  row.cycle = cycle;
  row.labeled_points = budget.labeled_points;
  row.labeled_fraction = budget.labeled_fraction;
  row.labeled_area_m2 = budget.labeled_area_m2;
  row.miou = m.mean;
  row.per_class_iou = m.per_class;
  return row;
}

std::vector<int> unlabeled_candidates(const RegionSet& regions, const Oracle& oracle) {
  std::vector<int> out;
  for (const Region& region : regions.regions)
    if (!oracle.revealed(region.id)) out.push_back(region.id);
  return out;
}

BudgetReport checked_budget(const PointCloud& cloud, const RegionSet& regions,
                            std::span<const int> labeled_ids) {
  const BudgetReport report = budget_report(cloud, regions, labeled_ids);
  std::int64_t known = 0;
  for (const char k : cloud.known) known += k ? 1 : 0;
  if (known != report.labeled_points)
    throw std::logic_error("budget accounting mismatch: mask says " +
                           std::to_string(known) + ", regions say " +
                           std::to_string(report.labeled_points));
  return report;
}

}  // namespace

std::string ExperimentConfig::fingerprint(bool eval_on_train) const {
  std::ostringstream out;
  out << "policy=" << policy_name(policy) << " separation=" << separation.name();
  if (separation.kind == SeparationConfig::Kind::Columns)
    out << " r=" << format_double(separation.column_edge);
  else
    out << " sv=" << separation.supervoxels.ransac_iterations << ','
        << format_double(separation.supervoxels.inlier_threshold) << ','
        << format_double(separation.supervoxels.eps) << ','
        << separation.supervoxels.min_pts << ','
        << format_double(separation.supervoxels.ground_region_target_area);
  out << " budget=" << budget_mode_name(budget.mode) << ':' << format_double(budget.amount)
      << " initial=" << budget_mode_name(initial_budget.mode) << ':'
      << format_double(initial_budget.amount) << " cycles=" << cycles
      << " ensemble=" << ensemble_size << " lr=" << format_double(train.learning_rate)
      << " epochs=" << train.epochs << " batch=" << train.batch_size
      << " l2=" << format_double(train.l2) << " k=" << train.k_neighbors << " aug=";
  if (!augment.any()) out << "none";
  if (augment.scale) out << 'S';
  if (augment.rotation) out << 'R';
  if (augment.elastic) out << 'E';
  if (augment.chromatic) out << 'C';
  out << " redal=" << format_double(redal_weights.alpha) << ','
      << format_double(redal_weights.beta) << ',' << format_double(redal_weights.gamma)
      << " diversity=" << redal_diversity.clusters << ','
      << format_double(redal_diversity.decay)
      << " single_member=" << (redal_single_member ? 1 : 0) << " ignore=";
  for (std::size_t i = 0; i < ignore_classes.size(); ++i)
    out << (i ? "," : "") << ignore_classes[i];
  out << " eval=" << (eval_on_train ? "train" : "file") << " seed=" << seed;
  return out.str();
}

void write_log_csv(const ExperimentLog& log, std::ostream& out) {
  out << "# " << log.fingerprint << '\n';
  out << "cycle,labeled_points,labeled_fraction,labeled_area_m2,miou";
  for (int c = 0; c < log.class_count; ++c) out << ",iou_c" << c;
  out << ",wall_seconds\n";
  char wall[32];
  for (const LogRow& row : log.rows) {
    out << row.cycle << ',' << row.labeled_points << ','
        << format_double(row.labeled_fraction) << ','
        << format_double(row.labeled_area_m2) << ',' << format_double(row.miou);
    for (const double iou : row.per_class_iou) out << ',' << format_double(iou);
    std::snprintf(wall, sizeof(wall), "%.3f", row.wall_seconds);
    out << ',' << wall << '\n';
  }
  if (log.early_stop)
    out << "# early_stop cycle=" << log.early_stop_cycle
        << " reason=no_unlabeled_regions\n";
}

Oracle::Oracle(PointCloud& cloud, std::size_t region_count)
    : cloud_(&cloud), revealed_(region_count, 0) {}

std::int64_t Oracle::reveal(const Region& region) {
  if (region.id < 0 || static_cast<std::size_t>(region.id) >= revealed_.size())
    throw std::out_of_range("oracle: region id out of range");
  if (revealed_[region.id])
    throw std::logic_error("oracle: region " + std::to_string(region.id) +
                           " already revealed");
  revealed_[region.id] = 1;
  std::int64_t count = 0;
  for (const std::uint32_t p : region.points) {
    if (cloud_->gt[p] == -1) continue;
    if (!cloud_->known[p]) {
      cloud_->known[p] = 1;
      ++count;
    }
  }
  return count;
}

std::vector<int> seed_labels(PointCloud& cloud, const RegionSet& regions,
                             const SelectionBudget& initial_budget,
                             std::uint64_t seed, Oracle& oracle) {
  if (regions.regions.empty())
    throw std::invalid_argument("seed_labels: empty region set");
  std::vector<int> candidates = unlabeled_candidates(regions, oracle);
  const std::vector<int> chosen =
      random_policy(candidates, regions, initial_budget, cloud, seed);
  for (const int id : chosen) oracle.reveal(regions.regions.at(id));
  return chosen;
}

ExperimentLog run_experiment(const ExperimentConfig& config, PointCloud& cloud,
                             const PointCloud* eval_cloud, const RunHooks& hooks) {
  using Clock = std::chrono::steady_clock;
  validate_cloud(cloud);
  if (config.cycles < 1) throw std::invalid_argument("run_experiment: cycles must be >= 1");
  if (eval_cloud && eval_cloud->class_count != cloud.class_count)
    throw std::invalid_argument("run_experiment: eval cloud class count differs");

  std::fill(cloud.known.begin(), cloud.known.end(), 0);

  ExperimentLog log;
  log.fingerprint = config.fingerprint(eval_cloud == nullptr);
  log.class_count = cloud.class_count;

  auto cycle_start = Clock::now();
  const RegionSet regions = separate(config, cloud);

  // one ground plane for features; supervoxel separation fits its own
  const SpatialIndex index = SpatialIndex::build(cloud);
  const PlaneModel plane =
      fit_ground_plane(cloud, config.separation.supervoxels.ransac_iterations,
                       config.separation.supervoxels.inlier_threshold,
                       derive_seed(config.seed, kStreamPlane))
          .first;
  const FeatureMatrix raw =
      extract_features(cloud, index, plane, config.train.k_neighbors,
                       config.train.threads);

  EvalContext eval;
  if (eval_cloud) {
    eval.cloud = eval_cloud;
    const SpatialIndex eval_index = SpatialIndex::build(*eval_cloud);
    const PlaneModel eval_plane =
        fit_ground_plane(*eval_cloud, config.separation.supervoxels.ransac_iterations,
                         config.separation.supervoxels.inlier_threshold,
                         derive_seed(config.seed, kStreamPlane))
            .first;
    eval.raw = extract_features(*eval_cloud, eval_index, eval_plane,
                                config.train.k_neighbors, config.train.threads);
  } else {
    eval.cloud = &cloud;
    eval.raw = raw;
  }

  // ReDAL's static per-point heuristics
  std::vector<double> color_disc, surf_var;
  if (config.policy == Policy::Redal) {
    color_disc = color_discontinuity(cloud, index, config.train.k_neighbors,
                                     config.train.threads);
    surf_var.resize(raw.rows);
    for (std::size_t i = 0; i < raw.rows; ++i) surf_var[i] = raw.row(i)[kFeatSurfVar];
  }

  Oracle oracle(cloud, regions.regions.size());
  std::vector<int> labeled_ids =
      seed_labels(cloud, regions, config.initial_budget,
                  derive_seed(config.seed, kStreamSeedLabels), oracle);

  Ensemble ensemble =
      train_ensemble(cloud, raw, index, plane, config.ensemble_size, config.train,
                     derive_seed(config.seed, kStreamTrain, 0), config.augment);
  {
    LogRow row = evaluate_cycle(config, ensemble, eval, 0,
                                checked_budget(cloud, regions, labeled_ids));
    row.wall_seconds = std::chrono::duration<double>(Clock::now() - cycle_start).count();
    log.rows.push_back(std::move(row));
  }

  for (int cycle = 1; cycle <= config.cycles; ++cycle) {
    cycle_start = Clock::now();
    const std::vector<int> candidates = unlabeled_candidates(regions, oracle);
    if (candidates.empty()) {
      // nothing left to annotate: retrain/evaluate once more and stop
      ensemble = train_ensemble(cloud, raw, index, plane, config.ensemble_size, config.train,
                                derive_seed(config.seed, kStreamTrain, cycle),
                                config.augment);
      LogRow row = evaluate_cycle(config, ensemble, eval, cycle,
                                  checked_budget(cloud, regions, labeled_ids));
      row.wall_seconds =
          std::chrono::duration<double>(Clock::now() - cycle_start).count();
      log.rows.push_back(std::move(row));
      log.early_stop = true;
      log.early_stop_cycle = cycle;
      break;
    }

    std::vector<int> picked;
    if (config.policy == Policy::Random) {
      picked = random_policy(candidates, regions, config.budget, cloud,
                             derive_seed(config.seed, kStreamSelect, cycle));
    } else {
      const ProbabilityTensor tensor = predict_proba(ensemble, raw, config.train.threads);
      std::vector<AcquisitionScore> scores;
      if (config.policy == Policy::AvgVar) {
        const std::vector<double> vars = var_points(tensor);
        scores.reserve(candidates.size());
        for (const int id : candidates)
          scores.push_back({id, region_mean(vars, regions.regions[id]),
                            Policy::AvgVar, cycle});
      } else if (config.policy == Policy::AvgEnt) {
        const std::vector<double> mean = ensemble_mean_proba(tensor);
        const std::vector<double> ent = ent_points(mean, tensor.classes);
        scores.reserve(candidates.size());
        for (const int id : candidates)
          scores.push_back({id, region_mean(ent, regions.regions[id]),
                            Policy::AvgEnt, cycle});
      } else {
        std::vector<double> ent;
        if (config.redal_single_member) {
          ent.resize(tensor.points);
          for (std::size_t p = 0; p < tensor.points; ++p)
            ent[p] = ent_point(std::span(tensor.row(0, p),
                                         static_cast<std::size_t>(tensor.classes)));
        } else {
          const std::vector<double> mean = ensemble_mean_proba(tensor);
          ent = ent_points(mean, tensor.classes);
        }
        // diversity space: mean standardized features per region
        const FeatureMatrix std_features =
            standardize(raw, ensemble.feat_mean, ensemble.feat_stdev);
        std::vector<double> region_features(candidates.size() * kFeatureCount, 0.0);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
          const Region& region = regions.regions[candidates[i]];
          double* dst = region_features.data() + i * kFeatureCount;
          for (const std::uint32_t p : region.points)
            for (std::size_t c = 0; c < kFeatureCount; ++c)
              dst[c] += std_features.row(p)[c];
          const double inv = 1.0 / static_cast<double>(region.points.size());
          for (std::size_t c = 0; c < kFeatureCount; ++c) dst[c] *= inv;
        }
        RedalDiversity diversity = config.redal_diversity;
        diversity.clusters =
            std::min<int>(diversity.clusters, static_cast<int>(candidates.size()));
        scores = redal_score(regions, candidates, ent, color_disc, surf_var,
                             config.redal_weights, diversity, region_features,
                             kFeatureCount, derive_seed(config.seed, kStreamSelect, cycle),
                             cycle);
      }
      if (hooks.on_scores) hooks.on_scores(cycle, scores);
      picked = select_regions(scores, regions, config.budget, cloud);
    }

    for (const int id : picked) {
      oracle.reveal(regions.regions.at(id));
      labeled_ids.push_back(id);
    }

    ensemble = train_ensemble(cloud, raw, index, plane, config.ensemble_size, config.train,
                              derive_seed(config.seed, kStreamTrain, cycle),
                              config.augment);
    LogRow row = evaluate_cycle(config, ensemble, eval, cycle,
                                checked_budget(cloud, regions, labeled_ids));
    row.wall_seconds = std::chrono::duration<double>(Clock::now() - cycle_start).count();
    log.rows.push_back(std::move(row));
  }
  return log;
}

double supervised_baseline(const ExperimentConfig& config, const PointCloud& cloud,
                           const PointCloud* eval_cloud) {
  // Identical to cycle 0 of run_experiment with an all-covering initial
  // budget (same seed derivations, so the reduction is exact), without the
  // trailing early-stop retrain.
  PointCloud copy = cloud;
  validate_cloud(copy);
  std::fill(copy.known.begin(), copy.known.end(), 0);
  ExperimentConfig full = config;
  full.initial_budget = {BudgetMode::PointFraction, 1.0};

  const RegionSet regions = separate(full, copy);
  const SpatialIndex index = SpatialIndex::build(copy);
  const PlaneModel plane =
      fit_ground_plane(copy, full.separation.supervoxels.ransac_iterations,
                       full.separation.supervoxels.inlier_threshold,
                       derive_seed(full.seed, kStreamPlane))
          .first;
  const FeatureMatrix raw = extract_features(copy, index, plane,
                                             full.train.k_neighbors, full.train.threads);
  EvalContext eval;
  if (eval_cloud) {
    eval.cloud = eval_cloud;
    const SpatialIndex eval_index = SpatialIndex::build(*eval_cloud);
    const PlaneModel eval_plane =
        fit_ground_plane(*eval_cloud, full.separation.supervoxels.ransac_iterations,
                         full.separation.supervoxels.inlier_threshold,
                         derive_seed(full.seed, kStreamPlane))
            .first;
    eval.raw = extract_features(*eval_cloud, eval_index, eval_plane,
                                full.train.k_neighbors, full.train.threads);
  } else {
    eval.cloud = &copy;
    eval.raw = raw;
  }

  Oracle oracle(copy, regions.regions.size());
  const std::vector<int> labeled_ids =
      seed_labels(copy, regions, full.initial_budget,
                  derive_seed(full.seed, kStreamSeedLabels), oracle);
  const Ensemble ensemble =
      train_ensemble(copy, raw, index, plane, full.ensemble_size, full.train,
                     derive_seed(full.seed, kStreamTrain, 0), full.augment);
  return evaluate_cycle(full, ensemble, eval, 0,
                        checked_budget(copy, regions, labeled_ids))
      .miou;
}

}  // namespace alpc
