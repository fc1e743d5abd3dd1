// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "alpc/cloud.hpp"
#include "alpc/loop.hpp"
#include "alpc/metrics.hpp"
#include "alpc/scene.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace alpc;

namespace {

struct GenerateOptions {
  std::string out;
  std::string spec_file;
  SceneSpec spec;
  std::uint64_t eval_offset = 1;
};

struct RunOptions {
  std::string cloud_file;
  std::string eval_file;
  std::string policy = "avg_ent";
  std::string separation = "columns";
  std::vector<double> edges{0.5};
  std::vector<std::uint64_t> seeds{1};
  std::string budget_mode = "point_fraction";
  double budget = 0.01;
  std::string initial_mode = "point_fraction";
  double initial = 0.01;
  int cycles = 10;
  int ensemble = 4;
  TrainConfig train;
  std::string augment = "SRC";
  RedalWeights redal;
  RedalDiversity diversity;
  bool redal_single_member = false;
  std::vector<int> ignore;
  SupervoxelParams sv;
  std::string out_dir = ".";
  bool curves = false;
  bool supervised = false;
  bool dump_scores = false;
};

struct SeparateOptions {
  std::string cloud_file;
  std::string separation = "columns";
  double edge = 0.5;
  SupervoxelParams sv;
  std::string out;
  std::uint64_t seed = 1;
};

struct EvalOptions {
  std::string pred_file;
  std::string cloud_file;
  std::vector<int> ignore;
};

AugmentConfig parse_augment(const std::string& flags) {
  AugmentConfig cfg;
  if (flags == "none" || flags.empty()) return cfg;
  for (const char c : flags) {
    switch (c) {
      case 'S': cfg.scale = true; break;
      case 'R': cfg.rotation = true; break;
      case 'E': cfg.elastic = true; break;
      case 'C': cfg.chromatic = true; break;
      default:
        throw CLI::ValidationError("--augment", std::string("unknown augmentation '") + c +
                                                    "' (use S, R, E, C or 'none')");
    }
  }
  return cfg;
}

int cmd_generate(const GenerateOptions& opt) {
  auto [train_cloud, eval_cloud] = scene_pair(opt.spec, opt.eval_offset);
  const std::string train_path = opt.out + "_train.alpc";
  const std::string eval_path = opt.out + "_eval.alpc";
  save_cloud(train_cloud, train_path);
  save_cloud(eval_cloud, eval_path);
  std::cout << train_path << " points=" << train_cloud.size()
            << " classes=" << train_cloud.class_count << '\n';
  std::cout << eval_path << " points=" << eval_cloud.size()
            << " classes=" << eval_cloud.class_count << '\n';
  return 0;
}

std::string run_file_name(Policy policy, const RunOptions& opt, double edge,
                          std::uint64_t seed) {
  std::string separation = opt.separation;
  if (opt.separation == "columns" && opt.edges.size() > 1)
    separation += "-r" + format_double(edge);
  return std::string(policy_name(policy)) + "_" + separation + "_" +
         std::to_string(seed) + ".csv";
}

int cmd_run(const RunOptions& opt) {
  PointCloud base = load_cloud(opt.cloud_file);
  PointCloud eval_cloud;
  const bool have_eval = !opt.eval_file.empty();
  if (have_eval) eval_cloud = load_cloud(opt.eval_file);

  std::vector<Policy> policies;
  if (opt.policy == "all")
    policies = {Policy::Random, Policy::AvgVar, Policy::AvgEnt, Policy::Redal};
  else
    policies = {policy_from_name(opt.policy)};

  fs::create_directories(opt.out_dir);
  const std::vector<double> edges =
      opt.separation == "columns" ? opt.edges : std::vector<double>{0.0};

  std::vector<svg::Series> area_series, fraction_series;
  std::optional<double> target;

  for (const double edge : edges) {
    ExperimentConfig config;
    config.separation.kind = opt.separation == "columns"
                                 ? SeparationConfig::Kind::Columns
                                 : SeparationConfig::Kind::Supervoxels;
    config.separation.column_edge = edge;
    config.separation.supervoxels = opt.sv;
    config.budget = {budget_mode_from_name(opt.budget_mode), opt.budget};
    config.initial_budget = {budget_mode_from_name(opt.initial_mode), opt.initial};
    config.cycles = opt.cycles;
    config.ensemble_size = opt.ensemble;
    config.train = opt.train;
    config.augment = parse_augment(opt.augment);
    config.redal_weights = opt.redal;
    config.redal_diversity = opt.diversity;
    config.redal_single_member = opt.redal_single_member;
    config.ignore_classes = opt.ignore;

    if (opt.supervised && opt.curves && !target) {
      ExperimentConfig sup = config;
      sup.seed = opt.seeds.front();
      const double full = supervised_baseline(sup, base, have_eval ? &eval_cloud : nullptr);
      target = miou_at_90(full);
      std::cout << "supervised miou=" << format_double(full)
                << " miou@90=" << format_double(*target) << '\n';
    }

    for (const Policy policy : policies) {
      config.policy = policy;
      for (const std::uint64_t seed : opt.seeds) {
        config.seed = seed;
        PointCloud cloud = base;

        RunHooks hooks;
        std::string score_prefix;
        if (opt.dump_scores) {
          std::string separation = opt.separation;
          if (opt.separation == "columns" && opt.edges.size() > 1)
            separation += "-r" + format_double(edge);
          score_prefix = (fs::path(opt.out_dir) /
                          ("scores_" + std::string(policy_name(policy)) + "_" +
                           separation + "_" + std::to_string(seed) + "_c"))
                             .string();
          const double ent_norm = std::log(static_cast<double>(base.class_count));
          const double var_norm = 1.0 - 1.0 / static_cast<double>(opt.ensemble);
          hooks.on_scores = [score_prefix, policy, ent_norm, var_norm](
                                int cycle, std::span<const AcquisitionScore> scores) {
            std::ofstream out(score_prefix + std::to_string(cycle) + ".txt");
            for (const AcquisitionScore& s : scores) {
              double v = s.score;
              if (policy == Policy::AvgEnt && ent_norm > 0.0) v /= ent_norm;
              if (policy == Policy::AvgVar && var_norm > 0.0) v /= var_norm;
              out << s.region_id << ' ' << format_double(v) << '\n';
            }
          };
        }

        const ExperimentLog log =
            run_experiment(config, cloud, have_eval ? &eval_cloud : nullptr, hooks);
        const std::string name = run_file_name(policy, opt, edge, seed);
        const fs::path path = fs::path(opt.out_dir) / name;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open '" + path.string() + "'");
        write_log_csv(log, out);
        std::cout << path.string() << " rows=" << log.rows.size()
                  << " final_miou=" << format_double(log.rows.back().miou) << '\n';

        if (opt.curves) {
          svg::Series area{name, {}, {}}, fraction{name, {}, {}};
          for (const LogRow& row : log.rows) {
            area.x.push_back(row.labeled_area_m2);
            area.y.push_back(row.miou);
            fraction.x.push_back(row.labeled_fraction);
            fraction.y.push_back(row.miou);
          }
          area_series.push_back(std::move(area));
          fraction_series.push_back(std::move(fraction));
        }
      }
    }
  }

  if (opt.curves) {
    svg::ChartSpec area_spec{"labeled area (m^2)", "mIoU", true, target, "mIoU@90"};
    svg::write_chart((fs::path(opt.out_dir) / "curves_area.svg").string(), area_series,
                     area_spec);
    svg::ChartSpec fraction_spec{"labeled fraction", "mIoU", false, target, "mIoU@90"};
    svg::write_chart((fs::path(opt.out_dir) / "curves_fraction.svg").string(),
                     fraction_series, fraction_spec);
    std::cout << (fs::path(opt.out_dir) / "curves_area.svg").string() << '\n'
              << (fs::path(opt.out_dir) / "curves_fraction.svg").string() << '\n';
  }
  return 0;
}

int cmd_separate(const SeparateOptions& opt) {
  const PointCloud cloud = load_cloud(opt.cloud_file);
  RegionSet set;
  if (opt.separation == "columns") {
    set = assign_columns(cloud, opt.edge);
  } else {
    SupervoxelParams params = opt.sv;
    params.seed = opt.seed;
    set = build_supervoxels(cloud, params);
  }
  validate_partition(set);

  double total_area = 0.0;
  std::size_t ground = 0, object = 0;
  for (const Region& region : set.regions) {
    total_area += region_area(cloud, region);
    if (region.kind == RegionKind::SupervoxelGround) ++ground;
    if (region.kind == RegionKind::SupervoxelObject) ++object;
  }

  if (!opt.out.empty()) {
    std::ofstream out(opt.out);
    if (!out) throw std::runtime_error("cannot open '" + opt.out + "'");
    write_regions(set, out);
  } else {
    write_regions(set, std::cout);
  }
  std::cout << "# regions=" << set.regions.size() << " mean_size="
            << format_double(static_cast<double>(cloud.size()) /
                             static_cast<double>(set.regions.size()))
            << " total_area_m2=" << format_double(total_area);
  if (opt.separation != "columns")
    std::cout << " ground_regions=" << ground << " object_regions=" << object;
  std::cout << '\n';
  return 0;
}

int cmd_eval(const EvalOptions& opt) {
  const PointCloud cloud = load_cloud(opt.cloud_file);
  std::ifstream in(opt.pred_file);
  if (!in) throw std::runtime_error("cannot open '" + opt.pred_file + "'");
  std::vector<int> pred;
  pred.reserve(cloud.size());
  int value = 0;
  while (in >> value) pred.push_back(value);
  if (pred.size() != cloud.size())
    throw std::runtime_error("prediction count " + std::to_string(pred.size()) +
                             " does not match cloud size " + std::to_string(cloud.size()));
  const ConfusionMatrix cm = confusion(pred, cloud.gt, cloud.class_count, opt.ignore);
  const MiouResult result = miou(cm);
  std::cout << "miou " << format_double(result.mean) << '\n';
  for (int c = 0; c < cloud.class_count; ++c)
    std::cout << "iou_c" << c << ' ' << format_double(result.per_class[c]) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"column-based active learning for point-cloud semantic segmentation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "ini file with option defaults per [subcommand] (flags win)");

  GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic train/eval scene pair");
  generate->add_option("--out", gen.out, "output path prefix")->required();
  generate->add_option("--spec", gen.spec_file, "scene spec file (key=value lines)");
  auto* gx = generate->add_option("--extent-x", gen.spec.extent_x)->check(CLI::PositiveNumber);
  auto* gy = generate->add_option("--extent-y", gen.spec.extent_y)->check(CLI::PositiveNumber);
  auto* gd = generate->add_option("--density", gen.spec.density, "points per m^2")
                 ->check(CLI::PositiveNumber);
  auto* gb = generate->add_option("--buildings", gen.spec.buildings)->check(CLI::NonNegativeNumber);
  auto* gt = generate->add_option("--trees", gen.spec.trees)->check(CLI::NonNegativeNumber);
  auto* gu = generate->add_option("--bushes", gen.spec.bushes)->check(CLI::NonNegativeNumber);
  auto* gs = generate->add_flag("--streets,!--no-streets", gen.spec.streets);
  auto* gp = generate->add_flag("--partial", gen.spec.partial,
                                "mask a random spatial half of the labels to -1");
  auto* gseed = generate->add_option("--seed", gen.spec.seed);
  generate->add_option("--eval-offset", gen.eval_offset, "seed offset of the eval scene");

  RunOptions run;
  CLI::App* runc = app.add_subcommand("run", "run active-learning experiments");
  runc->add_option("--cloud", run.cloud_file, "training cloud (.alpc or .ply)")->required();
  runc->add_option("--eval", run.eval_file, "held-out evaluation cloud");
  runc->add_option("--policy", run.policy)
      ->check(CLI::IsMember({"random", "avg_var", "avg_ent", "redal", "all"}));
  runc->add_option("--separation", run.separation)->check(CLI::IsMember({"columns", "supervoxels"}));
  runc->add_option("--r", run.edges, "column edge length(s), m")->check(CLI::PositiveNumber);
  runc->add_option("--seed", run.seeds, "one run per seed");
  runc->add_option("--cycles", run.cycles)->check(CLI::PositiveNumber);
  runc->add_option("--budget-mode", run.budget_mode)
      ->check(CLI::IsMember({"point_fraction", "area_m2", "region_count"}));
  runc->add_option("--budget", run.budget)->check(CLI::PositiveNumber);
  runc->add_option("--initial-budget-mode", run.initial_mode)
      ->check(CLI::IsMember({"point_fraction", "area_m2", "region_count"}));
  runc->add_option("--initial-budget", run.initial)->check(CLI::PositiveNumber);
  runc->add_option("--ensemble", run.ensemble, "ensemble size N")->check(CLI::PositiveNumber);
  runc->add_option("--lr", run.train.learning_rate)->check(CLI::PositiveNumber);
  runc->add_option("--epochs", run.train.epochs)->check(CLI::PositiveNumber);
  runc->add_option("--batch", run.train.batch_size)->check(CLI::PositiveNumber);
  runc->add_option("--l2", run.train.l2)->check(CLI::NonNegativeNumber);
  runc->add_option("--k-neighbors", run.train.k_neighbors)->check(CLI::Range(3, 1024));
  runc->add_option("--threads", run.train.threads, "0 = hardware")->check(CLI::NonNegativeNumber);
  runc->add_option("--augment", run.augment, "subset of SREC, or 'none'");
  runc->add_option("--alpha", run.redal.alpha)->check(CLI::NonNegativeNumber);
  runc->add_option("--beta", run.redal.beta)->check(CLI::NonNegativeNumber);
  runc->add_option("--gamma", run.redal.gamma)->check(CLI::NonNegativeNumber);
  runc->add_option("--k-div", run.diversity.clusters)->check(CLI::PositiveNumber);
  runc->add_option("--decay", run.diversity.decay)->check(CLI::Range(1e-9, 1.0));
  runc->add_flag("--redal-single-member", run.redal_single_member);
  runc->add_option("--ignore-class", run.ignore, "class ids excluded from mIoU");
  runc->add_option("--sv-ransac-iters", run.sv.ransac_iterations)->check(CLI::PositiveNumber);
  runc->add_option("--sv-inlier-threshold", run.sv.inlier_threshold)->check(CLI::PositiveNumber);
  runc->add_option("--sv-eps", run.sv.eps)->check(CLI::PositiveNumber);
  runc->add_option("--sv-min-pts", run.sv.min_pts)->check(CLI::PositiveNumber);
  runc->add_option("--sv-ground-area", run.sv.ground_region_target_area)
      ->check(CLI::PositiveNumber);
  runc->add_option("--out-dir", run.out_dir);
  runc->add_flag("--curves", run.curves, "write SVG learning curves");
  runc->add_flag("--supervised", run.supervised,
                 "compute the supervised baseline and draw the mIoU@90 rule");
  runc->add_flag("--dump-scores", run.dump_scores, "dump per-cycle region scores");

  SeparateOptions sep;
  CLI::App* separate = app.add_subcommand("separate", "dump a region separation");
  separate->add_option("--cloud", sep.cloud_file)->required();
  separate->add_option("--separation", sep.separation)
      ->check(CLI::IsMember({"columns", "supervoxels"}));
  separate->add_option("--r", sep.edge, "column edge length, m")->check(CLI::PositiveNumber);
  separate->add_option("--seed", sep.seed);
  separate->add_option("--sv-ransac-iters", sep.sv.ransac_iterations)->check(CLI::PositiveNumber);
  separate->add_option("--sv-inlier-threshold", sep.sv.inlier_threshold)->check(CLI::PositiveNumber);
  separate->add_option("--sv-eps", sep.sv.eps)->check(CLI::PositiveNumber);
  separate->add_option("--sv-min-pts", sep.sv.min_pts)->check(CLI::PositiveNumber);
  separate->add_option("--sv-ground-area", sep.sv.ground_region_target_area)
      ->check(CLI::PositiveNumber);
  separate->add_option("--out", sep.out, "write regions to a file instead of stdout");

  EvalOptions ev;
  CLI::App* evalc = app.add_subcommand("eval", "score a prediction file against ground truth");
  evalc->add_option("--pred", ev.pred_file, "one predicted label per line")->required();
  evalc->add_option("--cloud", ev.cloud_file)->required();
  evalc->add_option("--ignore-class", ev.ignore);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  if (runc->parsed()) {
    std::vector<std::uint64_t> seen = run.seeds;
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
      std::cerr << "--seed values must be distinct\n";
      return 2;
    }
  }

  try {
    if (generate->parsed()) {
      if (!gen.spec_file.empty()) {
        SceneSpec from_file = SceneSpec::from_file(gen.spec_file);
        // explicit flags override the file
        if (!*gx) gen.spec.extent_x = from_file.extent_x;
        if (!*gy) gen.spec.extent_y = from_file.extent_y;
        if (!*gd) gen.spec.density = from_file.density;
        if (!*gb) gen.spec.buildings = from_file.buildings;
        if (!*gt) gen.spec.trees = from_file.trees;
        if (!*gu) gen.spec.bushes = from_file.bushes;
        if (!*gs) gen.spec.streets = from_file.streets;
        if (!*gp) gen.spec.partial = from_file.partial;
        if (!*gseed) gen.spec.seed = from_file.seed;
      }
      return cmd_generate(gen);
    }
    if (runc->parsed()) return cmd_run(run);
    if (separate->parsed()) return cmd_separate(sep);
    if (evalc->parsed()) return cmd_eval(ev);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
