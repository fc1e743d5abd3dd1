// SPDX-License-Identifier: Apache-2.0

#include "alpc/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "alpc/eig3.hpp"
#include "alpc/kernels.hpp"
#include "alpc/parallel.hpp"
#include "alpc/rng.hpp"

namespace alpc {

namespace {

constexpr double kDensityRadius = 0.5;
constexpr double kDensityNorm = 50.0;
constexpr double kStdFloor = 1e-12;
constexpr double kElasticCell = 1.0;
constexpr double kElasticAmplitude = 0.05;

struct GeomFeatures {
  double height, surf_var, normal_z, density;
};

GeomFeatures geom_features(const double* xs, const double* ys, const double* zs,
                           const SpatialIndex& index, const PlaneModel& plane,
                           int k_neighbors, std::uint32_t point,
                           std::vector<std::uint32_t>& scratch) {
  GeomFeatures f{};
  f.height = plane.signed_distance(xs[point], ys[point], zs[point]);
  f.density = std::min(
      1.0, static_cast<double>(index.radius_count(point, kDensityRadius)) / kDensityNorm);

  index.knn_into(point, static_cast<std::size_t>(k_neighbors), scratch);
  const std::size_t m = scratch.size();
  double centroid[3];
  kern::sum3(xs, ys, zs, scratch.data(), m, centroid);
  const double inv = 1.0 / static_cast<double>(m);
  centroid[0] *= inv;
  centroid[1] *= inv;
  centroid[2] *= inv;
  double cov[6];
  kern::cov3_upper(xs, ys, zs, scratch.data(), m, centroid[0], centroid[1],
                   centroid[2], cov);
  for (double& c : cov) c *= inv;

  double lambda[3], vec[9];
  eigen_sym3(cov, lambda, vec);
  const double l1 = std::max(lambda[0], 0.0);
  const double l2 = std::max(lambda[1], 0.0);
  const double l3 = std::max(lambda[2], 0.0);
  if (l2 <= 1e-12 * std::max(l1, 1e-18)) {
    // rank < 2: no usable plane normal
    f.surf_var = 0.0;
    f.normal_z = 1.0;
  } else {
    f.surf_var = surface_variation(l1, l2, l3);
    f.normal_z = std::fabs(vec[8]);  // z of the smallest-eigenvalue vector
  }
  return f;
}

void fill_row(double* row, const GeomFeatures& gf, std::uint8_t r, std::uint8_t g,
              std::uint8_t b) {
  row[kFeatHeight] = gf.height;
  row[kFeatRed] = r / 255.0;
  row[kFeatGreen] = g / 255.0;
  row[kFeatBlue] = b / 255.0;
  row[kFeatSurfVar] = gf.surf_var;
  row[kFeatNormalZ] = gf.normal_z;
  row[kFeatDensity] = gf.density;
  row[kFeatBias] = 1.0;
}

void apply_similarity(std::vector<double>& x, std::vector<double>& y,
                      std::vector<double>& z, double s, double angle) {
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double px = x[i], py = y[i];
    x[i] = s * (c * px - sn * py);
    y[i] = s * (sn * px + c * py);
    z[i] = s * z[i];
  }
}

void apply_elastic(std::vector<double>& x, std::vector<double>& y,
                   std::vector<double>& z, Rng& rng) {
  const std::size_t n = x.size();
  double mn[3] = {x[0], y[0], z[0]}, mx[3] = {x[0], y[0], z[0]};
  for (std::size_t i = 1; i < n; ++i) {
    mn[0] = std::min(mn[0], x[i]);
    mn[1] = std::min(mn[1], y[i]);
    mn[2] = std::min(mn[2], z[i]);
    mx[0] = std::max(mx[0], x[i]);
    mx[1] = std::max(mx[1], y[i]);
    mx[2] = std::max(mx[2], z[i]);
  }
  const std::size_t gx = static_cast<std::size_t>(std::floor((mx[0] - mn[0]) / kElasticCell)) + 2;
  const std::size_t gy = static_cast<std::size_t>(std::floor((mx[1] - mn[1]) / kElasticCell)) + 2;
  const std::size_t gz = static_cast<std::size_t>(std::floor((mx[2] - mn[2]) / kElasticCell)) + 2;
  std::normal_distribution<double> noise(0.0, kElasticAmplitude);
  std::vector<double> field(gx * gy * gz * 3);
  for (double& v : field) v = noise(rng);

  auto node = [&](std::size_t ix, std::size_t iy, std::size_t iz) {
    return (ix + gx * (iy + gy * iz)) * 3;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (x[i] - mn[0]) / kElasticCell;
    const double v = (y[i] - mn[1]) / kElasticCell;
    const double w = (z[i] - mn[2]) / kElasticCell;
    const std::size_t ix = std::min(gx - 2, static_cast<std::size_t>(u));
    const std::size_t iy = std::min(gy - 2, static_cast<std::size_t>(v));
    const std::size_t iz = std::min(gz - 2, static_cast<std::size_t>(w));
    const double fu = u - static_cast<double>(ix);
    const double fv = v - static_cast<double>(iy);
    const double fw = w - static_cast<double>(iz);
    double d[3] = {0.0, 0.0, 0.0};
    for (int cz = 0; cz < 2; ++cz) {
      for (int cy = 0; cy < 2; ++cy) {
        for (int cx = 0; cx < 2; ++cx) {
          const double wgt = (cx ? fu : 1.0 - fu) * (cy ? fv : 1.0 - fv) *
                             (cz ? fw : 1.0 - fw);
          const double* nd = field.data() + node(ix + cx, iy + cy, iz + cz);
          d[0] += wgt * nd[0];
          d[1] += wgt * nd[1];
          d[2] += wgt * nd[2];
        }
      }
    }
    x[i] += d[0];
    y[i] += d[1];
    z[i] += d[2];
  }
}

std::uint8_t jitter_channel(std::uint8_t c, double delta) {
  const double v = std::round(static_cast<double>(c) + delta);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

void softmax_from_logits(double* z, int classes) {
  double max = z[0];
  for (int c = 1; c < classes; ++c) max = std::max(max, z[c]);
  double total = 0.0;
  for (int c = 0; c < classes; ++c) {
    z[c] = std::exp(z[c] - max);
    total += z[c];
  }
  const double inv = 1.0 / total;
  for (int c = 0; c < classes; ++c) z[c] *= inv;
}

struct TrainingSet {
  std::vector<std::uint32_t> rows;   // cloud indices of labeled points
  std::vector<int> labels;           // per row
  std::vector<double> weights;       // per row, inverse class frequency
  std::vector<double> clean;         // standardized features, row-major
  std::vector<double> raw_rows;      // unstandardized features, row-major
  // Sorted squared neighbor distances per row out to the largest density
  // ball any scale factor can request (CSR layout); lets scaled epochs
  // count by binary search with exactly the radius-query predicate.
  std::vector<std::size_t> density_offsets;
  std::vector<double> density_d2;
};

}  // namespace

double surface_variation(double l1, double l2, double l3) {
  const double total = l1 + l2 + l3;
  if (total < 1e-18) return 0.0;
  return l3 / total;
}

FeatureMatrix extract_features(const PointCloud& cloud, const SpatialIndex& index,
                               const PlaneModel& ground, int k_neighbors,
                               int threads) {
  if (k_neighbors < 3)
    throw std::invalid_argument("extract_features: k_neighbors must be >= 3");
  if (index.size() != cloud.size())
    throw std::invalid_argument("extract_features: index does not match cloud");
  FeatureMatrix fm;
  fm.rows = cloud.size();
  fm.cols = kFeatureCount;
  fm.values.resize(fm.rows * fm.cols);
  parallel_for(0, fm.rows, threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<std::uint32_t> scratch;
    for (std::size_t i = lo; i < hi; ++i) {
      const GeomFeatures gf =
          geom_features(cloud.x.data(), cloud.y.data(), cloud.z.data(), index,
                        ground, k_neighbors, static_cast<std::uint32_t>(i), scratch);
      fill_row(fm.row(i), gf, cloud.r[i], cloud.g[i], cloud.b[i]);
    }
  });
  return fm;
}

void fit_standardizer(const FeatureMatrix& raw, std::span<const char> row_mask,
                      std::vector<double>& mean, std::vector<double>& stdev) {
  if (row_mask.size() != raw.rows)
    throw std::invalid_argument("fit_standardizer: mask size mismatch");
  mean.assign(raw.cols, 0.0);
  stdev.assign(raw.cols, 1.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < raw.rows; ++i) {
    if (!row_mask[i]) continue;
    ++count;
    const double* row = raw.row(i);
    for (std::size_t c = 0; c < raw.cols; ++c) mean[c] += row[c];
  }
  if (count == 0) throw std::invalid_argument("fit_standardizer: no rows selected");
  for (double& m : mean) m /= static_cast<double>(count);
  std::vector<double> var(raw.cols, 0.0);
  for (std::size_t i = 0; i < raw.rows; ++i) {
    if (!row_mask[i]) continue;
    const double* row = raw.row(i);
    for (std::size_t c = 0; c < raw.cols; ++c) {
      const double d = row[c] - mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < raw.cols; ++c)
    stdev[c] = std::max(std::sqrt(var[c] / static_cast<double>(count)), kStdFloor);
  if (raw.cols == kFeatureCount) {
    mean[kFeatBias] = 0.0;
    stdev[kFeatBias] = 1.0;
  }
}

FeatureMatrix standardize(const FeatureMatrix& raw, std::span<const double> mean,
                          std::span<const double> stdev) {
  if (mean.size() != raw.cols || stdev.size() != raw.cols)
    throw std::invalid_argument("standardize: parameter size mismatch");
  FeatureMatrix out;
  out.rows = raw.rows;
  out.cols = raw.cols;
  out.values.resize(raw.values.size());
  out.mean.assign(mean.begin(), mean.end());
  out.stdev.assign(stdev.begin(), stdev.end());
  out.standardized = true;
  for (std::size_t i = 0; i < raw.rows; ++i) {
    const double* src = raw.row(i);
    double* dst = out.row(i);
    for (std::size_t c = 0; c < raw.cols; ++c) dst[c] = (src[c] - mean[c]) / stdev[c];
  }
  return out;
}

AugmentResult augment(std::span<const double> x, std::span<const double> y,
                      std::span<const double> z, std::span<const std::uint8_t> r,
                      std::span<const std::uint8_t> g,
                      std::span<const std::uint8_t> b, const AugmentConfig& config,
                      std::uint64_t seed) {
  AugmentResult out;
  out.x.assign(x.begin(), x.end());
  out.y.assign(y.begin(), y.end());
  out.z.assign(z.begin(), z.end());
  out.r.assign(r.begin(), r.end());
  out.g.assign(g.begin(), g.end());
  out.b.assign(b.begin(), b.end());

  Rng rng(seed);
  double s = 1.0, angle = 0.0;
  if (config.scale) s = std::uniform_real_distribution<double>(0.9, 1.1)(rng);
  if (config.rotation)
    angle = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  if (config.scale || config.rotation) apply_similarity(out.x, out.y, out.z, s, angle);
  if (config.elastic && !out.x.empty()) apply_elastic(out.x, out.y, out.z, rng);
  if (config.chromatic) {
    std::uniform_real_distribution<double> jitter(-10.0, 10.0);
    for (std::size_t i = 0; i < out.r.size(); ++i) {
      out.r[i] = jitter_channel(out.r[i], jitter(rng));
      out.g[i] = jitter_channel(out.g[i], jitter(rng));
      out.b[i] = jitter_channel(out.b[i], jitter(rng));
    }
  }
  return out;
}

PlaneModel transform_plane(const PlaneModel& plane, double scale_factor,
                           double angle) {
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  PlaneModel out = plane;
  out.normal.x = c * plane.normal.x - sn * plane.normal.y;
  out.normal.y = sn * plane.normal.x + c * plane.normal.y;
  out.normal.z = plane.normal.z;
  out.offset = scale_factor * plane.offset;
  out.inlier_threshold = scale_factor * plane.inlier_threshold;
  return out;
}

double softmax_objective(std::span<const double> w, int classes,
                         std::size_t features, const double* rows,
                         const int* labels, const double* sample_weights,
                         std::size_t count, double l2, double* grad) {
  if (w.size() != static_cast<std::size_t>(classes) * features)
    throw std::invalid_argument("softmax_objective: weight shape mismatch");
  if (count == 0) throw std::invalid_argument("softmax_objective: empty batch");
  const std::size_t wsize = w.size();
  if (grad) std::fill(grad, grad + wsize, 0.0);

  std::vector<double> logits(classes);
  double loss = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double* xr = rows + i * features;
    kern::gemv_rm(w.data(), classes, features, xr, logits.data());
    double max = logits[0];
    for (int c = 1; c < classes; ++c) max = std::max(max, logits[c]);
    double total = 0.0;
    for (int c = 0; c < classes; ++c) total += std::exp(logits[c] - max);
    const int y = labels[i];
    const double wi = sample_weights[i];
    loss += wi * (std::log(total) - (logits[y] - max));
    if (grad) {
      const double inv = 1.0 / total;
      std::vector<double> coef(classes);
      for (int c = 0; c < classes; ++c) {
        const double p = std::exp(logits[c] - max) * inv;
        coef[c] = wi * (p - (c == y ? 1.0 : 0.0));
      }
      kern::rank1_acc(grad, coef.data(), xr, classes, features);
    }
  }
  loss /= static_cast<double>(count);
  double sq = kern::dot(w.data(), w.data(), wsize);
  loss += 0.5 * l2 * sq;
  if (grad) {
    kern::scale(1.0 / static_cast<double>(count), grad, wsize);
    kern::axpy(l2, w.data(), grad, wsize);
  }
  return loss;
}

namespace {

// Features for the labeled rows of one augmented epoch.
void epoch_features(const PointCloud& cloud,
                    const PlaneModel& ground, const TrainConfig& config,
                    const AugmentConfig& aug, const TrainingSet& ts, Rng& rng,
                    const std::vector<double>& mean, const std::vector<double>& stdev,
                    std::vector<double>& out) {
  const std::size_t count = ts.rows.size();
  out.resize(count * kFeatureCount);

  double s = 1.0, angle = 0.0;
  if (aug.scale) s = std::uniform_real_distribution<double>(0.9, 1.1)(rng);
  if (aug.rotation)
    angle = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);

  if (aug.elastic) {
    // The displacement field deforms neighborhoods, so extract from scratch
    // on the transformed positions.
    std::vector<double> tx = cloud.x, ty = cloud.y, tz = cloud.z;
    if (aug.scale || aug.rotation) apply_similarity(tx, ty, tz, s, angle);
    apply_elastic(tx, ty, tz, rng);
    const PlaneModel plane_t = transform_plane(ground, s, angle);
    const SpatialIndex index_t = SpatialIndex::build(tx, ty, tz);
    std::vector<std::uint32_t> scratch;
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t p = ts.rows[i];
      const GeomFeatures gf = geom_features(tx.data(), ty.data(), tz.data(), index_t,
                                            plane_t, config.k_neighbors, p, scratch);
      fill_row(out.data() + i * kFeatureCount, gf, cloud.r[p], cloud.g[p], cloud.b[p]);
    }
  } else if (aug.scale || aug.rotation) {
    // A similarity transform leaves surface variation and |normal z|
    // unchanged, scales heights by s and turns the 0.5 m density ball into
    // radius 0.5/s around the original positions.
    const double ball = kDensityRadius / s;
    const double r2 = ball * ball;
    for (std::size_t i = 0; i < count; ++i) {
      double* row = out.data() + i * kFeatureCount;
      std::copy_n(ts.raw_rows.data() + i * kFeatureCount, kFeatureCount, row);
      row[kFeatHeight] = s * row[kFeatHeight];
      if (aug.scale) {
        const double* lo = ts.density_d2.data() + ts.density_offsets[i];
        const double* hi = ts.density_d2.data() + ts.density_offsets[i + 1];
        const auto inside = std::upper_bound(lo, hi, r2);
        row[kFeatDensity] =
            std::min(1.0, static_cast<double>(inside - lo) / kDensityNorm);
      }
    }
  } else {
    std::copy_n(ts.raw_rows.data(), count * kFeatureCount, out.data());
  }

  if (aug.chromatic) {
    std::uniform_real_distribution<double> jitter(-10.0, 10.0);
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t p = ts.rows[i];
      double* row = out.data() + i * kFeatureCount;
      row[kFeatRed] = jitter_channel(cloud.r[p], jitter(rng)) / 255.0;
      row[kFeatGreen] = jitter_channel(cloud.g[p], jitter(rng)) / 255.0;
      row[kFeatBlue] = jitter_channel(cloud.b[p], jitter(rng)) / 255.0;
    }
  }

  for (std::size_t i = 0; i < count; ++i) {
    double* row = out.data() + i * kFeatureCount;
    for (std::size_t c = 0; c < kFeatureCount; ++c)
      row[c] = (row[c] - mean[c]) / stdev[c];
  }
}

Member train_member(const PointCloud& cloud,
                    const PlaneModel& ground, const TrainConfig& config,
                    const AugmentConfig& aug, const TrainingSet& ts,
                    const std::vector<double>& mean, const std::vector<double>& stdev,
                    int classes, std::uint64_t seed) {
  const std::size_t count = ts.rows.size();
  const std::size_t wsize = static_cast<std::size_t>(classes) * kFeatureCount;

  Member member;
  member.seed = seed;
  member.weights.resize(wsize);
  Rng rng(seed);
  std::normal_distribution<double> init(0.0, 0.5);
  for (double& w : member.weights) w = init(rng);

  std::vector<std::uint32_t> perm(count);
  for (std::size_t i = 0; i < count; ++i) perm[i] = static_cast<std::uint32_t>(i);

  const std::size_t batch_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(config.batch_size));
  std::vector<double> epoch_rows;
  std::vector<double> grad(wsize);
  std::vector<double> logits(classes), coef(classes);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double* rows = ts.clean.data();
    if (aug.any()) {
      epoch_features(cloud, ground, config, aug, ts, rng, mean, stdev, epoch_rows);
      rows = epoch_rows.data();
    }
    std::shuffle(perm.begin(), perm.end(), rng);

    for (std::size_t start = 0; start < count; start += batch_size) {
      const std::size_t stop = std::min(count, start + batch_size);
      const std::size_t bsz = stop - start;
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::uint32_t row = perm[bi];
        const double* xr = rows + static_cast<std::size_t>(row) * kFeatureCount;
        kern::gemv_rm(member.weights.data(), classes, kFeatureCount, xr, logits.data());
        softmax_from_logits(logits.data(), classes);
        const int y = ts.labels[row];
        const double wi = ts.weights[row];
        for (int c = 0; c < classes; ++c)
          coef[c] = wi * (logits[c] - (c == y ? 1.0 : 0.0));
        kern::rank1_acc(grad.data(), coef.data(), xr, classes, kFeatureCount);
      }
      kern::scale(1.0 - config.learning_rate * config.l2, member.weights.data(), wsize);
      kern::axpy(-config.learning_rate / static_cast<double>(bsz), grad.data(),
                 member.weights.data(), wsize);
    }

    member.loss_history.push_back(softmax_objective(
        member.weights, classes, kFeatureCount, ts.clean.data(), ts.labels.data(),
        ts.weights.data(), count, config.l2, nullptr));
  }
  member.epochs_run = config.epochs;
  member.final_loss = member.loss_history.empty() ? 0.0 : member.loss_history.back();
  return member;
}

}  // namespace

Ensemble train_ensemble(const PointCloud& cloud, const FeatureMatrix& raw_features,
                        const SpatialIndex& index, const PlaneModel& ground,
                        int ensemble_size, const TrainConfig& config,
                        std::uint64_t base_seed, const AugmentConfig& augment_config) {
  if (ensemble_size < 1)
    throw std::invalid_argument("train_ensemble: ensemble size must be >= 1");
  if (raw_features.rows != cloud.size() || raw_features.cols != kFeatureCount)
    throw std::invalid_argument("train_ensemble: feature matrix shape mismatch");
  if (raw_features.standardized)
    throw std::invalid_argument("train_ensemble: expected raw features");
  if (index.size() != cloud.size())
    throw std::invalid_argument("train_ensemble: index does not match cloud");

  std::vector<int> seen;
  for (const int label : cloud.gt)
    if (label != -1 &&
        std::find(seen.begin(), seen.end(), label) == seen.end())
      seen.push_back(label);
  if (seen.size() < 2)
    throw std::invalid_argument(
        "train_ensemble: cloud needs at least 2 distinct ground-truth labels");

  TrainingSet ts;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud.known[i] && cloud.gt[i] != -1)
      ts.rows.push_back(static_cast<std::uint32_t>(i));
  if (ts.rows.empty())
    throw std::runtime_error(
        "train_ensemble: no labeled points; seed the active-learning loop first");

  const int classes = cloud.class_count;
  std::vector<std::size_t> class_count(classes, 0);
  ts.labels.reserve(ts.rows.size());
  for (const std::uint32_t p : ts.rows) {
    ts.labels.push_back(cloud.gt[p]);
    ++class_count[cloud.gt[p]];
  }
  std::size_t present = 0;
  for (const std::size_t c : class_count) present += (c > 0) ? 1 : 0;
  ts.weights.reserve(ts.rows.size());
  for (const int y : ts.labels)
    ts.weights.push_back(static_cast<double>(ts.rows.size()) /
                         (static_cast<double>(present) * static_cast<double>(class_count[y])));

  Ensemble ensemble;
  ensemble.class_count = classes;
  ensemble.feature_count = kFeatureCount;
  std::vector<char> mask(cloud.size(), 0);
  for (const std::uint32_t p : ts.rows) mask[p] = 1;
  fit_standardizer(raw_features, mask, ensemble.feat_mean, ensemble.feat_stdev);

  ts.clean.resize(ts.rows.size() * kFeatureCount);
  ts.raw_rows.resize(ts.rows.size() * kFeatureCount);
  for (std::size_t i = 0; i < ts.rows.size(); ++i) {
    const double* src = raw_features.row(ts.rows[i]);
    double* dst = ts.clean.data() + i * kFeatureCount;
    std::copy_n(src, kFeatureCount, ts.raw_rows.data() + i * kFeatureCount);
    for (std::size_t c = 0; c < kFeatureCount; ++c)
      dst[c] = (src[c] - ensemble.feat_mean[c]) / ensemble.feat_stdev[c];
  }

  if (augment_config.scale && !augment_config.elastic) {
    // largest ball a scale factor in [0.9, 1.1] can request
    const double reach = kDensityRadius / 0.9;
    ts.density_offsets.assign(ts.rows.size() + 1, 0);
    std::vector<std::vector<double>> per_row(ts.rows.size());
    parallel_for(0, ts.rows.size(), config.threads, [&](std::size_t lo, std::size_t hi) {
      std::vector<std::uint32_t> neigh;
      std::vector<double> d2;
      for (std::size_t i = lo; i < hi; ++i) {
        index.radius_into(ts.rows[i], reach, neigh);
        d2.resize(neigh.size());
        kern::sq_dist3(cloud.x[ts.rows[i]], cloud.y[ts.rows[i]], cloud.z[ts.rows[i]],
                       cloud.x.data(), cloud.y.data(), cloud.z.data(), neigh.data(),
                       neigh.size(), d2.data());
        std::sort(d2.begin(), d2.end());
        per_row[i] = d2;
      }
    });
    for (std::size_t i = 0; i < per_row.size(); ++i)
      ts.density_offsets[i + 1] = ts.density_offsets[i] + per_row[i].size();
    ts.density_d2.resize(ts.density_offsets.back());
    for (std::size_t i = 0; i < per_row.size(); ++i)
      std::copy(per_row[i].begin(), per_row[i].end(),
                ts.density_d2.begin() + ts.density_offsets[i]);
  }

  ensemble.members.resize(ensemble_size);
  parallel_for(0, static_cast<std::size_t>(ensemble_size), config.threads,
               [&](std::size_t lo, std::size_t hi) {
                 for (std::size_t m = lo; m < hi; ++m)
                   ensemble.members[m] = train_member(
                       cloud, ground, config, augment_config, ts,
                       ensemble.feat_mean, ensemble.feat_stdev, classes,
                       base_seed + m);
               });
  return ensemble;
}

ProbabilityTensor predict_proba(const Ensemble& ensemble,
                                const FeatureMatrix& raw_features, int threads) {
  if (raw_features.cols != ensemble.feature_count)
    throw std::invalid_argument("predict_proba: feature width mismatch");
  const int members = static_cast<int>(ensemble.members.size());
  const std::size_t n = raw_features.rows;
  const int classes = ensemble.class_count;

  ProbabilityTensor tensor;
  tensor.members = members;
  tensor.points = n;
  tensor.classes = classes;
  tensor.values.resize(static_cast<std::size_t>(members) * n * classes);

  parallel_for(0, n, threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> feat(ensemble.feature_count);
    for (std::size_t p = lo; p < hi; ++p) {
      const double* src = raw_features.row(p);
      if (raw_features.standardized) {
        std::copy_n(src, ensemble.feature_count, feat.data());
      } else {
        for (std::size_t c = 0; c < ensemble.feature_count; ++c)
          feat[c] = (src[c] - ensemble.feat_mean[c]) / ensemble.feat_stdev[c];
      }
      for (int m = 0; m < members; ++m) {
        double* row = tensor.row(m, p);
        kern::gemv_rm(ensemble.members[m].weights.data(), classes,
                      ensemble.feature_count, feat.data(), row);
        softmax_from_logits(row, classes);
      }
    }
  });
  return tensor;
}

int argmax_class(const double* row, int classes) {
  int best = 0;
  for (int c = 1; c < classes; ++c)
    if (row[c] > row[best]) best = c;
  return best;
}

}  // namespace alpc
