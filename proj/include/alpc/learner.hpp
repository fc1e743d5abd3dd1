// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_LEARNER_HPP
#define ALPC_LEARNER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "alpc/cloud.hpp"
#include "alpc/regions.hpp"
#include "alpc/spatial.hpp"

namespace alpc {

// Per-point feature columns. The bias column is exempt from
// standardization (its parameters are stored as mean 0, std 1).
enum FeatureColumn : int {
  kFeatHeight = 0,   // signed height above the fitted ground plane (m)
  kFeatRed = 1,      // r / 255
  kFeatGreen = 2,    // g / 255
  kFeatBlue = 3,     // b / 255
  kFeatSurfVar = 4,  // lambda3 / (lambda1 + lambda2 + lambda3)
  kFeatNormalZ = 5,  // |z| of the neighborhood plane normal
  kFeatDensity = 6,  // min(1, |ball(0.5 m)| / 50)
  kFeatBias = 7,
};
constexpr std::size_t kFeatureCount = 8;

struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major
  std::vector<double> mean, stdev;  // standardization parameters
  bool standardized = false;

  double* row(std::size_t i) { return values.data() + i * cols; }
  const double* row(std::size_t i) const { return values.data() + i * cols; }
};

// lambda3 / (lambda1 + lambda2 + lambda3) for eigenvalues sorted
// descending; 0 when the sum is below 1e-18. Planar neighborhoods give 0,
// isotropic ones 1/3.
double surface_variation(double l1, double l2, double l3);

// Raw (unstandardized) features for every point. Degenerate neighborhoods
// (rank < 2 covariance) get surface variation 0 and normal (0,0,1).
FeatureMatrix extract_features(const PointCloud& cloud, const SpatialIndex& index,
                               const PlaneModel& ground, int k_neighbors,
                               int threads = 1);

// Per-column mean/std over the rows where row_mask is true; std floored at
// 1e-12. The bias column gets (0, 1).
void fit_standardizer(const FeatureMatrix& raw, std::span<const char> row_mask,
                      std::vector<double>& mean, std::vector<double>& stdev);

FeatureMatrix standardize(const FeatureMatrix& raw, std::span<const double> mean,
                          std::span<const double> stdev);

struct AugmentConfig {
  bool scale = false;
  bool rotation = false;
  bool elastic = false;
  bool chromatic = false;

  bool any() const { return scale || rotation || elastic || chromatic; }
  bool any_geometric() const { return scale || rotation || elastic; }
};

struct AugmentResult {
  std::vector<double> x, y, z;
  std::vector<std::uint8_t> r, g, b;
};

// scale: uniform factor in [0.9, 1.1] on xyz; rotation: uniform angle about
// the z-axis; elastic: trilinear interpolation of a coarse Gaussian grid
// (1 m cells, 0.05 m amplitude) added to xyz; chromatic: per-point uniform
// jitter in [-10, 10] per channel, clamped to [0, 255]. Applied in that
// order, deterministic under seed.
AugmentResult augment(std::span<const double> x, std::span<const double> y,
                      std::span<const double> z, std::span<const std::uint8_t> r,
                      std::span<const std::uint8_t> g,
                      std::span<const std::uint8_t> b, const AugmentConfig& config,
                      std::uint64_t seed);

// Image of a plane under the geometric part of an augmentation (scale s,
// rotation angle about z).
PlaneModel transform_plane(const PlaneModel& plane, double scale_factor,
                           double angle);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 50;
  int batch_size = 256;
  double l2 = 1e-4;
  int k_neighbors = 16;
  int threads = 1;
};

struct Member {
  std::vector<double> weights;  // class_count x feature_count, row-major
  std::uint64_t seed = 0;
  int epochs_run = 0;
  double final_loss = 0.0;
  std::vector<double> loss_history;  // objective on the clean training rows
};

struct Ensemble {
  std::vector<Member> members;
  int class_count = 0;
  std::size_t feature_count = 0;
  std::vector<double> feat_mean, feat_stdev;  // shared standardizer
};

// Probabilities, shape (members x points x classes); every (member, point)
// row sums to 1.
struct ProbabilityTensor {
  int members = 0;
  std::size_t points = 0;
  int classes = 0;
  std::vector<double> values;

  const double* row(int m, std::size_t p) const {
    return values.data() + (static_cast<std::size_t>(m) * points + p) * classes;
  }
  double* row(int m, std::size_t p) {
    return values.data() + (static_cast<std::size_t>(m) * points + p) * classes;
  }
};

// Weighted cross-entropy plus (l2/2)||W||^2 over rows of a standardized
// feature matrix; fills grad (same shape as w) when non-null.
double softmax_objective(std::span<const double> w, int classes,
                         std::size_t features, const double* rows,
                         const int* labels, const double* sample_weights,
                         std::size_t count, double l2, double* grad);

// Trains `ensemble_size` members on the revealed labels (known mask), each
// with seed = base_seed + member index: independent init and shuffling,
// mini-batch SGD on class-weighted cross-entropy with L2. Geometric
// augmentations re-derive the features from the transformed positions each
// epoch: scale/rotation are similarities, so surface variation and |normal
// z| carry over exactly, heights scale by the factor and the density ball
// becomes radius 0.5/s on the original index; elastic deforms
// neighborhoods and triggers a full re-extraction. Chromatic-only epochs
// reuse the cached geometric features.
Ensemble train_ensemble(const PointCloud& cloud, const FeatureMatrix& raw_features,
                        const SpatialIndex& index, const PlaneModel& ground,
                        int ensemble_size, const TrainConfig& config,
                        std::uint64_t base_seed, const AugmentConfig& augment_config);

// Per-member softmax probabilities for every row. Accepts the raw feature
// matrix and standardizes it with the ensemble's parameters.
ProbabilityTensor predict_proba(const Ensemble& ensemble,
                                const FeatureMatrix& raw_features,
                                int threads = 1);

// Lowest class id among the maxima.
int argmax_class(const double* row, int classes);

}  // namespace alpc

#endif  // ALPC_LEARNER_HPP
