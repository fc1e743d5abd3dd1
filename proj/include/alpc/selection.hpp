// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_SELECTION_HPP
#define ALPC_SELECTION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alpc/cloud.hpp"
#include "alpc/learner.hpp"
#include "alpc/regions.hpp"

namespace alpc {

enum class Policy { Random, AvgVar, AvgEnt, Redal };
const char* policy_name(Policy policy);
Policy policy_from_name(const std::string& name);

struct AcquisitionScore {
  int region_id = 0;
  double score = 0.0;
  Policy policy = Policy::Random;
  int cycle = 0;
};

enum class BudgetMode { PointFraction, AreaM2, RegionCount };
const char* budget_mode_name(BudgetMode mode);
BudgetMode budget_mode_from_name(const std::string& name);

struct SelectionBudget {
  BudgetMode mode = BudgetMode::PointFraction;
  double amount = 0.01;  // > 0
};

// p_hat(c|x) = mean over members; n x classes row-major.
std::vector<double> ensemble_mean_proba(const ProbabilityTensor& tensor);

// Variation ratio 1 - f_m/N: each member votes the argmax of its
// distribution (ties to the lowest class id); f_m is the frequency of the
// most voted class.
double var_point(const ProbabilityTensor& tensor, std::size_t point);
std::vector<double> var_points(const ProbabilityTensor& tensor);

// Shannon entropy, natural log, 0 log 0 = 0.
double ent_point(std::span<const double> distribution);
std::vector<double> ent_points(std::span<const double> mean_proba, int classes);

double region_mean(std::span<const double> point_scores, const Region& region);

// Mean RGB distance (channels in [0,1]) from each point to its k nearest
// neighbors, the point itself excluded.
std::vector<double> color_discontinuity(const PointCloud& cloud,
                                        const SpatialIndex& index, int k,
                                        int threads = 1);

struct RedalWeights {
  double alpha = 1.0;  // softmax entropy
  double beta = 0.5;   // color discontinuity
  double gamma = 0.5;  // surface variation
};

struct RedalDiversity {
  int clusters = 10;
  double decay = 0.95;  // in (0, 1]
};

// base(S) = alpha*mean entropy + beta*mean color discontinuity +
// gamma*mean surface variation; candidates are k-means-clustered over their
// feature vectors and, within each cluster, the score decays by
// decay^rank in descending base order.
std::vector<AcquisitionScore> redal_score(
    const RegionSet& regions, std::span<const int> candidate_ids,
    std::span<const double> point_entropy, std::span<const double> color_disc,
    std::span<const double> surf_var, const RedalWeights& weights,
    const RedalDiversity& diversity, std::span<const double> region_features,
    std::size_t feature_dim, std::uint64_t seed, int cycle);

// Greedy fill by descending score (ties to the lower region id) until the
// next region would exceed the budget; always takes at least one region.
std::vector<int> select_regions(std::span<const AcquisitionScore> scores,
                                const RegionSet& regions,
                                const SelectionBudget& budget,
                                const PointCloud& cloud);

// Seeded uniform shuffle of the candidates, then the same greedy fill.
std::vector<int> random_policy(std::span<const int> candidate_ids,
                               const RegionSet& regions,
                               const SelectionBudget& budget,
                               const PointCloud& cloud, std::uint64_t seed);

}  // namespace alpc

#endif  // ALPC_SELECTION_HPP
