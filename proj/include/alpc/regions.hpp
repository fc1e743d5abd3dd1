// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_REGIONS_HPP
#define ALPC_REGIONS_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "alpc/cloud.hpp"
#include "alpc/spatial.hpp"

namespace alpc {

enum class RegionKind { Column, SupervoxelGround, SupervoxelObject };
const char* region_kind_name(RegionKind kind);

struct Region {
  int id = 0;
  RegionKind kind = RegionKind::Column;
  std::optional<std::array<std::int64_t, 2>> cell;  // (i, j) for columns
  std::vector<std::uint32_t> points;                // sorted ascending, non-empty
  AABB bbox;
};

// A full partition of the cloud's point indices: regions are pairwise
// disjoint and their union covers every index.
struct RegionSet {
  std::vector<Region> regions;
  std::optional<double> resolution;  // column edge length, if columns
  std::size_t total_points = 0;
};

// Throws std::logic_error if the set is not a partition of
// [0, total_points) or a region violates its invariants.
void validate_partition(const RegionSet& set);

// Grid columns: point i goes to cell (floor(x/r), floor(y/r)). The grid
// origin is world (0,0); only non-empty cells become regions, ordered by
// ascending (i, j).
RegionSet assign_columns(const PointCloud& cloud, double r);

struct PlaneModel {
  Vec3 normal;  // unit length, z-component >= 0
  double offset = 0.0;  // plane is normal . p = offset
  double inlier_threshold = 0.1;

  double signed_distance(double x, double y, double z) const {
    return normal.x * x + normal.y * y + normal.z * z - offset;
  }
};

// RANSAC over `iterations` random 3-point samples; the best plane by inlier
// count wins (first winner kept on ties). Deterministic under seed. Throws
// if no non-degenerate sample is found (e.g. all points collinear).
std::pair<PlaneModel, std::vector<std::uint32_t>> fit_ground_plane(
    const PointCloud& cloud, int iterations, double inlier_threshold,
    std::uint64_t seed);

// DBSCAN over a subset of cloud points. `sub_index` must be built over
// exactly the subset coordinates, in subset order. A core point has at
// least min_pts neighbors (itself included) within eps. Returns one label
// per subset entry, -1 for noise. Cluster ids are assigned in order of the
// first core point encountered by ascending subset position; border points
// go to the first cluster that claims them.
std::vector<int> dbscan(const PointCloud& cloud,
                        std::span<const std::uint32_t> subset, double eps,
                        int min_pts, const SpatialIndex& sub_index);

struct KmeansResult {
  std::vector<int> assignments;
  std::vector<double> centroids;  // K x dim row-major
  std::vector<double> objective_history;  // after each assignment step
};

// k-means++ seeding followed by Lloyd iterations until the assignment is a
// fixpoint or max_iters is hit. Ties go to the lowest centroid index;
// clusters that empty out keep their previous centroid.
KmeansResult kmeans(std::span<const double> points, std::size_t dim, int k,
                    int max_iters, std::uint64_t seed);

struct SupervoxelParams {
  int ransac_iterations = 200;
  double inlier_threshold = 0.1;
  double eps = 0.5;
  int min_pts = 5;
  double ground_region_target_area = 4.0;  // m^2 per k-means ground region
  std::uint64_t seed = 1;
};

// Ground plane via RANSAC, DBSCAN on the rest (noise merged into the
// nearest cluster by centroid distance, or singleton regions when no
// cluster exists), then k-means over the ground points' XY with
// K = ceil(ground XY bbox area / ground_region_target_area).
RegionSet build_supervoxels(const PointCloud& cloud, const SupervoxelParams& params);

// One line per region: `id kind i j n_points x0 y0 z0 x1 y1 z1`
// (supervoxels print `- -` for the cell).
void write_regions(const RegionSet& set, std::ostream& out);

}  // namespace alpc

#endif  // ALPC_REGIONS_HPP
