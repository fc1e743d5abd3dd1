// SPDX-License-Identifier: Apache-2.0

#include "alpc/regions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "alpc/rng.hpp"

namespace alpc {

const char* region_kind_name(RegionKind kind) {
  switch (kind) {
    case RegionKind::Column: return "column";
    case RegionKind::SupervoxelGround: return "supervoxel_ground";
    case RegionKind::SupervoxelObject: return "supervoxel_object";
  }
  return "?";
}

void validate_partition(const RegionSet& set) {
  std::vector<char> seen(set.total_points, 0);
  std::size_t covered = 0;
  for (const Region& region : set.regions) {
    if (region.points.empty())
      throw std::logic_error("region " + std::to_string(region.id) + " is empty");
    std::uint32_t prev = 0;
    bool first = true;
    for (const std::uint32_t p : region.points) {
      if (p >= set.total_points)
        throw std::logic_error("region point index out of range");
      if (!first && p <= prev)
        throw std::logic_error("region points not strictly ascending");
      if (seen[p])
        throw std::logic_error("regions overlap at point " + std::to_string(p));
      seen[p] = 1;
      ++covered;
      prev = p;
      first = false;
    }
  }
  if (covered != set.total_points)
    throw std::logic_error("regions do not cover the cloud");
}

RegionSet assign_columns(const PointCloud& cloud, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("assign_columns: r must be > 0");
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::uint32_t>> cells;
  constexpr double kCellLimit = 9.0e18;  // keep floor(x/r) inside int64
  for (std::size_t p = 0; p < cloud.size(); ++p) {
    const double fi = std::floor(cloud.x[p] / r);
    const double fj = std::floor(cloud.y[p] / r);
    if (std::fabs(fi) > kCellLimit || std::fabs(fj) > kCellLimit)
      throw std::invalid_argument("assign_columns: coordinates too large for edge " +
                                  format_double(r));
    cells[{static_cast<std::int64_t>(fi), static_cast<std::int64_t>(fj)}].push_back(
        static_cast<std::uint32_t>(p));
  }
  RegionSet set;
  set.resolution = r;
  set.total_points = cloud.size();
  set.regions.reserve(cells.size());
  int id = 0;
  for (auto& [coord, points] : cells) {
    Region region;
    region.id = id++;
    region.kind = RegionKind::Column;
    region.cell = {{coord.first, coord.second}};
    region.bbox = bounding_box(cloud, points);
    region.points = std::move(points);
    set.regions.push_back(std::move(region));
  }
  return set;
}

std::pair<PlaneModel, std::vector<std::uint32_t>> fit_ground_plane(
    const PointCloud& cloud, int iterations, double inlier_threshold,
    std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (n < 3) throw std::invalid_argument("fit_ground_plane: need at least 3 points");
  if (iterations < 1) throw std::invalid_argument("fit_ground_plane: iterations must be >= 1");
  if (inlier_threshold < 0.0)
    throw std::invalid_argument("fit_ground_plane: negative inlier threshold");

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  Vec3 best_normal;
  double best_offset = 0.0;
  std::size_t best_inliers = 0;
  bool found = false;

  for (int it = 0; it < iterations; ++it) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    std::size_t c = pick(rng);
    if (a == b || a == c || b == c) continue;
    const double ux = cloud.x[b] - cloud.x[a];
    const double uy = cloud.y[b] - cloud.y[a];
    const double uz = cloud.z[b] - cloud.z[a];
    const double vx = cloud.x[c] - cloud.x[a];
    const double vy = cloud.y[c] - cloud.y[a];
    const double vz = cloud.z[c] - cloud.z[a];
    Vec3 nrm{uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx};
    const double len = std::sqrt(nrm.x * nrm.x + nrm.y * nrm.y + nrm.z * nrm.z);
    const double scale = std::sqrt(ux * ux + uy * uy + uz * uz) *
                         std::sqrt(vx * vx + vy * vy + vz * vz);
    if (!(len > 1e-12 * std::max(scale, 1e-300))) continue;  // collinear sample
    nrm.x /= len;
    nrm.y /= len;
    nrm.z /= len;
    const double offset = nrm.x * cloud.x[a] + nrm.y * cloud.y[a] + nrm.z * cloud.z[a];

    std::size_t inliers = 0;
    for (std::size_t p = 0; p < n; ++p) {
      const double d = nrm.x * cloud.x[p] + nrm.y * cloud.y[p] + nrm.z * cloud.z[p] - offset;
      if (std::fabs(d) <= inlier_threshold) ++inliers;
    }
    if (!found || inliers > best_inliers) {
      found = true;
      best_inliers = inliers;
      best_normal = nrm;
      best_offset = offset;
    }
  }
  if (!found)
    throw std::runtime_error(
        "fit_ground_plane: no non-degenerate sample found (points collinear?)");

  if (best_normal.z < 0.0) {
    best_normal.x = -best_normal.x;
    best_normal.y = -best_normal.y;
    best_normal.z = -best_normal.z;
    best_offset = -best_offset;
  }
  PlaneModel plane{best_normal, best_offset, inlier_threshold};
  std::vector<std::uint32_t> inliers;
  for (std::size_t p = 0; p < n; ++p)
    if (std::fabs(plane.signed_distance(cloud.x[p], cloud.y[p], cloud.z[p])) <=
        inlier_threshold)
      inliers.push_back(static_cast<std::uint32_t>(p));
  return {plane, std::move(inliers)};
}

std::vector<int> dbscan(const PointCloud& cloud,
                        std::span<const std::uint32_t> subset, double eps,
                        int min_pts, const SpatialIndex& sub_index) {
  if (!(eps > 0.0)) throw std::invalid_argument("dbscan: eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
  if (sub_index.size() != subset.size())
    throw std::invalid_argument("dbscan: index size does not match subset");
  for (const std::uint32_t p : subset)
    if (p >= cloud.size())
      throw std::out_of_range("dbscan: subset index out of range");

  const std::size_t m = subset.size();
  constexpr int kUnvisited = -2;
  std::vector<int> labels(m, kUnvisited);
  std::vector<std::uint32_t> neighbors, frontier_neighbors;
  int next_cluster = 0;

  for (std::size_t s = 0; s < m; ++s) {
    if (labels[s] != kUnvisited) continue;
    sub_index.radius_into(static_cast<std::uint32_t>(s), eps, neighbors);
    if (neighbors.size() < static_cast<std::size_t>(min_pts)) {
      labels[s] = -1;  // noise unless a cluster claims it later
      continue;
    }
    const int cluster = next_cluster++;
    labels[s] = cluster;
    std::vector<std::uint32_t> queue(neighbors.begin(), neighbors.end());
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const std::uint32_t t = queue[qi];
      if (labels[t] == -1) labels[t] = cluster;  // border point
      if (labels[t] != kUnvisited) continue;
      labels[t] = cluster;
      sub_index.radius_into(t, eps, frontier_neighbors);
      if (frontier_neighbors.size() >= static_cast<std::size_t>(min_pts))
        queue.insert(queue.end(), frontier_neighbors.begin(), frontier_neighbors.end());
    }
  }
  return labels;
}

KmeansResult kmeans(std::span<const double> points, std::size_t dim, int k,
                    int max_iters, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("kmeans: dim must be > 0");
  if (points.size() % dim != 0)
    throw std::invalid_argument("kmeans: point buffer not a multiple of dim");
  const std::size_t count = points.size() / dim;
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (static_cast<std::size_t>(k) > count)
    throw std::invalid_argument("kmeans: k exceeds point count");

  auto sq_dist = [&](const double* a, const double* b) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  };

  Rng rng(seed);
  KmeansResult res;
  res.centroids.resize(static_cast<std::size_t>(k) * dim);
  std::vector<char> chosen(count, 0);

  // k-means++ seeding
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  std::size_t first = pick(rng);
  std::copy_n(points.data() + first * dim, dim, res.centroids.data());
  chosen[first] = 1;
  std::vector<double> d2(count);
  for (std::size_t i = 0; i < count; ++i)
    d2[i] = sq_dist(points.data() + i * dim, res.centroids.data());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) total += d2[i];
    std::size_t next = count;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (std::size_t i = 0; i < count; ++i) {
        target -= d2[i];
        if (target <= 0.0) {
          next = i;
          break;
        }
      }
      if (next == count) next = count - 1;
    } else {
      for (std::size_t i = 0; i < count; ++i)
        if (!chosen[i]) {
          next = i;
          break;
        }
      if (next == count) next = 0;  // all points identical
    }
    chosen[next] = 1;
    double* centroid = res.centroids.data() + static_cast<std::size_t>(c) * dim;
    std::copy_n(points.data() + next * dim, dim, centroid);
    for (std::size_t i = 0; i < count; ++i)
      d2[i] = std::min(d2[i], sq_dist(points.data() + i * dim, centroid));
  }

  // Lloyd iterations
  res.assignments.assign(count, 0);
  std::vector<double> sums(static_cast<std::size_t>(k) * dim);
  std::vector<std::size_t> sizes(k);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      int best = 0;
      double best_d = sq_dist(points.data() + i * dim, res.centroids.data());
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(points.data() + i * dim,
                                 res.centroids.data() + static_cast<std::size_t>(c) * dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      objective += best_d;
      if (res.assignments[i] != best) {
        res.assignments[i] = best;
        changed = true;
      }
    }
    res.objective_history.push_back(objective);
    if (!changed && iter > 0) break;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < count; ++i) {
      const int c = res.assignments[i];
      ++sizes[c];
      double* sum = sums.data() + static_cast<std::size_t>(c) * dim;
      const double* p = points.data() + i * dim;
      for (std::size_t d = 0; d < dim; ++d) sum[d] += p[d];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;  // keep the previous centroid
      double* centroid = res.centroids.data() + static_cast<std::size_t>(c) * dim;
      const double inv = 1.0 / static_cast<double>(sizes[c]);
      for (std::size_t d = 0; d < dim; ++d)
        centroid[d] = sums[static_cast<std::size_t>(c) * dim + d] * inv;
    }
  }
  return res;
}

RegionSet build_supervoxels(const PointCloud& cloud, const SupervoxelParams& params) {
  auto [plane, ground] = fit_ground_plane(cloud, params.ransac_iterations,
                                          params.inlier_threshold,
                                          derive_seed(params.seed, 0x9a45));
  std::vector<char> is_ground(cloud.size(), 0);
  for (const std::uint32_t p : ground) is_ground[p] = 1;
  std::vector<std::uint32_t> objects;
  for (std::size_t p = 0; p < cloud.size(); ++p)
    if (!is_ground[p]) objects.push_back(static_cast<std::uint32_t>(p));

  RegionSet set;
  set.total_points = cloud.size();

  // Ground regions: k-means over XY with K sized by target area.
  if (!ground.empty()) {
    double min_x = cloud.x[ground[0]], max_x = min_x;
    double min_y = cloud.y[ground[0]], max_y = min_y;
    std::vector<double> xy;
    xy.reserve(ground.size() * 2);
    for (const std::uint32_t p : ground) {
      xy.push_back(cloud.x[p]);
      xy.push_back(cloud.y[p]);
      min_x = std::min(min_x, cloud.x[p]);
      max_x = std::max(max_x, cloud.x[p]);
      min_y = std::min(min_y, cloud.y[p]);
      max_y = std::max(max_y, cloud.y[p]);
    }
    const double area = (max_x - min_x) * (max_y - min_y);
    int k = area > 0.0
                ? static_cast<int>(std::ceil(area / params.ground_region_target_area))
                : 1;
    k = std::max(1, std::min<int>(k, static_cast<int>(ground.size())));
    const KmeansResult km = kmeans(xy, 2, k, 100, derive_seed(params.seed, 0x6d3a));
    std::vector<std::vector<std::uint32_t>> groups(k);
    for (std::size_t i = 0; i < ground.size(); ++i)
      groups[km.assignments[i]].push_back(ground[i]);
    for (auto& group : groups) {
      if (group.empty()) continue;
      Region region;
      region.kind = RegionKind::SupervoxelGround;
      region.points = std::move(group);
      set.regions.push_back(std::move(region));
    }
  }

  // Object regions: DBSCAN clusters; noise merges into the nearest cluster
  // by centroid distance, or stays as singleton regions when there is none.
  if (!objects.empty()) {
    const SpatialIndex sub_index = [&] {
      std::vector<double> sx, sy, sz;
      sx.reserve(objects.size());
      sy.reserve(objects.size());
      sz.reserve(objects.size());
      for (const std::uint32_t p : objects) {
        sx.push_back(cloud.x[p]);
        sy.push_back(cloud.y[p]);
        sz.push_back(cloud.z[p]);
      }
      return SpatialIndex::build(sx, sy, sz);
    }();
    const std::vector<int> labels =
        dbscan(cloud, objects, params.eps, params.min_pts, sub_index);
    int clusters = 0;
    for (const int l : labels) clusters = std::max(clusters, l + 1);

    std::vector<std::vector<std::uint32_t>> groups(clusters);
    std::vector<std::uint32_t> noise;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (labels[i] >= 0)
        groups[labels[i]].push_back(objects[i]);
      else
        noise.push_back(objects[i]);
    }

    if (clusters > 0 && !noise.empty()) {
      std::vector<std::array<double, 3>> centroids(clusters);
      for (int c = 0; c < clusters; ++c) {
        double sx = 0.0, sy = 0.0, sz = 0.0;
        for (const std::uint32_t p : groups[c]) {
          sx += cloud.x[p];
          sy += cloud.y[p];
          sz += cloud.z[p];
        }
        const double inv = 1.0 / static_cast<double>(groups[c].size());
        centroids[c] = {sx * inv, sy * inv, sz * inv};
      }
      for (const std::uint32_t p : noise) {
        int best = 0;
        double best_d = 0.0;
        for (int c = 0; c < clusters; ++c) {
          const double dx = cloud.x[p] - centroids[c][0];
          const double dy = cloud.y[p] - centroids[c][1];
          const double dz = cloud.z[p] - centroids[c][2];
          const double d = (dx * dx + dy * dy) + dz * dz;
          if (c == 0 || d < best_d) {
            best_d = d;
            best = c;
          }
        }
        groups[best].push_back(p);
      }
      noise.clear();
    }

    for (auto& group : groups) {
      if (group.empty()) continue;
      std::sort(group.begin(), group.end());
      Region region;
      region.kind = RegionKind::SupervoxelObject;
      region.points = std::move(group);
      set.regions.push_back(std::move(region));
    }
    for (const std::uint32_t p : noise) {
      Region region;
      region.kind = RegionKind::SupervoxelObject;
      region.points = {p};
      set.regions.push_back(std::move(region));
    }
  }

  for (std::size_t i = 0; i < set.regions.size(); ++i) {
    set.regions[i].id = static_cast<int>(i);
    set.regions[i].bbox = bounding_box(cloud, set.regions[i].points);
  }
  validate_partition(set);
  return set;
}

void write_regions(const RegionSet& set, std::ostream& out) {
  for (const Region& region : set.regions) {
    out << region.id << ' ' << region_kind_name(region.kind) << ' ';
    if (region.cell)
      out << (*region.cell)[0] << ' ' << (*region.cell)[1];
    else
      out << "- -";
    out << ' ' << region.points.size() << ' ' << format_double(region.bbox.min.x)
        << ' ' << format_double(region.bbox.min.y) << ' '
        << format_double(region.bbox.min.z) << ' ' << format_double(region.bbox.max.x)
        << ' ' << format_double(region.bbox.max.y) << ' '
        << format_double(region.bbox.max.z) << '\n';
  }
}

}  // namespace alpc
