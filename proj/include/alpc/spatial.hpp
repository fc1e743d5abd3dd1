// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_SPATIAL_HPP
#define ALPC_SPATIAL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "alpc/cloud.hpp"

namespace alpc {

// Uniform-grid neighborhood index. Queries return exactly the same index
// sets as a naive scan that tests dist2(i, q) <= radius*radius, with
// distances computed as (dx*dx + dy*dy) + dz*dz. The query point itself is
// always part of its own neighborhood. Immutable after build; concurrent
// queries are safe.
class SpatialIndex {
 public:
  SpatialIndex() = default;

  static SpatialIndex build(std::span<const double> xs,
                            std::span<const double> ys,
                            std::span<const double> zs);
  static SpatialIndex build(const PointCloud& cloud);

  std::size_t size() const { return xs_.size(); }

  // k nearest neighbors of point `query` (self included at distance 0),
  // sorted by ascending distance, ties by ascending point index.
  // Returns min(k, n) indices.
  std::vector<std::uint32_t> knn(std::uint32_t query, std::size_t k) const;
  void knn_into(std::uint32_t query, std::size_t k,
                std::vector<std::uint32_t>& out) const;

  // All points within `radius` of point `query`, ascending index order.
  std::vector<std::uint32_t> radius(std::uint32_t query, double radius) const;
  void radius_into(std::uint32_t query, double radius,
                   std::vector<std::uint32_t>& out) const;
  std::size_t radius_count(std::uint32_t query, double radius) const;

  double cell_size() const { return cell_; }

 private:
  void build_grid();
  std::uint32_t cell_coord(double v, double origin, std::uint32_t dim) const;

  std::vector<double> xs_, ys_, zs_;
  double ox_ = 0.0, oy_ = 0.0, oz_ = 0.0;  // grid origin = bbox min
  double cell_ = 1.0;
  std::uint32_t nx_ = 1, ny_ = 1, nz_ = 1;
  std::vector<std::uint32_t> cell_start_;  // CSR offsets, size nx*ny*nz + 1
  std::vector<std::uint32_t> order_;       // point ids grouped by cell id
};

}  // namespace alpc

#endif  // ALPC_SPATIAL_HPP
