// SPDX-License-Identifier: Apache-2.0

#include "alpc/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alpc/kernels.hpp"

namespace alpc {

namespace {

thread_local std::vector<double> t_dists;
thread_local std::vector<std::pair<double, std::uint32_t>> t_heap;

}  // namespace

SpatialIndex SpatialIndex::build(std::span<const double> xs,
                                 std::span<const double> ys,
                                 std::span<const double> zs) {
  if (xs.empty()) throw std::invalid_argument("SpatialIndex: empty point set");
  if (xs.size() != ys.size() || xs.size() != zs.size())
    throw std::invalid_argument("SpatialIndex: mismatched coordinate arrays");
  SpatialIndex idx;
  idx.xs_.assign(xs.begin(), xs.end());
  idx.ys_.assign(ys.begin(), ys.end());
  idx.zs_.assign(zs.begin(), zs.end());
  idx.build_grid();
  return idx;
}

SpatialIndex SpatialIndex::build(const PointCloud& cloud) {
  return build(cloud.x, cloud.y, cloud.z);
}

void SpatialIndex::build_grid() {
  const std::size_t n = xs_.size();
  double mn[3] = {xs_[0], ys_[0], zs_[0]};
  double mx[3] = {xs_[0], ys_[0], zs_[0]};
  for (std::size_t i = 1; i < n; ++i) {
    mn[0] = std::min(mn[0], xs_[i]);
    mn[1] = std::min(mn[1], ys_[i]);
    mn[2] = std::min(mn[2], zs_[i]);
    mx[0] = std::max(mx[0], xs_[i]);
    mx[1] = std::max(mx[1], ys_[i]);
    mx[2] = std::max(mx[2], zs_[i]);
  }
  ox_ = mn[0];
  oy_ = mn[1];
  oz_ = mn[2];
  const double ext[3] = {mx[0] - mn[0], mx[1] - mn[1], mx[2] - mn[2]};

  // Cell size ~ twice the mean point spacing along the occupied dimensions,
  // grown until the grid stays O(n) cells.
  double prod = 1.0;
  int dims = 0;
  for (double e : ext)
    if (e > 0.0) {
      prod *= e;
      ++dims;
    }
  cell_ = dims == 0 ? 1.0 : 2.0 * std::pow(prod / static_cast<double>(n), 1.0 / dims);
  if (!(cell_ > 0.0) || !std::isfinite(cell_)) cell_ = 1.0;
  for (;;) {
    const double gx = std::floor(ext[0] / cell_) + 1.0;
    const double gy = std::floor(ext[1] / cell_) + 1.0;
    const double gz = std::floor(ext[2] / cell_) + 1.0;
    if (gx * gy * gz <= 4.0 * static_cast<double>(n) + 64.0) {
      nx_ = static_cast<std::uint32_t>(gx);
      ny_ = static_cast<std::uint32_t>(gy);
      nz_ = static_cast<std::uint32_t>(gz);
      break;
    }
    cell_ *= 1.5;
  }

  const std::size_t ncells =
      static_cast<std::size_t>(nx_) * ny_ * nz_;
  std::vector<std::uint32_t> cell_of(n);
  cell_start_.assign(ncells + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t cx = cell_coord(xs_[i], ox_, nx_);
    const std::uint32_t cy = cell_coord(ys_[i], oy_, ny_);
    const std::uint32_t cz = cell_coord(zs_[i], oz_, nz_);
    const std::uint32_t ci = cx + nx_ * (cy + ny_ * cz);
    cell_of[i] = ci;
    ++cell_start_[ci + 1];
  }
  for (std::size_t c = 0; c < ncells; ++c) cell_start_[c + 1] += cell_start_[c];
  order_.resize(n);
  std::vector<std::uint32_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) order_[cursor[cell_of[i]]++] = static_cast<std::uint32_t>(i);
}

std::uint32_t SpatialIndex::cell_coord(double v, double origin,
                                       std::uint32_t dim) const {
  const double t = (v - origin) / cell_;
  if (t <= 0.0) return 0;
  const std::uint32_t c = static_cast<std::uint32_t>(t);
  return c >= dim ? dim - 1 : c;
}

void SpatialIndex::radius_into(std::uint32_t query, double radius,
                               std::vector<std::uint32_t>& out) const {
  out.clear();
  if (radius < 0.0) throw std::invalid_argument("radius_query: negative radius");
  if (query >= size()) throw std::out_of_range("radius_query: query index out of range");
  const double qx = xs_[query], qy = ys_[query], qz = zs_[query];
  const double r2 = radius * radius;

  // The pad absorbs the rounding of the boundary divisions (well under
  // 1e-6 cells for any realistic coordinates), keeping the box a superset
  // of the ball without widening it by whole cells.
  constexpr double kPad = 1e-5;
  auto clamp_cell = [](double t, std::uint32_t dim) -> std::uint32_t {
    if (t <= 0.0) return 0;
    if (t >= static_cast<double>(dim)) return dim - 1;
    return static_cast<std::uint32_t>(t);
  };
  const std::uint32_t ix0 = clamp_cell(std::floor((qx - radius - ox_) / cell_ - kPad), nx_);
  const std::uint32_t ix1 = clamp_cell(std::floor((qx + radius - ox_) / cell_ + kPad), nx_);
  const std::uint32_t iy0 = clamp_cell(std::floor((qy - radius - oy_) / cell_ - kPad), ny_);
  const std::uint32_t iy1 = clamp_cell(std::floor((qy + radius - oy_) / cell_ + kPad), ny_);
  const std::uint32_t iz0 = clamp_cell(std::floor((qz - radius - oz_) / cell_ - kPad), nz_);
  const std::uint32_t iz1 = clamp_cell(std::floor((qz + radius - oz_) / cell_ + kPad), nz_);

  std::vector<double>& dists = t_dists;
  for (std::uint32_t iz = iz0; iz <= iz1; ++iz) {
    for (std::uint32_t iy = iy0; iy <= iy1; ++iy) {
      const std::uint32_t base = nx_ * (iy + ny_ * iz);
      const std::uint32_t o0 = cell_start_[base + ix0];
      const std::uint32_t o1 = cell_start_[base + ix1 + 1];
      if (o0 == o1) continue;
      const std::size_t m = o1 - o0;
      dists.resize(m);
      kern::sq_dist3(qx, qy, qz, xs_.data(), ys_.data(), zs_.data(),
                     order_.data() + o0, m, dists.data());
      for (std::size_t i = 0; i < m; ++i)
        if (dists[i] <= r2) out.push_back(order_[o0 + i]);
    }
  }
  std::sort(out.begin(), out.end());
}

std::vector<std::uint32_t> SpatialIndex::radius(std::uint32_t query,
                                                double radius) const {
  std::vector<std::uint32_t> out;
  radius_into(query, radius, out);
  return out;
}

std::size_t SpatialIndex::radius_count(std::uint32_t query, double radius) const {
  thread_local std::vector<std::uint32_t> scratch;
  radius_into(query, radius, scratch);
  return scratch.size();
}

void SpatialIndex::knn_into(std::uint32_t query, std::size_t k,
                            std::vector<std::uint32_t>& out) const {
  out.clear();
  if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
  if (query >= size()) throw std::out_of_range("knn: query index out of range");
  const std::size_t n = size();
  const std::size_t want = std::min(k, n);
  const double qx = xs_[query], qy = ys_[query], qz = zs_[query];

  // Max-heap on (dist2, index): the lexicographically largest pair is the
  // current worst of the best `want` found so far.
  std::vector<std::pair<double, std::uint32_t>>& heap = t_heap;
  heap.clear();
  auto consider = [&](double d2, std::uint32_t idx) {
    const std::pair<double, std::uint32_t> cand{d2, idx};
    if (heap.size() < want) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end());
    } else if (cand < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end());
    }
  };

  std::vector<double>& dists = t_dists;
  auto process_run = [&](std::uint32_t ci0, std::uint32_t ci1) {
    const std::uint32_t o0 = cell_start_[ci0];
    const std::uint32_t o1 = cell_start_[ci1 + 1];
    if (o0 == o1) return;
    const std::size_t m = o1 - o0;
    dists.resize(m);
    kern::sq_dist3(qx, qy, qz, xs_.data(), ys_.data(), zs_.data(),
                   order_.data() + o0, m, dists.data());
    for (std::size_t i = 0; i < m; ++i) consider(dists[i], order_[o0 + i]);
  };

  const std::int64_t cx = cell_coord(qx, ox_, nx_);
  const std::int64_t cy = cell_coord(qy, oy_, ny_);
  const std::int64_t cz = cell_coord(qz, oz_, nz_);
  for (std::int64_t ring = 0;; ++ring) {
    for (std::int64_t iz = cz - ring; iz <= cz + ring; ++iz) {
      if (iz < 0 || iz >= static_cast<std::int64_t>(nz_)) continue;
      const bool z_edge = (std::llabs(iz - cz) == ring);
      for (std::int64_t iy = cy - ring; iy <= cy + ring; ++iy) {
        if (iy < 0 || iy >= static_cast<std::int64_t>(ny_)) continue;
        const bool y_edge = (std::llabs(iy - cy) == ring);
        const std::uint32_t base =
            nx_ * (static_cast<std::uint32_t>(iy) + ny_ * static_cast<std::uint32_t>(iz));
        if (z_edge || y_edge) {
          const std::int64_t ix0 = std::max<std::int64_t>(0, cx - ring);
          const std::int64_t ix1 =
              std::min<std::int64_t>(static_cast<std::int64_t>(nx_) - 1, cx + ring);
          if (ix0 <= ix1)
            process_run(base + static_cast<std::uint32_t>(ix0),
                        base + static_cast<std::uint32_t>(ix1));
        } else {
          for (const std::int64_t ix : {cx - ring, cx + ring}) {
            if (ix < 0 || ix >= static_cast<std::int64_t>(nx_)) continue;
            process_run(base + static_cast<std::uint32_t>(ix),
                        base + static_cast<std::uint32_t>(ix));
          }
        }
      }
    }
    // Any unprocessed point is strictly farther than ring*cell; the small
    // relative margin absorbs the rounding of the bound itself.
    if (heap.size() == want) {
      const double bound = static_cast<double>(ring) * cell_;
      if (heap.front().first <= bound * bound * (1.0 - 1e-12)) break;
    }
    const bool covered = (cx - ring <= 0) && (cy - ring <= 0) && (cz - ring <= 0) &&
                         (cx + ring >= static_cast<std::int64_t>(nx_) - 1) &&
                         (cy + ring >= static_cast<std::int64_t>(ny_) - 1) &&
                         (cz + ring >= static_cast<std::int64_t>(nz_) - 1);
    if (covered) break;
  }

  std::sort(heap.begin(), heap.end());
  out.reserve(heap.size());
  for (const auto& [d2, idx] : heap) out.push_back(idx);
}

std::vector<std::uint32_t> SpatialIndex::knn(std::uint32_t query,
                                             std::size_t k) const {
  std::vector<std::uint32_t> out;
  knn_into(query, k, out);
  return out;
}

}  // namespace alpc
