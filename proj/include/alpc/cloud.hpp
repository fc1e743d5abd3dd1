// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_CLOUD_HPP
#define ALPC_CLOUD_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace alpc {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct AABB {
  Vec3 min, max;
  double dx() const { return max.x - min.x; }
  double dy() const { return max.y - min.y; }
  double dz() const { return max.z - min.z; }
};

// Columnar point cloud. Positions are meters (64-bit), colors 8-bit per
// channel, gt is the ground-truth class id (-1 = no ground truth). `known`
// is runtime state owned by the AL loop: true once the oracle has revealed
// the label to the learner. It always starts all-false after a load.
struct PointCloud {
  std::vector<double> x, y, z;
  std::vector<std::uint8_t> r, g, b;
  std::vector<int> gt;
  std::vector<char> known;
  int class_count = 0;

  std::size_t size() const { return x.size(); }
};

// Throws std::runtime_error if the cloud violates its invariants
// (ragged arrays, label out of range, non-finite coordinate, known label
// without ground truth).
void validate_cloud(const PointCloud& cloud);

// Reads ALPC v1 (or ASCII PLY when the path ends in .ply). Parse errors
// name the offending line.
PointCloud load_cloud(const std::string& path);

// Writes ALPC v1: `alpc 1 <n> <C>` then `x y z r g b label` per point,
// reals in shortest round-trip decimal, LF line endings. load_cloud of the
// result reproduces every field bit-exactly.
void save_cloud(const PointCloud& cloud, const std::string& path);

// Exact component-wise extrema of the selected positions. Throws on an
// empty or out-of-range index list.
AABB bounding_box(const PointCloud& cloud, std::span<const std::uint32_t> indices);

// Shortest round-trip decimal formatting used by every text emitter.
std::string format_double(double v);

}  // namespace alpc

#endif  // ALPC_CLOUD_HPP
