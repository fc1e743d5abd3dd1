// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_SCENE_HPP
#define ALPC_SCENE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "alpc/cloud.hpp"

namespace alpc {

// Synthetic urban scene: a noisy ground plane with optional street strips,
// box buildings (walls + roof), trees (ellipsoid crowns on cylinder
// trunks), and low-vegetation scatter patches. Class ids are contiguous
// over the enabled classes, in the order ground, street, building,
// tree crown, trunk, low vegetation.
struct SceneSpec {
  double extent_x = 50.0;
  double extent_y = 50.0;
  double density = 40.0;  // ground-level points per m^2
  int buildings = 6;
  int trees = 6;
  int bushes = 14;
  bool streets = true;
  bool partial = false;  // mask a random spatial half of the labels to -1
  std::uint64_t seed = 1;

  int class_count() const;
  std::vector<std::string> class_names() const;

  // key=value lines, '#' comments; keys: extent_x extent_y density
  // buildings trees bushes streets partial seed
  static SceneSpec from_file(const std::string& path);
};

PointCloud generate_scene(const SceneSpec& spec);

// Train/eval pair from sibling seeds (seed and seed + offset).
std::pair<PointCloud, PointCloud> scene_pair(const SceneSpec& spec,
                                             std::uint64_t eval_seed_offset);

}  // namespace alpc

#endif  // ALPC_SCENE_HPP
