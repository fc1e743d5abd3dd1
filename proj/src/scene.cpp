// SPDX-License-Identifier: Apache-2.0

#include "alpc/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "alpc/rng.hpp"

namespace alpc {

namespace {

enum CanonicalClass : int {
  kGround = 0,
  kStreet = 1,
  kBuilding = 2,
  kCrown = 3,
  kTrunk = 4,
  kLowVeg = 5,
};

// Per-class color model: mean + spatially smooth tint (scaled by the
// class's tint row) + iid per-point jitter. Tints make hard areas rather
// than hard points, and the jitter bounds keep the classes strictly
// separable: grass and low vegetation come within a few green units of
// each other at tint extremes but never overlap.
struct Palette {
  int r, g, b;        // channel means
  int tr, tg, tb;     // tint amplitude per channel
  int jitter;         // iid per-point jitter per channel
};

constexpr Palette kPalettes[6] = {
    {100, 135, 75, 4, 6, 3, 8},    // ground: grass / open soil
    {115, 115, 120, 0, 0, 0, 12},  // street: asphalt
    {185, 172, 155, 0, 0, 0, 20},  // building
    {55, 105, 50, 8, 9, 6, 6},     // tree crown
    {120, 95, 85, 6, 6, 4, 5},     // trunk
    {90, 105, 30, 8, 6, 6, 5},     // low vegetation
};

// Smooth value-noise field in [-1, 1], bilinear over a 4 m grid.
class TintField {
 public:
  TintField(double extent_x, double extent_y, Rng& rng) {
    gx_ = static_cast<std::size_t>(std::floor(extent_x / kCell)) + 2;
    gy_ = static_cast<std::size_t>(std::floor(extent_y / kCell)) + 2;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    nodes_.resize(gx_ * gy_);
    for (double& v : nodes_) v = u(rng);
  }

  double sample(double x, double y) const {
    const double u = x / kCell, v = y / kCell;
    const std::size_t ix = std::min(gx_ - 2, static_cast<std::size_t>(std::max(0.0, u)));
    const std::size_t iy = std::min(gy_ - 2, static_cast<std::size_t>(std::max(0.0, v)));
    const double fu = std::clamp(u - static_cast<double>(ix), 0.0, 1.0);
    const double fv = std::clamp(v - static_cast<double>(iy), 0.0, 1.0);
    const double n00 = nodes_[ix + gx_ * iy], n10 = nodes_[ix + 1 + gx_ * iy];
    const double n01 = nodes_[ix + gx_ * (iy + 1)], n11 = nodes_[ix + 1 + gx_ * (iy + 1)];
    return (n00 * (1.0 - fu) + n10 * fu) * (1.0 - fv) +
           (n01 * (1.0 - fu) + n11 * fu) * fv;
  }

 private:
  static constexpr double kCell = 4.0;
  std::size_t gx_ = 0, gy_ = 0;
  std::vector<double> nodes_;
};

struct BoxSpec {
  double x0, y0, x1, y1, h;
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

struct TreeSpec {
  double cx, cy, crown_z, rx, ry, rz, trunk_r;
  double tint;  // in [-1, 1], shared by the whole tree
};

struct BushSpec {
  double cx, cy, r, h;
  double tint;
};

struct Layout {
  std::vector<BoxSpec> boxes;
  std::vector<TreeSpec> trees;
  std::vector<BushSpec> bushes;
  bool streets = false;
  double extent_x = 0.0, extent_y = 0.0;
  double street_y = 0.0, street_x = 0.0;
  static constexpr double kStreetHalfWidth = 3.0;
  static constexpr double kBorderRoad = 2.0;  // ring road along the extent

  bool on_street(double x, double y) const {
    if (!streets) return false;
    if (x <= kBorderRoad || y <= kBorderRoad || x >= extent_x - kBorderRoad ||
        y >= extent_y - kBorderRoad)
      return true;
    return std::fabs(y - street_y) <= kStreetHalfWidth ||
           std::fabs(x - street_x) <= kStreetHalfWidth;
  }
  bool in_building(double x, double y) const {
    for (const BoxSpec& box : boxes)
      if (box.contains(x, y)) return true;
    return false;
  }
  // scan shadow directly under a trunk
  bool under_tree(double x, double y) const {
    for (const TreeSpec& tree : trees) {
      const double dx = x - tree.cx, dy = y - tree.cy;
      if (dx * dx + dy * dy <= 0.35 * 0.35) return true;
    }
    return false;
  }
};

class Emitter {
 public:
  Emitter(PointCloud& cloud, const std::vector<int>& class_map, double ex, double ey)
      : cloud_(cloud), class_map_(class_map), ex_(ex), ey_(ey) {}

  void emit(double x, double y, double z, int canonical_class, Rng& rng,
            double tint = 0.0) {
    const Palette& pal = kPalettes[canonical_class];
    std::uniform_int_distribution<int> jitter(-pal.jitter, pal.jitter);
    cloud_.x.push_back(std::clamp(x, 0.0, ex_));
    cloud_.y.push_back(std::clamp(y, 0.0, ey_));
    cloud_.z.push_back(std::clamp(z, -1.0, 30.0));
    const int r = pal.r + static_cast<int>(std::lround(tint * pal.tr)) + jitter(rng);
    const int g = pal.g + static_cast<int>(std::lround(tint * pal.tg)) + jitter(rng);
    const int b = pal.b + static_cast<int>(std::lround(tint * pal.tb)) + jitter(rng);
    cloud_.r.push_back(static_cast<std::uint8_t>(std::clamp(r, 0, 255)));
    cloud_.g.push_back(static_cast<std::uint8_t>(std::clamp(g, 0, 255)));
    cloud_.b.push_back(static_cast<std::uint8_t>(std::clamp(b, 0, 255)));
    cloud_.gt.push_back(class_map_[canonical_class]);
  }

 private:
  PointCloud& cloud_;
  const std::vector<int>& class_map_;
  double ex_, ey_;
};

Layout draw_layout(const SceneSpec& spec, Rng& rng) {
  Layout layout;
  const double ex = spec.extent_x, ey = spec.extent_y;
  layout.extent_x = ex;
  layout.extent_y = ey;

  if (spec.streets) {
    layout.streets = true;
    layout.street_y = std::uniform_real_distribution<double>(0.25 * ey, 0.75 * ey)(rng);
    layout.street_x = std::uniform_real_distribution<double>(0.25 * ex, 0.75 * ex)(rng);
  }

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < spec.buildings; ++i) {
    const double w = std::min(6.0 + 2.5 * u01(rng), 0.45 * ex);
    const double d = std::min(5.0 + 2.5 * u01(rng), 0.45 * ey);
    const double h = 5.0 + 4.0 * u01(rng);
    BoxSpec box{};
    for (int attempt = 0; attempt < 50; ++attempt) {
      const double x0 = 0.5 + u01(rng) * std::max(0.1, ex - w - 1.0);
      const double y0 = 0.5 + u01(rng) * std::max(0.1, ey - d - 1.0);
      box = {x0, y0, x0 + w, y0 + d, h};
      bool bad = layout.on_street(box.x0, box.y0) || layout.on_street(box.x1, box.y1) ||
                 layout.on_street(box.x0, box.y1) || layout.on_street(box.x1, box.y0);
      for (const BoxSpec& other : layout.boxes) {
        if (bad) break;
        bad = !(box.x1 + 1.0 < other.x0 || other.x1 + 1.0 < box.x0 ||
                box.y1 + 1.0 < other.y0 || other.y1 + 1.0 < box.y0);
      }
      if (!bad) break;
    }
    // the last candidate is kept even when crowded, so the class never vanishes
    layout.boxes.push_back(box);
  }

  for (int i = 0; i < spec.trees; ++i) {
    TreeSpec tree{};
    tree.rx = std::min(1.2 + 0.5 * u01(rng), 0.2 * ex);
    tree.ry = std::min(1.2 + 0.5 * u01(rng), 0.2 * ey);
    tree.rz = 0.9 + 0.5 * u01(rng);
    tree.crown_z = 4.5 + 2.0 * u01(rng);
    tree.trunk_r = 0.22 + 0.08 * u01(rng);
    tree.tint = 2.0 * u01(rng) - 1.0;
    const double margin = std::max(tree.rx, tree.ry) + 0.2;
    for (int attempt = 0; attempt < 50; ++attempt) {
      tree.cx = margin + u01(rng) * std::max(0.1, ex - 2.0 * margin);
      tree.cy = margin + u01(rng) * std::max(0.1, ey - 2.0 * margin);
      if (!layout.in_building(tree.cx, tree.cy) && !layout.on_street(tree.cx, tree.cy))
        break;
    }
    layout.trees.push_back(tree);
  }

  for (int i = 0; i < spec.bushes; ++i) {
    BushSpec bush{};
    bush.r = std::min(0.8 + 0.6 * u01(rng), 0.15 * std::min(ex, ey));
    bush.h = 0.4 + 0.8 * u01(rng);
    bush.tint = 2.0 * u01(rng) - 1.0;
    for (int attempt = 0; attempt < 50; ++attempt) {
      bush.cx = bush.r + u01(rng) * std::max(0.1, ex - 2.0 * bush.r);
      bush.cy = bush.r + u01(rng) * std::max(0.1, ey - 2.0 * bush.r);
      if (!layout.in_building(bush.cx, bush.cy) && !layout.on_street(bush.cx, bush.cy))
        break;
    }
    layout.bushes.push_back(bush);
  }
  return layout;
}

}  // namespace

int SceneSpec::class_count() const {
  int count = 1;  // ground
  if (streets) ++count;
  if (buildings > 0) ++count;
  if (trees > 0) count += 2;  // crown + trunk
  if (bushes > 0) ++count;
  return count;
}

std::vector<std::string> SceneSpec::class_names() const {
  std::vector<std::string> names = {"ground"};
  if (streets) names.push_back("street");
  if (buildings > 0) names.push_back("building");
  if (trees > 0) {
    names.push_back("tree_crown");
    names.push_back("trunk");
  }
  if (bushes > 0) names.push_back("low_vegetation");
  return names;
}

SceneSpec SceneSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene spec '" + path + "'");
  SceneSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "extent_x") spec.extent_x = std::stod(value);
      else if (key == "extent_y") spec.extent_y = std::stod(value);
      else if (key == "density") spec.density = std::stod(value);
      else if (key == "buildings") spec.buildings = std::stoi(value);
      else if (key == "trees") spec.trees = std::stoi(value);
      else if (key == "bushes") spec.bushes = std::stoi(value);
      else if (key == "streets") spec.streets = (value == "1" || value == "true");
      else if (key == "partial") spec.partial = (value == "1" || value == "true");
      else if (key == "seed") spec.seed = std::stoull(value);
      else
        throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad value for '" +
                               key + "'");
    }
  }
  return spec;
}

PointCloud generate_scene(const SceneSpec& spec) {
  if (!(spec.extent_x > 0.0) || !(spec.extent_y > 0.0))
    throw std::invalid_argument("generate_scene: extent must be positive");
  if (!(spec.density > 0.0))
    throw std::invalid_argument("generate_scene: density must be positive");
  if (spec.buildings < 0 || spec.trees < 0 || spec.bushes < 0)
    throw std::invalid_argument("generate_scene: negative primitive count");
  if (spec.class_count() < 2)
    throw std::invalid_argument("generate_scene: at least 2 classes required");

  // contiguous ids over the enabled classes
  std::vector<int> class_map(6, -1);
  int next_id = 0;
  class_map[kGround] = next_id++;
  if (spec.streets) class_map[kStreet] = next_id++;
  if (spec.buildings > 0) class_map[kBuilding] = next_id++;
  if (spec.trees > 0) {
    class_map[kCrown] = next_id++;
    class_map[kTrunk] = next_id++;
  }
  if (spec.bushes > 0) class_map[kLowVeg] = next_id++;

  PointCloud cloud;
  cloud.class_count = next_id;
  Emitter emit(cloud, class_map, spec.extent_x, spec.extent_y);

  Rng layout_rng(derive_seed(spec.seed, 0x4c41));
  const Layout layout = draw_layout(spec, layout_rng);
  Rng tint_rng(derive_seed(spec.seed, 0x7469));
  const TintField tint(spec.extent_x, spec.extent_y, tint_rng);

  // ground + streets: jittered-grid sampling, like the near-regular
  // footprint of an aerial scan
  {
    Rng rng(derive_seed(spec.seed, 0x6772));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> ground_noise(0.0, 0.012);
    std::normal_distribution<double> street_noise(0.0, 0.008);
    const double pitch = 1.0 / std::sqrt(spec.density);
    const long long gx = static_cast<long long>(std::ceil(spec.extent_x / pitch));
    const long long gy = static_cast<long long>(std::ceil(spec.extent_y / pitch));
    for (long long iy = 0; iy < gy; ++iy) {
      for (long long ix = 0; ix < gx; ++ix) {
        const double x = (static_cast<double>(ix) + u01(rng)) * pitch;
        const double y = (static_cast<double>(iy) + u01(rng)) * pitch;
        const bool street = layout.on_street(x, y);
        const double z = street ? street_noise(rng) : ground_noise(rng);
        if (x > spec.extent_x || y > spec.extent_y) continue;
        if (layout.in_building(x, y)) continue;  // occluded by the roof
        if (layout.under_tree(x, y)) continue;
        emit.emit(x, y, z, street ? kStreet : kGround, rng,
                  street ? 0.0 : tint.sample(x, y));
      }
    }
  }

  // buildings: roof plus four wall faces
  if (!layout.boxes.empty()) {
    Rng rng(derive_seed(spec.seed, 0x6264));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> surf(0.0, 0.01);
    for (const BoxSpec& box : layout.boxes) {
      const double w = box.x1 - box.x0, d = box.y1 - box.y0;
      const long long roof = std::max<long long>(
          30, std::llround(w * d * spec.density * 0.8));
      for (long long i = 0; i < roof; ++i)
        emit.emit(box.x0 + u01(rng) * w, box.y0 + u01(rng) * d, box.h + surf(rng),
                  kBuilding, rng);
      const double faces[4][4] = {
          // x, y of segment start; dx, dy of segment
          {box.x0, box.y0, w, 0.0},
          {box.x0, box.y1, w, 0.0},
          {box.x0, box.y0, 0.0, d},
          {box.x1, box.y0, 0.0, d},
      };
      for (const double* f : faces) {
        const double len = f[2] + f[3];
        const long long wall = std::max<long long>(
            20, std::llround(len * box.h * spec.density * 0.25));
        for (long long i = 0; i < wall; ++i) {
          const double t = u01(rng);
          const double x = f[0] + f[2] * t + (f[2] == 0.0 ? surf(rng) : 0.0);
          const double y = f[1] + f[3] * t + (f[3] == 0.0 ? surf(rng) : 0.0);
          emit.emit(x, y, u01(rng) * box.h, kBuilding, rng);
        }
      }
    }
  }

  // trees: ellipsoid crowns, cylinder trunks
  if (!layout.trees.empty()) {
    Rng rng(derive_seed(spec.seed, 0x7472));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (const TreeSpec& tree : layout.trees) {
      const double mean_r = (tree.rx + tree.ry + tree.rz) / 3.0;
      const long long crown = std::max<long long>(
          60, std::llround(4.0 * std::numbers::pi * mean_r * mean_r * spec.density * 0.35));
      for (long long i = 0; i < crown; ++i) {
        double dx = gauss(rng), dy = gauss(rng), dz = gauss(rng);
        const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (len < 1e-9) continue;
        const double f = 0.7 + 0.3 * u01(rng);  // mostly shell, some interior
        emit.emit(tree.cx + dx / len * tree.rx * f, tree.cy + dy / len * tree.ry * f,
                  tree.crown_z + dz / len * tree.rz * f, kCrown, rng, tree.tint);
      }
      const double trunk_top = tree.crown_z - 0.6 * tree.rz;
      const long long trunk = std::max<long long>(
          40, std::llround(2.0 * std::numbers::pi * tree.trunk_r * trunk_top *
                           spec.density));
      std::normal_distribution<double> surf(0.0, 0.005);
      for (long long i = 0; i < trunk; ++i) {
        const double theta = 2.0 * std::numbers::pi * u01(rng);
        emit.emit(tree.cx + std::cos(theta) * tree.trunk_r + surf(rng),
                  tree.cy + std::sin(theta) * tree.trunk_r + surf(rng),
                  u01(rng) * trunk_top, kTrunk, rng, tree.tint);
      }
    }
  }

  // low vegetation: volumetric scatter patches
  if (!layout.bushes.empty()) {
    Rng rng(derive_seed(spec.seed, 0x6c76));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (const BushSpec& bush : layout.bushes) {
      const long long count = std::max<long long>(
          40, std::llround(std::numbers::pi * bush.r * bush.r * spec.density * 0.8));
      for (long long i = 0; i < count; ++i) {
        const double rad = bush.r * std::sqrt(u01(rng));
        const double theta = 2.0 * std::numbers::pi * u01(rng);
        emit.emit(bush.cx + rad * std::cos(theta), bush.cy + rad * std::sin(theta),
                  u01(rng) * bush.h, kLowVeg, rng, bush.tint);
      }
    }
  }

  if (spec.partial) {
    Rng rng(derive_seed(spec.seed, 0x7061));
    const double theta =
        std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    const double cx = std::cos(theta), cy = std::sin(theta);
    std::vector<double> proj(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
      proj[i] = cloud.x[i] * cx + cloud.y[i] * cy;
    std::vector<double> sorted = proj;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (std::size_t i = 0; i < cloud.size(); ++i)
      if (proj[i] > median) cloud.gt[i] = -1;
  }

  cloud.known.assign(cloud.size(), 0);
  validate_cloud(cloud);
  return cloud;
}

std::pair<PointCloud, PointCloud> scene_pair(const SceneSpec& spec,
                                             std::uint64_t eval_seed_offset) {
  SceneSpec eval_spec = spec;
  eval_spec.seed = spec.seed + eval_seed_offset;
  return {generate_scene(spec), generate_scene(eval_spec)};
}

}  // namespace alpc
