// SPDX-License-Identifier: Apache-2.0

#include "alpc/cloud.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "alpc/kernels.hpp"

namespace alpc {

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

struct Tokenizer {
  const std::string& line;
  std::size_t pos = 0;

  // Returns the next space-separated token, empty if exhausted.
  std::string_view next() {
    while (pos < line.size() && line[pos] == ' ') ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ') ++pos;
    return std::string_view(line).substr(start, pos - start);
  }
};

double parse_real(std::string_view tok, const std::string& path,
                  std::size_t line, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    parse_fail(path, line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  if (!std::isfinite(v))
    parse_fail(path, line, std::string("non-finite ") + what + " '" + std::string(tok) + "'");
  return v;
}

long long parse_int(std::string_view tok, const std::string& path,
                    std::size_t line, const char* what) {
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    parse_fail(path, line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

PointCloud load_alpc(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Tokenizer header{line};
  if (header.next() != "alpc") parse_fail(path, 1, "missing 'alpc' magic");
  if (header.next() != "1") parse_fail(path, 1, "unsupported version");
  const long long n = parse_int(header.next(), path, 1, "point count");
  const long long classes = parse_int(header.next(), path, 1, "class count");
  if (!header.next().empty()) parse_fail(path, 1, "trailing header tokens");
  if (n < 1) parse_fail(path, 1, "point count must be >= 1");
  if (classes < 2) parse_fail(path, 1, "class count must be >= 2");

  PointCloud cloud;
  cloud.class_count = static_cast<int>(classes);
  cloud.x.reserve(n);
  cloud.y.reserve(n);
  cloud.z.reserve(n);
  cloud.r.reserve(n);
  cloud.g.reserve(n);
  cloud.b.reserve(n);
  cloud.gt.reserve(n);

  for (long long row = 1; row <= n; ++row) {
    const std::size_t line_no = static_cast<std::size_t>(row) + 1;
    if (!std::getline(in, line))
      parse_fail(path, line_no,
                 "missing data row " + std::to_string(row) + " of " + std::to_string(n));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Tokenizer tok{line};
    const double px = parse_real(tok.next(), path, line_no, "x coordinate");
    const double py = parse_real(tok.next(), path, line_no, "y coordinate");
    const double pz = parse_real(tok.next(), path, line_no, "z coordinate");
    long long cr = parse_int(tok.next(), path, line_no, "red channel");
    long long cg = parse_int(tok.next(), path, line_no, "green channel");
    long long cb = parse_int(tok.next(), path, line_no, "blue channel");
    long long label = parse_int(tok.next(), path, line_no, "label");
    if (!tok.next().empty()) parse_fail(path, line_no, "trailing tokens");
    if (cr < 0 || cr > 255 || cg < 0 || cg > 255 || cb < 0 || cb > 255)
      parse_fail(path, line_no, "color channel out of [0,255]");
    if (label != -1 && (label < 0 || label >= classes))
      parse_fail(path, line_no, "label " + std::to_string(label) + " out of range");
    cloud.x.push_back(px);
    cloud.y.push_back(py);
    cloud.z.push_back(pz);
    cloud.r.push_back(static_cast<std::uint8_t>(cr));
    cloud.g.push_back(static_cast<std::uint8_t>(cg));
    cloud.b.push_back(static_cast<std::uint8_t>(cb));
    cloud.gt.push_back(static_cast<int>(label));
  }
  if (std::getline(in, line) && !line.empty())
    parse_fail(path, static_cast<std::size_t>(n) + 2, "unexpected content after last row");

  cloud.known.assign(cloud.size(), 0);
  return cloud;
}

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") parse_fail(path, 1, "missing 'ply' magic");

  long long vertex_count = -1;
  std::vector<std::string> properties;
  bool in_vertex_element = false;
  bool ascii = false;
  while (true) {
    if (!next_line()) parse_fail(path, line_no, "unterminated header");
    if (line == "end_header") break;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = (fmt == "ascii");
    } else if (word == "element") {
      std::string elem;
      long long count = 0;
      ss >> elem >> count;
      in_vertex_element = (elem == "vertex");
      if (in_vertex_element) vertex_count = count;
    } else if (word == "property" && in_vertex_element) {
      std::string type, name;
      ss >> type;
      if (type == "list") parse_fail(path, line_no, "list properties unsupported");
      ss >> name;
      properties.push_back(name);
    }
  }
  if (!ascii) parse_fail(path, line_no, "only ascii PLY is supported");
  if (vertex_count < 1) parse_fail(path, line_no, "missing vertex element");

  auto prop_index = [&](const char* name) -> std::size_t {
    for (std::size_t i = 0; i < properties.size(); ++i)
      if (properties[i] == name) return i;
    throw std::runtime_error(path + ": PLY misses property '" + std::string(name) + "'");
  };
  const std::size_t ix = prop_index("x"), iy = prop_index("y"), iz = prop_index("z");
  const std::size_t ir = prop_index("red"), ig = prop_index("green"), ib = prop_index("blue");
  const std::size_t il = prop_index("label");

  PointCloud cloud;
  std::vector<double> row(properties.size());
  int max_label = -1;
  for (long long v = 0; v < vertex_count; ++v) {
    if (!next_line())
      parse_fail(path, line_no + 1,
                 "missing vertex row " + std::to_string(v + 1) + " of " +
                     std::to_string(vertex_count));
    Tokenizer tok{line};
    for (std::size_t p = 0; p < properties.size(); ++p)
      row[p] = parse_real(tok.next(), path, line_no, properties[p].c_str());
    const long long label = static_cast<long long>(row[il]);
    const long long cr = static_cast<long long>(row[ir]);
    const long long cg = static_cast<long long>(row[ig]);
    const long long cb = static_cast<long long>(row[ib]);
    if (cr < 0 || cr > 255 || cg < 0 || cg > 255 || cb < 0 || cb > 255)
      parse_fail(path, line_no, "color channel out of [0,255]");
    if (label < -1) parse_fail(path, line_no, "label out of range");
    cloud.x.push_back(row[ix]);
    cloud.y.push_back(row[iy]);
    cloud.z.push_back(row[iz]);
    cloud.r.push_back(static_cast<std::uint8_t>(cr));
    cloud.g.push_back(static_cast<std::uint8_t>(cg));
    cloud.b.push_back(static_cast<std::uint8_t>(cb));
    cloud.gt.push_back(static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  cloud.class_count = std::max(2, max_label + 1);
  cloud.known.assign(cloud.size(), 0);
  return cloud;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void validate_cloud(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 1) throw std::runtime_error("cloud must contain at least one point");
  if (cloud.y.size() != n || cloud.z.size() != n || cloud.r.size() != n ||
      cloud.g.size() != n || cloud.b.size() != n || cloud.gt.size() != n ||
      cloud.known.size() != n)
    throw std::runtime_error("cloud arrays have mismatched lengths");
  if (cloud.class_count < 2) throw std::runtime_error("class_count must be >= 2");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(cloud.x[i]) || !std::isfinite(cloud.y[i]) ||
        !std::isfinite(cloud.z[i]))
      throw std::runtime_error("non-finite coordinate at point " + std::to_string(i));
    if (cloud.gt[i] != -1 && (cloud.gt[i] < 0 || cloud.gt[i] >= cloud.class_count))
      throw std::runtime_error("label out of range at point " + std::to_string(i));
    if (cloud.known[i] && cloud.gt[i] == -1)
      throw std::runtime_error("revealed label without ground truth at point " +
                               std::to_string(i));
  }
}

PointCloud load_cloud(const std::string& path) {
  PointCloud cloud = ends_with(path, ".ply") ? load_ply(path) : load_alpc(path);
  validate_cloud(cloud);
  return cloud;
}

void save_cloud(const PointCloud& cloud, const std::string& path) {
  validate_cloud(cloud);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "alpc 1 " << cloud.size() << ' ' << cloud.class_count << '\n';
  std::string line;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    line.clear();
    line += format_double(cloud.x[i]);
    line += ' ';
    line += format_double(cloud.y[i]);
    line += ' ';
    line += format_double(cloud.z[i]);
    line += ' ';
    line += std::to_string(cloud.r[i]);
    line += ' ';
    line += std::to_string(cloud.g[i]);
    line += ' ';
    line += std::to_string(cloud.b[i]);
    line += ' ';
    line += std::to_string(cloud.gt[i]);
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

AABB bounding_box(const PointCloud& cloud, std::span<const std::uint32_t> indices) {
  if (indices.empty()) throw std::invalid_argument("bounding_box: empty index list");
  for (const std::uint32_t i : indices)
    if (i >= cloud.size())
      throw std::out_of_range("bounding_box: index " + std::to_string(i) + " out of range");
  double mn[3], mx[3];
  kern::minmax3(cloud.x.data(), cloud.y.data(), cloud.z.data(), indices.data(),
                indices.size(), mn, mx);
  return AABB{{mn[0], mn[1], mn[2]}, {mx[0], mx[1], mx[2]}};
}

}  // namespace alpc
