// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_TOOLS_SVG_HPP
#define ALPC_TOOLS_SVG_HPP

#include <optional>
#include <string>
#include <vector>

namespace alpc::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct ChartSpec {
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::optional<double> hline;        // e.g. the mIoU@90 target
  std::string hline_label;
};

// Minimal line chart, no external dependencies.
void write_chart(const std::string& path, const std::vector<Series>& series,
                 const ChartSpec& spec);

}  // namespace alpc::svg

#endif  // ALPC_TOOLS_SVG_HPP
