#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace conjugen {

struct AxisSpec {
  double min = 0.0;
  double max = 0.0;
  int count = 0;  // grid points including both endpoints
};

/// Rectangular product grid, row-major with axis 0 slowest.
struct GridSpec {
  std::vector<AxisSpec> axes;

  explicit GridSpec(std::vector<AxisSpec> ax) : axes(std::move(ax)) {
    for (const AxisSpec& a : axes) {
      if (a.count < 2)
        throw std::invalid_argument("degenerate grid: every axis needs at least 2 points");
      if (!(a.min < a.max))
        throw std::invalid_argument("grid axis needs min < max");
    }
    if (axes.empty()) throw std::invalid_argument("grid needs at least one axis");
  }

  std::size_t dims() const { return axes.size(); }

  std::size_t size() const {
    std::size_t total = 1;
    for (const AxisSpec& a : axes) total *= static_cast<std::size_t>(a.count);
    return total;
  }

  double spacing(std::size_t axis) const {
    const AxisSpec& a = axes[axis];
    return (a.max - a.min) / (a.count - 1);
  }

  std::vector<int> multi_index(std::size_t linear) const {
    std::vector<int> mi(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      mi[a] = static_cast<int>(linear % static_cast<std::size_t>(axes[a].count));
      linear /= static_cast<std::size_t>(axes[a].count);
    }
    return mi;
  }

  std::size_t linear_index(const std::vector<int>& mi) const {
    std::size_t lin = 0;
    for (std::size_t a = 0; a < axes.size(); ++a)
      lin = lin * static_cast<std::size_t>(axes[a].count) + static_cast<std::size_t>(mi[a]);
    return lin;
  }

  std::vector<double> point(const std::vector<int>& mi) const {
    std::vector<double> x(axes.size());
    for (std::size_t a = 0; a < axes.size(); ++a) x[a] = axes[a].min + mi[a] * spacing(a);
    return x;
  }

  std::vector<double> point(std::size_t linear) const { return point(multi_index(linear)); }

  bool in_range(const std::vector<int>& mi) const {
    for (std::size_t a = 0; a < axes.size(); ++a)
      if (mi[a] < 0 || mi[a] >= axes[a].count) return false;
    return true;
  }
};

/// Parses "min:max:count" per axis, comma separated: "1:2:9,1:2:9,1:2:9".
inline GridSpec parse_grid(const std::string& text) {
  std::vector<AxisSpec> axes;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string field = text.substr(start, end - start);
    std::size_t c1 = field.find(':');
    std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : field.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::invalid_argument("grid axis '" + field + "' is not min:max:count");
    AxisSpec a;
    try {
      a.min = std::stod(field.substr(0, c1));
      a.max = std::stod(field.substr(c1 + 1, c2 - c1 - 1));
      a.count = std::stoi(field.substr(c2 + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("grid axis '" + field + "' is not numeric min:max:count");
    }
    axes.push_back(a);
    if (end == text.size()) break;
    start = end + 1;
  }
  return GridSpec(std::move(axes));
}

}  // namespace conjugen
