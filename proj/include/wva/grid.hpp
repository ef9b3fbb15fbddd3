#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wva {

struct Axis {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  int steps = 2;  // inclusive linspace, steps >= 2

  double value(int i) const { return steps == 1 ? min : min + (max - min) * double(i) / double(steps - 1); }
};

/// One grid point: axis and fixed values keyed by name.
class GridPoint {
 public:
  void set(const std::string& name, double v) { values_[name] = v; }
  std::optional<double> find(const std::string& name) const;
  double get(const std::string& name, double fallback) const { return find(name).value_or(fallback); }
  const std::map<std::string, double>& values() const noexcept { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// Cartesian product of axes plus fixed values. Axis names are drawn from
/// {G, theta, xi, gamma, t, delta_b, sigma}; `theta` is measured relative
/// to the evolved system phase t*delta_b.
class SweepGrid {
 public:
  SweepGrid() = default;
  SweepGrid(std::vector<Axis> axes, std::map<std::string, double> fixed);

  const std::vector<Axis>& axes() const noexcept { return axes_; }
  const std::map<std::string, double>& fixed() const noexcept { return fixed_; }
  std::size_t size() const noexcept;
  /// Row-major: the first axis varies slowest.
  GridPoint point(std::size_t index) const;
  bool provides(const std::string& name) const;
  /// Throws ErrorKind::Config naming every required symbol that is neither
  /// an axis nor fixed.
  void require(const std::vector<std::string>& names) const;

  static bool is_known_symbol(const std::string& name);

 private:
  std::vector<Axis> axes_;
  std::map<std::string, double> fixed_;
};

}  // namespace wva
