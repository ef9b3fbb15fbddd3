#include "wva/grid.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "wva/error.hpp"

namespace wva {

std::optional<double> GridPoint::find(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

bool SweepGrid::is_known_symbol(const std::string& name) {
  static const std::array<const char*, 7> known{"G", "theta", "xi", "gamma", "t", "delta_b", "sigma"};
  return std::any_of(known.begin(), known.end(), [&](const char* k) { return name == k; });
}

SweepGrid::SweepGrid(std::vector<Axis> axes, std::map<std::string, double> fixed)
    : axes_(std::move(axes)), fixed_(std::move(fixed)) {
  std::set<std::string> seen;
  for (const auto& a : axes_) {
    if (!is_known_symbol(a.name)) fail(ErrorKind::Config, "unknown sweep axis `" + a.name + "`");
    if (!seen.insert(a.name).second) fail(ErrorKind::Config, "duplicate sweep axis `" + a.name + "`");
    if (a.steps < 2) fail(ErrorKind::Config, "axis `" + a.name + "` needs at least 2 steps");
  }
  for (const auto& [name, value] : fixed_) {
    if (!is_known_symbol(name)) fail(ErrorKind::Config, "unknown fixed symbol `" + name + "`");
    if (seen.count(name)) fail(ErrorKind::Config, "`" + name + "` is both an axis and fixed");
  }
}

std::size_t SweepGrid::size() const noexcept {
  if (axes_.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes_) n *= static_cast<std::size_t>(a.steps);
  return n;
}

GridPoint SweepGrid::point(std::size_t index) const {
  GridPoint p;
  for (const auto& [name, value] : fixed_) p.set(name, value);
  for (auto it = axes_.rbegin(); it != axes_.rend(); ++it) {
    const auto steps = static_cast<std::size_t>(it->steps);
    p.set(it->name, it->value(static_cast<int>(index % steps)));
    index /= steps;
  }
  return p;
}

bool SweepGrid::provides(const std::string& name) const {
  return fixed_.count(name) > 0 ||
         std::any_of(axes_.begin(), axes_.end(), [&](const Axis& a) { return a.name == name; });
}

void SweepGrid::require(const std::vector<std::string>& names) const {
  std::string missing;
  for (const auto& n : names)
    if (!provides(n)) missing += (missing.empty() ? "" : ", ") + n;
  if (!missing.empty()) fail(ErrorKind::Config, "grid leaves free symbols unspecified: " + missing);
}

}  // namespace wva
