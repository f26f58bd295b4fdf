#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace liesym::stochastic {

/// Node times 0 = t_0 < ... < t_{n-1} = T, at least two nodes.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> nodes);
  /// `steps` intervals of equal length on [0, T].
  static TimeGrid uniform(double T, std::size_t steps);

  std::size_t size() const { return nodes_.size(); }
  std::size_t steps() const { return nodes_.size() - 1; }
  double operator[](std::size_t k) const { return nodes_[k]; }
  double T() const { return nodes_.back(); }
  double dt(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
  const std::vector<double>& nodes() const { return nodes_; }

 private:
  std::vector<double> nodes_;
};

/// Values of one process on `grid` for every path, row-major by path.
struct Process {
  TimeGrid grid;
  std::size_t paths = 0;
  std::vector<double> values;

  Process() = default;
  Process(TimeGrid g, std::size_t m) : grid(std::move(g)), paths(m), values(m * grid.size()) {}

  double& at(std::size_t path, std::size_t k) { return values[path * grid.size() + k]; }
  double at(std::size_t path, std::size_t k) const { return values[path * grid.size() + k]; }
  std::span<const double> row(std::size_t path) const {
    return {values.data() + path * grid.size(), grid.size()};
  }
  /// Values of all paths at node k.
  std::vector<double> column(std::size_t k) const;
};

/// Named processes over a common path index. Conventional names: B, X, Y,
/// Z, beta, alpha (on the transformed clock), Bbar, Bbar_alpha.
struct PathEnsemble {
  TimeGrid grid;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  std::map<std::string, Process> processes;

  bool has(const std::string& name) const { return processes.contains(name); }
  const Process& get(const std::string& name) const;
  Process& get(const std::string& name);
  Process& add(const std::string& name, Process p);
};

/// Seed for path `index`, independent of how paths are scheduled.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

/// Linear interpolation of (xs, ys) at v; xs strictly increasing; clamps to
/// the end values outside the range.
double interpolate(std::span<const double> xs, std::span<const double> ys, double v);

/// Writes `path,t,<names...>` rows for the first `max_paths` paths. All
/// processes must share a grid.
void write_csv(const PathEnsemble& pe, const std::vector<std::string>& names,
               const std::string& file, std::size_t max_paths);

}  // namespace liesym::stochastic
