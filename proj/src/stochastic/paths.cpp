#include "liesym/stochastic/paths.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>

#include "liesym/error.hpp"

namespace liesym::stochastic {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw Error("time grid needs at least two nodes");
  for (std::size_t k = 1; k < nodes_.size(); ++k) {
    if (!(nodes_[k] > nodes_[k - 1])) throw Error("time grid must be strictly increasing");
  }
}

TimeGrid TimeGrid::uniform(double T, std::size_t steps) {
  if (steps < 1) throw Error("time grid needs at least one step");
  if (!(T > 0)) throw Error("horizon must be positive");
  std::vector<double> n(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) n[k] = T * static_cast<double>(k) / static_cast<double>(steps);
  n.back() = T;
  return TimeGrid(std::move(n));
}

std::vector<double> Process::column(std::size_t k) const {
  std::vector<double> c(paths);
  for (std::size_t p = 0; p < paths; ++p) c[p] = at(p, k);
  return c;
}

const Process& PathEnsemble::get(const std::string& name) const {
  auto it = processes.find(name);
  if (it == processes.end()) throw Error("ensemble has no process '" + name + "'");
  return it->second;
}

Process& PathEnsemble::get(const std::string& name) {
  auto it = processes.find(name);
  if (it == processes.end()) throw Error("ensemble has no process '" + name + "'");
  return it->second;
}

Process& PathEnsemble::add(const std::string& name, Process p) {
  if (p.paths != paths) throw Error("process '" + name + "' has the wrong number of paths");
  return processes[name] = std::move(p);
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over the pair.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double interpolate(std::span<const double> xs, std::span<const double> ys, double v) {
  if (v <= xs.front()) return ys.front();
  if (v >= xs.back()) return ys.back();
  auto it = std::upper_bound(xs.begin(), xs.end(), v);
  std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
  double w = (v - xs[k]) / (xs[k + 1] - xs[k]);
  return ys[k] + w * (ys[k + 1] - ys[k]);
}

void write_csv(const PathEnsemble& pe, const std::vector<std::string>& names,
               const std::string& file, std::size_t max_paths) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file);
  if (names.empty()) throw Error("no processes to write");
  const TimeGrid& g = pe.get(names.front()).grid;
  for (const auto& n : names) {
    if (pe.get(n).grid.nodes() != g.nodes()) throw Error("processes in one CSV must share a grid");
  }
  out << "path,t";
  for (const auto& n : names) out << ',' << n;
  out << '\n' << std::setprecision(17);
  for (std::size_t p = 0; p < std::min(max_paths, pe.paths); ++p) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      out << p << ',' << g[k];
      for (const auto& n : names) out << ',' << pe.get(n).at(p, k);
      out << '\n';
    }
  }
}

}  // namespace liesym::stochastic
