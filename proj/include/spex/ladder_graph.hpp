#pragma once

#include <limits>
#include <vector>

namespace spex {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Directed acyclic graph with weighted edges. Vertices are plain indices; the
// caller keeps whatever payload they stand for.
class Dag {
 public:
  struct Edge {
    int to = 0;
    double cost = 0.0;
  };

  int add_vertex();
  void add_edge(int from, int to, double cost);

  int vertex_count() const { return static_cast<int>(out_.size()); }
  std::size_t edge_count() const { return edges_; }
  const std::vector<Edge>& out(int v) const { return out_[v]; }

  // Kahn order; throws std::logic_error on a cycle.
  std::vector<int> topological_order() const;

 private:
  std::vector<std::vector<Edge>> out_;
  std::size_t edges_ = 0;
};

struct DagPath {
  double cost = kInf;
  std::vector<int> vertices;  // empty when no source reaches a target

  bool found() const { return !vertices.empty(); }
};

// Cheapest path from any source to any target, relaxing in topological order.
// Ties keep the first relaxation, which makes the result deterministic.
DagPath dag_shortest_path(const Dag& dag, const std::vector<int>& sources, const std::vector<int>& targets);

}  // namespace spex
