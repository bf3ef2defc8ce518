#include "spex/ladder_graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace spex {

int Dag::add_vertex() {
  out_.emplace_back();
  return vertex_count() - 1;
}

void Dag::add_edge(int from, int to, double cost) {
  out_.at(from).push_back({to, cost});
  ++edges_;
}

std::vector<int> Dag::topological_order() const {
  const int n = vertex_count();
  std::vector<int> indegree(n, 0);
  for (const auto& list : out_) {
    for (const Edge& e : list) ++indegree[e.to];
  }
  std::vector<int> order;
  order.reserve(n);
  for (int v = 0; v < n; ++v) {
    if (indegree[v] == 0) order.push_back(v);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (const Edge& e : out_[order[head]]) {
      if (--indegree[e.to] == 0) order.push_back(e.to);
    }
  }
  if (static_cast<int>(order.size()) != n) throw std::logic_error("Dag: graph has a cycle");
  return order;
}

DagPath dag_shortest_path(const Dag& dag, const std::vector<int>& sources, const std::vector<int>& targets) {
  const int n = dag.vertex_count();
  std::vector<double> dist(n, kInf);
  std::vector<int> parent(n, -1);
  for (int s : sources) dist[s] = 0.0;
  for (int u : dag.topological_order()) {
    if (dist[u] == kInf) continue;
    for (const Dag::Edge& e : dag.out(u)) {
      const double d = dist[u] + e.cost;
      if (d < dist[e.to]) {
        dist[e.to] = d;
        parent[e.to] = u;
      }
    }
  }
  DagPath best;
  int end = -1;
  for (int t : targets) {
    if (dist[t] < best.cost) {
      best.cost = dist[t];
      end = t;
    }
  }
  for (int v = end; v >= 0; v = parent[v]) best.vertices.push_back(v);
  std::reverse(best.vertices.begin(), best.vertices.end());
  return best;
}

}  // namespace spex
