#include <algorithm>
#include <vector>

#include "sparselab/formats.hpp"

namespace sparselab {

namespace {

// Adjacency of the symmetrized pattern A | A^T without self loops, each list
// sorted by vertex id.
std::vector<std::vector<index_t>> symmetric_adjacency(const CsrMatrix& a) {
  const auto n = static_cast<std::size_t>(a.n_rows());
  std::vector<std::vector<index_t>> adj(n);
  for (const auto& t : a.triplets()) {
    if (t.row == t.col) continue;
    adj[static_cast<std::size_t>(t.row)].push_back(t.col);
    adj[static_cast<std::size_t>(t.col)].push_back(t.row);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

struct LevelStructure {
  std::vector<index_t> reached;
  std::vector<index_t> last_level;
  index_t eccentricity = 0;
};

// `level` must be all -1 on entry and is restored to all -1 on exit.
LevelStructure bfs_levels(const std::vector<std::vector<index_t>>& adj, index_t root, std::vector<index_t>& level) {
  LevelStructure out;
  std::vector<index_t> frontier{root};
  level[static_cast<std::size_t>(root)] = 0;
  while (!frontier.empty()) {
    out.reached.insert(out.reached.end(), frontier.begin(), frontier.end());
    out.last_level = frontier;
    std::vector<index_t> next;
    for (const index_t v : frontier) {
      for (const index_t u : adj[static_cast<std::size_t>(v)]) {
        if (level[static_cast<std::size_t>(u)] == -1) {
          level[static_cast<std::size_t>(u)] = level[static_cast<std::size_t>(v)] + 1;
          next.push_back(u);
        }
      }
    }
    if (!next.empty()) ++out.eccentricity;
    frontier = std::move(next);
  }
  for (const index_t v : out.reached) level[static_cast<std::size_t>(v)] = -1;
  return out;
}

// Smallest-degree vertex of `candidates`, ties to the smallest id.
index_t min_degree_vertex(const std::vector<std::vector<index_t>>& adj, const std::vector<index_t>& candidates) {
  index_t best = candidates.front();
  for (const index_t v : candidates) {
    const auto dv = adj[static_cast<std::size_t>(v)].size();
    const auto db = adj[static_cast<std::size_t>(best)].size();
    if (dv < db || (dv == db && v < best)) best = v;
  }
  return best;
}

index_t pseudo_peripheral_vertex(const std::vector<std::vector<index_t>>& adj, const std::vector<index_t>& component,
                                 std::vector<index_t>& level) {
  index_t root = min_degree_vertex(adj, component);
  LevelStructure ls = bfs_levels(adj, root, level);
  for (;;) {
    const index_t candidate = min_degree_vertex(adj, ls.last_level);
    LevelStructure next = bfs_levels(adj, candidate, level);
    if (next.eccentricity <= ls.eccentricity) return root;
    root = candidate;
    ls = std::move(next);
  }
}

}  // namespace

Permutation rcm_permutation(const CsrMatrix& a) {
  if (a.n_rows() != a.n_cols()) throw std::invalid_argument("RCM requires a square matrix");
  const auto n = static_cast<std::size_t>(a.n_rows());
  const auto adj = symmetric_adjacency(a);

  std::vector<index_t> level(n, -1);
  std::vector<bool> visited(n, false);
  std::vector<index_t> sequence;
  sequence.reserve(n);

  auto by_degree = [&adj](index_t x, index_t y) {
    const auto dx = adj[static_cast<std::size_t>(x)].size();
    const auto dy = adj[static_cast<std::size_t>(y)].size();
    return dx != dy ? dx < dy : x < y;
  };

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (visited[seed]) continue;

    const auto component = bfs_levels(adj, static_cast<index_t>(seed), level).reached;
    const index_t start = pseudo_peripheral_vertex(adj, component, level);

    // Cuthill-McKee BFS, neighbors in increasing degree.
    std::size_t head = sequence.size();
    sequence.push_back(start);
    visited[static_cast<std::size_t>(start)] = true;
    std::vector<index_t> fresh;
    while (head < sequence.size()) {
      const index_t v = sequence[head++];
      fresh.clear();
      for (const index_t u : adj[static_cast<std::size_t>(v)]) {
        if (!visited[static_cast<std::size_t>(u)]) {
          visited[static_cast<std::size_t>(u)] = true;
          fresh.push_back(u);
        }
      }
      std::sort(fresh.begin(), fresh.end(), by_degree);
      sequence.insert(sequence.end(), fresh.begin(), fresh.end());
    }
  }

  std::reverse(sequence.begin(), sequence.end());
  return Permutation::from_sequence(sequence);
}

}  // namespace sparselab
