#ifndef SIZEBIAS_MONOTONE_CHAIN_HPP
#define SIZEBIAS_MONOTONE_CHAIN_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sizebias/conditional_bernoulli.hpp"
#include "sizebias/rng.hpp"

namespace sizebias {

namespace detail {

// Dinic max-flow on small graphs with real capacities.
class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes) : graph_(nodes) {}

  void add_edge(int from, int to, double cap) {
    graph_[from].push_back({to, cap, static_cast<int>(graph_[to].size())});
    graph_[to].push_back({from, 0.0, static_cast<int>(graph_[from].size()) - 1});
  }

  // Flow pushed along edge index e out of node u (reverse capacity).
  double flow_on(int u, int e) const {
    const Edge& fwd = graph_[u][static_cast<std::size_t>(e)];
    return graph_[fwd.to][static_cast<std::size_t>(fwd.rev)].cap;
  }

  int degree(int u) const { return static_cast<int>(graph_[u].size()); }
  int edge_target(int u, int e) const { return graph_[u][static_cast<std::size_t>(e)].to; }

  double max_flow(int s, int t) {
    double total = 0.0;
    while (bfs(s, t)) {
      iter_.assign(graph_.size(), 0);
      while (true) {
        double pushed = dfs(s, t, kInf);
        if (pushed <= kEps) break;
        total += pushed;
      }
    }
    return total;
  }

 private:
  static constexpr double kEps = 1e-15;
  static constexpr double kInf = 1e30;

  struct Edge {
    int to;
    double cap;
    int rev;
  };

  bool bfs(int s, int t) {
    level_.assign(graph_.size(), -1);
    std::vector<int> queue{s};
    level_[static_cast<std::size_t>(s)] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int u = queue[head];
      for (const Edge& e : graph_[static_cast<std::size_t>(u)]) {
        if (e.cap > kEps && level_[static_cast<std::size_t>(e.to)] < 0) {
          level_[static_cast<std::size_t>(e.to)] = level_[static_cast<std::size_t>(u)] + 1;
          queue.push_back(e.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
  }

  double dfs(int u, int t, double limit) {
    if (u == t) return limit;
    for (int& e = iter_[static_cast<std::size_t>(u)]; e < degree(u); ++e) {
      Edge& edge = graph_[static_cast<std::size_t>(u)][static_cast<std::size_t>(e)];
      if (edge.cap <= kEps ||
          level_[static_cast<std::size_t>(edge.to)] != level_[static_cast<std::size_t>(u)] + 1)
        continue;
      double pushed = dfs(edge.to, t, std::min(limit, edge.cap));
      if (pushed > kEps) {
        edge.cap -= pushed;
        graph_[static_cast<std::size_t>(edge.to)][static_cast<std::size_t>(edge.rev)].cap +=
            pushed;
        return pushed;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<Edge>> graph_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

}  // namespace detail

// Coupled nondecreasing chain X_0 <= X_1 <= ... <= X_m of Bernoulli vectors
// whose level-a state follows the conditional law given sum = a. Transition
// kernels between consecutive levels are solved once as transportation
// problems (arcs only add a single coordinate) and cached; kernel existence
// for every probability vector follows from the monotonicity of the
// conditional laws. Exact enumeration over the 2^m states caps m.
class MonotoneCouplingChain {
 public:
  static constexpr int kDefaultExactLimit = 12;

  explicit MonotoneCouplingChain(std::vector<double> p,
                                 int exact_limit = kDefaultExactLimit)
      : cb_(std::move(p)) {
    const int m = static_cast<int>(cb_.m());
    if (m > exact_limit)
      throw std::invalid_argument(
          "MonotoneCouplingChain: exact construction capped at m = " +
          std::to_string(exact_limit) +
          "; use ConditionalBernoulli for single-level draws at larger m");
    build();
  }

  int m() const { return static_cast<int>(cb_.m()); }
  const ConditionalBernoulli& conditional() const { return cb_; }

  const std::vector<std::uint32_t>& level_masks(int a) const {
    return levels_[static_cast<std::size_t>(a)].masks;
  }
  const std::vector<double>& level_probs(int a) const {
    return levels_[static_cast<std::size_t>(a)].probs;
  }

  // Rows of the transition kernel from level a: (index into level a+1, prob).
  const std::vector<std::pair<int, double>>& kernel_row(int a, int xi) const {
    return kernels_[static_cast<std::size_t>(a)][static_cast<std::size_t>(xi)];
  }

  std::vector<std::uint32_t> sample_chain(Rng& rng) const {
    std::vector<std::uint32_t> states(static_cast<std::size_t>(m()) + 1);
    states[0] = 0;
    int xi = 0;
    for (int a = 0; a < m(); ++a) {
      xi = step(rng, a, xi);
      states[static_cast<std::size_t>(a + 1)] = level_masks(a + 1)[static_cast<std::size_t>(xi)];
    }
    return states;
  }

  // Draws (X_a, X_b) for a <= b without materializing the whole chain.
  std::pair<std::uint32_t, std::uint32_t> sample_segment(Rng& rng, int a, int b) const {
    if (a < 0 || b > m() || a > b)
      throw std::invalid_argument("sample_segment: need 0 <= a <= b <= m");
    int xi = static_cast<int>(rng.categorical(level_probs(a)));
    const std::uint32_t xa = level_masks(a)[static_cast<std::size_t>(xi)];
    for (int lvl = a; lvl < b; ++lvl) xi = step(rng, lvl, xi);
    return {xa, level_masks(b)[static_cast<std::size_t>(xi)]};
  }

  // Draws X_a, X_{a+1}, ..., X_b as one chain segment.
  std::vector<std::uint32_t> sample_path(Rng& rng, int a, int b) const {
    if (a < 0 || b > m() || a > b)
      throw std::invalid_argument("sample_path: need 0 <= a <= b <= m");
    std::vector<std::uint32_t> states;
    states.reserve(static_cast<std::size_t>(b - a) + 1);
    int xi = static_cast<int>(rng.categorical(level_probs(a)));
    states.push_back(level_masks(a)[static_cast<std::size_t>(xi)]);
    for (int lvl = a; lvl < b; ++lvl) {
      xi = step(rng, lvl, xi);
      states.push_back(level_masks(lvl + 1)[static_cast<std::size_t>(xi)]);
    }
    return states;
  }

  // Worst absolute mismatch between kernel-propagated level laws and the
  // conditional laws they must reproduce.
  double marginal_residual() const {
    double worst = 0.0;
    for (int a = 0; a < m(); ++a) {
      const auto& cur = levels_[static_cast<std::size_t>(a)];
      const auto& nxt = levels_[static_cast<std::size_t>(a + 1)];
      std::vector<double> pushed(nxt.masks.size(), 0.0);
      for (std::size_t xi = 0; xi < cur.masks.size(); ++xi) {
        for (auto [yi, q] : kernels_[static_cast<std::size_t>(a)][xi])
          pushed[static_cast<std::size_t>(yi)] += cur.probs[xi] * q;
      }
      for (std::size_t yi = 0; yi < pushed.size(); ++yi)
        worst = std::max(worst, std::abs(pushed[yi] - nxt.probs[yi]));
    }
    return worst;
  }

 private:
  struct Level {
    std::vector<std::uint32_t> masks;  // ascending
    std::vector<double> probs;
  };

  int step(Rng& rng, int a, int xi) const {
    const auto& row = kernels_[static_cast<std::size_t>(a)][static_cast<std::size_t>(xi)];
    double u = rng.uniform(), acc = 0.0;
    for (auto [yi, q] : row) {
      acc += q;
      if (u < acc) return yi;
    }
    return row.back().first;
  }

  void build() {
    const int m = this->m();
    const auto& p = cb_.p();
    levels_.resize(static_cast<std::size_t>(m) + 1);
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      double joint = 1.0;
      for (int j = 0; j < m; ++j) joint *= (mask >> j & 1u) ? p[static_cast<std::size_t>(j)]
                                                            : 1.0 - p[static_cast<std::size_t>(j)];
      auto& lvl = levels_[static_cast<std::size_t>(std::popcount(mask))];
      lvl.masks.push_back(mask);
      lvl.probs.push_back(joint);
    }
    for (int a = 0; a <= m; ++a) {
      auto& lvl = levels_[static_cast<std::size_t>(a)];
      const double total = cb_.sum_pmf().at(a);
      for (double& q : lvl.probs) q /= total;
    }
    kernels_.resize(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) solve_level(a);
  }

  void solve_level(int a) {
    const auto& cur = levels_[static_cast<std::size_t>(a)];
    const auto& nxt = levels_[static_cast<std::size_t>(a + 1)];
    const int nl = static_cast<int>(cur.masks.size());
    const int nr = static_cast<int>(nxt.masks.size());
    // nodes: 0 source, 1 sink, 2.. left, 2+nl.. right
    detail::FlowNetwork net(2 + nl + nr);
    std::vector<int> right_index(1u << m(), -1);
    for (int j = 0; j < nr; ++j) right_index[nxt.masks[static_cast<std::size_t>(j)]] = j;
    for (int i = 0; i < nl; ++i) net.add_edge(0, 2 + i, cur.probs[static_cast<std::size_t>(i)]);
    std::vector<std::vector<int>> arc_edge_idx(static_cast<std::size_t>(nl));
    for (int i = 0; i < nl; ++i) {
      const std::uint32_t x = cur.masks[static_cast<std::size_t>(i)];
      for (int bit = 0; bit < m(); ++bit) {
        if (x >> bit & 1u) continue;
        const int j = right_index[x | (1u << bit)];
        arc_edge_idx[static_cast<std::size_t>(i)].push_back(net.degree(2 + i));
        net.add_edge(2 + i, 2 + nl + j, 1.0);
      }
    }
    for (int j = 0; j < nr; ++j)
      net.add_edge(2 + nl + j, 1, nxt.probs[static_cast<std::size_t>(j)]);

    const double flow = net.max_flow(0, 1);
    if (std::abs(flow - 1.0) > 1e-9)
      throw std::runtime_error("MonotoneCouplingChain: transportation solve infeasible");

    auto& rows = kernels_[static_cast<std::size_t>(a)];
    rows.assign(static_cast<std::size_t>(nl), {});
    for (int i = 0; i < nl; ++i) {
      double row_total = 0.0;
      for (int e : arc_edge_idx[static_cast<std::size_t>(i)]) {
        const double f = net.flow_on(2 + i, e);
        if (f > 1e-15) {
          const int j = net.edge_target(2 + i, e) - 2 - nl;
          rows[static_cast<std::size_t>(i)].emplace_back(j, f);
          row_total += f;
        }
      }
      if (rows[static_cast<std::size_t>(i)].empty())
        throw std::runtime_error("MonotoneCouplingChain: empty kernel row");
      for (auto& [j, q] : rows[static_cast<std::size_t>(i)]) q /= row_total;
    }
  }

  ConditionalBernoulli cb_;
  std::vector<Level> levels_;
  std::vector<std::vector<std::vector<std::pair<int, double>>>> kernels_;
};

}  // namespace sizebias

#endif
