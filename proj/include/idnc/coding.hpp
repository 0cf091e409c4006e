#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "idnc/core_model.hpp"

namespace idnc {

// Probability that player i still wants packet j, as seen by whoever is
// choosing the combination. Built from a StateMatrix this is just S.
class WantView {
 public:
  WantView() = default;
  WantView(int players, int packets)
      : m_(players), n_(packets), pi_(static_cast<std::size_t>(players) * packets, 0.0) {}

  static WantView from_state(const StateMatrix& S) {
    WantView v(S.players(), S.packets());
    for (int i = 0; i < S.players(); ++i)
      for (int j = 0; j < S.packets(); ++j) v.set(i, j, S.wants(i, j) ? 1.0 : 0.0);
    return v;
  }

  int players() const { return m_; }
  int packets() const { return n_; }
  double want(int i, int j) const { return pi_[idx(i, j)]; }
  bool surely_has(int i, int j) const { return pi_[idx(i, j)] == 0.0; }
  void set(int i, int j, double p) { pi_[idx(i, j)] = p; }

  double expected_wants(int i) const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += pi_[idx(i, j)];
    return s;
  }
  bool may_want_any(int i) const {
    for (int j = 0; j < n_; ++j)
      if (pi_[idx(i, j)] > 0.0) return true;
    return false;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }
  int m_ = 0;
  int n_ = 0;
  std::vector<double> pi_;
};

// id < 0 is the base station.
struct Transmitter {
  int id = -1;
  BitVector holds;
  std::vector<double> delivery;  // 1 - loss probability to each player
};

inline Transmitter player_transmitter(int sender, const StateMatrix& S, const ErasureMatrix& P) {
  Transmitter t{sender, BitVector(S.packets()), std::vector<double>(S.players())};
  for (int j = 0; j < S.packets(); ++j) t.holds[j] = S.has(sender, j) ? 1 : 0;
  for (int i = 0; i < S.players(); ++i) t.delivery[i] = 1.0 - P(i, sender);
  return t;
}

inline Transmitter base_station_transmitter(int packets, const std::vector<double>& q) {
  Transmitter t{-1, BitVector(packets, 1), std::vector<double>(q.size())};
  for (std::size_t i = 0; i < q.size(); ++i) t.delivery[i] = 1.0 - q[i];
  return t;
}

// What the selector knows at decision time.
struct CodingContext {
  WantView view;
  std::vector<double> delay;  // cumulative delay before this stage
  std::vector<double> pbar;   // completion-time normalizer (p̄_i, or q_i for PMP)

  static CodingContext make(const StateMatrix& S, const DelayVector& d, std::vector<double> pbar) {
    CodingContext c{WantView::from_state(S), std::vector<double>(d.begin(), d.end()), std::move(pbar)};
    return c;
  }
};

struct IdncVertex {
  int player;
  int packet;
  bool operator==(const IdncVertex&) const = default;
};

class IdncGraph {
 public:
  IdncGraph(const WantView& view, const Transmitter& tx) : view_(&view) {
    for (int i = 0; i < view.players(); ++i) {
      if (i == tx.id) continue;
      for (int j = 0; j < view.packets(); ++j)
        if (tx.holds[j] && view.want(i, j) > 0.0) vertices_.push_back({i, j});
    }
  }

  const std::vector<IdncVertex>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }

  bool adjacent(std::size_t a, std::size_t b) const {
    if (a == b) return false;
    const auto& u = vertices_[a];
    const auto& v = vertices_[b];
    if (u.packet == v.packet) return true;
    return view_->surely_has(v.player, u.packet) && view_->surely_has(u.player, v.packet);
  }

  std::vector<std::vector<std::uint8_t>> adjacency_matrix() const {
    std::vector<std::vector<std::uint8_t>> adj(size(), std::vector<std::uint8_t>(size(), 0));
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = 0; b < size(); ++b) adj[a][b] = adjacent(a, b) ? 1 : 0;
    return adj;
  }

 private:
  const WantView* view_;
  std::vector<IdncVertex> vertices_;
};

// The view must outlive the graph.
inline IdncGraph build_idnc_graph(const WantView& view, const Transmitter& tx) {
  return IdncGraph(view, tx);
}

// Players that can raise the metric's cost this stage.
inline BitVector critical_players(Metric metric, const CodingContext& ctx) {
  const int m = ctx.view.players();
  BitVector crit(m, 0);
  if (metric == Metric::sum_delay) return crit;
  if (metric == Metric::max_delay) {
    const double top = *std::max_element(ctx.delay.begin(), ctx.delay.end());
    for (int i = 0; i < m; ++i) crit[i] = ctx.view.may_want_any(i) && ctx.delay[i] == top;
    return crit;
  }
  std::vector<double> C(m);
  for (int i = 0; i < m; ++i)
    C[i] = (ctx.view.expected_wants(i) + ctx.delay[i] - ctx.pbar[i]) / (1.0 - ctx.pbar[i]);
  const double top = *std::max_element(C.begin(), C.end());
  for (int i = 0; i < m; ++i)
    crit[i] = ctx.view.may_want_any(i) && C[i] + 1.0 / (1.0 - ctx.pbar[i]) > top;
  return crit;
}

inline PacketCombination greedy_combination(const Transmitter& tx, const CodingContext& ctx,
                                            Metric metric) {
  constexpr double kCriticalBonus = 2.0;
  const IdncGraph g(ctx.view, tx);
  const BitVector crit = critical_players(metric, ctx);
  std::vector<double> weight(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto [i, j] = g.vertices()[v];
    weight[v] = ctx.view.want(i, j) * tx.delivery[i] + (crit[i] ? kCriticalBonus : 0.0);
  }
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), 0);
  // Equal weights: higher packet first, which leans toward the
  // lexicographically smaller κ.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (weight[a] != weight[b]) return weight[a] > weight[b];
    return g.vertices()[a].packet > g.vertices()[b].packet;
  });

  std::vector<std::size_t> clique;
  for (auto v : order) {
    bool ok = true;
    for (auto u : clique)
      if (!g.adjacent(u, v)) { ok = false; break; }
    if (ok) clique.push_back(v);
  }
  PacketCombination kappa(ctx.view.packets(), 0);
  for (auto v : clique) kappa[g.vertices()[v].packet] = 1;
  return kappa;
}

inline PacketCombination greedy_combination(int sender, const StateMatrix& S, const ErasureMatrix& P,
                                            const DelayVector& d, Metric metric) {
  return greedy_combination(player_transmitter(sender, S, P),
                            CodingContext::make(S, d, P.row_averages()), metric);
}

// (primary, SDD tie-break). Lower is better. Only meaningful for a certain
// view; uncertain entries are treated as their probability of wanting.
struct CombinationScore {
  double primary = 0.0;
  double sum_delay = 0.0;
  auto operator<=>(const CombinationScore&) const = default;
};

inline CombinationScore combination_score(const Transmitter& tx, const CodingContext& ctx,
                                          Metric metric, const PacketCombination& kappa) {
  const int m = ctx.view.players();
  std::vector<double> e(m, 0.0);
  for (int i = 0; i < m; ++i) {
    if (!ctx.view.may_want_any(i)) continue;
    int hits = 0;
    for (int j = 0; j < ctx.view.packets(); ++j) hits += (kappa[j] && ctx.view.want(i, j) > 0.0);
    if (hits != 1) e[i] = tx.delivery[i];
  }
  CombinationScore s;
  for (double v : e) s.sum_delay += v;
  switch (metric) {
    case Metric::sum_delay:
      s.primary = s.sum_delay;
      break;
    case Metric::max_delay: {
      double before = -std::numeric_limits<double>::infinity(), after = before;
      for (int i = 0; i < m; ++i) {
        before = std::max(before, ctx.delay[i]);
        after = std::max(after, ctx.delay[i] + e[i]);
      }
      s.primary = after - before;
      break;
    }
    case Metric::completion_time: {
      double before = -std::numeric_limits<double>::infinity(), after = before;
      for (int i = 0; i < m; ++i) {
        const double w = ctx.view.expected_wants(i);
        before = std::max(before, (w + ctx.delay[i] - ctx.pbar[i]) / (1.0 - ctx.pbar[i]));
        after = std::max(after, (w + ctx.delay[i] + e[i] - ctx.pbar[i]) / (1.0 - ctx.pbar[i]));
      }
      s.primary = after - before;
      break;
    }
  }
  return s;
}

inline constexpr int kEnumerationBound = 20;

inline PacketCombination exhaustive_best_combination(const Transmitter& tx, const CodingContext& ctx,
                                                     Metric metric) {
  std::vector<int> held;
  for (int j = 0; j < ctx.view.packets(); ++j)
    if (tx.holds[j]) held.push_back(j);
  if (static_cast<int>(held.size()) > kEnumerationBound)
    throw std::invalid_argument("exhaustive_best_combination: Has set above enumeration bound");

  PacketCombination best(ctx.view.packets(), 0);
  CombinationScore best_score = combination_score(tx, ctx, metric, best);
  const std::uint32_t total = 1U << held.size();
  PacketCombination kappa(ctx.view.packets(), 0);
  for (std::uint32_t mask = 1; mask < total; ++mask) {
    std::fill(kappa.begin(), kappa.end(), 0);
    for (std::size_t b = 0; b < held.size(); ++b)
      if ((mask >> b) & 1U) kappa[held[b]] = 1;
    const auto sc = combination_score(tx, ctx, metric, kappa);
    if (sc < best_score || (sc == best_score && kappa < best)) {
      best = kappa;
      best_score = sc;
    }
  }
  return best;
}

struct Selection {
  PacketCombination kappa;
  bool exhaustive = false;
};

// Exhaustive when the sender's Has set is within the limit, greedy otherwise.
inline Selection select_combination(const Transmitter& tx, const CodingContext& ctx, Metric metric,
                                    int exhaustive_limit) {
  int held = 0;
  for (auto h : tx.holds) held += h;
  if (held <= std::min(exhaustive_limit, kEnumerationBound))
    return {exhaustive_best_combination(tx, ctx, metric), true};
  return {greedy_combination(tx, ctx, metric), false};
}

inline PacketCombination pmp_combination(const StateMatrix& S, Metric metric,
                                         const std::vector<double>& q, const DelayVector& d,
                                         int exhaustive_limit = 10) {
  return select_combination(base_station_transmitter(S.packets(), q), CodingContext::make(S, d, q),
                            metric, exhaustive_limit)
      .kappa;
}

}  // namespace idnc
