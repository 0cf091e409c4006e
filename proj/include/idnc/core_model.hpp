#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "idnc/rng.hpp"

namespace idnc {

using BitVector = std::vector<std::uint8_t>;
using PacketCombination = BitVector;
using DelayVector = std::vector<long>;

enum class Metric { completion_time, max_delay, sum_delay };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::completion_time: return "CT";
    case Metric::max_delay: return "MDD";
    case Metric::sum_delay: return "SDD";
  }
  return "?";
}

inline Metric parse_metric(const std::string& s) {
  if (s == "CT") return Metric::completion_time;
  if (s == "MDD") return Metric::max_delay;
  if (s == "SDD") return Metric::sum_delay;
  throw std::invalid_argument("unknown metric: " + s);
}

// s_ij = 1 means player i wants packet j.
class StateMatrix {
 public:
  StateMatrix() = default;
  StateMatrix(int players, int packets, bool all_wanting = false)
      : m_(players), n_(packets),
        cells_(static_cast<std::size_t>(players) * packets, all_wanting ? 1 : 0) {
    if (players < 1 || packets < 1)
      throw std::invalid_argument("StateMatrix: empty dimensions");
  }

  static StateMatrix from_rows(const std::vector<BitVector>& rows) {
    if (rows.empty() || rows[0].empty())
      throw std::invalid_argument("StateMatrix: empty rows");
    StateMatrix s(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < s.m_; ++i) {
      if (static_cast<int>(rows[i].size()) != s.n_)
        throw std::invalid_argument("StateMatrix: ragged rows");
      for (int j = 0; j < s.n_; ++j) s.set_wants(i, j, rows[i][j] != 0);
    }
    return s;
  }

  int players() const { return m_; }
  int packets() const { return n_; }
  bool wants(int i, int j) const { return cells_[idx(i, j)] != 0; }
  bool has(int i, int j) const { return cells_[idx(i, j)] == 0; }
  void set_wants(int i, int j, bool w) { cells_[idx(i, j)] = w ? 1 : 0; }

  int wants_count(int i) const {
    int c = 0;
    for (int j = 0; j < n_; ++j) c += cells_[idx(i, j)];
    return c;
  }
  int has_count(int i) const { return n_ - wants_count(i); }

  bool all_received() const {
    return std::all_of(cells_.begin(), cells_.end(), [](auto c) { return c == 0; });
  }

  bool column_covered(int j) const {
    for (int i = 0; i < m_; ++i)
      if (has(i, j)) return true;
    return false;
  }

  bool operator==(const StateMatrix&) const = default;

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  int m_ = 0;
  int n_ = 0;
  std::vector<std::uint8_t> cells_;
};

// p(i, j): loss probability on the link from player j to player i.
class ErasureMatrix {
 public:
  ErasureMatrix() = default;
  explicit ErasureMatrix(int players, double fill = 0.0)
      : m_(players), p_(static_cast<std::size_t>(players) * players, fill) {
    if (players < 1) throw std::invalid_argument("ErasureMatrix: no players");
    for (int i = 0; i < m_; ++i) p_[idx(i, i)] = 0.0;
    validate();
  }

  static ErasureMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    ErasureMatrix e;
    e.m_ = static_cast<int>(rows.size());
    if (e.m_ < 1) throw std::invalid_argument("ErasureMatrix: no players");
    e.p_.assign(static_cast<std::size_t>(e.m_) * e.m_, 0.0);
    for (int i = 0; i < e.m_; ++i) {
      if (static_cast<int>(rows[i].size()) != e.m_)
        throw std::invalid_argument("ErasureMatrix: not square");
      for (int j = 0; j < e.m_; ++j) e.p_[e.idx(i, j)] = rows[i][j];
    }
    e.validate();
    return e;
  }

  int players() const { return m_; }
  double operator()(int i, int j) const { return p_[idx(i, j)]; }
  void set(int i, int j, double v) {
    if (!(v >= 0.0 && v < 1.0))
      throw std::invalid_argument("ErasureMatrix: probability outside [0,1)");
    if (i == j && v != 0.0)
      throw std::invalid_argument("ErasureMatrix: self link must be lossless");
    p_[idx(i, j)] = v;
  }

  // ||P_i||_1 / M, diagonal included (it is zero).
  double row_average(int i) const {
    double s = 0.0;
    for (int j = 0; j < m_; ++j) s += p_[idx(i, j)];
    return s / m_;
  }
  std::vector<double> row_averages() const {
    std::vector<double> out(m_);
    for (int i = 0; i < m_; ++i) out[i] = row_average(i);
    return out;
  }

  void validate() const {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        double v = p_[idx(i, j)];
        if (!(v >= 0.0 && v < 1.0))
          throw std::invalid_argument("ErasureMatrix: probability outside [0,1)");
        if (i == j && v != 0.0)
          throw std::invalid_argument("ErasureMatrix: self link must be lossless");
      }
  }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * m_ + j;
  }
  int m_ = 0;
  std::vector<double> p_;
};

struct GameConfig {
  int M = 1;
  int N = 1;
  ErasureMatrix P{1};
  std::vector<double> Q{0.0};
  int V = 2;
  double epsilon = 0.5;
  int max_stages = 50;
  std::uint64_t seed = 0;

  void validate() const {
    if (M < 1) throw std::invalid_argument("GameConfig: M must be positive");
    if (N < 1) throw std::invalid_argument("GameConfig: N must be positive");
    if (P.players() != M) throw std::invalid_argument("GameConfig: P is not M x M");
    P.validate();
    if (static_cast<int>(Q.size()) != M)
      throw std::invalid_argument("GameConfig: Q must have M entries");
    for (double q : Q)
      if (!(q >= 0.0 && q < 1.0))
        throw std::invalid_argument("GameConfig: q_i outside [0,1)");
    if (V < 0) throw std::invalid_argument("GameConfig: V must be non-negative");
    if (!(epsilon > 0.0)) throw std::invalid_argument("GameConfig: epsilon must be positive");
    if (max_stages < 1) throw std::invalid_argument("GameConfig: max_stages must be positive");
  }
};

// delivered(i, j): link from j to i delivered this stage.
class ChannelState {
 public:
  ChannelState() = default;
  explicit ChannelState(int players)
      : m_(players), x_(static_cast<std::size_t>(players) * players, 1) {}

  int players() const { return m_; }
  bool delivered(int i, int j) const { return x_[static_cast<std::size_t>(i) * m_ + j] != 0; }
  void set(int i, int j, bool v) { x_[static_cast<std::size_t>(i) * m_ + j] = v ? 1 : 0; }

  // Links out of sender j, as the vector indexed by receiver.
  std::vector<double> from_sender(int j) const {
    std::vector<double> out(m_);
    for (int i = 0; i < m_; ++i) out[i] = delivered(i, j) ? 1.0 : 0.0;
    return out;
  }

  bool operator==(const ChannelState&) const = default;

 private:
  int m_ = 0;
  std::vector<std::uint8_t> x_;
};

struct ActionProfile {
  BitVector transmit;

  ActionProfile() = default;
  explicit ActionProfile(int players) : transmit(players, 0) {}
  explicit ActionProfile(BitVector bits) : transmit(std::move(bits)) {}

  static ActionProfile solo(int players, int j) {
    ActionProfile a(players);
    a.transmit[j] = 1;
    return a;
  }
  static ActionProfile from_mask(int players, std::uint32_t mask) {
    // player 0 is the most significant position of the lexicographic order,
    // but the mask is a plain membership set.
    ActionProfile a(players);
    for (int i = 0; i < players; ++i) a.transmit[i] = (mask >> i) & 1U;
    return a;
  }

  int players() const { return static_cast<int>(transmit.size()); }
  int count() const {
    int c = 0;
    for (auto b : transmit) c += b;
    return c;
  }
  std::optional<int> sole_transmitter() const {
    if (count() != 1) return std::nullopt;
    for (int i = 0; i < players(); ++i)
      if (transmit[i]) return i;
    return std::nullopt;
  }
  std::string str() const {
    std::string s;
    for (auto b : transmit) s.push_back(b ? '1' : '0');
    return s;
  }

  auto operator<=>(const ActionProfile&) const = default;
  bool operator==(const ActionProfile&) const = default;
};

inline ChannelState sample_channel_state(const ErasureMatrix& P, Engine& rng) {
  const int m = P.players();
  ChannelState w(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) w.set(i, j, bernoulli(rng, 1.0 - P(i, j)));
  return w;
}

struct InitialPhaseOutcome {
  StateMatrix state;
  long broadcasts = 0;
};

// Base station sends every packet once; packets nobody received are sent
// again, one at a time, until someone holds them.
inline InitialPhaseOutcome run_initial_phase(const GameConfig& config, Engine& rng) {
  config.validate();
  InitialPhaseOutcome out{StateMatrix(config.M, config.N, true), 0};
  for (int j = 0; j < config.N; ++j) {
    bool covered = false;
    while (!covered) {
      ++out.broadcasts;
      for (int i = 0; i < config.M; ++i) {
        if (bernoulli(rng, 1.0 - config.Q[i])) {
          out.state.set_wants(i, j, false);
          covered = true;
        }
      }
    }
  }
  return out;
}

inline StateMatrix initial_phase(const GameConfig& config, Engine& rng) {
  return run_initial_phase(config, rng).state;
}

inline void check_packets(const PacketCombination& kappa, const StateMatrix& S) {
  if (static_cast<int>(kappa.size()) != S.packets())
    throw std::invalid_argument("combination length differs from N");
}

inline BitVector targeted_set(const PacketCombination& kappa, const StateMatrix& S) {
  check_packets(kappa, S);
  BitVector tau(S.players(), 0);
  for (int i = 0; i < S.players(); ++i) {
    int hits = 0;
    for (int j = 0; j < S.packets(); ++j) hits += (kappa[j] && S.wants(i, j)) ? 1 : 0;
    tau[i] = hits == 1 ? 1 : 0;
  }
  return tau;
}

inline BitVector wants_indicator(const StateMatrix& S) {
  BitVector w(S.players(), 0);
  for (int i = 0; i < S.players(); ++i) w[i] = S.wants_count(i) > 0 ? 1 : 0;
  return w;
}

// delivery[i] is X_i,sender in realized mode or 1 - p_i,sender in expected
// mode; the result is delivery ∘ (1 - τ) ∘ M^w.
inline std::vector<double> delay_increment(std::span<const double> delivery,
                                           const PacketCombination& kappa,
                                           const StateMatrix& S) {
  if (static_cast<int>(delivery.size()) != S.players())
    throw std::invalid_argument("delivery vector length differs from M");
  const BitVector tau = targeted_set(kappa, S);
  const BitVector mw = wants_indicator(S);
  std::vector<double> out(S.players(), 0.0);
  for (int i = 0; i < S.players(); ++i)
    out[i] = (mw[i] && !tau[i]) ? delivery[i] : 0.0;
  return out;
}

inline BitVector delay_increment(const ChannelState& omega, int sender,
                                 const PacketCombination& kappa, const StateMatrix& S) {
  const auto d = delay_increment(omega.from_sender(sender), kappa, S);
  BitVector out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i] != 0.0 ? 1 : 0;
  return out;
}

inline DelayVector update_cumulative_delay(const DelayVector& prev, const ActionProfile& a,
                                           const ChannelState& omega,
                                           const std::vector<PacketCombination>& combos,
                                           const StateMatrix& S) {
  const int m = S.players();
  if (static_cast<int>(prev.size()) != m || a.players() != m || omega.players() != m)
    throw std::invalid_argument("update_cumulative_delay: inconsistent lengths");
  DelayVector next = prev;
  if (auto j = a.sole_transmitter()) {
    const BitVector inc = delay_increment(omega, *j, combos.at(*j), S);
    for (int i = 0; i < m; ++i) next[i] += inc[i];
  } else {
    const BitVector mw = wants_indicator(S);
    for (int i = 0; i < m; ++i) next[i] += mw[i];
  }
  return next;
}

template <class Real>
std::vector<double> completion_time_estimate(std::span<const Real> W, std::span<const Real> D,
                                             std::span<const double> pbar) {
  if (W.size() != D.size() || W.size() != pbar.size())
    throw std::invalid_argument("completion_time_estimate: inconsistent lengths");
  std::vector<double> out(W.size());
  for (std::size_t i = 0; i < W.size(); ++i) {
    if (!(pbar[i] < 1.0)) throw std::invalid_argument("completion_time_estimate: p̄ >= 1");
    out[i] = (static_cast<double>(W[i]) + static_cast<double>(D[i]) - pbar[i]) / (1.0 - pbar[i]);
  }
  return out;
}

inline std::vector<double> completion_time_estimate(const std::vector<double>& W,
                                                    const std::vector<double>& D,
                                                    const std::vector<double>& pbar) {
  return completion_time_estimate<double>(std::span<const double>(W), std::span<const double>(D),
                                          std::span<const double>(pbar));
}

}  // namespace idnc
