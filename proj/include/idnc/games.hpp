#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "idnc/core_model.hpp"

namespace idnc {

enum class Variant { plain, regularized };

// Games 1-3 are the plain CT/MDD/SDD games, 4-6 their regularized versions.
struct GameKind {
  Metric metric = Metric::sum_delay;
  Variant variant = Variant::plain;

  int number() const {
    const int base = metric == Metric::completion_time ? 1 : metric == Metric::max_delay ? 2 : 3;
    return variant == Variant::plain ? base : base + 3;
  }
  static GameKind from_number(int g) {
    if (g < 1 || g > 6) throw std::invalid_argument("game number must be 1..6");
    const int b = (g - 1) % 3;
    const Metric m = b == 0 ? Metric::completion_time : b == 1 ? Metric::max_delay : Metric::sum_delay;
    return {m, g <= 3 ? Variant::plain : Variant::regularized};
  }
  std::string name() const { return "game" + std::to_string(number()); }
  bool operator==(const GameKind&) const = default;
};

inline const GameKind kAllGames[6] = {GameKind::from_number(1), GameKind::from_number(2),
                                      GameKind::from_number(3), GameKind::from_number(4),
                                      GameKind::from_number(5), GameKind::from_number(6)};

enum class Mode { expected, realized };
enum class Action { silent, transmit };

inline BitVector collision_indicator(const ActionProfile& a) {
  BitVector c(a.players(), 0);
  if (a.count() > 1)
    for (int i = 0; i < a.players(); ++i) c[i] = a.transmit[i];
  return c;
}

// Last V collision indicators, oldest first.
class CollisionHistory {
 public:
  CollisionHistory() = default;
  CollisionHistory(int players, int window) : m_(players), v_(window) {
    if (players < 1 || window < 0) throw std::invalid_argument("CollisionHistory: bad shape");
  }

  int players() const { return m_; }
  int window() const { return v_; }
  const std::deque<BitVector>& columns() const { return cols_; }

  std::vector<int> backoff() const {
    std::vector<int> b(m_, 0);
    for (const auto& c : cols_)
      for (int i = 0; i < m_; ++i) b[i] += c[i];
    return b;
  }

 private:
  friend CollisionHistory update_collision_history(CollisionHistory C, const BitVector& c);
  int m_ = 1;
  int v_ = 0;
  std::deque<BitVector> cols_;
};

inline CollisionHistory update_collision_history(CollisionHistory C, const BitVector& c) {
  if (static_cast<int>(c.size()) != C.m_)
    throw std::invalid_argument("update_collision_history: indicator length differs from M");
  if (C.v_ == 0) return C;
  C.cols_.push_back(c);
  while (static_cast<int>(C.cols_.size()) > C.v_) C.cols_.pop_front();
  return C;
}

inline std::vector<Action> allowed_actions(int player, const std::vector<int>& backoff) {
  if (backoff.at(player) > 0) return {Action::silent};
  return {Action::transmit, Action::silent};
}

// Everything a stage game's utility depends on: S(t), P, 𝔻(t-1), each
// player's combination κ^j and the back-off vector.
class GameHistory {
 public:
  GameHistory(StateMatrix S, ErasureMatrix P, DelayVector delay,
              std::vector<PacketCombination> combos, std::vector<int> backoff = {})
      : S_(std::move(S)), P_(std::move(P)), d_(std::move(delay)), combos_(std::move(combos)),
        backoff_(std::move(backoff)) {
    const int m = S_.players();
    if (backoff_.empty()) backoff_.assign(m, 0);
    if (P_.players() != m || static_cast<int>(d_.size()) != m ||
        static_cast<int>(combos_.size()) != m || static_cast<int>(backoff_.size()) != m)
      throw std::invalid_argument("GameHistory: inconsistent lengths");
    wanting_ = wants_indicator(S_);
    W_.resize(m);
    for (int i = 0; i < m; ++i) W_[i] = S_.wants_count(i);
    pbar_ = P_.row_averages();
    tau_.reserve(m);
    for (int j = 0; j < m; ++j) tau_.push_back(targeted_set(combos_[j], S_));
  }

  int players() const { return S_.players(); }
  const StateMatrix& state() const { return S_; }
  const ErasureMatrix& erasure() const { return P_; }
  const DelayVector& delay() const { return d_; }
  const std::vector<PacketCombination>& combinations() const { return combos_; }
  const std::vector<int>& backoff() const { return backoff_; }
  const BitVector& wanting() const { return wanting_; }
  const std::vector<double>& wants_sizes() const { return W_; }
  const std::vector<double>& pbar() const { return pbar_; }
  const BitVector& targeted_by(int j) const { return tau_[j]; }
  bool can_transmit(int i) const { return backoff_[i] == 0; }

  // Δ𝔻 for profile a: M^w unless exactly one player transmits.
  std::vector<double> increment(const ActionProfile& a, Mode mode,
                                const ChannelState* omega = nullptr) const {
    const int m = players();
    if (a.players() != m) throw std::invalid_argument("utility: profile length differs from M");
    std::vector<double> inc(m);
    const auto j = a.sole_transmitter();
    if (!j) {
      for (int i = 0; i < m; ++i) inc[i] = wanting_[i];
      return inc;
    }
    if (mode == Mode::realized && !omega)
      throw std::invalid_argument("utility: realized mode needs a channel state");
    const BitVector& tau = tau_[*j];
    for (int i = 0; i < m; ++i) {
      const double delivery = mode == Mode::expected ? 1.0 - P_(i, *j)
                                                     : (omega->delivered(i, *j) ? 1.0 : 0.0);
      inc[i] = (wanting_[i] && !tau[i]) ? delivery : 0.0;
    }
    return inc;
  }

 private:
  StateMatrix S_;
  ErasureMatrix P_;
  DelayVector d_;
  std::vector<PacketCombination> combos_;
  std::vector<int> backoff_;
  BitVector wanting_;
  std::vector<double> W_;
  std::vector<double> pbar_;
  std::vector<BitVector> tau_;
};

// Metric value after adding inc to 𝔻(t-1).
inline double metric_cost(Metric metric, const GameHistory& h, const std::vector<double>& inc) {
  const int m = h.players();
  const auto& d = h.delay();
  switch (metric) {
    case Metric::completion_time: {
      double top = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double p = h.pbar()[i];
        top = std::max(top, (h.wants_sizes()[i] + static_cast<double>(d[i]) + inc[i] - p) / (1.0 - p));
      }
      return top;
    }
    case Metric::max_delay: {
      double top = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) top = std::max(top, static_cast<double>(d[i]) + inc[i]);
      return top;
    }
    case Metric::sum_delay: {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += static_cast<double>(d[i]) + inc[i];
      return s;
    }
  }
  return 0.0;
}

inline double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// -utility. Same for every player.
inline double stage_cost(GameKind kind, const ActionProfile& a, const GameHistory& h,
                         Mode mode = Mode::expected, const ChannelState* omega = nullptr) {
  const auto inc = h.increment(a, mode, omega);
  double cost = metric_cost(kind.metric, h, inc);
  if (kind.variant == Variant::regularized) {
    cost += a.count();
    if (kind.metric != Metric::sum_delay) cost += sum_of(inc) / h.players();
  }
  return cost;
}

inline double utility(GameKind kind, const ActionProfile& a, const GameHistory& h,
                      Mode mode = Mode::expected, const ChannelState* omega = nullptr) {
  return -stage_cost(kind, a, h, mode, omega);
}

// Common-interest game: player index does not change the value.
inline double utility(GameKind kind, int player, const ActionProfile& a, const GameHistory& h,
                      Mode mode = Mode::expected, const ChannelState* omega = nullptr) {
  if (player < 0 || player >= h.players()) throw std::invalid_argument("utility: bad player");
  return utility(kind, a, h, mode, omega);
}

// φ'(t-1): cost of the history before this stage's increment.
inline double previous_cost(Metric metric, const GameHistory& h) {
  return metric_cost(metric, h, std::vector<double>(h.players(), 0.0));
}

}  // namespace idnc
