#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "idnc/equilibrium.hpp"
#include "idnc/games.hpp"

namespace idnc {

inline void check_rl_inputs(double lambda, double s) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("learning rate outside (0,1)");
  if (!(s >= -1.0 && s <= 1.0)) throw std::invalid_argument("stimulus outside [-1,1]");
}

// Bush-Mosteller on the probability x of the action that was taken.
inline double bm_update(double x, double lambda, double s) {
  check_rl_inputs(lambda, s);
  if (s >= 0.0) return x + lambda * s * (1.0 - x);
  return x + lambda * s * x;
}

// The same rule expressed on the transmit probability. When silence was
// taken the update of y = 1 - x is rewritten in terms of x so the result is
// bit-identical with the lossy-feedback update at zero uncertainty.
inline double bm_transmit_update(double x, double lambda, double s, bool transmitted) {
  check_rl_inputs(lambda, s);
  if (transmitted) return bm_update(x, lambda, s);
  if (s >= 0.0) return x - lambda * s * x;
  return x - lambda * s * (1.0 - x);
}

inline double stimulus(double payoff, double satisfaction, double payoff_bound) {
  if (!(payoff_bound > 0.0)) return 0.0;
  return std::clamp((payoff - satisfaction) / payoff_bound, -1.0, 1.0);
}

// max |φ - M| over the player's two actions, others held fixed.
inline double stimulus_bound(double payoff_a, double payoff_b, double satisfaction) {
  return std::max(std::abs(payoff_a - satisfaction), std::abs(payoff_b - satisfaction));
}

struct MixedAction {
  double x = 0.0;       // transmit probability
  double lambda = 0.05;
};

inline constexpr double kMinLearningRate = 0.05;
inline constexpr double kMaxLearningRate = 0.95;

inline MixedAction initial_mixed_action(const StateMatrix& S, int i) {
  const double share = static_cast<double>(S.has_count(i)) / S.packets();
  return {share, std::clamp(share, kMinLearningRate, kMaxLearningRate)};
}

// One Bernoulli draw per player, in index order; backed-off players draw
// too (and are then silenced) so the stream position never depends on
// back-off.
inline ActionProfile rl_stage(const std::vector<MixedAction>& x, const std::vector<int>& backoff,
                              Engine& rng) {
  const int m = static_cast<int>(x.size());
  if (static_cast<int>(backoff.size()) != m) throw std::invalid_argument("rl_stage: bad back-off");
  ActionProfile a(m);
  for (int i = 0; i < m; ++i) {
    const bool draw = bernoulli(rng, x[i].x);
    a.transmit[i] = (draw && backoff[i] == 0) ? 1 : 0;
  }
  return a;
}

// Sequential play in the given order where each player anticipates how
// the players after it will respond (backward induction over the number of
// transmitters so far). Ties go to silence.
inline ActionProfile best_response_stage(GameKind kind, const GameHistory& h,
                                         std::vector<int> order = {}) {
  const int m = h.players();
  if (order.empty()) {
    order.resize(m);
    std::iota(order.begin(), order.end(), 0);
  }
  if (static_cast<int>(order.size()) != m) throw std::invalid_argument("best_response_stage: bad order");
  const bool restricted = kind.variant == Variant::regularized;

  struct Outcome {
    double cost;
    double sum;
  };
  auto better = [](const Outcome& a, const Outcome& b) {
    return a.cost < b.cost || (a.cost == b.cost && a.sum < b.sum);
  };
  // Terminal outcomes: state (k, j) with j the sole transmitter when k == 1.
  const auto c = stage_costs(kind, h);
  std::vector<Outcome> multi(m + 1);
  for (int k = 2; k <= m; ++k) {
    ActionProfile a(m);
    for (int i = 0; i < k; ++i) a.transmit[i] = 1;
    multi[k] = {stage_cost(kind, a, h), c.silent_sum};
  }
  auto terminal = [&](int k, int j) -> Outcome {
    if (k == 0) return {c.silent, c.silent_sum};
    if (k == 1) return {c.solo[j], c.solo_sum[j]};
    return multi[k];
  };

  // value[s] for states after position p; state index: 0 = none,
  // 1 + j = sole j, 1 + m + k = k transmitters (k >= 2).
  const int states = 1 + m + m + 1;
  auto sid = [&](int k, int j) { return k == 0 ? 0 : k == 1 ? 1 + j : 1 + m + k; };
  std::vector<std::vector<Outcome>> value(m + 1, std::vector<Outcome>(states));
  std::vector<std::vector<std::uint8_t>> choice(m, std::vector<std::uint8_t>(states, 0));
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j < (k == 1 ? m : 1); ++j) value[m][sid(k, j)] = terminal(k, j);

  for (int p = m - 1; p >= 0; --p) {
    const int player = order[p];
    const bool may = !restricted || h.can_transmit(player);
    for (int k = 0; k <= p; ++k) {
      for (int j = 0; j < (k == 1 ? m : 1); ++j) {
        const int s = sid(k, j);
        Outcome stay = value[p + 1][s];
        if (may) {
          const int nk = k + 1;
          const int nj = k == 0 ? player : 0;
          const Outcome go = value[p + 1][sid(nk, nj)];
          if (better(go, stay)) {
            value[p][s] = go;
            choice[p][s] = 1;
            continue;
          }
        }
        value[p][s] = stay;
      }
    }
  }

  ActionProfile a(m);
  int k = 0, j = 0;
  for (int p = 0; p < m; ++p) {
    if (choice[p][sid(k, j)]) {
      a.transmit[order[p]] = 1;
      j = k == 0 ? order[p] : 0;
      ++k;
    }
  }
  return a;
}

}  // namespace idnc
