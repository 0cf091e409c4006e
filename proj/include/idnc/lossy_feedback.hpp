#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "idnc/coding.hpp"
#include "idnc/games.hpp"
#include "idnc/learning.hpp"

namespace idnc {

enum class Entry : std::uint8_t { has = 0, wants = 1, uncertain = 2 };

// P(received | no ACK heard) for one targeted transmission.
inline double uncertainty_posterior(double p_forward, double p_feedback) {
  const double den = p_forward + (1.0 - p_forward) * p_feedback;
  if (den == 0.0) return 0.0;
  return (1.0 - p_forward) * p_feedback / den;
}

// Same evidence applied to an entry already believed received with
// probability prior.
inline double chained_posterior(double prior, double p_forward, double p_feedback) {
  const double got = prior + (1.0 - prior) * (1.0 - p_forward) * p_feedback;
  const double den = prior + (1.0 - prior) * (p_forward + (1.0 - p_forward) * p_feedback);
  if (den == 0.0) return 0.0;
  return got / den;
}

// Observer k's view of the state matrix. observer == M denotes the base
// station.
class LocalFeedbackMatrix {
 public:
  LocalFeedbackMatrix() = default;
  LocalFeedbackMatrix(int observer, const StateMatrix& S)
      : observer_(observer), m_(S.players()), n_(S.packets()),
        e_(static_cast<std::size_t>(m_) * n_), post_(e_.size(), 0.0) {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) e_[idx(i, j)] = S.wants(i, j) ? Entry::wants : Entry::has;
  }

  int observer() const { return observer_; }
  int players() const { return m_; }
  int packets() const { return n_; }
  Entry at(int i, int j) const { return e_[idx(i, j)]; }
  double posterior(int i, int j) const { return post_[idx(i, j)]; }

  void set(int i, int j, Entry e, double post = 0.0) {
    e_[idx(i, j)] = e;
    post_[idx(i, j)] = e == Entry::uncertain ? post : 0.0;
  }

  void sync_row(int i, const StateMatrix& S) {
    for (int j = 0; j < n_; ++j) set(i, j, S.wants(i, j) ? Entry::wants : Entry::has);
  }

  bool apparently_wants(int i, int j) const { return e_[idx(i, j)] != Entry::has; }

  int uncertain_count() const {
    return static_cast<int>(std::count(e_.begin(), e_.end(), Entry::uncertain));
  }

  WantView view() const {
    WantView v(m_, n_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) {
        const Entry e = at(i, j);
        v.set(i, j, e == Entry::has ? 0.0 : e == Entry::wants ? 1.0 : 1.0 - posterior(i, j));
      }
    return v;
  }

  std::optional<StateMatrix> certain_state() const {
    if (uncertain_count() > 0) return std::nullopt;
    StateMatrix S(m_, n_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) S.set_wants(i, j, at(i, j) == Entry::wants);
    return S;
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }
  int observer_ = 0;
  int m_ = 0;
  int n_ = 0;
  std::vector<Entry> e_;
  std::vector<double> post_;
};

struct Transmission {
  int sender = -1;  // -1: base station
  PacketCombination kappa;
};

struct AckEvent {
  int player;
  int packet;
  bool heard;
};

// forward_loss[i]: loss from the sender to i. feedback_loss[i]: loss of
// i's ACK on its way to the observer.
inline LocalFeedbackMatrix update_local_feedback(LocalFeedbackMatrix F, const Transmission& tx,
                                                 const std::vector<AckEvent>& acks,
                                                 const std::vector<double>& forward_loss,
                                                 const std::vector<double>& feedback_loss) {
  const int m = F.players();
  std::vector<std::uint8_t> heard_from(m, 0);
  for (const auto& ack : acks)
    if (ack.heard) {
      F.set(ack.player, ack.packet, Entry::has);
      heard_from[ack.player] = 1;
    }
  for (int i = 0; i < m; ++i) {
    if (i == tx.sender || i == F.observer() || heard_from[i]) continue;
    int hits = 0, target = -1;
    for (int j = 0; j < F.packets(); ++j)
      if (tx.kappa[j] && F.apparently_wants(i, j)) {
        ++hits;
        target = j;
      }
    if (hits != 1) continue;
    const double prior = F.at(i, target) == Entry::uncertain ? F.posterior(i, target) : 0.0;
    const double post = chained_posterior(prior, forward_loss[i], feedback_loss[i]);
    if (post > 0.0) F.set(i, target, Entry::uncertain, post);
  }
  return F;
}

// Expected cost of profile a in the observer's view. Rows are independent;
// each uncertain entry is still wanted with probability 1 - posterior.
inline double estimated_cost(GameKind kind, const ActionProfile& a, const LocalFeedbackMatrix& F,
                             const ErasureMatrix& P, const DelayVector& d,
                             const std::vector<PacketCombination>& combos) {
  if (auto S = F.certain_state()) return stage_cost(kind, a, GameHistory(*S, P, d, combos));

  const int m = F.players();
  const int n = F.packets();
  const auto sole = a.sole_transmitter();
  const auto pbar = P.row_averages();

  // Per row: distribution over (metric value for this row, increment).
  struct Atom {
    double value;
    double inc;
    double prob;
  };
  std::vector<std::vector<Atom>> rows(m);
  for (int i = 0; i < m; ++i) {
    int fixed_in = 0, fixed_out = 0;
    std::vector<double> pin, pout;
    for (int j = 0; j < n; ++j) {
      const bool in = sole && combos[*sole][j];
      const Entry e = F.at(i, j);
      if (e == Entry::wants) (in ? fixed_in : fixed_out) += 1;
      if (e == Entry::uncertain) (in ? pin : pout).push_back(1.0 - F.posterior(i, j));
    }
    auto poisson_binomial = [](const std::vector<double>& ps) {
      std::vector<double> dist{1.0};
      for (double p : ps) {
        std::vector<double> next(dist.size() + 1, 0.0);
        for (std::size_t k = 0; k < dist.size(); ++k) {
          next[k] += dist[k] * (1.0 - p);
          next[k + 1] += dist[k] * p;
        }
        dist = std::move(next);
      }
      return dist;
    };
    const auto A = poisson_binomial(pin);
    const auto B = poisson_binomial(pout);
    const double delivery = sole ? 1.0 - P(i, *sole) : 1.0;
    for (std::size_t x = 0; x < A.size(); ++x)
      for (std::size_t y = 0; y < B.size(); ++y) {
        const double pr = A[x] * B[y];
        if (pr == 0.0) continue;
        const int w = fixed_in + fixed_out + static_cast<int>(x + y);
        const int hits = fixed_in + static_cast<int>(x);
        const double wanting = w > 0 ? 1.0 : 0.0;
        double inc = wanting;
        if (sole) inc = (wanting > 0.0 && hits != 1) ? delivery : 0.0;
        const double di = static_cast<double>(d[i]);
        double value = di + inc;
        if (kind.metric == Metric::completion_time) value = (w + di + inc - pbar[i]) / (1.0 - pbar[i]);
        rows[i].push_back({value, inc, pr});
      }
  }

  double expected_inc = 0.0;
  for (const auto& r : rows)
    for (const auto& at : r) expected_inc += at.prob * at.inc;

  double cost = 0.0;
  if (kind.metric == Metric::sum_delay) {
    for (int i = 0; i < m; ++i)
      for (const auto& at : rows[i]) cost += at.prob * at.value;
  } else {
    // E[max] of independent discrete rows via the product of CDFs.
    std::vector<double> support;
    for (const auto& r : rows)
      for (const auto& at : r) support.push_back(at.value);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    double prev_cdf = 0.0;
    for (double v : support) {
      double cdf = 1.0;
      for (const auto& r : rows) {
        double c = 0.0;
        for (const auto& at : r)
          if (at.value <= v) c += at.prob;
        cdf *= c;
      }
      cost += v * (cdf - prev_cdf);
      prev_cdf = cdf;
    }
  }
  if (kind.variant == Variant::regularized) {
    cost += a.count();
    if (kind.metric != Metric::sum_delay) cost += expected_inc / m;
  }
  return cost;
}

inline double estimated_payoff(GameKind kind, const ActionProfile& a, const LocalFeedbackMatrix& F,
                               const ErasureMatrix& P, const DelayVector& d,
                               const std::vector<PacketCombination>& combos) {
  return -estimated_cost(kind, a, F, P, d, combos);
}

// x' = x + λ s (1{taken} - x) for s >= 0. For s < 0 the literal rule can
// leave [0,1], so the Bush-Mosteller contraction is used instead.
inline double lossy_rl_update(double x, double lambda, double s, bool acted) {
  check_rl_inputs(lambda, s);
  if (s >= 0.0) return x + lambda * s * ((acted ? 1.0 : 0.0) - x);
  return bm_transmit_update(x, lambda, s, acted);
}

}  // namespace idnc
