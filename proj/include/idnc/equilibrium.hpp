#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "idnc/games.hpp"

namespace idnc {

inline constexpr int kMaxEnumeratedPlayers = 16;

// Expected-mode costs of the profiles the closed forms are built from.
struct StageCosts {
  double base = 0.0;    // φ'(t-1)
  double silent = 0.0;  // also the cost of any collision in the plain games
  std::vector<double> solo;
  double silent_sum = 0.0;  // Σ of the expected increment, used as tie-break
  std::vector<double> solo_sum;
};

inline StageCosts stage_costs(GameKind kind, const GameHistory& h) {
  const int m = h.players();
  StageCosts c;
  c.base = previous_cost(kind.metric, h);
  const ActionProfile none(m);
  c.silent = stage_cost(kind, none, h);
  c.silent_sum = sum_of(h.increment(none, Mode::expected));
  c.solo.resize(m);
  c.solo_sum.resize(m);
  for (int j = 0; j < m; ++j) {
    const auto a = ActionProfile::solo(m, j);
    c.solo[j] = stage_cost(kind, a, h);
    c.solo_sum[j] = sum_of(h.increment(a, Mode::expected));
  }
  return c;
}

inline std::vector<int> members(const BitVector& b) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(b.size()); ++i)
    if (b[i]) out.push_back(i);
  return out;
}

// Players that can raise the cost: CT players whose next delay would lift
// the max estimate, MDD wanting players at the max delay.
inline BitVector q_set(Metric metric, const GameHistory& h) {
  const int m = h.players();
  BitVector q(m, 0);
  const auto& d = h.delay();
  if (metric == Metric::sum_delay)
    throw std::invalid_argument("q_set: the sum-delay games have no critical set");
  if (metric == Metric::max_delay) {
    const long top = *std::max_element(d.begin(), d.end());
    for (int i = 0; i < m; ++i) q[i] = h.wanting()[i] && d[i] == top;
    return q;
  }
  const double top = previous_cost(Metric::completion_time, h);
  for (int i = 0; i < m; ++i) {
    const double p = h.pbar()[i];
    const double C = (h.wants_sizes()[i] + static_cast<double>(d[i]) - p) / (1.0 - p);
    q[i] = h.wanting()[i] && C + 1.0 / (1.0 - p) > top;
  }
  return q;
}

// Senders whose expected solo transmission strictly lowers the plain-game
// cost below silence (Y_j < Y_0).
inline BitVector z_set(Metric metric, const GameHistory& h) {
  const auto c = stage_costs({metric, Variant::plain}, h);
  BitVector z(h.players(), 0);
  for (int j = 0; j < h.players(); ++j) z[j] = c.solo[j] < c.silent;
  return z;
}

class NashSet {
 public:
  NashSet(GameKind kind, const GameHistory& h) : kind_(kind), m_(h.players()) {
    const auto c = stage_costs(kind, h);
    z_.assign(m_, 0);
    admissible_.assign(m_, 0);
    bool improving = false;
    for (int j = 0; j < m_; ++j) {
      if (kind.variant == Variant::plain) {
        z_[j] = c.solo[j] < c.silent;
      } else {
        free_.push_back(h.can_transmit(j));
        if (!h.can_transmit(j)) continue;
        admissible_[j] = c.solo[j] <= c.silent;
        improving = improving || c.solo[j] < c.silent;
      }
    }
    if (kind.variant == Variant::plain) {
      z_empty_ = std::none_of(z_.begin(), z_.end(), [](auto b) { return b != 0; });
    } else {
      silent_member_ = !improving;
    }
  }

  bool contains(const ActionProfile& a) const {
    if (a.players() != m_) throw std::invalid_argument("NashSet: profile length differs from M");
    const int k = a.count();
    if (kind_.variant == Variant::plain) {
      if (z_empty_ || k == 1 || k > 2) return true;
      if (k == 0) return false;
      for (int i = 0; i < m_; ++i)
        if (a.transmit[i] && z_[i]) return false;
      return true;
    }
    for (int i = 0; i < m_; ++i)
      if (a.transmit[i] && !free_[i]) return false;
    if (k == 0) return silent_member_;
    if (k == 1) return admissible_[*a.sole_transmitter()] != 0;
    return false;
  }

  std::vector<ActionProfile> profiles() const {
    if (m_ > kMaxEnumeratedPlayers) throw std::invalid_argument("NashSet: too many players to list");
    std::vector<ActionProfile> out;
    for (std::uint32_t mask = 0; mask < (1U << m_); ++mask) {
      auto a = ActionProfile::from_mask(m_, mask);
      if (contains(a)) out.push_back(std::move(a));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Members with at most one transmitter; the only candidates for the PONE.
  std::vector<ActionProfile> sparse_members() const {
    std::vector<ActionProfile> out;
    if (contains(ActionProfile(m_))) out.emplace_back(m_);
    for (int j = 0; j < m_; ++j) {
      auto a = ActionProfile::solo(m_, j);
      if (contains(a)) out.push_back(std::move(a));
    }
    return out;
  }

  const BitVector& z() const { return z_; }
  const BitVector& admissible() const { return admissible_; }
  bool z_empty() const { return z_empty_; }
  bool silent_member() const { return kind_.variant == Variant::plain ? z_empty_ : silent_member_; }

 private:
  GameKind kind_;
  int m_;
  BitVector z_;
  BitVector admissible_;
  BitVector free_;
  bool z_empty_ = true;
  bool silent_member_ = false;
};

inline NashSet closed_form_ne(GameKind kind, const GameHistory& h) { return NashSet(kind, h); }

// Brute force over the profile lattice. Regularized games only range over
// the back-off restricted action space.
inline std::vector<ActionProfile> enumerate_ne(GameKind kind, const GameHistory& h) {
  const int m = h.players();
  if (m > kMaxEnumeratedPlayers) throw std::invalid_argument("enumerate_ne: too many players");
  const bool restricted = kind.variant == Variant::regularized;
  std::vector<ActionProfile> out;
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    const auto a = ActionProfile::from_mask(m, mask);
    bool feasible = true;
    for (int i = 0; i < m && feasible; ++i)
      if (restricted && a.transmit[i] && !h.can_transmit(i)) feasible = false;
    if (!feasible) continue;
    bool stable = true;
    for (int i = 0; i < m && stable; ++i) {
      if (!a.transmit[i] && restricted && !h.can_transmit(i)) continue;
      auto dev = a;
      dev.transmit[i] ^= 1;
      if (utility(kind, i, dev, h) > utility(kind, i, a, h)) stable = false;
    }
    if (stable) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double cost_ratio(double lo, double hi) {
  if (lo == hi || hi == 0.0) return 1.0;
  return lo / hi;
}

struct PoaResult {
  double closed_form = 1.0;
  std::optional<double> enumerated;
};

inline double poa_closed_form(GameKind kind, const GameHistory& h) {
  const int m = h.players();
  const NashSet ne(kind, h);
  const auto c = stage_costs(kind, h);
  const double y0 = c.silent - c.base;
  if (kind.variant == Variant::plain) {
    if (ne.z_empty()) return 1.0;
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -ymin;
    for (int j = 0; j < m; ++j) {
      ymin = std::min(ymin, c.solo[j] - c.base);
      ymax = std::max(ymax, c.solo[j] - c.base);
    }
    if (m >= 3) {
      if (c.base + y0 == 0.0) return 1.0;
      return 1.0 - (y0 - ymin) / (c.base + y0);
    }
    return cost_ratio(c.base + ymin, c.base + ymax);
  }
  if (ne.silent_member()) return 1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int j = 0; j < m; ++j)
    if (ne.admissible()[j]) {
      lo = std::min(lo, c.solo[j]);
      hi = std::max(hi, c.solo[j]);
    }
  return cost_ratio(lo, hi);
}

inline double poa_enumerated(GameKind kind, const GameHistory& h) {
  const auto ne = enumerate_ne(kind, h);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& a : ne) {
    const double c = stage_cost(kind, a, h);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return cost_ratio(lo, hi);
}

inline PoaResult poa(GameKind kind, const GameHistory& h) {
  PoaResult r{poa_closed_form(kind, h), std::nullopt};
  if (h.players() <= kMaxEnumeratedPlayers) r.enumerated = poa_enumerated(kind, h);
  return r;
}

// Ordering used to pick one equilibrium: lower cost, then lower expected
// sum-delay increment, then lexicographically smaller profile.
struct PoneKey {
  double cost;
  double sum_increment;
  ActionProfile profile;
  auto operator<=>(const PoneKey&) const = default;
};

inline PoneKey pone_key(GameKind kind, const ActionProfile& a, const GameHistory& h) {
  return {stage_cost(kind, a, h), sum_of(h.increment(a, Mode::expected)), a};
}

inline ActionProfile pone(GameKind kind, const GameHistory& h) {
  const auto cand = NashSet(kind, h).sparse_members();
  if (cand.empty()) throw std::logic_error("pone: empty equilibrium set");
  PoneKey best = pone_key(kind, cand.front(), h);
  for (std::size_t i = 1; i < cand.size(); ++i) best = std::min(best, pone_key(kind, cand[i], h));
  return best.profile;
}

inline ActionProfile pone_enumerated(GameKind kind, const GameHistory& h) {
  const auto ne = enumerate_ne(kind, h);
  if (ne.empty()) throw std::logic_error("pone: empty equilibrium set");
  PoneKey best = pone_key(kind, ne.front(), h);
  for (std::size_t i = 1; i < ne.size(); ++i) best = std::min(best, pone_key(kind, ne[i], h));
  return best.profile;
}

struct EquilibriumReport {
  GameKind kind;
  std::vector<ActionProfile> ne_set;
  ActionProfile pone;
  double poa = 1.0;
  std::vector<int> q_set;
  std::vector<int> z_set;
  double y0 = 0.0;
  std::vector<double> y;
};

inline EquilibriumReport analyze(GameKind kind, const GameHistory& h) {
  EquilibriumReport r;
  r.kind = kind;
  r.ne_set = NashSet(kind, h).profiles();
  r.pone = pone(kind, h);
  r.poa = poa_closed_form(kind, h);
  if (kind.metric != Metric::sum_delay) r.q_set = members(q_set(kind.metric, h));
  r.z_set = members(z_set(kind.metric, h));
  const auto c = stage_costs({kind.metric, Variant::plain}, h);
  r.y0 = c.silent - c.base;
  for (double s : c.solo) r.y.push_back(s - c.base);
  return r;
}

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i] + 1);
  return s.empty() ? "-" : s;
}

inline std::string serialize_report(const EquilibriumReport& r) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "game " << r.kind.number() << "\n";
  for (const auto& a : r.ne_set) os << "ne " << a.str() << "\n";
  os << "pone " << r.pone.str() << "\n";
  os << "poa " << r.poa << "\n";
  os << "q " << join_ints(r.q_set) << "\n";
  os << "z " << join_ints(r.z_set) << "\n";
  os << "y0 " << r.y0 << "\n";
  os << "y";
  for (double v : r.y) os << ' ' << v;
  os << "\n";
  return os.str();
}

}  // namespace idnc
