#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "idnc/coding.hpp"
#include "idnc/equilibrium.hpp"
#include "idnc/games.hpp"
#include "idnc/learning.hpp"
#include "idnc/lossy_feedback.hpp"

namespace idnc {

enum class Scheme { opt_pmp, opt_cde, lc_cde, ls_pmp, ls_cde };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::opt_pmp: return "OPT-PMP";
    case Scheme::opt_cde: return "OPT-CDE";
    case Scheme::lc_cde: return "LC-CDE";
    case Scheme::ls_pmp: return "LS-PMP";
    case Scheme::ls_cde: return "LS-CDE";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  for (auto x : {Scheme::opt_pmp, Scheme::opt_cde, Scheme::lc_cde, Scheme::ls_pmp, Scheme::ls_cde})
    if (s == scheme_name(x)) return x;
  throw std::invalid_argument("unknown scheme: " + s);
}

inline bool is_pmp(Scheme s) { return s == Scheme::opt_pmp || s == Scheme::ls_pmp; }

struct EpisodeOptions {
  Metric metric = Metric::sum_delay;
  Variant opt_variant = Variant::plain;  // game played by OPT-CDE
  int exhaustive_limit = 10;
  std::optional<double> feedback_loss;   // overrides the reciprocal ACK loss
  std::vector<int> order;                // best-response order, empty = ascending
  std::uint64_t key = 0;                 // episode identity inside the seed
};

struct StageRecord {
  int t = 0;
  ActionProfile a;
  int transmitter = -1;  // player index, -1 none/collision, -2 base station
  PacketCombination kappa;
  BitVector received;    // links from the transmitter that delivered
  DelayVector delay;     // after the stage
  double cost = 0.0;     // realized plain-game cost after the stage
  int collisions = 0;
  int uncertain = 0;
  int exhaustive = 0;    // combinations chosen by enumeration this stage
  int decoded = 0;
};

struct EpisodeTrace {
  std::vector<StageRecord> stages;
  int T = 0;
  bool cutoff = false;
  std::vector<int> completion;  // stage at which each player finished
  DelayVector final_delay;
  long collisions = 0;

  long max_delay() const {
    return final_delay.empty() ? 0 : *std::max_element(final_delay.begin(), final_delay.end());
  }
  long sum_delay() const {
    long s = 0;
    for (auto v : final_delay) s += v;
    return s;
  }
};

inline std::string bits(const BitVector& b) {
  std::string s;
  for (auto x : b) s.push_back(x ? '1' : '0');
  return s;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string serialize_stage(const StageRecord& r) {
  std::ostringstream os;
  os << "t=" << r.t << " a=" << r.a.str() << " tx=" << r.transmitter << " k=" << bits(r.kappa)
     << " rx=" << bits(r.received) << " d=";
  for (std::size_t i = 0; i < r.delay.size(); ++i) os << (i ? "," : "") << r.delay[i];
  os << " cost=" << format_real(r.cost) << " col=" << r.collisions << " unc=" << r.uncertain
     << " ex=" << r.exhaustive << " dec=" << r.decoded;
  return os.str();
}

inline std::string serialize_trace(const EpisodeTrace& tr) {
  std::string out;
  for (const auto& r : tr.stages) out += serialize_stage(r) + "\n";
  out += "T=" + std::to_string(tr.T) + " cutoff=" + (tr.cutoff ? "1" : "0") +
         " collisions=" + std::to_string(tr.collisions) + " completion=";
  for (std::size_t i = 0; i < tr.completion.size(); ++i)
    out += (i ? "," : "") + std::to_string(tr.completion[i]);
  out += "\n";
  return out;
}

namespace detail {

inline double realized_cost(Metric metric, const StateMatrix& S, const DelayVector& d,
                            const std::vector<double>& pbar) {
  double v = metric == Metric::sum_delay ? 0.0 : -std::numeric_limits<double>::infinity();
  for (int i = 0; i < S.players(); ++i) {
    const double di = static_cast<double>(d[i]);
    if (metric == Metric::sum_delay) v += di;
    else if (metric == Metric::max_delay) v = std::max(v, di);
    else v = std::max(v, (S.wants_count(i) + di - pbar[i]) / (1.0 - pbar[i]));
  }
  return v;
}

// φ - M_j = cost(silent) - cost(a) - ε: the satisfaction level sits ε above
// the payoff of staying silent.
struct StimulusInputs {
  double taken;
  double flipped;
};

inline double rl_stimulus(const StimulusInputs& c, double silent_cost, double epsilon) {
  const double phi = silent_cost - c.taken;
  const double phi_flip = silent_cost - c.flipped;
  return stimulus(phi, epsilon, stimulus_bound(phi, phi_flip, epsilon));
}

}  // namespace detail

// Evolves one frame from the given initial state until every player holds
// every packet or the stage cutoff is hit.
inline EpisodeTrace run_episode(Scheme scheme, const GameConfig& config, const StateMatrix& initial,
                                const EpisodeOptions& opt) {
  config.validate();
  const int m = config.M;
  const int n = config.N;
  if (initial.players() != m || initial.packets() != n)
    throw std::invalid_argument("run_episode: initial state does not match config");
  const ErasureMatrix& P = config.P;
  const auto pbar = P.row_averages();
  const bool pmp = is_pmp(scheme);
  const bool lossy = scheme == Scheme::ls_cde || scheme == Scheme::ls_pmp;
  const bool rl = scheme == Scheme::lc_cde || scheme == Scheme::ls_cde;
  const GameKind plain{opt.metric, Variant::plain};

  StateMatrix S = initial;
  DelayVector d(m, 0);
  CollisionHistory hist(m, config.V);
  std::vector<MixedAction> x(m);
  for (int i = 0; i < m; ++i) x[i] = initial_mixed_action(S, i);

  // Observers 0..M-1 are players; M is the base station.
  std::vector<LocalFeedbackMatrix> views;
  if (lossy) {
    if (pmp) views.emplace_back(m, S);
    else
      for (int k = 0; k < m; ++k) views.emplace_back(k, S);
  }
  auto feedback_loss = [&](int observer, int from) {
    if (opt.feedback_loss) return *opt.feedback_loss;
    return observer == m ? config.Q[from] : P(observer, from);
  };

  EpisodeTrace tr;
  tr.completion.assign(m, -1);
  for (int i = 0; i < m; ++i)
    if (S.wants_count(i) == 0) tr.completion[i] = 0;

  const auto& q = config.Q;
  for (int t = 1; t <= config.max_stages && !S.all_received(); ++t) {
    StageRecord rec;
    rec.t = t;
    const auto backoff = hist.backoff();
    std::vector<PacketCombination> combos(m, PacketCombination(n, 0));
    ActionProfile a(m);
    BitVector delivered(m, 0);
    PacketCombination kappa(n, 0);
    int sender = -1;

    if (pmp) {
      const Transmitter bs = base_station_transmitter(n, q);
      std::optional<StateMatrix> known = lossy ? views[0].certain_state() : std::optional<StateMatrix>(S);
      if (known) {
        const auto sel = select_combination(bs, CodingContext::make(*known, d, q), opt.metric,
                                            opt.exhaustive_limit);
        kappa = sel.kappa;
        rec.exhaustive = sel.exhaustive;
      } else {
        CodingContext ctx{views[0].view(), std::vector<double>(d.begin(), d.end()), q};
        kappa = greedy_combination(bs, ctx, opt.metric);
      }
      sender = -2;
      Engine rx = make_stream(config.seed, Stream::base_station, {opt.key, static_cast<std::uint64_t>(t)});
      for (int i = 0; i < m; ++i) delivered[i] = bernoulli(rx, 1.0 - q[i]);
    } else {
      for (int j = 0; j < m; ++j) {
        const Transmitter tx = player_transmitter(j, S, P);
        if (scheme == Scheme::opt_cde) {
          const auto sel = select_combination(tx, CodingContext::make(S, d, pbar), opt.metric,
                                              opt.exhaustive_limit);
          combos[j] = sel.kappa;
          rec.exhaustive += sel.exhaustive;
        } else if (scheme == Scheme::ls_cde) {
          if (auto known = views[j].certain_state()) {
            combos[j] = greedy_combination(tx, CodingContext::make(*known, d, pbar), opt.metric);
          } else {
            CodingContext ctx{views[j].view(), std::vector<double>(d.begin(), d.end()), pbar};
            combos[j] = greedy_combination(tx, ctx, opt.metric);
          }
        } else {
          combos[j] = greedy_combination(tx, CodingContext::make(S, d, pbar), opt.metric);
        }
      }
      if (scheme == Scheme::opt_cde) {
        a = best_response_stage({opt.metric, opt.opt_variant}, GameHistory(S, P, d, combos, backoff),
                                opt.order);
      } else {
        Engine act = make_stream(config.seed, Stream::actions, {opt.key, static_cast<std::uint64_t>(t)});
        a = rl_stage(x, backoff, act);
      }
      Engine ch = make_stream(config.seed, Stream::channel, {opt.key, static_cast<std::uint64_t>(t)});
      const ChannelState omega = sample_channel_state(P, ch);
      if (auto j = a.sole_transmitter()) {
        sender = *j;
        kappa = combos[*j];
        for (int i = 0; i < m; ++i) delivered[i] = omega.delivered(i, *j);
      }
    }

    // Reinforcement, evaluated on the stage-t state before it changes.
    if (rl) {
      std::optional<GameHistory> truth;
      if (scheme == Scheme::lc_cde) truth.emplace(S, P, d, combos, backoff);
      for (int i = 0; i < m; ++i) {
        if (backoff[i] > 0) continue;
        auto flip = a;
        flip.transmit[i] ^= 1;
        const ActionProfile none(m);
        detail::StimulusInputs c{};
        double silent_cost;
        if (truth) {
          c = {stage_cost(plain, a, *truth), stage_cost(plain, flip, *truth)};
          silent_cost = stage_cost(plain, none, *truth);
        } else {
          c = {estimated_cost(plain, a, views[i], P, d, combos),
               estimated_cost(plain, flip, views[i], P, d, combos)};
          silent_cost = estimated_cost(plain, none, views[i], P, d, combos);
        }
        const double s = detail::rl_stimulus(c, silent_cost, config.epsilon);
        const bool acted = a.transmit[i] != 0;
        x[i].x = scheme == Scheme::lc_cde ? bm_transmit_update(x[i].x, x[i].lambda, s, acted)
                                          : lossy_rl_update(x[i].x, x[i].lambda, s, acted);
      }
    }

    // Channel outcome.
    const BitVector wanting = wants_indicator(S);
    std::vector<AckEvent> acks;
    if (sender == -1) {
      for (int i = 0; i < m; ++i) d[i] += wanting[i];
    } else {
      const BitVector tau = targeted_set(kappa, S);
      for (int i = 0; i < m; ++i)
        if (delivered[i] && wanting[i] && !tau[i]) d[i] += 1;
      for (int i = 0; i < m; ++i) {
        if (i == sender || !delivered[i] || !tau[i]) continue;
        for (int j = 0; j < n; ++j)
          if (kappa[j] && S.wants(i, j)) {
            acks.push_back({i, j, false});
            break;
          }
      }
    }
    const double cost = detail::realized_cost(opt.metric, S, d, pmp ? q : pbar);
    for (const auto& ack : acks) S.set_wants(ack.player, ack.packet, false);
    rec.decoded = static_cast<int>(acks.size());

    if (lossy && sender != -1) {
      Engine fb = make_stream(config.seed, Stream::feedback, {opt.key, static_cast<std::uint64_t>(t)});
      std::vector<double> forward(m);
      for (int i = 0; i < m; ++i) forward[i] = sender == -2 ? q[i] : P(i, sender);
      for (auto& F : views) {
        const int k = F.observer();
        std::vector<double> back(m);
        for (int i = 0; i < m; ++i) back[i] = i == k ? 0.0 : feedback_loss(k, i);
        auto heard = acks;
        for (auto& ack : heard) ack.heard = ack.player == k || bernoulli(fb, 1.0 - back[ack.player]);
        F = update_local_feedback(std::move(F), {sender == -2 ? -1 : sender, kappa}, heard, forward, back);
        if (k < m) F.sync_row(k, S);
      }
    }
    if (lossy)
      for (const auto& F : views) rec.uncertain += F.uncertain_count();

    const BitVector c = collision_indicator(a);
    for (auto v : c) rec.collisions += v;
    tr.collisions += rec.collisions;
    hist = update_collision_history(std::move(hist), c);

    for (int i = 0; i < m; ++i)
      if (tr.completion[i] < 0 && S.wants_count(i) == 0) tr.completion[i] = t;

    rec.a = a;
    rec.transmitter = sender;
    rec.kappa = kappa;
    rec.received = delivered;
    rec.delay = d;
    rec.cost = cost;
    tr.stages.push_back(std::move(rec));
    tr.T = t;
  }
  tr.cutoff = !S.all_received();
  tr.final_delay = d;
  return tr;
}

inline EpisodeTrace run_episode(Scheme scheme, const GameConfig& config, const EpisodeOptions& opt) {
  Engine rng = make_stream(config.seed, Stream::initial_phase, {opt.key});
  return run_episode(scheme, config, initial_phase(config, rng), opt);
}

// Reinforcement learning on a frozen stage game: state, delays and
// combinations stay fixed while mixed actions and back-off evolve.
struct RepeatedStageResult {
  std::vector<ActionProfile> profiles;
  std::vector<std::uint8_t> in_regularized_ne;  // per stage, under that stage's back-off
  std::vector<std::uint8_t> in_plain_ne;
};

inline RepeatedStageResult run_repeated_stage(const StateMatrix& S, const ErasureMatrix& P,
                                              const DelayVector& d, Metric metric, int V,
                                              double epsilon, int stages, std::uint64_t seed,
                                              std::uint64_t key) {
  const int m = S.players();
  const GameKind plain{metric, Variant::plain};
  const GameKind reg{metric, Variant::regularized};
  std::vector<PacketCombination> combos(m);
  for (int j = 0; j < m; ++j) combos[j] = greedy_combination(j, S, P, d, metric);
  std::vector<MixedAction> x(m);
  for (int i = 0; i < m; ++i) x[i] = initial_mixed_action(S, i);
  CollisionHistory hist(m, V);
  RepeatedStageResult out;
  for (int t = 1; t <= stages; ++t) {
    const auto backoff = hist.backoff();
    const GameHistory h(S, P, d, combos, backoff);
    Engine act = make_stream(seed, Stream::actions, {key, static_cast<std::uint64_t>(t)});
    const ActionProfile a = rl_stage(x, backoff, act);
    out.profiles.push_back(a);
    out.in_regularized_ne.push_back(NashSet(reg, h).contains(a));
    out.in_plain_ne.push_back(NashSet(plain, h).contains(a));
    const double silent_cost = stage_cost(plain, ActionProfile(m), h);
    for (int i = 0; i < m; ++i) {
      if (backoff[i] > 0) continue;
      auto flip = a;
      flip.transmit[i] ^= 1;
      const double s = detail::rl_stimulus({stage_cost(plain, a, h), stage_cost(plain, flip, h)},
                                           silent_cost, epsilon);
      x[i].x = bm_transmit_update(x[i].x, x[i].lambda, s, a.transmit[i] != 0);
    }
    hist = update_collision_history(std::move(hist), collision_indicator(a));
  }
  return out;
}

}  // namespace idnc
