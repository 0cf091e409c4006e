#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace idnc;

namespace {

std::vector<std::string> strs(const std::vector<ActionProfile>& v) {
  std::vector<std::string> out;
  for (const auto& a : v) out.push_back(a.str());
  return out;
}

// Two players that can each serve the other.
GameHistory swap_pair() {
  const auto S = StateMatrix::from_rows({{0, 1}, {1, 0}});
  return GameHistory(S, ErasureMatrix(2), {0, 0}, {{1, 0}, {0, 1}});
}

// Three players each holding the packets the other two want.
GameHistory ring_of_three() {
  const auto S = StateMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  return GameHistory(S, ErasureMatrix(3), {0, 0, 0}, {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
}

GameHistory idle_history(int M) {
  StateMatrix S(M, 2);
  for (int i = 0; i < M; ++i) S.set_wants(i, i % 2, true);
  S.set_wants(0, 1, false);
  return GameHistory(S, ErasureMatrix(M, 0.1), DelayVector(M, 1),
                     std::vector<PacketCombination>(M, PacketCombination(2, 0)));
}

}  // namespace

TEST(NashSet, SumDelayTwoPlayers) {
  const auto ne = NashSet(GameKind::from_number(3), swap_pair()).profiles();
  EXPECT_EQ(strs(ne), (std::vector<std::string>{"01", "10"}));
}

TEST(NashSet, RegularizedSumDelayAllSolos) {
  const auto ne = NashSet(GameKind::from_number(6), ring_of_three()).profiles();
  EXPECT_EQ(strs(ne), (std::vector<std::string>{"001", "010", "100"}));
}

TEST(NashSet, PlainGameWithNoImprovingSender) {
  const auto h = idle_history(3);
  const NashSet ne(GameKind::from_number(1), h);
  EXPECT_TRUE(ne.z_empty());
  EXPECT_EQ(ne.profiles().size(), 8u);
}

TEST(NashSet, RegularizedGameWithNoImprovingSenderIsSilent) {
  // Every solo costs the same as silence in the plain game, so the
  // transmission penalty leaves silence as the only equilibrium.
  const auto h = idle_history(3);
  for (int g : {4, 5, 6}) {
    const auto ne = NashSet(GameKind::from_number(g), h).profiles();
    EXPECT_EQ(strs(ne), std::vector<std::string>{"000"}) << "game " << g;
  }
}

TEST(NashSet, RegularizedRespectsBackoff) {
  const auto S = StateMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const GameHistory h(S, ErasureMatrix(3), {0, 0, 0}, {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}, {0, 2, 0});
  const auto ne = NashSet(GameKind::from_number(6), h).profiles();
  EXPECT_EQ(strs(ne), (std::vector<std::string>{"001", "100"}));
  EXPECT_EQ(strs(enumerate_ne(GameKind::from_number(6), h)), strs(ne));
}

TEST(NashSet, ClosedFormMatchesEnumeration) {
  Engine rng = make_stream(41, Stream::instance, {0});
  for (int r = 0; r < 500; ++r) {
    const int M = 1 + static_cast<int>(rng() % 5), N = 2 + static_cast<int>(rng() % 3);
    const auto h = fixtures::random_history(rng, M, N, 2);
    for (const auto& kind : kAllGames)
      ASSERT_EQ(strs(NashSet(kind, h).profiles()), strs(enumerate_ne(kind, h)))
          << kind.name() << " instance " << r;
  }
}

TEST(NashSet, SilenceIsNotAnEquilibriumWhenSomeoneCanServe) {
  Engine rng = make_stream(42, Stream::instance, {0});
  for (int r = 0; r < 300; ++r) {
    const int M = 2 + static_cast<int>(rng() % 4);
    const auto h = fixtures::random_history(rng, M, 3);
    const auto c = stage_costs(GameKind::from_number(3), h);
    const bool improving = std::any_of(c.solo.begin(), c.solo.end(), [&](double v) { return v < c.silent; });
    ASSERT_EQ(NashSet(GameKind::from_number(3), h).contains(ActionProfile(M)), !improving);
  }
}

TEST(CriticalSet, Examples) {
  const StateMatrix none(3, 2);
  const GameHistory idle(none, ErasureMatrix(3), {3, 3, 1}, std::vector<PacketCombination>(3, {0, 0}));
  EXPECT_EQ(q_set(Metric::max_delay, idle), (BitVector{0, 0, 0}));
  EXPECT_EQ(q_set(Metric::completion_time, idle), (BitVector{0, 0, 0}));
  EXPECT_THROW(q_set(Metric::sum_delay, idle), std::invalid_argument);

  const StateMatrix all(3, 2, true);
  const GameHistory h(all, ErasureMatrix(3), {3, 3, 1}, std::vector<PacketCombination>(3, {0, 0}));
  EXPECT_EQ(q_set(Metric::max_delay, h), (BitVector{1, 1, 0}));
}

TEST(CriticalSet, CompletionPredicateOracle) {
  Engine rng = make_stream(43, Stream::instance, {0});
  for (int r = 0; r < 300; ++r) {
    const int M = 2 + static_cast<int>(rng() % 4);
    const auto h = fixtures::random_history(rng, M, 4);
    const auto& S = h.state();
    std::vector<double> C(M);
    double top = -1e300;
    for (int i = 0; i < M; ++i) {
      const double p = h.erasure().row_average(i);
      C[i] = (S.wants_count(i) + static_cast<double>(h.delay()[i]) - p) / (1.0 - p);
      top = std::max(top, C[i]);
    }
    const auto q = q_set(Metric::completion_time, h);
    for (int i = 0; i < M; ++i) {
      const double p = h.erasure().row_average(i);
      ASSERT_EQ(q[i] != 0, S.wants_count(i) > 0 && C[i] + 1.0 / (1.0 - p) > top);
    }
  }
}

TEST(ImprovingSet, MaxDelayOracle) {
  Engine rng = make_stream(44, Stream::instance, {0});
  for (int r = 0; r < 300; ++r) {
    const int M = 2 + static_cast<int>(rng() % 4);
    const auto h = fixtures::random_history(rng, M, 4);
    const auto& S = h.state();
    double silent = -1e300;
    for (int i = 0; i < M; ++i)
      silent = std::max(silent, h.delay()[i] + (S.wants_count(i) > 0 ? 1.0 : 0.0));
    const auto z = z_set(Metric::max_delay, h);
    for (int j = 0; j < M; ++j) {
      const auto tau = targeted_set(h.combinations()[j], S);
      double solo = -1e300;
      for (int i = 0; i < M; ++i) {
        const double e = (S.wants_count(i) > 0 && !tau[i]) ? 1.0 - h.erasure()(i, j) : 0.0;
        solo = std::max(solo, h.delay()[i] + e);
      }
      ASSERT_EQ(z[j] != 0, solo < silent) << "sender " << j;
    }
  }
}

TEST(Poa, MaxDelayCollisionsAgainstBestSolo) {
  // φ' = 4; player 2 serves both players at the max delay.
  const auto S = StateMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  const GameHistory h(S, ErasureMatrix(3), {4, 4, 0}, {{0, 0, 0}, {0, 0, 0}, {1, 1, 0}});
  const auto kind = GameKind::from_number(2);
  EXPECT_DOUBLE_EQ(poa_closed_form(kind, h), 0.8);
  EXPECT_DOUBLE_EQ(poa_enumerated(kind, h), 0.8);
}

TEST(Poa, SingleEquilibriumGivesOne) {
  EXPECT_DOUBLE_EQ(poa_closed_form(GameKind::from_number(4), idle_history(3)), 1.0);
  EXPECT_DOUBLE_EQ(poa(GameKind::from_number(1), idle_history(4)).closed_form, 1.0);
}

TEST(Poa, ClosedFormMatchesEnumeration) {
  Engine rng = make_stream(45, Stream::instance, {0});
  for (int r = 0; r < 400; ++r) {
    const int M = 1 + static_cast<int>(rng() % 5);
    const auto h = fixtures::random_history(rng, M, 3, 2);
    for (const auto& kind : kAllGames) {
      const auto p = poa(kind, h);
      ASSERT_TRUE(p.enumerated.has_value());
      ASSERT_NEAR(p.closed_form, *p.enumerated, 1e-12) << kind.name() << " instance " << r;
      ASSERT_GE(p.closed_form, 0.0);
      ASSERT_LE(p.closed_form, 1.0 + 1e-12);
    }
  }
}

TEST(Pone, SingletonAndMinimalCost) {
  EXPECT_EQ(pone(GameKind::from_number(4), idle_history(3)).str(), "000");
  const auto h = ring_of_three();
  const auto best = pone(GameKind::from_number(6), h);
  const auto ne = NashSet(GameKind::from_number(6), h).profiles();
  for (const auto& a : ne) EXPECT_LE(stage_cost(GameKind::from_number(6), best, h), stage_cost(GameKind::from_number(6), a, h));
  // All three solos cost the same; lexicographic order decides.
  EXPECT_EQ(best.str(), "001");
}

TEST(Pone, MatchesEnumeration) {
  Engine rng = make_stream(46, Stream::instance, {0});
  for (int r = 0; r < 400; ++r) {
    const int M = 1 + static_cast<int>(rng() % 5);
    const auto h = fixtures::random_history(rng, M, 3, 2);
    for (const auto& kind : kAllGames) {
      const auto a = pone(kind, h);
      ASSERT_EQ(a, pone_enumerated(kind, h)) << kind.name();
      for (const auto& b : enumerate_ne(kind, h)) ASSERT_GE(utility(kind, a, h), utility(kind, b, h));
    }
  }
}

TEST(Report, Serialization) {
  const auto r = analyze(GameKind::from_number(3), swap_pair());
  EXPECT_EQ(serialize_report(r),
            "game 3\n"
            "ne 01\n"
            "ne 10\n"
            "pone 01\n"
            "poa 1\n"
            "q -\n"
            "z 1,2\n"
            "y0 2\n"
            "y 1 1\n");
}

TEST(CostRatio, Degenerate) {
  EXPECT_DOUBLE_EQ(cost_ratio(3.0, 3.0), 1.0);
  EXPECT_DOUBLE_EQ(cost_ratio(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(cost_ratio(2.0, 4.0), 0.5);
}
