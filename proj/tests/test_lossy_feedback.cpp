#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace idnc;

TEST(Posterior, Examples) {
  EXPECT_DOUBLE_EQ(uncertainty_posterior(0.3, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(uncertainty_posterior(0.5, 0.5), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(uncertainty_posterior(0.0, 0.0), 0.0);
  // A fresh entry chains from prior 0.
  EXPECT_DOUBLE_EQ(chained_posterior(0.0, 0.4, 0.2), uncertainty_posterior(0.4, 0.2));
}

TEST(Posterior, MonteCarlo) {
  Engine rng = make_stream(61, Stream::instance, {0});
  const double pf = 0.3, pb = 0.3;
  long silent = 0, got = 0;
  for (int r = 0; r < 200000; ++r) {
    const bool received = bernoulli(rng, 1.0 - pf);
    const bool ack_heard = received && bernoulli(rng, 1.0 - pb);
    if (ack_heard) continue;
    ++silent;
    got += received;
  }
  EXPECT_NEAR(static_cast<double>(got) / silent, uncertainty_posterior(pf, pb), 0.01);
  EXPECT_NEAR(uncertainty_posterior(pf, pb), 0.4118, 1e-4);
}

TEST(Posterior, BoundedAndMonotone) {
  for (int a = 0; a < 20; ++a)
    for (int b = 0; b < 20; ++b) {
      const double pf = a / 20.0, pb = b / 20.0;
      const double v = uncertainty_posterior(pf, pb);
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
      ASSERT_LE(v, uncertainty_posterior(pf, pb + 0.05) + 1e-15);
      ASSERT_GE(v, uncertainty_posterior(pf + 0.05, pb) - 1e-15);
    }
}

TEST(Posterior, ChainedAgreesWithRepeatedEvidence) {
  // Two transmissions and no ACK heard; once received the player stays
  // quiet.
  const double pf = 0.4, pb = 0.3;
  const double silent_got = (1 - pf) * pb;
  const double evidence = pf * (pf + silent_got) + silent_got;
  const double direct = 1.0 - pf * pf / evidence;
  const double chained = chained_posterior(chained_posterior(0.0, pf, pb), pf, pb);
  EXPECT_NEAR(chained, direct, 1e-12);
}

TEST(LocalFeedback, AckHeardMarksHas) {
  const auto S = StateMatrix::from_rows({{0, 0}, {1, 0}, {1, 1}});
  LocalFeedbackMatrix F(0, S);
  F = update_local_feedback(F, {0, {1, 1}}, {{1, 0, true}}, {0.2, 0.2, 0.2}, {0.3, 0.3, 0.3});
  EXPECT_EQ(F.at(1, 0), Entry::has);
  EXPECT_EQ(F.at(2, 0), Entry::wants);  // hit twice, not targeted
  EXPECT_EQ(F.uncertain_count(), 0);
}

TEST(LocalFeedback, MissingAckMakesTargetUncertain) {
  const auto S = StateMatrix::from_rows({{0, 0}, {1, 0}, {0, 1}});
  LocalFeedbackMatrix F(0, S);
  F = update_local_feedback(F, {0, {1, 1}}, {}, {0.2, 0.2, 0.2}, {0.3, 0.3, 0.3});
  EXPECT_EQ(F.at(1, 0), Entry::uncertain);
  EXPECT_EQ(F.at(2, 1), Entry::uncertain);
  EXPECT_DOUBLE_EQ(F.posterior(1, 0), uncertainty_posterior(0.2, 0.3));
  EXPECT_EQ(F.uncertain_count(), 2);
  EXPECT_FALSE(F.certain_state().has_value());
}

TEST(LocalFeedback, LosslessFeedbackStaysCertain) {
  const auto S = StateMatrix::from_rows({{0, 0}, {1, 0}, {0, 1}});
  LocalFeedbackMatrix F(0, S);
  F = update_local_feedback(F, {0, {1, 1}}, {}, {0.2, 0.2, 0.2}, {0.0, 0.0, 0.0});
  EXPECT_EQ(F.uncertain_count(), 0);
  EXPECT_EQ(*F.certain_state(), S);
}

TEST(LocalFeedback, SoundAgainstEventLog) {
  // Random three-player runs: the observer may only believe "has" for an
  // entry that a heard ACK vouched for, and every truly wanted entry is
  // still wanted or uncertain in its view.
  Engine rng = make_stream(62, Stream::instance, {0});
  for (int run = 0; run < 200; ++run) {
    const int M = 3, N = 4;
    StateMatrix S(M, N);
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < M; ++i) S.set_wants(i, j, bernoulli(rng, 0.5));
      if (!S.column_covered(j)) S.set_wants(static_cast<int>(rng() % M), j, false);
    }
    const StateMatrix initial = S;
    const int observer = static_cast<int>(rng() % M);
    LocalFeedbackMatrix F(observer, S);
    std::vector<std::pair<int, int>> vouched;
    for (int t = 0; t < 12; ++t) {
      const int sender = static_cast<int>(rng() % M);
      PacketCombination k(N, 0);
      for (int j = 0; j < N; ++j) k[j] = S.has(sender, j) && bernoulli(rng, 0.5);
      const auto tau = targeted_set(k, S);
      std::vector<AckEvent> acks;
      for (int i = 0; i < M; ++i) {
        if (i == sender || !tau[i] || !bernoulli(rng, 0.7)) continue;
        for (int j = 0; j < N; ++j)
          if (k[j] && S.wants(i, j)) {
            const bool heard = i == observer || bernoulli(rng, 0.6);
            acks.push_back({i, j, heard});
            if (heard) vouched.emplace_back(i, j);
            break;
          }
      }
      for (const auto& a : acks) S.set_wants(a.player, a.packet, false);
      std::vector<double> back(M, 0.4);
      back[observer] = 0.0;
      F = update_local_feedback(F, {sender, k}, acks, std::vector<double>(M, 0.3), back);
      F.sync_row(observer, S);
      for (int i = 0; i < M; ++i)
        for (int j = 0; j < N; ++j) {
          if (S.wants(i, j)) ASSERT_NE(F.at(i, j), Entry::has);
          if (F.at(i, j) == Entry::has && initial.wants(i, j) && i != observer)
            ASSERT_NE(std::find(vouched.begin(), vouched.end(), std::make_pair(i, j)), vouched.end());
          if (F.at(i, j) == Entry::uncertain) {
            ASSERT_GT(F.posterior(i, j), 0.0);
            ASSERT_LT(F.posterior(i, j), 1.0);
          }
        }
    }
  }
}

TEST(EstimatedCost, DegeneratesToStageCost) {
  Engine rng = make_stream(63, Stream::instance, {0});
  for (int r = 0; r < 200; ++r) {
    const int M = 1 + static_cast<int>(rng() % 4);
    const auto h = fixtures::random_history(rng, M, 3);
    const LocalFeedbackMatrix F(0, h.state());
    for (const auto& kind : kAllGames)
      for (std::uint32_t mask = 0; mask < (1U << M); ++mask) {
        const auto a = ActionProfile::from_mask(M, mask);
        ASSERT_EQ(estimated_payoff(kind, a, F, h.erasure(), h.delay(), h.combinations()), utility(kind, a, h));
      }
  }
}

TEST(EstimatedCost, MatchesEnumerationOverUncertainEntries) {
  Engine rng = make_stream(64, Stream::instance, {0});
  for (int r = 0; r < 150; ++r) {
    const int M = 3, N = 3;
    const auto h = fixtures::random_history(rng, M, N);
    LocalFeedbackMatrix F(0, h.state());
    std::vector<std::pair<int, int>> U;
    for (int i = 1; i < M; ++i)
      for (int j = 0; j < N; ++j)
        if (h.state().wants(i, j) && bernoulli(rng, 0.5)) {
          F.set(i, j, Entry::uncertain, uniform(rng, 0.05, 0.95));
          U.emplace_back(i, j);
        }
    for (const auto& kind : kAllGames)
      for (std::uint32_t mask = 0; mask < (1U << M); ++mask) {
        const auto a = ActionProfile::from_mask(M, mask);
        double oracle = 0.0;
        for (std::uint32_t real = 0; real < (1U << U.size()); ++real) {
          StateMatrix S = h.state();
          double w = 1.0;
          for (std::size_t u = 0; u < U.size(); ++u) {
            const auto [i, j] = U[u];
            const double got = F.posterior(i, j);
            const bool received = (real >> u) & 1U;
            S.set_wants(i, j, !received);
            w *= received ? got : 1.0 - got;
          }
          oracle += w * stage_cost(kind, a, GameHistory(S, h.erasure(), h.delay(), h.combinations()));
        }
        ASSERT_NEAR(estimated_cost(kind, a, F, h.erasure(), h.delay(), h.combinations()), oracle, 1e-9)
            << kind.name() << " profile " << a.str();
      }
  }
}

TEST(EstimatedCost, CertainReceiptMeansNoDelay) {
  const StateMatrix S(2, 2, true);
  LocalFeedbackMatrix F(0, S);
  F.set(1, 0, Entry::uncertain, 1.0);
  F.set(1, 1, Entry::uncertain, 1.0);
  F.set(0, 0, Entry::has);
  F.set(0, 1, Entry::has);
  const std::vector<PacketCombination> none(2, PacketCombination(2, 0));
  EXPECT_DOUBLE_EQ(estimated_cost(GameKind::from_number(3), ActionProfile(2), F, ErasureMatrix(2), {1, 2}, none), 3.0);
}

TEST(LossyUpdate, Examples) {
  EXPECT_DOUBLE_EQ(lossy_rl_update(0.5, 0.5, 1.0, true), 0.75);
  EXPECT_DOUBLE_EQ(lossy_rl_update(0.5, 0.5, 1.0, false), 0.25);
  EXPECT_THROW(lossy_rl_update(0.5, 0.5, 2.0, true), std::invalid_argument);
  Engine rng = make_stream(65, Stream::instance, {0});
  for (int r = 0; r < 2000; ++r) {
    const double x = uniform01(rng), lambda = uniform(rng, 0.05, 0.95), s = uniform(rng, -1.0, 1.0);
    const bool acted = r % 2 == 0;
    const double y = lossy_rl_update(x, lambda, s, acted);
    ASSERT_GE(y, 0.0);
    ASSERT_LE(y, 1.0);
    ASSERT_EQ(y, bm_transmit_update(x, lambda, s, acted));
  }
}

TEST(LossyEpisode, PerfectFeedbackReproducesCertainSchemes) {
  GameConfig c;
  c.M = 4;
  c.N = 5;
  c.P = ErasureMatrix(4, 0.2);
  c.Q.assign(4, 0.3);
  c.max_stages = 250;
  c.seed = 8;
  for (auto metric : {Metric::completion_time, Metric::max_delay, Metric::sum_delay})
    for (std::uint64_t key = 0; key < 6; ++key) {
      EpisodeOptions opt;
      opt.metric = metric;
      opt.key = key;
      opt.feedback_loss = 0.0;
      EXPECT_EQ(serialize_trace(run_episode(Scheme::ls_cde, c, opt)),
                serialize_trace(run_episode(Scheme::lc_cde, c, opt)));
      EXPECT_EQ(serialize_trace(run_episode(Scheme::ls_pmp, c, opt)),
                serialize_trace(run_episode(Scheme::opt_pmp, c, opt)));
    }
}

TEST(LossyEpisode, LossyFeedbackCreatesUncertainty) {
  GameConfig c;
  c.M = 5;
  c.N = 6;
  c.P = ErasureMatrix(5, 0.3);
  c.Q.assign(5, 0.3);
  c.max_stages = 300;
  c.seed = 8;
  long total = 0;
  for (std::uint64_t key = 0; key < 5; ++key) {
    EpisodeOptions opt;
    opt.key = key;
    for (const auto& st : run_episode(Scheme::ls_cde, c, opt).stages) total += st.uncertain;
  }
  EXPECT_GT(total, 0);
}
