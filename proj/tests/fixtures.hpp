#pragma once

#include <vector>

#include "idnc/idnc.hpp"

namespace idnc::fixtures {

// Random stage game for the equilibrium corpus: coverage-respecting state,
// random erasures, random delays, and combinations that are greedy most of
// the time and arbitrary subsets of the Has set otherwise.
inline GameHistory random_history(Engine& rng, int M, int N, int V_backoff = 0) {
  StateMatrix S(M, N);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < M; ++i) S.set_wants(i, j, bernoulli(rng, 0.5));
    if (!S.column_covered(j)) S.set_wants(static_cast<int>(rng() % M), j, false);
  }
  ErasureMatrix P(M);
  const double scale = uniform01(rng) * 0.6;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      if (i != j) P.set(i, j, bernoulli(rng, 0.2) ? 0.0 : uniform01(rng) * scale);
  DelayVector d(M);
  for (auto& v : d) v = static_cast<long>(rng() % 4);
  const bool greedy = bernoulli(rng, 0.7);
  const Metric metric = static_cast<Metric>(rng() % 3);
  std::vector<PacketCombination> combos(M, PacketCombination(N, 0));
  for (int j = 0; j < M; ++j) {
    if (greedy) {
      combos[j] = greedy_combination(j, S, P, d, metric);
    } else {
      for (int p = 0; p < N; ++p) combos[j][p] = S.has(j, p) && bernoulli(rng, 0.5);
    }
  }
  std::vector<int> backoff(M, 0);
  if (V_backoff > 0)
    for (auto& b : backoff) b = bernoulli(rng, 0.25) ? static_cast<int>(1 + rng() % V_backoff) : 0;
  return GameHistory(S, P, d, combos, backoff);
}

}  // namespace idnc::fixtures
