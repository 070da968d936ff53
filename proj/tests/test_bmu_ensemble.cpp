#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "bmu/agents.hpp"
#include "bmu/bmu_ensemble.hpp"

using namespace bmu;

TEST(Ensemble, SpawnSeededEncoders) {
  EnsemblePopulation pop(2, 1);
  Rng a(4), b(4);
  const std::size_t i = pop.spawn_ensemble("5_5_5_5_", a);
  EXPECT_EQ(pop.size(), 1u);
  for (double e : pop.ensemble(i).encoders) {
    EXPECT_GE(e, -1.0);
    EXPECT_LT(e, 1.0);
  }
  EnsemblePopulation other(2, 1);
  other.spawn_ensemble("5_5_5_5_", b);
  EXPECT_EQ(pop.ensemble(0).encoders, other.ensemble(0).encoders);
  EXPECT_THROW(pop.spawn_ensemble("5_5_5_5_", a), PreconditionError);
  EXPECT_TRUE(pop.ensemble(0).input_connected);
}

TEST(Ensemble, EncoderIsStoredQ) {
  EnsemblePopulation pop(2, 1);
  const double enc[] = {0.7, -0.2};
  pop.spawn_ensemble("s", enc);
  EXPECT_DOUBLE_EQ(pop.ensemble(0).encoder(0, 0), 0.7);
  EXPECT_DOUBLE_EQ(pop.ensemble(0).value(0), 0.7);
}

TEST(Ensemble, ActivityIdentity) {
  EnsemblePopulation pop(2, 1);
  const double enc[] = {0.7, -0.2};
  pop.spawn_ensemble("s", enc);
  const auto input = unit_step_input(1);
  EXPECT_EQ(activity(pop.ensemble(0), input), (std::vector<double>{0.7, -0.2}));
  const ActionChoice c = select_action(pop.ensemble(0), activity(pop.ensemble(0), input));
  EXPECT_EQ(c.bins, (std::vector<int>{0}));
  EXPECT_EQ(c.values, (std::vector<double>{0.0}));
}

TEST(Ensemble, TieGoesToLowestBin) {
  EnsemblePopulation pop(3, 1);
  const double enc[] = {0.4, 0.4, 0.1};
  pop.spawn_ensemble("s", enc);
  const auto a = activity(pop.ensemble(0), unit_step_input(1));
  EXPECT_EQ(select_action(pop.ensemble(0), a).bins.front(), 0);
}

TEST(Ensemble, MonotoneResponsePreservesArgmax) {
  Rng rng(17);
  const Nonlinearity responses[] = {
      identity_response, [](double x) { return std::tanh(x); },
      [](double x) { return 1.0 / (1.0 + std::exp(-3.0 * x)); },
      [](double x) { return x > 0 ? x * x + x : x; }};
  for (int trial = 0; trial < 1000; ++trial) {
    EnsemblePopulation pop(4, 1);
    std::vector<double> enc(4);
    for (auto& e : enc) e = rng.uniform(-1.0, 1.0);
    pop.spawn_ensemble("s", enc);
    const int expected = argmax_lowest(enc);
    for (const auto& g : responses) {
      const auto a = activity(pop.ensemble(0), unit_step_input(1), g);
      EXPECT_EQ(select_action(pop.ensemble(0), a).bins.front(), expected);
    }
    Ensemble& ens = pop.ensemble(0);
    std::fill(ens.gains.begin(), ens.gains.end(), 2.0);
    std::fill(ens.biases.begin(), ens.biases.end(), 0.5);
    const auto a = activity(ens, unit_step_input(1));
    EXPECT_EQ(select_action(ens, a).bins.front(), expected);
  }
}

TEST(Ensemble, MultiDimensionalSelection) {
  EnsemblePopulation pop(2, 2, {-1.0, -0.5, 1.0, 0.5});
  const double enc[] = {0.1, 0.9, 0.3, -0.2};  // [j][k]
  pop.spawn_ensemble("s", enc);
  const ActionChoice c = select_action(pop.ensemble(0), activity(pop.ensemble(0), unit_step_input(2)));
  EXPECT_EQ(c.bins, (std::vector<int>{1, 0}));
  EXPECT_EQ(c.values, (std::vector<double>{1.0, -0.5}));
  EXPECT_THROW(activity(pop.ensemble(0), unit_step_input(1)), PreconditionError);
}

TEST(Ensemble, UpdateExample) {
  EnsemblePopulation pop(2, 1);
  const double e0[] = {0.5, 0.1}, e1[] = {0.3, -0.4};
  const std::size_t s = pop.spawn_ensemble("s", e0);
  const std::size_t n = pop.spawn_ensemble("n", e1);
  const int chosen[] = {0};
  pop.bmu_update(s, chosen, 1.0, n, false, 0.9, 0.99);
  EXPECT_NEAR(pop.ensemble(s).encoder(0, 0), 1.2173, 1e-12);
  EXPECT_DOUBLE_EQ(pop.ensemble(s).encoder(1, 0), 0.1);
  ASSERT_EQ(pop.links().size(), 1u);
  EXPECT_EQ(pop.links()[0].source, s);
  EXPECT_EQ(pop.links()[0].target, n);
}

TEST(Ensemble, UpdateReadsNextValueBeforeWriting) {
  EnsemblePopulation pop(2, 1);
  const double e0[] = {0.5, 0.1};
  const std::size_t s = pop.spawn_ensemble("s", e0);
  const int chosen[] = {0};
  pop.bmu_update(s, chosen, 1.0, s, false, 0.5, 0.9);
  EXPECT_NEAR(pop.ensemble(s).encoder(0, 0), 0.5 + 0.5 * (-0.5 + 1.0 + 0.9 * 0.5), 1e-15);
}

TEST(Ensemble, ZeroLearningRate) {
  EnsemblePopulation pop(2, 1);
  const double e0[] = {0.5, 0.1}, e1[] = {0.3, -0.4};
  pop.spawn_ensemble("s", e0);
  pop.spawn_ensemble("n", e1);
  const int chosen[] = {1};
  pop.bmu_update(0, chosen, 7.0, 1, false, 0.0, 0.99);
  EXPECT_EQ(pop.ensemble(0).encoders, (std::vector<double>{0.5, 0.1}));
  EXPECT_THROW(pop.bmu_update(0, chosen, NAN, 1, false, 0.9, 0.99), DomainError);
}

TEST(Ensemble, PenaltyFlipsSelection) {
  EnsemblePopulation pop(2, 1);
  const double e0[] = {0.6, 0.2}, e1[] = {0.0, 0.0};
  pop.spawn_ensemble("s", e0);
  pop.spawn_ensemble("t", e1);
  auto pick = [&] {
    return select_action(pop.ensemble(0), activity(pop.ensemble(0), unit_step_input(1))).bins[0];
  };
  EXPECT_EQ(pick(), 0);
  const int chosen[] = {0};
  pop.bmu_update(0, chosen, -10.0, 1, true, 0.9, 0.99);
  // 0.6 + 0.9 * (-0.6 - 10) = -8.94
  EXPECT_NEAR(pop.ensemble(0).encoder(0, 0), -8.94, 1e-12);
  EXPECT_EQ(pick(), 1);
}

TEST(Ensemble, LinksAreDistinctPairs) {
  EnsemblePopulation pop(2, 1);
  Rng rng(1);
  pop.spawn_ensemble("a", rng);
  pop.spawn_ensemble("b", rng);
  const int c0[] = {0}, c1[] = {1};
  pop.bmu_update(0, c0, 1.0, 1, false, 0.9, 0.99);
  pop.bmu_update(0, c1, 1.0, 1, false, 0.9, 0.99);
  pop.bmu_update(1, c0, 1.0, 1, false, 0.9, 0.99);
  EXPECT_EQ(pop.links().size(), 2u);
  const NetworkStats st = pop.stats();
  EXPECT_EQ(st.neurons, 2u);
  EXPECT_EQ(st.edges, 2u);
  EXPECT_EQ(st.avg_fan_in, 1.0);
  EXPECT_EQ(st.parameter_count, 8u);
  const GraphSnapshot g = pop.snapshot();
  EXPECT_EQ(g.nodes[1].fan_in, 2);
  EXPECT_EQ(g.edges[0].action, 1);
}

TEST(Pool, AssignSelectUpdate) {
  NeuronPool pool(300, 2);
  EXPECT_EQ(pool.pool_assign("a"), 0u);
  EXPECT_EQ(pool.pool_assign("b"), 1u);
  EXPECT_EQ(pool.next_free(), 2u);
  EXPECT_THROW(pool.pool_assign("a"), PreconditionError);
  EXPECT_EQ(pool.pool_select("a"), 0);
  pool.pool_update("a", 1, 1.0, "b", false, 0.9, 0.99);
  EXPECT_DOUBLE_EQ(pool.weight(0, 1), 0.9);
  EXPECT_EQ(pool.pool_select("a"), 1);
  pool.pool_update("b", 0, -10.0, "a", true, 0.9, 0.99);
  EXPECT_DOUBLE_EQ(pool.weight(1, 0), -9.0);
  EXPECT_EQ(pool.pool_select("b"), 1);
  const NetworkStats st = pool.stats();
  EXPECT_EQ(st.neurons, 2u);
  EXPECT_EQ(st.edges, 2u);
  EXPECT_EQ(st.parameter_count, 8u);
  EXPECT_THROW(pool.pool_select("zzz"), PreconditionError);
}

TEST(Pool, CapacityHolds250States) {
  NeuronPool pool(300, 2);
  for (int i = 0; i < 250; ++i) EXPECT_NO_THROW(pool.pool_assign("s" + std::to_string(i)));
  EXPECT_EQ(pool.assigned_count(), 250u);
}

TEST(Pool, ExhaustionNamesCapacity) {
  NeuronPool pool(2, 2);
  pool.pool_assign("a");
  pool.pool_assign("b");
  try {
    pool.pool_assign("c");
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_EQ(e.capacity(), 2u);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(Pool, LruEviction) {
  NeuronPool pool(2, 2, PoolOverflow::EvictLeastRecentlyUsed);
  pool.pool_assign("a");
  pool.pool_assign("b");
  pool.pool_update("b", 0, 1.0, "a", false, 0.9, 0.99);
  pool.touch("b");
  const std::size_t c = pool.pool_assign("c");
  EXPECT_EQ(c, 0u);
  EXPECT_FALSE(pool.index_of("a"));
  EXPECT_TRUE(pool.index_of("b"));
  EXPECT_DOUBLE_EQ(pool.weight(0, 0), 0.0);
  EXPECT_EQ(pool.stats().edges, 0u);
  EXPECT_EQ(pool.stats().neurons, 2u);
}

TEST(Pool, MatchesSynapticAgentOnSharedStream) {
  AgentSettings s;
  SynapticAgent syn(s, 1);
  PoolAgent pool(s, 1);
  Rng rng(8);
  std::vector<std::string> keys;
  for (int i = 0; i < 30; ++i) keys.push_back(key_of({i % 10, i / 10, 5, 5}));
  std::string cur = keys[0];
  DiscreteState d{parse_key(cur), cur};
  syn.observe(d);
  pool.observe(d);
  for (int t = 0; t < 3000; ++t) {
    const std::string next = keys[static_cast<std::size_t>(rng.below(30))];
    const DiscreteState nd{parse_key(next), next};
    syn.observe(nd);
    pool.observe(nd);
    const int a1 = syn.select(cur, std::nullopt);
    const int a2 = pool.select(cur, std::nullopt);
    ASSERT_EQ(a1, a2);
    const bool terminal = rng.canonical() < 0.1;
    const double r = terminal ? -10.0 : 1.0;
    syn.learn(cur, a1, r, next, terminal);
    pool.learn(cur, a2, r, next, terminal);
    ASSERT_EQ(syn.q_value(cur, a1), pool.q_value(cur, a2));
    cur = next;
  }
}
