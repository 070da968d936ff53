#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bmu/random.hpp"
#include "bmu/synaptic_graph.hpp"
#include "bmu/synaptic_kernel.hpp"

using namespace bmu;

TEST(SynapticGraph, SpawnNeuron) {
  SynapticGraph g(2, 0.99);
  const NeuronId id = g.spawn_neuron("5_5_5_5_");
  EXPECT_EQ(g.neuron_count(), 1u);
  EXPECT_EQ(g.neuron(id).synapses.size(), 2u);
  EXPECT_DOUBLE_EQ(g.neuron(id).value, 0.0);
  EXPECT_EQ(g.find("5_5_5_5_"), id);
  EXPECT_FALSE(g.find("1_1_1_1_"));
  EXPECT_THROW(g.spawn_neuron("5_5_5_5_"), PreconditionError);
  g.spawn_neuron("1_1_1_1_");
  g.spawn_neuron("2_2_2_2_");
  EXPECT_EQ(g.neuron_count(), 3u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(SynapticGraph, SynapsesCarryTau) {
  SynapticGraph g(2, 0.99);
  const NeuronId id = g.spawn_neuron("a");
  for (const auto& s : g.neuron(id).synapses) EXPECT_NEAR(s.tau, 99.49916247, 1e-6);
}

TEST(SynapticGraph, ForwardSelect) {
  SynapticGraph g(2, 0.99);
  const double q1[] = {0.9, 0.3};
  const NeuronId a = g.spawn_neuron("a", q1);
  Selection s = g.forward_select(a, 1.0);
  EXPECT_EQ(s.action, 0);
  EXPECT_EQ(s.frequencies, (std::vector<double>{0.9, 0.3}));
  EXPECT_TRUE(g.neuron(a).synapses[0].gate.open());
  EXPECT_FALSE(g.neuron(a).synapses[1].gate.open());
  EXPECT_THROW(g.forward_select(a, 1.0), PreconditionError);

  const NeuronId b = g.spawn_neuron("b");
  EXPECT_EQ(g.forward_select(b, 1.0).action, 0);

  const double q3[] = {-10.0, -8.9};
  const NeuronId c = g.spawn_neuron("c", q3);
  s = g.forward_select(c, 1.0);
  EXPECT_EQ(s.action, 1);
  EXPECT_EQ(s.frequencies, (std::vector<double>{0.0, 0.0}));
}

TEST(SynapticGraph, SelectionIsArgmaxOverRawQ) {
  Rng rng(5);
  SynapticGraph g(2, 0.99);
  for (int i = 0; i < 5000; ++i) {
    double q[] = {rng.uniform(-20, 5), rng.uniform(-20, 5)};
    if (i % 10 == 0) q[1] = q[0];
    const NeuronId id = g.spawn_neuron("n" + std::to_string(i), q);
    const int expected = q[1] > q[0] ? 1 : 0;
    EXPECT_EQ(g.forward_select(id, 1.0).action, expected);
  }
}

TEST(SynapticGraph, ConnectAndRepoint) {
  SynapticGraph g(2, 0.99);
  const NeuronId a = g.spawn_neuron("a"), b = g.spawn_neuron("b"), c = g.spawn_neuron("c");
  EXPECT_THROW(g.connect(a, 0, b), PreconditionError);
  g.open_gate(a, 0);
  g.connect(a, 0, b);
  EXPECT_EQ(g.neuron(b).fan_in, 1);
  EXPECT_EQ(g.edge_count(), 1u);
  g.connect(a, 0, b);
  EXPECT_EQ(g.neuron(b).fan_in, 1);
  EXPECT_EQ(g.edge_count(), 1u);
  g.connect(a, 0, c);
  EXPECT_EQ(g.neuron(b).fan_in, 0);
  EXPECT_EQ(g.neuron(c).fan_in, 1);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.edges().front().target, c);
  EXPECT_EQ(g.neuron(a).synapses[0].target, c);
}

TEST(SynapticGraph, BellmanUpdateExamples) {
  SynapticGraph g(2, 0.99);
  const NeuronId a = g.spawn_neuron("a");
  g.open_gate(a, 0);
  BellmanResult r = g.bellman_update(a, 0, 1.0, 0.0, 0.9, 0.99);
  EXPECT_DOUBLE_EQ(r.q_value, 0.9);
  EXPECT_DOUBLE_EQ(r.value, 0.9);
  EXPECT_DOUBLE_EQ(g.neuron(a).synapses[1].q_value, 0.0);
  for (const auto& s : g.neuron(a).synapses) EXPECT_FALSE(s.gate.open());

  const NeuronId b = g.spawn_neuron("b");
  g.open_gate(b, 0);
  r = g.bellman_update(b, 0, -10.0, 0.0, 0.9, 0.99);
  EXPECT_DOUBLE_EQ(r.q_value, -9.0);
  EXPECT_DOUBLE_EQ(r.value, 0.0);
}

TEST(SynapticGraph, ZeroLearningRateIsIdentity) {
  SynapticGraph g(2, 0.99);
  const double q[] = {0.25, -1.5};
  const NeuronId a = g.spawn_neuron("a", q);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const int action = i % 2;
    g.open_gate(a, action);
    g.bellman_update(a, action, rng.uniform(-10, 10), rng.uniform(-10, 10), 0.0, 0.99);
  }
  EXPECT_DOUBLE_EQ(g.neuron(a).synapses[0].q_value, 0.25);
  EXPECT_DOUBLE_EQ(g.neuron(a).synapses[1].q_value, -1.5);
}

TEST(SynapticGraph, BellmanRejectsBadInput) {
  SynapticGraph g(2, 0.99);
  const NeuronId a = g.spawn_neuron("a");
  EXPECT_THROW(g.bellman_update(a, 0, 1.0, 0.0, 0.9, 0.99), PreconditionError);
  g.open_gate(a, 0);
  EXPECT_THROW(g.bellman_update(a, 0, NAN, 0.0, 0.9, 0.99), DomainError);
  EXPECT_THROW(g.bellman_update(a, 0, 1.0, INFINITY, 0.9, 0.99), DomainError);
  EXPECT_THROW(g.open_gate(a, 1), PreconditionError);
  EXPECT_THROW(g.bellman_update(a, 2, 1.0, 0.0, 0.9, 0.99), PreconditionError);
}

TEST(SynapticGraph, ValueTracksMaxQ) {
  SynapticGraph g(3, 0.9);
  const NeuronId a = g.spawn_neuron("a");
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const int action = rng.below(3);
    g.open_gate(a, action);
    g.bellman_update(a, action, rng.uniform(-10, 10), rng.uniform(-5, 5), 0.5, 0.9);
    double best = g.neuron(a).synapses[0].q_value;
    for (const auto& s : g.neuron(a).synapses) best = std::max(best, s.q_value);
    EXPECT_EQ(g.neuron(a).value, best);
  }
}

TEST(SynapticGraph, StatsAndFanIn) {
  SynapticGraph g(2, 0.99);
  EXPECT_EQ(g.stats().neurons, 0u);
  EXPECT_EQ(g.stats().avg_fan_in, 0.0);
  EXPECT_EQ(g.stats().parameter_count, 0u);
  const NeuronId a = g.spawn_neuron("a");
  EXPECT_EQ(g.stats().avg_fan_in, 0.0);
  const NeuronId b = g.spawn_neuron("b");
  g.open_gate(a, 1);
  g.connect(a, 1, b);
  g.bellman_update(a, 1, 1.0, 0.0, 0.9, 0.99);
  g.open_gate(b, 0);
  g.connect(b, 0, b);
  const NetworkStats st = g.stats();
  EXPECT_EQ(st.neurons, 2u);
  EXPECT_EQ(st.edges, 2u);
  EXPECT_EQ(st.avg_fan_in, 1.0);
  EXPECT_EQ(st.parameter_count, 8u);
}

TEST(SynapticGraph, SnapshotMarksGreedyEdges) {
  SynapticGraph g(2, 0.99);
  const NeuronId a = g.spawn_neuron("a"), b = g.spawn_neuron("b");
  g.open_gate(a, 1);
  g.connect(a, 1, b);
  g.bellman_update(a, 1, 1.0, 0.0, 0.9, 0.99);
  const GraphSnapshot s = g.snapshot();
  ASSERT_EQ(s.edges.size(), 1u);
  EXPECT_EQ(s.edges[0].source, "a");
  EXPECT_EQ(s.edges[0].target, "b");
  EXPECT_EQ(s.edges[0].action, 1);
  EXPECT_DOUBLE_EQ(s.edges[0].q, 0.9);
  EXPECT_TRUE(s.edges[0].greedy);
  EXPECT_FALSE(s.edges[0].gate_open);
  EXPECT_EQ(s.nodes[1].fan_in, 1);
}

TEST(NetworkStats, ParameterCount) {
  static_assert(parameter_count(250, 2) == 1000);
  static_assert(parameter_count(10000, 2) == 40000);
  EXPECT_EQ(parameter_count(0, 2), 0u);
}

TEST(Kernel, GammaToTau) {
  EXPECT_NEAR(gamma_to_tau(0.99), 99.49916247, 1e-6);
  EXPECT_NEAR(gamma_to_tau(std::exp(-1.0)), 1.0, 1e-15);
  EXPECT_THROW(gamma_to_tau(0.0), DomainError);
  EXPECT_THROW(gamma_to_tau(1.0), DomainError);
  EXPECT_THROW(gamma_to_tau(1.5), DomainError);
  EXPECT_THROW(SynapticGraph(2, 1.0), DomainError);
  EXPECT_NEAR(tau_to_gamma(gamma_to_tau(0.7)), 0.7, 1e-15);
}

TEST(Kernel, ImpulseResponse) {
  const double tau = gamma_to_tau(0.99);
  const std::vector<double> impulse{1.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(synaptic_filter(impulse, tau, 0), 1.0);
  EXPECT_NEAR(synaptic_filter(impulse, tau, 1), 0.99, 1e-12);
  EXPECT_THROW(synaptic_filter(impulse, tau, 3), PreconditionError);
}

TEST(Kernel, FilterMatchesDirectSum) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const double tau = rng.uniform(0.5, 50.0);
    std::vector<double> train(20);
    for (auto& v : train) v = rng.canonical() < 0.3 ? rng.uniform(0.0, 2.0) : 0.0;
    for (std::size_t t = 0; t < train.size(); ++t) {
      double expected = 0.0;
      for (std::size_t x = 0; x <= t; ++x) {
        expected += train[x] * std::pow(std::exp(-1.0 / tau), static_cast<double>(t - x));
      }
      EXPECT_NEAR(synaptic_filter(train, tau, t), expected, 1e-12);
    }
  }
  const double tau = 3.0;
  const std::vector<double> two{1.0, 1.0, 0.0};
  EXPECT_NEAR(synaptic_filter(two, tau, 2), std::exp(-2.0 / tau) + std::exp(-1.0 / tau), 1e-15);
}
