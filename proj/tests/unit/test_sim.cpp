#include <gtest/gtest.h>

#include "eunomia/sim/metrics.hpp"
#include "eunomia/sim/simulator.hpp"
#include "eunomia/sim/trace.hpp"

using namespace eunomia;
using namespace eunomia::sim;

namespace {

SimConfig base(std::uint64_t seed = 3) {
  SimConfig c;
  c.m = 2;
  c.n = 8;
  c.rho = 0.25;
  c.delta = 2;
  c.mp = 0.08;
  c.T = 4;
  c.rounds = 400;
  c.seed = seed;
  c.tx_workload.rate = 2;
  c.tx_workload.clients = 16;
  c.spv_samples = 20;
  return c;
}

MetricsReport run(const SimConfig& c, SimOptions o = {}) {
  Simulator sim(c, o);
  sim.run();
  return collect_metrics(sim);
}

}  // namespace

TEST(SimConfig, JsonRoundTripAndValidation) {
  auto c = base();
  c.adversary.strategy = Strategy::Withhold;
  c.delay_policy = DelayPolicy::Split;
  c.genesis_allocation = {{5, 1, ChainIndex{1}}};
  const auto j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);

  auto unknown = j;
  unknown["mystery"] = 1;
  EXPECT_THROW(config_from_json(unknown), std::invalid_argument);
  auto bad_enum = j;
  bad_enum["adversary"]["strategy"] = "sneaky";
  EXPECT_THROW(config_from_json(bad_enum), std::invalid_argument);
  auto bad_rho = j;
  bad_rho["rho"] = 1.0;
  EXPECT_THROW(config_from_json(bad_rho), std::invalid_argument);
  auto bad_m = j;
  bad_m["m"] = 0;
  EXPECT_THROW(config_from_json(bad_m), std::invalid_argument);
  auto bad_type = j;
  bad_type["n"] = "ten";
  EXPECT_THROW(config_from_json(bad_type), std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/config.json"), std::invalid_argument);
}

TEST(Simulator, ZeroRounds) {
  auto c = base();
  c.rounds = 0;
  Simulator sim(c);
  sim.run();
  EXPECT_TRUE(sim.finished());
  EXPECT_TRUE(sim.mined().empty());
  EXPECT_EQ(sim.node(0).tracker.sequence().size(), 0u);
  EXPECT_FALSE(collect_metrics(sim).safety_violation());
}

TEST(Simulator, DeterministicPerSeed) {
  auto c = base(11);
  Simulator a(c), b(c);
  a.run();
  b.run();
  EXPECT_EQ(a.trace().digest(), b.trace().digest());
  EXPECT_EQ(a.node(0).ledger.digest(), b.node(0).ledger.digest());
  EXPECT_EQ(a.mined().size(), b.mined().size());
  c.seed = 12;
  Simulator other(c);
  other.run();
  EXPECT_NE(a.trace().digest(), other.trace().digest());
}

TEST(Simulator, StepwiseEqualsRun) {
  auto c = base(5);
  Simulator a(c), b(c);
  a.run();
  while (b.step()) {
  }
  EXPECT_TRUE(b.finished());
  EXPECT_EQ(a.trace().digest(), b.trace().digest());
}

TEST(Simulator, HonestDeliveryWithinDelta) {
  for (auto policy : {DelayPolicy::Min, DelayPolicy::Max, DelayPolicy::Split, DelayPolicy::Random}) {
    auto c = base(21);
    c.delta = 4;
    c.delay_policy = policy;
    const auto r = run(c);
    EXPECT_EQ(r.delta_violations, 0u) << to_string(policy);
    EXPECT_EQ(r.late_deliveries, 0u);
    EXPECT_EQ(r.undelivered, 0u);
    EXPECT_GT(r.messages_delivered, 0u);
  }
}

TEST(Simulator, EveryStrategyRunsSafely) {
  for (auto s : {Strategy::Honest, Strategy::DelayMax, Strategy::Withhold, Strategy::OrderingAttack, Strategy::DoubleSpend}) {
    for (std::uint64_t seed : {1u, 2u}) {
      auto c = base(seed);
      c.adversary.strategy = s;
      c.rounds = 600;
      const auto r = run(c);
      EXPECT_FALSE(r.safety_violation()) << to_string(s) << " seed " << seed;
      EXPECT_GT(r.consistency_checks, 0u);
      EXPECT_GT(r.l_length, 0u);
      EXPECT_EQ(r.spv_valid_then_voided, 0u);
    }
  }
}

TEST(Simulator, HonestOnlyQualityAndLiveness) {
  auto c = base(8);
  c.rho = 0;
  c.rounds = 800;
  const auto r = run(c);
  EXPECT_EQ(r.adversary_blocks, 0u);
  EXPECT_DOUBLE_EQ(r.honest_fraction_l, 1.0);
  EXPECT_DOUBLE_EQ(r.quality_windows_ok, 1.0);
  EXPECT_GE(r.liveness_fraction, 0.99);
  EXPECT_GT(r.tx_confirmed, 100u);
  EXPECT_EQ(r.tx_invalid_in_l, 0u);
}

TEST(Simulator, PiggybackReducesPendingInserts) {
  auto with = base(4);
  with.delta = 4;
  with.delay_policy = DelayPolicy::Random;
  with.rounds = 800;
  auto without = with;
  without.piggyback = false;
  const auto a = run(with), b = run(without);
  EXPECT_LT(a.pending_rate, b.pending_rate);
  EXPECT_FALSE(a.safety_violation());
  EXPECT_FALSE(b.safety_violation());
}

TEST(Simulator, PruningKeepsResults) {
  auto c = base(6);
  c.rounds = 800;
  auto pruned = c;
  pruned.prune_depth = 8;
  Simulator a(c), b(pruned);
  a.run();
  b.run();
  EXPECT_GT(b.stats().pruned, 0u);
  EXPECT_EQ(a.node(0).tracker.sequence(), b.node(0).tracker.sequence());
  EXPECT_EQ(a.node(0).ledger.digest(), b.node(0).ledger.digest());
  EXPECT_FALSE(collect_metrics(b).safety_violation());
}

TEST(Simulator, ReplayMatchesAndDetectsTampering) {
  auto c = base(9);
  c.rounds = 200;
  Simulator sim(c, SimOptions{true});
  sim.run();
  const auto metrics = to_json(collect_metrics(sim));
  auto doc = trace_document(sim, metrics);
  EXPECT_GT(doc["events"].size(), 0u);
  EXPECT_TRUE(replay_trace(doc).ok);

  auto edited = doc;
  edited["events"][0]["round"] = 12345;
  EXPECT_FALSE(replay_trace(edited).ok);
  auto reseeded = doc;
  reseeded["config"]["seed"] = 10;
  EXPECT_FALSE(replay_trace(reseeded).ok);
  EXPECT_FALSE(replay_trace(nlohmann::json::object()).ok);
}

TEST(Simulator, SpvVerdictsAgreeWithFullNode) {
  auto c = base(13);
  c.rounds = 800;
  c.spv_samples = 100;
  const auto r = run(c);
  EXPECT_GT(r.spv_samples, 0u);
  EXPECT_GT(r.spv_valid, 0u);
  EXPECT_EQ(r.spv_valid_then_voided, 0u);
  EXPECT_EQ(r.spv_invalid_then_valid, 0u);
}

TEST(Metrics, ChiSquare) {
  EXPECT_NEAR(chi_square_p(3.84146, 1), 0.05, 1e-4);
  EXPECT_NEAR(chi_square_p(18.307, 10), 0.05, 1e-4);
  EXPECT_DOUBLE_EQ(chi_square_uniform({10, 10, 10}), 0.0);
  EXPECT_DOUBLE_EQ(chi_square_uniform({20, 0}), 20.0);
}

TEST(Simulator, IncrementalOverlayEqualsRebuild) {
  for (auto strategy : {Strategy::Withhold, Strategy::DoubleSpend, Strategy::DelayMax}) {
    auto c = base(11);
    c.m = 3;
    c.rounds = 300;
    c.adversary.strategy = strategy;
    c.tx_workload.rate = 3;
    Simulator sim(c);
    std::size_t checked = 0;
    while (sim.step()) {
      for (std::size_t i = 0; i < sim.honest_count(); i += 2) {
        auto ledger = sim.node(i).ledger;
        ledger.refresh_overlay(sim.node(i).dag);
        ASSERT_TRUE(ledger.overlay_matches_rebuild(sim.node(i).dag)) << "round " << sim.round() << " node " << i;
        ++checked;
      }
    }
    EXPECT_GT(checked, 500u);
  }
}
