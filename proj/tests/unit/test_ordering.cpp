#include <gtest/gtest.h>

#include "eunomia/ordering.hpp"
#include "support/dag_builder.hpp"
#include "support/oracles.hpp"

using namespace eunomia;
using test::NamedDag;

namespace {

std::vector<std::string> names(const NamedDag& d, const std::vector<ConfirmedEntry>& seq) {
  std::vector<std::string> out;
  for (const auto& e : seq) out.push_back(d.name_of(e.id));
  return out;
}

}  // namespace

TEST(Ordering, Fig5StrictAndInclusive) {
  const auto d = test::fig5_dag();
  const auto& dag = d.dag();
  ASSERT_EQ(dag.size(), 18u);
  EXPECT_EQ(d.name_of(dag.main_at(ChainIndex{0}, confirmed_height(dag, ChainIndex{0}, 2))), "A4");
  EXPECT_EQ(d.name_of(dag.main_at(ChainIndex{1}, confirmed_height(dag, ChainIndex{1}, 2))), "B7");
  EXPECT_EQ(d.name_of(dag.main_at(ChainIndex{2}, confirmed_height(dag, ChainIndex{2}, 2))), "C3");
  EXPECT_EQ(synchronized_bar(dag, 2), 4u);

  const auto view = global_sequence(dag, 2);
  EXPECT_EQ(view.bar, 4u);
  const std::vector<std::string> strict{"A1", "C1", "A3", "B1", "B3"};
  EXPECT_EQ(names(d, view.sequence), strict);
  EXPECT_EQ(names(d, test::oracle_sequence(dag, 2)), strict);

  // The boundary-inclusive reading reproduces the published order.
  const std::vector<std::string> inclusive{"A1", "C1", "A3", "B1", "B3", "A4", "B5"};
  EXPECT_EQ(names(d, test::oracle_sequence(dag, 2, true)), inclusive);

  OrderingTracker tracker(3, 2);
  tracker.update(dag);
  EXPECT_EQ(tracker.sequence(), view.sequence);
  EXPECT_EQ(tracker.bar(), 4u);
}

// The chain that attains the bar contributes its last confirmed block with
// clock == bar, so under the strict rule that block is never ordered. In the
// figure this block is A4, hence the published output cannot be strict.
TEST(Ordering, BarChainTipIsNeverStrictlyOrdered) {
  Rng rng(5150);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    const auto g = test::generate_dag(rng, 150, 4);
    BlockDag dag(ProtocolParams{g.m, 0});
    for (auto i : g.arrival) dag.insert_block(g.blocks[i]);
    for (std::uint32_t T : {1u, 2u, 4u}) {
      const auto view = global_sequence(dag, T);
      if (view.bar == 0) continue;
      for (std::uint32_t c = 0; c < g.m; ++c) {
        const auto h = confirmed_height(dag, ChainIndex{c}, T);
        const auto& last = dag.main_at(ChainIndex{c}, h);
        if (static_cast<std::uint64_t>(dag.clock_of(last)->v) != view.bar) continue;
        ++checked;
        for (const auto& e : view.sequence) EXPECT_NE(e.id, last);
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Ordering, EmptyChainBlocksEverything) {
  NamedDag d(2);
  d.add("A1", "A0", "A0");
  d.add("A2", "A1", "A1");
  d.add("A3", "A2", "A2");
  EXPECT_EQ(synchronized_bar(d.dag(), 1), 0u);
  EXPECT_TRUE(global_sequence(d.dag(), 1).sequence.empty());
  d.add("B1", "B0", "A3");
  d.add("B2", "B1", "B1");
  // E(A) = A1 A2 (clocks 1 2), E(B) = B1 (clock 4): bar 2, L = A1.
  const auto view = global_sequence(d.dag(), 1);
  EXPECT_EQ(view.bar, 2u);
  ASSERT_EQ(view.sequence.size(), 1u);
  EXPECT_EQ(view.sequence[0].id, d.id("A1"));
}

TEST(Ordering, TieBreakByChainIndex) {
  NamedDag d(3);
  d.add("C1", "C0", "A0");
  d.add("A1", "A0", "A0");
  d.add("B1", "B0", "A0");
  for (const char* c : {"A", "B", "C"}) {
    const std::string p = std::string(c) + "1", n = std::string(c) + "2";
    d.add(n, p, "C1");
  }
  for (const char* c : {"A", "B", "C"}) d.add(std::string(c) + "3", std::string(c) + "2", "C2");
  const auto view = global_sequence(d.dag(), 1);
  EXPECT_EQ(names(d, view.sequence), (std::vector<std::string>{"A1", "B1", "C1"}));
}

TEST(Ordering, PrefixHelpers) {
  std::vector<ConfirmedEntry> a{{{1, ChainIndex{0}}, Hash{}}, {{2, ChainIndex{1}}, digest("x")}};
  std::vector<ConfirmedEntry> b{a[0]};
  EXPECT_TRUE(is_prefix(b, a));
  EXPECT_FALSE(is_prefix(a, b));
  EXPECT_TRUE(is_prefix(a, a));
  EXPECT_FALSE(conflicting(a, b));
  b.push_back({{2, ChainIndex{1}}, digest("y")});
  EXPECT_TRUE(conflicting(a, b));
}

// Corpus check: memoized clocks against the recursive oracle, rejection of
// every rule-breaking block, global_sequence and the incremental tracker
// against collect-filter-sort after every insertion.
TEST(Ordering, CorpusMatchesOracles) {
  Rng rng(2024);
  std::size_t invalid_seen = 0;
  for (int k = 0; k < 200; ++k) {
    const auto g = test::generate_dag(rng, 120, 8);
    const std::uint32_t T = 1 + static_cast<std::uint32_t>(rng.below(4));
    BlockDag dag(ProtocolParams{g.m, 0});
    OrderingTracker tracker(g.m, T);
    test::BlockMap all;
    for (std::uint32_t c = 0; c < g.m; ++c)
      all[genesis_id(ChainIndex{c})] = std::make_shared<const Block>(genesis_block(ChainIndex{c}));
    for (std::size_t step = 0; step < g.arrival.size(); ++step) {
      const auto i = g.arrival[step];
      dag.insert_block(g.blocks[i]);
      all[g.blocks[i]->id] = g.blocks[i];
      tracker.update(dag);
      ASSERT_EQ(tracker.sequence(), test::oracle_sequence(dag, T)) << "dag " << k << " step " << step;
      ASSERT_EQ(tracker.bar(), test::oracle_bar(dag, T));
    }
    EXPECT_EQ(global_sequence(dag, T).sequence, test::oracle_sequence(dag, T));
    for (std::size_t i = 0; i < g.blocks.size(); ++i) {
      const auto& id = g.blocks[i]->id;
      EXPECT_EQ(dag.contains(id), g.valid[i]);
      if (!g.valid[i]) ++invalid_seen;
      if (g.valid[i]) EXPECT_EQ(dag.clock_of(id)->v, *test::oracle_clock(all, id));
      else EXPECT_FALSE(test::oracle_clock(all, id).has_value());
    }
  }
  EXPECT_GT(invalid_seen, 50u);
}

TEST(Ordering, TrackerAppendsWhenConfirmedChainsOnlyExtend) {
  test::DagBuilder b(3, 0, 9);
  BlockDag dag(b.params());
  OrderingTracker tracker(3, 2);
  Rng rng(3);
  std::uint64_t last_bar = 0;
  std::size_t last_len = 0;
  for (int k = 0; k < 300; ++k) {
    const auto c = static_cast<std::uint32_t>(rng.below(3));
    auto blk = b.make(c, dag.tip(ChainIndex{c}), dag.select_sync_block());
    dag.insert_block(blk);
    const auto before = tracker.sequence();
    const auto up = tracker.update(dag);
    EXPECT_FALSE(up.rewritten);
    EXPECT_GE(tracker.bar(), last_bar);
    EXPECT_TRUE(is_prefix(before, tracker.sequence()));
    EXPECT_EQ(tracker.sequence().size(), last_len + up.appended);
    last_bar = tracker.bar();
    last_len = tracker.sequence().size();
  }
  EXPECT_GT(last_len, 200u);
}

TEST(Ordering, DeepReorgIsReportedAsRewrite) {
  NamedDag d(1);
  d.add("A1", "A0", "A0");
  d.add("A2", "A1", "A1");
  d.add("A3", "A2", "A2");
  OrderingTracker tracker(1, 1);
  tracker.update(d.dag());
  EXPECT_EQ(tracker.sequence().size(), 1u);  // A1 (A2 has clock == bar)
  // A competing branch from genesis overtakes.
  d.add("Ab", "A0", "A0");
  d.add("Ac", "Ab", "Ab");
  d.add("Ad", "Ac", "Ac");
  EXPECT_FALSE(tracker.update(d.dag()).rewritten);
  d.add("Ae", "Ad", "Ad");
  const auto up = tracker.update(d.dag());
  EXPECT_TRUE(up.rewritten);
  EXPECT_EQ(tracker.rewrites(), 1u);
  EXPECT_EQ(tracker.sequence(), test::oracle_sequence(d.dag(), 1));
}

// B's last confirmed block sets the bar; replacing B's branch above the
// included part of L lowers it, which must rewrite L.
TEST(Ordering, ReorgAboveIncludedBlocksCanLowerTheBar) {
  NamedDag d(2);
  d.add("A1", "A0", "A0");
  for (int h = 2; h <= 6; ++h) d.add("A" + std::to_string(h), "A" + std::to_string(h - 1), "A" + std::to_string(h - 1));
  d.add("B1", "B0", "A4");
  d.add("B2", "B1", "B1");
  OrderingTracker tracker(2, 1);
  tracker.update(d.dag());
  EXPECT_EQ(tracker.bar(), 5u);
  EXPECT_EQ(names(d, tracker.sequence()), (std::vector<std::string>{"A1", "A2", "A3", "A4"}));

  d.add("Bx", "B0", "A1");
  d.add("By", "Bx", "Bx");
  EXPECT_FALSE(tracker.update(d.dag()).rewritten);
  d.add("Bz", "By", "By");
  const auto up = tracker.update(d.dag());
  EXPECT_TRUE(up.rewritten);
  EXPECT_EQ(tracker.bar(), 3u);
  EXPECT_EQ(names(d, tracker.sequence()), (std::vector<std::string>{"A1", "A2", "Bx"}));
  EXPECT_EQ(tracker.sequence(), test::oracle_sequence(d.dag(), 1));

  d.add("A7", "A6", "Bz");
  d.add("Bw", "Bz", "A7");
  tracker.update(d.dag());
  EXPECT_EQ(tracker.sequence(), test::oracle_sequence(d.dag(), 1));
}
