#include <gtest/gtest.h>

#include "eunomia/ledger.hpp"
#include "support/dag_builder.hpp"
#include "support/oracles.hpp"

using namespace eunomia;
using test::NamedDag;

namespace {

Transaction pay(std::vector<OutPoint> ins, ChainIndex shard, std::vector<TxOutput> outs, std::uint64_t fee = 0) {
  std::vector<TxInput> inputs;
  for (const auto& o : ins) inputs.push_back({o, shard});
  return Transaction(std::move(inputs), std::move(outs), fee);
}

TxOutput out(std::uint64_t v, std::uint32_t owner, std::uint32_t shard) { return {v, owner, ChainIndex{shard}}; }

LedgerConfig two_chain_config(std::uint64_t reward = 0) {
  LedgerConfig c;
  c.m = 2;
  c.T = 1;
  c.block_reward = reward;
  c.genesis = {{100, 1, ChainIndex{0}}, {100, 2, ChainIndex{1}}, {50, 3, ChainIndex{0}}};
  return c;
}

void sync_ledger(LedgerState& ledger, OrderingTracker& tracker, const BlockDag& dag) {
  const auto before = tracker.sequence().size();
  tracker.update(dag);
  const auto& seq = tracker.sequence();
  ledger.apply_confirmed(std::span(seq).subspan(before), dag);
  ledger.refresh_overlay(dag);
}

}  // namespace

TEST(Ledger, GenesisAndDigest) {
  LedgerState a(two_chain_config()), b(two_chain_config());
  EXPECT_EQ(a.total_value(), 250u);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_EQ(a.shard_balance(1).at(ChainIndex{0}), 100u);
  EXPECT_EQ(a.shard_balance(2).at(ChainIndex{1}), 100u);
  auto bad = two_chain_config();
  bad.genesis.push_back({1, 1, ChainIndex{5}});
  EXPECT_THROW(LedgerState{bad}, std::invalid_argument);
}

TEST(Ledger, ValidationReasons) {
  LedgerState l(two_chain_config());
  const auto g0 = allocation_outpoint(0), g1 = allocation_outpoint(1);
  EXPECT_EQ(l.validate_transaction(pay({g0}, ChainIndex{0}, {out(100, 9, 1)}), ChainIndex{0}), TxVerdict::valid());
  EXPECT_EQ(l.validate_transaction(pay({g0}, ChainIndex{0}, {out(90, 9, 0)}, 10), ChainIndex{0}), TxVerdict::valid());
  EXPECT_EQ(l.validate_transaction(pay({g0}, ChainIndex{0}, {out(90, 9, 0)}), ChainIndex{0}).reason,
            InvalidReason::ValueImbalance);
  EXPECT_EQ(l.validate_transaction(pay({g0}, ChainIndex{0}, {out(100, 9, 0)}), ChainIndex{1}).reason,
            InvalidReason::WrongShard);
  // Claimed shard differs from the referenced output's shard.
  EXPECT_EQ(l.validate_transaction(pay({g1}, ChainIndex{0}, {out(100, 9, 0)}), ChainIndex{0}).reason,
            InvalidReason::WrongShard);
  EXPECT_EQ(l.validate_transaction(pay({{digest("nope"), 0}}, ChainIndex{0}, {out(1, 9, 0)}), ChainIndex{0}).reason,
            InvalidReason::UnknownInput);
  EXPECT_EQ(l.validate_transaction(pay({g0, g0}, ChainIndex{0}, {out(200, 9, 0)}), ChainIndex{0}).reason,
            InvalidReason::Malformed);
  EXPECT_EQ(l.validate_transaction(Transaction({}, {out(1, 1, 0)}, 0), ChainIndex{0}).reason, InvalidReason::Malformed);
}

TEST(Ledger, ConfirmedSpendAndDoubleSpend) {
  NamedDag d(2);
  const auto g0 = allocation_outpoint(0);
  const auto t1 = pay({g0}, ChainIndex{0}, {out(60, 5, 0), out(40, 6, 1)});
  const auto t2 = pay({g0}, ChainIndex{0}, {out(100, 7, 0)});  // same input
  d.add("A1", "A0", "A0", {t1});
  d.add("A2", "A1", "A1", {t2});
  d.add("B1", "B0", "A2");
  d.add("A3", "A2", "B1");
  d.add("B2", "B1", "A3");
  d.add("A4", "A3", "B2");
  d.add("B3", "B2", "A4");

  LedgerState l(two_chain_config());
  OrderingTracker tracker(2, 1);
  tracker.update(d.dag());
  const auto applied = l.apply_confirmed(tracker.sequence(), d.dag());
  ASSERT_GE(applied.size(), 2u);
  EXPECT_EQ(applied[0].tx_id, t1.id());
  EXPECT_EQ(applied[0].verdict, TxVerdict::valid());
  EXPECT_EQ(applied[1].tx_id, t2.id());
  EXPECT_EQ(applied[1].verdict.reason, InvalidReason::DoubleSpend);
  EXPECT_EQ(l.final_verdict(t1.id()), TxVerdict::valid());
  EXPECT_EQ(l.final_verdict(t2.id())->reason, InvalidReason::DoubleSpend);
  EXPECT_EQ(l.confirmed_invalid_count(), 1u);
  EXPECT_EQ(l.shard_balance(6).at(ChainIndex{1}), 40u);
  EXPECT_EQ(l.total_value(), l.expected_total());

  // Non-extending input is refused.
  EXPECT_THROW(l.apply_confirmed(std::span(tracker.sequence()).first(1), d.dag()), std::logic_error);
}

TEST(Ledger, CoinbaseAndFees) {
  NamedDag d(1);
  LedgerConfig c;
  c.m = 1;
  c.T = 1;
  c.block_reward = 50;
  c.genesis = {{100, 1, ChainIndex{0}}};
  const auto t = pay({allocation_outpoint(0)}, ChainIndex{0}, {out(97, 2, 0)}, 3);
  d.add("A1", "A0", "A0", {t}, 42);
  d.add("A2", "A1", "A1");
  d.add("A3", "A2", "A2");
  LedgerState l(c);
  OrderingTracker tracker(1, 1);
  tracker.update(d.dag());
  l.apply_confirmed(tracker.sequence(), d.dag());
  ASSERT_EQ(l.applied_count(), 1u);
  const auto* cb = l.find_confirmed(coinbase_outpoint(d.id("A1")));
  ASSERT_NE(cb, nullptr);
  EXPECT_EQ(cb->value, 53u);
  EXPECT_EQ(cb->owner, 42u);
  EXPECT_EQ(l.total_value(), 150u);
  EXPECT_EQ(l.total_value(), l.expected_total());
}

// A cross-shard payment spent on the receiving chain before the paying block
// is globally ordered; the paying block is then orphaned.
TEST(Ledger, CrossShardCascadeIsVoidedOnReorg) {
  NamedDag d(2);
  const auto g0 = allocation_outpoint(0);
  const auto t1 = pay({g0}, ChainIndex{0}, {out(100, 8, 1)});
  const auto t2 = pay({t1.output_point(0)}, ChainIndex{1}, {out(100, 9, 1)});
  const auto t3 = pay({t2.output_point(0)}, ChainIndex{1}, {out(100, 10, 1)});

  LedgerState l(two_chain_config());
  OrderingTracker tracker(2, 3);
  d.add("A1", "A0", "A0", {t1});
  sync_ledger(l, tracker, d.dag());
  EXPECT_TRUE(l.in_overlay(t1.id()));
  EXPECT_EQ(l.validate_transaction(t2, ChainIndex{1}), TxVerdict::provisional());

  d.add("B1", "B0", "A1", {t2});
  d.add("B2", "B1", "B1", {t3});
  sync_ledger(l, tracker, d.dag());
  EXPECT_TRUE(l.in_overlay(t2.id()));
  EXPECT_TRUE(l.in_overlay(t3.id()));
  EXPECT_EQ(l.provisional_balance(10).at(ChainIndex{1}), 100u);

  // Longer fork on chain A without t1.
  d.add("Ab", "A0", "A0");
  d.add("Ac", "Ab", "Ab");
  sync_ledger(l, tracker, d.dag());
  EXPECT_FALSE(d.dag().on_main_chain(d.id("A1")));
  EXPECT_FALSE(l.in_overlay(t1.id()));
  EXPECT_FALSE(l.in_overlay(t2.id()));
  EXPECT_FALSE(l.in_overlay(t3.id()));
  ASSERT_EQ(l.void_events().size(), 3u);
  for (const auto& e : l.void_events()) {
    EXPECT_EQ(e.origin_block, d.id("A1"));
    EXPECT_EQ(e.origin_chain, ChainIndex{0});
    EXPECT_LT(e.blocks_after, 3u);
  }
  EXPECT_EQ(l.provisional_balance(10).at(ChainIndex{1}), 0u);
  EXPECT_EQ(l.validate_transaction(t2, ChainIndex{1}).reason, InvalidReason::UnknownInput);
}

TEST(Ledger, PayloadFilterRules) {
  NamedDag d(2);
  const auto g0 = allocation_outpoint(0);
  const auto t1 = pay({g0}, ChainIndex{0}, {out(100, 8, 1)});
  d.add("A1", "A0", "A0", {t1});  // clock 1
  LedgerState l(two_chain_config());
  l.refresh_overlay(d.dag());

  const auto t2 = pay({t1.output_point(0)}, ChainIndex{1}, {out(100, 9, 1)});
  {
    // Origin (1, A) precedes (2, B) and (1, B).
    PayloadFilter f(l, ChainIndex{1}, 2);
    EXPECT_TRUE(f(t2));
    EXPECT_FALSE(f(t2));  // repeated spend inside the payload
    EXPECT_TRUE(f(pay({t2.output_point(0)}, ChainIndex{1}, {out(100, 3, 0)})));  // chained inside the payload
    PayloadFilter same_clock(l, ChainIndex{1}, 1);
    EXPECT_TRUE(same_clock(t2));
  }
  {
    // A candidate ordered before its input's origin would spend it too early.
    PayloadFilter f(l, ChainIndex{1}, 0);
    EXPECT_FALSE(f(t2));
  }
  {
    PayloadFilter f(l, ChainIndex{0}, 5);
    EXPECT_FALSE(f(t2));  // wrong chain
    EXPECT_FALSE(f(t1));  // already spent in the overlay
    EXPECT_TRUE(f(pay({allocation_outpoint(2)}, ChainIndex{0}, {out(50, 1, 0)})));
  }
}

// Random dags carrying random payments: the library ledger, fed node L,
// agrees with the sequential interpreter on every verdict and on the final
// utxo set.
TEST(Ledger, MatchesNaiveInterpreterOnRandomHistories) {
  Rng rng(31337);
  std::size_t accepted = 0, refused = 0;
  for (int run = 0; run < 60; ++run) {
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng.below(4));
    const std::uint32_t T = 1 + static_cast<std::uint32_t>(rng.below(3));
    LedgerConfig cfg;
    cfg.m = m;
    cfg.T = T;
    cfg.block_reward = rng.bernoulli(0.5) ? 25 : 0;
    struct Coin {
      OutPoint op;
      std::uint64_t value;
      std::uint32_t shard;
    };
    std::vector<Coin> coins;
    for (std::uint32_t i = 0; i < 12; ++i) {
      cfg.genesis.push_back({100 + i, i, ChainIndex{i % m}});
      coins.push_back({allocation_outpoint(i), 100 + i, i % m});
    }
    test::DagBuilder b(m, 0, rng.next());
    BlockDag dag(b.params());
    LedgerState ledger(cfg);
    OrderingTracker tracker(m, T);
    const auto blocks = 20 + rng.below(60);
    for (std::uint64_t k = 0; k < blocks; ++k) {
      const auto c = static_cast<std::uint32_t>(rng.below(m));
      std::vector<Transaction> txs;
      const auto ntx = rng.below(4);
      for (std::uint64_t t = 0; t < ntx; ++t) {
        std::vector<OutPoint> ins;
        std::uint64_t total = 0;
        const std::uint32_t claim = rng.bernoulli(0.9) ? c : static_cast<std::uint32_t>(rng.below(m));
        for (std::uint64_t n = 0, want = 1 + rng.below(2); n < want && !coins.empty(); ++n) {
          const auto& coin = coins[rng.below(coins.size())];
          if (rng.bernoulli(0.85) && coin.shard != claim) continue;
          ins.push_back(coin.op);
          total += coin.value;
        }
        if (ins.empty()) continue;
        const std::uint64_t fee = rng.below(3);
        std::vector<TxOutput> outs;
        std::uint64_t left = total > fee ? total - fee : 0;
        if (rng.bernoulli(0.05)) left += 1;  // imbalance
        const auto nout = 1 + rng.below(3);
        for (std::uint64_t o = 0; o < nout; ++o) {
          const auto v = o + 1 == nout ? left : rng.below(left + 1);
          left -= v;
          outs.push_back(out(v, static_cast<std::uint32_t>(rng.below(20)), static_cast<std::uint32_t>(rng.below(m))));
        }
        Transaction tx = pay(ins, ChainIndex{claim}, outs, fee);
        for (std::uint32_t p = 0; p < tx.outputs().size(); ++p)
          coins.push_back({tx.output_point(p), tx.outputs()[p].value, tx.outputs()[p].shard.value});
        txs.push_back(std::move(tx));
      }
      // Occasionally fork off an older block.
      Hash parent = dag.tip(ChainIndex{c});
      if (rng.bernoulli(0.15) && dag.tip_height(ChainIndex{c}) > 0)
        parent = dag.main_at(ChainIndex{c}, dag.tip_height(ChainIndex{c}) - 1);
      auto blk = b.make(c, parent, dag.select_sync_block(), std::move(txs), static_cast<std::uint32_t>(rng.below(5)));
      dag.insert_block(blk);
      sync_ledger(ledger, tracker, dag);
      ASSERT_EQ(ledger.total_value(), ledger.expected_total());
    }

    test::NaiveLedger naive(m, cfg.block_reward, genesis_utxos(cfg));
    std::vector<bool> naive_flags;
    for (const auto& e : tracker.sequence()) {
      const auto flags = naive.apply(*dag.find(e.id));
      naive_flags.insert(naive_flags.end(), flags.begin(), flags.end());
    }
    LedgerState fresh(cfg);
    const auto applied = fresh.apply_confirmed(tracker.sequence(), dag);
    ASSERT_EQ(applied.size(), naive_flags.size());
    for (std::size_t i = 0; i < applied.size(); ++i) {
      EXPECT_EQ(applied[i].verdict.ok(), naive_flags[i]) << run << "/" << i;
      (naive_flags[i] ? accepted : refused) += 1;
    }
    EXPECT_EQ(fresh.utxo_set(), naive.utxos);
    EXPECT_EQ(ledger.utxo_set(), naive.utxos);
    EXPECT_EQ(fresh.digest(), ledger.digest());
  }
  EXPECT_GT(accepted, 300u);
  EXPECT_GT(refused, 100u);
}
