#include <gtest/gtest.h>

#include <cmath>

#include "eunomia/mining.hpp"
#include "eunomia/sim/metrics.hpp"

using namespace eunomia;

namespace {

Transaction tx(std::uint64_t coin, std::uint32_t shard, std::uint64_t fee) {
  return Transaction({{allocation_outpoint(coin), ChainIndex{shard}}}, {{100, 1, ChainIndex{shard}}}, fee);
}

}  // namespace

TEST(Mempool, SelectionOrderIsFeeThenId) {
  Mempool pool(2);
  for (std::uint64_t i = 0; i < 10; ++i) EXPECT_TRUE(pool.add(tx(i, i % 2, i % 3)));
  EXPECT_FALSE(pool.add(tx(0, 0, 0)));  // duplicate
  const auto sel = pool.select(ChainIndex{0}, 10);
  ASSERT_EQ(sel.size(), 5u);
  for (std::size_t i = 1; i < sel.size(); ++i) {
    const auto& a = sel[i - 1];
    const auto& b = sel[i];
    EXPECT_TRUE(a.fee() > b.fee() || (a.fee() == b.fee() && a.id() < b.id()));
  }
  EXPECT_EQ(pool.select(ChainIndex{0}, 2).size(), 2u);
  EXPECT_TRUE(pool.remove(sel[0].id()));
  EXPECT_FALSE(pool.contains(sel[0].id()));
  EXPECT_EQ(pool.size(ChainIndex{0}), 4u);
}

TEST(Mempool, CapacityEvictsCheapest) {
  Mempool pool(1, 2);
  EXPECT_TRUE(pool.add(tx(0, 0, 5)));
  EXPECT_TRUE(pool.add(tx(1, 0, 1)));
  EXPECT_FALSE(pool.add(tx(2, 0, 0)));
  EXPECT_TRUE(pool.add(tx(3, 0, 9)));
  EXPECT_EQ(pool.size(), 2u);
  EXPECT_FALSE(pool.contains(tx(1, 0, 1).id()));
}

TEST(Mempool, RejectsMalformed) {
  Mempool pool(2);
  EXPECT_FALSE(pool.add(tx(0, 3, 0)));
  EXPECT_FALSE(pool.add(Transaction({}, {}, 0)));
}

TEST(Mining, SealedBlockCarriesPowSlotAndProof) {
  const ProtocolParams params{3, 4};
  BlockDag view(params);
  Rng rng(5);
  std::vector<std::vector<Transaction>> payloads(3);
  payloads[1] = {tx(0, 1, 1)};
  const auto cand = assemble_candidate(view, payloads, 7, 1);
  for (std::uint32_t target = 0; target < 3; ++target) {
    const auto b = seal_block(cand, params, rng, ChainIndex{target});
    EXPECT_EQ(b.chain.value, target);
    EXPECT_GE(b.id.leading_zero_bits(), 4u);
    EXPECT_LT(raw_chain_slot(b.id, 3), 3u);
    EXPECT_EQ(b.transactions.size(), target == 1 ? 1u : 0u);
    EXPECT_EQ(b.parent_ref, genesis_id(ChainIndex{target}));
    EXPECT_TRUE(verify_leaf(b.header.metadata_root, target, metadata_leaf(b.parent_ref, b.tx_root), b.chain_slot_proof));
    EXPECT_EQ(view.insert_block(b).outcome, InsertOutcome::Accepted);
  }
}

TEST(Mining, NonceMissesAreRejected) {
  const ProtocolParams params{3, 0};
  BlockDag view(params);
  const auto cand = assemble_candidate(view, std::vector<std::vector<Transaction>>(3), 0, 1);
  int slot_misses = 0;
  for (std::uint64_t nonce = 0; nonce < 400; ++nonce) {
    BlockHeader h = cand.header;
    h.nonce = nonce;
    const bool expect = raw_chain_slot(block_id(h), 3) < 3;
    EXPECT_EQ(block_for_nonce(cand, nonce, params).has_value(), expect);
    slot_misses += !expect;
  }
  // Raw slot 3 of 4 is wasted: about a quarter of nonces.
  EXPECT_GT(slot_misses, 60);
  EXPECT_LT(slot_misses, 140);
}

TEST(Mining, SlotsAreUniform) {
  // Seal without a target and check chain counts with a chi-square test.
  const ProtocolParams params{5, 0};
  BlockDag view(params);
  Rng rng(11);
  std::vector<std::uint64_t> counts(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const auto cand = assemble_candidate(view, std::vector<std::vector<Transaction>>(5), 0, static_cast<std::uint64_t>(i));
    ++counts[seal_block(cand, params, rng).chain.value];
  }
  EXPECT_GT(sim::chi_square_p(sim::chi_square_uniform(counts), 4), 0.001);
}

TEST(Mining, SimulatedQueriesAreBernoulli) {
  const ProtocolParams params{2, 0};
  BlockDag view(params);
  Rng rng(3);
  const MiningParams mining{0.2, PowMode::Simulated};
  int builds = 0;
  auto build = [&] {
    ++builds;
    return assemble_candidate(view, std::vector<std::vector<Transaction>>(2), 0, 1);
  };
  std::size_t found = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) found += try_mine(build, 1, params, mining, rng).size();
  const double sd = std::sqrt(trials * 0.2 * 0.8);
  EXPECT_NEAR(static_cast<double>(found), trials * 0.2, 4 * sd);
  EXPECT_EQ(static_cast<std::size_t>(builds), found);  // candidates are built only on success
}

TEST(Mining, SequentialQueriesSeeEarlierBlocks) {
  const ProtocolParams params{1, 0};
  BlockDag view(params);
  Rng rng(3);
  const MiningParams mining{1.0, PowMode::Simulated};
  auto build = [&] { return assemble_candidate(view, std::vector<std::vector<Transaction>>(1), 0, 1); };
  const auto blocks = try_mine(build, 4, params, mining, rng,
                               [&](const BlockPtr& b) { EXPECT_EQ(view.insert_block(b).outcome, InsertOutcome::Accepted); });
  ASSERT_EQ(blocks.size(), 4u);
  EXPECT_EQ(view.tip_height(ChainIndex{0}), 4u);
  for (std::size_t i = 1; i < blocks.size(); ++i) EXPECT_EQ(blocks[i]->parent_ref, blocks[i - 1]->id);
}

TEST(Mining, LeadingZerosModeGrindsNonces) {
  const ProtocolParams params{2, 3};
  BlockDag view(params);
  Rng rng(8);
  const MiningParams mining{0.0, PowMode::LeadingZeros};
  auto build = [&] { return assemble_candidate(view, std::vector<std::vector<Transaction>>(2), 0, 1); };
  std::size_t found = 0;
  const unsigned queries = 8000;
  for (const auto& b : try_mine(build, queries, params, mining, rng)) {
    EXPECT_GE(b->id.leading_zero_bits(), 3u);
    ++found;
  }
  const double p = 1.0 / 8;
  EXPECT_NEAR(static_cast<double>(found), queries * p, 4 * std::sqrt(queries * p * (1 - p)));
}
