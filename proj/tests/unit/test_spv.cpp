#include <gtest/gtest.h>

#include "eunomia/spv.hpp"
#include "support/dag_builder.hpp"

using namespace eunomia;
using test::NamedDag;

namespace {

Transaction pay(OutPoint in, std::uint32_t shard, std::uint64_t value, std::uint32_t out_shard) {
  return Transaction({{in, ChainIndex{shard}}}, {{value, 7, ChainIndex{out_shard}}}, 0);
}

std::vector<UTXO> genesis() { return {UTXO{allocation_outpoint(0), 100, 1, ChainIndex{0}}}; }

// tx1 in a confirmed block of chain A pays to shard B; tx2 spends it in an
// unconfirmed block of B and pays to shard C; tx3 spends that in a block of
// C that is k deep.
struct Scenario {
  NamedDag d{3, 4};
  Transaction tx1 = pay(allocation_outpoint(0), 0, 100, 1);
  Transaction tx2 = pay(tx1.output_point(0), 1, 100, 2);
  Transaction tx3 = pay(tx2.output_point(0), 2, 100, 2);

  Scenario() {
    d.add("A1", "A0", "A0", {tx1});
    d.add("A2", "A1", "A1");
    d.add("A3", "A2", "A2");
    d.add("B1", "B0", "A3", {tx2});
    d.add("C1", "C0", "B1", {tx3});
    d.add("C2", "C1", "C1");
    d.add("C3", "C2", "C2");
  }
  LightClientState client(std::uint32_t k = 2, std::uint32_t T = 2) const {
    return export_light_client(d.dag(), k, T, genesis());
  }
};

}  // namespace

TEST(Spv, HeaderChains) {
  Scenario s;
  auto state = s.client();
  for (std::uint32_t c = 0; c < 3; ++c) EXPECT_TRUE(verify_header_chain(state, ChainIndex{c}));
  const auto empty = export_light_client(BlockDag(ProtocolParams{2, 0}), 1, 1, {});
  EXPECT_TRUE(verify_header_chain(empty, ChainIndex{0}));

  auto broken = state;
  broken.headers[0][1].chain_slot_proof.siblings[0].hash.bytes[0] ^= 1;
  EXPECT_FALSE(verify_header_chain(broken, ChainIndex{0}));
  auto unlinked = state;
  unlinked.headers[0][2].parent_ref = unlinked.headers[0][0].header.sync_ref;
  EXPECT_FALSE(verify_header_chain(unlinked, ChainIndex{0}));
  auto weak = state;
  weak.params.pow_bits = 40;
  EXPECT_FALSE(verify_header_chain(weak, ChainIndex{2}));
}

TEST(Spv, TracesAcrossUnconfirmedHop) {
  Scenario s;
  SpvProver prover(s.d.dag(), 2);
  const auto proof = prover.prove(s.tx3.id());
  ASSERT_TRUE(proof);
  // tx2's block is inside the window, tx1's is not: the trace stops at tx1.
  ASSERT_EQ(proof->ancestry.size(), 2u);
  EXPECT_EQ(spv_verify(s.client(), *proof), TxVerdict::valid());

  // The direct spend of a genesis coin needs no ancestry.
  const auto p1 = prover.prove(s.tx1.id());
  ASSERT_TRUE(p1);
  EXPECT_TRUE(p1->ancestry.empty());
  EXPECT_EQ(spv_verify(s.client(), *p1), TxVerdict::valid());

  EXPECT_FALSE(prover.prove(digest("unknown")));
}

TEST(Spv, DepthRules) {
  Scenario s;
  SpvProver prover(s.d.dag(), 2);
  // Target block with no successors.
  EXPECT_EQ(spv_verify(s.client(), *prover.prove(s.tx2.id())), TxVerdict::provisional());
  // Raising k beyond the target's depth.
  EXPECT_EQ(spv_verify(s.client(3, 2), *prover.prove(s.tx3.id())), TxVerdict::provisional());
  // A larger T puts tx1's block inside the window too; its input is genesis so
  // the trace still terminates.
  SpvProver deep(s.d.dag(), 3);
  const auto p = deep.prove(s.tx3.id());
  EXPECT_EQ(spv_verify(s.client(2, 3), *p), TxVerdict::valid());
}

TEST(Spv, OriginOnlyInWindowIsProvisional) {
  Scenario s;
  s.d.add("C4", "C3", "C3");
  const auto tx4 = pay(s.tx3.output_point(0), 2, 100, 2);
  s.d.add("C5", "C4", "C4", {tx4});
  s.d.add("C6", "C5", "C5");
  s.d.add("C7", "C6", "C6");
  // Light client that has not seen chain B's block B1.
  auto state = s.client();
  SpvProver prover(s.d.dag(), 2);
  auto proof = prover.prove(tx4.id());
  ASSERT_TRUE(proof);
  EXPECT_EQ(spv_verify(state, *proof), TxVerdict::valid());  // tx3's block is confirmed
  state.headers[1].clear();
  EXPECT_EQ(spv_verify(state, *prover.prove(s.tx3.id())), TxVerdict::provisional());
}

TEST(Spv, TamperedProofs) {
  Scenario s;
  SpvProver prover(s.d.dag(), 2);
  const auto good = *prover.prove(s.tx3.id());
  const auto state = s.client();

  auto missing = good;
  missing.ancestry.pop_back();
  missing.ancestry.erase(missing.ancestry.begin());
  EXPECT_EQ(spv_verify(state, missing).status, TxStatus::Invalid);

  auto wrong_block = good;
  wrong_block.target.block_ref = s.d.id("C2");
  EXPECT_EQ(spv_verify(state, wrong_block), TxVerdict::invalid(InvalidReason::Malformed));

  auto corrupt = state;
  corrupt.headers[0][0].chain_slot_proof.siblings[0].hash.bytes[3] ^= 0x10;
  EXPECT_EQ(spv_verify(corrupt, good), TxVerdict::invalid(InvalidReason::Malformed));

  // Every single-byte flip of the encoded proof either fails to decode or is
  // not accepted as valid.
  ByteWriter w;
  encode(w, good);
  const auto bytes = w.bytes();
  EXPECT_EQ(spv_verify(state, decode_spv_proof(bytes)), TxVerdict::valid());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    auto flipped = bytes;
    flipped[i] ^= 0x01;
    try {
      EXPECT_NE(spv_verify(state, decode_spv_proof(flipped)), TxVerdict::valid()) << "byte " << i;
    } catch (const DecodeError&) {
    }
  }
}

TEST(Spv, LightClientEncodingRoundTrip) {
  Scenario s;
  const auto state = s.client(2, 3);
  ByteWriter w;
  encode(w, state);
  const auto bytes = w.bytes();
  const auto back = decode_light_client(bytes);
  EXPECT_EQ(back.k, 2u);
  EXPECT_EQ(back.T, 3u);
  EXPECT_EQ(back.params.m, 3u);
  EXPECT_EQ(back.params.pow_bits, 4u);
  EXPECT_EQ(back.headers, state.headers);
  EXPECT_EQ(back.genesis, state.genesis);
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(decode_light_client(extra), DecodeError);
  EXPECT_THROW(decode_light_client(std::span(bytes).first(bytes.size() / 2)), DecodeError);
}
