#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "eunomia/blockdag.hpp"
#include "eunomia/ledger.hpp"
#include "eunomia/types.hpp"

namespace eunomia {

/// What a light client keeps per block: enough to check PoW, the parent
/// link and the chain slot, nothing about the transactions themselves.
struct HeaderRecord {
  BlockHeader header;
  Hash parent_ref;
  Hash tx_root;
  MerkleProof chain_slot_proof;
  auto operator<=>(const HeaderRecord&) const = default;
};

HeaderRecord header_record(const Block& block);

struct LightClientState {
  ProtocolParams params;
  /// The target block must have at least k blocks after it.
  std::uint32_t k = 6;
  /// Origins with at least T blocks after them count as confirmed.
  std::uint32_t T = 6;
  /// Main chain i without genesis, ordered by height.
  std::vector<std::vector<HeaderRecord>> headers;
  std::vector<UTXO> genesis;
};

/// A transaction with the two Merkle paths tying it to a block header: the
/// inner path to the block's tx root, the outer path to the metadata root.
struct InclusionProof {
  Transaction tx;
  Hash block_ref;
  MerkleProof inner;
  MerkleProof outer;
};

struct SpvProof {
  InclusionProof target;
  /// Inclusion proofs of the origin transactions of the inputs, followed
  /// backwards until each branch reaches a confirmed origin.
  std::vector<InclusionProof> ancestry;
};

bool verify_header_chain(const LightClientState& state, ChainIndex chain);

/// Light-client verification. Valid requires inclusion, depth >= k, and
/// every input traced to a genesis allocation or to an origin at depth >= T
/// through the supplied ancestry. Structurally broken proofs are
/// Invalid(malformed); missing depth or unknown origin blocks give
/// ProvisionallyValid.
class LightClient {
 public:
  explicit LightClient(LightClientState state);

  const LightClientState& state() const { return state_; }
  bool header_chain_valid(ChainIndex chain) const { return chain_ok_.at(chain.value); }
  /// Chain and number of blocks after `block`, if it is a known header.
  std::optional<std::pair<ChainIndex, std::uint32_t>> position(const Hash& block) const;
  TxVerdict verify(const SpvProof& proof) const;

 private:
  bool included(const InclusionProof& p, ChainIndex& chain, std::uint32_t& after) const;

  LightClientState state_;
  std::vector<bool> chain_ok_;
  std::unordered_map<Hash, std::pair<ChainIndex, std::uint32_t>, HashHasher> index_;
  std::unordered_map<OutPoint, UTXO, OutPointHasher> genesis_;
};

TxVerdict spv_verify(const LightClientState& state, const SpvProof& proof);

/// A full node's proof server over its own main chains.
class SpvProver {
 public:
  SpvProver(const BlockDag& dag, std::uint32_t T);

  bool knows(const Hash& tx_id) const { return where_.contains(tx_id); }
  /// nullopt when the tx is not on a main chain of the dag.
  std::optional<SpvProof> prove(const Hash& tx_id) const;
  std::optional<InclusionProof> inclusion(const Hash& tx_id) const;

 private:
  struct Location {
    BlockPtr block;
    std::uint32_t position;
    std::uint32_t height;
  };
  const BlockDag& dag_;
  std::uint32_t T_;
  std::unordered_map<Hash, Location, HashHasher> where_;
};

LightClientState export_light_client(const BlockDag& dag, std::uint32_t k, std::uint32_t T,
                                     std::vector<UTXO> genesis);

void encode(ByteWriter& w, const HeaderRecord& h);
void encode(ByteWriter& w, const InclusionProof& p);
void encode(ByteWriter& w, const SpvProof& p);
void encode(ByteWriter& w, const LightClientState& s);
HeaderRecord decode_header_record(ByteReader& r);
InclusionProof decode_inclusion(ByteReader& r);
/// Whole-buffer decoders; throw DecodeError on malformed or trailing bytes.
SpvProof decode_spv_proof(std::span<const std::uint8_t> bytes);
LightClientState decode_light_client(std::span<const std::uint8_t> bytes);

}  // namespace eunomia
