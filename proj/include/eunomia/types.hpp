#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "eunomia/encoding.hpp"
#include "eunomia/hash.hpp"

namespace eunomia {

/// Index of one of the m parallel chains, 0 <= value < m.
struct ChainIndex {
  std::uint32_t value = 0;

  constexpr ChainIndex() = default;
  constexpr explicit ChainIndex(std::uint32_t v) : value(v) {}
  auto operator<=>(const ChainIndex&) const = default;
};

/// Parameters every node must agree on to validate blocks.
struct ProtocolParams {
  std::uint32_t m = 1;
  /// Leading zero bits a block id needs to carry a valid proof-of-work tag.
  unsigned pow_bits = 0;

  void validate() const;
};

/// Number of trailing hash bits that select a chain: ceil(log2 m).
unsigned chain_bits(std::uint32_t m);
/// Trailing ceil(log2 m) bits of h, reduced modulo m. Throws on m == 0.
ChainIndex chain_index_of(const Hash& h, std::uint32_t m);
/// The raw trailing-bit value, before the modulo reduction. Mining rejects
/// hashes whose raw slot is >= m so that chain assignment stays uniform.
std::uint64_t raw_chain_slot(const Hash& h, std::uint32_t m);

struct OutPoint {
  Hash tx_id;
  std::uint32_t position = 0;
  auto operator<=>(const OutPoint&) const = default;
};

struct OutPointHasher {
  std::size_t operator()(const OutPoint& o) const noexcept {
    return HashHasher{}(o.tx_id) ^ (static_cast<std::size_t>(o.position) * 0x9E3779B97F4A7C15ull);
  }
};

struct UTXO {
  OutPoint outpoint;
  std::uint64_t value = 0;
  std::uint32_t owner = 0;
  ChainIndex shard;
  auto operator<=>(const UTXO&) const = default;
};

/// Reference to a spent output. `shard` is the sharding index the spender
/// claims for it; validation checks the claim against the referenced UTXO.
struct TxInput {
  OutPoint prevout;
  ChainIndex shard;
  auto operator<=>(const TxInput&) const = default;
};

struct TxOutput {
  std::uint64_t value = 0;
  std::uint32_t owner = 0;
  ChainIndex shard;
  auto operator<=>(const TxOutput&) const = default;
};

/// Immutable transaction; the id is the digest of the canonical body.
class Transaction {
 public:
  Transaction() = default;
  Transaction(std::vector<TxInput> inputs, std::vector<TxOutput> outputs, std::uint64_t fee);

  const Hash& id() const { return id_; }
  const std::vector<TxInput>& inputs() const { return inputs_; }
  const std::vector<TxOutput>& outputs() const { return outputs_; }
  std::uint64_t fee() const { return fee_; }

  /// Chain on which the transaction may be mined (the shard of its inputs).
  ChainIndex shard() const { return inputs_.empty() ? ChainIndex{0} : inputs_.front().shard; }
  /// Structural checks that need no ledger: at least one input, one common
  /// input shard, all shards < m, no repeated input.
  bool well_formed(std::uint32_t m) const;
  OutPoint output_point(std::uint32_t position) const { return {id_, position}; }
  std::uint64_t output_total() const;

  bool operator==(const Transaction& o) const { return id_ == o.id_; }

 private:
  std::vector<TxInput> inputs_;
  std::vector<TxOutput> outputs_;
  std::uint64_t fee_ = 0;
  Hash id_;
};

struct BlockHeader {
  std::uint32_t version = 1;
  /// Simulation round in which the block was mined.
  std::uint64_t timestamp = 0;
  std::uint64_t nonce = 0;
  /// Root of the outer metadata tree over (tip_i, tx_root_i), i < m.
  Hash metadata_root;
  Hash sync_ref;
  std::uint32_t miner_id = 0;
  auto operator<=>(const BlockHeader&) const = default;
};

struct MerkleStep {
  Hash hash;
  bool sibling_on_left = false;
  auto operator<=>(const MerkleStep&) const = default;
};

struct MerkleProof {
  std::uint32_t leaf_index = 0;
  std::vector<MerkleStep> siblings;
  auto operator<=>(const MerkleProof&) const = default;
};

/// A block as carried on the wire plus the fields every receiver derives
/// from it (id, chain, tx_root). Construct with make_block / decode_block /
/// genesis_block so the derived fields are consistent.
struct Block {
  BlockHeader header;
  Hash parent_ref;
  std::vector<Transaction> transactions;
  MerkleProof chain_slot_proof;
  bool is_genesis = false;

  Hash id;
  ChainIndex chain;
  Hash tx_root;
};

using BlockPtr = std::shared_ptr<const Block>;

Hash block_id(const BlockHeader& header);
Hash genesis_id(ChainIndex chain);
Block genesis_block(ChainIndex chain);
Block make_block(const BlockHeader& header, const Hash& parent_ref, std::vector<Transaction> txs,
                 MerkleProof slot_proof, std::uint32_t m);
/// Copy that keeps header, parent reference, slot proof and tx root but drops
/// the transaction list; used for retained headers of stale sync targets.
Block strip_body(const Block& block);

/// Outpoint of the implicit coinbase output of a block.
OutPoint coinbase_outpoint(const Hash& block);
/// Outpoint of the index-th genesis allocation entry.
OutPoint allocation_outpoint(std::uint64_t index);

// Canonical encoding.
void encode(ByteWriter& w, const BlockHeader& h);
void encode(ByteWriter& w, const Transaction& tx);
void encode(ByteWriter& w, const MerkleProof& p);
void encode(ByteWriter& w, const Block& b);
void encode(ByteWriter& w, const UTXO& u);
BlockHeader decode_header(ByteReader& r);
Transaction decode_transaction(ByteReader& r);
MerkleProof decode_proof(ByteReader& r);
Block decode_block(ByteReader& r, std::uint32_t m);
UTXO decode_utxo(ByteReader& r);

template <typename T>
std::vector<std::uint8_t> encode_bytes(const T& v) {
  ByteWriter w;
  encode(w, v);
  return std::move(w).bytes();
}

}  // namespace eunomia
