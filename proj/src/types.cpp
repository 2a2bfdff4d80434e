#include "eunomia/types.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>

#include "eunomia/merkle.hpp"

namespace eunomia {

void ProtocolParams::validate() const {
  if (m == 0) throw std::invalid_argument("chain count m must be >= 1");
  if (pow_bits > 64) throw std::invalid_argument("pow_bits must be <= 64");
}

unsigned chain_bits(std::uint32_t m) {
  if (m == 0) throw std::invalid_argument("chain count m must be >= 1");
  return m == 1 ? 0u : static_cast<unsigned>(std::bit_width(m - 1));
}

std::uint64_t raw_chain_slot(const Hash& h, std::uint32_t m) { return h.trailing_bits(chain_bits(m)); }

ChainIndex chain_index_of(const Hash& h, std::uint32_t m) {
  return ChainIndex{static_cast<std::uint32_t>(raw_chain_slot(h, m) % m)};
}

namespace {

void encode_body(ByteWriter& w, const std::vector<TxInput>& inputs, const std::vector<TxOutput>& outputs,
                 std::uint64_t fee) {
  w.length(inputs.size());
  for (const auto& in : inputs) {
    w.hash(in.prevout.tx_id);
    w.u32(in.prevout.position);
    w.u32(in.shard.value);
  }
  w.length(outputs.size());
  for (const auto& out : outputs) {
    w.u64(out.value);
    w.u32(out.owner);
    w.u32(out.shard.value);
  }
  w.u64(fee);
}

}  // namespace

Transaction::Transaction(std::vector<TxInput> inputs, std::vector<TxOutput> outputs, std::uint64_t fee)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), fee_(fee) {
  ByteWriter w;
  encode_body(w, inputs_, outputs_, fee_);
  id_ = digest(w.bytes());
}

bool Transaction::well_formed(std::uint32_t m) const {
  if (inputs_.empty()) return false;
  const ChainIndex s = inputs_.front().shard;
  for (const auto& in : inputs_)
    if (in.shard != s || in.shard.value >= m) return false;
  if (inputs_.size() <= 16) {
    for (std::size_t i = 0; i < inputs_.size(); ++i)
      for (std::size_t j = i + 1; j < inputs_.size(); ++j)
        if (inputs_[i].prevout == inputs_[j].prevout) return false;
  } else {
    std::vector<OutPoint> ops;
    ops.reserve(inputs_.size());
    for (const auto& in : inputs_) ops.push_back(in.prevout);
    std::sort(ops.begin(), ops.end());
    if (std::adjacent_find(ops.begin(), ops.end()) != ops.end()) return false;
  }
  for (const auto& out : outputs_)
    if (out.shard.value >= m) return false;
  return true;
}

std::uint64_t Transaction::output_total() const {
  std::uint64_t total = 0;
  for (const auto& out : outputs_) total += out.value;
  return total;
}

void encode(ByteWriter& w, const BlockHeader& h) {
  w.u32(h.version);
  w.u64(h.timestamp);
  w.u64(h.nonce);
  w.hash(h.metadata_root);
  w.hash(h.sync_ref);
  w.u32(h.miner_id);
}

void encode(ByteWriter& w, const Transaction& tx) { encode_body(w, tx.inputs(), tx.outputs(), tx.fee()); }

void encode(ByteWriter& w, const MerkleProof& p) {
  w.u32(p.leaf_index);
  w.length(p.siblings.size());
  for (const auto& s : p.siblings) {
    w.hash(s.hash);
    w.u8(s.sibling_on_left ? 1 : 0);
  }
}

void encode(ByteWriter& w, const Block& b) {
  encode(w, b.header);
  w.hash(b.parent_ref);
  w.length(b.transactions.size());
  for (const auto& tx : b.transactions) encode(w, tx);
  encode(w, b.chain_slot_proof);
}

void encode(ByteWriter& w, const UTXO& u) {
  w.hash(u.outpoint.tx_id);
  w.u32(u.outpoint.position);
  w.u64(u.value);
  w.u32(u.owner);
  w.u32(u.shard.value);
}

BlockHeader decode_header(ByteReader& r) {
  BlockHeader h;
  h.version = r.u32();
  h.timestamp = r.u64();
  h.nonce = r.u64();
  h.metadata_root = r.hash();
  h.sync_ref = r.hash();
  h.miner_id = r.u32();
  return h;
}

Transaction decode_transaction(ByteReader& r) {
  std::vector<TxInput> inputs(r.length(40));
  for (auto& in : inputs) {
    in.prevout.tx_id = r.hash();
    in.prevout.position = r.u32();
    in.shard = ChainIndex{r.u32()};
  }
  std::vector<TxOutput> outputs(r.length(16));
  for (auto& out : outputs) {
    out.value = r.u64();
    out.owner = r.u32();
    out.shard = ChainIndex{r.u32()};
  }
  const auto fee = r.u64();
  return Transaction(std::move(inputs), std::move(outputs), fee);
}

MerkleProof decode_proof(ByteReader& r) {
  MerkleProof p;
  p.leaf_index = r.u32();
  p.siblings.resize(r.length(33));
  for (auto& s : p.siblings) {
    s.hash = r.hash();
    const auto side = r.u8();
    if (side > 1) throw DecodeError("merkle side flag must be 0 or 1");
    s.sibling_on_left = side == 1;
  }
  return p;
}

Block decode_block(ByteReader& r, std::uint32_t m) {
  auto header = decode_header(r);
  auto parent = r.hash();
  std::vector<Transaction> txs;
  const auto count = r.length(16);
  txs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) txs.push_back(decode_transaction(r));
  auto proof = decode_proof(r);
  return make_block(header, parent, std::move(txs), std::move(proof), m);
}

UTXO decode_utxo(ByteReader& r) {
  UTXO u;
  u.outpoint.tx_id = r.hash();
  u.outpoint.position = r.u32();
  u.value = r.u64();
  u.owner = r.u32();
  u.shard = ChainIndex{r.u32()};
  return u;
}

Hash block_id(const BlockHeader& header) {
  ByteWriter w;
  w.reserve(160);
  encode(w, header);
  return digest(w.bytes());
}

Hash genesis_id(ChainIndex chain) {
  ByteWriter w;
  for (char c : std::string_view("eunomia/genesis")) w.u8(static_cast<std::uint8_t>(c));
  w.u32(chain.value);
  return digest(w.bytes());
}

Block genesis_block(ChainIndex chain) {
  Block b;
  b.is_genesis = true;
  b.chain = chain;
  b.id = genesis_id(chain);
  b.tx_root = empty_root();
  return b;
}

Block make_block(const BlockHeader& header, const Hash& parent_ref, std::vector<Transaction> txs,
                 MerkleProof slot_proof, std::uint32_t m) {
  Block b;
  b.header = header;
  b.parent_ref = parent_ref;
  b.transactions = std::move(txs);
  b.chain_slot_proof = std::move(slot_proof);
  b.id = block_id(header);
  b.chain = chain_index_of(b.id, m);
  b.tx_root = tx_root(b.transactions);
  return b;
}

Block strip_body(const Block& block) {
  Block b = block;
  b.transactions.clear();
  b.transactions.shrink_to_fit();
  return b;
}

OutPoint coinbase_outpoint(const Hash& block) { return {block, 0}; }

OutPoint allocation_outpoint(std::uint64_t index) {
  ByteWriter w;
  for (char c : std::string_view("eunomia/alloc")) w.u8(static_cast<std::uint8_t>(c));
  w.u64(index);
  return {digest(w.bytes()), 0};
}

}  // namespace eunomia
