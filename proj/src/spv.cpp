#include "eunomia/spv.hpp"

#include <stdexcept>
#include <unordered_set>

#include "eunomia/merkle.hpp"

namespace eunomia {

namespace {

constexpr std::uint32_t kProofMagic = 0x46525045;   // "EPRF"
constexpr std::uint32_t kHeadersMagic = 0x52444845; // "EHDR"

bool record_valid(const HeaderRecord& rec, const Hash& id, ChainIndex chain, const ProtocolParams& params) {
  if (id.leading_zero_bits() < params.pow_bits) return false;
  if (raw_chain_slot(id, params.m) >= params.m || chain_index_of(id, params.m) != chain) return false;
  return verify_leaf(rec.header.metadata_root, chain.value, metadata_leaf(rec.parent_ref, rec.tx_root),
                     rec.chain_slot_proof);
}

}  // namespace

HeaderRecord header_record(const Block& block) {
  return {block.header, block.parent_ref, block.tx_root, block.chain_slot_proof};
}

bool verify_header_chain(const LightClientState& state, ChainIndex chain) {
  if (chain.value >= state.headers.size()) return false;
  Hash prev = genesis_id(chain);
  for (const auto& rec : state.headers[chain.value]) {
    if (rec.parent_ref != prev) return false;
    const Hash id = block_id(rec.header);
    if (!record_valid(rec, id, chain, state.params)) return false;
    prev = id;
  }
  return true;
}

LightClient::LightClient(LightClientState state) : state_(std::move(state)) {
  state_.params.validate();
  if (state_.headers.size() != state_.params.m) throw std::invalid_argument("light client needs one header list per chain");
  for (std::uint32_t c = 0; c < state_.params.m; ++c) {
    const ChainIndex chain{c};
    chain_ok_.push_back(verify_header_chain(state_, chain));
    const auto& list = state_.headers[c];
    const auto n = static_cast<std::uint32_t>(list.size());
    for (std::uint32_t i = 0; i < n; ++i) index_.emplace(block_id(list[i].header), std::pair{chain, n - 1 - i});
  }
  for (const auto& u : state_.genesis) genesis_.emplace(u.outpoint, u);
}

std::optional<std::pair<ChainIndex, std::uint32_t>> LightClient::position(const Hash& block) const {
  auto it = index_.find(block);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool LightClient::included(const InclusionProof& p, ChainIndex& chain, std::uint32_t& after) const {
  const auto pos = position(p.block_ref);
  if (!pos) return false;
  chain = pos->first;
  after = pos->second;
  const auto& list = state_.headers[chain.value];
  const auto& rec = list[list.size() - 1 - after];
  if (!verify_leaf(rec.tx_root, p.inner.leaf_index, p.tx.id(), p.inner)) return false;
  return verify_leaf(rec.header.metadata_root, chain.value, metadata_leaf(rec.parent_ref, rec.tx_root), p.outer);
}

TxVerdict LightClient::verify(const SpvProof& proof) const {
  const auto malformed = TxVerdict::invalid(InvalidReason::Malformed);
  ChainIndex chain;
  std::uint32_t after = 0;
  if (!position(proof.target.block_ref)) return malformed;
  if (!included(proof.target, chain, after) || !header_chain_valid(chain)) return malformed;
  bool settled = after >= state_.k;

  std::unordered_map<Hash, const InclusionProof*, HashHasher> ancestry;
  for (const auto& a : proof.ancestry) ancestry.emplace(a.tx.id(), &a);

  struct Item {
    const Transaction* tx;
    ChainIndex chain;
  };
  std::vector<Item> work{{&proof.target.tx, chain}};
  std::unordered_set<Hash, HashHasher> visited{proof.target.tx.id()};
  while (!work.empty()) {
    const auto [tx, mined_on] = work.back();
    work.pop_back();
    if (!tx->well_formed(state_.params.m)) return malformed;
    unsigned __int128 in_total = 0;
    bool values_known = true;
    for (const auto& in : tx->inputs()) {
      if (in.shard != mined_on) return TxVerdict::invalid(InvalidReason::WrongShard);
      if (auto g = genesis_.find(in.prevout); g != genesis_.end()) {
        if (g->second.shard != in.shard) return TxVerdict::invalid(InvalidReason::WrongShard);
        in_total += g->second.value;
        continue;
      }
      if (auto cb = position(in.prevout.tx_id); cb && in.prevout.position == 0) {
        // Coinbase output: the value is not visible to a light client.
        if (cb->first != in.shard) return TxVerdict::invalid(InvalidReason::WrongShard);
        values_known = false;
        if (cb->second < state_.T) settled = false;
        continue;
      }
      auto it = ancestry.find(in.prevout.tx_id);
      if (it == ancestry.end()) return malformed;
      const auto& origin = *it->second;
      if (!position(origin.block_ref)) {
        settled = false;
        values_known = false;
        continue;
      }
      ChainIndex origin_chain;
      std::uint32_t origin_after = 0;
      if (!included(origin, origin_chain, origin_after) || !header_chain_valid(origin_chain)) return malformed;
      if (in.prevout.position >= origin.tx.outputs().size()) return TxVerdict::invalid(InvalidReason::UnknownInput);
      const auto& out = origin.tx.outputs()[in.prevout.position];
      if (out.shard != in.shard) return TxVerdict::invalid(InvalidReason::WrongShard);
      in_total += out.value;
      if (origin_after < state_.T && visited.insert(origin.tx.id()).second)
        work.push_back({&origin.tx, origin_chain});
    }
    unsigned __int128 out_total = tx->fee();
    for (const auto& out : tx->outputs()) out_total += out.value;
    if (values_known && in_total != out_total) return TxVerdict::invalid(InvalidReason::ValueImbalance);
  }
  return settled ? TxVerdict::valid() : TxVerdict::provisional();
}

TxVerdict spv_verify(const LightClientState& state, const SpvProof& proof) { return LightClient(state).verify(proof); }

SpvProver::SpvProver(const BlockDag& dag, std::uint32_t T) : dag_(dag), T_(T) {
  for (std::uint32_t c = 0; c < dag.chain_count(); ++c) {
    const ChainIndex chain{c};
    for (std::uint32_t h = 1; h <= dag.tip_height(chain); ++h) {
      auto block = dag.find(dag.main_at(chain, h));
      for (std::uint32_t i = 0; i < block->transactions.size(); ++i)
        where_.try_emplace(block->transactions[i].id(), Location{block, i, h});
    }
  }
}

std::optional<InclusionProof> SpvProver::inclusion(const Hash& tx_id) const {
  auto it = where_.find(tx_id);
  if (it == where_.end()) return std::nullopt;
  const auto& loc = it->second;
  const auto tree = build_tx_tree(loc.block->transactions);
  return InclusionProof{loc.block->transactions[loc.position], loc.block->id, prove_leaf(tree, loc.position),
                        loc.block->chain_slot_proof};
}

std::optional<SpvProof> SpvProver::prove(const Hash& tx_id) const {
  auto target = inclusion(tx_id);
  if (!target) return std::nullopt;
  SpvProof proof{std::move(*target), {}};
  std::vector<Hash> work{tx_id};
  std::unordered_set<Hash, HashHasher> seen{tx_id};
  while (!work.empty()) {
    const auto& loc = where_.at(work.back());
    work.pop_back();
    for (const auto& in : loc.block->transactions[loc.position].inputs()) {
      const auto& origin = in.prevout.tx_id;
      if (!where_.contains(origin) || !seen.insert(origin).second) continue;
      proof.ancestry.push_back(*inclusion(origin));
      const auto& oloc = where_.at(origin);
      if (dag_.tip_height(oloc.block->chain) - oloc.height < T_) work.push_back(origin);
    }
  }
  return proof;
}

LightClientState export_light_client(const BlockDag& dag, std::uint32_t k, std::uint32_t T,
                                     std::vector<UTXO> genesis) {
  LightClientState s;
  s.params = dag.params();
  s.k = k;
  s.T = T;
  s.genesis = std::move(genesis);
  s.headers.resize(dag.chain_count());
  for (std::uint32_t c = 0; c < dag.chain_count(); ++c) {
    const ChainIndex chain{c};
    for (std::uint32_t h = 1; h <= dag.tip_height(chain); ++h)
      s.headers[c].push_back(header_record(*dag.find(dag.main_at(chain, h))));
  }
  return s;
}

void encode(ByteWriter& w, const HeaderRecord& h) {
  encode(w, h.header);
  w.hash(h.parent_ref);
  w.hash(h.tx_root);
  encode(w, h.chain_slot_proof);
}

void encode(ByteWriter& w, const InclusionProof& p) {
  encode(w, p.tx);
  w.hash(p.block_ref);
  encode(w, p.inner);
  encode(w, p.outer);
}

void encode(ByteWriter& w, const SpvProof& p) {
  w.u32(kProofMagic);
  encode(w, p.target);
  w.length(p.ancestry.size());
  for (const auto& a : p.ancestry) encode(w, a);
}

void encode(ByteWriter& w, const LightClientState& s) {
  w.u32(kHeadersMagic);
  w.u32(s.params.m);
  w.u32(s.params.pow_bits);
  w.u32(s.k);
  w.u32(s.T);
  for (const auto& list : s.headers) {
    w.length(list.size());
    for (const auto& h : list) encode(w, h);
  }
  w.length(s.genesis.size());
  for (const auto& u : s.genesis) encode(w, u);
}

HeaderRecord decode_header_record(ByteReader& r) {
  HeaderRecord h;
  h.header = decode_header(r);
  h.parent_ref = r.hash();
  h.tx_root = r.hash();
  h.chain_slot_proof = decode_proof(r);
  return h;
}

InclusionProof decode_inclusion(ByteReader& r) {
  InclusionProof p;
  p.tx = decode_transaction(r);
  p.block_ref = r.hash();
  p.inner = decode_proof(r);
  p.outer = decode_proof(r);
  return p;
}

SpvProof decode_spv_proof(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u32() != kProofMagic) throw DecodeError("not an spv proof");
  SpvProof p;
  p.target = decode_inclusion(r);
  const auto n = r.length(64);
  p.ancestry.reserve(n);
  for (std::size_t i = 0; i < n; ++i) p.ancestry.push_back(decode_inclusion(r));
  r.expect_done();
  return p;
}

LightClientState decode_light_client(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.u32() != kHeadersMagic) throw DecodeError("not a header file");
  LightClientState s;
  s.params.m = r.u32();
  s.params.pow_bits = r.u32();
  if (s.params.m == 0 || s.params.m > 4096 || s.params.pow_bits > 64) throw DecodeError("bad header file parameters");
  s.k = r.u32();
  s.T = r.u32();
  s.headers.resize(s.params.m);
  for (auto& list : s.headers) {
    const auto n = r.length(160);
    list.reserve(n);
    for (std::size_t i = 0; i < n; ++i) list.push_back(decode_header_record(r));
  }
  const auto g = r.length(52);
  for (std::size_t i = 0; i < g; ++i) s.genesis.push_back(decode_utxo(r));
  r.expect_done();
  return s;
}

}  // namespace eunomia
