#include "eunomia/mining.hpp"

#include <stdexcept>

namespace eunomia {

Mempool::Mempool(std::uint32_t m, std::size_t capacity_per_shard) : shards_(m), capacity_(capacity_per_shard) {}

bool Mempool::add(const Transaction& tx) {
  if (!tx.well_formed(shard_count()) || txs_.contains(tx.id())) return false;
  auto& shard = shards_[tx.shard().value];
  const Key key{tx.fee(), tx.id()};
  if (capacity_ > 0 && shard.size() >= capacity_) {
    auto worst = std::prev(shard.end());
    if (!(key < *worst)) return false;
    txs_.erase(worst->id);
    shard.erase(worst);
  }
  shard.insert(key);
  txs_.emplace(tx.id(), tx);
  return true;
}

bool Mempool::remove(const Hash& id) {
  auto it = txs_.find(id);
  if (it == txs_.end()) return false;
  shards_[it->second.shard().value].erase(Key{it->second.fee(), id});
  txs_.erase(it);
  return true;
}

const Transaction* Mempool::get(const Hash& id) const {
  auto it = txs_.find(id);
  return it == txs_.end() ? nullptr : &it->second;
}

std::vector<Transaction> Mempool::select(ChainIndex shard, std::size_t limit,
                                         const std::function<bool(const Transaction&)>& accept) const {
  std::vector<Transaction> out;
  for (const auto& key : shards_.at(shard.value)) {
    if (out.size() >= limit) break;
    const auto& tx = txs_.at(key.id);
    if (accept && !accept(tx)) continue;
    out.push_back(tx);
  }
  return out;
}

std::vector<Transaction> Mempool::all(ChainIndex shard) const {
  return select(shard, shards_.at(shard.value).size());
}

Candidate assemble_candidate(const BlockDag& view, std::vector<std::vector<Transaction>> payloads,
                             std::uint32_t miner_id, std::uint64_t round, const CandidateOverrides& overrides) {
  const auto m = view.chain_count();
  if (payloads.size() != m) throw std::invalid_argument("assemble_candidate: one payload per chain required");
  Candidate c;
  c.payloads = std::move(payloads);
  c.parents.reserve(m);
  c.tx_roots.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    const bool over = i < overrides.parents.size() && overrides.parents[i].has_value();
    c.parents.push_back(over ? *overrides.parents[i] : view.tip(ChainIndex{i}));
    c.tx_roots.push_back(tx_root(c.payloads[i]));
  }
  c.outer = build_metadata_tree(c.parents, c.tx_roots);
  c.header.timestamp = round;
  c.header.miner_id = miner_id;
  c.header.metadata_root = c.outer.root;
  c.header.sync_ref = overrides.sync_ref ? *overrides.sync_ref : view.select_sync_block();
  return c;
}

Candidate assemble_candidate(const BlockDag& view, const Mempool& pool, std::size_t capacity, std::uint32_t miner_id,
                             std::uint64_t round, const CandidateOverrides& overrides) {
  std::vector<std::vector<Transaction>> payloads(view.chain_count());
  for (std::uint32_t i = 0; i < view.chain_count(); ++i) payloads[i] = pool.select(ChainIndex{i}, capacity);
  return assemble_candidate(view, std::move(payloads), miner_id, round, overrides);
}

std::optional<Block> block_for_nonce(const Candidate& candidate, std::uint64_t nonce, const ProtocolParams& params) {
  BlockHeader h = candidate.header;
  h.nonce = nonce;
  const Hash id = block_id(h);
  if (id.leading_zero_bits() < params.pow_bits) return std::nullopt;
  if (raw_chain_slot(id, params.m) >= params.m) return std::nullopt;
  const auto chain = chain_index_of(id, params.m).value;
  return make_block(h, candidate.parents[chain], candidate.payloads[chain], prove_leaf(candidate.outer, chain),
                    params.m);
}

Block seal_block(const Candidate& candidate, const ProtocolParams& params, Rng& rng, std::optional<ChainIndex> target) {
  for (;;) {
    auto b = block_for_nonce(candidate, rng.next(), params);
    if (b && (!target || b->chain == *target)) return std::move(*b);
  }
}

std::vector<BlockPtr> try_mine(const std::function<Candidate()>& build, unsigned queries,
                               const ProtocolParams& params, const MiningParams& mining, Rng& rng,
                               const std::function<void(const BlockPtr&)>& on_block) {
  std::vector<BlockPtr> found;
  std::optional<Candidate> cached;
  for (unsigned q = 0; q < queries; ++q) {
    std::optional<Block> block;
    if (mining.mode == PowMode::Simulated) {
      if (!rng.bernoulli(mining.mp)) continue;
      block = seal_block(build(), params, rng);
    } else {
      if (!cached) cached = build();
      block = block_for_nonce(*cached, rng.next(), params);
      if (!block) continue;
      cached.reset();
    }
    auto ptr = std::make_shared<const Block>(std::move(*block));
    found.push_back(ptr);
    if (on_block) on_block(ptr);
  }
  return found;
}

}  // namespace eunomia
