#pragma once

#include <functional>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "eunomia/blockdag.hpp"
#include "eunomia/merkle.hpp"
#include "eunomia/rng.hpp"
#include "eunomia/types.hpp"

namespace eunomia {

/// Per-shard pending transaction sets S_i. Selection order is fee
/// descending, then tx id ascending.
class Mempool {
 public:
  explicit Mempool(std::uint32_t m, std::size_t capacity_per_shard = 0);

  /// Adds a well-formed tx to the set of its input shard. Returns false for
  /// duplicates, malformed txs, or when the shard is full and the tx does
  /// not outbid the cheapest entry (which is then evicted).
  bool add(const Transaction& tx);
  bool remove(const Hash& id);
  bool contains(const Hash& id) const { return txs_.contains(id); }
  const Transaction* get(const Hash& id) const;

  /// Up to `limit` txs of `shard` in selection order; `accept`, if given,
  /// is asked once per visited tx and may keep its own scratch state.
  std::vector<Transaction> select(ChainIndex shard, std::size_t limit,
                                  const std::function<bool(const Transaction&)>& accept = {}) const;
  std::vector<Transaction> all(ChainIndex shard) const;

  std::size_t size(ChainIndex shard) const { return shards_.at(shard.value).size(); }
  std::size_t size() const { return txs_.size(); }
  std::uint32_t shard_count() const { return static_cast<std::uint32_t>(shards_.size()); }

 private:
  struct Key {
    std::uint64_t fee;
    Hash id;
    bool operator<(const Key& o) const { return fee != o.fee ? fee > o.fee : id < o.id; }
  };
  std::vector<std::set<Key>> shards_;
  std::unordered_map<Hash, Transaction, HashHasher> txs_;
  std::size_t capacity_;
};

/// Everything a miner commits to before its nonce is known: one payload
/// and one hash reference per chain, and the outer metadata tree.
struct Candidate {
  BlockHeader header;
  std::vector<Hash> parents;
  std::vector<std::vector<Transaction>> payloads;
  std::vector<Hash> tx_roots;
  MerkleTree outer;
};

struct CandidateOverrides {
  /// Replaces the sync reference (the ordering attack).
  std::optional<Hash> sync_ref;
  /// Replaces the per-chain hash references (private branches).
  std::vector<std::optional<Hash>> parents;
};

Candidate assemble_candidate(const BlockDag& view, std::vector<std::vector<Transaction>> payloads,
                             std::uint32_t miner_id, std::uint64_t round, const CandidateOverrides& overrides = {});
/// Honest selection: the top `capacity` txs of every shard.
Candidate assemble_candidate(const BlockDag& view, const Mempool& pool, std::size_t capacity, std::uint32_t miner_id,
                             std::uint64_t round, const CandidateOverrides& overrides = {});

/// The block of `candidate` for the given nonce, on whichever chain the
/// resulting id selects. nullopt if the id misses the pow tag or lands on a
/// raw chain slot >= m.
std::optional<Block> block_for_nonce(const Candidate& candidate, std::uint64_t nonce, const ProtocolParams& params);

/// Draws nonces until block_for_nonce succeeds (and, if given, the block
/// lands on `target`).
Block seal_block(const Candidate& candidate, const ProtocolParams& params, Rng& rng,
                 std::optional<ChainIndex> target = std::nullopt);

enum class PowMode {
  /// Each query succeeds with probability mp; a success is then sealed.
  Simulated,
  /// Each query is one nonce attempt against the leading-zeros tag.
  LeadingZeros,
};

struct MiningParams {
  double mp = 0.0;
  PowMode mode = PowMode::Simulated;
};

/// Spends `queries` sequential queries. `build` is called lazily for the
/// candidate of the next query; `on_block` sees each block as soon as it is
/// found, so later queries can build on it.
std::vector<BlockPtr> try_mine(const std::function<Candidate()>& build, unsigned queries,
                               const ProtocolParams& params, const MiningParams& mining, Rng& rng,
                               const std::function<void(const BlockPtr&)>& on_block = {});

}  // namespace eunomia
