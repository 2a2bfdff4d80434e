#pragma once

#include <deque>
#include <optional>
#include <unordered_set>
#include <vector>

#include "eunomia/blockdag.hpp"
#include "eunomia/ledger.hpp"
#include "eunomia/mining.hpp"
#include "eunomia/rng.hpp"
#include "eunomia/sim/config.hpp"
#include "eunomia/sim/node.hpp"

namespace eunomia::sim {

/// The single coordinator behind all corrupt miners. It sees every honest
/// block as soon as it is sent, spends floor(rho n) sequential queries per
/// round, and decides which of its own blocks to reveal.
class Adversary {
 public:
  static constexpr std::uint32_t kOwner = 0xADADADu;

  /// `genesis_index` is the allocation entry of the double-spend coin
  /// (ignored for other strategies).
  Adversary(const SimConfig& config, std::uint32_t miner_id, LedgerConfig ledger, std::size_t genesis_index, Rng rng);

  std::uint32_t miner_id() const { return miner_id_; }
  const BlockDag& dag() const { return node_.dag; }
  const LedgerState& ledger() const { return node_.ledger; }

  /// A block that honest nodes know about.
  void observe(const BlockPtr& block);
  /// Transactions the adversary broadcasts this round.
  std::vector<Transaction> transactions(std::uint64_t round);
  /// Mining and release decisions; returns blocks to reveal, dependencies first.
  std::vector<BlockPtr> act(std::uint64_t round, const Mempool& pool);

  /// The double-spend coin, when that strategy is active.
  std::optional<GenesisAllocation> genesis() const;
  const Hash& pay_tx() const { return pay_tx_; }
  const Hash& conflict_tx() const { return conflict_tx_; }

  struct Stats {
    std::uint64_t mined = 0;
    std::uint64_t invalid = 0;
    std::uint64_t released = 0;
    std::uint64_t abandoned = 0;
    std::uint64_t max_lead = 0;
    bool double_spend_forked = false;
    bool double_spend_released = false;
    bool double_spend_abandoned = false;
  };
  const Stats& stats() const { return stats_; }
  std::size_t withheld() const;
  /// Blocks mined during the last act() call, released or not.
  const std::vector<BlockPtr>& last_mined() const { return mined_; }

 private:
  enum class DsState { Idle, WaitInclusion, Private, Done };

  Candidate build(std::uint64_t round, const Mempool& pool);
  Hash choose_sync();
  void release(const Hash& id, std::vector<BlockPtr>& out);
  void release_chain(std::uint32_t c, std::uint32_t up_to_height, std::vector<BlockPtr>& out);
  void withhold_react(std::vector<BlockPtr>& out, bool after_mining);
  void on_mined(const BlockPtr& b, std::vector<BlockPtr>& out);
  std::uint32_t height(const Hash& id) const { return node_.dag.height_of(id).value_or(0); }

  SimConfig config_;
  std::uint32_t miner_id_;
  std::uint32_t queries_;
  FullNode node_;
  Rng rng_;
  Stats stats_;
  std::vector<BlockPtr> mined_;

  std::unordered_set<Hash, HashHasher> public_;
  std::vector<std::uint32_t> public_height_;
  std::vector<std::vector<Hash>> private_;
  std::vector<bool> honest_progress_;
  std::vector<bool> tie_;
  std::deque<Hash> recent_;

  std::size_t ds_genesis_index_;
  DsState ds_state_ = DsState::Idle;
  Hash pay_tx_;
  Hash conflict_tx_;
  std::optional<Transaction> conflict_;
  Hash ds_fork_;
  Hash ds_tip_;
  bool ds_conflict_mined_ = false;
};

}  // namespace eunomia::sim
