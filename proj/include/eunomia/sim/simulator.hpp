#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "eunomia/mining.hpp"
#include "eunomia/rng.hpp"
#include "eunomia/sim/adversary.hpp"
#include "eunomia/sim/config.hpp"
#include "eunomia/sim/network.hpp"
#include "eunomia/sim/node.hpp"
#include "eunomia/sim/trace.hpp"
#include "eunomia/sim/workload.hpp"
#include "eunomia/spv.hpp"

namespace eunomia::sim {

struct SimOptions {
  /// Keep trace events in memory (the digest is computed either way).
  bool keep_trace = false;
};

struct MinedRecord {
  std::uint64_t round = 0;
  Hash id;
  ChainIndex chain;
  std::uint32_t miner = 0;
  bool honest = true;
  std::int64_t clock = 0;
};

/// Pairs of (round a block became per-chain confirmed, rounds until it
/// entered L) on one honest node.
struct LivenessRecord {
  std::uint64_t pc_round = 0;
  std::optional<std::uint64_t> latency;
};

struct SpvCheck {
  Hash tx_id;
  std::uint64_t round = 0;
  TxVerdict verdict;
  std::size_t ancestry = 0;
};

struct SimStats {
  std::uint64_t consistency_checks = 0;
  std::uint64_t consistency_violations = 0;
  std::uint64_t bar_decreases = 0;
  std::uint64_t local_rewrites = 0;
  std::uint64_t delta_violations = 0;
  std::uint64_t late_deliveries = 0;
  std::uint64_t undelivered = 0;
  std::uint64_t inserts = 0;
  std::uint64_t pending_inserts = 0;
  std::uint64_t rejected_inserts = 0;
  std::uint64_t double_spends_in_l = 0;
  std::uint64_t conservation_failures = 0;
  /// Valid transactions node 0 applied from L after warmup.
  std::uint64_t confirmed_txs = 0;
  std::uint64_t tx_emitted = 0;
  std::uint64_t tx_rejected_by_pool = 0;
  std::uint64_t pruned = 0;
  /// (round, |L| of node 0) at every sample.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> l_length;
};

class Simulator {
 public:
  explicit Simulator(SimConfig config, SimOptions options = {});

  /// Runs all remaining rounds, then drains in-flight messages.
  void run();
  /// One round; returns false once all rounds are done.
  bool step();
  std::uint64_t round() const { return round_; }
  bool finished() const { return finished_; }

  const SimConfig& config() const { return config_; }
  const LedgerConfig& ledger_config() const { return ledger_config_; }
  std::size_t honest_count() const { return nodes_.size(); }
  const FullNode& node(std::size_t i) const { return *nodes_.at(i); }
  const Adversary* adversary() const { return adversary_.get(); }
  const Workload* workload() const { return workload_.get(); }
  const Network& network() const { return network_; }
  const Mempool& pool() const { return pool_; }
  const TraceRecorder& trace() const { return trace_; }
  const SimStats& stats() const { return stats_; }
  const std::vector<MinedRecord>& mined() const { return mined_; }
  const std::vector<LivenessRecord>& liveness() const { return liveness_; }
  const std::vector<SpvCheck>& spv_checks() const { return spv_checks_; }
  /// Round in which each entry of node 0's L was appended.
  const std::vector<std::uint64_t>& l_rounds() const { return l_rounds_; }
  /// An encoded proof and header set from the SPV sample, for file export.
  const std::optional<std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>>& spv_example() const {
    return spv_example_;
  }
  bool honest_miner(std::uint32_t miner_id) const { return miner_id < nodes_.size(); }
  /// Any block mined during the run, with its body.
  BlockPtr block(const Hash& id) const;
  /// Liveness horizon 4T/(p n) in rounds.
  double lemma_horizon() const;

 private:
  void deliver(const Message& msg, bool relay);
  void broadcast(std::size_t from, const BlockPtr& block);
  void relay(std::size_t from, const Hash& id);
  void mine_honest(std::size_t i);
  void sync_nodes();
  void track_liveness(std::size_t i, const OrderingTracker::Update& up, std::size_t before);
  void check_consistency();
  void sample_spv();
  void finish();

  SimConfig config_;
  LedgerConfig ledger_config_;
  std::uint64_t round_ = 0;
  bool finished_ = false;
  Rng net_rng_;
  Rng mine_rng_;
  std::vector<std::unique_ptr<FullNode>> nodes_;
  std::unique_ptr<Adversary> adversary_;
  std::unique_ptr<Workload> workload_;
  Network network_;
  Mempool pool_;
  TraceRecorder trace_;
  SimStats stats_;
  std::vector<MinedRecord> mined_;
  std::unordered_map<Hash, BlockPtr, HashHasher> registry_;

  std::vector<ConfirmedEntry> reference_;
  std::vector<std::size_t> checked_;
  std::vector<std::uint64_t> last_bar_;
  std::vector<std::size_t> last_rewrites_;
  std::vector<std::uint64_t> last_version_;
  std::vector<std::vector<std::uint32_t>> pc_height_;
  std::vector<std::unordered_map<Hash, std::uint64_t, HashHasher>> pc_round_;
  std::vector<std::size_t> last_checkpoints_;
  std::vector<LivenessRecord> liveness_;
  std::unordered_set<OutPoint, OutPointHasher> consumed_;
  std::vector<std::uint64_t> l_rounds_;

  std::uint64_t spv_round_ = 0;
  std::vector<SpvCheck> spv_checks_;
  std::optional<std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>> spv_example_;
};

}  // namespace eunomia::sim
