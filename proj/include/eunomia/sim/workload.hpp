#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "eunomia/ledger.hpp"
#include "eunomia/mining.hpp"
#include "eunomia/rng.hpp"
#include "eunomia/sim/config.hpp"

namespace eunomia::sim {

/// Clients paying each other. Each client tracks its own coins from the
/// reference full node's ledger: confirmed outputs, and (optionally)
/// provisional outputs of pending payments that its overlay already holds.
class Workload {
 public:
  static constexpr std::uint32_t kClientBase = 1'000'000;

  /// `genesis_offset` is the index of this workload's first entry in the
  /// combined genesis allocation.
  Workload(const SimConfig& config, std::size_t genesis_offset, Rng rng);

  std::vector<GenesisAllocation> genesis() const;
  static std::uint32_t owner_of(std::uint32_t client) { return kClientBase + client; }

  /// New and re-issued payments for this round, at most `budget` of them.
  std::vector<Transaction> generate(std::uint64_t round, const LedgerState& ref, const Mempool& pool,
                                    std::uint32_t budget);
  /// Final verdicts from the reference node's ledger.
  void on_confirmed(const std::vector<AppliedTx>& applied, std::uint64_t round);
  /// Exposes provisional outputs and handles stuck payments.
  void on_round_end(std::uint64_t round, const LedgerState& ref, Mempool& pool);

  struct Stats {
    std::uint64_t payments = 0;
    std::uint64_t submitted = 0;
    std::uint64_t confirmed = 0;
    std::uint64_t voided = 0;
    std::uint64_t reissued = 0;
    std::uint64_t provisional_spends = 0;
    std::uint64_t cross_shard_outputs = 0;
  };
  const Stats& stats() const { return stats_; }
  /// Rounds from first submission to final confirmation, per payment
  /// submitted after warmup.
  const std::vector<std::uint64_t>& latencies() const { return latencies_; }
  std::size_t pending() const { return pending_.size(); }
  bool owns(const Hash& tx_id) const { return by_tx_.contains(tx_id); }

 private:
  struct Coin {
    OutPoint op;
    std::uint64_t value = 0;
    ChainIndex shard;
    bool provisional = false;
  };
  struct Payment {
    std::uint32_t sender = 0;
    std::uint32_t recipient = 0;
    std::uint64_t first_round = 0;
  };
  struct Pending {
    Transaction tx;
    std::uint64_t payment = 0;
    std::uint64_t submitted = 0;
    bool exposed = false;
    std::vector<Coin> inputs;
  };

  std::optional<Transaction> build(std::uint64_t payment_id, std::uint64_t round, const LedgerState& ref,
                                   const Mempool& pool);
  void fail(std::uint64_t serial, const LedgerState* ref);
  bool coin_live(const Coin& c, const LedgerState& ref) const;
  void add_coin(std::uint32_t owner, const Coin& c);
  void drop_coin(std::uint32_t owner, const OutPoint& op);

  SimConfig config_;
  std::size_t genesis_offset_;
  Rng rng_;
  std::uint64_t resubmit_after_;
  std::vector<std::vector<Coin>> coins_;
  std::map<std::uint64_t, Payment> payments_;
  std::map<std::uint64_t, Pending> pending_;
  std::unordered_map<Hash, std::uint64_t, HashHasher> by_tx_;
  std::vector<std::uint64_t> reissue_;
  std::uint64_t next_payment_ = 0;
  std::uint64_t next_serial_ = 0;
  Stats stats_;
  std::vector<std::uint64_t> latencies_;
};

}  // namespace eunomia::sim
