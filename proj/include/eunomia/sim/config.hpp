#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eunomia/ledger.hpp"
#include "eunomia/mining.hpp"

namespace eunomia::sim {

enum class Strategy { Honest, DelayMax, Withhold, OrderingAttack, DoubleSpend };
enum class SyncPolicy { SmallestClock, Stale, Random };
/// How the adversary schedules honest messages, each delay within [1, delta].
enum class DelayPolicy { Auto, Min, Max, Split, Random };
enum class ChangeShard { Random, LeastLoaded, Same };

const char* to_string(Strategy s);
const char* to_string(SyncPolicy s);
const char* to_string(DelayPolicy s);
const char* to_string(ChangeShard s);

struct WorkloadConfig {
  /// Mean payments per round (Poisson), capped by mu.
  double rate = 0.0;
  std::uint32_t clients = 0;
  std::uint32_t coins_per_client = 4;
  std::uint64_t coin_value = 1'000'000;
  std::uint64_t fee_max = 10;
  ChangeShard change_shard = ChangeShard::Random;
  /// Rounds after which a still-pending payment is re-checked and, if its
  /// transaction can no longer be mined, re-issued. 0 picks 4T/(p n).
  std::uint64_t resubmit_after = 0;
  /// Let clients spend outputs that are still provisional.
  bool spend_provisional = true;
};

struct DoubleSpendConfig {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint64_t value = 1000;
  /// Round at which the public payment is issued.
  std::uint64_t start_round = 10;
};

struct AdversaryConfig {
  Strategy strategy = Strategy::Honest;
  /// Withhold: release a private branch once its lead reaches this many
  /// blocks (0 = only in reaction to honest progress).
  std::uint32_t withhold_trigger = 0;
  SyncPolicy sync_policy = SyncPolicy::SmallestClock;
  DoubleSpendConfig double_spend;
};

struct SimConfig {
  std::uint32_t m = 1;
  std::uint32_t n = 10;
  double rho = 0.0;
  std::uint32_t delta = 1;
  /// Per-query mining probability; each chain receives mp/m of it.
  double mp = 0.01;
  std::uint32_t T = 6;
  /// Block capacity in transactions per chain payload.
  std::uint32_t D = 16;
  /// Network capacity, transactions per round.
  std::uint32_t mu = 1000;
  std::uint64_t rounds = 1000;
  std::uint64_t seed = 1;
  /// SPV depth for the target block; 0 means T.
  std::uint32_t k = 0;
  PowMode pow_mode = PowMode::Simulated;
  unsigned pow_bits = 6;
  std::uint64_t block_reward = 50;
  WorkloadConfig tx_workload;
  std::vector<GenesisAllocation> genesis_allocation;
  AdversaryConfig adversary;
  DelayPolicy delay_policy = DelayPolicy::Auto;
  std::uint64_t sample_interval = 10;
  /// Ledger checkpoint spacing, in L blocks.
  std::uint64_t digest_interval = 32;
  std::size_t pending_cache_limit = 10000;
  /// 0 disables pruning; otherwise must be >= T.
  std::uint32_t prune_depth = 0;
  bool piggyback = true;
  std::uint32_t spv_samples = 0;
  /// Statistics such as latency ignore the first warmup rounds.
  std::uint64_t warmup = 0;

  void validate() const;
  std::uint32_t adversary_queries() const;
  std::uint32_t honest_count() const { return n - adversary_queries(); }
  std::uint32_t spv_k() const { return k == 0 ? T : k; }
  DelayPolicy effective_delay_policy() const;
  /// Per-chain success probability of one query.
  double p() const { return mp / m; }
};

/// Throws std::invalid_argument on unknown enum names, bad types or values.
SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& c);
SimConfig load_config(const std::string& path);

}  // namespace eunomia::sim
