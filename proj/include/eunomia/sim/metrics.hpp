#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "eunomia/sim/simulator.hpp"

namespace eunomia::sim {

/// Upper tail of the chi-square distribution: P(X >= stat) with `dof`
/// degrees of freedom.
double chi_square_p(double stat, double dof);
/// Chi-square statistic of `counts` against the uniform distribution.
double chi_square_uniform(const std::vector<std::uint64_t>& counts);

struct MetricsReport {
  // Safety.
  std::uint64_t consistency_checks = 0;
  std::uint64_t consistency_violations = 0;
  std::uint64_t local_rewrites = 0;
  std::uint64_t bar_decreases = 0;
  std::uint64_t delta_violations = 0;
  std::uint64_t late_deliveries = 0;
  std::uint64_t undelivered = 0;
  std::uint64_t digest_comparisons = 0;
  std::uint64_t digest_mismatches = 0;
  std::uint64_t double_spends_in_l = 0;
  std::uint64_t conservation_failures = 0;

  // Blocks.
  std::uint64_t blocks_mined = 0;
  std::uint64_t honest_blocks = 0;
  std::uint64_t adversary_blocks = 0;
  std::vector<std::uint64_t> per_chain_blocks;
  double chi_square = 0;
  double chi_square_p = 1;
  double block_rate = 0;
  double expected_block_rate = 0;
  /// Honest blocks mined in a round in which another block hit the same chain.
  double fork_fraction = 0;
  double expected_fork_fraction = 0;
  /// Honest blocks off node 0's main chains at the end.
  double stale_fraction = 0;
  double main_growth_per_round = 0;
  double expected_main_growth = 0;

  // Ordering.
  std::uint64_t l_length = 0;
  std::uint64_t bar = 0;
  double l_growth_per_round = 0;
  /// Per-round L growth implied by m T blocks every 2T/(p n) rounds.
  double l_growth_bound = 0;
  std::uint64_t quality_window = 0;
  std::uint64_t quality_windows = 0;
  double quality_bound = 1;
  double quality_windows_ok = 1;
  double quality_min = 1;
  double honest_fraction_l = 1;

  // Liveness.
  double liveness_horizon = 0;
  std::uint64_t liveness_considered = 0;
  std::uint64_t liveness_within = 0;
  double liveness_fraction = 1;
  std::uint64_t liveness_max_latency = 0;

  // Transactions.
  std::uint64_t payments = 0;
  std::uint64_t tx_submitted = 0;
  std::uint64_t tx_confirmed = 0;
  std::uint64_t tx_reissued = 0;
  std::uint64_t tx_invalid_in_l = 0;
  double throughput = 0;
  double latency_mean = 0;
  double latency_p50 = 0;
  double latency_p90 = 0;
  double latency_p99 = 0;
  std::uint64_t void_events = 0;
  std::uint64_t voids_outside_window = 0;
  std::uint32_t max_void_depth = 0;

  // Economics.
  double adversary_reward_share = 0;
  double adversary_block_share_l = 0;
  double adversary_query_share = 0;
  std::uint64_t adversary_released = 0;
  std::uint64_t adversary_withheld = 0;
  std::uint64_t adversary_invalid = 0;
  bool double_spend_released = false;
  bool double_spend_succeeded = false;

  // Network.
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t piggybacked = 0;
  double pending_rate = 0;

  // SPV.
  std::uint64_t spv_samples = 0;
  std::uint64_t spv_valid = 0;
  std::uint64_t spv_provisional = 0;
  std::uint64_t spv_invalid = 0;
  std::uint64_t spv_agree = 0;
  std::uint64_t spv_unresolved = 0;
  std::uint64_t spv_valid_then_voided = 0;
  std::uint64_t spv_invalid_then_valid = 0;

  /// Any safety-harness violation (the CLI exits 1).
  bool safety_violation() const;
};

MetricsReport collect_metrics(const Simulator& sim);
nlohmann::json to_json(const MetricsReport& r);

}  // namespace eunomia::sim
