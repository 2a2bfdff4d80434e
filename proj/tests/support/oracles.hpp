#pragma once

// Independent reference implementations used to cross-check the library.
// They favour obviousness over speed.

#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "eunomia/blockdag.hpp"
#include "eunomia/ledger.hpp"
#include "eunomia/ordering.hpp"
#include "eunomia/rng.hpp"

namespace eunomia::test {

using BlockMap = std::unordered_map<Hash, BlockPtr, HashHasher>;

/// Clock by direct recursion over parent and sync references; nullopt when
/// the block or an ancestor breaks the parent <= sync rule or is missing.
std::optional<std::int64_t> oracle_clock(const BlockMap& blocks, const Hash& id);

/// Collect E(i), take the bar, filter by clock < bar, sort by (clock, chain).
std::vector<ConfirmedEntry> oracle_sequence(const BlockDag& dag, std::uint32_t T, bool inclusive = false);
std::uint64_t oracle_bar(const BlockDag& dag, std::uint32_t T);

/// Sequential UTXO interpreter over a list of (block, chain) in L order.
struct NaiveLedger {
  std::map<OutPoint, UTXO> utxos;
  std::uint64_t reward = 0;
  std::uint32_t m = 1;

  NaiveLedger(std::uint32_t m, std::uint64_t reward, const std::vector<UTXO>& genesis);
  /// Returns one accept flag per transaction.
  std::vector<bool> apply(const Block& b);
};

/// A random, mostly valid block dag as it would arrive at one node.
struct GeneratedDag {
  std::uint32_t m = 1;
  /// Creation order. `valid[i]` says whether block i obeys the clock rule.
  std::vector<BlockPtr> blocks;
  std::vector<bool> valid;
  /// Indices into `blocks` in delivery order.
  std::vector<std::size_t> arrival;
};

GeneratedDag generate_dag(Rng& rng, std::uint32_t max_blocks = 200, std::uint32_t max_m = 8);

}  // namespace eunomia::test
