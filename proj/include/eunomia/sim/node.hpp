#pragma once

#include <vector>

#include "eunomia/blockdag.hpp"
#include "eunomia/ledger.hpp"
#include "eunomia/ordering.hpp"
#include "eunomia/sim/config.hpp"

namespace eunomia::sim {

/// A dag, its incrementally maintained L, and the ledger that follows L.
class FullNode {
 public:
  FullNode(const SimConfig& config, LedgerConfig ledger);

  struct SyncResult {
    std::vector<AppliedTx> applied;
    std::size_t appended = 0;
    bool rewritten = false;
  };
  /// Brings L and the ledger up to date with the dag. A rewritten L (a
  /// consistency failure) rebuilds the ledger from scratch.
  SyncResult sync();

  BlockDag dag;
  OrderingTracker tracker;
  LedgerState ledger;

 private:
  LedgerConfig ledger_config_;
};

}  // namespace eunomia::sim
