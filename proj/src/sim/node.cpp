#include "eunomia/sim/node.hpp"

namespace eunomia::sim {

FullNode::FullNode(const SimConfig& config, LedgerConfig ledger)
    : dag(ProtocolParams{config.m, config.pow_bits}, DagOptions{config.pending_cache_limit}),
      tracker(config.m, config.T),
      ledger(ledger),
      ledger_config_(std::move(ledger)) {}

FullNode::SyncResult FullNode::sync() {
  SyncResult r;
  const auto before = tracker.sequence().size();
  const auto up = tracker.update(dag);
  r.appended = up.appended;
  r.rewritten = up.rewritten;
  const auto& seq = tracker.sequence();
  if (up.rewritten) {
    ledger = LedgerState(ledger_config_);
    r.applied = ledger.apply_confirmed(seq, dag);
  } else if (seq.size() > before) {
    r.applied = ledger.apply_confirmed(std::span(seq).subspan(before), dag);
  }
  return r;
}

}  // namespace eunomia::sim
