#pragma once

#include <string>

#include "json.hpp"

#include "eunomia/hash.hpp"

namespace eunomia::sim {

/// Per-round event log. The running digest covers every event whether or
/// not the events themselves are kept in memory.
class TraceRecorder {
 public:
  explicit TraceRecorder(bool keep = false) : keep_(keep) {}

  void record(nlohmann::json event);
  const Hash& digest() const { return digest_; }
  std::uint64_t count() const { return count_; }
  bool keeps_events() const { return keep_; }
  const nlohmann::json& events() const { return events_; }

  /// Digest a list of events the same way record() does.
  static Hash digest_of(const nlohmann::json& events);

 private:
  bool keep_;
  Hash digest_;
  std::uint64_t count_ = 0;
  nlohmann::json events_ = nlohmann::json::array();
};

class Simulator;

/// Complete trace document: config, events, digests and metrics.
nlohmann::json trace_document(const Simulator& sim, const nlohmann::json& metrics);

struct ReplayResult {
  bool ok = false;
  std::string detail;
};

/// Re-runs the stored config and compares trace, ledger and checkpoint
/// digests with the stored ones.
ReplayResult replay_trace(const nlohmann::json& trace);

/// Node 0's L, one JSON object per line.
std::string confirmed_jsonl(const Simulator& sim);
/// Node 0's dag: blocks with chain, height, clock and references.
nlohmann::json dag_export(const Simulator& sim);
/// Void events of all honest nodes.
std::string voided_csv(const Simulator& sim);

}  // namespace eunomia::sim
