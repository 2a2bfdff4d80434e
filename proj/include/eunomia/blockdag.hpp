#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "eunomia/types.hpp"

namespace eunomia {

/// Virtual logical clock of a block; kInvalid marks a block whose parent is
/// ahead of its synchronized block.
struct LogicalClock {
  static constexpr std::int64_t kInvalid = -1;
  std::int64_t v = 0;

  bool valid() const { return v >= 0; }
  static constexpr LogicalClock invalid() { return {kInvalid}; }
  auto operator<=>(const LogicalClock&) const = default;
};

/// Total-order key of globally ordered blocks: clock first, then chain index.
struct GlobalTimestamp {
  std::uint64_t v = 0;
  ChainIndex chain;
  auto operator<=>(const GlobalTimestamp&) const = default;
};

enum class InsertOutcome { Accepted, CachedPending, RejectedInvalid };

enum class RejectReason { None, Malformed, PowTag, ChainMismatch, SlotProof, ParentChain, Clock };

const char* to_string(InsertOutcome o);
const char* to_string(RejectReason r);

struct InsertStatus {
  InsertOutcome outcome = InsertOutcome::Accepted;
  Hash missing;
  RejectReason reason = RejectReason::None;
  /// False for idempotent re-inserts.
  bool changed = false;
  /// Blocks that became part of the dag, in acceptance order: the inserted
  /// block first, then any pending blocks it unblocked.
  std::vector<Hash> accepted;
};

struct DagOptions {
  std::size_t pending_limit = 10000;
};

/// One node's local view: per-chain block trees, memoized logical clocks,
/// longest-chain tips (first received wins ties), a bounded cache of blocks
/// waiting for their parent or synchronized block, and retained headers of
/// pruned stale blocks that are still referenced as sync targets.
class BlockDag {
 public:
  using EntryId = std::uint32_t;
  static constexpr EntryId npos = UINT32_MAX;

  struct EntryView {
    Hash id;
    ChainIndex chain;
    std::uint32_t height = 0;
    LogicalClock clock;
    Hash parent;
    Hash sync;
    bool genesis = false;
    bool retained = false;
    std::uint64_t seq = 0;
    BlockPtr block;
  };

  explicit BlockDag(ProtocolParams params, DagOptions options = {});

  const ProtocolParams& params() const { return params_; }
  std::uint32_t chain_count() const { return params_.m; }

  InsertStatus insert_block(BlockPtr block);
  InsertStatus insert_block(const Block& block) { return insert_block(std::make_shared<const Block>(block)); }

  /// Clock of a block whose parent and sync target are stored. Throws
  /// std::logic_error when either is missing.
  LogicalClock logical_clock(const Block& block) const;
  std::optional<LogicalClock> clock_of(const Hash& id) const;
  /// Tip with the largest clock among the m main-chain tips; lowest chain
  /// index on ties.
  Hash select_sync_block() const;
  std::vector<Hash> main_chain(ChainIndex chain) const;
  /// Drops bodies of stale blocks at least `depth` below their chain's tip.
  /// Blocks still referenced as sync targets (or with stored children) keep
  /// header, slot proof and clock. Returns the number of bodies dropped.
  std::size_t prune_stale(std::size_t depth);

  bool contains(const Hash& id) const { return index_.contains(id); }
  bool is_pending(const Hash& id) const { return pending_.contains(id); }
  bool is_retained(const Hash& id) const;
  /// Stored block (stripped of transactions when retained), or null.
  BlockPtr find(const Hash& id) const;
  std::optional<std::uint32_t> height_of(const Hash& id) const;
  bool on_main_chain(const Hash& id) const;

  const Hash& tip(ChainIndex chain) const { return id_at(main_[chain.value].back()); }
  std::vector<Hash> tips() const;
  std::uint32_t tip_height(ChainIndex chain) const {
    return static_cast<std::uint32_t>(main_[chain.value].size() - 1);
  }
  /// Main chain of `chain` has heights 0 (genesis) .. tip_height.
  const Hash& main_at(ChainIndex chain, std::uint32_t height) const {
    return id_at(main_[chain.value].at(height));
  }
  LogicalClock main_clock_at(ChainIndex chain, std::uint32_t height) const {
    return {entries_[main_[chain.value].at(height)].clock};
  }

  std::size_t size() const { return index_.size(); }
  std::size_t pending_count() const { return pending_.size(); }
  std::size_t retained_count() const { return retained_; }
  /// Incremented whenever the stored block set or a tip changes.
  std::uint64_t version() const { return version_; }

  /// Stored blocks in acceptance order.
  std::vector<EntryView> entries() const;
  /// Clocks of entries() recomputed from parent/sync references with an
  /// explicit work-list (no recursion), starting from genesis and from the
  /// memoized clocks of retained headers whose ancestry was pruned.
  std::vector<LogicalClock> recompute_clocks() const;

 private:
  struct Entry {
    BlockPtr block;
    Hash id;
    EntryId parent = npos;
    EntryId sync = npos;
    std::int64_t clock = 0;
    std::uint32_t height = 0;
    std::uint64_t seq = 0;
    std::uint32_t sync_refs = 0;
    ChainIndex chain;
    bool genesis = false;
    bool retained = false;
    bool dropped = false;
    std::vector<EntryId> children;
  };

  struct Verdict {
    InsertOutcome outcome;
    RejectReason reason = RejectReason::None;
    Hash missing;
  };

  struct PendingInfo {
    Hash missing;
    std::uint64_t ticket = 0;
  };

  const Hash& id_at(EntryId e) const { return entries_[e].id; }
  EntryId lookup(const Hash& id) const;
  RejectReason static_check(const Block& b) const;
  Verdict evaluate(const Block& b) const;
  void accept(BlockPtr b);
  void cache_pending(BlockPtr b, const Hash& missing);
  void extend_main(EntryId e);

  ProtocolParams params_;
  DagOptions options_;
  std::vector<Entry> entries_;
  std::unordered_map<Hash, EntryId, HashHasher> index_;
  std::vector<std::vector<EntryId>> main_;
  std::unordered_map<Hash, std::vector<BlockPtr>, HashHasher> waiting_;
  std::unordered_map<Hash, PendingInfo, HashHasher> pending_;
  std::deque<std::pair<Hash, std::uint64_t>> pending_fifo_;
  std::unordered_map<Hash, RejectReason, HashHasher> rejected_;
  std::unordered_set<Hash, HashHasher> pruned_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t version_ = 0;
  std::size_t retained_ = 0;
};

}  // namespace eunomia
