#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "eunomia/blockdag.hpp"
#include "eunomia/ordering.hpp"
#include "eunomia/types.hpp"

namespace eunomia {

enum class TxStatus { Valid, ProvisionallyValid, Invalid };

enum class InvalidReason {
  None,
  Malformed,
  UnknownInput,
  WrongShard,
  DoubleSpend,
  VoidedAncestor,
  ValueImbalance,
};

const char* to_string(TxStatus s);
const char* to_string(InvalidReason r);

struct TxVerdict {
  TxStatus status = TxStatus::Valid;
  InvalidReason reason = InvalidReason::None;

  static TxVerdict valid() { return {}; }
  static TxVerdict provisional() { return {TxStatus::ProvisionallyValid, InvalidReason::None}; }
  static TxVerdict invalid(InvalidReason r) { return {TxStatus::Invalid, r}; }
  bool ok() const { return status != TxStatus::Invalid; }
  bool operator==(const TxVerdict&) const = default;
};

struct GenesisAllocation {
  std::uint64_t value = 0;
  std::uint32_t owner = 0;
  ChainIndex shard;
};

struct LedgerConfig {
  std::uint32_t m = 1;
  std::uint32_t T = 6;
  std::uint64_t block_reward = 0;
  std::vector<GenesisAllocation> genesis;
  /// Record a utxo-set digest each time this many L blocks have been applied.
  std::size_t checkpoint_every = 0;
};

std::vector<UTXO> genesis_utxos(const LedgerConfig& config);

struct AppliedTx {
  Hash tx_id;
  Hash block;
  TxVerdict verdict;
};

/// A transaction of the provisional overlay that lost its footing because a
/// block it (transitively) depends on left the main chain.
struct VoidEvent {
  Hash tx_id;
  Hash origin_block;
  ChainIndex origin_chain;
  /// Blocks that followed the origin on its old main chain at void time.
  std::uint32_t blocks_after = 0;
};

struct ProvisionalOutput {
  UTXO utxo;
  Hash origin_block;
  ChainIndex origin_chain;
  std::uint32_t origin_height = 0;
  std::uint64_t origin_clock = 0;
};

/// Sharded UTXO set. The confirmed part follows L exactly; the overlay
/// replays the not yet globally ordered main-chain blocks of one dag in
/// (clock, chain) order on top of it.
class LedgerState {
 public:
  explicit LedgerState(LedgerConfig config);

  const LedgerConfig& config() const { return config_; }

  /// Applies blocks that extend the already applied part of L, in order.
  /// Throws std::logic_error for a non-extending sequence or unknown block.
  /// The overlay is left as is; call refresh_overlay before querying it.
  std::vector<AppliedTx> apply_confirmed(std::span<const ConfirmedEntry> newly, const BlockDag& dag);

  /// Brings the overlay up to date with the dag's unordered main-chain
  /// blocks. Blocks of the previous overlay that went stale are passed to
  /// on_reorg first. Without a reorg only the changed suffix of the replay
  /// order is redone.
  void refresh_overlay(const BlockDag& dag);
  /// Debug check: the overlay equals one replayed from scratch.
  bool overlay_matches_rebuild(const BlockDag& dag) const;
  /// Voids every overlay output created in one of `stale` and everything
  /// that transitively spent them. Returns the voided outpoints.
  std::vector<OutPoint> on_reorg(const std::unordered_set<Hash, HashHasher>& stale);

  /// Verdict for including tx in a block of `mined_on`, against the
  /// confirmed set plus overlay.
  TxVerdict validate_transaction(const Transaction& tx, ChainIndex mined_on) const;
  /// Same, but ignoring the overlay.
  TxVerdict validate_confirmed(const Transaction& tx, ChainIndex mined_on) const;

  struct InputInfo {
    InvalidReason reason = InvalidReason::None;
    std::uint64_t value = 0;
    ChainIndex shard;
    bool provisional = false;
  };
  /// Spendability of one outpoint; reason is None when it can be spent.
  InputInfo lookup_input(const OutPoint& o, bool use_overlay) const;

  std::map<ChainIndex, std::uint64_t> shard_balance(std::uint32_t owner) const;
  std::map<ChainIndex, std::uint64_t> provisional_balance(std::uint32_t owner) const;

  const std::map<OutPoint, UTXO>& utxo_set() const { return utxo_set_; }
  const std::map<OutPoint, ProvisionalOutput>& provisional() const { return provisional_; }
  const UTXO* find_confirmed(const OutPoint& o) const;
  const ProvisionalOutput* find_provisional(const OutPoint& o) const;
  /// Spent by a transaction of the overlay.
  bool spent_in_overlay(const OutPoint& o) const { return overlay_spent_.contains(o); }
  /// The overlay holds a valid copy of this transaction.
  bool in_overlay(const Hash& tx_id) const { return overlay_txs_.contains(tx_id); }
  const Hash* overlay_block_of(const Hash& tx_id) const;
  std::optional<TxVerdict> final_verdict(const Hash& tx_id) const;

  Hash digest() const;
  std::uint64_t total_value() const { return total_value_; }
  std::uint64_t expected_total() const { return genesis_total_ + config_.block_reward * applied_.size(); }
  std::size_t applied_count() const { return applied_.size(); }
  const std::vector<Hash>& applied_blocks() const { return applied_; }
  std::uint32_t applied_height(ChainIndex chain) const { return applied_height_.at(chain.value); }
  const std::map<std::size_t, Hash>& checkpoints() const { return checkpoints_; }
  const std::vector<VoidEvent>& void_events() const { return void_events_; }
  std::size_t confirmed_invalid_count() const { return confirmed_invalid_; }

 private:
  struct OverlayTx {
    Hash block;
    std::vector<OutPoint> inputs;
    std::uint32_t outputs = 0;
  };

  struct OverlayItem {
    GlobalTimestamp ts;
    std::uint32_t height;
    Hash id;
  };

  TxVerdict check(const Transaction& tx, ChainIndex mined_on, bool use_overlay) const;
  std::vector<OverlayItem> overlay_items(const BlockDag& dag);
  void replay_overlay_block(const BlockDag& dag, const OverlayItem& item);
  void undo_overlay_block(const Hash& id);
  bool drop_confirmed_prefix();
  void overlay_version(const BlockDag& dag);
  void add_utxo(const UTXO& u);
  void remove_utxo(const OutPoint& o);
  void rebuild_overlay(const BlockDag& dag);

  LedgerConfig config_;
  std::map<OutPoint, UTXO> utxo_set_;
  std::array<std::uint64_t, 4> set_sum_{};
  std::unordered_set<OutPoint, OutPointHasher> spent_;
  std::unordered_set<OutPoint, OutPointHasher> voided_;
  std::unordered_map<Hash, TxVerdict, HashHasher> final_;
  std::vector<Hash> applied_;
  std::unordered_set<Hash, HashHasher> applied_set_;
  std::vector<std::uint32_t> applied_height_;
  std::optional<GlobalTimestamp> last_ts_;
  std::uint64_t total_value_ = 0;
  std::uint64_t genesis_total_ = 0;
  std::size_t confirmed_invalid_ = 0;
  std::map<std::size_t, Hash> checkpoints_;

  std::map<OutPoint, ProvisionalOutput> provisional_;
  std::unordered_map<OutPoint, Hash, OutPointHasher> overlay_spent_;
  std::unordered_map<Hash, OverlayTx, HashHasher> overlay_txs_;
  std::unordered_map<Hash, std::vector<Hash>, HashHasher> overlay_blocks_;
  std::unordered_map<Hash, std::pair<ChainIndex, std::uint32_t>, HashHasher> overlay_block_pos_;
  std::vector<std::uint32_t> overlay_tip_height_;
  std::vector<OverlayItem> overlay_order_;
  /// Inputs that overlay txs could not find (may over-approximate).
  std::unordered_set<OutPoint, OutPointHasher> overlay_unknown_;
  /// Blocks applied since the last refresh, with the txs they accepted.
  std::vector<std::pair<Hash, std::vector<Hash>>> since_refresh_;
  std::uint64_t overlay_dag_version_ = UINT64_MAX;
  std::size_t overlay_applied_ = SIZE_MAX;
  const BlockDag* overlay_dag_ = nullptr;
  std::vector<VoidEvent> void_events_;
};

/// Per-payload scratch validation for candidate assembly: accepts txs the
/// ledger deems valid or provisionally valid, and lets later txs of the
/// same payload spend outputs of earlier ones. Provisional inputs must come
/// from blocks that precede the candidate in the global order, otherwise
/// the spend would be applied before its origin.
class PayloadFilter {
 public:
  PayloadFilter(const LedgerState& ledger, ChainIndex chain, std::uint64_t candidate_clock)
      : ledger_(ledger), chain_(chain), clock_(candidate_clock) {}
  bool operator()(const Transaction& tx);

 private:
  const LedgerState& ledger_;
  ChainIndex chain_;
  std::uint64_t clock_;
  std::unordered_set<OutPoint, OutPointHasher> spent_;
  std::unordered_map<OutPoint, TxOutput, OutPointHasher> created_;
};

}  // namespace eunomia
