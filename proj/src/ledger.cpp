#include "eunomia/ledger.hpp"

#include <array>

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace eunomia {

const char* to_string(TxStatus s) {
  switch (s) {
    case TxStatus::Valid: return "valid";
    case TxStatus::ProvisionallyValid: return "provisionally_valid";
    case TxStatus::Invalid: return "invalid";
  }
  return "?";
}

const char* to_string(InvalidReason r) {
  switch (r) {
    case InvalidReason::None: return "none";
    case InvalidReason::Malformed: return "malformed";
    case InvalidReason::UnknownInput: return "unknown_input";
    case InvalidReason::WrongShard: return "wrong_shard";
    case InvalidReason::DoubleSpend: return "double_spend";
    case InvalidReason::VoidedAncestor: return "voided_ancestor";
    case InvalidReason::ValueImbalance: return "value_imbalance";
  }
  return "?";
}

std::vector<UTXO> genesis_utxos(const LedgerConfig& config) {
  std::vector<UTXO> out;
  out.reserve(config.genesis.size());
  for (std::size_t i = 0; i < config.genesis.size(); ++i) {
    const auto& g = config.genesis[i];
    out.push_back(UTXO{allocation_outpoint(i), g.value, g.owner, g.shard});
  }
  return out;
}

LedgerState::LedgerState(LedgerConfig config) : config_(std::move(config)), applied_height_(config_.m, 0) {
  if (config_.m == 0 || config_.T == 0) throw std::invalid_argument("ledger needs m >= 1 and T >= 1");
  for (const auto& u : genesis_utxos(config_)) {
    if (u.shard.value >= config_.m) throw std::invalid_argument("genesis allocation shard out of range");
    add_utxo(u);
    total_value_ += u.value;
  }
  genesis_total_ = total_value_;
  overlay_tip_height_.assign(config_.m, 0);
}

const UTXO* LedgerState::find_confirmed(const OutPoint& o) const {
  auto it = utxo_set_.find(o);
  return it == utxo_set_.end() ? nullptr : &it->second;
}

const ProvisionalOutput* LedgerState::find_provisional(const OutPoint& o) const {
  auto it = provisional_.find(o);
  return it == provisional_.end() ? nullptr : &it->second;
}

const Hash* LedgerState::overlay_block_of(const Hash& tx_id) const {
  auto it = overlay_txs_.find(tx_id);
  return it == overlay_txs_.end() ? nullptr : &it->second.block;
}

std::optional<TxVerdict> LedgerState::final_verdict(const Hash& tx_id) const {
  auto it = final_.find(tx_id);
  if (it == final_.end()) return std::nullopt;
  return it->second;
}

LedgerState::InputInfo LedgerState::lookup_input(const OutPoint& o, bool use_overlay) const {
  InputInfo info;
  if (const auto* u = find_confirmed(o)) {
    if (use_overlay && overlay_spent_.contains(o)) info.reason = InvalidReason::DoubleSpend;
    info.value = u->value;
    info.shard = u->shard;
    return info;
  }
  if (use_overlay) {
    if (const auto* p = find_provisional(o)) {
      if (overlay_spent_.contains(o)) info.reason = InvalidReason::DoubleSpend;
      info.value = p->utxo.value;
      info.shard = p->utxo.shard;
      info.provisional = true;
      return info;
    }
  }
  if (spent_.contains(o))
    info.reason = InvalidReason::DoubleSpend;
  else if (voided_.contains(o))
    info.reason = InvalidReason::VoidedAncestor;
  else
    info.reason = InvalidReason::UnknownInput;
  return info;
}

TxVerdict LedgerState::check(const Transaction& tx, ChainIndex mined_on, bool use_overlay) const {
  if (!tx.well_formed(config_.m)) return TxVerdict::invalid(InvalidReason::Malformed);
  bool provisional = false;
  unsigned __int128 in_total = 0;
  for (const auto& in : tx.inputs()) {
    if (in.shard != mined_on) return TxVerdict::invalid(InvalidReason::WrongShard);
    const auto info = lookup_input(in.prevout, use_overlay);
    if (info.reason != InvalidReason::None) return TxVerdict::invalid(info.reason);
    if (info.shard != in.shard) return TxVerdict::invalid(InvalidReason::WrongShard);
    in_total += info.value;
    provisional = provisional || info.provisional;
  }
  unsigned __int128 out_total = tx.fee();
  for (const auto& out : tx.outputs()) out_total += out.value;
  if (in_total != out_total) return TxVerdict::invalid(InvalidReason::ValueImbalance);
  return provisional ? TxVerdict::provisional() : TxVerdict::valid();
}

TxVerdict LedgerState::validate_transaction(const Transaction& tx, ChainIndex mined_on) const {
  return check(tx, mined_on, true);
}

TxVerdict LedgerState::validate_confirmed(const Transaction& tx, ChainIndex mined_on) const {
  return check(tx, mined_on, false);
}

std::vector<AppliedTx> LedgerState::apply_confirmed(std::span<const ConfirmedEntry> newly, const BlockDag& dag) {
  std::vector<AppliedTx> out;
  for (const auto& entry : newly) {
    std::vector<Hash> accepted;
    if (applied_set_.contains(entry.id)) throw std::logic_error("apply_confirmed: block already applied");
    if (last_ts_ && !(*last_ts_ < entry.ts)) throw std::logic_error("apply_confirmed: sequence does not extend L");
    const auto block = dag.find(entry.id);
    const auto height = dag.height_of(entry.id);
    if (!block || !height || block->chain != entry.ts.chain)
      throw std::logic_error("apply_confirmed: block not in dag");
    if (*height != applied_height_[block->chain.value] + 1)
      throw std::logic_error("apply_confirmed: block does not extend its chain's applied prefix");

    std::uint64_t fees = 0;
    for (const auto& tx : block->transactions) {
      auto verdict = check(tx, block->chain, false);
      auto prior = final_.find(tx.id());
      if (verdict.ok()) {
        for (const auto& in : tx.inputs()) {
          total_value_ -= utxo_set_.at(in.prevout).value;
          remove_utxo(in.prevout);
          spent_.insert(in.prevout);
        }
        for (std::uint32_t pos = 0; pos < tx.outputs().size(); ++pos) {
          const auto& o = tx.outputs()[pos];
          const auto op = tx.output_point(pos);
          add_utxo(UTXO{op, o.value, o.owner, o.shard});
          voided_.erase(op);
          total_value_ += o.value;
        }
        fees += tx.fee();
        final_[tx.id()] = TxVerdict::valid();
        accepted.push_back(tx.id());
      } else {
        ++confirmed_invalid_;
        if (prior == final_.end()) {
          for (std::uint32_t pos = 0; pos < tx.outputs().size(); ++pos) voided_.insert(tx.output_point(pos));
          final_.emplace(tx.id(), verdict);
        }
      }
      out.push_back({tx.id(), block->id, verdict});
    }
    const std::uint64_t reward = config_.block_reward + fees;
    if (reward > 0) {
      const auto op = coinbase_outpoint(block->id);
      add_utxo(UTXO{op, reward, block->header.miner_id, block->chain});
    }
    total_value_ += reward;

    since_refresh_.emplace_back(block->id, std::move(accepted));
    applied_.push_back(block->id);
    applied_set_.insert(block->id);
    applied_height_[block->chain.value] = *height;
    last_ts_ = entry.ts;
    if (config_.checkpoint_every > 0 && applied_.size() % config_.checkpoint_every == 0)
      checkpoints_.emplace(applied_.size(), digest());
  }
  return out;
}

void LedgerState::refresh_overlay(const BlockDag& dag) {
  if (&dag == overlay_dag_ && dag.version() == overlay_dag_version_ && applied_.size() == overlay_applied_) return;
  if (&dag != overlay_dag_ || overlay_applied_ > applied_.size()) {
    rebuild_overlay(dag);
    return;
  }
  std::unordered_set<Hash, HashHasher> stale;
  for (const auto& [id, txs] : overlay_blocks_)
    if (!applied_set_.contains(id) && !dag.on_main_chain(id)) stale.insert(id);
  if (!stale.empty()) {
    on_reorg(stale);
    rebuild_overlay(dag);
    return;
  }
  if (!drop_confirmed_prefix()) {
    rebuild_overlay(dag);
    return;
  }

  const auto items = overlay_items(dag);
  std::size_t common = 0;
  while (common < items.size() && common < overlay_order_.size() && items[common].id == overlay_order_[common].id)
    ++common;
  while (overlay_order_.size() > common) {
    undo_overlay_block(overlay_order_.back().id);
    overlay_order_.pop_back();
  }
  for (std::size_t i = common; i < items.size(); ++i) replay_overlay_block(dag, items[i]);
  overlay_version(dag);
}

bool LedgerState::drop_confirmed_prefix() {
  const std::size_t k = applied_.size() - overlay_applied_;
  if (k == 0) return true;
  if (k > overlay_order_.size() || k != since_refresh_.size()) return false;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& [block, accepted] = since_refresh_[i];
    if (overlay_order_[i].id != block) return false;
    auto it = overlay_blocks_.find(block);
    if (it == overlay_blocks_.end() || it->second != accepted) return false;
    // The overlay never holds coinbase outputs, so a tx that tried to spend
    // one may now become valid.
    if (overlay_unknown_.contains(coinbase_outpoint(block))) return false;
  }
  for (std::size_t i = 0; i < k; ++i) undo_overlay_block(overlay_order_[i].id);
  overlay_order_.erase(overlay_order_.begin(), overlay_order_.begin() + static_cast<std::ptrdiff_t>(k));
  since_refresh_.clear();
  return true;
}

std::vector<LedgerState::OverlayItem> LedgerState::overlay_items(const BlockDag& dag) {
  std::vector<OverlayItem> items;
  for (std::uint32_t c = 0; c < config_.m; ++c) {
    const ChainIndex chain{c};
    const auto tip = dag.tip_height(chain);
    overlay_tip_height_[c] = tip;
    for (std::uint32_t h = applied_height_[c] + 1; h <= tip; ++h)
      items.push_back({{static_cast<std::uint64_t>(dag.main_clock_at(chain, h).v), chain}, h, dag.main_at(chain, h)});
  }
  std::sort(items.begin(), items.end(), [](const OverlayItem& a, const OverlayItem& b) { return a.ts < b.ts; });
  return items;
}

void LedgerState::undo_overlay_block(const Hash& id) {
  auto bit = overlay_blocks_.find(id);
  if (bit != overlay_blocks_.end()) {
    for (auto t = bit->second.rbegin(); t != bit->second.rend(); ++t) {
      auto it = overlay_txs_.find(*t);
      if (it == overlay_txs_.end()) continue;
      for (const auto& in : it->second.inputs) overlay_spent_.erase(in);
      for (std::uint32_t p = 0; p < it->second.outputs; ++p) provisional_.erase(OutPoint{*t, p});
      overlay_txs_.erase(it);
    }
    overlay_blocks_.erase(bit);
  }
  overlay_block_pos_.erase(id);
}

void LedgerState::replay_overlay_block(const BlockDag& dag, const OverlayItem& item) {
  const auto block = dag.find(item.id);
  auto& txs = overlay_blocks_[item.id];
  overlay_block_pos_[item.id] = {item.ts.chain, item.height};
  overlay_order_.push_back(item);
  if (!block) return;
  for (const auto& tx : block->transactions) {
    const auto verdict = check(tx, block->chain, true);
    if (!verdict.ok()) {
      if (verdict.reason == InvalidReason::UnknownInput)
        for (const auto& in : tx.inputs())
          if (lookup_input(in.prevout, true).reason == InvalidReason::UnknownInput) overlay_unknown_.insert(in.prevout);
      continue;
    }
    OverlayTx ot{item.id, {}, static_cast<std::uint32_t>(tx.outputs().size())};
    ot.inputs.reserve(tx.inputs().size());
    for (const auto& in : tx.inputs()) {
      overlay_spent_[in.prevout] = tx.id();
      ot.inputs.push_back(in.prevout);
    }
    for (std::uint32_t pos = 0; pos < tx.outputs().size(); ++pos) {
      const auto& o = tx.outputs()[pos];
      const auto op = tx.output_point(pos);
      provisional_[op] = ProvisionalOutput{UTXO{op, o.value, o.owner, o.shard}, item.id, item.ts.chain, item.height, item.ts.v};
    }
    overlay_txs_.emplace(tx.id(), std::move(ot));
    txs.push_back(tx.id());
  }
}

void LedgerState::overlay_version(const BlockDag& dag) {
  overlay_dag_ = &dag;
  overlay_dag_version_ = dag.version();
  overlay_applied_ = applied_.size();
  since_refresh_.clear();
}

std::vector<OutPoint> LedgerState::on_reorg(const std::unordered_set<Hash, HashHasher>& stale) {
  // Deterministic root order regardless of the set's iteration order.
  std::vector<Hash> roots(stale.begin(), stale.end());
  std::sort(roots.begin(), roots.end(), [&](const Hash& a, const Hash& b) {
    const auto pa = overlay_block_pos_.find(a), pb = overlay_block_pos_.find(b);
    if (pa == overlay_block_pos_.end() || pb == overlay_block_pos_.end()) return a < b;
    return pa->second != pb->second ? pa->second < pb->second : a < b;
  });

  std::vector<OutPoint> voided;
  std::vector<Hash> voided_txs;
  std::unordered_set<Hash, HashHasher> seen;
  for (const auto& root : roots) {
    auto bit = overlay_blocks_.find(root);
    auto pos = overlay_block_pos_.find(root);
    if (bit == overlay_blocks_.end() || pos == overlay_block_pos_.end()) continue;
    const auto [chain, height] = pos->second;
    const auto tip = overlay_tip_height_[chain.value];
    std::deque<Hash> work(bit->second.begin(), bit->second.end());
    while (!work.empty()) {
      const Hash tx = work.front();
      work.pop_front();
      if (!seen.insert(tx).second) continue;
      auto it = overlay_txs_.find(tx);
      if (it == overlay_txs_.end()) continue;
      void_events_.push_back({tx, root, chain, tip > height ? tip - height : 0});
      voided_txs.push_back(tx);
      for (std::uint32_t p = 0; p < it->second.outputs; ++p) {
        const OutPoint o{tx, p};
        voided.push_back(o);
        if (auto sp = overlay_spent_.find(o); sp != overlay_spent_.end()) work.push_back(sp->second);
      }
    }
  }
  for (const auto& tx : voided_txs) {
    auto it = overlay_txs_.find(tx);
    for (const auto& in : it->second.inputs) overlay_spent_.erase(in);
    overlay_txs_.erase(it);
  }
  for (const auto& o : voided) provisional_.erase(o);
  for (const auto& root : roots) overlay_blocks_.erase(root);
  return voided;
}

void LedgerState::rebuild_overlay(const BlockDag& dag) {
  provisional_.clear();
  overlay_spent_.clear();
  overlay_txs_.clear();
  overlay_blocks_.clear();
  overlay_block_pos_.clear();
  overlay_order_.clear();
  overlay_unknown_.clear();
  for (const auto& item : overlay_items(dag)) replay_overlay_block(dag, item);
  overlay_version(dag);
}

bool LedgerState::overlay_matches_rebuild(const BlockDag& dag) const {
  LedgerState fresh = *this;
  fresh.rebuild_overlay(dag);
  if (fresh.provisional_.size() != provisional_.size() || fresh.overlay_spent_ != overlay_spent_ ||
      fresh.overlay_blocks_ != overlay_blocks_ || fresh.overlay_block_pos_ != overlay_block_pos_)
    return false;
  for (const auto& [op, p] : provisional_) {
    auto it = fresh.provisional_.find(op);
    if (it == fresh.provisional_.end() || it->second.origin_block != p.origin_block ||
        it->second.origin_clock != p.origin_clock || it->second.utxo.value != p.utxo.value)
      return false;
  }
  return true;
}

std::map<ChainIndex, std::uint64_t> LedgerState::shard_balance(std::uint32_t owner) const {
  std::map<ChainIndex, std::uint64_t> out;
  for (std::uint32_t c = 0; c < config_.m; ++c) out[ChainIndex{c}] = 0;
  for (const auto& [op, u] : utxo_set_)
    if (u.owner == owner) out[u.shard] += u.value;
  return out;
}

std::map<ChainIndex, std::uint64_t> LedgerState::provisional_balance(std::uint32_t owner) const {
  std::map<ChainIndex, std::uint64_t> out;
  for (std::uint32_t c = 0; c < config_.m; ++c) out[ChainIndex{c}] = 0;
  for (const auto& [op, p] : provisional_)
    if (p.utxo.owner == owner && !overlay_spent_.contains(op)) out[p.utxo.shard] += p.utxo.value;
  return out;
}

namespace {

// 256-bit little-endian limb arithmetic on a digest, for the set hash.
std::array<std::uint64_t, 4> limbs(const Hash& h) {
  std::array<std::uint64_t, 4> out{};
  for (std::size_t i = 0; i < 32; ++i) out[i / 8] |= std::uint64_t{h.bytes[i]} << (8 * (i % 8));
  return out;
}

}  // namespace

void LedgerState::add_utxo(const UTXO& u) {
  if (!utxo_set_.emplace(u.outpoint, u).second) return;
  const auto x = limbs(eunomia::digest(encode_bytes(u)));
  unsigned carry = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto a = set_sum_[i];
    const auto s1 = a + x[i];
    const auto s2 = s1 + carry;
    carry = (s1 < a) || (s2 < s1);
    set_sum_[i] = s2;
  }
}

void LedgerState::remove_utxo(const OutPoint& o) {
  auto it = utxo_set_.find(o);
  if (it == utxo_set_.end()) return;
  const auto x = limbs(eunomia::digest(encode_bytes(it->second)));
  unsigned borrow = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto a = set_sum_[i];
    const auto d1 = a - x[i];
    const auto d2 = d1 - borrow;
    borrow = (a < x[i]) || (d1 < borrow);
    set_sum_[i] = d2;
  }
  utxo_set_.erase(it);
}

Hash LedgerState::digest() const {
  // Sum of per-utxo hashes modulo 2^256, so the digest is maintained
  // incrementally and does not depend on application order.
  ByteWriter w;
  w.u64(utxo_set_.size());
  for (auto limb : set_sum_) w.u64(limb);
  return eunomia::digest(w.bytes());
}

bool PayloadFilter::operator()(const Transaction& tx) {
  if (!tx.well_formed(ledger_.config().m) || tx.shard() != chain_) return false;
  unsigned __int128 in_total = 0;
  for (const auto& in : tx.inputs()) {
    if (spent_.contains(in.prevout)) return false;
    if (auto it = created_.find(in.prevout); it != created_.end()) {
      if (it->second.shard != in.shard) return false;
      in_total += it->second.value;
      continue;
    }
    const auto info = ledger_.lookup_input(in.prevout, true);
    if (info.reason != InvalidReason::None || info.shard != in.shard) return false;
    if (info.provisional) {
      const auto* p = ledger_.find_provisional(in.prevout);
      if (!(GlobalTimestamp{p->origin_clock, p->origin_chain} < GlobalTimestamp{clock_, chain_})) return false;
    }
    in_total += info.value;
  }
  unsigned __int128 out_total = tx.fee();
  for (const auto& out : tx.outputs()) out_total += out.value;
  if (in_total != out_total) return false;
  for (const auto& in : tx.inputs()) spent_.insert(in.prevout);
  for (std::uint32_t pos = 0; pos < tx.outputs().size(); ++pos) created_.emplace(tx.output_point(pos), tx.outputs()[pos]);
  return true;
}

}  // namespace eunomia
