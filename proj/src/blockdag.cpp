#include "eunomia/blockdag.hpp"

#include <algorithm>
#include <stdexcept>

#include "eunomia/merkle.hpp"

namespace eunomia {

const char* to_string(InsertOutcome o) {
  switch (o) {
    case InsertOutcome::Accepted: return "accepted";
    case InsertOutcome::CachedPending: return "cached_pending";
    case InsertOutcome::RejectedInvalid: return "rejected_invalid";
  }
  return "?";
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::Malformed: return "malformed";
    case RejectReason::PowTag: return "pow";
    case RejectReason::ChainMismatch: return "chain_mismatch";
    case RejectReason::SlotProof: return "slot_proof";
    case RejectReason::ParentChain: return "parent_chain";
    case RejectReason::Clock: return "clock";
  }
  return "?";
}

BlockDag::BlockDag(ProtocolParams params, DagOptions options) : params_(params), options_(options) {
  params_.validate();
  main_.resize(params_.m);
  for (std::uint32_t c = 0; c < params_.m; ++c) {
    auto g = std::make_shared<const Block>(genesis_block(ChainIndex{c}));
    Entry e;
    e.block = g;
    e.id = g->id;
    e.chain = g->chain;
    e.genesis = true;
    e.seq = next_seq_++;
    const auto idx = static_cast<EntryId>(entries_.size());
    entries_.push_back(std::move(e));
    index_.emplace(g->id, idx);
    main_[c].push_back(idx);
  }
}

BlockDag::EntryId BlockDag::lookup(const Hash& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? npos : it->second;
}

bool BlockDag::is_retained(const Hash& id) const {
  const auto e = lookup(id);
  return e != npos && entries_[e].retained;
}

BlockPtr BlockDag::find(const Hash& id) const {
  const auto e = lookup(id);
  return e == npos ? nullptr : entries_[e].block;
}

std::optional<std::uint32_t> BlockDag::height_of(const Hash& id) const {
  const auto e = lookup(id);
  if (e == npos) return std::nullopt;
  return entries_[e].height;
}

std::optional<LogicalClock> BlockDag::clock_of(const Hash& id) const {
  const auto e = lookup(id);
  if (e == npos) return std::nullopt;
  return LogicalClock{entries_[e].clock};
}

bool BlockDag::on_main_chain(const Hash& id) const {
  const auto e = lookup(id);
  if (e == npos) return false;
  const auto& entry = entries_[e];
  const auto& main = main_[entry.chain.value];
  return entry.height < main.size() && main[entry.height] == e;
}

std::vector<Hash> BlockDag::tips() const {
  std::vector<Hash> out;
  out.reserve(params_.m);
  for (std::uint32_t c = 0; c < params_.m; ++c) out.push_back(tip(ChainIndex{c}));
  return out;
}

std::vector<Hash> BlockDag::main_chain(ChainIndex chain) const {
  std::vector<Hash> out;
  const auto& main = main_.at(chain.value);
  out.reserve(main.size());
  for (auto e : main) out.push_back(entries_[e].id);
  return out;
}

Hash BlockDag::select_sync_block() const {
  std::uint32_t best = 0;
  for (std::uint32_t c = 1; c < params_.m; ++c)
    if (entries_[main_[c].back()].clock > entries_[main_[best].back()].clock) best = c;
  return tip(ChainIndex{best});
}

LogicalClock BlockDag::logical_clock(const Block& b) const {
  if (b.is_genesis) return {0};
  const auto p = lookup(b.parent_ref);
  const auto s = lookup(b.header.sync_ref);
  if (p == npos || s == npos) throw std::logic_error("logical_clock: parent or sync block not stored");
  const auto vi = entries_[p].clock;
  const auto vj = entries_[s].clock;
  if (vi > vj) return LogicalClock::invalid();
  return {vj + 1};
}

RejectReason BlockDag::static_check(const Block& b) const {
  if (b.is_genesis) return RejectReason::Malformed;  // genesis blocks are never relayed
  if (b.id != block_id(b.header)) return RejectReason::Malformed;
  if (b.id.leading_zero_bits() < params_.pow_bits) return RejectReason::PowTag;
  if (raw_chain_slot(b.id, params_.m) >= params_.m || b.chain != chain_index_of(b.id, params_.m))
    return RejectReason::ChainMismatch;
  if (b.tx_root != tx_root(b.transactions)) return RejectReason::Malformed;
  if (!verify_leaf(b.header.metadata_root, b.chain.value, metadata_leaf(b.parent_ref, b.tx_root),
                   b.chain_slot_proof))
    return RejectReason::SlotProof;
  return RejectReason::None;
}

BlockDag::Verdict BlockDag::evaluate(const Block& b) const {
  const auto p = lookup(b.parent_ref);
  if (p == npos) return {InsertOutcome::CachedPending, RejectReason::None, b.parent_ref};
  const auto s = lookup(b.header.sync_ref);
  if (s == npos) return {InsertOutcome::CachedPending, RejectReason::None, b.header.sync_ref};
  if (entries_[p].chain != b.chain) return {InsertOutcome::RejectedInvalid, RejectReason::ParentChain, {}};
  if (entries_[p].clock > entries_[s].clock) return {InsertOutcome::RejectedInvalid, RejectReason::Clock, {}};
  return {InsertOutcome::Accepted, RejectReason::None, {}};
}

void BlockDag::accept(BlockPtr b) {
  const auto p = lookup(b->parent_ref);
  const auto s = lookup(b->header.sync_ref);
  Entry e;
  e.id = b->id;
  e.chain = b->chain;
  e.parent = p;
  e.sync = s;
  e.clock = entries_[s].clock + 1;
  e.height = entries_[p].height + 1;
  e.seq = next_seq_++;
  e.block = std::move(b);
  const auto idx = static_cast<EntryId>(entries_.size());
  entries_[p].children.push_back(idx);
  entries_[s].sync_refs += 1;
  index_.emplace(e.id, idx);
  entries_.push_back(std::move(e));
  extend_main(idx);
  ++version_;
}

void BlockDag::extend_main(EntryId idx) {
  const auto& entry = entries_[idx];
  auto& main = main_[entry.chain.value];
  if (entry.height + 1 <= main.size()) return;  // not strictly longer: first received keeps the tip
  std::vector<EntryId> path;
  EntryId cur = idx;
  while (!(entries_[cur].height < main.size() && main[entries_[cur].height] == cur)) {
    path.push_back(cur);
    cur = entries_[cur].parent;
  }
  main.resize(entries_[cur].height + 1);
  for (auto it = path.rbegin(); it != path.rend(); ++it) main.push_back(*it);
}

void BlockDag::cache_pending(BlockPtr b, const Hash& missing) {
  const auto ticket = next_ticket_++;
  pending_[b->id] = PendingInfo{missing, ticket};
  pending_fifo_.emplace_back(b->id, ticket);
  waiting_[missing].push_back(std::move(b));
  while (pending_.size() > options_.pending_limit && !pending_fifo_.empty()) {
    auto [id, t] = pending_fifo_.front();
    pending_fifo_.pop_front();
    auto it = pending_.find(id);
    if (it == pending_.end() || it->second.ticket != t) continue;
    auto wit = waiting_.find(it->second.missing);
    if (wit != waiting_.end()) {
      auto& v = wit->second;
      v.erase(std::remove_if(v.begin(), v.end(), [&](const BlockPtr& x) { return x->id == id; }), v.end());
      if (v.empty()) waiting_.erase(wit);
    }
    pending_.erase(it);
  }
}

InsertStatus BlockDag::insert_block(BlockPtr block) {
  InsertStatus st;
  if (!block) throw std::invalid_argument("insert_block: null block");
  if (index_.contains(block->id) || pruned_.contains(block->id)) return st;
  if (auto it = rejected_.find(block->id); it != rejected_.end()) {
    st.outcome = InsertOutcome::RejectedInvalid;
    st.reason = it->second;
    return st;
  }
  if (auto it = pending_.find(block->id); it != pending_.end()) {
    st.outcome = InsertOutcome::CachedPending;
    st.missing = it->second.missing;
    return st;
  }
  if (auto r = static_check(*block); r != RejectReason::None) {
    // Only header-determined failures are cached: a body that does not match
    // its header must not block the genuine block with the same id.
    if (r == RejectReason::PowTag || r == RejectReason::ChainMismatch) rejected_.emplace(block->id, r);
    st.outcome = InsertOutcome::RejectedInvalid;
    st.reason = r;
    return st;
  }
  const auto v = evaluate(*block);
  st.outcome = v.outcome;
  st.reason = v.reason;
  st.missing = v.missing;
  if (v.outcome == InsertOutcome::RejectedInvalid) {
    rejected_.emplace(block->id, v.reason);
    return st;
  }
  st.changed = true;
  if (v.outcome == InsertOutcome::CachedPending) {
    cache_pending(std::move(block), v.missing);
    return st;
  }

  std::vector<Hash> work{block->id};
  accept(std::move(block));
  st.accepted.push_back(work.back());
  while (!work.empty()) {
    const Hash id = work.back();
    work.pop_back();
    auto wit = waiting_.find(id);
    if (wit == waiting_.end()) continue;
    auto blocked = std::move(wit->second);
    waiting_.erase(wit);
    for (auto& b : blocked) {
      pending_.erase(b->id);
      if (index_.contains(b->id)) continue;
      const auto again = evaluate(*b);
      if (again.outcome == InsertOutcome::Accepted) {
        work.push_back(b->id);
        st.accepted.push_back(b->id);
        accept(std::move(b));
      } else if (again.outcome == InsertOutcome::CachedPending) {
        cache_pending(std::move(b), again.missing);
      } else {
        rejected_.emplace(b->id, again.reason);
      }
    }
  }
  return st;
}

std::size_t BlockDag::prune_stale(std::size_t depth) {
  std::vector<EntryId> stale;
  for (EntryId e = 0; e < entries_.size(); ++e) {
    const auto& entry = entries_[e];
    if (entry.genesis || entry.dropped || entry.retained) continue;
    const auto& main = main_[entry.chain.value];
    if (entry.height < main.size() && main[entry.height] == e) continue;
    if (main.size() - 1 < entry.height + depth) continue;
    stale.push_back(e);
  }
  std::sort(stale.begin(), stale.end(),
            [&](EntryId a, EntryId b) { return entries_[a].height > entries_[b].height; });
  std::size_t pruned = 0;
  for (auto e : stale) {
    auto& entry = entries_[e];
    const bool has_children = std::any_of(entry.children.begin(), entry.children.end(),
                                          [&](EntryId c) { return !entries_[c].dropped; });
    if (entry.sync_refs > 0 || has_children) {
      entry.block = std::make_shared<const Block>(strip_body(*entry.block));
      entry.retained = true;
      ++retained_;
    } else {
      entry.dropped = true;
      entry.block.reset();
      index_.erase(entry.id);
      pruned_.insert(entry.id);
      if (entry.sync != npos) entries_[entry.sync].sync_refs -= 1;
    }
    ++pruned;
  }
  if (pruned > 0) ++version_;
  return pruned;
}

std::vector<BlockDag::EntryView> BlockDag::entries() const {
  std::vector<EntryView> out;
  out.reserve(index_.size());
  for (const auto& e : entries_) {
    if (e.dropped) continue;
    EntryView v;
    v.id = e.id;
    v.chain = e.chain;
    v.height = e.height;
    v.clock = {e.clock};
    v.genesis = e.genesis;
    v.retained = e.retained;
    v.seq = e.seq;
    v.block = e.block;
    if (!e.genesis) {
      v.parent = e.block->parent_ref;
      v.sync = e.block->header.sync_ref;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<LogicalClock> BlockDag::recompute_clocks() const {
  // Post-order over (parent, sync) with an explicit stack.
  std::vector<std::int64_t> value(entries_.size(), LogicalClock::kInvalid);
  std::vector<std::uint8_t> state(entries_.size(), 0);  // 0 new, 1 expanded, 2 done
  auto base_case = [&](EntryId e) {
    const auto& entry = entries_[e];
    if (entry.genesis) return true;
    // Dropped ancestors are gone; their memoized clocks are the starting point.
    return entry.dropped || entry.parent == npos || entry.sync == npos;
  };
  std::vector<EntryId> stack;
  for (EntryId root = 0; root < entries_.size(); ++root) {
    if (state[root] == 2) continue;
    stack.push_back(root);
    while (!stack.empty()) {
      const auto e = stack.back();
      if (state[e] == 2) {
        stack.pop_back();
        continue;
      }
      if (base_case(e)) {
        value[e] = entries_[e].genesis ? 0 : entries_[e].clock;
        state[e] = 2;
        stack.pop_back();
        continue;
      }
      const auto p = entries_[e].parent, s = entries_[e].sync;
      if (state[e] == 0) {
        state[e] = 1;
        if (state[p] != 2) stack.push_back(p);
        if (state[s] != 2) stack.push_back(s);
        continue;
      }
      value[e] = value[p] > value[s] ? LogicalClock::kInvalid : value[s] + 1;
      state[e] = 2;
      stack.pop_back();
    }
  }
  std::vector<LogicalClock> out;
  out.reserve(index_.size());
  for (EntryId e = 0; e < entries_.size(); ++e)
    if (!entries_[e].dropped) out.push_back({value[e]});
  return out;
}

}  // namespace eunomia
