#include "eunomia/sim/adversary.hpp"

#include <algorithm>

#include "eunomia/sim/workload.hpp"

namespace eunomia::sim {

Adversary::Adversary(const SimConfig& config, std::uint32_t miner_id, LedgerConfig ledger, std::size_t genesis_index,
                     Rng rng)
    : config_(config),
      miner_id_(miner_id),
      queries_(config.adversary_queries()),
      node_(config, std::move(ledger)),
      rng_(rng),
      public_height_(config.m, 0),
      private_(config.m),
      honest_progress_(config.m, false),
      tie_(config.m, false),
      ds_genesis_index_(genesis_index) {
  for (std::uint32_t c = 0; c < config.m; ++c) public_.insert(genesis_id(ChainIndex{c}));
  if (config_.adversary.strategy == Strategy::DoubleSpend) {
    const auto& ds = config_.adversary.double_spend;
    const auto coin = allocation_outpoint(ds_genesis_index_);
    const std::uint64_t out = ds.value > 1 ? ds.value - 1 : 0;
    Transaction pay({{coin, ChainIndex{ds.src}}}, {{out, Workload::owner_of(0), ChainIndex{ds.src}}}, ds.value - out);
    Transaction conflict({{coin, ChainIndex{ds.src}}}, {{out, kOwner, ChainIndex{ds.dst}}}, ds.value - out);
    pay_tx_ = pay.id();
    conflict_tx_ = conflict.id();
    conflict_ = std::move(conflict);
    ds_state_ = DsState::Idle;
  }
}

std::optional<GenesisAllocation> Adversary::genesis() const {
  if (config_.adversary.strategy != Strategy::DoubleSpend) return std::nullopt;
  const auto& ds = config_.adversary.double_spend;
  return GenesisAllocation{ds.value, kOwner, ChainIndex{ds.src}};
}

std::size_t Adversary::withheld() const {
  std::size_t n = 0;
  for (const auto& p : private_) n += p.size();
  return n;
}

void Adversary::observe(const BlockPtr& block) {
  const auto st = node_.dag.insert_block(block);
  public_.insert(block->id);
  for (const auto& id : st.accepted) {
    if (!public_.contains(id)) continue;
    const auto b = node_.dag.find(id);
    public_height_[b->chain.value] = std::max(public_height_[b->chain.value], height(id));
    honest_progress_[b->chain.value] = true;
    recent_.push_back(id);
    if (recent_.size() > 64) recent_.pop_front();
  }
}

std::vector<Transaction> Adversary::transactions(std::uint64_t round) {
  std::vector<Transaction> out;
  if (config_.adversary.strategy != Strategy::DoubleSpend || ds_state_ != DsState::Idle) return out;
  if (round < config_.adversary.double_spend.start_round) return out;
  const auto& ds = config_.adversary.double_spend;
  const auto coin = allocation_outpoint(ds_genesis_index_);
  const std::uint64_t value = ds.value > 1 ? ds.value - 1 : 0;
  out.emplace_back(std::vector<TxInput>{{coin, ChainIndex{ds.src}}},
                   std::vector<TxOutput>{{value, Workload::owner_of(0), ChainIndex{ds.src}}}, ds.value - value);
  ds_state_ = DsState::WaitInclusion;
  return out;
}

Hash Adversary::choose_sync() {
  const auto& dag = node_.dag;
  const auto m = dag.chain_count();
  if (config_.adversary.strategy == Strategy::OrderingAttack) {
    switch (config_.adversary.sync_policy) {
      case SyncPolicy::SmallestClock: {
        std::uint32_t best = 0;
        for (std::uint32_t c = 1; c < m; ++c)
          if (dag.main_clock_at(ChainIndex{c}, dag.tip_height(ChainIndex{c})) <
              dag.main_clock_at(ChainIndex{best}, dag.tip_height(ChainIndex{best})))
            best = c;
        return dag.tip(ChainIndex{best});
      }
      case SyncPolicy::Stale:
        for (auto it = recent_.rbegin(); it != recent_.rend(); ++it)
          if (dag.contains(*it) && !dag.on_main_chain(*it)) return *it;
        return genesis_id(ChainIndex{0});
      case SyncPolicy::Random:
        return dag.tip(ChainIndex{static_cast<std::uint32_t>(rng_.below(m))});
    }
  }
  if (ds_state_ == DsState::Private) {
    Hash best = dag.select_sync_block();
    auto bc = dag.clock_of(best)->v;
    const auto pc = dag.clock_of(ds_tip_)->v;
    if (pc > bc) best = ds_tip_;
    return best;
  }
  return dag.select_sync_block();
}

Candidate Adversary::build(std::uint64_t round, const Mempool& pool) {
  auto& dag = node_.dag;
  if (pool.size() > 0) node_.ledger.refresh_overlay(dag);
  CandidateOverrides over;
  const auto src = config_.adversary.double_spend.src;
  if (ds_state_ == DsState::Private) {
    over.parents.resize(config_.m);
    over.parents[src] = ds_tip_;
  }
  const Hash sync = choose_sync();
  over.sync_ref = sync;
  const auto clock = static_cast<std::uint64_t>(dag.clock_of(sync)->v) + 1;
  std::vector<std::vector<Transaction>> payloads(config_.m);
  for (std::uint32_t c = 0; c < config_.m; ++c) {
    if (ds_state_ == DsState::Private && c == src) {
      if (!ds_conflict_mined_) payloads[c].push_back(*conflict_);
      continue;
    }
    if (pool.size(ChainIndex{c}) == 0) continue;
    PayloadFilter filter(node_.ledger, ChainIndex{c}, clock);
    payloads[c] = pool.select(ChainIndex{c}, config_.D, [&](const Transaction& tx) { return filter(tx); });
  }
  return assemble_candidate(dag, std::move(payloads), miner_id_, round, over);
}

void Adversary::release(const Hash& root, std::vector<BlockPtr>& out) {
  std::vector<std::pair<Hash, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    if (public_.contains(id)) continue;
    const auto b = node_.dag.find(id);
    if (!b) continue;
    if (!expanded) {
      stack.push_back({id, true});
      if (!public_.contains(b->header.sync_ref)) stack.push_back({b->header.sync_ref, false});
      if (!public_.contains(b->parent_ref)) stack.push_back({b->parent_ref, false});
      continue;
    }
    public_.insert(id);
    auto& priv = private_[b->chain.value];
    priv.erase(std::remove(priv.begin(), priv.end(), id), priv.end());
    public_height_[b->chain.value] = std::max(public_height_[b->chain.value], height(id));
    ++stats_.released;
    out.push_back(b);
  }
}

void Adversary::release_chain(std::uint32_t c, std::uint32_t up_to_height, std::vector<BlockPtr>& out) {
  const auto ids = private_[c];
  for (const auto& id : ids)
    if (height(id) <= up_to_height) release(id, out);
}

void Adversary::withhold_react(std::vector<BlockPtr>& out, bool after_mining) {
  const auto trigger = config_.adversary.withhold_trigger;
  for (std::uint32_t c = 0; c < config_.m; ++c) {
    auto& priv = private_[c];
    if (priv.empty()) {
      if (!after_mining && honest_progress_[c]) tie_[c] = false;
      continue;
    }
    if (node_.dag.tip(ChainIndex{c}) != priv.back()) {
      // The honest branch overtook the private one.
      stats_.abandoned += priv.size();
      priv.clear();
      tie_[c] = false;
      continue;
    }
    const auto priv_h = height(priv.back());
    const auto lead = priv_h > public_height_[c] ? priv_h - public_height_[c] : 0;
    stats_.max_lead = std::max<std::uint64_t>(stats_.max_lead, lead);
    if (!after_mining && honest_progress_[c]) {
      if (lead <= 1) {
        tie_[c] = lead == 0;
        release_chain(c, priv_h, out);
      } else {
        release_chain(c, public_height_[c], out);
      }
    } else if (trigger > 0 && lead >= trigger) {
      release_chain(c, priv_h, out);
    }
  }
  if (!after_mining) std::fill(honest_progress_.begin(), honest_progress_.end(), false);
}

void Adversary::on_mined(const BlockPtr& b, std::vector<BlockPtr>& out) {
  const auto c = b->chain.value;
  switch (config_.adversary.strategy) {
    case Strategy::Withhold:
      if (tie_[c] && public_.contains(b->parent_ref)) {
        tie_[c] = false;
        release(b->id, out);
      } else {
        private_[c].push_back(b->id);
      }
      break;
    case Strategy::DoubleSpend:
      if (ds_state_ == DsState::Private && c == config_.adversary.double_spend.src) {
        private_[c].push_back(b->id);
        ds_tip_ = b->id;
        for (const auto& tx : b->transactions)
          if (tx.id() == conflict_tx_) ds_conflict_mined_ = true;
      } else {
        release(b->id, out);
      }
      break;
    default:
      release(b->id, out);
  }
}

std::vector<BlockPtr> Adversary::act(std::uint64_t round, const Mempool& pool) {
  std::vector<BlockPtr> out;
  mined_.clear();
  node_.sync();
  auto& dag = node_.dag;
  const auto strategy = config_.adversary.strategy;
  const auto src = config_.adversary.double_spend.src;

  if (strategy == Strategy::DoubleSpend && ds_state_ == DsState::WaitInclusion) {
    node_.ledger.refresh_overlay(dag);
    if (const auto* blk = node_.ledger.overlay_block_of(pay_tx_)) {
      const auto b = dag.find(*blk);
      if (b && b->chain.value == src) {
        ds_fork_ = b->parent_ref;
        ds_tip_ = ds_fork_;
        ds_state_ = DsState::Private;
        stats_.double_spend_forked = true;
      }
    }
  }
  if (strategy == Strategy::Withhold) withhold_react(out, false);

  if (queries_ > 0) {
    const ProtocolParams params{config_.m, config_.pow_bits};
    const MiningParams mining{config_.mp, config_.pow_mode};
    try_mine([&] { return build(round, pool); }, queries_, params, mining, rng_, [&](const BlockPtr& b) {
      ++stats_.mined;
      mined_.push_back(b);
      const auto st = dag.insert_block(b);
      if (st.outcome != InsertOutcome::Accepted) {
        ++stats_.invalid;
        // Honest nodes refuse it too, but they get to see it.
        public_.insert(b->id);
        out.push_back(b);
        return;
      }
      on_mined(b, out);
    });
  }

  if (strategy == Strategy::Withhold) withhold_react(out, true);
  if (strategy == Strategy::DoubleSpend && ds_state_ == DsState::Private) {
    if (ds_conflict_mined_ && height(ds_tip_) > public_height_[src]) {
      release_chain(src, height(ds_tip_), out);
      ds_state_ = DsState::Done;
      stats_.double_spend_released = true;
    } else if (public_height_[src] > height(ds_fork_) + 3 * config_.T) {
      stats_.abandoned += private_[src].size();
      private_[src].clear();
      ds_state_ = DsState::Done;
      stats_.double_spend_abandoned = true;
    }
  }
  return out;
}

}  // namespace eunomia::sim
