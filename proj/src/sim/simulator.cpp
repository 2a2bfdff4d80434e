#include "eunomia/sim/simulator.hpp"

#include <algorithm>

#include "eunomia/ordering.hpp"

namespace eunomia::sim {

namespace {

enum Stream : std::uint64_t { kNetStream = 1, kMineStream, kWorkloadStream, kAdversaryStream, kSpvStream };

}  // namespace

Simulator::Simulator(SimConfig config, SimOptions options)
    : config_(std::move(config)),
      net_rng_(config_.seed, kNetStream),
      mine_rng_(config_.seed, kMineStream),
      network_((config_.validate(), config_.honest_count()), config_.delta),
      pool_(config_.m),
      trace_(options.keep_trace) {
  auto alloc = config_.genesis_allocation;
  if (config_.tx_workload.clients > 0) {
    workload_ = std::make_unique<Workload>(config_, alloc.size(), Rng(config_.seed, kWorkloadStream));
    const auto g = workload_->genesis();
    alloc.insert(alloc.end(), g.begin(), g.end());
  }
  const std::size_t ds_index = alloc.size();
  const bool has_adversary = config_.adversary_queries() > 0;
  if (has_adversary && config_.adversary.strategy == Strategy::DoubleSpend) {
    const auto& ds = config_.adversary.double_spend;
    alloc.push_back({ds.value, Adversary::kOwner, ChainIndex{ds.src}});
  }
  ledger_config_ = LedgerConfig{config_.m, config_.T, config_.block_reward, std::move(alloc), config_.digest_interval};

  const auto h = config_.honest_count();
  for (std::uint32_t i = 0; i < h; ++i) nodes_.push_back(std::make_unique<FullNode>(config_, ledger_config_));
  if (has_adversary)
    adversary_ = std::make_unique<Adversary>(config_, Adversary::kOwner, ledger_config_, ds_index,
                                             Rng(config_.seed, kAdversaryStream));

  checked_.assign(h, 0);
  last_bar_.assign(h, 0);
  last_rewrites_.assign(h, 0);
  last_version_.assign(h, UINT64_MAX);
  pc_height_.assign(h, std::vector<std::uint32_t>(config_.m, 0));
  pc_round_.resize(h);
  last_checkpoints_.assign(h, 0);
  if (config_.spv_samples > 0) spv_round_ = std::max<std::uint64_t>(1, config_.rounds * 7 / 10);
}

double Simulator::lemma_horizon() const {
  return 4.0 * config_.T / (config_.p() * config_.n);
}

BlockPtr Simulator::block(const Hash& id) const {
  auto it = registry_.find(id);
  return it == registry_.end() ? nullptr : it->second;
}

void Simulator::run() {
  while (step()) {
  }
}

bool Simulator::step() {
  if (round_ >= config_.rounds) {
    if (!finished_) finish();
    return false;
  }
  const auto r = ++round_;

  const auto msgs = network_.take_due(r);
  for (const auto& msg : msgs) deliver(msg, true);
  if (!msgs.empty()) trace_.record({{"r", r}, {"e", "deliver"}, {"n", msgs.size()}});

  if (workload_) {
    auto& ref = *nodes_.front();
    ref.ledger.refresh_overlay(ref.dag);
    for (const auto& tx : workload_->generate(r, ref.ledger, pool_, config_.mu)) {
      if (pool_.add(tx))
        ++stats_.tx_emitted;
      else
        ++stats_.tx_rejected_by_pool;
    }
  }
  if (adversary_)
    for (const auto& tx : adversary_->transactions(r)) pool_.add(tx);

  for (std::size_t i = 0; i < nodes_.size(); ++i) mine_honest(i);

  if (adversary_) {
    const auto out = adversary_->act(r, pool_);
    for (const auto& b : adversary_->last_mined()) {
      registry_.try_emplace(b->id, b);
      const auto clock = adversary_->dag().clock_of(b->id);
      mined_.push_back({r, b->id, b->chain, b->header.miner_id, false, clock ? clock->v : LogicalClock::kInvalid});
      trace_.record({{"r", r}, {"e", "mined"}, {"id", b->id.hex()}, {"c", b->chain.value}, {"honest", false}});
    }
    for (const auto& b : out)
      for (std::uint32_t j = 0; j < nodes_.size(); ++j) network_.send(b, j, r, 1, false);
    if (!out.empty()) trace_.record({{"r", r}, {"e", "release"}, {"n", out.size()}});
  }

  sync_nodes();
  if (workload_) {
    auto& ref = *nodes_.front();
    ref.ledger.refresh_overlay(ref.dag);
    workload_->on_round_end(r, ref.ledger, pool_);
  }
  if (r % config_.sample_interval == 0 || r == config_.rounds) check_consistency();
  if (config_.prune_depth > 0 && r % 64 == 0)
    for (auto& node : nodes_) stats_.pruned += node->dag.prune_stale(config_.prune_depth);
  if (r == spv_round_) sample_spv();
  if (r == config_.rounds) finish();
  return true;
}

void Simulator::deliver(const Message& msg, bool relay_on) {
  if (msg.honest && msg.due - msg.sent > config_.delta) ++stats_.late_deliveries;
  auto& node = *nodes_[msg.to];
  const auto st = node.dag.insert_block(msg.block);
  if (!st.changed) return;
  ++stats_.inserts;
  if (st.outcome == InsertOutcome::CachedPending) ++stats_.pending_inserts;
  if (st.outcome == InsertOutcome::RejectedInvalid) ++stats_.rejected_inserts;
  if (relay_on)
    for (const auto& id : st.accepted) relay(msg.to, id);
}

void Simulator::relay(std::size_t from, const Hash& id) {
  auto b = block(id);
  if (!b) return;
  const auto policy = config_.effective_delay_policy();
  for (std::uint32_t j = 0; j < nodes_.size(); ++j) {
    if (j == from) continue;
    const auto& dag = nodes_[j]->dag;
    if (dag.contains(id) || dag.is_pending(id)) continue;
    const auto delay = honest_delay(policy, static_cast<std::uint32_t>(from), j, config_.delta, net_rng_);
    if (config_.piggyback) {
      const auto& s = b->header.sync_ref;
      if (!dag.contains(s) && !dag.is_pending(s))
        if (auto sb = block(s)) network_.send(sb, j, round_, delay, true, true);
    }
    network_.send(b, j, round_, delay, true);
  }
}

void Simulator::broadcast(std::size_t from, const BlockPtr& b) {
  registry_.try_emplace(b->id, b);
  if (adversary_) adversary_->observe(b);
  relay(from, b->id);
}

void Simulator::mine_honest(std::size_t i) {
  auto& node = *nodes_[i];
  const ProtocolParams params{config_.m, config_.pow_bits};
  const MiningParams mining{config_.mp, config_.pow_mode};
  const auto r = round_;
  auto build = [&] {
    if (pool_.size() > 0) node.ledger.refresh_overlay(node.dag);
    const auto sync = node.dag.select_sync_block();
    const auto clock = static_cast<std::uint64_t>(node.dag.clock_of(sync)->v) + 1;
    std::vector<std::vector<Transaction>> payloads(config_.m);
    for (std::uint32_t c = 0; c < config_.m; ++c) {
      if (pool_.size(ChainIndex{c}) == 0) continue;
      PayloadFilter filter(node.ledger, ChainIndex{c}, clock);
      payloads[c] = pool_.select(ChainIndex{c}, config_.D, [&](const Transaction& tx) { return filter(tx); });
    }
    return assemble_candidate(node.dag, std::move(payloads), static_cast<std::uint32_t>(i), r);
  };
  try_mine(build, 1, params, mining, mine_rng_, [&](const BlockPtr& b) {
    node.dag.insert_block(b);
    const auto clock = node.dag.clock_of(b->id);
    mined_.push_back({r, b->id, b->chain, b->header.miner_id, true, clock ? clock->v : LogicalClock::kInvalid});
    trace_.record({{"r", r}, {"e", "mined"}, {"id", b->id.hex()}, {"c", b->chain.value}, {"honest", true}});
    broadcast(i, b);
  });
}

void Simulator::sync_nodes() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& node = *nodes_[i];
    const auto before = node.tracker.sequence().size();
    auto res = node.sync();
    if (res.rewritten) {
      ++stats_.local_rewrites;
      checked_[i] = 0;
      last_checkpoints_[i] = 0;
    }
    if (node.tracker.bar() < last_bar_[i]) ++stats_.bar_decreases;
    last_bar_[i] = node.tracker.bar();
    track_liveness(i, {res.appended, res.rewritten}, before);

    if (!res.applied.empty() && node.ledger.total_value() != node.ledger.expected_total())
      ++stats_.conservation_failures;

    const auto& cps = node.ledger.checkpoints();
    for (auto it = cps.upper_bound(last_checkpoints_[i]); it != cps.end(); ++it) {
      trace_.record({{"r", round_}, {"e", "checkpoint"}, {"node", i}, {"L", it->first}, {"digest", it->second.hex()}});
      last_checkpoints_[i] = it->first;
    }

    // Other nodes refresh their overlay lazily, when they assemble a block.
    if (i != 0) continue;
    node.ledger.refresh_overlay(node.dag);
    if (res.rewritten) consumed_.clear();
    l_rounds_.resize(std::min(l_rounds_.size(), res.rewritten ? 0 : before));
    l_rounds_.resize(node.tracker.sequence().size(), round_);
    std::unordered_set<Hash, HashHasher> seen;
    for (const auto& a : res.applied) {
      pool_.remove(a.tx_id);
      if (a.verdict.status != TxStatus::Valid || !seen.insert(a.tx_id).second) continue;
      if (round_ > config_.warmup) ++stats_.confirmed_txs;
      const auto b = node.dag.find(a.block);
      if (!b) continue;
      for (const auto& tx : b->transactions) {
        if (tx.id() != a.tx_id) continue;
        for (const auto& in : tx.inputs())
          if (!consumed_.insert(in.prevout).second) ++stats_.double_spends_in_l;
        break;
      }
    }
    if (workload_) workload_->on_confirmed(res.applied, round_);
  }
}

void Simulator::track_liveness(std::size_t i, const OrderingTracker::Update& up, std::size_t before) {
  auto& node = *nodes_[i];
  auto& rounds = pc_round_[i];
  const auto v = node.dag.version();
  if (v != last_version_[i]) {
    last_version_[i] = v;
    for (std::uint32_t c = 0; c < config_.m; ++c) {
      const ChainIndex chain{c};
      const auto h = confirmed_height(node.dag, chain, config_.T);
      auto& ph = pc_height_[i][c];
      for (auto x = ph + 1; x <= h; ++x) rounds.try_emplace(node.dag.main_at(chain, x), round_);
      ph = h;
    }
  }
  const auto& seq = node.tracker.sequence();
  if (up.rewritten) before = 0;
  for (auto k = before; k < seq.size(); ++k) {
    auto it = rounds.find(seq[k].id);
    if (it == rounds.end()) continue;
    if (!up.rewritten) liveness_.push_back({it->second, round_ - it->second});
    rounds.erase(it);
  }
}

void Simulator::check_consistency() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& seq = nodes_[i]->tracker.sequence();
    ++stats_.consistency_checks;
    auto k = std::min(checked_[i], seq.size());
    bool bad = false;
    for (; k < seq.size(); ++k) {
      if (k < reference_.size()) {
        if (!(seq[k] == reference_[k])) {
          bad = true;
          break;
        }
      } else {
        reference_.push_back(seq[k]);
      }
    }
    if (bad) {
      ++stats_.consistency_violations;
      checked_[i] = 0;
    } else {
      checked_[i] = k;
    }
    trace_.record({{"r", round_}, {"e", "sample"}, {"node", i}, {"L", seq.size()}, {"bar", nodes_[i]->tracker.bar()}});
  }
  if (!nodes_.empty()) stats_.l_length.emplace_back(round_, nodes_.front()->tracker.sequence().size());
}

void Simulator::sample_spv() {
  const auto& node = *nodes_.front();
  SpvProver prover(node.dag, config_.T);
  auto state = export_light_client(node.dag, config_.spv_k(), config_.T, genesis_utxos(ledger_config_));
  const LightClient client(state);
  std::vector<Hash> ids;
  for (std::uint32_t c = 0; c < config_.m; ++c) {
    const ChainIndex chain{c};
    for (std::uint32_t h = 1; h <= node.dag.tip_height(chain); ++h)
      for (const auto& tx : node.dag.find(node.dag.main_at(chain, h))->transactions) ids.push_back(tx.id());
  }
  Rng rng(config_.seed, kSpvStream);
  const auto n = std::min<std::size_t>(config_.spv_samples, ids.size());
  for (std::size_t j = 0; j < n; ++j) {
    std::swap(ids[j], ids[j + rng.below(ids.size() - j)]);
    const auto proof = prover.prove(ids[j]);
    if (!proof) continue;
    const auto verdict = client.verify(*proof);
    spv_checks_.push_back({ids[j], round_, verdict, proof->ancestry.size()});
    if (!spv_example_ && verdict.status == TxStatus::Valid)
      spv_example_.emplace(encode_bytes(*proof), encode_bytes(state));
  }
}

void Simulator::finish() {
  // Flush what is still in flight, without further relays.
  for (std::uint64_t d = 1; d <= config_.delta; ++d)
    for (const auto& msg : network_.take_due(config_.rounds + d)) deliver(msg, false);
  stats_.undelivered = network_.in_flight();
  stats_.delta_violations = network_.delta_violations();
  if (config_.rounds > 0) {
    sync_nodes();
    check_consistency();
  }
  for (const auto& rounds : pc_round_)
    for (const auto& [id, pc] : rounds) liveness_.push_back({pc, std::nullopt});
  std::sort(liveness_.begin(), liveness_.end(), [](const LivenessRecord& a, const LivenessRecord& b) {
    return a.pc_round != b.pc_round ? a.pc_round < b.pc_round : a.latency < b.latency;
  });
  if (config_.spv_samples > 0 && spv_checks_.empty() && config_.rounds > 0) sample_spv();

  finished_ = true;
  if (config_.rounds == 0) return;
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : nodes_)
    nodes.push_back({{"L", node->tracker.sequence().size()},
                     {"bar", node->tracker.bar()},
                     {"ledger", node->ledger.digest().hex()}});
  trace_.record({{"r", round_}, {"e", "end"}, {"nodes", std::move(nodes)}});
}

}  // namespace eunomia::sim
