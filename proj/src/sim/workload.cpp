#include "eunomia/sim/workload.hpp"

#include <algorithm>
#include <cmath>

namespace eunomia::sim {

Workload::Workload(const SimConfig& config, std::size_t genesis_offset, Rng rng)
    : config_(config), genesis_offset_(genesis_offset), rng_(rng) {
  const auto& w = config_.tx_workload;
  resubmit_after_ = w.resubmit_after;
  if (resubmit_after_ == 0)
    resubmit_after_ = static_cast<std::uint64_t>(std::ceil(4.0 * config_.T / (config_.p() * config_.n)));
  coins_.resize(w.clients);
  std::size_t index = genesis_offset_;
  for (std::uint32_t c = 0; c < w.clients; ++c)
    for (std::uint32_t j = 0; j < w.coins_per_client; ++j)
      coins_[c].push_back(Coin{allocation_outpoint(index++), w.coin_value, ChainIndex{(c + j) % config_.m}, false});
}

std::vector<GenesisAllocation> Workload::genesis() const {
  std::vector<GenesisAllocation> out;
  for (std::uint32_t c = 0; c < coins_.size(); ++c)
    for (std::uint32_t j = 0; j < config_.tx_workload.coins_per_client; ++j)
      out.push_back({config_.tx_workload.coin_value, owner_of(c), ChainIndex{(c + j) % config_.m}});
  return out;
}

bool Workload::coin_live(const Coin& c, const LedgerState& ref) const {
  if (ref.spent_in_overlay(c.op)) return false;
  if (ref.find_confirmed(c.op)) return true;
  return config_.tx_workload.spend_provisional && ref.find_provisional(c.op) != nullptr;
}

void Workload::add_coin(std::uint32_t owner, const Coin& c) {
  if (owner < kClientBase || owner - kClientBase >= coins_.size()) return;
  auto& list = coins_[owner - kClientBase];
  for (auto& x : list)
    if (x.op == c.op) {
      x.provisional = x.provisional && c.provisional;
      return;
    }
  list.push_back(c);
}

void Workload::drop_coin(std::uint32_t owner, const OutPoint& op) {
  if (owner < kClientBase || owner - kClientBase >= coins_.size()) return;
  auto& list = coins_[owner - kClientBase];
  list.erase(std::remove_if(list.begin(), list.end(), [&](const Coin& c) { return c.op == op; }), list.end());
}

std::optional<Transaction> Workload::build(std::uint64_t payment_id, std::uint64_t round, const LedgerState& ref,
                                           const Mempool& pool) {
  const auto& pay = payments_.at(payment_id);
  auto& list = coins_[pay.sender];
  list.erase(std::remove_if(list.begin(), list.end(), [&](const Coin& c) { return !coin_live(c, ref); }), list.end());
  if (list.empty()) return std::nullopt;

  const auto first = rng_.below(list.size());
  const ChainIndex shard = list[first].shard;
  std::vector<Coin> inputs{list[first]};
  for (std::size_t i = 0; i < list.size() && inputs.size() < 3; ++i)
    if (i != first && list[i].shard == shard) inputs.push_back(list[i]);
  std::uint64_t total = 0;
  for (const auto& c : inputs) total += c.value;
  if (total < 2) return std::nullopt;

  const auto& w = config_.tx_workload;
  const std::uint64_t fee = std::min<std::uint64_t>(1 + rng_.below(std::max<std::uint64_t>(w.fee_max, 1)), total - 1);
  const std::uint64_t spendable = total - fee;
  const bool whole = spendable < 2 || rng_.bernoulli(0.5);
  const std::uint64_t amount = whole ? spendable : 1 + rng_.below(spendable - 1);

  std::vector<TxOutput> outputs;
  const ChainIndex pay_shard{static_cast<std::uint32_t>(rng_.below(config_.m))};
  outputs.push_back({amount, owner_of(pay.recipient), pay_shard});
  if (amount < spendable) {
    ChainIndex change = shard;
    if (w.change_shard == ChangeShard::Random) {
      change = ChainIndex{static_cast<std::uint32_t>(rng_.below(config_.m))};
    } else if (w.change_shard == ChangeShard::LeastLoaded) {
      for (std::uint32_t c = 0; c < config_.m; ++c)
        if (pool.size(ChainIndex{c}) < pool.size(change)) change = ChainIndex{c};
    }
    outputs.push_back({spendable - amount, owner_of(pay.sender), change});
  }
  std::vector<TxInput> tx_inputs;
  for (const auto& c : inputs) {
    tx_inputs.push_back({c.op, c.shard});
    if (c.provisional) ++stats_.provisional_spends;
  }
  for (const auto& o : outputs)
    if (o.shard != shard) ++stats_.cross_shard_outputs;
  Transaction tx(std::move(tx_inputs), std::move(outputs), fee);

  list.erase(std::remove_if(list.begin(), list.end(),
                            [&](const Coin& c) {
                              return std::any_of(inputs.begin(), inputs.end(),
                                                 [&](const Coin& x) { return x.op == c.op; });
                            }),
             list.end());
  const auto serial = next_serial_++;
  by_tx_[tx.id()] = serial;
  pending_.emplace(serial, Pending{tx, payment_id, round, false, std::move(inputs)});
  ++stats_.submitted;
  return tx;
}

std::vector<Transaction> Workload::generate(std::uint64_t round, const LedgerState& ref, const Mempool& pool,
                                            std::uint32_t budget) {
  std::vector<Transaction> out;
  const auto clients = static_cast<std::uint32_t>(coins_.size());
  if (clients < 2) return out;

  std::vector<std::uint64_t> retry;
  for (auto pid : reissue_) {
    if (out.size() >= budget) {
      retry.push_back(pid);
      continue;
    }
    if (auto tx = build(pid, round, ref, pool)) {
      ++stats_.reissued;
      out.push_back(std::move(*tx));
    } else {
      retry.push_back(pid);
    }
  }
  reissue_ = std::move(retry);

  const auto wanted = rng_.poisson(config_.tx_workload.rate);
  for (std::uint64_t i = 0; i < wanted && out.size() < budget; ++i) {
    const auto sender = static_cast<std::uint32_t>(rng_.below(clients));
    if (coins_[sender].empty()) continue;
    auto recipient = static_cast<std::uint32_t>(rng_.below(clients - 1));
    if (recipient >= sender) ++recipient;
    const auto pid = next_payment_++;
    payments_.emplace(pid, Payment{sender, recipient, round});
    ++stats_.payments;
    if (auto tx = build(pid, round, ref, pool))
      out.push_back(std::move(*tx));
    else
      payments_.erase(pid);
  }
  return out;
}

void Workload::fail(std::uint64_t serial, const LedgerState*) {
  auto it = pending_.find(serial);
  auto& p = it->second;
  const auto& pay = payments_.at(p.payment);
  for (const auto& c : p.inputs) add_coin(owner_of(pay.sender), c);
  for (std::uint32_t pos = 0; pos < p.tx.outputs().size(); ++pos)
    drop_coin(p.tx.outputs()[pos].owner, p.tx.output_point(pos));
  ++stats_.voided;
  reissue_.push_back(p.payment);
  by_tx_.erase(p.tx.id());
  pending_.erase(it);
}

void Workload::on_confirmed(const std::vector<AppliedTx>& applied, std::uint64_t round) {
  for (const auto& a : applied) {
    auto bit = by_tx_.find(a.tx_id);
    if (bit == by_tx_.end()) continue;
    const auto serial = bit->second;
    if (!a.verdict.ok()) {
      fail(serial, nullptr);
      continue;
    }
    auto& p = pending_.at(serial);
    for (std::uint32_t pos = 0; pos < p.tx.outputs().size(); ++pos) {
      const auto& o = p.tx.outputs()[pos];
      add_coin(o.owner, Coin{p.tx.output_point(pos), o.value, o.shard, false});
    }
    ++stats_.confirmed;
    const auto first = payments_.at(p.payment).first_round;
    if (first >= config_.warmup) latencies_.push_back(round - first);
    payments_.erase(p.payment);
    by_tx_.erase(bit);
    pending_.erase(serial);
  }
}

void Workload::on_round_end(std::uint64_t round, const LedgerState& ref, Mempool& pool) {
  std::vector<std::uint64_t> failed;
  for (auto& [serial, p] : pending_) {
    const bool in_overlay = ref.in_overlay(p.tx.id());
    if (!p.exposed && in_overlay && config_.tx_workload.spend_provisional) {
      for (std::uint32_t pos = 0; pos < p.tx.outputs().size(); ++pos) {
        const auto& o = p.tx.outputs()[pos];
        add_coin(o.owner, Coin{p.tx.output_point(pos), o.value, o.shard, true});
      }
      p.exposed = true;
    } else if (p.exposed && !in_overlay) {
      p.exposed = false;
    }
    if (round - p.submitted < resubmit_after_) continue;
    p.submitted = round;
    if (in_overlay) continue;
    if (!ref.validate_transaction(p.tx, p.tx.shard()).ok()) {
      pool.remove(p.tx.id());
      failed.push_back(serial);
    } else {
      pool.add(p.tx);
    }
  }
  for (auto s : failed) fail(s, &ref);
}

}  // namespace eunomia::sim
