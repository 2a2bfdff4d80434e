#include "eunomia/sim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include <boost/math/distributions/chi_squared.hpp>

namespace eunomia::sim {

double chi_square_p(double stat, double dof) {
  if (dof <= 0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(stat, 0.0)));
}

double chi_square_uniform(const std::vector<std::uint64_t>& counts) {
  if (counts.empty()) return 0;
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0) return 0;
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

bool MetricsReport::safety_violation() const {
  return consistency_violations > 0 || local_rewrites > 0 || bar_decreases > 0 || delta_violations > 0 ||
         late_deliveries > 0 || undelivered > 0 || digest_mismatches > 0 || double_spends_in_l > 0 ||
         conservation_failures > 0 || spv_valid_then_voided > 0;
}

namespace {

double percentile(std::vector<std::uint64_t> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  rank = std::clamp<std::size_t>(rank, 1, v.size());
  return static_cast<double>(v[rank - 1]);
}

/// Success probability of one query for one given chain.
double per_chain_query_p(const SimConfig& c) {
  if (c.pow_mode == PowMode::Simulated) return c.p();
  return std::ldexp(1.0, -static_cast<int>(c.pow_bits)) / std::ldexp(1.0, static_cast<int>(chain_bits(c.m)));
}

}  // namespace

MetricsReport collect_metrics(const Simulator& sim) {
  MetricsReport r;
  const auto& cfg = sim.config();
  const auto& st = sim.stats();
  const auto& net = sim.network();
  const double rounds = static_cast<double>(std::max<std::uint64_t>(cfg.rounds, 1));
  const double measured_rounds = static_cast<double>(std::max<std::uint64_t>(cfg.rounds - std::min(cfg.warmup, cfg.rounds), 1));

  r.consistency_checks = st.consistency_checks;
  r.consistency_violations = st.consistency_violations;
  r.local_rewrites = st.local_rewrites;
  r.bar_decreases = st.bar_decreases;
  r.delta_violations = st.delta_violations;
  r.late_deliveries = st.late_deliveries;
  r.undelivered = st.undelivered;
  r.double_spends_in_l = st.double_spends_in_l;
  r.conservation_failures = st.conservation_failures;
  r.messages_sent = net.sent();
  r.messages_delivered = net.delivered();
  r.piggybacked = net.piggybacked();
  r.pending_rate = st.inserts ? static_cast<double>(st.pending_inserts) / static_cast<double>(st.inserts) : 0.0;

  if (sim.honest_count() == 0) return r;
  const auto& ref = sim.node(0);

  // Blocks and forks.
  const double qc = per_chain_query_p(cfg);
  r.per_chain_blocks.assign(cfg.m, 0);
  std::map<std::pair<std::uint64_t, std::uint32_t>, std::uint32_t> per_slot;
  for (const auto& b : sim.mined()) {
    ++r.blocks_mined;
    (b.honest ? r.honest_blocks : r.adversary_blocks) += 1;
    ++r.per_chain_blocks[b.chain.value];
    ++per_slot[{b.round, b.chain.value}];
  }
  std::uint64_t forked = 0, stale = 0;
  for (const auto& b : sim.mined()) {
    if (!b.honest) continue;
    if (per_slot[{b.round, b.chain.value}] > 1) ++forked;
    if (!ref.dag.contains(b.id) || !ref.dag.on_main_chain(b.id)) ++stale;
  }
  if (r.honest_blocks > 0) {
    r.fork_fraction = static_cast<double>(forked) / static_cast<double>(r.honest_blocks);
    r.stale_fraction = static_cast<double>(stale) / static_cast<double>(r.honest_blocks);
  }
  r.expected_fork_fraction = 1.0 - std::pow(1.0 - qc, static_cast<double>(cfg.n) - 1.0);
  r.chi_square = chi_square_uniform(r.per_chain_blocks);
  r.chi_square_p = chi_square_p(r.chi_square, static_cast<double>(cfg.m) - 1.0);
  r.block_rate = static_cast<double>(r.blocks_mined) / rounds;
  r.expected_block_rate = static_cast<double>(cfg.n) * qc * cfg.m;
  double heights = 0;
  for (std::uint32_t c = 0; c < cfg.m; ++c) heights += ref.dag.tip_height(ChainIndex{c});
  r.main_growth_per_round = heights / (rounds * cfg.m);
  r.expected_main_growth = 1.0 - std::pow(1.0 - qc, static_cast<double>(cfg.n));

  // Ordering and quality.
  const auto& seq = ref.tracker.sequence();
  r.l_length = seq.size();
  r.bar = ref.tracker.bar();
  {
    std::uint64_t start_round = 0, start_len = 0;
    for (const auto& [round, len] : st.l_length)
      if (round <= cfg.warmup) {
        start_round = round;
        start_len = len;
      }
    const double span = static_cast<double>(cfg.rounds - start_round);
    if (span > 0) r.l_growth_per_round = static_cast<double>(seq.size() - start_len) / span;
  }
  r.l_growth_bound = qc * cfg.m * static_cast<double>(sim.honest_count()) / 2.0;
  std::vector<bool> honest_l;
  honest_l.reserve(seq.size());
  std::uint64_t adv_in_l = 0;
  double reward_total = 0, reward_adv = 0;
  std::unordered_set<Hash, HashHasher> rewarded;
  for (const auto& e : seq) {
    const auto b = ref.dag.find(e.id);
    const bool honest = b && sim.honest_miner(b->header.miner_id);
    honest_l.push_back(honest);
    if (!honest) ++adv_in_l;
    double reward = static_cast<double>(cfg.block_reward);
    if (b)
      for (const auto& tx : b->transactions) {
        const auto v = ref.ledger.final_verdict(tx.id());
        if (v && v->status == TxStatus::Valid && rewarded.insert(tx.id()).second) reward += static_cast<double>(tx.fee());
      }
    reward_total += reward;
    if (!honest) reward_adv += reward;
  }
  if (!seq.empty()) {
    r.honest_fraction_l = 1.0 - static_cast<double>(adv_in_l) / static_cast<double>(seq.size());
    r.adversary_block_share_l = static_cast<double>(adv_in_l) / static_cast<double>(seq.size());
  }
  if (reward_total > 0) r.adversary_reward_share = reward_adv / reward_total;
  r.adversary_query_share = static_cast<double>(cfg.adversary_queries()) / cfg.n;
  r.quality_window = static_cast<std::uint64_t>(cfg.m) * cfg.T;
  r.quality_bound = cfg.rho < 1.0 ? 1.0 - cfg.rho / (1.0 - cfg.rho) : 0.0;
  if (honest_l.size() >= r.quality_window && r.quality_window > 0) {
    std::uint64_t honest_in = 0, ok = 0;
    const auto w = r.quality_window;
    for (std::size_t i = 0; i < honest_l.size(); ++i) {
      honest_in += honest_l[i];
      if (i >= w) honest_in -= honest_l[i - w];
      if (i + 1 < w) continue;
      const double q = static_cast<double>(honest_in) / static_cast<double>(w);
      ++r.quality_windows;
      if (q >= r.quality_bound - 1e-12) ++ok;
      r.quality_min = std::min(r.quality_min, q);
    }
    r.quality_windows_ok = static_cast<double>(ok) / static_cast<double>(r.quality_windows);
  }

  // Liveness: per-chain confirmed blocks that reached L within 2x the horizon.
  r.liveness_horizon = 2.0 * sim.lemma_horizon();
  {
    std::uint64_t within = 0, considered = 0;
    for (const auto& l : sim.liveness()) {
      if (static_cast<double>(l.pc_round) + r.liveness_horizon > static_cast<double>(cfg.rounds)) continue;
      ++considered;
      if (l.latency && static_cast<double>(*l.latency) <= r.liveness_horizon) ++within;
      if (l.latency) r.liveness_max_latency = std::max(r.liveness_max_latency, *l.latency);
    }
    r.liveness_considered = considered;
    r.liveness_within = within;
    r.liveness_fraction = considered ? static_cast<double>(within) / static_cast<double>(considered) : 1.0;
  }

  // Transactions.
  if (const auto* w = sim.workload()) {
    const auto& ws = w->stats();
    r.payments = ws.payments;
    r.tx_submitted = ws.submitted;
    r.tx_reissued = ws.reissued;
    const auto& lat = w->latencies();
    if (!lat.empty()) {
      double sum = 0;
      for (auto x : lat) sum += static_cast<double>(x);
      r.latency_mean = sum / static_cast<double>(lat.size());
      r.latency_p50 = percentile(lat, 0.50);
      r.latency_p90 = percentile(lat, 0.90);
      r.latency_p99 = percentile(lat, 0.99);
    }
  }
  r.tx_confirmed = st.confirmed_txs;
  r.tx_invalid_in_l = ref.ledger.confirmed_invalid_count();
  r.throughput = static_cast<double>(st.confirmed_txs) / measured_rounds;
  for (std::size_t i = 0; i < sim.honest_count(); ++i)
    for (const auto& v : sim.node(i).ledger.void_events()) {
      ++r.void_events;
      if (v.blocks_after >= cfg.T) ++r.voids_outside_window;
      r.max_void_depth = std::max(r.max_void_depth, v.blocks_after);
    }

  // Digests on common L prefixes.
  const auto& base = ref.ledger.checkpoints();
  for (std::size_t i = 1; i < sim.honest_count(); ++i)
    for (const auto& [count, digest] : sim.node(i).ledger.checkpoints()) {
      auto it = base.find(count);
      if (it == base.end()) continue;
      ++r.digest_comparisons;
      if (it->second != digest) ++r.digest_mismatches;
    }

  if (const auto* adv = sim.adversary()) {
    const auto& as = adv->stats();
    r.adversary_released = as.released;
    r.adversary_withheld = adv->withheld();
    r.adversary_invalid = as.invalid;
    r.double_spend_released = as.double_spend_released;
    const auto pay = ref.ledger.final_verdict(adv->pay_tx());
    const auto conflict = ref.ledger.final_verdict(adv->conflict_tx());
    r.double_spend_succeeded = conflict && conflict->status == TxStatus::Valid && pay &&
                               pay->status != TxStatus::Valid;
  }

  // SPV verdicts against node 0's final outcome.
  for (const auto& c : sim.spv_checks()) {
    ++r.spv_samples;
    const auto final = ref.ledger.final_verdict(c.tx_id);
    switch (c.verdict.status) {
      case TxStatus::Valid:
        ++r.spv_valid;
        if (final && final->status == TxStatus::Valid)
          ++r.spv_agree;
        else if (!final && ref.ledger.in_overlay(c.tx_id))
          ++r.spv_unresolved;
        else
          ++r.spv_valid_then_voided;
        break;
      case TxStatus::Invalid:
        ++r.spv_invalid;
        if (final && final->status == TxStatus::Valid)
          ++r.spv_invalid_then_valid;
        else
          ++r.spv_agree;
        break;
      case TxStatus::ProvisionallyValid:
        ++r.spv_provisional;
        break;
    }
  }
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  using nlohmann::json;
  return json{
      {"safety",
       {{"violation", r.safety_violation()},
        {"consistency_checks", r.consistency_checks},
        {"consistency_violations", r.consistency_violations},
        {"local_rewrites", r.local_rewrites},
        {"bar_decreases", r.bar_decreases},
        {"delta_violations", r.delta_violations},
        {"late_deliveries", r.late_deliveries},
        {"undelivered", r.undelivered},
        {"digest_comparisons", r.digest_comparisons},
        {"digest_mismatches", r.digest_mismatches},
        {"double_spends_in_l", r.double_spends_in_l},
        {"conservation_failures", r.conservation_failures}}},
      {"blocks",
       {{"mined", r.blocks_mined},
        {"honest", r.honest_blocks},
        {"adversary", r.adversary_blocks},
        {"per_chain", r.per_chain_blocks},
        {"chi_square", r.chi_square},
        {"chi_square_p", r.chi_square_p},
        {"rate", r.block_rate},
        {"expected_rate", r.expected_block_rate},
        {"fork_fraction", r.fork_fraction},
        {"expected_fork_fraction", r.expected_fork_fraction},
        {"stale_fraction", r.stale_fraction},
        {"main_growth", r.main_growth_per_round},
        {"expected_main_growth", r.expected_main_growth}}},
      {"ordering",
       {{"l_length", r.l_length},
        {"bar", r.bar},
        {"l_growth", r.l_growth_per_round},
        {"l_growth_bound", r.l_growth_bound},
        {"quality_window", r.quality_window},
        {"quality_windows", r.quality_windows},
        {"quality_bound", r.quality_bound},
        {"quality_windows_ok", r.quality_windows_ok},
        {"quality_min", r.quality_min},
        {"honest_fraction", r.honest_fraction_l}}},
      {"liveness",
       {{"horizon", r.liveness_horizon},
        {"considered", r.liveness_considered},
        {"within", r.liveness_within},
        {"fraction", r.liveness_fraction},
        {"max_latency", r.liveness_max_latency}}},
      {"transactions",
       {{"payments", r.payments},
        {"submitted", r.tx_submitted},
        {"confirmed", r.tx_confirmed},
        {"reissued", r.tx_reissued},
        {"invalid_in_l", r.tx_invalid_in_l},
        {"throughput", r.throughput},
        {"latency_mean", r.latency_mean},
        {"latency_p50", r.latency_p50},
        {"latency_p90", r.latency_p90},
        {"latency_p99", r.latency_p99},
        {"void_events", r.void_events},
        {"voids_outside_window", r.voids_outside_window},
        {"max_void_depth", r.max_void_depth}}},
      {"economics",
       {{"adversary_reward_share", r.adversary_reward_share},
        {"adversary_block_share_l", r.adversary_block_share_l},
        {"adversary_query_share", r.adversary_query_share},
        {"released", r.adversary_released},
        {"withheld", r.adversary_withheld},
        {"invalid_blocks", r.adversary_invalid},
        {"double_spend_released", r.double_spend_released},
        {"double_spend_succeeded", r.double_spend_succeeded}}},
      {"network",
       {{"sent", r.messages_sent},
        {"delivered", r.messages_delivered},
        {"piggybacked", r.piggybacked},
        {"pending_rate", r.pending_rate}}},
      {"spv",
       {{"samples", r.spv_samples},
        {"valid", r.spv_valid},
        {"provisional", r.spv_provisional},
        {"invalid", r.spv_invalid},
        {"agree", r.spv_agree},
        {"unresolved", r.spv_unresolved},
        {"valid_then_voided", r.spv_valid_then_voided},
        {"invalid_then_valid", r.spv_invalid_then_valid}}},
  };
}

}  // namespace eunomia::sim
