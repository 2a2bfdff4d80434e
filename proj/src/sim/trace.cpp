#include "eunomia/sim/trace.hpp"

#include <sstream>

#include "eunomia/sim/metrics.hpp"
#include "eunomia/sim/simulator.hpp"

namespace eunomia::sim {

using nlohmann::json;

void TraceRecorder::record(json event) {
  digest_ = digest_pair(digest_, eunomia::digest(event.dump()));
  ++count_;
  if (keep_) events_.push_back(std::move(event));
}

Hash TraceRecorder::digest_of(const json& events) {
  Hash h;
  for (const auto& e : events) h = digest_pair(h, eunomia::digest(e.dump()));
  return h;
}

namespace {

json node_digests(const Simulator& sim) {
  json out = json::array();
  for (std::size_t i = 0; i < sim.honest_count(); ++i) out.push_back(sim.node(i).ledger.digest().hex());
  return out;
}

json checkpoint_digests(const Simulator& sim) {
  json out = json::object();
  if (sim.honest_count() == 0) return out;
  for (const auto& [count, d] : sim.node(0).ledger.checkpoints()) out[std::to_string(count)] = d.hex();
  return out;
}

}  // namespace

json trace_document(const Simulator& sim, const json& metrics) {
  const auto& t = sim.trace();
  return json{
      {"format", "eunomia-trace"},
      {"version", 1},
      {"config", config_to_json(sim.config())},
      {"events_kept", t.keeps_events()},
      {"event_count", t.count()},
      {"events", t.events()},
      {"digests",
       {{"trace", t.digest().hex()}, {"ledgers", node_digests(sim)}, {"checkpoints", checkpoint_digests(sim)}}},
      {"metrics", metrics},
  };
}

ReplayResult replay_trace(const json& trace) {
  ReplayResult res;
  try {
    if (trace.value("format", "") != "eunomia-trace") {
      res.detail = "not a trace document";
      return res;
    }
    const auto& stored = trace.at("digests");
    if (trace.value("events_kept", false)) {
      const auto& events = trace.at("events");
      if (events.size() != trace.at("event_count").get<std::uint64_t>() ||
          TraceRecorder::digest_of(events).hex() != stored.at("trace").get<std::string>()) {
        res.detail = "stored events do not match the stored trace digest";
        return res;
      }
    }
    Simulator sim(config_from_json(trace.at("config")));
    sim.run();
    if (sim.trace().digest().hex() != stored.at("trace").get<std::string>()) {
      res.detail = "trace digest differs";
      return res;
    }
    if (node_digests(sim) != stored.at("ledgers")) {
      res.detail = "ledger digests differ";
      return res;
    }
    if (checkpoint_digests(sim) != stored.at("checkpoints")) {
      res.detail = "checkpoint digests differ";
      return res;
    }
    res.ok = true;
    res.detail = "digests match";
  } catch (const std::exception& e) {
    res.detail = e.what();
  }
  return res;
}

std::string confirmed_jsonl(const Simulator& sim) {
  std::ostringstream out;
  if (sim.honest_count() == 0) return {};
  const auto& node = sim.node(0);
  const auto& seq = node.tracker.sequence();
  const auto& rounds = sim.l_rounds();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& e = seq[i];
    json line{{"chain", e.ts.chain.value},
              {"height", node.dag.height_of(e.id).value_or(0)},
              {"clock", e.ts.v},
              {"id", e.id.hex()},
              {"round", i < rounds.size() ? rounds[i] : 0}};
    out << line.dump() << '\n';
  }
  return out.str();
}

json dag_export(const Simulator& sim) {
  json blocks = json::array();
  if (sim.honest_count() == 0) return json{{"m", sim.config().m}, {"blocks", blocks}};
  const auto& dag = sim.node(0).dag;
  for (const auto& e : dag.entries()) {
    json b{{"id", e.id.hex()},
           {"chain", e.chain.value},
           {"height", e.height},
           {"clock", e.clock.v},
           {"genesis", e.genesis},
           {"main", dag.on_main_chain(e.id)},
           {"retained", e.retained}};
    if (!e.genesis) {
      b["parent"] = e.parent.hex();
      b["sync"] = e.sync.hex();
      b["miner"] = e.block->header.miner_id;
      b["round"] = e.block->header.timestamp;
      b["txs"] = e.block->transactions.size();
    }
    blocks.push_back(std::move(b));
  }
  return json{{"m", sim.config().m}, {"blocks", std::move(blocks)}};
}

std::string voided_csv(const Simulator& sim) {
  std::ostringstream out;
  out << "node,tx_id,origin_block,origin_chain,blocks_after\n";
  for (std::size_t i = 0; i < sim.honest_count(); ++i)
    for (const auto& v : sim.node(i).ledger.void_events())
      out << i << ',' << v.tx_id.hex() << ',' << v.origin_block.hex() << ',' << v.origin_chain.value << ','
          << v.blocks_after << '\n';
  return out.str();
}

}  // namespace eunomia::sim
