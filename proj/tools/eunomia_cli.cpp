#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "eunomia/sim/config.hpp"
#include "eunomia/sim/metrics.hpp"
#include "eunomia/sim/simulator.hpp"
#include "eunomia/sim/trace.hpp"
#include "eunomia/spv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eunomia;
using namespace eunomia::sim;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kBadInput = 2;

std::string default_out_dir() {
  if (const char* env = std::getenv("EUNOMIA_OUT_DIR"); env && *env) return env;
  return "out";
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << data;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

json load_config_json(const std::string& path) {
  auto j = read_json_file(path);
  config_from_json(j);  // validates
  return j;
}

struct RunOutput {
  MetricsReport report;
  json metrics;
};

RunOutput execute(const SimConfig& cfg, const fs::path& out_dir, bool keep_events, bool write_artifacts) {
  Simulator sim(cfg, SimOptions{keep_events});
  sim.run();
  RunOutput r{collect_metrics(sim), {}};
  r.metrics = to_json(r.report);
  fs::create_directories(out_dir);
  write_file(out_dir / "metrics.json", r.metrics.dump(2) + "\n");
  if (write_artifacts) {
    write_file(out_dir / "trace.json", trace_document(sim, r.metrics).dump() + "\n");
    write_file(out_dir / "confirmed.jsonl", confirmed_jsonl(sim));
    write_file(out_dir / "dag.json", dag_export(sim).dump() + "\n");
    write_file(out_dir / "voided.csv", voided_csv(sim));
    if (const auto& ex = sim.spv_example()) {
      write_bytes(out_dir / "proof.bin", ex->first);
      write_bytes(out_dir / "headers.bin", ex->second);
    }
  }
  return r;
}

/// "m=1,2;rho=0,0.2" -> [("m", [1, 2]), ("rho", [0, 0.2])]. Keys may be
/// dotted paths into the config object; values are parsed as JSON, falling
/// back to plain strings.
std::vector<std::pair<std::string, std::vector<json>>> parse_grid(const std::string& grid) {
  std::vector<std::pair<std::string, std::vector<json>>> out;
  std::stringstream ss(grid);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("bad grid entry '" + part + "'");
    std::vector<json> values;
    std::stringstream vs(part.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) {
      if (v.empty()) continue;
      try {
        values.push_back(json::parse(v));
      } catch (const json::parse_error&) {
        values.emplace_back(v);
      }
    }
    if (values.empty()) throw std::invalid_argument("grid entry '" + part + "' has no values");
    out.emplace_back(part.substr(0, eq), std::move(values));
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

void set_path(json& j, const std::string& dotted, const json& value) {
  json* cur = &j;
  std::stringstream ss(dotted);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(ss, key, '.')) keys.push_back(key);
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) cur = &(*cur)[keys[i]];
  (*cur)[keys.back()] = value;
}

std::string csv_value(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out, bool no_events) {
  SimConfig cfg;
  try {
    cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  const auto r = execute(cfg, out, !no_events, true);
  const bool bad = r.report.safety_violation();
  std::cout << "rounds=" << cfg.rounds << " L=" << r.report.l_length << " violations=" << r.report.consistency_violations
            << " throughput=" << r.report.throughput << " out=" << out << "\n";
  if (bad) std::cerr << "safety violation, see " << (fs::path(out) / "metrics.json").string() << "\n";
  return bad ? kViolation : kOk;
}

int cmd_replay(const std::string& trace_path) {
  json trace;
  try {
    trace = read_json_file(trace_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  const auto res = replay_trace(trace);
  (res.ok ? std::cout : std::cerr) << res.detail << "\n";
  return res.ok ? kOk : kViolation;
}

int cmd_spv_verify(const std::string& proof_path, const std::string& headers_path) {
  std::vector<std::uint8_t> proof_bytes, header_bytes;
  try {
    proof_bytes = read_bytes(proof_path);
    header_bytes = read_bytes(headers_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  TxVerdict verdict = TxVerdict::invalid(InvalidReason::Malformed);
  try {
    const auto state = decode_light_client(header_bytes);
    const auto proof = decode_spv_proof(proof_bytes);
    verdict = spv_verify(state, proof);
  } catch (const std::exception& e) {
    std::cout << "Invalid (" << e.what() << ")\n";
    return kViolation;
  }
  std::cout << to_string(verdict.status);
  if (verdict.status == TxStatus::Invalid) std::cout << " (" << to_string(verdict.reason) << ")";
  std::cout << "\n";
  return verdict.status == TxStatus::Valid ? kOk : kViolation;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_spec, std::uint32_t seeds, const std::string& out) {
  json base;
  std::vector<std::pair<std::string, std::vector<json>>> grid;
  std::vector<json> points;
  try {
    base = load_config_json(config_path);
    grid = parse_grid(grid_spec);
    points.push_back(base);
    for (const auto& [key, values] : grid) {
      std::vector<json> next;
      for (const auto& p : points)
        for (const auto& v : values) {
          auto q = p;
          set_path(q, key, v);
          next.push_back(std::move(q));
        }
      points = std::move(next);
    }
    for (const auto& p : points) config_from_json(p);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }

  fs::create_directories(out);
  std::ostringstream csv;
  for (const auto& [key, values] : grid) csv << key << ',';
  csv << "seed,violation,consistency_violations,l_length,l_growth,quality_windows_ok,liveness_fraction,"
         "throughput,latency_mean,adversary_reward_share,voids_outside_window,fork_fraction,chi_square_p\n";
  bool any_violation = false;
  const auto base_seed = base.value("seed", std::uint64_t{1});
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::uint32_t s = 0; s < seeds; ++s) {
      auto p = points[i];
      p["seed"] = base_seed + s;
      const auto cfg = config_from_json(p);
      std::ostringstream name;
      name << "point" << i << "_seed" << cfg.seed;
      const auto r = execute(cfg, fs::path(out) / name.str(), false, false);
      const auto& m = r.report;
      any_violation |= m.safety_violation();
      for (const auto& [key, values] : grid) {
        const json* cur = &p;
        std::stringstream ks(key);
        std::string k;
        while (std::getline(ks, k, '.')) cur = &cur->at(k);
        csv << csv_value(*cur) << ',';
      }
      csv << cfg.seed << ',' << m.safety_violation() << ',' << m.consistency_violations << ',' << m.l_length << ','
          << m.l_growth_per_round << ',' << m.quality_windows_ok << ',' << m.liveness_fraction << ',' << m.throughput
          << ',' << m.latency_mean << ',' << m.adversary_reward_share << ',' << m.voids_outside_window << ','
          << m.fork_fraction << ',' << m.chi_square_p << '\n';
    }
  }
  write_file(fs::path(out) / "summary.csv", csv.str());
  std::cout << points.size() << " grid points x " << seeds << " seeds -> " << (fs::path(out) / "summary.csv").string()
            << "\n";
  return any_violation ? kViolation : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-chain protocol simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = default_out_dir(), trace_path, proof_path, headers_path, grid;
  std::optional<std::uint64_t> seed;
  bool no_events = false;
  std::uint32_t seeds = 1;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Output directory (default $EUNOMIA_OUT_DIR or ./out)");
  run->add_flag("--no-events", no_events, "Keep only the trace digest, not the event list");

  auto* replay = app.add_subcommand("replay", "Re-run a trace and compare digests");
  replay->add_option("--trace", trace_path, "trace.json written by run")->required();

  auto* spv = app.add_subcommand("spv-verify", "Check an SPV proof against a header file");
  spv->add_option("--proof", proof_path, "Encoded proof")->required();
  spv->add_option("--headers", headers_path, "Encoded light-client header set")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  sweep->add_option("--config", config_path, "Base config (JSON)")->required();
  sweep->add_option("--grid", grid, "Grid such as \"m=1,2;rho=0,0.2\"")->required();
  sweep->add_option("--seeds", seeds, "Seeds per grid point")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*run) return cmd_run(config_path, seed, out_dir, no_events);
    if (*replay) return cmd_replay(trace_path);
    if (*spv) return cmd_spv_verify(proof_path, headers_path);
    if (*sweep) return cmd_sweep(config_path, grid, seeds, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kBadInput;
}
