#include "eunomia/sim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace eunomia::sim {

namespace {

using nlohmann::json;

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<Strategy> kStrategies[] = {{Strategy::Honest, "honest"},
                                              {Strategy::DelayMax, "delay_max"},
                                              {Strategy::Withhold, "withhold"},
                                              {Strategy::OrderingAttack, "ordering_attack"},
                                              {Strategy::DoubleSpend, "double_spend"}};
constexpr EnumName<SyncPolicy> kSyncPolicies[] = {
    {SyncPolicy::SmallestClock, "smallest_clock"}, {SyncPolicy::Stale, "stale"}, {SyncPolicy::Random, "random"}};
constexpr EnumName<DelayPolicy> kDelayPolicies[] = {{DelayPolicy::Auto, "auto"},
                                                    {DelayPolicy::Min, "min"},
                                                    {DelayPolicy::Max, "max"},
                                                    {DelayPolicy::Split, "split"},
                                                    {DelayPolicy::Random, "random"}};
constexpr EnumName<ChangeShard> kChangeShards[] = {
    {ChangeShard::Random, "random"}, {ChangeShard::LeastLoaded, "least_loaded"}, {ChangeShard::Same, "same"}};
constexpr EnumName<PowMode> kPowModes[] = {{PowMode::Simulated, "simulated"},
                                           {PowMode::LeadingZeros, "leading_zeros"}};

template <typename E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <typename E, std::size_t N>
E parse_enum(const EnumName<E> (&table)[N], const json& j, const char* field) {
  if (!j.is_string()) throw std::invalid_argument(std::string(field) + ": expected a string");
  const auto s = j.get<std::string>();
  for (const auto& e : table)
    if (s == e.name) return e.value;
  throw std::invalid_argument(std::string(field) + ": unknown value '" + s + "'");
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.contains(key)) throw std::invalid_argument(std::string(where) + ": unknown field '" + key + "'");
}

template <typename T>
void read(const json& j, const char* field, T& out) {
  auto it = j.find(field);
  if (it == j.end()) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) throw std::invalid_argument(std::string(field) + ": expected a boolean");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) throw std::invalid_argument(std::string(field) + ": expected a number");
  } else {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0))
      throw std::invalid_argument(std::string(field) + ": expected a non-negative integer");
  }
  out = it->get<T>();
}

}  // namespace

const char* to_string(Strategy s) { return name_of(kStrategies, s); }
const char* to_string(SyncPolicy s) { return name_of(kSyncPolicies, s); }
const char* to_string(DelayPolicy s) { return name_of(kDelayPolicies, s); }
const char* to_string(ChangeShard s) { return name_of(kChangeShards, s); }

std::uint32_t SimConfig::adversary_queries() const {
  return static_cast<std::uint32_t>(std::floor(rho * n + 1e-9));
}

DelayPolicy SimConfig::effective_delay_policy() const {
  if (delay_policy != DelayPolicy::Auto) return delay_policy;
  return adversary.strategy == Strategy::DelayMax ? DelayPolicy::Max : DelayPolicy::Min;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (m == 0) fail("m must be >= 1");
  if (m > 4096) fail("m must be <= 4096");
  if (n == 0) fail("n must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) fail("rho must be in [0, 1)");
  if (delta == 0) fail("delta must be >= 1");
  if (!(mp > 0.0 && mp <= 1.0)) fail("mp must be in (0, 1]");
  if (T == 0) fail("T must be >= 1");
  if (pow_bits > 32) fail("pow.bits must be <= 32");
  if (honest_count() == 0) fail("at least one honest participant is required");
  if (prune_depth != 0 && prune_depth < T) fail("prune_depth must be 0 or >= T");
  if (sample_interval == 0) fail("sample_interval must be >= 1");
  if (tx_workload.rate < 0) fail("tx_workload.rate must be >= 0");
  if (tx_workload.rate > 0 && tx_workload.clients < 2) fail("tx_workload needs at least 2 clients");
  for (const auto& g : genesis_allocation)
    if (g.shard.value >= m) fail("genesis_allocation shard out of range");
  if (adversary.strategy == Strategy::DoubleSpend) {
    if (adversary.double_spend.src >= m || adversary.double_spend.dst >= m) fail("double_spend shards out of range");
    if (adversary_queries() == 0) fail("double_spend needs rho * n >= 1");
    if (tx_workload.clients == 0) fail("double_spend needs at least one client as the merchant");
  }
}

SimConfig config_from_json(const json& j) {
  check_keys(j, "config",
             {"m", "n", "rho", "delta", "mp", "T", "D", "mu", "rounds", "seed", "k", "pow", "block_reward",
              "tx_workload", "genesis_allocation", "adversary", "delay_policy", "sample_interval", "digest_interval",
              "pending_cache_limit", "prune_depth", "piggyback", "spv_samples", "warmup"});
  SimConfig c;
  read(j, "m", c.m);
  read(j, "n", c.n);
  read(j, "rho", c.rho);
  read(j, "delta", c.delta);
  read(j, "mp", c.mp);
  read(j, "T", c.T);
  read(j, "D", c.D);
  read(j, "mu", c.mu);
  read(j, "rounds", c.rounds);
  read(j, "seed", c.seed);
  read(j, "k", c.k);
  read(j, "block_reward", c.block_reward);
  read(j, "sample_interval", c.sample_interval);
  read(j, "digest_interval", c.digest_interval);
  read(j, "pending_cache_limit", c.pending_cache_limit);
  read(j, "prune_depth", c.prune_depth);
  read(j, "piggyback", c.piggyback);
  read(j, "spv_samples", c.spv_samples);
  read(j, "warmup", c.warmup);
  if (auto it = j.find("delay_policy"); it != j.end()) c.delay_policy = parse_enum(kDelayPolicies, *it, "delay_policy");
  if (auto it = j.find("pow"); it != j.end()) {
    check_keys(*it, "pow", {"mode", "bits"});
    if (auto mode = it->find("mode"); mode != it->end()) c.pow_mode = parse_enum(kPowModes, *mode, "pow.mode");
    read(*it, "bits", c.pow_bits);
  }
  if (auto it = j.find("tx_workload"); it != j.end()) {
    check_keys(*it, "tx_workload",
               {"rate", "clients", "coins_per_client", "coin_value", "fee_max", "change_shard", "resubmit_after",
                "spend_provisional"});
    auto& w = c.tx_workload;
    read(*it, "rate", w.rate);
    read(*it, "clients", w.clients);
    read(*it, "coins_per_client", w.coins_per_client);
    read(*it, "coin_value", w.coin_value);
    read(*it, "fee_max", w.fee_max);
    read(*it, "resubmit_after", w.resubmit_after);
    read(*it, "spend_provisional", w.spend_provisional);
    if (auto cs = it->find("change_shard"); cs != it->end())
      w.change_shard = parse_enum(kChangeShards, *cs, "tx_workload.change_shard");
  }
  if (auto it = j.find("genesis_allocation"); it != j.end()) {
    if (!it->is_array()) throw std::invalid_argument("genesis_allocation: expected an array");
    for (const auto& g : *it) {
      check_keys(g, "genesis_allocation[]", {"value", "owner", "shard"});
      GenesisAllocation a;
      std::uint32_t shard = 0;
      read(g, "value", a.value);
      read(g, "owner", a.owner);
      read(g, "shard", shard);
      a.shard = ChainIndex{shard};
      c.genesis_allocation.push_back(a);
    }
  }
  if (auto it = j.find("adversary"); it != j.end()) {
    check_keys(*it, "adversary", {"strategy", "withhold_trigger", "sync_policy", "double_spend"});
    auto& a = c.adversary;
    if (auto s = it->find("strategy"); s != it->end()) a.strategy = parse_enum(kStrategies, *s, "adversary.strategy");
    if (auto s = it->find("sync_policy"); s != it->end())
      a.sync_policy = parse_enum(kSyncPolicies, *s, "adversary.sync_policy");
    read(*it, "withhold_trigger", a.withhold_trigger);
    if (auto d = it->find("double_spend"); d != it->end()) {
      check_keys(*d, "adversary.double_spend", {"src", "dst", "value", "start_round"});
      read(*d, "src", a.double_spend.src);
      read(*d, "dst", a.double_spend.dst);
      read(*d, "value", a.double_spend.value);
      read(*d, "start_round", a.double_spend.start_round);
    }
  }
  c.validate();
  return c;
}

json config_to_json(const SimConfig& c) {
  json genesis = json::array();
  for (const auto& g : c.genesis_allocation)
    genesis.push_back({{"value", g.value}, {"owner", g.owner}, {"shard", g.shard.value}});
  const auto& w = c.tx_workload;
  const auto& a = c.adversary;
  return {
      {"m", c.m},
      {"n", c.n},
      {"rho", c.rho},
      {"delta", c.delta},
      {"mp", c.mp},
      {"T", c.T},
      {"D", c.D},
      {"mu", c.mu},
      {"rounds", c.rounds},
      {"seed", c.seed},
      {"k", c.k},
      {"pow", {{"mode", name_of(kPowModes, c.pow_mode)}, {"bits", c.pow_bits}}},
      {"block_reward", c.block_reward},
      {"tx_workload",
       {{"rate", w.rate},
        {"clients", w.clients},
        {"coins_per_client", w.coins_per_client},
        {"coin_value", w.coin_value},
        {"fee_max", w.fee_max},
        {"change_shard", to_string(w.change_shard)},
        {"resubmit_after", w.resubmit_after},
        {"spend_provisional", w.spend_provisional}}},
      {"genesis_allocation", genesis},
      {"adversary",
       {{"strategy", to_string(a.strategy)},
        {"withhold_trigger", a.withhold_trigger},
        {"sync_policy", to_string(a.sync_policy)},
        {"double_spend",
         {{"src", a.double_spend.src},
          {"dst", a.double_spend.dst},
          {"value", a.double_spend.value},
          {"start_round", a.double_spend.start_round}}}}},
      {"delay_policy", to_string(c.delay_policy)},
      {"sample_interval", c.sample_interval},
      {"digest_interval", c.digest_interval},
      {"pending_cache_limit", c.pending_cache_limit},
      {"prune_depth", c.prune_depth},
      {"piggyback", c.piggyback},
      {"spv_samples", c.spv_samples},
      {"warmup", c.warmup},
  };
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace eunomia::sim
