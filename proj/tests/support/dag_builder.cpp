#include "dag_builder.hpp"

namespace eunomia::test {

DagBuilder::DagBuilder(std::uint32_t m, unsigned pow_bits, std::uint64_t seed)
    : params_{m, pow_bits}, view_(params_), rng_(seed) {}

BlockPtr DagBuilder::make(std::uint32_t chain, const Hash& parent, const Hash& sync, std::vector<Transaction> txs,
                          std::uint32_t miner) {
  std::vector<std::vector<Transaction>> payloads(params_.m);
  payloads.at(chain) = std::move(txs);
  CandidateOverrides over;
  over.parents.assign(params_.m, std::nullopt);
  over.parents[chain] = parent;
  over.sync_ref = sync;
  auto cand = assemble_candidate(view_, std::move(payloads), miner, ++counter_, over);
  return std::make_shared<const Block>(seal_block(cand, params_, rng_, ChainIndex{chain}));
}

NamedDag::NamedDag(std::uint32_t m, unsigned pow_bits) : builder_(m, pow_bits), dag_(builder_.params()) {
  for (std::uint32_t c = 0; c < m; ++c) {
    const std::string name(1, static_cast<char>('A' + c));
    ids_[name + "0"] = genesis_id(ChainIndex{c});
    names_[genesis_id(ChainIndex{c})] = name + "0";
  }
}

BlockPtr NamedDag::make(const std::string& name, const std::string& parent, const std::string& sync,
                        std::vector<Transaction> txs, std::uint32_t miner) {
  const auto chain = static_cast<std::uint32_t>(name.at(0) - 'A');
  auto b = builder_.make(chain, ids_.at(parent), ids_.at(sync), std::move(txs), miner);
  ids_[name] = b->id;
  names_[b->id] = name;
  return b;
}

InsertStatus NamedDag::add(const std::string& name, const std::string& parent, const std::string& sync,
                           std::vector<Transaction> txs, std::uint32_t miner) {
  return dag_.insert_block(make(name, parent, sync, std::move(txs), miner));
}

std::string NamedDag::name_of(const Hash& id) const {
  auto it = names_.find(id);
  return it == names_.end() ? "?" : it->second;
}

NamedDag fig5_dag() {
  NamedDag d(3);
  // name, parent, sync; clocks in the trailing comment.
  d.add("A1", "A0", "A0");  // 1
  d.add("C1", "C0", "A0");  // 1
  d.add("A3", "A1", "C1");  // 2
  d.add("B1", "B0", "C1");  // 2
  d.add("B3", "B1", "A3");  // 3
  d.add("A4", "A3", "B3");  // 4
  d.add("B5", "B3", "B3");  // 4
  d.add("B7", "B5", "A4");  // 5
  d.add("C3", "C1", "A4");  // 5
  d.add("A5", "A4", "B7");  // 6
  d.add("A6", "A5", "A5");  // 7
  d.add("B8", "B7", "A6");  // 8
  d.add("B9", "B8", "B8");  // 9
  d.add("C4", "C3", "B9");  // 10
  d.add("C5", "C4", "C4");  // 11
  return d;
}

}  // namespace eunomia::test
