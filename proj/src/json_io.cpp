#include "eunomia/json_io.hpp"

namespace eunomia {

void to_json(nlohmann::json& j, const Hash& h) { j = h.hex(); }
void to_json(nlohmann::json& j, const ChainIndex& c) { j = c.value; }

void to_json(nlohmann::json& j, const OutPoint& o) {
  j = nlohmann::json{{"tx_id", o.tx_id}, {"position", o.position}};
}

void to_json(nlohmann::json& j, const UTXO& u) {
  j = nlohmann::json{{"outpoint", u.outpoint}, {"value", u.value}, {"owner", u.owner}, {"shard", u.shard}};
}

void to_json(nlohmann::json& j, const Transaction& tx) {
  auto inputs = nlohmann::json::array();
  for (const auto& in : tx.inputs()) inputs.push_back({{"prevout", in.prevout}, {"shard", in.shard}});
  auto outputs = nlohmann::json::array();
  for (const auto& out : tx.outputs())
    outputs.push_back({{"value", out.value}, {"owner", out.owner}, {"shard", out.shard}});
  j = nlohmann::json{{"tx_id", tx.id()}, {"inputs", inputs}, {"outputs", outputs}, {"fee", tx.fee()}};
}

void to_json(nlohmann::json& j, const BlockHeader& h) {
  j = nlohmann::json{{"version", h.version},         {"timestamp", h.timestamp}, {"nonce", h.nonce},
                     {"metadata_root", h.metadata_root}, {"sync_ref", h.sync_ref},   {"miner_id", h.miner_id}};
}

void to_json(nlohmann::json& j, const MerkleProof& p) {
  auto steps = nlohmann::json::array();
  for (const auto& s : p.siblings) steps.push_back({{"hash", s.hash}, {"left", s.sibling_on_left}});
  j = nlohmann::json{{"leaf_index", p.leaf_index}, {"siblings", steps}};
}

void to_json(nlohmann::json& j, const Block& b) {
  j = nlohmann::json{{"id", b.id},
                     {"chain", b.chain},
                     {"genesis", b.is_genesis},
                     {"header", b.header},
                     {"parent_ref", b.parent_ref},
                     {"tx_root", b.tx_root},
                     {"transactions", b.transactions},
                     {"chain_slot_proof", b.chain_slot_proof}};
}

}  // namespace eunomia
