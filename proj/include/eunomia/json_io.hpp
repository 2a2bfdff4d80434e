#pragma once

// JSON renderings of the core types, for traces and human inspection. The
// canonical binary encoding stays the source of truth for hashing.

#include "json.hpp"

#include "eunomia/types.hpp"

namespace eunomia {

void to_json(nlohmann::json& j, const Hash& h);
void to_json(nlohmann::json& j, const ChainIndex& c);
void to_json(nlohmann::json& j, const OutPoint& o);
void to_json(nlohmann::json& j, const UTXO& u);
void to_json(nlohmann::json& j, const Transaction& tx);
void to_json(nlohmann::json& j, const BlockHeader& h);
void to_json(nlohmann::json& j, const MerkleProof& p);
void to_json(nlohmann::json& j, const Block& b);

}  // namespace eunomia
