#pragma once

// Two-level transaction metadata commitment. The inner tree of chain i is
// built over transaction ids and has root tx_root_i; the outer tree is built
// over the m leaves digest(tip_i || tx_root_i) and its root goes into the
// block header. Odd levels duplicate their last node; a single-leaf tree's
// root is the leaf; an empty tree's root is digest("").

#include <span>
#include <vector>

#include "eunomia/hash.hpp"
#include "eunomia/types.hpp"

namespace eunomia {

struct MerkleTree {
  std::vector<Hash> leaves;
  /// levels[0] == leaves, levels.back() == {root}. Empty for an empty tree.
  std::vector<std::vector<Hash>> levels;
  Hash root;
};

Hash empty_root();

MerkleTree build_tree(std::vector<Hash> leaves);
MerkleTree build_tx_tree(std::span<const Transaction> txs);
Hash tx_root(std::span<const Transaction> txs);

Hash metadata_leaf(const Hash& tip, const Hash& tx_root);
/// Throws std::invalid_argument when the two lists differ in length or are empty.
MerkleTree build_metadata_tree(std::span<const Hash> tips, std::span<const Hash> tx_roots);

/// Throws std::out_of_range for an index outside the leaves.
MerkleProof prove_leaf(const MerkleTree& tree, std::size_t index);
bool verify_leaf(const Hash& root, std::size_t index, const Hash& leaf, const MerkleProof& proof);
/// Root obtained by folding `leaf` up the proof, ignoring the index checks.
Hash fold_proof(const Hash& leaf, const MerkleProof& proof);

}  // namespace eunomia
