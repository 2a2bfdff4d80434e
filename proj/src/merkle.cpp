#include "eunomia/merkle.hpp"

#include <stdexcept>

namespace eunomia {

Hash empty_root() {
  static const Hash root = digest(std::string_view{});
  return root;
}

MerkleTree build_tree(std::vector<Hash> leaves) {
  MerkleTree tree;
  tree.leaves = std::move(leaves);
  if (tree.leaves.empty()) {
    tree.root = empty_root();
    return tree;
  }
  tree.levels.push_back(tree.leaves);
  while (tree.levels.back().size() > 1) {
    const auto& below = tree.levels.back();
    std::vector<Hash> above;
    above.reserve((below.size() + 1) / 2);
    for (std::size_t i = 0; i < below.size(); i += 2) {
      const Hash& right = i + 1 < below.size() ? below[i + 1] : below[i];
      above.push_back(digest_pair(below[i], right));
    }
    tree.levels.push_back(std::move(above));
  }
  tree.root = tree.levels.back().front();
  return tree;
}

MerkleTree build_tx_tree(std::span<const Transaction> txs) {
  std::vector<Hash> ids;
  ids.reserve(txs.size());
  for (const auto& tx : txs) ids.push_back(tx.id());
  return build_tree(std::move(ids));
}

Hash tx_root(std::span<const Transaction> txs) { return build_tx_tree(txs).root; }

Hash metadata_leaf(const Hash& tip, const Hash& tx_root) { return digest_pair(tip, tx_root); }

MerkleTree build_metadata_tree(std::span<const Hash> tips, std::span<const Hash> tx_roots) {
  if (tips.size() != tx_roots.size())
    throw std::invalid_argument("metadata tree: tips and tx roots differ in length");
  if (tips.empty()) throw std::invalid_argument("metadata tree: need at least one chain");
  std::vector<Hash> leaves;
  leaves.reserve(tips.size());
  for (std::size_t i = 0; i < tips.size(); ++i) leaves.push_back(metadata_leaf(tips[i], tx_roots[i]));
  return build_tree(std::move(leaves));
}

MerkleProof prove_leaf(const MerkleTree& tree, std::size_t index) {
  if (index >= tree.leaves.size()) throw std::out_of_range("prove_leaf: index outside tree");
  MerkleProof proof;
  proof.leaf_index = static_cast<std::uint32_t>(index);
  std::size_t pos = index;
  for (std::size_t level = 0; level + 1 < tree.levels.size(); ++level) {
    const auto& nodes = tree.levels[level];
    if (pos % 2 == 0) {
      const Hash& sibling = pos + 1 < nodes.size() ? nodes[pos + 1] : nodes[pos];
      proof.siblings.push_back({sibling, false});
    } else {
      proof.siblings.push_back({nodes[pos - 1], true});
    }
    pos /= 2;
  }
  return proof;
}

Hash fold_proof(const Hash& leaf, const MerkleProof& proof) {
  Hash acc = leaf;
  for (const auto& step : proof.siblings)
    acc = step.sibling_on_left ? digest_pair(step.hash, acc) : digest_pair(acc, step.hash);
  return acc;
}

bool verify_leaf(const Hash& root, std::size_t index, const Hash& leaf, const MerkleProof& proof) {
  if (proof.leaf_index != index) return false;
  if (proof.siblings.size() >= 64) return false;
  // The side of every sibling is fixed by the bits of the index.
  std::size_t pos = index;
  for (const auto& step : proof.siblings) {
    if (step.sibling_on_left != (pos % 2 == 1)) return false;
    pos /= 2;
  }
  if (pos != 0) return false;
  return fold_proof(leaf, proof) == root;
}

}  // namespace eunomia
