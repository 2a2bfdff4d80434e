#pragma once

#include <span>
#include <vector>

#include "eunomia/blockdag.hpp"

namespace eunomia {

struct ConfirmedEntry {
  GlobalTimestamp ts;
  Hash id;
  bool operator==(const ConfirmedEntry&) const = default;
};

struct ConfirmedView {
  /// E(i): main chain i without genesis and without its last T blocks.
  std::vector<std::vector<Hash>> per_chain;
  std::uint64_t bar = 0;
  /// L: blocks of all E(i) with clock < bar, ascending by (clock, chain).
  std::vector<ConfirmedEntry> sequence;
};

/// Height of the last block of E(i), 0 when E(i) is empty.
std::uint32_t confirmed_height(const BlockDag& dag, ChainIndex chain, std::uint32_t T);
std::vector<Hash> per_chain_confirmed(const BlockDag& dag, ChainIndex chain, std::uint32_t T);
std::uint64_t synchronized_bar(const BlockDag& dag, std::uint32_t T);
ConfirmedView global_sequence(const BlockDag& dag, std::uint32_t T);

bool is_prefix(std::span<const ConfirmedEntry> a, std::span<const ConfirmedEntry> b);
/// Neither sequence is a prefix of the other.
inline bool conflicting(std::span<const ConfirmedEntry> a, std::span<const ConfirmedEntry> b) {
  return !is_prefix(a, b) && !is_prefix(b, a);
}

/// Keeps one node's L up to date as its dag grows, appending new blocks
/// instead of re-sorting everything. Falls back to a full recomputation when
/// a reorg reaches below the confirmation depth; such rewrites are counted.
class OrderingTracker {
 public:
  explicit OrderingTracker(std::uint32_t m, std::uint32_t T);

  struct Update {
    std::size_t appended = 0;
    bool rewritten = false;
  };

  Update update(const BlockDag& dag);

  const std::vector<ConfirmedEntry>& sequence() const { return sequence_; }
  std::uint64_t bar() const { return bar_; }
  std::uint32_t T() const { return T_; }
  std::size_t rewrites() const { return rewrites_; }
  /// Per chain, the height of the last block included in L.
  const std::vector<std::uint32_t>& included_height() const { return included_; }

 private:
  Update recompute(const BlockDag& dag);
  std::uint32_t T_;
  std::vector<ConfirmedEntry> sequence_;
  std::vector<std::uint32_t> included_;
  std::vector<Hash> included_tip_;
  std::uint64_t bar_ = 0;
  std::uint64_t seen_version_ = UINT64_MAX;
  std::size_t rewrites_ = 0;
};

}  // namespace eunomia
