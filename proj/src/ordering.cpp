#include "eunomia/ordering.hpp"

#include <algorithm>
#include <stdexcept>

namespace eunomia {

std::uint32_t confirmed_height(const BlockDag& dag, ChainIndex chain, std::uint32_t T) {
  if (T == 0) throw std::invalid_argument("T must be >= 1");
  const auto h = dag.tip_height(chain);
  return h > T ? h - T : 0;
}

std::vector<Hash> per_chain_confirmed(const BlockDag& dag, ChainIndex chain, std::uint32_t T) {
  std::vector<Hash> out;
  const auto last = confirmed_height(dag, chain, T);
  out.reserve(last);
  for (std::uint32_t h = 1; h <= last; ++h) out.push_back(dag.main_at(chain, h));
  return out;
}

std::uint64_t synchronized_bar(const BlockDag& dag, std::uint32_t T) {
  std::uint64_t bar = UINT64_MAX;
  for (std::uint32_t c = 0; c < dag.chain_count(); ++c) {
    const ChainIndex chain{c};
    const auto v = static_cast<std::uint64_t>(dag.main_clock_at(chain, confirmed_height(dag, chain, T)).v);
    bar = std::min(bar, v);
  }
  return bar;
}

ConfirmedView global_sequence(const BlockDag& dag, std::uint32_t T) {
  ConfirmedView view;
  view.bar = synchronized_bar(dag, T);
  for (std::uint32_t c = 0; c < dag.chain_count(); ++c) {
    const ChainIndex chain{c};
    view.per_chain.push_back(per_chain_confirmed(dag, chain, T));
    for (std::uint32_t h = 1; h <= view.per_chain.back().size(); ++h) {
      const auto v = static_cast<std::uint64_t>(dag.main_clock_at(chain, h).v);
      if (v < view.bar) view.sequence.push_back({{v, chain}, dag.main_at(chain, h)});
    }
  }
  std::sort(view.sequence.begin(), view.sequence.end(),
            [](const ConfirmedEntry& a, const ConfirmedEntry& b) { return a.ts < b.ts; });
  return view;
}

bool is_prefix(std::span<const ConfirmedEntry> a, std::span<const ConfirmedEntry> b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

OrderingTracker::OrderingTracker(std::uint32_t m, std::uint32_t T)
    : T_(T), included_(m, 0), included_tip_(m) {
  if (T == 0) throw std::invalid_argument("T must be >= 1");
  for (std::uint32_t c = 0; c < m; ++c) included_tip_[c] = genesis_id(ChainIndex{c});
}

OrderingTracker::Update OrderingTracker::update(const BlockDag& dag) {
  Update up;
  if (dag.version() == seen_version_) return up;
  seen_version_ = dag.version();
  const auto m = dag.chain_count();

  bool intact = true;
  for (std::uint32_t c = 0; c < m && intact; ++c) {
    const ChainIndex chain{c};
    intact = included_[c] <= dag.tip_height(chain) && dag.main_at(chain, included_[c]) == included_tip_[c];
  }
  const auto bar = synchronized_bar(dag, T_);
  // A reorg above the included blocks can still lower the bar.
  if (!intact || bar < bar_) return recompute(dag);

  std::vector<ConfirmedEntry> fresh;
  std::vector<std::uint32_t> heights = included_;
  for (std::uint32_t c = 0; c < m; ++c) {
    const ChainIndex chain{c};
    const auto last = confirmed_height(dag, chain, T_);
    auto& h = heights[c];
    while (h < last) {
      const auto v = static_cast<std::uint64_t>(dag.main_clock_at(chain, h + 1).v);
      if (v >= bar) break;
      ++h;
      fresh.push_back({{v, chain}, dag.main_at(chain, h)});
    }
  }
  std::sort(fresh.begin(), fresh.end(), [](const ConfirmedEntry& a, const ConfirmedEntry& b) { return a.ts < b.ts; });
  if (!fresh.empty() && !sequence_.empty() && fresh.front().ts < sequence_.back().ts) return recompute(dag);
  for (std::uint32_t c = 0; c < m; ++c) {
    included_[c] = heights[c];
    included_tip_[c] = dag.main_at(ChainIndex{c}, heights[c]);
  }
  up.appended = fresh.size();
  sequence_.insert(sequence_.end(), fresh.begin(), fresh.end());
  bar_ = bar;
  return up;
}

OrderingTracker::Update OrderingTracker::recompute(const BlockDag& dag) {
  Update up;
  auto view = global_sequence(dag, T_);
  const bool extends = is_prefix(sequence_, view.sequence);
  up.rewritten = !extends;
  if (up.rewritten) ++rewrites_;
  up.appended = extends ? view.sequence.size() - sequence_.size() : view.sequence.size();
  sequence_ = std::move(view.sequence);
  bar_ = view.bar;
  std::fill(included_.begin(), included_.end(), 0);
  for (const auto& e : sequence_) included_[e.ts.chain.value] = *dag.height_of(e.id);
  for (std::uint32_t c = 0; c < dag.chain_count(); ++c) included_tip_[c] = dag.main_at(ChainIndex{c}, included_[c]);
  return up;
}

}  // namespace eunomia
