#include "eunomia/sim/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace eunomia::sim {

std::uint64_t honest_delay(DelayPolicy policy, std::uint32_t sender, std::uint32_t recipient, std::uint32_t delta,
                           Rng& rng) {
  switch (policy) {
    case DelayPolicy::Auto:
    case DelayPolicy::Min: return 1;
    case DelayPolicy::Max: return delta;
    case DelayPolicy::Split: return sender % 2 == recipient % 2 ? 1 : delta;
    case DelayPolicy::Random: return 1 + rng.below(delta);
  }
  return 1;
}

Network::Network(std::uint32_t nodes, std::uint32_t delta)
    : delta_(delta), ring_(static_cast<std::size_t>(delta) + 1), pending_(nodes) {
  if (delta == 0) throw std::invalid_argument("delta must be >= 1");
}

bool Network::send(BlockPtr block, std::uint32_t to, std::uint64_t now, std::uint64_t delay, bool honest,
                   bool piggybacked) {
  if (delay < 1) delay = 1;
  if (delay > delta_) {
    // Adversarial messages are also bounded by the ring size.
    if (honest) ++delta_violations_;
    delay = delta_;
  }
  const auto due = now + delay;
  auto& pend = pending_.at(to);
  if (auto it = pend.find(block->id); it != pend.end() && it->second <= due) return false;
  pend[block->id] = due;
  if (honest) max_honest_delay_ = std::max(max_honest_delay_, delay);
  ring_[due % ring_.size()].push_back(Message{std::move(block), to, now, due, honest, piggybacked});
  ++in_flight_;
  ++sent_;
  if (piggybacked) ++piggybacked_;
  return true;
}

std::vector<Message> Network::take_due(std::uint64_t round) {
  auto& bucket = ring_[round % ring_.size()];
  std::vector<Message> out;
  std::vector<Message> keep;
  for (auto& msg : bucket) {
    if (msg.due != round) {
      keep.push_back(std::move(msg));
      continue;
    }
    auto& pend = pending_[msg.to];
    auto it = pend.find(msg.block->id);
    // Superseded by an earlier copy that has already been delivered.
    const bool current = it != pend.end() && it->second == round;
    if (current) pend.erase(it);
    --in_flight_;
    if (!current) continue;
    ++delivered_;
    out.push_back(std::move(msg));
  }
  bucket = std::move(keep);
  return out;
}

}  // namespace eunomia::sim
