#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "eunomia/rng.hpp"
#include "eunomia/sim/config.hpp"
#include "eunomia/types.hpp"

namespace eunomia::sim {

struct Message {
  BlockPtr block;
  std::uint32_t to = 0;
  std::uint64_t sent = 0;
  std::uint64_t due = 0;
  bool honest = true;
  bool piggybacked = false;
};

/// Delay the adversary assigns to an honest message. Split partitions the
/// nodes by index parity: 1 round within a half, delta across.
std::uint64_t honest_delay(DelayPolicy policy, std::uint32_t sender, std::uint32_t recipient, std::uint32_t delta,
                           Rng& rng);

/// Fully connected broadcast medium with per-recipient delivery rounds.
/// Honest messages must arrive within delta rounds; violating sends are
/// clamped and counted.
class Network {
 public:
  Network(std::uint32_t nodes, std::uint32_t delta);

  /// Schedules delivery unless the recipient already has the block due at
  /// or before the new round. Returns true if a message was queued.
  bool send(BlockPtr block, std::uint32_t to, std::uint64_t now, std::uint64_t delay, bool honest,
            bool piggybacked = false);
  /// Messages due this round, in send order.
  std::vector<Message> take_due(std::uint64_t round);
  bool scheduled(std::uint32_t to, const Hash& id) const { return pending_[to].contains(id); }

  std::size_t in_flight() const { return in_flight_; }
  std::uint64_t sent() const { return sent_; }
  std::uint64_t delivered() const { return delivered_; }
  std::uint64_t piggybacked() const { return piggybacked_; }
  std::uint64_t delta_violations() const { return delta_violations_; }
  std::uint64_t max_honest_delay() const { return max_honest_delay_; }
  std::uint32_t delta() const { return delta_; }

 private:
  std::uint32_t delta_;
  std::vector<std::vector<Message>> ring_;
  std::vector<std::unordered_map<Hash, std::uint64_t, HashHasher>> pending_;
  std::size_t in_flight_ = 0;
  std::uint64_t sent_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t piggybacked_ = 0;
  std::uint64_t delta_violations_ = 0;
  std::uint64_t max_honest_delay_ = 0;
};

}  // namespace eunomia::sim
