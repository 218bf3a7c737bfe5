#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qkdnet {

enum class Direction : std::uint8_t { sender_to_receiver, receiver_to_sender };

/// One classical-channel message. `disclosed` marks messages whose payload
/// reveals information about the key bits (parities, verification tags).
struct TranscriptEvent {
  std::string phase;
  Direction direction = Direction::sender_to_receiver;
  std::uint64_t bits = 0;
  bool disclosed = false;
};

/// Record of everything sent over the (assumed authentic) classical channel
/// during one session.
class Transcript {
 public:
  void record(std::string phase, Direction direction, std::uint64_t bits, bool disclosed);

  const std::vector<TranscriptEvent>& events() const { return events_; }
  std::uint64_t disclosed_bits() const;
  std::uint64_t disclosed_bits(const std::string& phase) const;
  std::uint64_t total_bits() const;

  /// One JSON object per line:
  /// {"phase":"cascade","dir":"A>B","bytes":1,"bits":1,"disclosed":true}
  std::string to_jsonl() const;

 private:
  std::vector<TranscriptEvent> events_;
};

}  // namespace qkdnet
