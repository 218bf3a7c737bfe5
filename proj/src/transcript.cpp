#include "transcript.hpp"

#include <json.hpp>

namespace qkdnet {

void Transcript::record(std::string phase, Direction direction, std::uint64_t bits, bool disclosed) {
  events_.push_back({std::move(phase), direction, bits, disclosed});
}

std::uint64_t Transcript::disclosed_bits() const {
  std::uint64_t n = 0;
  for (const auto& e : events_) {
    if (e.disclosed) n += e.bits;
  }
  return n;
}

std::uint64_t Transcript::disclosed_bits(const std::string& phase) const {
  std::uint64_t n = 0;
  for (const auto& e : events_) {
    if (e.disclosed && e.phase == phase) n += e.bits;
  }
  return n;
}

std::uint64_t Transcript::total_bits() const {
  std::uint64_t n = 0;
  for (const auto& e : events_) n += e.bits;
  return n;
}

std::string Transcript::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    nlohmann::ordered_json line;
    line["phase"] = e.phase;
    line["dir"] = e.direction == Direction::sender_to_receiver ? "A>B" : "B>A";
    line["bytes"] = (e.bits + 7) / 8;
    line["bits"] = e.bits;
    line["disclosed"] = e.disclosed;
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace qkdnet
