#include "lpw/rng.hpp"

#include <array>

namespace lpw {

namespace {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id, std::uint64_t purpose) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master), hi(master), lo(id), hi(id), lo(purpose), hi(purpose)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id, StreamPurpose purpose)
    : seed_(derive_seed(master_seed, stream_id, static_cast<std::uint64_t>(purpose))),
      engine_(seed_) {}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::normal() { return normal_(engine_); }

}  // namespace lpw
