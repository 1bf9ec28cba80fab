#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "xsmr/core.hpp"

namespace xsmr::testing {

// Seeded generator for property tests; draws use modulo so sequences do not
// depend on the standard library's distribution implementations.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t u64() { return rng_(); }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool coin() { return rng_() % 2 == 0; }

  Bytes bytes(std::size_t max_len) {
    Bytes b(static_cast<std::size_t>(range(0, static_cast<std::int64_t>(max_len))));
    for (auto& x : b) x = static_cast<std::uint8_t>(rng_());
    return b;
  }

  MoveDescriptor move() {
    static const char* names[] = {"Skip", "Agree", "Complete", "VoteYes", "SealedBid", "Unseal"};
    MoveDescriptor m;
    m.name = names[range(0, 5)];
    auto argc = range(0, 3);
    for (std::int64_t i = 0; i < argc; ++i) {
      if (coin()) {
        m.args.emplace_back(static_cast<std::int64_t>(u64()));
      } else {
        m.args.emplace_back(bytes(8));
      }
    }
    return m;
  }

  Request request() {
    return {static_cast<AgentId>(range(0, 5)), move(), static_cast<std::uint64_t>(range(1, 20))};
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace xsmr::testing
