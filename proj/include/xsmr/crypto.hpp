#pragma once

#include <cstdint>
#include <span>

#include "xsmr/core.hpp"

namespace xsmr {

Bytes sha256(std::span<const std::uint8_t> data);
Bytes hmac_sha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> msg);

// H(b || n) for sealed bids: SHA-256 over le64(b) || le64(n).
Bytes bid_commitment(std::int64_t bid, std::int64_t nonce);

}  // namespace xsmr
