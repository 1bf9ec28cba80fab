#include "xsmr/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <stdexcept>

namespace xsmr {

Bytes sha256(std::span<const std::uint8_t> data) {
  Bytes out(32);
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != out.size()) {
    throw std::runtime_error("sha256 failed");
  }
  return out;
}

Bytes hmac_sha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> msg) {
  Bytes out(32);
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(),
           msg.size(), out.data(), &len) == nullptr ||
      len != out.size()) {
    throw std::runtime_error("hmac failed");
  }
  return out;
}

Bytes bid_commitment(std::int64_t bid, std::int64_t nonce) {
  std::uint8_t buf[16];
  auto ub = static_cast<std::uint64_t>(bid);
  auto un = static_cast<std::uint64_t>(nonce);
  for (int i = 0; i < 8; ++i) {
    buf[i] = static_cast<std::uint8_t>(ub >> (8 * i));
    buf[8 + i] = static_cast<std::uint8_t>(un >> (8 * i));
  }
  return sha256(buf);
}

}  // namespace xsmr
