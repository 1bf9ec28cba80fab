#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace xsmr {

using AgentId = std::uint32_t;
using AssetId = std::uint32_t;
using Tick = std::uint64_t;
using Bytes = std::vector<std::uint8_t>;

// A move argument is either a signed integer or an opaque byte string.
using Arg = std::variant<std::int64_t, Bytes>;

struct MoveDescriptor {
  std::string name;
  std::vector<Arg> args;

  auto operator<=>(const MoveDescriptor&) const = default;
  bool operator==(const MoveDescriptor&) const = default;

  static MoveDescriptor skip() { return {"Skip", {}}; }
  bool is_skip() const { return name == "Skip" && args.empty(); }
};

struct Request {
  AgentId agent = 0;
  MoveDescriptor move;
  std::uint64_t round = 1;

  auto operator<=>(const Request&) const = default;
  bool operator==(const Request&) const = default;
};

// Signers are listed innermost first; sigs[i] is the signature by path[i].
struct PathSignature {
  Request request;
  std::vector<AgentId> path;
  std::vector<Bytes> sigs;

  std::size_t length() const { return path.size(); }
  bool operator==(const PathSignature&) const = default;
};

class SignatureProvider {
 public:
  virtual ~SignatureProvider() = default;
  virtual Bytes sign(AgentId agent, std::span<const std::uint8_t> msg) const = 0;
  virtual bool verify(AgentId agent, std::span<const std::uint8_t> msg,
                      std::span<const std::uint8_t> sig) const = 0;
};

// HMAC-SHA-256 under a per-agent key derived from a scenario secret.
class KeyedHashProvider final : public SignatureProvider {
 public:
  explicit KeyedHashProvider(std::uint64_t secret = 0);
  Bytes sign(AgentId agent, std::span<const std::uint8_t> msg) const override;
  bool verify(AgentId agent, std::span<const std::uint8_t> msg,
              std::span<const std::uint8_t> sig) const override;

 private:
  Bytes key_for(AgentId agent) const;
  std::uint64_t secret_;
};

enum class SignErrorCode { SignerMismatch, DuplicateSigner, MalformedInput };

class SignError : public std::runtime_error {
 public:
  SignError(SignErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  SignErrorCode code() const { return code_; }

 private:
  SignErrorCode code_;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical encodings; byte layout is described in docs/encoding.md.
Bytes encode_move(const MoveDescriptor& move);
Bytes encode_request(const Request& req);
Request decode_request(std::span<const std::uint8_t> bytes);
Bytes encode_path_signature(const PathSignature& ps);
PathSignature decode_path_signature(std::span<const std::uint8_t> bytes);

// Message signed by path[level]: the request for level 0, otherwise the
// encoding of the path signature truncated to `level` signers.
Bytes signed_message(const PathSignature& ps, std::size_t level);

PathSignature sign_request(const SignatureProvider& provider, AgentId signer,
                           const Request& req);
PathSignature extend_path(const SignatureProvider& provider, AgentId relayer,
                          const PathSignature& ps);
bool verify_path_signature(const PathSignature& ps,
                           const SignatureProvider& provider);

Tick age(Tick now, Tick round_start);
bool is_live(const PathSignature& ps, Tick now, Tick round_start, Tick delta);
bool is_ready(Tick now, Tick round_start, std::size_t n, Tick delta);
inline bool is_ready(const PathSignature&, Tick now, Tick round_start,
                     std::size_t n, Tick delta) {
  return is_ready(now, round_start, n, delta);
}

// Pessimistic round schedule: round 1 opens after the funding window and
// one verification round, later rounds follow every n*delta ticks.
Tick scheduled_round_start(std::uint64_t round, std::size_t n, Tick delta);

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(const std::string& hex);
std::string describe(const MoveDescriptor& move);
std::string describe(const Request& req);

}  // namespace xsmr
