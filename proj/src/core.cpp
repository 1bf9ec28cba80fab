#include "xsmr/core.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "xsmr/crypto.hpp"

namespace xsmr {

namespace {

enum : std::uint8_t { kTagInt = 0, kTagBytes = 1 };

void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_bytes(Bytes& out, std::span<const std::uint8_t> b) {
  put_u32(out, static_cast<std::uint32_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_++]} << (8 * i);
    return v;
  }
  Bytes bytes() {
    std::uint32_t len = u32();
    need(len);
    Bytes b(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
            data_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    pos_ += len;
    return b;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t k) const {
    if (data_.size() - pos_ < k) throw DecodeError("truncated input");
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void write_move(Bytes& out, const MoveDescriptor& move) {
  put_bytes(out, std::span(reinterpret_cast<const std::uint8_t*>(move.name.data()),
                           move.name.size()));
  put_u32(out, static_cast<std::uint32_t>(move.args.size()));
  for (const auto& arg : move.args) {
    if (const auto* i = std::get_if<std::int64_t>(&arg)) {
      put_u8(out, kTagInt);
      put_u64(out, static_cast<std::uint64_t>(*i));
    } else {
      put_u8(out, kTagBytes);
      put_bytes(out, std::get<Bytes>(arg));
    }
  }
}

void write_request(Bytes& out, const Request& req) {
  put_u32(out, req.agent);
  put_u64(out, req.round);
  write_move(out, req.move);
}

Request read_request(Reader& rd) {
  Request req;
  req.agent = rd.u32();
  req.round = rd.u64();
  Bytes name = rd.bytes();
  req.move.name.assign(name.begin(), name.end());
  std::uint32_t argc = rd.u32();
  for (std::uint32_t i = 0; i < argc; ++i) {
    std::uint8_t tag = rd.u8();
    if (tag == kTagInt) {
      req.move.args.emplace_back(static_cast<std::int64_t>(rd.u64()));
    } else if (tag == kTagBytes) {
      req.move.args.emplace_back(rd.bytes());
    } else {
      throw DecodeError("unknown argument tag");
    }
  }
  return req;
}

Bytes encode_prefix(const PathSignature& ps, std::size_t levels) {
  Bytes out;
  write_request(out, ps.request);
  put_u32(out, static_cast<std::uint32_t>(levels));
  for (std::size_t i = 0; i < levels; ++i) {
    put_u32(out, ps.path[i]);
    put_bytes(out, ps.sigs[i]);
  }
  return out;
}

}  // namespace

Bytes encode_move(const MoveDescriptor& move) {
  Bytes out;
  write_move(out, move);
  return out;
}

Bytes encode_request(const Request& req) {
  Bytes out;
  write_request(out, req);
  return out;
}

Request decode_request(std::span<const std::uint8_t> bytes) {
  Reader rd(bytes);
  Request req = read_request(rd);
  if (!rd.done()) throw DecodeError("trailing bytes after request");
  return req;
}

Bytes encode_path_signature(const PathSignature& ps) {
  if (ps.path.size() != ps.sigs.size()) throw DecodeError("path/sig length mismatch");
  return encode_prefix(ps, ps.path.size());
}

PathSignature decode_path_signature(std::span<const std::uint8_t> bytes) {
  Reader rd(bytes);
  PathSignature ps;
  ps.request = read_request(rd);
  std::uint32_t k = rd.u32();
  for (std::uint32_t i = 0; i < k; ++i) {
    ps.path.push_back(rd.u32());
    ps.sigs.push_back(rd.bytes());
  }
  if (!rd.done()) throw DecodeError("trailing bytes after path signature");
  return ps;
}

Bytes signed_message(const PathSignature& ps, std::size_t level) {
  if (level == 0) return encode_request(ps.request);
  return encode_prefix(ps, level);
}

KeyedHashProvider::KeyedHashProvider(std::uint64_t secret) : secret_(secret) {}

Bytes KeyedHashProvider::key_for(AgentId agent) const {
  Bytes seed{'x', 's', 'm', 'r', '-', 'k', 'e', 'y'};
  put_u64(seed, secret_);
  put_u32(seed, agent);
  return sha256(seed);
}

Bytes KeyedHashProvider::sign(AgentId agent, std::span<const std::uint8_t> msg) const {
  return hmac_sha256(key_for(agent), msg);
}

bool KeyedHashProvider::verify(AgentId agent, std::span<const std::uint8_t> msg,
                               std::span<const std::uint8_t> sig) const {
  Bytes expect = sign(agent, msg);
  return sig.size() == expect.size() && std::equal(expect.begin(), expect.end(), sig.begin());
}

PathSignature sign_request(const SignatureProvider& provider, AgentId signer,
                           const Request& req) {
  if (signer != req.agent) {
    throw SignError(SignErrorCode::SignerMismatch,
                    "agent " + std::to_string(signer) + " cannot sign a request of agent " +
                        std::to_string(req.agent));
  }
  PathSignature ps;
  ps.request = req;
  ps.path.push_back(signer);
  ps.sigs.push_back(provider.sign(signer, encode_request(req)));
  return ps;
}

PathSignature extend_path(const SignatureProvider& provider, AgentId relayer,
                          const PathSignature& ps) {
  if (std::find(ps.path.begin(), ps.path.end(), relayer) != ps.path.end()) {
    throw SignError(SignErrorCode::DuplicateSigner,
                    "agent " + std::to_string(relayer) + " already signed this path");
  }
  if (!verify_path_signature(ps, provider)) {
    throw SignError(SignErrorCode::MalformedInput, "inner path signature does not verify");
  }
  PathSignature out = ps;
  Bytes msg = signed_message(ps, ps.path.size());
  out.path.push_back(relayer);
  out.sigs.push_back(provider.sign(relayer, msg));
  return out;
}

bool verify_path_signature(const PathSignature& ps, const SignatureProvider& provider) {
  if (ps.path.empty() || ps.path.size() != ps.sigs.size()) return false;
  if (ps.path.front() != ps.request.agent) return false;
  if (ps.request.round < 1) return false;
  std::set<AgentId> distinct(ps.path.begin(), ps.path.end());
  if (distinct.size() != ps.path.size()) return false;
  for (std::size_t i = 0; i < ps.path.size(); ++i) {
    if (!provider.verify(ps.path[i], signed_message(ps, i), ps.sigs[i])) return false;
  }
  return true;
}

Tick age(Tick now, Tick round_start) { return now > round_start ? now - round_start : 0; }

bool is_live(const PathSignature& ps, Tick now, Tick round_start, Tick delta) {
  return age(now, round_start) <= static_cast<Tick>(ps.length()) * delta;
}

bool is_ready(Tick now, Tick round_start, std::size_t n, Tick delta) {
  return age(now, round_start) > static_cast<Tick>(n) * delta;
}

Tick scheduled_round_start(std::uint64_t round, std::size_t n, Tick delta) {
  return static_cast<Tick>(n + 1) * delta + (round - 1) * static_cast<Tick>(n) * delta;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

Bytes from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw DecodeError("odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DecodeError("bad hex digit");
  };
  Bytes out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
  }
  return out;
}

std::string describe(const MoveDescriptor& move) {
  std::ostringstream os;
  os << move.name << '(';
  for (std::size_t i = 0; i < move.args.size(); ++i) {
    if (i) os << ',';
    if (const auto* v = std::get_if<std::int64_t>(&move.args[i])) {
      os << *v;
    } else {
      os << "0x" << to_hex(std::get<Bytes>(move.args[i]));
    }
  }
  os << ')';
  return os.str();
}

std::string describe(const Request& req) {
  return "(" + std::to_string(req.agent) + "," + describe(req.move) + "," +
         std::to_string(req.round) + ")";
}

}  // namespace xsmr
