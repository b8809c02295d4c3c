#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace downgrade {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Base class of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GroupError : public Error { using Error::Error; };
class KeyParamError : public Error { using Error::Error; };
class EncodingError : public Error { using Error::Error; };
class OracleUnavailable : public Error { using Error::Error; };
class ScriptError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class NotFound : public Error { using Error::Error; };

Bytes to_bytes(std::string_view s);
std::string to_string(ByteView b);
std::string to_hex(ByteView b);
Bytes from_hex(std::string_view hex);

Bytes concat(ByteView a, ByteView b);

/// Big-endian fixed 8-byte encoding used for every toy integer.
Bytes encode_u64(std::uint64_t v);
std::uint64_t decode_u64(ByteView b);

/// Canonical length-prefixed writer. Every variable-length field is a
/// 4-byte big-endian length followed by the payload; lists are a 4-byte
/// count followed by the items.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& bytes(ByteView v);
  ByteWriter& str(std::string_view v);
  ByteWriter& str_list(const std::vector<std::string>& v);

  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  Bytes bytes();
  std::string str();
  std::vector<std::string> str_list();

  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const;

  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace downgrade
