#pragma once

// Little-endian readers/writers shared by the WAV, MSPC and checkpoint codecs.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "deepemo/error.hpp"

namespace deepemo {

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open file: " + path);
  in.seekg(0, std::ios::end);
  std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) fail(ErrorCode::Io, "failed reading file: " + path);
  return bytes;
}

inline void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "failed writing file: " + path);
}

// Cursor over a byte buffer; bounds failures surface as TruncatedFile.
class ByteReader {
 public:
  ByteReader(const uint8_t* bytes, size_t len) : bytes_(bytes), len_(len) {}

  size_t pos() const { return pos_; }
  size_t remaining() const { return len_ - pos_; }

  void seek(size_t pos) {
    if (pos > len_) fail(ErrorCode::TruncatedFile, "seek past end of buffer");
    pos_ = pos;
  }

  void skip(size_t n) { seek(pos_ + require(n)); }

  const uint8_t* take(size_t n) {
    require(n);
    const uint8_t* p = bytes_ + pos_;
    pos_ += n;
    return p;
  }

  uint8_t u8() { return *take(1); }

  uint16_t u16() {
    const uint8_t* p = take(2);
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
  }

  uint32_t u32() {
    const uint8_t* p = take(4);
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  }

  uint64_t u64() {
    uint64_t lo = u32();
    uint64_t hi = u32();
    return lo | (hi << 32);
  }

  float f32() {
    uint32_t bits = u32();
    float value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
  }

 private:
  size_t require(size_t n) {
    if (n > remaining()) fail(ErrorCode::TruncatedFile, "unexpected end of data");
    return n;
  }

  const uint8_t* bytes_;
  size_t len_;
  size_t pos_ = 0;
};

class ByteWriter {
 public:
  std::vector<uint8_t>& bytes() { return bytes_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }

  void raw(const void* data, size_t len) {
    const auto* p = static_cast<const uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + len);
  }

  void u8(uint8_t v) { bytes_.push_back(v); }

  void u16(uint16_t v) {
    u8(static_cast<uint8_t>(v & 0xff));
    u8(static_cast<uint8_t>(v >> 8));
  }

  void u32(uint32_t v) {
    u16(static_cast<uint16_t>(v & 0xffff));
    u16(static_cast<uint16_t>(v >> 16));
  }

  void u64(uint64_t v) {
    u32(static_cast<uint32_t>(v & 0xffffffffu));
    u32(static_cast<uint32_t>(v >> 32));
  }

  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u32(bits);
  }

 private:
  std::vector<uint8_t> bytes_;
};

}  // namespace deepemo
