#pragma once

// Binary tensor container used for session streams and checkpoints.
//
// Layout, all little-endian:
//   byte 0..3   magic "MMGF"
//   byte 4      format version (1)
//   byte 5      dtype tag: 1 = f32, 2 = f64
//   byte 6      rank
//   then        rank x u32 dims
//   then        row-major payload
//
// Session streams are always f32. Checkpoints store whatever scalar the
// model was trained in so that save -> load -> forward is bit-identical.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmgf/errors.hpp"
#include "mmgf/tensor.hpp"

namespace mmgf {

enum class Dtype : uint8_t { f32 = 1, f64 = 2 };

constexpr uint8_t kFormatVersion = 1;

template <class S>
struct dtype_of;
template <>
struct dtype_of<float> {
  static constexpr Dtype value = Dtype::f32;
};
template <>
struct dtype_of<double> {
  static constexpr Dtype value = Dtype::f64;
};

namespace detail {

inline void put_u32le(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

inline void put_u64le(std::vector<unsigned char>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline uint32_t get_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

inline uint64_t get_u64le(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

inline void append_scalar(std::vector<unsigned char>& out, float v) {
  put_u32le(out, std::bit_cast<uint32_t>(v));
}
inline void append_scalar(std::vector<unsigned char>& out, double v) {
  put_u64le(out, std::bit_cast<uint64_t>(v));
}

inline float read_scalar_f32(const unsigned char* p) {
  return std::bit_cast<float>(get_u32le(p));
}
inline double read_scalar_f64(const unsigned char* p) {
  return std::bit_cast<double>(get_u64le(p));
}

}  // namespace detail

template <class S>
std::vector<unsigned char> encode_tensor(const Tensor<S>& t) {
  std::vector<unsigned char> out;
  out.reserve(7 + 4 * static_cast<size_t>(t.rank()) + sizeof(S) * t.size());
  out.push_back('M');
  out.push_back('M');
  out.push_back('G');
  out.push_back('F');
  out.push_back(kFormatVersion);
  out.push_back(static_cast<uint8_t>(dtype_of<S>::value));
  out.push_back(static_cast<uint8_t>(t.rank()));
  for (int i = 0; i < t.rank(); ++i)
    detail::put_u32le(out, static_cast<uint32_t>(t.dim(i)));
  const S* d = t.data();
  for (size_t i = 0; i < t.size(); ++i) detail::append_scalar(out, d[i]);
  return out;
}

// Decodes one tensor record from `bytes + offset`, advancing `offset`.
// `where` names the source in error messages.
template <class S>
Tensor<S> decode_tensor(const std::vector<unsigned char>& bytes,
                        size_t& offset, const std::string& where) {
  const auto need = [&](size_t n) {
    if (offset + n > bytes.size())
      throw ValidationError(where + ": truncated tensor record");
  };
  need(7);
  const unsigned char* p = bytes.data() + offset;
  if (p[0] != 'M' || p[1] != 'M' || p[2] != 'G' || p[3] != 'F')
    throw ValidationError(where + ": bad magic, not an MMGF tensor");
  if (p[4] != kFormatVersion)
    throw ValidationError(where + ": unsupported format version " +
                          std::to_string(int(p[4])));
  if (p[5] != static_cast<uint8_t>(dtype_of<S>::value))
    throw ValidationError(where + ": dtype tag " + std::to_string(int(p[5])) +
                          " does not match the requested scalar type");
  const int rank = p[6];
  offset += 7;
  need(4 * static_cast<size_t>(rank));
  std::vector<int> shape(static_cast<size_t>(rank));
  size_t count = 1;
  for (int i = 0; i < rank; ++i) {
    const uint32_t d = detail::get_u32le(bytes.data() + offset + 4 * i);
    shape[static_cast<size_t>(i)] = static_cast<int>(d);
    count *= d;
  }
  offset += 4 * static_cast<size_t>(rank);
  need(sizeof(S) * count);
  Tensor<S> t(shape);
  S* dst = t.data();
  const unsigned char* payload = bytes.data() + offset;
  for (size_t i = 0; i < count; ++i) {
    if constexpr (sizeof(S) == 4)
      dst[i] = detail::read_scalar_f32(payload + 4 * i);
    else
      dst[i] = detail::read_scalar_f64(payload + 8 * i);
  }
  offset += sizeof(S) * count;
  return t;
}

inline std::vector<unsigned char> read_file_bytes(
    const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) throw ValidationError(path.string() + ": cannot open for reading");
  std::fseek(f, 0, SEEK_END);
  const long n = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<unsigned char> bytes(static_cast<size_t>(n));
  const size_t got = n ? std::fread(bytes.data(), 1, bytes.size(), f) : 0;
  std::fclose(f);
  if (got != bytes.size())
    throw RuntimeFailure(path.string() + ": short read");
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<unsigned char>& bytes) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw RuntimeFailure(path.string() + ": cannot open for writing");
  const size_t put = bytes.empty() ? 0 : std::fwrite(bytes.data(), 1, bytes.size(), f);
  std::fclose(f);
  if (put != bytes.size())
    throw RuntimeFailure(path.string() + ": short write");
}

template <class S>
void write_tensor_file(const std::filesystem::path& path, const Tensor<S>& t) {
  write_file_bytes(path, encode_tensor(t));
}

template <class S>
Tensor<S> read_tensor_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  size_t offset = 0;
  Tensor<S> t = decode_tensor<S>(bytes, offset, path.string());
  if (offset != bytes.size())
    throw ValidationError(path.string() + ": trailing bytes after tensor");
  return t;
}

inline Dtype peek_dtype(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 6 || bytes[0] != 'M' || bytes[1] != 'M' ||
      bytes[2] != 'G' || bytes[3] != 'F')
    throw ValidationError(path.string() + ": bad magic, not an MMGF tensor");
  return static_cast<Dtype>(bytes[5]);
}

}  // namespace mmgf
