#ifndef CFR_SERIALIZE_HPP_
#define CFR_SERIALIZE_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cfr/tensor.hpp"

namespace cfr {

// Binary tensor file: magic "CFRT", version u8=1, rank u8, extents u32 LE,
// float32 LE payload. Checkpoints prepend a u32 entry count and a u16-length
// UTF-8 name before each tensor record. In-memory scalars are converted
// to/from float32 at the boundary.

namespace detail {

inline void put_u8(std::ostream& os, uint8_t v) { os.put(static_cast<char>(v)); }

inline void put_u16le(std::ostream& os, uint16_t v) {
  os.put(static_cast<char>(v & 0xff));
  os.put(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32le(std::ostream& os, uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32le(std::ostream& os, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32le(os, bits);
}

inline uint8_t get_u8(std::istream& is) {
  int c = is.get();
  if (c < 0) throw IoError("tensor stream: unexpected end of data");
  return static_cast<uint8_t>(c);
}

inline uint16_t get_u16le(std::istream& is) {
  uint16_t v = get_u8(is);
  v |= static_cast<uint16_t>(get_u8(is)) << 8;
  return v;
}

inline uint32_t get_u32le(std::istream& is) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(get_u8(is)) << (8 * i);
  return v;
}

inline float get_f32le(std::istream& is) {
  uint32_t bits = get_u32le(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace detail

template <class S>
void write_tensor(std::ostream& os, const TensorT<S>& t) {
  os.write("CFRT", 4);
  detail::put_u8(os, 1);  // version
  detail::put_u8(os, static_cast<uint8_t>(t.shape().rank()));
  for (int i = 0; i < t.shape().rank(); ++i)
    detail::put_u32le(os, static_cast<uint32_t>(t.shape()[i]));
  for (S v : t.data()) detail::put_f32le(os, static_cast<float>(v));
}

template <class S>
TensorT<S> read_tensor(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4 || std::memcmp(magic, "CFRT", 4) != 0)
    throw IoError("tensor stream: bad magic, expected CFRT");
  const uint8_t version = detail::get_u8(is);
  if (version != 1) throw IoError("tensor stream: unsupported version " + std::to_string(version));
  const uint8_t rank = detail::get_u8(is);
  if (rank < 1 || rank > 4) throw IoError("tensor stream: rank must be 1..4");
  std::vector<int64_t> dims(rank);
  for (auto& d : dims) d = detail::get_u32le(is);
  Shape shape;
  switch (rank) {
    case 1: shape = Shape{dims[0]}; break;
    case 2: shape = Shape{dims[0], dims[1]}; break;
    case 3: shape = Shape{dims[0], dims[1], dims[2]}; break;
    default: shape = Shape{dims[0], dims[1], dims[2], dims[3]}; break;
  }
  std::vector<S> data(static_cast<size_t>(shape.numel()));
  for (auto& v : data) v = static_cast<S>(detail::get_f32le(is));
  return TensorT<S>::from_data(shape, std::move(data));
}

template <class S>
void save_tensor_file(const std::string& path, const TensorT<S>& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path);
  write_tensor(os, t);
  if (!os) throw IoError("write failed: " + path);
}

template <class S>
TensorT<S> load_tensor_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for read: " + path);
  return read_tensor<S>(is);
}

template <class S>
using NamedTensors = std::vector<std::pair<std::string, TensorT<S>>>;

template <class S>
void save_checkpoint(const std::string& path, const NamedTensors<S>& entries) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path);
  detail::put_u32le(os, static_cast<uint32_t>(entries.size()));
  for (const auto& [name, tensor] : entries) {
    CFR_CHECK(name.size() <= 0xffff, "checkpoint: name too long");
    detail::put_u16le(os, static_cast<uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_tensor(os, tensor);
  }
  if (!os) throw IoError("write failed: " + path);
}

template <class S>
NamedTensors<S> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for read: " + path);
  const uint32_t count = detail::get_u32le(is);
  NamedTensors<S> entries;
  entries.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t len = detail::get_u16le(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    if (is.gcount() != len) throw IoError("checkpoint truncated: " + path);
    entries.emplace_back(std::move(name), read_tensor<S>(is));
  }
  return entries;
}

}  // namespace cfr

#endif  // CFR_SERIALIZE_HPP_
