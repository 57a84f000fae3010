#include "coreset/tensor_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "coreset/error.hpp"

namespace coreset {

static_assert(std::endian::native == std::endian::little, "DCTF payloads are written in host order");

namespace {

constexpr std::size_t kHeaderBytes = 12;
constexpr std::uint8_t kVersion = 1;

void put_u64(std::vector<std::byte>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(std::span<const std::byte> b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::span<const std::byte> b) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

template <typename T>
Tensor make_tensor(DType dtype, std::vector<std::uint64_t> shape, std::span<const T> values) {
  Tensor t;
  t.dtype = dtype;
  t.shape = std::move(shape);
  t.payload.resize(values.size_bytes());
  if (!values.empty()) std::memcpy(t.payload.data(), values.data(), values.size_bytes());
  return t;
}

template <typename T>
std::vector<T> unpack(const Tensor& t, DType expected, const std::string& source) {
  if (t.dtype != expected) {
    throw ValidationError(source + ": dtype is " + dtype_name(t.dtype) + ", expected " + dtype_name(expected));
  }
  std::vector<T> out(t.payload.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), t.payload.data(), t.payload.size());
  return out;
}

}  // namespace

std::string dtype_name(DType t) {
  switch (t) {
    case DType::float32: return "float32";
    case DType::int32: return "int32";
    case DType::uint8: return "uint8";
  }
  return "unknown";
}

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::float32: return 4;
    case DType::int32: return 4;
    case DType::uint8: return 1;
  }
  return 0;
}

std::uint64_t Tensor::element_count() const {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::uint32_t crc32(std::span<const std::byte> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = ::crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::byte> encode_tensor(const Tensor& t) {
  if (t.shape.size() > 255) throw ValidationError("tensor rank exceeds 255");
  if (t.element_count() * dtype_size(t.dtype) != t.payload.size()) {
    throw ValidationError("tensor payload size does not match its shape");
  }
  std::vector<std::byte> out;
  out.reserve(kHeaderBytes + 8 * t.shape.size() + t.payload.size() + 4);
  for (char c : {'D', 'C', 'T', 'F'}) out.push_back(static_cast<std::byte>(c));
  out.push_back(static_cast<std::byte>(kVersion));
  out.push_back(static_cast<std::byte>(t.dtype));
  out.push_back(static_cast<std::byte>(t.shape.size()));
  for (int i = 0; i < 5; ++i) out.push_back(std::byte{0});
  for (auto d : t.shape) put_u64(out, d);
  out.insert(out.end(), t.payload.begin(), t.payload.end());
  put_u32(out, crc32(t.payload));
  return out;
}

Tensor decode_tensor(std::span<const std::byte> bytes, const std::string& source) {
  if (bytes.size() < kHeaderBytes) throw ValidationError(source + ": truncated header");
  if (std::memcmp(bytes.data(), "DCTF", 4) != 0) throw ValidationError(source + ": header magic mismatch");
  const auto version = static_cast<std::uint8_t>(bytes[4]);
  if (version != kVersion) {
    throw ValidationError(source + ": unsupported version " + std::to_string(version));
  }
  const auto code = static_cast<std::uint8_t>(bytes[5]);
  if (code < 1 || code > 3) throw ValidationError(source + ": unknown dtype code " + std::to_string(code));
  for (std::size_t i = 7; i < kHeaderBytes; ++i) {
    if (bytes[i] != std::byte{0}) throw ValidationError(source + ": reserved header bytes are not zero");
  }
  Tensor t;
  t.dtype = static_cast<DType>(code);
  const std::size_t rank = static_cast<std::uint8_t>(bytes[6]);
  std::size_t pos = kHeaderBytes;
  if (bytes.size() < pos + 8 * rank) throw ValidationError(source + ": truncated dimensions");
  for (std::size_t r = 0; r < rank; ++r, pos += 8) t.shape.push_back(get_u64(bytes.subspan(pos, 8)));

  // Guard the multiplication against absurd headers before allocating.
  std::uint64_t count = 1;
  for (auto d : t.shape) {
    if (d != 0 && count > (UINT64_MAX / 8) / d) throw ValidationError(source + ": dimensions overflow");
    count *= d;
  }
  const std::uint64_t payload_bytes = count * dtype_size(t.dtype);
  if (bytes.size() - pos != payload_bytes + 4) {
    throw ValidationError(source + ": file size does not match declared shape");
  }
  auto payload = bytes.subspan(pos, payload_bytes);
  const std::uint32_t stored = get_u32(bytes.subspan(pos + payload_bytes, 4));
  if (stored != crc32(payload)) throw ValidationError(source + ": payload checksum mismatch");
  t.payload.assign(payload.begin(), payload.end());
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("write failed: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("missing file: " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::span<const std::byte> bytes(reinterpret_cast<const std::byte*>(raw.data()), raw.size());
  return decode_tensor(bytes, path.filename().string());
}

Tensor to_tensor(const FloatMatrix& m) {
  return make_tensor<float>(DType::float32, {m.rows, m.cols}, m.data);
}

Tensor to_tensor(std::span<const float> v) { return make_tensor<float>(DType::float32, {v.size()}, v); }

Tensor to_tensor(std::span<const std::int32_t> v) {
  return make_tensor<std::int32_t>(DType::int32, {v.size()}, v);
}

Tensor to_tensor(std::span<const std::uint8_t> v, std::uint64_t rows, std::uint64_t cols) {
  return make_tensor<std::uint8_t>(DType::uint8, {rows, cols}, v);
}

FloatMatrix tensor_to_matrix(const Tensor& t, const std::string& source) {
  if (t.shape.size() != 2) throw ValidationError(source + ": expected rank 2, got " + std::to_string(t.shape.size()));
  return FloatMatrix(t.shape[0], t.shape[1], unpack<float>(t, DType::float32, source));
}

std::vector<float> tensor_to_floats(const Tensor& t, const std::string& source) {
  if (t.shape.size() != 1) throw ValidationError(source + ": expected rank 1, got " + std::to_string(t.shape.size()));
  return unpack<float>(t, DType::float32, source);
}

std::vector<std::int32_t> tensor_to_ints(const Tensor& t, const std::string& source) {
  if (t.shape.size() != 1) throw ValidationError(source + ": expected rank 1, got " + std::to_string(t.shape.size()));
  return unpack<std::int32_t>(t, DType::int32, source);
}

std::vector<std::uint8_t> tensor_to_bytes(const Tensor& t, const std::string& source) {
  if (t.shape.size() != 2) throw ValidationError(source + ": expected rank 2, got " + std::to_string(t.shape.size()));
  return unpack<std::uint8_t>(t, DType::uint8, source);
}

}  // namespace coreset
