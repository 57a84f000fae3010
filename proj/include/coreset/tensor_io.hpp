#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coreset/types.hpp"

namespace coreset {

// DCTF tensor file layout (all integers little-endian):
//   bytes 0..3   magic "DCTF"
//   byte  4      version (1)
//   byte  5      dtype code: 1 = float32, 2 = int32, 3 = uint8
//   byte  6      rank
//   bytes 7..11  reserved, zero
//   rank x u64   dimensions
//   payload      row-major elements
//   u32          CRC32 (IEEE, zlib polynomial) of the payload bytes

enum class DType : std::uint8_t { float32 = 1, int32 = 2, uint8 = 3 };

std::string dtype_name(DType t);
std::size_t dtype_size(DType t);

struct Tensor {
  DType dtype = DType::float32;
  std::vector<std::uint64_t> shape;
  std::vector<std::byte> payload;

  std::uint64_t element_count() const;
};

std::uint32_t crc32(std::span<const std::byte> bytes);

std::vector<std::byte> encode_tensor(const Tensor& t);
/// `source` names the file in error messages.
Tensor decode_tensor(std::span<const std::byte> bytes, const std::string& source);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

Tensor to_tensor(const FloatMatrix& m);
Tensor to_tensor(std::span<const float> v);
Tensor to_tensor(std::span<const std::int32_t> v);
Tensor to_tensor(std::span<const std::uint8_t> v, std::uint64_t rows, std::uint64_t cols);

FloatMatrix tensor_to_matrix(const Tensor& t, const std::string& source);
std::vector<float> tensor_to_floats(const Tensor& t, const std::string& source);
std::vector<std::int32_t> tensor_to_ints(const Tensor& t, const std::string& source);
std::vector<std::uint8_t> tensor_to_bytes(const Tensor& t, const std::string& source);

}  // namespace coreset
