#include <cstring>

#include "coreset/error.hpp"
#include "coreset/tensor_io.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace coreset;

namespace {

// Bitwise reflected CRC-32 (poly 0xEDB88320), independent of zlib.
std::uint32_t crc_oracle(const std::vector<std::uint8_t>& bytes) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (auto b : bytes) {
    crc ^= b;
    for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

// A 2x2 float32 file assembled byte by byte from the layout description.
std::vector<std::uint8_t> hand_built_f32(const std::vector<float>& values) {
  std::vector<std::uint8_t> out = {'D', 'C', 'T', 'F', 1, 1, 2, 0, 0, 0, 0, 0};
  put_u64(out, 2);
  put_u64(out, 2);
  std::vector<std::uint8_t> payload;
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(payload, bits);
  }
  out.insert(out.end(), payload.begin(), payload.end());
  put_u32(out, crc_oracle(payload));
  return out;
}

std::vector<std::byte> as_bytes(const std::vector<std::uint8_t>& v) {
  std::vector<std::byte> out(v.size());
  std::memcpy(out.data(), v.data(), v.size());
  return out;
}

}  // namespace

TEST_CASE("crc32 matches the bitwise oracle and the standard check value") {
  const std::string check = "123456789";
  std::vector<std::uint8_t> v(check.begin(), check.end());
  CHECK(crc_oracle(v) == 0xCBF43926u);
  CHECK(crc32(as_bytes(v)) == 0xCBF43926u);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> r(rng() % 300);
    for (auto& b : r) b = static_cast<std::uint8_t>(rng());
    CHECK(crc32(as_bytes(r)) == crc_oracle(r));
  }
}

TEST_CASE("encoder output equals the hand-built layout") {
  const std::vector<float> values = {1.5f, -2.0f, 0.25f, 3.0f};
  const auto expected = as_bytes(hand_built_f32(values));
  CHECK(encode_tensor(to_tensor(testing::matrix(2, 2, values))) == expected);

  const Tensor t = decode_tensor(expected, "hand.dctf");
  CHECK(t.dtype == DType::float32);
  CHECK(t.shape == std::vector<std::uint64_t>{2, 2});
  CHECK(tensor_to_matrix(t, "hand.dctf") == testing::matrix(2, 2, values));
}

TEST_CASE("int32 and uint8 tensors round-trip") {
  const std::vector<std::int32_t> ints = {0, -7, 1 << 30, 3};
  const auto ti = decode_tensor(encode_tensor(to_tensor(std::span<const std::int32_t>(ints))), "i");
  CHECK(ti.dtype == DType::int32);
  CHECK(tensor_to_ints(ti, "i") == ints);

  const std::vector<std::uint8_t> bits = {1, 0, 0, 1, 1, 1};
  const auto tb = decode_tensor(encode_tensor(to_tensor(std::span<const std::uint8_t>(bits), 2, 3)), "b");
  CHECK(tb.shape == std::vector<std::uint64_t>{2, 3});
  CHECK(tensor_to_bytes(tb, "b") == bits);
}

TEST_CASE("malformed headers are rejected with a named cause") {
  const auto good = hand_built_f32({1, 2, 3, 4});
  const auto expect_error = [](std::vector<std::uint8_t> bytes, const std::string& needle) {
    try {
      decode_tensor(as_bytes(bytes), "x.dctf");
      FAIL("accepted a malformed tensor");
    } catch (const ValidationError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
      CHECK(std::string(e.what()).find("x.dctf") != std::string::npos);
    }
  };
  auto bad = good;
  bad[0] = 'X';
  expect_error(bad, "magic");
  bad = good;
  bad[4] = 2;
  expect_error(bad, "version");
  bad = good;
  bad[5] = 9;
  expect_error(bad, "dtype");
  bad = good;
  bad[9] = 1;
  expect_error(bad, "reserved");
  bad = good;
  bad[12 + 16 + 5] ^= 0x01;
  expect_error(bad, "checksum");
  bad = good;
  bad.resize(bad.size() - 6);
  expect_error(bad, "size");
  bad = good;
  bad.resize(8);
  expect_error(bad, "truncated");
}

TEST_CASE("read_tensor names a missing file") {
  const auto dir = testing::scratch_dir("tensor_missing");
  CHECK_THROWS_WITH_AS(read_tensor(dir / "features.dctf"), doctest::Contains("missing file"), ValidationError);
}
