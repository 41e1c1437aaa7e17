#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "nbrefine/codec.hpp"
#include "nbrefine/error.hpp"

using namespace nbr;

namespace {

// Values that survive a float32 round trip bit-for-bit.
Matrix random_float_matrix(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<float> g(0.0f, 3.0f);
  std::vector<double> v(n * d);
  for (double& x : v) x = static_cast<double>(g(rng));
  return Matrix(n, d, std::move(v));
}

std::string error_of(std::span<const std::uint8_t> bytes) {
  try {
    decode_binary(bytes);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Binary, Layout) {
  const Matrix m(1, 2, std::vector<double>{1.0, -2.0});
  const auto bytes = encode_binary(m);
  ASSERT_EQ(bytes.size(), kBinaryHeaderSize + 8);
  EXPECT_EQ(std::memcmp(bytes.data(), "CONR", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[16], 2);
  // 1.0f = 0x3f800000, little-endian
  EXPECT_EQ(bytes[24], 0x00);
  EXPECT_EQ(bytes[27], 0x3f);
}

TEST(Binary, RoundTripExact) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_float_matrix(1 + rng() % 20, 1 + rng() % 10, rng);
    EXPECT_EQ(decode_binary(encode_binary(m)), m);
  }
}

TEST(Binary, EveryTruncationFails) {
  std::mt19937_64 rng(2);
  const auto bytes = encode_binary(random_float_matrix(3, 4, rng));
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    const std::string msg = error_of(std::span(bytes).first(len));
    EXPECT_NE(msg.find("offset"), std::string::npos) << len;
  }
  EXPECT_EQ(error_of(std::span(bytes).first(10)), "unexpected end at offset 10");
}

TEST(Binary, HeaderErrors) {
  const auto good = encode_binary(Matrix(2, 2, 0.5));
  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(error_of(bad), "bad magic at offset 0");
  bad = good;
  bad[4] = 7;
  EXPECT_NE(error_of(bad).find("at offset 4"), std::string::npos);
  bad = good;
  bad[8] = 0;
  EXPECT_NE(error_of(bad).find("at offset 8"), std::string::npos);
  bad = good;
  bad.push_back(0);
  EXPECT_NE(error_of(bad).find("trailing"), std::string::npos);
}

TEST(Binary, NonFiniteRejected) {
  auto bytes = encode_binary(Matrix(2, 3, 1.0));
  const float inf = std::numeric_limits<float>::infinity();
  std::memcpy(bytes.data() + kBinaryHeaderSize + 5 * 4, &inf, 4);
  const std::string msg = error_of(bytes);
  EXPECT_NE(msg.find("row 1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
}

TEST(Csv, RoundTripExactAndHeader) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> v(12);
  for (double& x : v) x = g(rng);
  const Matrix m(4, 3, v);
  EXPECT_EQ(decode_csv(encode_csv(m)), m);
  EXPECT_EQ(decode_csv("a,b\n1,2\n3,4\n"), Matrix(2, 2, std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(decode_csv("1, 2\r\n3,4"), Matrix(2, 2, std::vector<double>{1, 2, 3, 4}));
}

TEST(Csv, Errors) {
  EXPECT_THROW(decode_csv(""), DataError);
  EXPECT_THROW(decode_csv("1,2\n3\n"), DataError);
  EXPECT_THROW(decode_csv("1,2\n3,x\n"), DataError);
  EXPECT_THROW(decode_csv("1,nan\n"), DataError);
}

TEST(Labels, RoundTrip) {
  const std::vector<std::size_t> l = {3, 0, 2, 2};
  const auto back = decode_labels(encode_labels(l));
  EXPECT_EQ(back, (std::vector<std::int64_t>{3, 0, 2, 2}));
  EXPECT_EQ(decode_labels("5\n1\n\n"), (std::vector<std::int64_t>{5, 1}));
  EXPECT_THROW(decode_labels("-1\n"), DataError);
  EXPECT_THROW(decode_labels("1\nfoo\n"), DataError);
}

TEST(Files, FormatSelection) {
  EXPECT_EQ(format_from_path("x.csv"), FileFormat::kCsv);
  EXPECT_EQ(format_from_path("x.bin"), FileFormat::kBinary);
  EXPECT_EQ(parse_format("csv"), FileFormat::kCsv);
  EXPECT_THROW(parse_format("npy"), ConfigError);
}

TEST(Files, WriteRead) {
  const auto dir = std::filesystem::temp_directory_path() / "nbrefine_codec_test";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(4);
  const Matrix m = random_float_matrix(5, 3, rng);
  for (auto fmt : {FileFormat::kBinary, FileFormat::kCsv}) {
    const auto path = dir / (fmt == FileFormat::kCsv ? "m.csv" : "m.bin");
    write_matrix(path, m, fmt);
    EXPECT_EQ(read_matrix(path, fmt), m);
  }
  EXPECT_THROW(read_matrix(dir / "missing.bin", FileFormat::kBinary), DataError);
  std::filesystem::remove_all(dir);
}
