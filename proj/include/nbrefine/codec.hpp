#pragma once

// Embedding and label file formats.
//
// Binary embeddings, all integers little-endian:
//   offset 0   4 bytes   magic "CONR"
//   offset 4   u32       format version (1)
//   offset 8   u64       rows n
//   offset 16  u64       columns d
//   offset 24  n*d f32   IEEE-754 values, row-major
//
// CSV embeddings: one row per line, comma-separated decimals. A first line
// that does not parse as numbers is treated as a header and skipped.
//
// Labels: one decimal integer per line.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nbrefine/matrix.hpp"

namespace nbr {

inline constexpr std::uint32_t kBinaryVersion = 1;
inline constexpr std::size_t kBinaryHeaderSize = 24;

enum class FileFormat { kBinary, kCsv };

// Throws ConfigError for anything but "bin" or "csv".
FileFormat parse_format(std::string_view name);
// ".csv" selects CSV, anything else binary.
FileFormat format_from_path(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_binary(const Matrix& m);
Matrix decode_binary(std::span<const std::uint8_t> bytes);

std::string encode_csv(const Matrix& m);
Matrix decode_csv(std::string_view text);

std::string encode_labels(std::span<const std::size_t> labels);
std::vector<std::int64_t> decode_labels(std::string_view text);

Matrix read_matrix(const std::filesystem::path& path, FileFormat format);
void write_matrix(const std::filesystem::path& path, const Matrix& m, FileFormat format);
std::vector<std::int64_t> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, std::span<const std::size_t> labels);

}  // namespace nbr
