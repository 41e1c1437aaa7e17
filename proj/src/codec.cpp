#include "nbrefine/codec.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "nbrefine/error.hpp"

namespace nbr {
namespace {

constexpr char kMagic[4] = {'C', 'O', 'N', 'R'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  std::uint64_t read_le(std::size_t width) {
    if (bytes_.size() - pos_ < width) {
      throw DataError("unexpected end at offset " + std::to_string(bytes_.size()));
    }
    std::uint64_t v = 0;
    for (std::size_t b = 0; b < width; ++b) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
    }
    pos_ += width;
    return v;
  }

  std::span<const std::uint8_t> take(std::size_t count) {
    if (bytes_.size() - pos_ < count) {
      throw DataError("unexpected end at offset " + std::to_string(bytes_.size()));
    }
    auto s = bytes_.subspan(pos_, count);
    pos_ += count;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    const auto comma = line.find(',');
    fields.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return fields;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

FileFormat parse_format(std::string_view name) {
  if (name == "bin") return FileFormat::kBinary;
  if (name == "csv") return FileFormat::kCsv;
  throw ConfigError("unknown format '" + std::string(name) + "', expected bin or csv");
}

FileFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FileFormat::kCsv : FileFormat::kBinary;
}

std::vector<std::uint8_t> encode_binary(const Matrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(kBinaryHeaderSize + 4 * m.values().size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kBinaryVersion);
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const auto f = static_cast<float>(m(r, c));
      if (!std::isfinite(f)) {
        throw DataError("value at row " + std::to_string(r) + ", column " + std::to_string(c) +
                        " is not representable as a finite float32");
      }
      put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
  }
  return out;
}

Matrix decode_binary(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  auto magic = in.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw DataError("bad magic at offset 0");
  const auto version = static_cast<std::uint32_t>(in.read_le(4));
  if (version != kBinaryVersion) {
    throw DataError("unsupported version " + std::to_string(version) + " at offset 4");
  }
  const std::uint64_t rows = in.read_le(8);
  const std::uint64_t cols = in.read_le(8);
  if (rows == 0 || cols == 0) {
    throw DataError("bad shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                    " at offset 8");
  }
  const std::uint64_t max_values = in.remaining() / 4;
  if (cols > max_values || rows > max_values / cols) {
    throw DataError("unexpected end at offset " + std::to_string(bytes.size()) + ": shape " +
                    std::to_string(rows) + "x" + std::to_string(cols) + " needs more data");
  }

  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto f = std::bit_cast<float>(static_cast<std::uint32_t>(in.read_le(4)));
      if (!std::isfinite(f)) {
        throw DataError("non-finite value at row " + std::to_string(r) + ", column " +
                        std::to_string(c) + " (offset " + std::to_string(in.offset() - 4) + ")");
      }
      m(r, c) = f;
    }
  }
  if (in.remaining() != 0) {
    throw DataError("trailing bytes at offset " + std::to_string(in.offset()));
  }
  return m;
}

std::string encode_csv(const Matrix& m) {
  std::string out;
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof buf, m(r, c));
      out.append(buf, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

Matrix decode_csv(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<std::vector<double>> rows;
  bool first_content = true;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = trim(lines[ln]);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    std::size_t bad = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], values[c])) {
        numeric = false;
        bad = c;
        break;
      }
    }
    if (first_content) {
      first_content = false;
      if (!numeric) continue;  // header
    }
    if (!numeric) {
      throw DataError("line " + std::to_string(ln + 1) + ", column " + std::to_string(bad) +
                      ": not a number");
    }
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (!std::isfinite(values[c])) {
        throw DataError("non-finite value at row " + std::to_string(rows.size()) + ", column " +
                        std::to_string(c) + " (line " + std::to_string(ln + 1) + ")");
      }
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw DataError("line " + std::to_string(ln + 1) + " has " + std::to_string(values.size()) +
                      " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError("CSV contains no data rows");
  return Matrix::from_rows(rows);
}

std::string encode_labels(std::span<const std::size_t> labels) {
  std::string out;
  for (std::size_t l : labels) {
    out += std::to_string(l);
    out.push_back('\n');
  }
  return out;
}

std::vector<std::int64_t> decode_labels(std::string_view text) {
  std::vector<std::int64_t> labels;
  const auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string_view line = trim(lines[ln]);
    if (line.empty()) continue;
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size() || v < 0) {
      throw DataError("line " + std::to_string(ln + 1) + ": expected a non-negative integer label");
    }
    labels.push_back(v);
  }
  return labels;
}

Matrix read_matrix(const std::filesystem::path& path, FileFormat format) {
  const std::string data = read_file(path);
  if (format == FileFormat::kCsv) return decode_csv(data);
  return decode_binary(
      std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, FileFormat format) {
  if (format == FileFormat::kCsv) {
    write_file(path, encode_csv(m));
    return;
  }
  const auto bytes = encode_binary(m);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<std::int64_t> read_labels(const std::filesystem::path& path) {
  return decode_labels(read_file(path));
}

void write_labels(const std::filesystem::path& path, std::span<const std::size_t> labels) {
  write_file(path, encode_labels(labels));
}

}  // namespace nbr
