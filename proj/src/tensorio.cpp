#include "fidkit/tensorio.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fidkit {

namespace {

constexpr char kMagic[4] = {'T', 'N', 'S', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path)
      : b_(bytes), path_(path) {}

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > b_.size())
      throw std::runtime_error(path_ + ": truncated " + what + ": expected " +
                               std::to_string(pos_ + n) + " bytes, got " +
                               std::to_string(b_.size()));
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= std::uint32_t(std::uint8_t(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= std::uint64_t(std::uint8_t(b_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return std::uint8_t(b_[pos_++]);
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t size() const { return b_.size(); }

 private:
  const std::string& b_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void TensorSet::validate() const {
  if (rows < 1 || cols < 1)
    throw std::runtime_error("tensor must have rows >= 1 and cols >= 1");
  if (data.size() != rows * cols)
    throw std::runtime_error("tensor data length " +
                             std::to_string(data.size()) + " != rows*cols " +
                             std::to_string(rows * cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (!std::isfinite(at(r, c)))
        throw std::runtime_error("non-finite value at row " +
                                 std::to_string(r) + ", col " +
                                 std::to_string(c));
  if (!ids.empty()) {
    if (ids.size() != rows)
      throw std::runtime_error("id count " + std::to_string(ids.size()) +
                               " != rows " + std::to_string(rows));
    std::set<std::string> seen;
    for (const auto& id : ids)
      if (!seen.insert(id).second)
        throw std::runtime_error("duplicate id \"" + id + "\"");
  }
}

void atomic_write(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename to " + path + ": " + ec.message());
}

void write_tensor(const std::string& path, const TensorSet& t) {
  t.validate();  // reject before any bytes hit the disk
  std::string out;
  out.reserve(26 + t.data.size() * 4 + 8);
  out.append(kMagic, 4);
  put_u32(out, 1);       // version
  out.push_back('\0');   // dtype 0 = float32
  out.push_back('\2');   // rank 2
  put_u64(out, t.rows);
  put_u64(out, t.cols);
  for (float f : t.data) put_f32(out, f);
  put_u64(out, t.ids.size());
  for (const auto& id : t.ids) {
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.append(id);
  }
  atomic_write(path, out);
}

TensorSet read_tensor(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader r(bytes, path);
  if (r.bytes(4, "header") != std::string(kMagic, 4))
    throw std::runtime_error(path + ": not a TNS1 file");
  const auto version = r.u32("header");
  if (version != 1)
    throw std::runtime_error(path + ": unsupported version " +
                             std::to_string(version));
  const auto dtype = r.u8("header");
  if (dtype != 0)
    throw std::runtime_error(path + ": unsupported dtype " +
                             std::to_string(dtype));
  const auto rank = r.u8("header");
  if (rank != 2)
    throw std::runtime_error(path + ": unsupported rank " +
                             std::to_string(rank));
  TensorSet t;
  t.rows = r.u64("header");
  t.cols = r.u64("header");
  if (t.rows == 0 || t.cols == 0 || t.rows > (std::size_t(1) << 40) ||
      t.cols > (std::size_t(1) << 40) ||
      t.rows > std::numeric_limits<std::size_t>::max() / 4 / t.cols)
    throw std::runtime_error(path + ": bad dims " + std::to_string(t.rows) +
                             "x" + std::to_string(t.cols));
  r.need(t.rows * t.cols * 4, "payload");
  t.data.resize(t.rows * t.cols);
  for (auto& f : t.data) f = r.f32("payload");
  const auto nids = r.u64("id block");
  if (nids != 0) {
    if (nids != t.rows)
      throw std::runtime_error(path + ": id count " + std::to_string(nids) +
                               " != rows " + std::to_string(t.rows));
    t.ids.reserve(nids);
    for (std::uint64_t i = 0; i < nids; ++i) {
      const auto len = r.u32("id block");
      t.ids.push_back(r.bytes(len, "id block"));
    }
  }
  if (r.pos() != r.size())
    throw std::runtime_error(path + ": " +
                             std::to_string(r.size() - r.pos()) +
                             " trailing bytes");
  t.validate();
  return t;
}

TensorSet read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<std::vector<std::string>> cells;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    cells.push_back(std::move(row));
  }
  if (cells.empty()) throw std::runtime_error(path + ": empty CSV");

  auto parse_cell = [&](const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0';
  };

  // Header detection: a first line with any non-numeric cell is a header;
  // header[0] == "id" marks a row-identifier column.
  bool has_header = false;
  for (const auto& c : cells[0]) {
    double v;
    if (!parse_cell(c, v)) {
      has_header = true;
      break;
    }
  }
  const bool has_id_col = has_header && cells[0][0] == "id";
  const std::size_t first_data = has_header ? 1 : 0;
  if (first_data >= cells.size())
    throw std::runtime_error(path + ": no data rows");

  const std::size_t ncols = cells[first_data].size();
  TensorSet t;
  t.rows = cells.size() - first_data;
  t.cols = ncols - (has_id_col ? 1 : 0);
  if (t.cols == 0) throw std::runtime_error(path + ": no numeric columns");
  t.data.reserve(t.rows * t.cols);
  for (std::size_t i = first_data; i < cells.size(); ++i) {
    if (cells[i].size() != ncols)
      throw std::runtime_error(path + ": ragged row at line " +
                               std::to_string(i + 1) + ": expected " +
                               std::to_string(ncols) + " cells, got " +
                               std::to_string(cells[i].size()));
    std::size_t c0 = 0;
    if (has_id_col) {
      t.ids.push_back(cells[i][0]);
      c0 = 1;
    }
    for (std::size_t c = c0; c < ncols; ++c) {
      double v;
      if (!parse_cell(cells[i][c], v))
        throw std::runtime_error(path + ": unparsable cell \"" + cells[i][c] +
                                 "\" at line " + std::to_string(i + 1));
      t.data.push_back(static_cast<float>(v));
    }
  }
  t.validate();
  return t;
}

TensorSet read_any(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return read_csv_matrix(path);
  return read_tensor(path);
}

}  // namespace fidkit
