#include "framecast/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "framecast/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian; byte swapping not implemented");

namespace framecast::io {

std::size_t CsvTable::column_index(const std::string& name) const {
  auto idx = find_column(name);
  require(idx.has_value(), "invalid_input", "csv: missing column '" + name + "'");
  return *idx;
}

std::optional<std::size_t> CsvTable::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> parse_csv_line(const std::string& text, std::size_t& pos) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  while (pos < text.size()) {
    char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cell += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      ++pos;
      continue;
    }
    if (c == '"') {
      quoted = true;
      ++pos;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
      ++pos;
    } else if (c == '\n') {
      ++pos;
      break;
    } else if (c == '\r') {
      ++pos;  // swallow; the following \n ends the line
    } else {
      cell += c;
      ++pos;
    }
  }
  require(!quoted, "invalid_input", "csv: unterminated quoted cell");
  cells.push_back(std::move(cell));
  return cells;
}

bool needs_quoting(const std::string& cell) {
  return cell.find_first_of(",\"\n\r") != std::string::npos;
}

void append_cell(std::string& out, const std::string& cell) {
  if (!needs_quoting(cell)) {
    out += cell;
    return;
  }
  out += '"';
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  require(!text.empty(), "invalid_input", "csv: empty input");
  CsvTable t;
  std::size_t pos = 0;
  t.columns = parse_csv_line(text, pos);
  while (pos < text.size()) {
    if (text[pos] == '\n') {  // tolerate blank line at end
      ++pos;
      continue;
    }
    auto row = parse_csv_line(text, pos);
    require(row.size() == t.columns.size(), "invalid_input",
            "csv: row width does not match header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path));
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    append_cell(out, table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    require(row.size() == table.columns.size(), "invalid_input",
            "csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      append_cell(out, row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_file(path, format_csv(table));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "io", "cannot open for reading: " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  require(!in.bad(), "io", "read failed: " + path.string());
  return content;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "io", "cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  require(out.good(), "io", "write failed: " + path.string());
}

void append_line(std::string& buffer, const std::string& line) {
  buffer += line;
  buffer += '\n';
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  require(ec == std::errc(), "invalid_input", "format_double failed");
  return std::string(buf, end);
}

namespace {

constexpr char kCkptMagic[6] = {'F', 'C', 'K', 'P', '1', '\n'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64(const std::string& s, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

void write_checkpoint_file(const std::filesystem::path& path,
                           const std::string& manifest_json,
                           const std::vector<float>& data) {
  std::string out;
  out.reserve(sizeof(kCkptMagic) + 16 + manifest_json.size() + data.size() * 4);
  out.append(kCkptMagic, sizeof(kCkptMagic));
  put_u64(out, manifest_json.size());
  out += manifest_json;
  put_u64(out, data.size());
  std::size_t payload_at = out.size();
  out.resize(out.size() + data.size() * 4);
  std::memcpy(out.data() + payload_at, data.data(), data.size() * 4);
  write_file(path, out);
}

CheckpointBlob read_checkpoint_file(const std::filesystem::path& path) {
  std::string raw = read_file(path);
  require(raw.size() >= sizeof(kCkptMagic) + 16 &&
              std::memcmp(raw.data(), kCkptMagic, sizeof(kCkptMagic)) == 0,
          "io", "not a checkpoint file: " + path.string());
  std::size_t pos = sizeof(kCkptMagic);
  std::uint64_t manifest_len = get_u64(raw, pos);
  pos += 8;
  require(raw.size() >= pos + manifest_len + 8, "io",
          "truncated checkpoint manifest: " + path.string());
  CheckpointBlob blob;
  blob.manifest_json = raw.substr(pos, manifest_len);
  pos += manifest_len;
  std::uint64_t count = get_u64(raw, pos);
  pos += 8;
  require(raw.size() == pos + count * 4, "io",
          "checkpoint payload size mismatch: " + path.string());
  blob.data.resize(count);
  std::memcpy(blob.data.data(), raw.data() + pos, count * 4);
  return blob;
}

OutputDir::OutputDir(const std::filesystem::path& dir) : dir_(dir) {
  if (!std::filesystem::exists(dir_)) {
    std::filesystem::create_directories(dir_);
    created_dir_ = true;
  } else {
    require(std::filesystem::is_directory(dir_), "io",
            "output path exists and is not a directory: " + dir_.string());
  }
}

std::filesystem::path OutputDir::file(const std::string& name) {
  auto p = dir_ / name;
  written_.push_back(p);
  return p;
}

OutputDir::~OutputDir() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& p : written_) std::filesystem::remove(p, ec);
  if (created_dir_) std::filesystem::remove(dir_, ec);  // only removes if empty
}

}  // namespace framecast::io
