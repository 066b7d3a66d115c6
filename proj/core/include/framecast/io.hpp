#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace framecast::io {

// Minimal RFC-4180 style CSV: comma separator, double-quote quoting with ""
// escapes, first row is the header. Cells are stored verbatim (no type
// coercion); an empty cell means missing.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const;        // throws if absent
  std::optional<std::size_t> find_column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string format_csv(const CsvTable& table);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);
void append_line(std::string& buffer, const std::string& line);

// Shortest representation that round-trips the double exactly; used for every
// numeric cell we emit so identical values always serialize identically.
std::string format_double(double v);

// Model checkpoint container: a JSON manifest followed by a flat float32
// payload. Layout: "FCKP1\n", u64 LE manifest byte count, manifest bytes,
// u64 LE float count, floats LE.
struct CheckpointBlob {
  std::string manifest_json;
  std::vector<float> data;
};

void write_checkpoint_file(const std::filesystem::path& path,
                           const std::string& manifest_json,
                           const std::vector<float>& data);
CheckpointBlob read_checkpoint_file(const std::filesystem::path& path);

// Tracks files written into an output directory so a failed command can
// remove everything it created (including the directory, if it created it).
class OutputDir {
 public:
  explicit OutputDir(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path file(const std::string& name);  // registers the path
  void commit() { committed_ = true; }
  ~OutputDir();

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
  bool created_dir_ = false;
  bool committed_ = false;
};

}  // namespace framecast::io
