#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>

#include <framecast/error.hpp>
#include <framecast/io.hpp>

using namespace framecast;
namespace fs = std::filesystem;

static fs::path temp_dir(const char* tag) {
  fs::path p = fs::temp_directory_path() / (std::string("framecast_io_") + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST_SUITE("io") {

TEST_CASE("csv quoting round-trips") {
  io::CsvTable t;
  t.columns = {"id", "note", "x"};
  t.rows.push_back({"a", "plain", "1.5"});
  t.rows.push_back({"b", "comma, inside", "2"});
  t.rows.push_back({"c", "quote \" inside", "3"});
  t.rows.push_back({"d", "line\nbreak", "4"});
  t.rows.push_back({"e", "", "5"});

  std::string text = io::format_csv(t);
  io::CsvTable back = io::parse_csv(text);
  REQUIRE(back.columns == t.columns);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(back.rows[i] == t.rows[i]);
}

TEST_CASE("csv column lookup") {
  io::CsvTable t;
  t.columns = {"alpha", "beta"};
  CHECK(t.column_index("beta") == 1);
  CHECK_THROWS_AS(t.column_index("gamma"), Error);
  CHECK(t.find_column("gamma") == std::nullopt);
  CHECK(t.find_column("alpha") == std::size_t{0});
}

TEST_CASE("csv rejects ragged rows") {
  CHECK_THROWS_AS(io::parse_csv("a,b\n1,2,3\n"), Error);
}

TEST_CASE("csv file round-trip") {
  auto dir = temp_dir("csv");
  io::CsvTable t;
  t.columns = {"k", "v"};
  t.rows.push_back({"x", "1"});
  io::write_csv(dir / "t.csv", t);
  auto back = io::read_csv(dir / "t.csv");
  CHECK(back.rows == t.rows);
  fs::remove_all(dir);
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 1.0 / 3.0, 1e-12, 6.878, -0.5165,
                   123456789.123456789, 2.2250738585072014e-308}) {
    std::string s = io::format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("checkpoint container round-trips") {
  auto dir = temp_dir("ckpt");
  std::string manifest = "{\"k\":5,\"shapes\":[3,2]}";
  std::vector<float> data = {1.0f, -2.5f, 3.25f, 0.0f, 1e-7f, 42.0f};
  io::write_checkpoint_file(dir / "m.fckp", manifest, data);

  auto blob = io::read_checkpoint_file(dir / "m.fckp");
  CHECK(blob.manifest_json == manifest);
  REQUIRE(blob.data.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(blob.data[i] == data[i]);

  // Magic header guards against foreign files.
  std::string raw = io::read_file(dir / "m.fckp");
  CHECK(raw.substr(0, 6) == "FCKP1\n");
  io::write_file(dir / "bad.fckp", "NOTCKP" + raw.substr(6));
  CHECK_THROWS_AS(io::read_checkpoint_file(dir / "bad.fckp"), Error);

  // Truncated payload is rejected.
  io::write_file(dir / "trunc.fckp", raw.substr(0, raw.size() - 3));
  CHECK_THROWS_AS(io::read_checkpoint_file(dir / "trunc.fckp"), Error);
  fs::remove_all(dir);
}

TEST_CASE("missing file errors") {
  CHECK_THROWS_AS(io::read_file("/nonexistent/definitely/missing.txt"), Error);
  CHECK_THROWS_AS(io::read_checkpoint_file("/nonexistent/missing.fckp"), Error);
}

TEST_CASE("OutputDir removes its files unless committed") {
  auto base = temp_dir("outdir");
  fs::path target = base / "run";
  {
    io::OutputDir out(target);
    io::write_file(out.file("a.txt"), "hello");
    CHECK(fs::exists(target / "a.txt"));
    // no commit
  }
  CHECK(!fs::exists(target / "a.txt"));
  {
    io::OutputDir out(target);
    io::write_file(out.file("b.txt"), "hello");
    out.commit();
  }
  CHECK(fs::exists(target / "b.txt"));
  fs::remove_all(base);
}

}  // TEST_SUITE
