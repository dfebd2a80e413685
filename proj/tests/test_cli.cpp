#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "support.hpp"
#include "tdassist/segmentation.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(TDASSIST_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("ocr correction") {
    TempDir dir("tdassist-cli-correct");
    write(dir / "names.txt", "wannes\ndii3s\ndries\n");
    write(dir / "ocr.json",
          R"([{"d":0.8,"b":0.1,"o":0.1},{"r":1.0},{"i":1.0},{"e":0.8,"3":0.2},{"s":1.0}])");
    const auto r = cli("correct " + (dir / "ocr.json") + " --dictionary " + (dir / "names.txt"));
    REQUIRE(r.status == 0);
    const auto j = json::parse(r.out);
    CHECK(j["corrected"] == "dries");
    CHECK(j["candidates"][0]["score"].get<double>() == doctest::Approx(0.64));

    write(dir / "qty.json", R"([{"]":0.63,"1":0.13,"|":0.071,"I":0.071,"J":0.054,"l":0.044}])");
    const auto t = cli("correct " + (dir / "qty.json") + " --type digit");
    REQUIRE(t.status == 0);
    CHECK(json::parse(t.out)["corrected"] == "1");
  }

  TEST_CASE("fixtures, parse, index and rank") {
    TempDir dir("tdassist-cli-index");
    REQUIRE(cli("fixtures " + (dir / "fx") + " --count 6 --fixture-seed 3").status == 0);
    CHECK(fs::exists(dir.path / "fx" / "dwg-006.json"));
    write(dir / "parser.json", tdassist::index::to_json(support::parts_list_parser()).dump());

    const auto parsed = cli("parse " + (dir / "fx/dwg-002.json") + " --programs " + (dir / "parser.json"));
    REQUIRE(parsed.status == 0);
    const auto pj = json::parse(parsed.out);
    const auto d = tdassist::drawing::load_drawing_file(dir / "fx/dwg-002.json");
    CHECK(pj["labels"]["materials"].size() == d.labels.at("materials").size());

    const auto built = cli("index build " + (dir / "fx") + " --out " + (dir / "idx.json") +
                           " --bias " + support::data_path("mining.bias") + " --programs " +
                           (dir / "parser.json") + " --max-literals 2");
    REQUIRE(built.status == 0);
    const auto ranked = cli("rank " + (dir / "fx/dwg-004.json") + " --index " + (dir / "idx.json") + " -k 3");
    REQUIRE(ranked.status == 0);
    const auto results = json::parse(ranked.out);
    REQUIRE(results.size() == 3);
    CHECK(results[0]["id"] == "dwg-004");
    CHECK(results[0]["rank"] == 1);
  }

  TEST_CASE("segmentation of a bitmap") {
    TempDir dir("tdassist-cli-segment");
    tdassist::segmentation::Bitmap b(120, 40);
    for (int y = 5; y < 15; ++y)
      for (int x = 5; x < 25; ++x) b.set(x, y, 0);
    for (int y = 5; y < 15; ++y)
      for (int x = 80; x < 100; ++x) b.set(x, y, 0);
    write(dir / "img.pgm", tdassist::segmentation::encode_pgm(b));
    const auto r = cli("segment " + (dir / "img.pgm") + " --min-pts 3");
    REQUIRE(r.status == 0);
    CHECK(json::parse(r.out)["clusters"].size() == 2);
  }

  TEST_CASE("failures exit nonzero with an error object") {
    const auto missing = cli("rank /nonexistent/q.json --index /nonexistent/i.json");
    CHECK(missing.status == 1);
    CHECK(json::parse(missing.out)["code"] == "not-found");
    CHECK(cli("rank --no-such-flag").status == 1);
    CHECK(cli("correct /nonexistent.json --type hex").status == 1);
  }
}
