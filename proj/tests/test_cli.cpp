// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(NDTPF_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  REQUIRE(pipe);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe.release());
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path work() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "ndtpf_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (work() / name).string(); }

// Flags documented in the README for each subcommand.
const std::map<std::string, std::vector<std::string>> kDocumented{
    {"datagen", {"--songs", "--takes", "--notes", "--seed", "--out"}},
    {"extract", {"--f0", "--offset", "--all-offsets", "--out"}},
    {"train",
     {"--corpus", "--epochs", "--batch", "--seed", "--mode", "--lr", "--lambda", "--sigma-in",
      "--sigma-out", "--rff-dim", "--noise-dim", "--out", "--quiet"}},
    {"filter", {"--model", "--f0", "--seed", "--takes", "--out"}},
    {"adt",
     {"--f0", "--rate", "--depth", "--delay-ms", "--gain-db", "--sample-rate", "--harmonics",
      "--rolloff", "--peak", "--out"}},
    {"ndt",
     {"--model", "--f0", "--seed", "--delay-ms", "--gain-db", "--sample-rate", "--harmonics",
      "--rolloff", "--peak", "--out"}},
    {"mix", {"--a", "--b", "--delay-ms", "--gain-db", "--out"}},
    {"eval", {"--natural", "--takes", "--model", "--sigma", "--report"}},
    {"plot", {"--f0", "--out"}},
};

void make_corpus() {
  static bool done = false;
  if (done) return;
  REQUIRE(cli("datagen --songs 2 --takes 2 --notes 6 --seed 3 --out " + at("corpus")).status == 0);
  REQUIRE(cli("train --corpus " + at("corpus") +
              " --epochs 1 --batch 128 --seed 4 --quiet --out " + at("model.bin"))
              .status == 0);
  done = true;
}

}  // namespace

TEST_CASE("help lists every documented flag") {
  const auto top = cli("--help");
  CHECK(top.status == 0);
  for (const auto& [sub, flags] : kDocumented) {
    CHECK(top.out.find(sub) != std::string::npos);
    const auto help = cli(sub + " --help");
    CHECK(help.status == 0);
    for (const auto& f : flags) {
      INFO(sub << " " << f);
      CHECK(help.out.find(f) != std::string::npos);
    }
  }
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli("").status == 2);
  CHECK(cli("bogus").status == 2);
  CHECK(cli("datagen --out " + at("x")).status == 2);
  CHECK(cli("extract --f0 a.f0 --out b --offset 1 --all-offsets").status == 2);
  CHECK(cli("train --corpus c --seed 1 --mode sideways --out m").status == 2);
  CHECK(cli("datagen --songs 0 --seed 1 --out " + at("zero")).status == 2);
}

TEST_CASE("missing or malformed inputs exit with 3") {
  CHECK(cli("extract --f0 " + at("absent.f0") + " --out " + at("ms.txt")).status == 3);
  std::ofstream(at("junk.f0")) << "junk\n";
  const auto r = cli("extract --f0 " + at("junk.f0") + " --out " + at("ms.txt"));
  CHECK(r.status == 3);
  CHECK(r.out.find("junk.f0") != std::string::npos);
  CHECK(cli("filter --model " + at("junk.f0") + " --f0 " + at("junk.f0") + " --seed 1 --out " +
            at("t"))
            .status == 3);
}

TEST_CASE("seeded commands are bit reproducible") {
  make_corpus();
  REQUIRE(cli("datagen --songs 2 --takes 2 --notes 6 --seed 3 --out " + at("corpus2")).status == 0);
  for (const auto& e : fs::directory_iterator(work() / "corpus"))
    CHECK(slurp(e.path()) == slurp(work() / "corpus2" / e.path().filename()));

  REQUIRE(cli("train --corpus " + at("corpus") +
              " --epochs 1 --batch 128 --seed 4 --quiet --out " + at("model2.bin"))
              .status == 0);
  CHECK(slurp(at("model.bin")) == slurp(at("model2.bin")));

  const std::string f0 = at("corpus/song_000_generated.f0");
  REQUIRE(cli("filter --model " + at("model.bin") + " --f0 " + f0 +
              " --seed 9 --takes 2 --out " + at("a"))
              .status == 0);
  REQUIRE(cli("filter --model " + at("model.bin") + " --f0 " + f0 +
              " --seed 9 --takes 2 --out " + at("b"))
              .status == 0);
  CHECK(slurp(at("a_00.f0")) == slurp(at("b_00.f0")));
  CHECK(slurp(at("a_01.f0")) == slurp(at("b_01.f0")));
  CHECK(slurp(at("a_00.f0")) != slurp(at("a_01.f0")));

  REQUIRE(cli("ndt --model " + at("model.bin") + " --f0 " + f0 + " --seed 2 --out " +
              at("n1.wav")).status == 0);
  REQUIRE(cli("ndt --model " + at("model.bin") + " --f0 " + f0 + " --seed 2 --out " +
              at("n2.wav")).status == 0);
  CHECK(slurp(at("n1.wav")) == slurp(at("n2.wav")));
}

TEST_CASE("remaining subcommands produce their outputs") {
  make_corpus();
  const std::string f0 = at("corpus/song_000_generated.f0");
  CHECK(cli("extract --f0 " + f0 + " --all-offsets --out " + at("ms.txt")).status == 0);
  CHECK(slurp(at("ms.txt")).rfind("#MS", 0) == 0);

  const auto adt = cli("adt --f0 " + f0 + " --peak 0.5 --out " + at("adt.wav"));
  CHECK(adt.status == 0);
  CHECK(adt.out.find("clip") == std::string::npos);
  const auto loud = cli("adt --f0 " + f0 + " --out " + at("loud.wav"));
  CHECK(loud.status == 0);
  CHECK(loud.out.find("--peak") != std::string::npos);

  CHECK(cli("mix --a " + at("adt.wav") + " --b " + at("adt.wav") + " --gain-db -6 --out " +
            at("mix.wav")).status == 0);
  CHECK(fs::file_size(at("mix.wav")) > fs::file_size(at("adt.wav")));

  fs::create_directories(work() / "takes");
  REQUIRE(cli("filter --model " + at("model.bin") + " --f0 " + f0 + " --seed 5 --takes 3 --out " +
              (work() / "takes" / "t").string()).status == 0);
  CHECK(cli("eval --natural " + at("corpus") + " --takes " + at("takes") + " --model " +
            at("model.bin") + " --report " + at("report.txt")).status == 0);
  CHECK(slurp(at("report.txt")).find("mmd") != std::string::npos);

  CHECK(cli("plot --f0 " + f0 + " " + at("a_00.f0") + " --out " + at("plot.csv")).status == 0);
  const auto csv = slurp(at("plot.csv"));
  CHECK(csv.rfind("frame,time_ms,song_000_generated,a_00\n", 0) == 0);
}

TEST_CASE("train prints one loss line per epoch") {
  make_corpus();
  const auto r = cli("train --corpus " + at("corpus") + " --epochs 2 --batch 128 --seed 4 --out " +
                     at("m3.bin"));
  CHECK(r.status == 0);
  CHECK(r.out.find("epoch 1 loss") != std::string::npos);
  CHECK(r.out.find("epoch 2 loss") != std::string::npos);
}
