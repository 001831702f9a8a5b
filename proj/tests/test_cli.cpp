#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "lectern/index.hpp"
#include "lectern/io.hpp"
#include "lectern/query_format.hpp"

using testing_support::run_cli;
using testing_support::shell_quote;
namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "lectern_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string path(const std::string& name) { return shell_quote((dir_ / name).string()); }
  static void write(const std::string& name, const std::string& content) {
    std::ofstream(dir_ / name, std::ios::binary) << content;
  }

  static inline fs::path dir_;
};

TEST_F(Cli, SegmentIndexQuery) {
  write("talk.tsv",
        "the\t0\t200\ncat\t250\t500\nsat\t550\t800\n"
        "dogs\t2000\t2300\nbark\t2350\t2600\n"
        "cat\t4000\t4300\nnaps\t4350\t4600\n");
  auto seg = run_cli("segment --input " + path("talk.tsv") + " --lecture talk --out " + path("talk.units"));
  ASSERT_EQ(seg.exit_code, 0);
  auto units = lectern::io::read_file((dir_ / "talk.units").string());
  EXPECT_EQ(units, "0\t0\t800\tthe cat sat\n1\t2000\t2600\tdogs bark\n2\t4000\t4600\tcat naps\n");

  ASSERT_EQ(run_cli("index --units talk=" + path("talk.units") + " --nmax 2 --out " + path("talk.idx")).exit_code, 0);
  auto tsv = run_cli("query --index " + path("talk.idx") + " --text 'cat' --top 2");
  ASSERT_EQ(tsv.exit_code, 0);
  auto index = lectern::load_index((dir_ / "talk.idx").string());
  EXPECT_EQ(tsv.out, lectern::format_groups_tsv(lectern::query_top_n(index, "cat", 2)));

  auto json = run_cli("query --index " + path("talk.idx") + " --text 'dogs' --json --media http://m");
  ASSERT_EQ(json.exit_code, 0);
  auto j = nlohmann::json::parse(json.out);
  EXPECT_EQ(j["groups"][0]["lecture_id"], "talk");
  // [0,2), [1,2) and [1,3) all contain "dogs" and merge into one group from unit 0.
  EXPECT_EQ(j["groups"][0]["unit_ids"], nlohmann::json::parse("[0,1,2]"));
  EXPECT_EQ(j["groups"][0]["media"], "http://m/talk?t=0");
}

TEST_F(Cli, ErrorsExitNonZero) {
  EXPECT_NE(run_cli("query --index " + path("missing.idx") + " --text x 2>/dev/null").exit_code, 0);
  EXPECT_NE(run_cli("bogus-command 2>/dev/null").exit_code, 0);
  write("bad.tsv", "a\t10\t5\n");
  EXPECT_EQ(run_cli("segment --input " + path("bad.tsv") + " 2>/dev/null").exit_code, 1);
}

TEST_F(Cli, WerAndAsrSim) {
  write("ref.units", "0\t0\t100\ta b c d\n");
  write("hyp.units", "0\t0\t100\ta x c\n");
  auto wer = run_cli("wer --ref " + path("ref.units") + " --hyp " + path("hyp.units"));
  ASSERT_EQ(wer.exit_code, 0);
  EXPECT_NE(wer.out.find(".500"), std::string::npos) << wer.out;

  auto sim = run_cli("asr-sim --units " + path("ref.units") + " --sub 1 --seed 3 --confusion " + path("conf.txt") +
                     " 2>/dev/null");
  EXPECT_NE(sim.exit_code, 0);  // missing confusion file
  write("conf.txt", "p\nq\nr\n");
  sim = run_cli("asr-sim --units " + path("ref.units") + " --sub 1 --seed 3 --confusion " + path("conf.txt"));
  ASSERT_EQ(sim.exit_code, 0);
  EXPECT_EQ(sim.out.substr(0, 8), "0\t0\t100\t");
  EXPECT_EQ(sim.out.find_first_of("abcd", 8), std::string::npos) << sim.out;
}

TEST_F(Cli, LanguageModelRoundTrip) {
  ASSERT_EQ(run_cli("synth --out " + path("col") + " --corpus-out " + path("corpus") + " --lectures 2 --units 30").exit_code, 0);
  ASSERT_EQ(run_cli("lm-build --corpus " + path("corpus/general.tsv") + " --textbook " + path("corpus/textbook.txt") +
                    " --select 100 --vocab 300 --out " + path("lm.bin"))
                .exit_code,
            0);
  auto eval = run_cli("lm-eval --model " + path("lm.bin") + " --test " + path("corpus/heldout.txt") + " 2>/dev/null");
  ASSERT_EQ(eval.exit_code, 0);
  EXPECT_EQ(eval.out.rfind("OOV=", 0), 0u) << eval.out;
  EXPECT_NE(eval.out.find(" PP="), std::string::npos);

  write("conditions.tsv", "text\treference\nasr\treference\t" + (dir_ / "lm.bin").string() + "\n");
  auto report = run_cli("eval --collection " + path("col") + " --conditions " + path("conditions.tsv") + " --top 1,2");
  ASSERT_EQ(report.exit_code, 0);
  EXPECT_NE(report.out.find("N=2"), std::string::npos);
  EXPECT_NE(report.out.find("lec2"), std::string::npos);
}

TEST_F(Cli, BundledDataMatchesGenerator) {
  ASSERT_EQ(run_cli("synth --out " + path("regen") + " --corpus-out " + path("regen_corpus")).exit_code, 0);
  const fs::path data = LECTERN_DATA_DIR;
  auto compare_tree = [](const fs::path& expected, const fs::path& actual) {
    std::size_t files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(expected)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), expected);
      ASSERT_TRUE(fs::exists(actual / rel)) << rel;
      EXPECT_EQ(lectern::io::read_file(entry.path().string()), lectern::io::read_file((actual / rel).string())) << rel;
      ++files;
    }
    EXPECT_GT(files, 0u);
  };
  compare_tree(data / "collection", dir_ / "regen");
  compare_tree(data / "corpus", dir_ / "regen_corpus");
}
