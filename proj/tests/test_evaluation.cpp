#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "lectern/asr_sim.hpp"
#include "lectern/error.hpp"
#include "lectern/evaluation.hpp"
#include "lectern/synth.hpp"
#include "oracles.hpp"
#include "table1_fixture.hpp"

using namespace lectern;

namespace {

std::vector<std::string> words(const std::string& text) { return tokenize(text, {}); }

PassageGroup group(const std::string& lecture, std::uint32_t first, std::uint32_t end) {
  PassageGroup g;
  g.lecture_id = lecture;
  g.first_unit = first;
  g.end_unit = end;
  return g;
}

UnitSet units(const std::string& lecture, std::initializer_list<std::uint32_t> ids) {
  UnitSet out;
  for (auto id : ids) out.insert({lecture, id});
  return out;
}

synth::CollectionConfig small_collection() {
  synth::CollectionConfig c;
  c.lectures = 2;
  c.units_per_lecture = 40;
  return c;
}

}  // namespace

TEST(Wer, Examples) {
  EXPECT_EQ(word_error_rate(words("a b c"), words("a b c")), 0.0);
  EXPECT_DOUBLE_EQ(word_error_rate(words("a b c"), words("a x c")), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(word_error_rate(words("a b"), words("a x y b")), 1.0);
  EXPECT_EQ(word_error_rate(words("a b"), {}), 1.0);
  EXPECT_THROW(word_error_rate({}, words("a")), ValidationError);
  auto counts = align(words("a b c d"), words("a c d e"));
  EXPECT_EQ(counts.total(), 2u);
  EXPECT_EQ(counts.deletions, 1u);
  EXPECT_EQ(counts.insertions, 1u);
}

TEST(Wer, CanExceedOne) {
  EXPECT_DOUBLE_EQ(word_error_rate(words("a"), words("x y z")), 3.0);
}

TEST(Wer, MatchesExhaustiveAlignmentSmallAlphabet) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> alphabet{"a", "b", "c"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> ref(1 + rng() % 6), hyp(rng() % 7);
    for (auto& w : ref) w = alphabet[rng() % 3];
    for (auto& w : hyp) w = alphabet[rng() % 3];
    const auto counts = align(ref, hyp);
    EXPECT_EQ(counts.total(), oracle::edit_distance(ref, hyp));
    EXPECT_EQ(ref.size() - counts.deletions + counts.insertions, hyp.size());
  }
}

TEST(Rpf, FMeasure) {
  EXPECT_EQ(f_measure(0, 0), 0.0);
  EXPECT_NEAR(f_measure(.695, .534), 0.6039544344995932, 1e-15);
  EXPECT_DOUBLE_EQ(f_measure(1, 1), 1.0);
}

TEST(Rpf, PublishedCellsReproduce) {
  for (const auto& row : table1::kRows) {
    for (std::size_t c = 0; c < 15; ++c) {
      EXPECT_NEAR(f_measure(row.recall[c], row.precision[c]), row.f[c], table1::kTolerance)
          << "R=" << row.recall[c] << " P=" << row.precision[c];
    }
  }
}

TEST(Rpf, Formatting) {
  EXPECT_EQ(format_ratio(0.6954), ".695");
  EXPECT_EQ(format_ratio(1.0), "1.000");
  EXPECT_EQ(format_ratio(0.0), ".000");
  EXPECT_EQ(format_perplexity(48.93), "48.9");
  EXPECT_EQ(format_perplexity(9.414), "9.41");
  EXPECT_EQ(format_perplexity(121.6), "122");
  EXPECT_EQ(format_perplexity(1234.4), "1234");
}

TEST(Rpf, OverlappingGroupsCountUnitsOnce) {
  std::vector<PassageGroup> retrieved{group("L", 0, 3), group("L", 2, 5)};
  auto r = recall_precision_f(retrieved, units("L", {1, 2, 9}));
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(r.f, f_measure(2.0 / 3.0, 2.0 / 5.0));
}

TEST(Rpf, LectureMatters) {
  std::vector<PassageGroup> retrieved{group("A", 0, 2)};
  auto r = recall_precision_f(retrieved, units("B", {0, 1}));
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.f, 0.0);
  EXPECT_EQ(recall_precision_f({}, units("B", {0})).precision, 0.0);
  EXPECT_THROW(recall_precision_f(retrieved, {}), ValidationError);
}

TEST(Rpf, RecallNonDecreasingInTopN) {
  auto collection = synth::make_collection(small_collection());
  const auto& lecture = collection.transcripts.begin()->first;
  const auto& ref = collection.transcripts.begin()->second.at(std::string(kReferenceVariant));
  const std::vector<std::size_t> top_ns{1, 2, 3, 4, 5};
  auto scores = evaluate_lecture(collection, lecture, ref, top_ns, {});
  ASSERT_EQ(scores.size(), 5u);
  for (std::size_t i = 1; i < scores.size(); ++i) EXPECT_GE(scores[i].recall, scores[i - 1].recall);
  EXPECT_GT(scores[0].queries, 0u);
}

TEST(Collection, SaveLoadRoundTrip) {
  auto collection = synth::make_collection(small_collection());
  const auto dir = (std::filesystem::temp_directory_path() / "lectern_collection_test").string();
  std::filesystem::remove_all(dir);
  save_collection(collection, dir);
  auto loaded = load_collection(dir);
  // Per-token times are not stored; units compare by id, span and text.
  ASSERT_EQ(loaded.transcripts.size(), collection.transcripts.size());
  for (const auto& [lecture, variants] : collection.transcripts) {
    for (const auto& [variant, u] : variants) {
      EXPECT_EQ(format_units(loaded.transcripts.at(lecture).at(variant)), format_units(u));
    }
  }
  EXPECT_EQ(loaded.textbooks, collection.textbooks);
  EXPECT_EQ(loaded.queries, collection.queries);
  EXPECT_EQ(loaded.short_queries, collection.short_queries);
  EXPECT_EQ(loaded.qrels, collection.qrels);
  std::filesystem::remove_all(dir);
}

TEST(Collection, QrelsParsing) {
  auto qrels = parse_qrels("q1\tL\t3\nq1\tL\t4\nq2\tM\t0\n");
  ASSERT_EQ(qrels.size(), 2u);
  EXPECT_EQ(qrels["q1"], units("L", {3, 4}));
  EXPECT_THROW(parse_qrels("q1\tL\n"), ParseError);
  EXPECT_THROW(parse_qrels("q1\tL\tx\n"), ParseError);
}

TEST(Benchmark, ReportsEveryConditionAndCell) {
  auto collection = synth::make_collection(small_collection());
  for (auto& [lecture, variants] : collection.transcripts) {
    const auto ref = variants.at(std::string(kReferenceVariant));
    std::vector<std::string> vocab = transcript_tokens(ref);
    variants["noisy"] = corrupt_transcript(ref, noise_for_target(0.3, 5, vocab));
  }
  auto corpus = synth::make_topic_corpus({.docs_per_topic = 20});
  auto vocab = build_vocab(corpus.general, 300);
  auto lm = std::make_shared<TrigramModel>(train_trigram(corpus.general, vocab));

  std::vector<Condition> conditions{{"text", "reference", nullptr}, {"asr", "noisy", lm}};
  const std::vector<std::size_t> top_ns{1, 2, 3};
  auto report = run_benchmark(collection, conditions, top_ns);
  ASSERT_EQ(report.lectures.size(), 2u);
  for (const auto& l : report.lectures) {
    ASSERT_EQ(l.conditions.size(), 2u);
    EXPECT_FALSE(l.conditions[0].perplexity.has_value());
    EXPECT_EQ(*l.conditions[0].wer, 0.0);
    ASSERT_TRUE(l.conditions[1].wer.has_value());
    EXPECT_NEAR(*l.conditions[1].wer, 0.3, 0.08);
    EXPECT_TRUE(l.conditions[1].perplexity.has_value());
    EXPECT_TRUE(l.conditions[1].oov.has_value());
    EXPECT_EQ(l.conditions[1].retrieval.size(), 3u);
  }
  const auto table = report.format_table();
  for (const char* label : {"OOV", "PP", "WER", "N=1", "N=3"}) EXPECT_NE(table.find(label), std::string::npos);
  auto json = report.to_json();
  EXPECT_EQ(json["lectures"].size(), 2u);
  EXPECT_EQ(run_benchmark(collection, conditions, top_ns).format_table(), table);

  std::vector<Condition> missing{{"x", "no-such-variant", nullptr}};
  try {
    run_benchmark(collection, missing, top_ns);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("no-such-variant"), std::string::npos);
  }
}
