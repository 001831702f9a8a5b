#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lectern/evaluation.hpp"
#include "lectern/lm.hpp"

namespace lectern::synth {

/// Lectures are sequences of subtopic segments. Each segment draws its
/// tokens from function words, lecture-wide words and a small set of
/// segment keywords; its textbook paragraph draws from the same mix, and all
/// units of the segment are relevant to that paragraph.
struct CollectionConfig {
  std::size_t lectures = 5;
  std::size_t units_per_lecture = 220;
  std::size_t units_per_segment = 5;
  std::size_t keywords_per_segment = 30;
  std::size_t lecture_words = 200;
  std::size_t function_words = 40;
  std::size_t min_unit_tokens = 8;
  std::size_t max_unit_tokens = 14;
  std::size_t paragraph_tokens = 50;
  /// Token mix inside units: function, lecture-wide, remainder keywords.
  double unit_function_share = 0.40;
  double unit_lecture_share = 0.45;
  double paragraph_function_share = 0.30;
  double paragraph_lecture_share = 0.25;
  std::uint64_t seed = 20050601;
};

/// Reference transcripts only (variant "reference"); queries_short holds the
/// two most frequent segment keywords of each paragraph.
TestCollection make_collection(const CollectionConfig& config = {});

struct TopicCorpusConfig {
  std::size_t docs_per_topic = 200;
  std::size_t sentences_per_doc = 4;
  std::size_t sentence_tokens = 10;
  std::size_t topic_words = 150;
  std::size_t shared_words = 60;
  std::size_t textbook_sentences = 40;
  std::size_t heldout_sentences = 60;
  std::uint64_t seed = 7;
};

/// Two topics over a shared function vocabulary. `textbook` and `heldout`
/// are drawn from topic 0; `general` interleaves documents of both topics.
struct TopicCorpus {
  std::vector<Document> general;
  std::string textbook;
  std::string heldout;
};

TopicCorpus make_topic_corpus(const TopicCorpusConfig& config = {});

}  // namespace lectern::synth
