#include "lectern/synth.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

namespace lectern::synth {
namespace {

constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "h", "k", "m", "n", "p", "r", "s", "t", "v", "z"};
constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u"};

// Distinct pronounceable word for every index.
std::string word(std::size_t index) {
  constexpr std::size_t kSyllables = std::size(kOnsets) * std::size(kVowels);
  std::string out;
  std::size_t n = index + kSyllables;  // at least two syllables
  while (n > 0) {
    const auto s = n % kSyllables;
    out += kOnsets[s / std::size(kVowels)];
    out += kVowels[s % std::size(kVowels)];
    n /= kSyllables;
  }
  return out;
}

class WordPool {
 public:
  WordPool(std::size_t& counter, std::size_t size, bool zipf) {
    for (std::size_t i = 0; i < size; ++i) {
      words_.push_back(word(counter++));
      weights_.push_back(zipf ? 1.0 / static_cast<double>(i + 1) : 1.0);
    }
    dist_ = std::discrete_distribution<std::size_t>(weights_.begin(), weights_.end());
  }

  const std::string& draw(std::mt19937_64& rng) { return words_[dist_(rng)]; }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::vector<double> weights_;
  std::discrete_distribution<std::size_t> dist_;
};

}  // namespace

TestCollection make_collection(const CollectionConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::size_t counter = 0;
  WordPool function_words(counter, config.function_words, true);

  TestCollection c;
  for (std::size_t l = 0; l < config.lectures; ++l) {
    const auto lecture_id = fmt::format("lec{}", l + 1);
    WordPool lecture_words(counter, config.lecture_words, false);
    const auto segments = (config.units_per_lecture + config.units_per_segment - 1) / config.units_per_segment;
    std::vector<WordPool> keywords;
    for (std::size_t s = 0; s < segments; ++s) keywords.emplace_back(counter, config.keywords_per_segment, true);

    auto draw = [&](double p_function, double p_lecture, std::size_t segment) -> const std::string& {
      const double u = coin(rng);
      if (u < p_function) return function_words.draw(rng);
      if (u < p_function + p_lecture) return lecture_words.draw(rng);
      return keywords[segment].draw(rng);
    };

    auto& units = c.transcripts[lecture_id][std::string(kReferenceVariant)];
    std::int64_t clock = 0;
    std::uniform_int_distribution<std::size_t> length(config.min_unit_tokens, config.max_unit_tokens);
    std::uniform_int_distribution<std::int64_t> duration(150, 450);
    std::uniform_int_distribution<std::int64_t> gap(0, 150);
    std::uniform_int_distribution<std::int64_t> pause(700, 1500);
    for (std::size_t u = 0; u < config.units_per_lecture; ++u) {
      const auto segment = u / config.units_per_segment;
      SpeechUnit unit;
      unit.unit_id = static_cast<std::uint32_t>(u);
      unit.lecture_id = lecture_id;
      const auto n = length(rng);
      for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) clock += gap(rng);
        const auto start = clock;
        clock += duration(rng);
        unit.tokens.push_back({draw(config.unit_function_share, config.unit_lecture_share, segment), start, clock});
      }
      unit.start_ms = unit.tokens.front().start_ms;
      unit.end_ms = unit.tokens.back().end_ms;
      units.push_back(std::move(unit));
      clock += pause(rng);
    }

    auto& paragraphs = c.textbooks[lecture_id];
    for (std::size_t s = 0; s < segments; ++s) {
      std::map<std::string, std::size_t> keyword_counts;
      std::string text;
      for (std::size_t t = 0; t < config.paragraph_tokens; ++t) {
        const auto& w = draw(config.paragraph_function_share, config.paragraph_lecture_share, s);
        if (!text.empty()) text += ' ';
        text += w;
        const auto& kw = keywords[s].words();
        if (std::find(kw.begin(), kw.end(), w) != kw.end()) ++keyword_counts[w];
      }
      const auto query_id = fmt::format("{}-p{:02}", lecture_id, s);
      c.queries[query_id] = text;
      paragraphs.push_back(text);

      std::vector<std::pair<std::string, std::size_t>> ranked(keyword_counts.begin(), keyword_counts.end());
      std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
      std::string short_query;
      for (std::size_t i = 0; i < std::min<std::size_t>(2, ranked.size()); ++i) {
        if (!short_query.empty()) short_query += ' ';
        short_query += ranked[i].first;
      }
      c.short_queries[query_id] = short_query;

      auto& relevant = c.qrels[query_id];
      for (auto u = s * config.units_per_segment;
           u < std::min(config.units_per_lecture, (s + 1) * config.units_per_segment); ++u) {
        relevant.insert({lecture_id, static_cast<std::uint32_t>(u)});
      }
    }
  }
  return c;
}

TopicCorpus make_topic_corpus(const TopicCorpusConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::size_t counter = 0;
  WordPool shared(counter, config.shared_words, true);
  std::vector<WordPool> topics;
  for (int t = 0; t < 2; ++t) topics.emplace_back(counter, config.topic_words, true);

  auto sentence = [&](std::size_t topic) {
    std::string s;
    for (std::size_t i = 0; i < config.sentence_tokens; ++i) {
      if (!s.empty()) s += ' ';
      s += coin(rng) < 0.5 ? shared.draw(rng) : topics[topic].draw(rng);
    }
    return s;
  };
  auto text = [&](std::size_t topic, std::size_t sentences) {
    std::string out;
    for (std::size_t i = 0; i < sentences; ++i) out += sentence(topic) + '\n';
    return out;
  };

  TopicCorpus corpus;
  for (std::size_t d = 0; d < config.docs_per_topic; ++d) {
    for (std::size_t t = 0; t < 2; ++t) {
      corpus.general.push_back({fmt::format("t{}-{:04}", t, d), text(t, config.sentences_per_doc)});
    }
  }
  corpus.textbook = text(0, config.textbook_sentences);
  corpus.heldout = text(0, config.heldout_sentences);
  return corpus;
}

}  // namespace lectern::synth
