// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failures. Usage: acceptance <data-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "lectern/asr_sim.hpp"
#include "lectern/evaluation.hpp"
#include "lectern/index.hpp"
#include "lectern/io.hpp"
#include "lectern/lm.hpp"
#include "lectern/query_format.hpp"
#include "lectern/service.hpp"
#include "oracles.hpp"
#include "table1_fixture.hpp"

using namespace lectern;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_data;
fs::path g_work;

std::string join(const std::vector<std::string>& terms) {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::vector<SpeechUnit> units_from_terms(const std::vector<std::vector<std::string>>& texts, const std::string& lecture) {
  std::string content;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    content += fmt::format("{}\t{}\t{}\t{}\n", i, i * 1000, i * 1000 + 800, join(texts[i]));
  }
  return parse_units(content, lecture);
}

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

const TestCollection& collection() {
  static const TestCollection c = load_collection((g_data / "collection").string());
  return c;
}

InvertedIndex collection_index() {
  std::vector<Passage> passages;
  std::vector<SpeechUnit> units;
  for (const auto& [lecture, variants] : collection().transcripts) {
    const auto& ref = variants.at(std::string(kReferenceVariant));
    auto p = generate_passages(ref, kDefaultMaxWidth, {}, static_cast<std::uint32_t>(passages.size()));
    passages.insert(passages.end(), p.begin(), p.end());
    units.insert(units.end(), ref.begin(), ref.end());
  }
  return build_index(passages, {}, {}, units);
}

std::string random_query(std::mt19937_64& rng, const std::vector<std::string>& terms) {
  std::vector<std::string> q(1 + rng() % 6);
  for (auto& t : q) t = terms[rng() % terms.size()];
  return join(q);
}

// ---------------------------------------------------------------------------

Outcome table1_consistency() {
  std::size_t ok = 0, total = 0;
  double worst = 0.0;
  for (const auto& row : table1::kRows) {
    for (std::size_t c = 0; c < row.f.size(); ++c) {
      const double f = std::round(f_measure(row.recall[c], row.precision[c]) * 1000.0) / 1000.0;
      const double err = std::abs(f - row.f[c]);
      worst = std::max(worst, err);
      ok += err <= table1::kTolerance + 1e-12;
      ++total;
    }
  }
  return {ok == total && total == 45, fmt::format("{}/{} triples, max |dF| {:.4f}", ok, total, worst)};
}

Outcome scoring_oracle() {
  std::mt19937_64 rng(20050601);
  std::size_t corpora = 0, mismatches = 0, ranked_total = 0;
  for (; corpora < 1000; ++corpora) {
    const std::size_t vocab = 2 + rng() % 49;
    std::size_t u = 1 + rng() % 40;
    std::uint32_t n_max = 1 + static_cast<std::uint32_t>(rng() % 5);
    while (passage_count(u, n_max) > 100) --u;
    const auto texts = oracle::random_corpus(rng, u, vocab, 6);
    const auto units = units_from_terms(texts, "L");

    // Windows enumerated here in (start, width) order; id i is window i.
    std::vector<std::vector<std::string>> docs;
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s < u; ++s) {
      for (std::size_t w = 1; w <= n_max && s + w <= u; ++w) {
        std::vector<std::string> d;
        for (std::size_t k = s; k < s + w; ++k) d.insert(d.end(), texts[k].begin(), texts[k].end());
        docs.push_back(std::move(d));
        starts.push_back(s);
      }
    }

    ScoringParams params;
    params.idf_clamp = rng() % 4 == 0;
    auto query_terms = oracle::random_corpus(rng, 1, vocab + 3, 5)[0];  // may include unseen terms
    const auto index = build_index(generate_passages(units, n_max, {}), params);
    const auto expected = oracle::okapi_scores(docs, query_terms, 2.0, 0.8, params.idf_clamp, false);

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (params.idf_clamp ? expected[i] > 0.0 : expected[i] != 0.0) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (expected[a] != expected[b]) return expected[a] > expected[b];
      if (starts[a] != starts[b]) return starts[a] < starts[b];
      return a < b;
    });
    const auto ranked = search(index, make_query(join(query_terms), {}), docs.size() + 1);
    bool same = ranked.size() == order.size();
    for (std::size_t i = 0; same && i < order.size(); ++i) {
      same = ranked[i].passage_id == order[i] && close_rel(ranked[i].score, expected[order[i]], 1e-9);
    }
    mismatches += !same;
    ranked_total += ranked.size();
  }
  return {mismatches == 0, fmt::format("{} corpora, {} ranked passages, {} mismatches", corpora, ranked_total, mismatches)};
}

Outcome window_count() {
  std::mt19937_64 rng(5);
  std::size_t bad = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t u = rng() % 51;
    const auto n_max = static_cast<std::uint32_t>(1 + rng() % 10);
    std::vector<std::vector<std::string>> texts(u, {"x"});
    const auto passages = generate_passages(units_from_terms(texts, "L"), n_max, {});
    std::size_t formula = 0;
    for (std::size_t w = 1; w <= std::min<std::size_t>(n_max, u); ++w) formula += u - w + 1;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& p : passages) seen.insert({p.first_unit, p.end_unit()});
    bad += !(passages.size() == formula && seen.size() == passages.size() && seen == oracle::windows(u, n_max));
  }
  return {bad == 0, fmt::format("500 cases, {} mismatches", bad)};
}

Outcome wer_exhaustive() {
  std::vector<std::vector<std::string>> seqs{{}};
  for (std::size_t len = 1; len <= 6; ++len) {
    const auto start = seqs.size();
    for (std::size_t i = 0; i < start; ++i) {
      if (seqs[i].size() != len - 1) continue;
      for (const char* s : {"a", "b", "c"}) {
        auto next = seqs[i];
        next.push_back(s);
        seqs.push_back(std::move(next));
      }
    }
  }
  std::size_t pairs = 0, bad = 0;
  for (const auto& ref : seqs) {
    for (const auto& hyp : seqs) {
      const auto counts = align(ref, hyp);
      const auto truth = oracle::edit_distance_memo(ref, hyp);
      bool ok = counts.total() == truth;
      if (!ref.empty()) ok = ok && word_error_rate(ref, hyp) == static_cast<double>(truth) / static_cast<double>(ref.size());
      bad += !ok;
      ++pairs;
    }
  }
  return {bad == 0 && seqs.size() == 1093, fmt::format("{} sequences, {} pairs, {} mismatches", seqs.size(), pairs, bad)};
}

class ConstantModel final : public LanguageModel {
 public:
  const Vocabulary& vocabulary() const override { return vocab_; }
  const TokenizerConfig& tokenizer() const override { return tokenizer_; }
  double prob(WordId, WordId, WordId) const override { return 0.01; }

 private:
  Vocabulary vocab_{{"x"}};
  TokenizerConfig tokenizer_;
};

Outcome lm_normalization() {
  const auto corpus = load_corpus((g_data / "corpus" / "general.tsv").string());
  const auto vocab = build_vocab(corpus, 400);
  const auto model = train_trigram(corpus, vocab);
  const auto histories = model.trigram_histories();
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    WordId h2, h1;
    if (i % 2 == 0) {
      std::tie(h2, h1) = histories[rng() % histories.size()];
    } else {
      // Random histories, seen or not; </s> never appears as history.
      do {
        h2 = static_cast<WordId>(rng() % (vocab.max_id() + 1));
        h1 = static_cast<WordId>(rng() % (vocab.max_id() + 1));
      } while (h1 == kSentenceEnd || h2 == kSentenceEnd);
    }
    double sum = model.prob(kSentenceEnd, h2, h1) + model.prob(kUnknown, h2, h1);
    for (WordId w = kFirstTermId; w <= vocab.max_id(); ++w) sum += model.prob(w, h2, h1);
    worst = std::max(worst, std::abs(sum - 1.0));
  }

  const UniformModel uniform(vocab);
  std::vector<std::string> test;
  for (int i = 0; i < 500; ++i) test.push_back(i % 7 == 0 ? "never-seen" : std::string(vocab.terms()[rng() % vocab.size()]));
  const double uniform_pp = perplexity(uniform, test);
  const auto v = static_cast<double>(vocab.event_count());
  const double constant_pp = perplexity(ConstantModel{}, std::vector<std::string>(50, "x"));
  return {worst <= 1e-6 && uniform_pp == v && constant_pp == 100.0,
          fmt::format("1000 contexts, max |sum-1| {:.2e}; uniform PP {} (V={}); p=0.01 PP {}", worst, uniform_pp, v,
                      constant_pp)};
}

Outcome noise_calibration() {
  // 10,000 tokens of reference transcript as one lecture.
  std::vector<std::vector<std::string>> texts;
  std::size_t tokens = 0;
  std::set<std::string> surfaces;
  for (const auto& [lecture, variants] : collection().transcripts) {
    for (const auto& unit : variants.at(std::string(kReferenceVariant))) {
      std::vector<std::string> t;
      for (const auto& tok : unit.tokens) {
        if (tokens == 10'000) break;
        t.push_back(tok.surface);
        surfaces.insert(tok.surface);
        ++tokens;
      }
      if (!t.empty()) texts.push_back(std::move(t));
    }
  }
  const auto units = units_from_terms(texts, "calibration");
  const auto ref = transcript_tokens(units);
  std::vector<std::string> detail;
  bool ok = ref.size() == 10'000;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    NoiseSpec spec{0.2, 0.1, 0.1, seed, {surfaces.begin(), surfaces.end()}};
    const double wer = word_error_rate(ref, transcript_tokens(corrupt_transcript(units, spec)));
    ok = ok && std::abs(wer - 0.4) <= 0.02;
    detail.push_back(format_ratio(wer));
  }
  return {ok, fmt::format("{} tokens, WER per seed {}", ref.size(), fmt::join(detail, " "))};
}

Outcome robustness() {
  const auto& c = collection();
  std::size_t min_units = std::numeric_limits<std::size_t>::max();
  for (const auto& [lecture, variants] : c.transcripts) {
    min_units = std::min(min_units, variants.at(std::string(kReferenceVariant)).size());
  }
  const std::vector<double> targets{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  SweepOptions options;
  options.seeds = 5;
  const auto report = wer_sweep(c, targets, options);
  bool monotone = true;
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    monotone = monotone && report.points[i].f_paragraph <= report.points[i - 1].f_paragraph &&
               report.points[i].f_keyword <= report.points[i - 1].f_keyword;
  }
  const auto& clean = report.points.front();
  const auto it = std::find_if(report.points.begin(), report.points.end(), [](const SweepPoint& p) { return p.target == 0.4; });
  const double ret_para = it->f_paragraph / clean.f_paragraph;
  const double ret_key = it->f_keyword / clean.f_keyword;
  std::vector<std::string> fp, fk;
  for (const auto& p : report.points) {
    fp.push_back(format_ratio(p.f_paragraph));
    fk.push_back(format_ratio(p.f_keyword));
  }
  const bool shape = c.transcripts.size() >= 5 && min_units >= 200 && !c.short_queries.empty();
  return {shape && monotone && ret_para > ret_key,
          fmt::format("{} lectures x >={} units, 5 seeds; F para [{}] key [{}]; at .4 F/F0 para {} > key {}",
                      c.transcripts.size(), min_units, fmt::join(fp, " "), fmt::join(fk, " "), format_ratio(ret_para),
                      format_ratio(ret_key))};
}

std::vector<Document> truncate_to(std::vector<Document> docs, std::size_t budget) {
  std::vector<Document> out;
  std::size_t used = 0;
  for (auto& d : docs) {
    std::string body;
    for (std::size_t pos = 0; pos <= d.body.size() && used < budget;) {
      auto end = d.body.find('\n', pos);
      if (end == std::string::npos) end = d.body.size();
      auto words = tokenize(std::string_view(d.body).substr(pos, end - pos), {});
      if (words.size() > budget - used) words.resize(budget - used);
      used += words.size();
      if (!words.empty()) body += join(words) + "\n";
      pos = end + 1;
    }
    if (!body.empty()) out.push_back({d.doc_id, body});
  }
  return out;
}

std::size_t token_count(const std::vector<Document>& docs) {
  std::size_t n = 0;
  for (const auto& d : docs) n += tokenize(d.body, {}).size();
  return n;
}

Outcome adaptation_direction() {
  const auto general = load_corpus((g_data / "corpus" / "general.tsv").string());
  const auto textbook = io::read_file((g_data / "corpus" / "textbook.txt").string());
  const auto heldout = tokenize(io::read_file((g_data / "corpus" / "heldout.txt").string()), {});
  const std::size_t k = general.size() / 4;

  auto selected = select_corpus(general, textbook, k);
  // The general corpus interleaves topics, so its head is a topic-mixed sample.
  std::vector<Document> mixed(general.begin(), general.begin() + static_cast<std::ptrdiff_t>(k));
  const auto budget = std::min(token_count(selected), token_count(mixed));
  selected = truncate_to(selected, budget);
  mixed = truncate_to(mixed, budget);

  const auto vocab = build_vocab(general, kDefaultVocabularyCap);
  const double pp_selected = perplexity(train_trigram(selected, vocab), heldout);
  const double pp_mixed = perplexity(train_trigram(mixed, vocab), heldout);
  return {pp_selected < pp_mixed && token_count(selected) == token_count(mixed),
          fmt::format("{} docs / {} tokens each; held-out PP selected {} < mixed {}", k, budget,
                      format_perplexity(pp_selected), format_perplexity(pp_mixed))};
}

Outcome groups_disjoint() {
  const auto index = collection_index();
  const auto terms = index.terms();
  std::mt19937_64 rng(77);
  std::size_t overlaps = 0, unstable = 0, groups = 0;
  for (int q = 0; q < 1000; ++q) {
    const auto text = random_query(rng, terms);
    const auto first = query_top_n(index, text, 5);
    const auto second = query_top_n(index, text, 5);
    unstable += !(first == second && format_groups_tsv(first) == format_groups_tsv(second));
    std::set<UnitRef> covered;
    for (const auto& g : first) {
      for (auto u = g.first_unit; u < g.end_unit; ++u) overlaps += !covered.insert({g.lecture_id, u}).second;
    }
    groups += first.size();
  }
  return {overlaps == 0 && unstable == 0 && groups > 0,
          fmt::format("1000 queries, {} groups, {} shared units, {} unstable", groups, overlaps, unstable)};
}

Outcome round_trip() {
  const auto index = collection_index();
  const auto index_path = (g_work / "roundtrip.idx").string();
  save_index(index, index_path);
  const auto loaded = load_index(index_path);
  const auto terms = index.terms();
  std::mt19937_64 rng(91);
  std::size_t index_bad = 0;
  for (int i = 0; i < 100; ++i) {
    const auto text = random_query(rng, terms);
    index_bad += !(query_top_n(loaded, text, 3) == query_top_n(index, text, 3));
  }

  const auto corpus = load_corpus((g_data / "corpus" / "general.tsv").string());
  const auto vocab = build_vocab(corpus, 500);
  const auto model = train_trigram(corpus, vocab);
  const auto model_path = (g_work / "roundtrip.lm").string();
  save_model(model, model_path);
  const auto reloaded = load_model(model_path);
  std::size_t lm_bad = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> test(1 + rng() % 40);
    for (auto& t : test) t = rng() % 10 == 0 ? "unseen" : std::string(vocab.terms()[rng() % vocab.size()]);
    lm_bad += perplexity(reloaded, test) != perplexity(model, test);
  }
  return {index_bad == 0 && lm_bad == 0,
          fmt::format("100 index probes ({} differ), 100 LM probes ({} differ)", index_bad, lm_bad)};
}

Outcome service_parity() {
  const auto index_path = (g_work / "parity.idx").string();
  save_index(collection_index(), index_path);
  ServiceConfig config;
  config.index_path = index_path;
  const auto service = Service::from_config(config);
  httplib::Server server;
  service.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  if (port <= 0) return {false, "could not bind"};
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const auto terms = service.index().terms();
  std::mt19937_64 rng(33);
  std::size_t same = 0, nonempty = 0;
  std::string failure;
  for (int q = 0; q < 50; ++q) {
    const auto text = random_query(rng, terms);
    const auto cli = testing_support::run_cli("query --index " + testing_support::shell_quote(index_path) +
                                              " --top 3 --text " + testing_support::shell_quote(text));
    const nlohmann::json body{{"text", text}, {"top_n", 3}, {"format", "tsv"}};
    const auto http = client.Post("/query", body.dump(), "application/json");
    const bool match = cli.exit_code == 0 && http && http->status == 200 && http->body == cli.out;
    same += match;
    nonempty += !cli.out.empty();
    if (!match && failure.empty()) failure = "; first mismatch: " + text;
  }
  server.stop();
  worker.join();
  return {same == 50 && nonempty > 0, fmt::format("{}/50 byte-identical ({} non-empty){}", same, nonempty, failure)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <data-dir>\n", argv[0]);
    return 2;
  }
  g_data = argv[1];
  g_work = fs::temp_directory_path() / fmt::format("lectern_acceptance_{}", ::getpid());
  fs::create_directories(g_work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Table 1 F-consistency fixture", table1_consistency},
      {"Passage scoring oracle equivalence", scoring_oracle},
      {"Passage-window count", window_count},
      {"WER oracle (exhaustive, alphabet 3, length <= 6)", wer_exhaustive},
      {"LM normalization and trivial perplexities", lm_normalization},
      {"Noise calibration", noise_calibration},
      {"Robustness experiment", robustness},
      {"Adaptation direction", adaptation_direction},
      {"Group disjointness and determinism", groups_disjoint},
      {"Index and LM round-trip", round_trip},
      {"Service parity (CLI vs POST /query)", service_parity},
  };

  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    failures += !outcome.pass;
    std::printf("%s  %s: %s [%.2f s]\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str(),
                elapsed.count());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
  fs::remove_all(g_work);
  return failures;
}
