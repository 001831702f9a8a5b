// Command-line front end: offline pipeline (segment, index, lm-build),
// queries, evaluation, noise simulation and the HTTP service.

#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lectern/asr_sim.hpp"
#include "lectern/error.hpp"
#include "lectern/evaluation.hpp"
#include "lectern/index.hpp"
#include "lectern/io.hpp"
#include "lectern/lm.hpp"
#include "lectern/query_format.hpp"
#include "lectern/segmentation.hpp"
#include "lectern/service.hpp"
#include "lectern/synth.hpp"

namespace fs = std::filesystem;
using namespace lectern;

namespace {

struct TokenizerFlags {
  std::string mode = "whitespace";
  bool keep_case = false;
  std::string stopwords;

  void add(CLI::App* app) {
    app->add_option("--tokenizer", mode, "whitespace | pre-tokenized")->capture_default_str();
    app->add_flag("--keep-case", keep_case, "do not lowercase terms");
    app->add_option("--stopwords", stopwords, "stopword list, one per line");
  }

  TokenizerConfig config() const {
    TokenizerConfig c;
    c.mode = parse_tokenizer_mode(mode);
    c.lowercase = !keep_case;
    if (!stopwords.empty()) c.stopwords = load_stopwords(stopwords);
    return c;
  }
};

struct ScoringFlags {
  double k = 2.0;
  double b = 0.8;
  bool idf_clamp = false;
  std::string variant = "paper";

  void add(CLI::App* app) {
    app->add_option("--k", k, "term-frequency saturation K")->capture_default_str();
    app->add_option("--b", b, "length normalization b")->capture_default_str();
    app->add_flag("--idf-clamp", idf_clamp, "drop terms with negative idf");
    app->add_option("--variant", variant, "paper | standard")->capture_default_str();
  }

  ScoringParams params() const { return {k, b, idf_clamp, parse_formula_variant(variant)}; }
};

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
  return out;
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

// "lecture=path" or "path" (lecture id from the file stem).
std::pair<std::string, std::string> split_named(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq != std::string::npos) return {arg.substr(0, eq), arg.substr(eq + 1)};
  return {fs::path(arg).stem().string(), arg};
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
  } else {
    io::write_file(out_path, content);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lecture passage retrieval: segmentation, indexing, search, LM adaptation and evaluation"};
  app.require_subcommand(1);

  // segment
  std::string seg_input, seg_format = "timed", seg_out, seg_lecture;
  std::int64_t pause_ms = kDefaultPauseMs;
  auto* segment = app.add_subcommand("segment", "split a transcript into speech units");
  segment->add_option("--input", seg_input)->required();
  segment->add_option("--format", seg_format, "timed | units")->capture_default_str();
  segment->add_option("--pause-ms", pause_ms)->capture_default_str();
  segment->add_option("--lecture", seg_lecture, "lecture id (default: input file stem)");
  segment->add_option("--out", seg_out, "units file (default stdout)");

  // index
  std::vector<std::string> idx_units;
  std::uint32_t n_max = kDefaultMaxWidth;
  std::string idx_out;
  TokenizerFlags idx_tok;
  ScoringFlags idx_scoring;
  auto* index_cmd = app.add_subcommand("index", "build a passage index from unit files");
  index_cmd->add_option("--units", idx_units, "units file, optionally lecture=path; repeatable")->required();
  index_cmd->add_option("--nmax", n_max, "maximum units per passage")->capture_default_str();
  index_cmd->add_option("--out", idx_out)->required();
  idx_tok.add(index_cmd);
  idx_scoring.add(index_cmd);

  // query
  std::string q_index, q_text, q_media;
  std::size_t q_top = 3, q_pool = kDefaultPoolSize;
  bool q_json = false;
  std::vector<std::string> q_lectures;
  auto* query = app.add_subcommand("query", "rank passage groups for a query");
  query->add_option("--index", q_index)->required();
  query->add_option("--text", q_text)->required();
  query->add_option("--top", q_top)->capture_default_str();
  query->add_option("--pool", q_pool)->capture_default_str();
  query->add_option("--lecture", q_lectures, "restrict to lecture; repeatable");
  query->add_option("--media", q_media, "media base for playback links (JSON output)");
  query->add_flag("--json", q_json);

  // lm-build
  std::string lm_corpus, lm_textbook, lm_out, lm_selected_out;
  std::size_t lm_select = kDefaultSelectionSize, lm_vocab = kDefaultVocabularyCap;
  TokenizerFlags lm_tok;
  auto* lm_build = app.add_subcommand("lm-build", "select a topic subcorpus and train a trigram model");
  lm_build->add_option("--corpus", lm_corpus, "directory of documents or doc_id<TAB>body file")->required();
  lm_build->add_option("--textbook", lm_textbook, "topic text used as the selection query");
  lm_build->add_option("--select", lm_select, "documents to keep (0 = no selection)")->capture_default_str();
  lm_build->add_option("--vocab", lm_vocab)->capture_default_str();
  lm_build->add_option("--out", lm_out)->required();
  lm_build->add_option("--selected-out", lm_selected_out, "write selected doc ids");
  lm_tok.add(lm_build);

  // lm-eval
  std::string ev_model, ev_test, ev_format = "text";
  auto* lm_eval = app.add_subcommand("lm-eval", "OOV rate and perplexity of a transcript");
  lm_eval->add_option("--model", ev_model)->required();
  lm_eval->add_option("--test", ev_test)->required();
  lm_eval->add_option("--format", ev_format, "text | units | timed")->capture_default_str();

  // eval
  std::string col_dir, col_conditions;
  std::string col_top = "1,2,3";
  bool col_json = false;
  std::size_t col_pool = kDefaultPoolSize;
  std::uint32_t col_nmax = kDefaultMaxWidth;
  ScoringFlags col_scoring;
  auto* eval = app.add_subcommand("eval", "benchmark report over a test collection");
  eval->add_option("--collection", col_dir)->required();
  eval->add_option("--conditions", col_conditions, "name<TAB>variant[<TAB>model] lines")->required();
  eval->add_option("--top", col_top)->capture_default_str();
  eval->add_option("--pool", col_pool)->capture_default_str();
  eval->add_option("--nmax", col_nmax)->capture_default_str();
  eval->add_flag("--json", col_json);
  col_scoring.add(eval);

  // asr-sim
  std::string sim_units, sim_confusion, sim_out;
  double sim_sub = 0, sim_del = 0, sim_ins = 0;
  std::uint64_t sim_seed = 42;
  auto* asr = app.add_subcommand("asr-sim", "inject word errors into a units file");
  asr->add_option("--units", sim_units, "units file, optionally lecture=path")->required();
  asr->add_option("--sub", sim_sub)->capture_default_str();
  asr->add_option("--del", sim_del)->capture_default_str();
  asr->add_option("--ins", sim_ins)->capture_default_str();
  asr->add_option("--seed", sim_seed)->capture_default_str();
  asr->add_option("--confusion", sim_confusion, "confusion vocabulary (default: the transcript's own tokens)");
  asr->add_option("--out", sim_out);

  // wer-sweep
  std::string sw_dir, sw_targets = "0,.2,.4,.6", sw_out;
  std::size_t sw_seeds = 5, sw_top = 1;
  std::uint64_t sw_seed = 1;
  auto* sweep = app.add_subcommand("wer-sweep", "retrieval F against simulated WER");
  sweep->add_option("--collection", sw_dir)->required();
  sweep->add_option("--targets", sw_targets)->capture_default_str();
  sweep->add_option("--seeds", sw_seeds)->capture_default_str();
  sweep->add_option("--seed", sw_seed, "first seed")->capture_default_str();
  sweep->add_option("--top", sw_top)->capture_default_str();
  sweep->add_option("--out", sw_out, "JSON report path");

  // wer
  std::string wer_ref, wer_hyp;
  auto* wer = app.add_subcommand("wer", "word error rate of two units files");
  wer->add_option("--ref", wer_ref)->required();
  wer->add_option("--hyp", wer_hyp)->required();

  // serve
  ServiceConfig svc;
  auto* serve = app.add_subcommand("serve", "HTTP API over a built index");
  serve->add_option("--index", svc.index_path);
  serve->add_option("--host", svc.host)->capture_default_str();
  serve->add_option("--port", svc.port)->capture_default_str();
  serve->add_option("--textbooks", svc.textbooks_dir, "directory of <lecture>.txt");
  serve->add_option("--media", svc.media_base);
  serve->add_option("--static", svc.static_dir, "directory served at /");
  serve->add_option("--top", svc.top_n)->capture_default_str();
  serve->add_option("--pool", svc.pool_size)->capture_default_str();

  // synth
  std::string syn_out, syn_corpus_out;
  synth::CollectionConfig syn;
  auto* syn_cmd = app.add_subcommand("synth", "write the synthetic lecture collection and topic corpus");
  syn_cmd->add_option("--out", syn_out, "collection directory")->required();
  syn_cmd->add_option("--corpus-out", syn_corpus_out, "directory for the two-topic LM corpus");
  syn_cmd->add_option("--lectures", syn.lectures)->capture_default_str();
  syn_cmd->add_option("--units", syn.units_per_lecture)->capture_default_str();
  syn_cmd->add_option("--seed", syn.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*segment) {
      const auto lecture = seg_lecture.empty() ? fs::path(seg_input).stem().string() : seg_lecture;
      const auto content = io::read_file(seg_input);
      const auto parsed = parse_transcript(content, parse_transcript_format(seg_format), lecture);
      std::vector<SpeechUnit> units;
      if (const auto* tokens = std::get_if<std::vector<TimedToken>>(&parsed)) {
        units = segment_units(*tokens, pause_ms, lecture);
      } else {
        units = std::get<std::vector<SpeechUnit>>(parsed);
      }
      emit(seg_out, format_units(units));
      std::cerr << units.size() << " units\n";
    } else if (*index_cmd) {
      const auto tokenizer = idx_tok.config();
      std::vector<Passage> passages;
      std::vector<SpeechUnit> all_units;
      for (const auto& arg : idx_units) {
        auto [lecture, path] = split_named(arg);
        auto units = parse_units(io::read_file(path), lecture);
        auto p = generate_passages(units, n_max, tokenizer, static_cast<std::uint32_t>(passages.size()));
        passages.insert(passages.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
        all_units.insert(all_units.end(), units.begin(), units.end());
      }
      const auto index = build_index(passages, idx_scoring.params(), tokenizer, all_units);
      save_index(index, idx_out);
      std::cerr << fmt::format("{} passages, {} terms, avgdl {:.3f}\n", index.corpus_size(),
                               index.vocabulary_size(), index.avgdl());
    } else if (*query) {
      const auto index = load_index(q_index);
      LectureFilter filter(q_lectures.begin(), q_lectures.end());
      const auto groups = query_top_n(index, q_text, q_top, q_pool, filter);
      if (q_json) {
        std::cout << groups_to_json(index, groups, q_media).dump() << '\n';
      } else {
        std::cout << format_groups_tsv(groups);
      }
    } else if (*lm_build) {
      const auto tokenizer = lm_tok.config();
      auto corpus = load_corpus(lm_corpus);
      if (lm_select > 0) {
        if (lm_textbook.empty()) throw ValidationError("--textbook is required when --select > 0");
        corpus = select_corpus(corpus, io::read_file(lm_textbook), lm_select, {}, tokenizer);
      }
      if (!lm_selected_out.empty()) {
        std::string ids;
        for (const auto& d : corpus) ids += d.doc_id + '\n';
        io::write_file(lm_selected_out, ids);
      }
      const auto vocab = build_vocab(corpus, lm_vocab, tokenizer);
      const auto model = train_trigram(corpus, vocab, tokenizer);
      save_model(model, lm_out);
      std::cerr << fmt::format("{} documents, vocabulary {}, {} trigram histories\n", corpus.size(), vocab.size(),
                               model.trigram_context_count());
    } else if (*lm_eval) {
      const auto model = load_model(ev_model);
      const auto content = io::read_file(ev_test);
      std::string text;
      if (ev_format == "text") {
        text = content;
      } else {
        const auto parsed = parse_transcript(content, parse_transcript_format(ev_format), "test");
        if (const auto* tokens = std::get_if<std::vector<TimedToken>>(&parsed)) {
          for (const auto& t : *tokens) text += t.surface + ' ';
        } else {
          for (const auto& u : std::get<std::vector<SpeechUnit>>(parsed)) text += u.text() + '\n';
        }
      }
      const auto tokens = tokenize(text, model.tokenizer());
      const auto pp = evaluate_perplexity(model, tokens);
      std::cout << "OOV=" << format_ratio(oov_rate(model.vocabulary(), tokens))
                << " PP=" << format_perplexity(pp.perplexity) << '\n';
      std::cerr << fmt::format("{} tokens scored, {} as {} (p_unigram={:.6g}, included in PP)\n", pp.scored,
                               pp.unknown, kUnknownSymbol, model.unigram_prob(kUnknown));
    } else if (*eval) {
      const auto collection = load_collection(col_dir);
      const auto conditions =
          parse_conditions(io::read_file(col_conditions), fs::path(col_conditions).parent_path().string());
      PipelineConfig config;
      config.n_max = col_nmax;
      config.pool_size = col_pool;
      config.params = col_scoring.params();
      const auto top = parse_list(col_top);
      const auto report = run_benchmark(collection, conditions, top, config);
      std::cout << (col_json ? report.to_json().dump(2) + "\n" : report.format_table());
    } else if (*asr) {
      auto [lecture, path] = split_named(sim_units);
      const auto units = parse_units(io::read_file(path), lecture);
      NoiseSpec spec{sim_sub, sim_del, sim_ins, sim_seed, {}};
      if (!sim_confusion.empty()) {
        spec.confusion_vocab = split_whitespace(io::read_file(sim_confusion));
      } else {
        spec.confusion_vocab = transcript_tokens(units);
      }
      const auto noisy = corrupt_transcript(units, spec);
      emit(sim_out, format_units(noisy));
      const auto ref = transcript_tokens(units);
      if (!ref.empty()) {
        std::cerr << "WER=" << format_ratio(word_error_rate(ref, transcript_tokens(noisy))) << '\n';
      }
    } else if (*sweep) {
      const auto collection = load_collection(sw_dir);
      SweepOptions options;
      options.seeds = sw_seeds;
      options.base_seed = sw_seed;
      options.top_n = sw_top;
      const auto report = wer_sweep(collection, parse_reals(sw_targets), options);
      std::cout << report.format_table();
      if (!sw_out.empty()) io::write_file(sw_out, report.to_json().dump(2) + "\n");
    } else if (*wer) {
      const auto ref = transcript_tokens(parse_units(io::read_file(wer_ref), "ref"));
      const auto hyp = transcript_tokens(parse_units(io::read_file(wer_hyp), "hyp"));
      const auto counts = align(ref, hyp);
      std::cout << fmt::format("WER={} S={} D={} I={} N={}\n", format_ratio(word_error_rate(ref, hyp)),
                               counts.substitutions, counts.deletions, counts.insertions, ref.size());
    } else if (*serve) {
      svc.apply_environment();
      run_service(svc);
    } else if (*syn_cmd) {
      const auto collection = synth::make_collection(syn);
      save_collection(collection, syn_out);
      if (!syn_corpus_out.empty()) {
        const auto corpus = synth::make_topic_corpus();
        fs::create_directories(syn_corpus_out);
        std::string lines;
        for (const auto& d : corpus.general) {
          std::string body = d.body;
          std::string escaped;
          for (char ch : body) escaped += ch == '\n' ? std::string("\\n") : std::string(1, ch);
          lines += d.doc_id + '\t' + escaped + '\n';
        }
        io::write_file((fs::path(syn_corpus_out) / "general.tsv").string(), lines);
        io::write_file((fs::path(syn_corpus_out) / "textbook.txt").string(), corpus.textbook);
        io::write_file((fs::path(syn_corpus_out) / "heldout.txt").string(), corpus.heldout);
      }
    }
  } catch (const Error& e) {
    std::cerr << "lectern: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "lectern: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
