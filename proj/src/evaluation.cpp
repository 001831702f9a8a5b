#include "lectern/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <fmt/format.h>

#include "lectern/error.hpp"
#include "lectern/io.hpp"

namespace lectern {

namespace fs = std::filesystem;

EditCounts align(std::span<const std::string> reference, std::span<const std::string> hypothesis) {
  struct Cell {
    std::size_t cost = 0;
    EditCounts counts;
  };
  const auto m = hypothesis.size();
  std::vector<Cell> prev(m + 1);
  std::vector<Cell> curr(m + 1);
  for (std::size_t j = 1; j <= m; ++j) {
    prev[j] = prev[j - 1];
    ++prev[j].cost;
    ++prev[j].counts.insertions;
  }
  for (std::size_t i = 1; i <= reference.size(); ++i) {
    curr[0] = prev[0];
    ++curr[0].cost;
    ++curr[0].counts.deletions;
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = reference[i - 1] == hypothesis[j - 1];
      Cell best = prev[j - 1];
      if (!same) {
        ++best.cost;
        ++best.counts.substitutions;
      }
      if (prev[j].cost + 1 < best.cost) {
        best = prev[j];
        ++best.cost;
        ++best.counts.deletions;
      }
      if (curr[j - 1].cost + 1 < best.cost) {
        best = curr[j - 1];
        ++best.cost;
        ++best.counts.insertions;
      }
      curr[j] = best;
    }
    std::swap(prev, curr);
  }
  return prev[m].counts;
}

double word_error_rate(std::span<const std::string> reference, std::span<const std::string> hypothesis) {
  if (reference.empty()) throw ValidationError("empty reference");
  return static_cast<double>(align(reference, hypothesis).total()) / static_cast<double>(reference.size());
}

double f_measure(double recall, double precision) {
  if (recall + precision == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

UnitSet expand_units(std::span<const PassageGroup> groups) {
  UnitSet units;
  for (const auto& g : groups) {
    for (auto u = g.first_unit; u < g.end_unit; ++u) units.insert({g.lecture_id, u});
  }
  return units;
}

Rpf recall_precision_f(std::span<const PassageGroup> retrieved, const UnitSet& relevant) {
  if (relevant.empty()) throw ValidationError("no relevant units");
  const auto got = expand_units(retrieved);
  std::size_t hit = 0;
  for (const auto& u : got) {
    if (relevant.contains(u)) ++hit;
  }
  Rpf out;
  out.recall = static_cast<double>(hit) / static_cast<double>(relevant.size());
  out.precision = got.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(got.size());
  out.f = f_measure(out.recall, out.precision);
  return out;
}

std::string format_ratio(double value) {
  auto s = fmt::format("{:.3f}", value);
  if (s.starts_with("0.")) s.erase(0, 1);
  if (s.starts_with("-0.")) s.erase(1, 1);
  return s;
}

std::string format_perplexity(double value) {
  if (value >= 999.5) return fmt::format("{:.0f}", value);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", value);
  return buf;
}

void TestCollection::validate() const {
  for (const auto& [query_id, relevant] : qrels) {
    if (!queries.contains(query_id)) throw ValidationError("qrels query without text: " + query_id);
    if (relevant.empty()) throw ValidationError("query without relevant units: " + query_id);
    const auto& lecture = relevant.begin()->lecture_id;
    for (const auto& u : relevant) {
      if (u.lecture_id != lecture) throw ValidationError("query spans several lectures: " + query_id);
    }
    auto lec = transcripts.find(lecture);
    if (lec == transcripts.end()) throw ValidationError("qrels reference unknown lecture " + lecture);
    auto ref = lec->second.find(std::string(kReferenceVariant));
    if (ref == lec->second.end()) throw ValidationError("lecture " + lecture + " has no reference transcript");
    for (const auto& u : relevant) {
      if (u.unit_id >= ref->second.size()) {
        throw ValidationError("qrels reference unknown unit " + lecture + "/" + std::to_string(u.unit_id));
      }
    }
  }
}

const std::string& TestCollection::lecture_of(const std::string& query_id) const {
  auto it = qrels.find(query_id);
  if (it == qrels.end() || it->second.empty()) throw ValidationError("no qrels for query " + query_id);
  return it->second.begin()->lecture_id;
}

std::vector<std::string> TestCollection::queries_for(const std::string& lecture_id) const {
  std::vector<std::string> out;
  for (const auto& [query_id, relevant] : qrels) {
    if (!relevant.empty() && relevant.begin()->lecture_id == lecture_id) out.push_back(query_id);
  }
  return out;
}

std::map<std::string, std::string> parse_queries(std::string_view content) {
  std::map<std::string, std::string> out;
  io::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) throw ParseError(line_no, "expected query_id<TAB>text");
    if (!out.emplace(std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))).second) {
      throw ParseError(line_no, "duplicate query id");
    }
  });
  return out;
}

Qrels parse_qrels(std::string_view content) {
  Qrels out;
  io::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    auto a = line.find('\t');
    auto b = a == std::string_view::npos ? a : line.find('\t', a + 1);
    if (b == std::string_view::npos) throw ParseError(line_no, "expected query_id<TAB>lecture_id<TAB>unit_id");
    auto unit_field = line.substr(b + 1);
    std::uint32_t unit = 0;
    auto [ptr, ec] = std::from_chars(unit_field.data(), unit_field.data() + unit_field.size(), unit);
    if (ec != std::errc{} || ptr != unit_field.data() + unit_field.size() || unit_field.empty()) {
      throw ParseError(line_no, "bad unit_id");
    }
    out[std::string(line.substr(0, a))].insert({std::string(line.substr(a + 1, b - a - 1)), unit});
  });
  return out;
}

TestCollection load_collection(const std::string& dir) {
  TestCollection c;
  const fs::path root(dir);
  const auto lectures = root / "lectures";
  if (!fs::is_directory(lectures)) throw IoError("missing lectures/ in " + dir);
  for (const auto& entry : fs::directory_iterator(lectures)) {
    if (!entry.is_directory()) continue;
    const auto id = entry.path().filename().string();
    for (const auto& file : fs::directory_iterator(entry.path())) {
      const auto& p = file.path();
      if (p.extension() == ".tsv") {
        c.transcripts[id][p.stem().string()] = parse_units(io::read_file(p.string()), id);
      } else if (p.filename() == "textbook.txt") {
        auto& paras = c.textbooks[id];
        io::for_each_line(io::read_file(p.string()), [&](std::size_t, std::string_view line) {
          if (!line.empty()) paras.emplace_back(line);
        });
      }
    }
  }
  c.queries = parse_queries(io::read_file((root / "queries.tsv").string()));
  if (fs::exists(root / "queries_short.tsv")) {
    c.short_queries = parse_queries(io::read_file((root / "queries_short.tsv").string()));
  }
  c.qrels = parse_qrels(io::read_file((root / "qrels.tsv").string()));
  c.validate();
  return c;
}

void save_collection(const TestCollection& c, const std::string& dir) {
  const fs::path root(dir);
  for (const auto& [id, variants] : c.transcripts) {
    const auto lecture_dir = root / "lectures" / id;
    fs::create_directories(lecture_dir);
    for (const auto& [variant, units] : variants) {
      io::write_file((lecture_dir / (variant + ".tsv")).string(), format_units(units));
    }
  }
  for (const auto& [id, paras] : c.textbooks) {
    const auto lecture_dir = root / "lectures" / id;
    fs::create_directories(lecture_dir);
    std::string text;
    for (const auto& p : paras) text += p + '\n';
    io::write_file((lecture_dir / "textbook.txt").string(), text);
  }
  auto write_queries = [&](const std::map<std::string, std::string>& queries, const char* name) {
    std::string text;
    for (const auto& [id, q] : queries) text += id + '\t' + q + '\n';
    io::write_file((root / name).string(), text);
  };
  write_queries(c.queries, "queries.tsv");
  if (!c.short_queries.empty()) write_queries(c.short_queries, "queries_short.tsv");
  std::string qrels;
  for (const auto& [id, units] : c.qrels) {
    for (const auto& u : units) qrels += id + '\t' + u.lecture_id + '\t' + std::to_string(u.unit_id) + '\n';
  }
  io::write_file((root / "qrels.tsv").string(), qrels);
}

std::vector<Condition> parse_conditions(std::string_view content, const std::string& base_dir) {
  std::vector<Condition> out;
  io::for_each_line(content, [&](std::size_t line_no, std::string_view line) {
    if (line.empty() || line.starts_with('#')) return;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      fields.emplace_back(line.substr(start, tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw ParseError(line_no, "expected name<TAB>variant[<TAB>model]");
    }
    Condition c{fields[0], fields[1], nullptr};
    if (fields.size() == 3 && !fields[2].empty() && fields[2] != "-") {
      fs::path model(fields[2]);
      if (model.is_relative()) model = fs::path(base_dir) / model;
      c.lm = std::make_shared<TrigramModel>(load_model(model.string()));
    }
    out.push_back(std::move(c));
  });
  return out;
}

std::vector<std::string> transcript_tokens(std::span<const SpeechUnit> units) {
  std::vector<std::string> out;
  for (const auto& u : units) {
    for (const auto& t : u.tokens) out.push_back(t.surface);
  }
  return out;
}

std::vector<RetrievalScores> evaluate_lecture(const TestCollection& collection, const std::string& lecture_id,
                                              std::span<const SpeechUnit> units,
                                              std::span<const std::size_t> top_ns, const PipelineConfig& config,
                                              QuerySet query_set) {
  std::vector<RetrievalScores> scores(top_ns.size());
  for (std::size_t i = 0; i < top_ns.size(); ++i) {
    if (top_ns[i] == 0) throw ValidationError("top_n must be at least 1");
    scores[i].top_n = top_ns[i];
  }
  const auto query_ids = collection.queries_for(lecture_id);
  if (query_ids.empty()) return scores;

  const auto passages = generate_passages(units, config.n_max, config.tokenizer);
  const auto index = build_index(passages, config.params, config.tokenizer);
  const auto& texts = query_set == QuerySet::kParagraph ? collection.queries : collection.short_queries;
  for (const auto& q : query_ids) {
    auto text = texts.find(q);
    if (text == texts.end()) throw ValidationError("no query text for " + q);
    const auto groups = merge_overlaps(search(index, make_query(text->second, config.tokenizer), config.pool_size));
    const auto& relevant = collection.qrels.at(q);
    for (auto& s : scores) {
      const auto n = std::min(s.top_n, groups.size());
      const auto rpf = recall_precision_f(std::span(groups).first(n), relevant);
      s.recall += rpf.recall;
      s.precision += rpf.precision;
      s.mean_f += rpf.f;
    }
  }
  for (auto& s : scores) {
    s.queries = query_ids.size();
    const auto n = static_cast<double>(query_ids.size());
    s.recall /= n;
    s.precision /= n;
    s.mean_f /= n;
    s.f = f_measure(s.recall, s.precision);
  }
  return scores;
}

EvalReport run_benchmark(const TestCollection& collection, std::span<const Condition> conditions,
                         std::span<const std::size_t> top_ns, const PipelineConfig& config) {
  collection.validate();
  std::vector<std::string> missing;
  for (const auto& [lecture, variants] : collection.transcripts) {
    if (!variants.contains(std::string(kReferenceVariant))) missing.push_back(lecture + "/reference");
    for (const auto& c : conditions) {
      if (!variants.contains(c.variant)) missing.push_back(lecture + "/" + c.variant);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ValidationError("missing transcript variants: " + list);
  }

  EvalReport report;
  report.top_ns.assign(top_ns.begin(), top_ns.end());
  for (const auto& [lecture, variants] : collection.transcripts) {
    LectureReport lr{lecture, {}};
    const auto& reference = variants.at(std::string(kReferenceVariant));
    const auto ref_tokens = transcript_tokens(reference);
    for (const auto& c : conditions) {
      ConditionReport cr;
      cr.condition = c.name;
      cr.variant = c.variant;
      const auto& units = variants.at(c.variant);
      if (!ref_tokens.empty()) cr.wer = word_error_rate(ref_tokens, transcript_tokens(units));
      if (c.lm) {
        std::vector<std::string> test;
        for (const auto& u : reference) {
          for (auto& t : tokenize(u.text(), c.lm->tokenizer())) test.push_back(std::move(t));
        }
        if (!test.empty()) {
          cr.oov = oov_rate(c.lm->vocabulary(), test);
          cr.perplexity = perplexity(*c.lm, test);
        }
      }
      cr.retrieval = evaluate_lecture(collection, lecture, units, top_ns, config);
      lr.conditions.push_back(std::move(cr));
    }
    report.lectures.push_back(std::move(lr));
  }
  return report;
}

std::string EvalReport::format_table() const {
  constexpr int kLabel = 10;
  constexpr int kCell = 7;
  std::string out;
  auto cells = [&](auto&& cell) {
    for (const auto& l : lectures) {
      for (const auto& c : l.conditions) out += fmt::format("{:>{}}", cell(c), kCell);
      out += "  ";
    }
    out += '\n';
  };
  out += fmt::format("{:<{}}", "ID", kLabel);
  for (const auto& l : lectures) {
    out += fmt::format("{:^{}}", l.lecture_id, static_cast<int>(l.conditions.size()) * kCell);
    out += "  ";
  }
  out += '\n';
  out += fmt::format("{:<{}}", "", kLabel);
  cells([](const ConditionReport& c) { return c.condition; });
  const std::string dash = "---";
  out += fmt::format("{:<{}}", "OOV", kLabel);
  cells([&](const ConditionReport& c) { return c.oov ? format_ratio(*c.oov) : dash; });
  out += fmt::format("{:<{}}", "PP", kLabel);
  cells([&](const ConditionReport& c) { return c.perplexity ? format_perplexity(*c.perplexity) : dash; });
  out += fmt::format("{:<{}}", "WER", kLabel);
  cells([&](const ConditionReport& c) { return c.wer ? format_ratio(*c.wer) : dash; });
  for (std::size_t i = 0; i < top_ns.size(); ++i) {
    const auto label = fmt::format("N={}", top_ns[i]);
    out += fmt::format("{:<5}{:<{}}", label, "R", kLabel - 5);
    cells([&](const ConditionReport& c) { return format_ratio(c.retrieval[i].recall); });
    out += fmt::format("{:<5}{:<{}}", "", "P", kLabel - 5);
    cells([&](const ConditionReport& c) { return format_ratio(c.retrieval[i].precision); });
    out += fmt::format("{:<5}{:<{}}", "", "F", kLabel - 5);
    cells([&](const ConditionReport& c) { return format_ratio(c.retrieval[i].f); });
  }
  return out;
}

nlohmann::json EvalReport::to_json() const {
  auto optional = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json lectures_json = nlohmann::json::array();
  for (const auto& l : lectures) {
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : l.conditions) {
      nlohmann::json retrieval = nlohmann::json::array();
      for (const auto& r : c.retrieval) {
        retrieval.push_back({{"top_n", r.top_n},
                             {"queries", r.queries},
                             {"recall", r.recall},
                             {"precision", r.precision},
                             {"f", r.f},
                             {"mean_f", r.mean_f}});
      }
      conds.push_back({{"condition", c.condition},
                       {"variant", c.variant},
                       {"oov", optional(c.oov)},
                       {"pp", optional(c.perplexity)},
                       {"wer", optional(c.wer)},
                       {"retrieval", retrieval}});
    }
    lectures_json.push_back({{"lecture_id", l.lecture_id}, {"conditions", conds}});
  }
  return {{"top_ns", top_ns}, {"lectures", lectures_json}};
}

}  // namespace lectern
