#include "lectern/asr_sim.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "lectern/error.hpp"

namespace lectern {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

void NoiseSpec::validate() const {
  if (sub_rate < 0.0 || del_rate < 0.0 || ins_rate < 0.0) throw ValidationError("negative noise rate");
  if (sub_rate + del_rate + ins_rate > 1.0 + 1e-12) throw ValidationError("noise rates sum above 1");
  if (sub_rate + ins_rate > 0.0 && confusion_vocab.empty()) {
    throw ValidationError("confusion vocabulary required for substitutions and insertions");
  }
}

NoiseSpec noise_for_target(double target_wer, std::uint64_t seed, std::vector<std::string> confusion_vocab) {
  if (target_wer < 0.0 || target_wer > 1.0) throw ValidationError("target WER must be in [0, 1]");
  return NoiseSpec{target_wer * 0.5, target_wer * 0.25, target_wer * 0.25, seed, std::move(confusion_vocab)};
}

std::vector<SpeechUnit> corrupt_transcript(std::span<const SpeechUnit> units, const NoiseSpec& spec) {
  spec.validate();
  std::vector<std::string> vocab = spec.confusion_vocab;
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());

  const std::string_view lecture = units.empty() ? std::string_view{} : std::string_view(units[0].lecture_id);
  std::mt19937_64 rng(mix(spec.seed, fnv1a(lecture)));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  auto substitute = [&](const std::string& original) -> const std::string& {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), original);
    const bool present = it != vocab.end() && *it == original;
    const auto choices = vocab.size() - (present ? 1 : 0);
    if (choices == 0) throw ValidationError("no substitute for '" + original + "' in confusion vocabulary");
    auto j = pick(choices);
    if (present && j >= static_cast<std::size_t>(it - vocab.begin())) ++j;
    return vocab[j];
  };

  // Fates first, over the whole lecture. An insertion is only placed where a
  // kept token separates it from every deletion on both sides (runs of
  // substitutions do not count as separators): otherwise the aligner pairs
  // the insertion with the deletion, shifts across the run and the measured
  // rate falls short.
  enum class Fate : std::uint8_t { kKeep, kSubstitute, kDelete };
  std::vector<Fate> fates;
  std::vector<const std::string*> replacements;
  for (const auto& unit : units) {
    for (const auto& token : unit.tokens) {
      const double u = coin(rng);
      if (u < spec.sub_rate) {
        fates.push_back(Fate::kSubstitute);
        replacements.push_back(&substitute(token.surface));
      } else if (u < spec.sub_rate + spec.del_rate) {
        fates.push_back(Fate::kDelete);
        replacements.push_back(nullptr);
      } else {
        fates.push_back(Fate::kKeep);
        replacements.push_back(nullptr);
      }
    }
  }
  const std::size_t n = fates.size();
  // Nearest non-substituted fate at or before i, and strictly after i.
  std::vector<bool> clear_left(n), clear_right(n);
  bool clear = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (fates[i] != Fate::kSubstitute) clear = fates[i] == Fate::kKeep;
    clear_left[i] = clear;
  }
  clear = true;
  for (std::size_t i = n; i-- > 0;) {
    clear_right[i] = clear;
    if (fates[i] != Fate::kSubstitute) clear = fates[i] == Fate::kKeep;
  }
  auto eligible = [&](std::size_t i) { return clear_left[i] && clear_right[i]; };
  std::size_t eligible_count = 0;
  for (std::size_t i = 0; i < n; ++i) eligible_count += eligible(i) ? 1 : 0;
  // Keeps the expected insertion count at ins_rate * n.
  const double ins_prob = eligible_count == 0
                              ? 0.0
                              : std::min(1.0, spec.ins_rate * static_cast<double>(n) /
                                                  static_cast<double>(eligible_count));

  std::vector<SpeechUnit> out;
  out.reserve(units.size());
  std::size_t i = 0;
  for (const auto& unit : units) {
    SpeechUnit noisy{unit.unit_id, unit.lecture_id, {}, unit.start_ms, unit.end_ms};
    noisy.tokens.reserve(unit.tokens.size());
    for (const auto& token : unit.tokens) {
      if (fates[i] == Fate::kSubstitute) {
        noisy.tokens.push_back({*replacements[i], token.start_ms, token.end_ms});
      } else if (fates[i] == Fate::kKeep) {
        noisy.tokens.push_back(token);
      }
      if (eligible(i) && coin(rng) < ins_prob) {
        noisy.tokens.push_back({vocab[pick(vocab.size())], token.end_ms, token.end_ms});
      }
      ++i;
    }
    out.push_back(std::move(noisy));
  }
  return out;
}

SweepReport wer_sweep(const TestCollection& collection, std::span<const double> targets,
                      const SweepOptions& options) {
  if (options.seeds == 0) throw ValidationError("at least one seed required");
  std::vector<double> levels(targets.begin(), targets.end());
  levels.push_back(0.0);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::vector<std::string> vocab;
  for (const auto& [lecture, variants] : collection.transcripts) {
    auto ref = variants.find(std::string(kReferenceVariant));
    if (ref == variants.end()) throw ValidationError("lecture " + lecture + " has no reference transcript");
    for (auto& t : transcript_tokens(ref->second)) vocab.push_back(std::move(t));
  }
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());

  const std::size_t top_ns[] = {options.top_n};
  SweepReport report;
  report.seeds = options.seeds;
  report.top_n = options.top_n;
  for (double target : levels) {
    SweepPoint point;
    point.target = target;
    for (std::size_t s = 0; s < options.seeds; ++s) {
      const auto spec = noise_for_target(target, options.base_seed + s, vocab);
      struct Sums {
        double recall = 0.0, precision = 0.0;
        std::size_t queries = 0;
      } para, key;
      std::size_t edits = 0;
      std::size_t ref_tokens = 0;
      for (const auto& [lecture, variants] : collection.transcripts) {
        const auto& reference = variants.at(std::string(kReferenceVariant));
        const auto noisy = corrupt_transcript(reference, spec);
        const auto ref = transcript_tokens(reference);
        edits += align(ref, transcript_tokens(noisy)).total();
        ref_tokens += ref.size();
        for (auto [set, sums] : {std::pair{QuerySet::kParagraph, &para}, std::pair{QuerySet::kKeyword, &key}}) {
          const auto r = evaluate_lecture(collection, lecture, noisy, top_ns, options.pipeline, set)[0];
          sums->recall += r.recall * static_cast<double>(r.queries);
          sums->precision += r.precision * static_cast<double>(r.queries);
          sums->queries += r.queries;
        }
      }
      auto f_of = [](const Sums& x) {
        if (x.queries == 0) return 0.0;
        const auto n = static_cast<double>(x.queries);
        return f_measure(x.recall / n, x.precision / n);
      };
      point.f_paragraph += f_of(para);
      point.f_keyword += f_of(key);
      if (ref_tokens > 0) point.measured_wer += static_cast<double>(edits) / static_cast<double>(ref_tokens);
    }
    const auto n = static_cast<double>(options.seeds);
    point.f_paragraph /= n;
    point.f_keyword /= n;
    point.measured_wer /= n;
    report.points.push_back(point);
  }
  return report;
}

std::string SweepReport::format_table() const {
  std::string out = fmt::format("{:>8}{:>10}{:>12}{:>12}{:>12}{:>12}\n", "target", "WER", "F(para)", "F(key)",
                                "ret(para)", "ret(key)");
  const double base_p = points.empty() ? 0.0 : points.front().f_paragraph;
  const double base_k = points.empty() ? 0.0 : points.front().f_keyword;
  for (const auto& p : points) {
    out += fmt::format("{:>8}{:>10}{:>12}{:>12}{:>12}{:>12}\n", format_ratio(p.target), format_ratio(p.measured_wer),
                       format_ratio(p.f_paragraph), format_ratio(p.f_keyword),
                       base_p > 0 ? format_ratio(p.f_paragraph / base_p) : "---",
                       base_k > 0 ? format_ratio(p.f_keyword / base_k) : "---");
  }
  return out;
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    pts.push_back({{"target", p.target},
                   {"measured_wer", p.measured_wer},
                   {"f_paragraph", p.f_paragraph},
                   {"f_keyword", p.f_keyword}});
  }
  return {{"seeds", seeds}, {"top_n", top_n}, {"points", pts}};
}

}  // namespace lectern
