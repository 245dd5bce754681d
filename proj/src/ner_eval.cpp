#include "taxisentinel/ner_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "taxisentinel/error.hpp"
#include "taxisentinel/rng.hpp"
#include "taxisentinel/text_util.hpp"

namespace taxisentinel {
namespace {

bool by_start(const EntitySpan& a, const EntitySpan& b) {
  return a.start != b.start ? a.start < b.start : a.end < b.end;
}

void require_disjoint(std::vector<EntitySpan> spans, const char* which) {
  std::sort(spans.begin(), spans.end(), by_start);
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i - 1].overlaps(spans[i])) {
      fail(ErrorCode::kOverlappingInput, std::string(which) + " spans overlap at byte " +
                                             std::to_string(spans[i].start));
    }
  }
}

}  // namespace

std::vector<EntitySpan> merge_override(const std::vector<EntitySpan>& external,
                                       const std::vector<EntitySpan>& rule) {
  require_disjoint(external, "external");
  require_disjoint(rule, "rule");
  std::vector<EntitySpan> out = rule;
  for (const EntitySpan& e : external) {
    const bool shadowed =
        std::any_of(rule.begin(), rule.end(), [&](const EntitySpan& r) { return r.overlaps(e); });
    if (!shadowed) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), by_start);
  return out;
}

MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  MetricsReport m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

MetricsReport score(const std::vector<AnnotatedUtterance>& gold,
                    const std::vector<std::vector<EntitySpan>>& predicted) {
  if (gold.size() != predicted.size()) {
    fail(ErrorCode::kLengthMismatch, std::to_string(gold.size()) + " gold vs " +
                                         std::to_string(predicted.size()) + " predicted");
  }
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    std::vector<bool> claimed(gold[u].gold.size(), false);
    std::size_t hits = 0;
    for (const EntitySpan& p : predicted[u]) {
      for (std::size_t g = 0; g < gold[u].gold.size(); ++g) {
        const EntitySpan& s = gold[u].gold[g];
        if (!claimed[g] && s.start == p.start && s.end == p.end && s.label == p.label) {
          claimed[g] = true;
          ++hits;
          break;
        }
      }
    }
    tp += hits;
    fp += predicted[u].size() - hits;
    fn += gold[u].gold.size() - hits;
  }
  return metrics_from_counts(tp, fp, fn);
}

std::vector<SplitStats> corpus_stats(
    const std::vector<std::pair<std::string, std::vector<AnnotatedUtterance>>>& splits) {
  std::vector<SplitStats> out;
  for (const auto& [name, corpus] : splits) {
    SplitStats s;
    s.name = name;
    for (const AnnotatedUtterance& u : corpus) {
      for (const EntitySpan& e : u.gold) ++s.counts[static_cast<std::size_t>(e.label)];
    }
    s.total = s.counts[0] + s.counts[1] + s.counts[2];
    if (s.total > 0) {
      for (std::size_t i = 0; i < 3; ++i) {
        s.percent[i] = 100.0 * static_cast<double>(s.counts[i]) / static_cast<double>(s.total);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<AnnotatedUtterance> parse_annotated_json(const nlohmann::json& doc, SpanSource source) {
  if (!doc.is_array()) fail(ErrorCode::kMalformedFile, "annotation file must be a JSON array");
  std::vector<AnnotatedUtterance> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    const std::string where = "utterance " + std::to_string(i);
    AnnotatedUtterance u;
    try {
      u.text = item.at("text").get<std::string>();
      const std::size_t len = utf8_length(u.text);
      for (const auto& ent : item.value("entities", nlohmann::json::array())) {
        if (!ent.is_array() || ent.size() != 3) {
          fail(ErrorCode::kMalformedFile, where + ": entity must be [start, end, label]");
        }
        const auto start = ent[0].get<std::int64_t>();
        const auto end = ent[1].get<std::int64_t>();
        const std::string label = ent[2].get<std::string>();
        auto parsed = parse_label(label);
        if (!parsed) fail(ErrorCode::kMalformedFile, where + ": unknown label " + label);
        if (start < 0 || end <= start || static_cast<std::size_t>(end) > len) {
          fail(ErrorCode::kMalformedFile, where + ": span out of range");
        }
        EntitySpan s;
        s.start = char_to_byte_offset(u.text, static_cast<std::size_t>(start));
        s.end = char_to_byte_offset(u.text, static_cast<std::size_t>(end));
        s.label = *parsed;
        s.surface = u.text.substr(s.start, s.end - s.start);
        s.source = source;
        u.gold.push_back(std::move(s));
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kMalformedFile, where + ": " + e.what());
    }
    std::sort(u.gold.begin(), u.gold.end(), by_start);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<AnnotatedUtterance> load_annotated(const std::filesystem::path& path, SpanSource source) {
  return parse_annotated_json(read_json_file(path), source);
}

nlohmann::json annotated_to_json(const std::vector<AnnotatedUtterance>& corpus) {
  nlohmann::json out = nlohmann::json::array();
  for (const AnnotatedUtterance& u : corpus) {
    nlohmann::json ents = nlohmann::json::array();
    for (const EntitySpan& s : u.gold) {
      ents.push_back({byte_to_char_offset(u.text, s.start), byte_to_char_offset(u.text, s.end),
                      std::string(to_string(s.label))});
    }
    out.push_back({{"text", u.text}, {"entities", std::move(ents)}});
  }
  return out;
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  return j;
}

std::vector<AnnotatedUtterance> degrade(const std::vector<AnnotatedUtterance>& gold,
                                        double delete_fraction, double mislabel_fraction,
                                        std::uint64_t seed) {
  if (!(delete_fraction >= 0.0) || !(mislabel_fraction >= 0.0) ||
      delete_fraction + mislabel_fraction > 1.0) {
    fail(ErrorCode::kInvalidArgument, "fractions must be non-negative and sum to at most 1");
  }
  std::vector<std::pair<std::size_t, std::size_t>> refs;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    for (std::size_t g = 0; g < gold[u].gold.size(); ++g) refs.emplace_back(u, g);
  }
  const auto n_delete = static_cast<std::size_t>(std::llround(delete_fraction * refs.size()));
  const auto n_mislabel = static_cast<std::size_t>(std::llround(mislabel_fraction * refs.size()));

  // Fisher-Yates with our own engine so the result is stdlib independent.
  SplitMix64 rng(seed);
  for (std::size_t i = refs.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
    std::swap(refs[i - 1], refs[std::min(j, i - 1)]);
  }

  enum class Fate { kKeep, kDelete, kMislabel };
  std::vector<std::vector<Fate>> fate(gold.size());
  for (std::size_t u = 0; u < gold.size(); ++u) fate[u].assign(gold[u].gold.size(), Fate::kKeep);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    Fate f = i < n_delete ? Fate::kDelete : (i < n_delete + n_mislabel ? Fate::kMislabel : Fate::kKeep);
    fate[refs[i].first][refs[i].second] = f;
  }

  std::vector<AnnotatedUtterance> out;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    AnnotatedUtterance d{gold[u].text, {}};
    for (std::size_t g = 0; g < gold[u].gold.size(); ++g) {
      EntitySpan s = gold[u].gold[g];
      s.source = SpanSource::kExternal;
      s.rule_id.reset();
      if (fate[u][g] == Fate::kDelete) continue;
      if (fate[u][g] == Fate::kMislabel) {
        s.label = static_cast<EntityLabel>((static_cast<int>(s.label) + 1) % 3);
      }
      d.gold.push_back(std::move(s));
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace taxisentinel
