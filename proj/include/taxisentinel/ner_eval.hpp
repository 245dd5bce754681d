#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "taxisentinel/phraseology.hpp"

namespace taxisentinel {

struct AnnotatedUtterance {
  std::string text;
  std::vector<EntitySpan> gold;
};

struct MetricsReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Rule spans always survive; external spans survive only where no rule span
// overlaps them. Throws OVERLAPPING_INPUT when either list overlaps itself.
std::vector<EntitySpan> merge_override(const std::vector<EntitySpan>& external,
                                       const std::vector<EntitySpan>& rule);

// Exact (start, end, label) matching, micro-averaged. Each gold span can be
// claimed by at most one prediction.
MetricsReport score(const std::vector<AnnotatedUtterance>& gold,
                    const std::vector<std::vector<EntitySpan>>& predicted);
MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

struct SplitStats {
  std::string name;
  std::array<std::size_t, 3> counts{};
  std::size_t total = 0;
  std::array<double, 3> percent{};
};

std::vector<SplitStats> corpus_stats(
    const std::vector<std::pair<std::string, std::vector<AnnotatedUtterance>>>& splits);

// JSON list of {text, entities: [[start, end, label]]}; offsets in code points
// on disk, bytes in memory.
std::vector<AnnotatedUtterance> parse_annotated_json(const nlohmann::json& doc,
                                                     SpanSource source = SpanSource::kExternal);
std::vector<AnnotatedUtterance> load_annotated(const std::filesystem::path& path,
                                               SpanSource source = SpanSource::kExternal);
nlohmann::json annotated_to_json(const std::vector<AnnotatedUtterance>& corpus);

nlohmann::ordered_json metrics_to_json(const MetricsReport& m);

// Deletes round(delete_fraction * total) gold spans and relabels
// round(mislabel_fraction * total) of the rest, chosen by a seeded shuffle.
std::vector<AnnotatedUtterance> degrade(const std::vector<AnnotatedUtterance>& gold,
                                        double delete_fraction, double mislabel_fraction,
                                        std::uint64_t seed);

}  // namespace taxisentinel
