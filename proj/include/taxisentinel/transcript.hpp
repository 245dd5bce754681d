#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "taxisentinel/airport_graph.hpp"
#include "taxisentinel/phraseology.hpp"

namespace taxisentinel {

struct Utterance {
  std::string time_text;  // as written: "17:45:11" or "0:08"
  double time = 0.0;      // seconds
  std::string speaker;
  std::string text;
};

// "HH:MM:SS" or "M:SS" to seconds; throws MALFORMED_FILE.
double parse_clock(std::string_view text);

// JSON Lines of {time, speaker?, text}. Throws NON_MONOTONE_TIME when times
// decrease.
std::vector<Utterance> parse_transcript_jsonl(std::string_view content);
std::vector<Utterance> load_transcript(const std::filesystem::path& path);

struct InfoRow {
  double time = 0.0;
  std::string time_text;
  std::string callsign;          // canonical, e.g. JAL516
  std::string callsign_surface;  // as spoken, e.g. Japan Air 516
  std::vector<std::string> ac_state;
  std::optional<std::string> dest_runway;
  bool runway_explicit = false;  // false when filled by carry_forward
  std::optional<std::string> destination_raw;
  std::optional<NodeId> destination_node;
  std::vector<std::string> remarks;  // further callsigns in the utterance

  // "holding point C5(Txy_C5_C5B)", a bare runway entry node, the raw phrase
  // when unlinked, or empty.
  std::string destination_display() const;
};

struct SkippedUtterance {
  std::size_t index = 0;
  std::string time_text;
  std::string text;
  std::string reason;
};

struct InfoTable {
  std::vector<InfoRow> rows;
  std::vector<SkippedUtterance> skipped;
};

// Runway id ("34R", "08R") when the phrase is runway phraseology.
std::optional<std::string> classify_dest_runway(std::string_view destination_text,
                                                const LexiconTables& tables);

// One row per utterance with a callsign. Rule spans override external ones
// where they overlap. With a graph, destinations are linked to nodes.
InfoTable build_info_table(const std::vector<Utterance>& transcript, const RuleSet& rules,
                           const std::vector<std::vector<EntitySpan>>* external = nullptr,
                           const AirportGraph* graph = nullptr);

// Per callsign, fills a missing dest_runway from that callsign's latest prior
// row. Explicit values are kept.
std::vector<InfoRow> carry_forward(std::vector<InfoRow> table);

std::string info_table_csv(const std::vector<InfoRow>& rows);
nlohmann::ordered_json info_table_json(const std::vector<InfoRow>& rows);
nlohmann::ordered_json skip_report_json(const std::vector<SkippedUtterance>& skipped);

}  // namespace taxisentinel
