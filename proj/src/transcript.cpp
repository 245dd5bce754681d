#include "taxisentinel/transcript.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <regex>

#include "taxisentinel/error.hpp"
#include "taxisentinel/ner_eval.hpp"
#include "taxisentinel/text_util.hpp"

namespace taxisentinel {
namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string collapse_lower(std::string_view s) {
  std::string out;
  for (const std::string& t : split_whitespace(to_lower_ascii(s))) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

double parse_clock(std::string_view text) {
  std::vector<int> parts;
  std::size_t start = 0;
  const std::string t = trim(text);
  while (start <= t.size()) {
    std::size_t colon = t.find(':', start);
    if (colon == std::string::npos) colon = t.size();
    const std::string_view field = std::string_view(t).substr(start, colon - start);
    int v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || v < 0) {
      fail(ErrorCode::kMalformedFile, "bad time '" + t + "'");
    }
    parts.push_back(v);
    start = colon + 1;
  }
  if (parts.size() == 3 && parts[1] < 60 && parts[2] < 60) {
    return parts[0] * 3600.0 + parts[1] * 60.0 + parts[2];
  }
  if (parts.size() == 2 && parts[1] < 60) return parts[0] * 60.0 + parts[1];
  fail(ErrorCode::kMalformedFile, "bad time '" + t + "'");
}

std::vector<Utterance> parse_transcript_jsonl(std::string_view content) {
  std::vector<Utterance> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string_view::npos) nl = content.size();
    const std::string line = trim(content.substr(start, nl - start));
    start = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    Utterance u;
    try {
      const auto j = nlohmann::json::parse(line);
      u.time_text = j.at("time").get<std::string>();
      u.speaker = j.value("speaker", std::string());
      u.text = j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kMalformedFile, where + ": " + e.what());
    }
    u.time = parse_clock(u.time_text);
    if (!out.empty() && u.time < out.back().time) {
      fail(ErrorCode::kNonMonotoneTime, where + ": " + u.time_text + " precedes " + out.back().time_text);
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<Utterance> load_transcript(const std::filesystem::path& path) {
  return parse_transcript_jsonl(read_text_file(path));
}

std::string InfoRow::destination_display() const {
  if (destination_raw && destination_node) return *destination_raw + "(" + *destination_node + ")";
  if (destination_raw) return *destination_raw;
  if (destination_node) return *destination_node;
  return {};
}

std::optional<std::string> classify_dest_runway(std::string_view destination_text,
                                                const LexiconTables& tables) {
  std::vector<std::string> tokens =
      split_whitespace(to_lower_ascii(digits_from_words(destination_text, tables)));
  if (!tokens.empty() && tokens.front() == "runway") tokens.erase(tokens.begin());
  // Spoken digits arrive one per token: "3 4 right" -> "34 right".
  std::string joined;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool glue = i > 0 && all_digits(tokens[i]) && all_digits(tokens[i - 1]);
    if (i > 0 && !glue) joined += ' ';
    joined += tokens[i];
  }
  static const std::regex pattern(R"(^(\d{1,2}) ?(l|r|c|left|right|center)?$)");
  std::smatch m;
  if (!std::regex_match(joined, m, pattern)) return std::nullopt;
  const int number = std::stoi(m[1].str());
  if (number < 1 || number > 36) return std::nullopt;
  std::string id = (number < 10 ? "0" : "") + std::to_string(number);
  if (m[2].matched) id += static_cast<char>(m[2].str()[0] - 'a' + 'A');
  return id;
}

InfoTable build_info_table(const std::vector<Utterance>& transcript, const RuleSet& rules,
                           const std::vector<std::vector<EntitySpan>>* external,
                           const AirportGraph* graph) {
  if (external && external->size() != transcript.size()) {
    fail(ErrorCode::kLengthMismatch, "external predictions not aligned with transcript");
  }
  InfoTable table;
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    const Utterance& u = transcript[i];
    std::vector<EntitySpan> spans = match_rules(rules, u.text);
    if (external) spans = merge_override((*external)[i], spans);

    InfoRow row;
    row.time = u.time;
    row.time_text = u.time_text;
    for (const EntitySpan& s : spans) {
      switch (s.label) {
        case EntityLabel::kCallsign: {
          const std::string canon = s.normalized ? *s.normalized
                                                 : normalize_callsign_text(s.surface, rules.tables());
          if (row.callsign.empty()) {
            row.callsign = canon;
            row.callsign_surface = s.surface;
          } else if (canon != row.callsign &&
                     std::find(row.remarks.begin(), row.remarks.end(), canon) == row.remarks.end()) {
            row.remarks.push_back(canon);
          }
          break;
        }
        case EntityLabel::kAcState: {
          std::string state = collapse_lower(s.surface);
          if (std::find(row.ac_state.begin(), row.ac_state.end(), state) == row.ac_state.end()) {
            row.ac_state.push_back(std::move(state));
          }
          break;
        }
        case EntityLabel::kDestination: {
          if (auto rwy = classify_dest_runway(s.surface, rules.tables())) {
            if (!row.dest_runway) {
              row.dest_runway = *rwy;
              row.runway_explicit = true;
            }
          } else if (!row.destination_raw) {
            row.destination_raw = s.surface;
          }
          break;
        }
      }
    }
    if (row.callsign.empty()) {
      table.skipped.push_back({i, u.time_text, u.text, "no callsign"});
      continue;
    }
    if (graph) {
      if (row.destination_raw) {
        auto matches = link_destination(*row.destination_raw, *graph, 1, rules.tables());
        if (!matches.empty()) row.destination_node = matches.front().node;
      } else if (row.dest_runway && !graph->runway_nodes(*row.dest_runway).empty()) {
        row.destination_node = runway_entry_node(*graph, *row.dest_runway);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<InfoRow> carry_forward(std::vector<InfoRow> table) {
  std::map<std::string, std::string> last;
  for (InfoRow& row : table) {
    if (row.dest_runway) {
      last[row.callsign] = *row.dest_runway;
    } else if (auto it = last.find(row.callsign); it != last.end()) {
      row.dest_runway = it->second;
    }
  }
  return table;
}

std::string info_table_csv(const std::vector<InfoRow>& rows) {
  std::string out = "TIME,CALLSIGN,ACSTATE,DEST_RUNWAY,DESTINATION,DEST_NODE\r\n";
  for (const InfoRow& r : rows) {
    std::string states;
    for (const std::string& s : r.ac_state) states += (states.empty() ? "" : ",") + s;
    out += csv_field(r.time_text) + ',' + csv_field(r.callsign) + ',' + csv_field(states) + ',' +
           csv_field(r.dest_runway.value_or("")) + ',' + csv_field(r.destination_display()) + ',' +
           csv_field(r.destination_node.value_or("")) + "\r\n";
  }
  return out;
}

nlohmann::ordered_json info_table_json(const std::vector<InfoRow>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const InfoRow& r : rows) {
    nlohmann::ordered_json j;
    j["time"] = r.time_text;
    j["time_seconds"] = r.time;
    j["callsign"] = r.callsign;
    j["callsign_surface"] = r.callsign_surface;
    j["ac_state"] = r.ac_state;
    j["dest_runway"] = r.dest_runway ? nlohmann::ordered_json(*r.dest_runway) : nullptr;
    j["runway_explicit"] = r.runway_explicit;
    j["destination"] = r.destination_display();
    j["destination_raw"] = r.destination_raw ? nlohmann::ordered_json(*r.destination_raw) : nullptr;
    j["dest_node"] = r.destination_node ? nlohmann::ordered_json(*r.destination_node) : nullptr;
    j["remarks"] = r.remarks;
    out.push_back(std::move(j));
  }
  return out;
}

nlohmann::ordered_json skip_report_json(const std::vector<SkippedUtterance>& skipped) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const SkippedUtterance& s : skipped) {
    nlohmann::ordered_json j;
    j["index"] = s.index;
    j["time"] = s.time_text;
    j["text"] = s.text;
    j["reason"] = s.reason;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace taxisentinel
