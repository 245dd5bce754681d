#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace taxisentinel {

enum class EntityLabel { kCallsign = 0, kAcState = 1, kDestination = 2 };
inline constexpr std::array<EntityLabel, 3> kAllLabels = {
    EntityLabel::kCallsign, EntityLabel::kAcState, EntityLabel::kDestination};

std::string_view to_string(EntityLabel label);
std::optional<EntityLabel> parse_label(std::string_view name);

enum class PatternKind { kTokenSequence, kRegularExpression };

enum class SpanSource { kRule, kExternal };

// A token-sequence body is whitespace separated tokens. A token is a literal
// word, a '|' separated set of literal alternatives, or one of the classes
// {NUM} (digits or spoken number words, possibly several), {PHONETIC},
// {TELEPHONY}, {WORD}, {ALNUM}. A trailing '?' makes a token optional; the
// first token may not be optional.
struct RulePattern {
  std::string id;
  EntityLabel label = EntityLabel::kCallsign;
  PatternKind kind = PatternKind::kRegularExpression;
  std::string body;
  int priority = 0;
};

// Offsets are UTF-8 byte offsets into the utterance. File formats carry
// character offsets; conversion happens at load/save.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityLabel label = EntityLabel::kCallsign;
  std::string surface;
  SpanSource source = SpanSource::kRule;
  std::optional<std::string> rule_id;
  std::optional<std::string> normalized;

  bool overlaps(const EntitySpan& other) const {
    return start < other.end && other.start < end;
  }
};

// Lookup tables for spoken ATC forms. Keys are lowercase.
struct LexiconTables {
  std::map<std::string, std::string> telephony;  // "speed bird" -> "BAW"
  std::map<std::string, std::string> phonetic;   // "echo" -> "E"
  std::map<std::string, std::string> numbers;    // "five" -> "5"
};

class RuleSet {
 public:
  // Compiles every pattern; throws BAD_PATTERN(id) or DUPLICATE_ID(id).
  RuleSet(std::vector<RulePattern> patterns, LexiconTables tables);

  const std::vector<RulePattern>& patterns() const { return patterns_; }
  const LexiconTables& tables() const { return tables_; }
  std::size_t size() const { return patterns_.size(); }
  std::array<std::size_t, 3> counts_by_label() const;

  // Compiled matcher for patterns()[i]; anchored use only.
  const std::regex& matcher(std::size_t i) const { return matchers_[i]; }

 private:
  std::vector<RulePattern> patterns_;
  LexiconTables tables_;
  std::vector<std::regex> matchers_;
};

std::vector<RulePattern> parse_rules_json(const nlohmann::json& doc);
LexiconTables parse_tables_json(const nlohmann::json& doc);
nlohmann::json rules_to_json(const std::vector<RulePattern>& rules);

LexiconTables load_tables(const std::filesystem::path& tables_file);
RuleSet compile_ruleset(const std::filesystem::path& rules_file, LexiconTables tables);

// Defaults compiled in from fixtures/rules.
LexiconTables bundled_tables();
RuleSet bundled_ruleset();

// Non-overlapping rule spans sorted by start. Candidate conflicts resolve by
// longest span, then higher priority, then lower rule index, then leftmost.
// Matching is case-insensitive over whitespace-collapsed text; offsets refer
// to the original text.
std::vector<EntitySpan> match_rules(const RuleSet& rules, std::string_view text);

// "speed bird two five" -> "BAW25". Throws WRONG_LABEL for non-callsign spans.
std::string normalize_callsign(const EntitySpan& span, const RuleSet& rules);
std::string normalize_callsign_text(std::string_view surface, const LexiconTables& tables);

// Replaces spoken number words with digits token by token.
std::string digits_from_words(std::string_view text, const LexiconTables& tables);

}  // namespace taxisentinel
