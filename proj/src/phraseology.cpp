#include "taxisentinel/phraseology.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

#include "taxisentinel/error.hpp"
#include "taxisentinel/text_util.hpp"

namespace taxisentinel {
namespace {

#include "bundled_rules.inc"

constexpr std::string_view kBoundaryLookahead = "(?![A-Za-z0-9])";

std::string regex_escape(std::string_view s) {
  static const std::string_view special = R"(\^$.|?*+()[]{}/-)";
  std::string out;
  for (char c : s) {
    if (special.find(c) != std::string_view::npos) out += '\\';
    out += c;
  }
  return out;
}

// Longest keys first so alternation prefers "speed bird" over "speed".
std::string alternation(const std::map<std::string, std::string>& table) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : table) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  std::string out = "(?:";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i) out += '|';
    std::string escaped;
    for (const std::string& w : split_whitespace(keys[i])) {
      if (!escaped.empty()) escaped += ' ';
      escaped += regex_escape(w);
    }
    out += escaped;
  }
  out += ')';
  return out;
}

std::string token_class(std::string_view name, const LexiconTables& tables,
                        const std::string& rule_id) {
  if (name == "NUM") {
    std::string unit = "(?:[0-9]+";
    if (!tables.numbers.empty()) unit += "|" + alternation(tables.numbers);
    unit += ")";
    return "(?:" + unit + "(?: " + unit + ")*)";
  }
  if (name == "PHONETIC") {
    if (tables.phonetic.empty()) fail(ErrorCode::kBadPattern, rule_id + ": phonetic table empty");
    return alternation(tables.phonetic);
  }
  if (name == "TELEPHONY") {
    if (tables.telephony.empty()) fail(ErrorCode::kBadPattern, rule_id + ": telephony table empty");
    return alternation(tables.telephony);
  }
  if (name == "WORD") return "[A-Za-z]+";
  if (name == "ALNUM") return "[A-Za-z0-9]+";
  fail(ErrorCode::kBadPattern, rule_id + ": unknown token class {" + std::string(name) + "}");
}

std::string compile_token_sequence(const RulePattern& rule, const LexiconTables& tables) {
  const std::vector<std::string> tokens = split_whitespace(rule.body);
  if (tokens.empty()) fail(ErrorCode::kBadPattern, rule.id + ": empty body");
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string tok = tokens[i];
    bool optional = false;
    if (tok.size() > 1 && tok.back() == '?') {
      optional = true;
      tok.pop_back();
    }
    if (optional && i == 0) fail(ErrorCode::kBadPattern, rule.id + ": first token optional");
    std::string piece;
    if (tok.size() > 2 && tok.front() == '{' && tok.back() == '}') {
      piece = token_class(std::string_view(tok).substr(1, tok.size() - 2), tables, rule.id);
    } else {
      piece = "(?:";
      std::size_t start = 0;
      bool first = true;
      while (start <= tok.size()) {
        std::size_t bar = tok.find('|', start);
        if (bar == std::string::npos) bar = tok.size();
        std::string alt = tok.substr(start, bar - start);
        if (alt.empty()) fail(ErrorCode::kBadPattern, rule.id + ": empty alternative");
        if (!first) piece += '|';
        piece += regex_escape(alt);
        first = false;
        start = bar + 1;
      }
      piece += ")";
    }
    if (i == 0) {
      out += piece;
    } else if (optional) {
      out += "(?: " + piece + ")?";
    } else {
      out += " " + piece;
    }
  }
  return out;
}

std::regex build_matcher(const RulePattern& rule, const LexiconTables& tables) {
  std::string body;
  if (rule.kind == PatternKind::kTokenSequence) {
    body = compile_token_sequence(rule, tables);
  } else {
    if (rule.body.empty()) fail(ErrorCode::kBadPattern, rule.id + ": empty body");
    body = rule.body;
  }
  const auto flags = std::regex::ECMAScript | std::regex::icase | std::regex::optimize;
  try {
    // Validate the body on its own first so an unbalanced body cannot pair
    // up with the wrapper's parentheses.
    std::regex check(body, flags);
    return std::regex("(?:" + body + ")" + std::string(kBoundaryLookahead), flags);
  } catch (const std::regex_error& e) {
    fail(ErrorCode::kBadPattern, rule.id + ": " + e.what());
  }
}

std::map<std::string, std::string> lower_keys(const nlohmann::json& obj, const char* name) {
  std::map<std::string, std::string> out;
  if (obj.is_null()) return out;
  if (!obj.is_object()) fail(ErrorCode::kMalformedFile, std::string(name) + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!it.value().is_string()) {
      fail(ErrorCode::kMalformedFile, std::string(name) + "." + it.key() + " must be a string");
    }
    std::string key;
    for (const std::string& w : split_whitespace(to_lower_ascii(it.key()))) {
      if (!key.empty()) key += ' ';
      key += w;
    }
    if (key.empty()) fail(ErrorCode::kMalformedFile, std::string(name) + " has an empty key");
    out[key] = it.value().get<std::string>();
  }
  return out;
}

// Whitespace-collapsed copy of the text plus the original byte index of each
// kept character.
struct NormalizedText {
  std::string text;
  std::vector<std::size_t> source;
};

NormalizedText normalize_whitespace(std::string_view text) {
  NormalizedText out;
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.text.empty();
      continue;
    }
    if (pending_space) {
      out.text += ' ';
      out.source.push_back(i - 1);
      pending_space = false;
    }
    out.text += c;
    out.source.push_back(i);
  }
  return out;
}

struct Candidate {
  std::size_t start;  // normalized offsets
  std::size_t end;
  std::size_t rule;
  int priority;
};

}  // namespace

std::string_view to_string(EntityLabel label) {
  switch (label) {
    case EntityLabel::kCallsign: return "CALLSIGN";
    case EntityLabel::kAcState: return "ACSTATE";
    case EntityLabel::kDestination: return "DESTINATION";
  }
  return "CALLSIGN";
}

std::optional<EntityLabel> parse_label(std::string_view name) {
  for (EntityLabel l : kAllLabels) {
    if (to_string(l) == name) return l;
  }
  return std::nullopt;
}

RuleSet::RuleSet(std::vector<RulePattern> patterns, LexiconTables tables)
    : patterns_(std::move(patterns)), tables_(std::move(tables)) {
  std::set<std::string> seen;
  matchers_.reserve(patterns_.size());
  for (const RulePattern& rule : patterns_) {
    if (rule.id.empty()) fail(ErrorCode::kMalformedFile, "rule with empty id");
    if (!seen.insert(rule.id).second) fail(ErrorCode::kDuplicateId, rule.id);
    if (rule.priority < 0) fail(ErrorCode::kMalformedFile, rule.id + ": negative priority");
    matchers_.push_back(build_matcher(rule, tables_));
  }
}

std::array<std::size_t, 3> RuleSet::counts_by_label() const {
  std::array<std::size_t, 3> counts{};
  for (const RulePattern& r : patterns_) ++counts[static_cast<std::size_t>(r.label)];
  return counts;
}

std::vector<RulePattern> parse_rules_json(const nlohmann::json& doc) {
  if (!doc.is_array()) fail(ErrorCode::kMalformedFile, "rules file must be a JSON array");
  std::vector<RulePattern> rules;
  for (const auto& item : doc) {
    try {
      RulePattern r;
      r.id = item.at("id").get<std::string>();
      const std::string label = item.at("label").get<std::string>();
      auto parsed = parse_label(label);
      if (!parsed) fail(ErrorCode::kMalformedFile, r.id + ": unknown label " + label);
      r.label = *parsed;
      const std::string kind = item.at("kind").get<std::string>();
      if (kind == "TOKEN_SEQUENCE") {
        r.kind = PatternKind::kTokenSequence;
      } else if (kind == "REGULAR_EXPRESSION") {
        r.kind = PatternKind::kRegularExpression;
      } else {
        fail(ErrorCode::kMalformedFile, r.id + ": unknown kind " + kind);
      }
      r.body = item.at("body").get<std::string>();
      r.priority = item.value("priority", 0);
      rules.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kMalformedFile, std::string("rule entry: ") + e.what());
    }
  }
  return rules;
}

nlohmann::json rules_to_json(const std::vector<RulePattern>& rules) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const RulePattern& r : rules) {
    nlohmann::ordered_json item;
    item["id"] = r.id;
    item["label"] = std::string(to_string(r.label));
    item["kind"] = r.kind == PatternKind::kTokenSequence ? "TOKEN_SEQUENCE" : "REGULAR_EXPRESSION";
    item["body"] = r.body;
    item["priority"] = r.priority;
    out.push_back(std::move(item));
  }
  return nlohmann::json::parse(out.dump());
}

LexiconTables parse_tables_json(const nlohmann::json& doc) {
  if (!doc.is_object()) fail(ErrorCode::kMalformedFile, "tables file must be a JSON object");
  LexiconTables t;
  t.telephony = lower_keys(doc.contains("telephony") ? doc["telephony"] : nlohmann::json(), "telephony");
  t.phonetic = lower_keys(doc.contains("phonetic") ? doc["phonetic"] : nlohmann::json(), "phonetic");
  t.numbers = lower_keys(doc.contains("numbers") ? doc["numbers"] : nlohmann::json(), "numbers");
  return t;
}

LexiconTables load_tables(const std::filesystem::path& tables_file) {
  return parse_tables_json(read_json_file(tables_file));
}

RuleSet compile_ruleset(const std::filesystem::path& rules_file, LexiconTables tables) {
  return RuleSet(parse_rules_json(read_json_file(rules_file)), std::move(tables));
}

LexiconTables bundled_tables() {
  return parse_tables_json(nlohmann::json::parse(kBundledTablesJson));
}

RuleSet bundled_ruleset() {
  return RuleSet(parse_rules_json(nlohmann::json::parse(kBundledRulesJson)), bundled_tables());
}

std::vector<EntitySpan> match_rules(const RuleSet& rules, std::string_view text) {
  const NormalizedText norm = normalize_whitespace(text);
  const std::string& s = norm.text;
  std::vector<Candidate> candidates;
  for (std::size_t p = 0; p < s.size(); ++p) {
    if (!is_word_char(s[p]) || (p > 0 && is_word_char(s[p - 1]))) continue;
    auto flags = std::regex_constants::match_continuous;
    if (p > 0) flags |= std::regex_constants::match_prev_avail;
    for (std::size_t r = 0; r < rules.size(); ++r) {
      std::smatch m;
      if (std::regex_search(s.cbegin() + static_cast<std::ptrdiff_t>(p), s.cend(), m,
                            rules.matcher(r), flags) &&
          m.length(0) > 0) {
        candidates.push_back({p, p + static_cast<std::size_t>(m.length(0)), r,
                              rules.patterns()[r].priority});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    const std::size_t la = a.end - a.start;
    const std::size_t lb = b.end - b.start;
    return std::tie(lb, b.priority, a.rule, a.start) < std::tie(la, a.priority, b.rule, b.start);
  });

  std::vector<Candidate> accepted;
  for (const Candidate& c : candidates) {
    bool clash = std::any_of(accepted.begin(), accepted.end(), [&](const Candidate& a) {
      return c.start < a.end && a.start < c.end;
    });
    if (!clash) accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Candidate& a, const Candidate& b) { return a.start < b.start; });

  std::vector<EntitySpan> out;
  out.reserve(accepted.size());
  for (const Candidate& c : accepted) {
    EntitySpan span;
    span.start = norm.source[c.start];
    span.end = norm.source[c.end - 1] + 1;
    span.label = rules.patterns()[c.rule].label;
    span.surface = std::string(text.substr(span.start, span.end - span.start));
    span.source = SpanSource::kRule;
    span.rule_id = rules.patterns()[c.rule].id;
    if (span.label == EntityLabel::kCallsign) {
      span.normalized = normalize_callsign_text(span.surface, rules.tables());
    }
    out.push_back(std::move(span));
  }
  return out;
}

std::string digits_from_words(std::string_view text, const LexiconTables& tables) {
  std::string out;
  for (const std::string& tok : split_whitespace(text)) {
    if (!out.empty()) out += ' ';
    auto it = tables.numbers.find(to_lower_ascii(tok));
    out += it != tables.numbers.end() ? it->second : tok;
  }
  return out;
}

std::string normalize_callsign_text(std::string_view surface, const LexiconTables& tables) {
  const std::vector<std::string> tokens = split_whitespace(surface);
  std::vector<std::string> lower;
  lower.reserve(tokens.size());
  for (const std::string& t : tokens) lower.push_back(to_lower_ascii(t));

  std::string out;
  std::size_t consumed = 0;
  for (const auto& [key, code] : tables.telephony) {
    const std::vector<std::string> key_tokens = split_whitespace(key);
    if (key_tokens.size() <= consumed || key_tokens.size() > lower.size()) continue;
    if (std::equal(key_tokens.begin(), key_tokens.end(), lower.begin())) {
      consumed = key_tokens.size();
      out = code;
    }
  }
  for (std::size_t i = consumed; i < tokens.size(); ++i) {
    auto it = tables.numbers.find(lower[i]);
    out += it != tables.numbers.end() ? it->second : tokens[i];
  }
  return out;
}

std::string normalize_callsign(const EntitySpan& span, const RuleSet& rules) {
  if (span.label != EntityLabel::kCallsign) {
    fail(ErrorCode::kWrongLabel, "span '" + span.surface + "' is " + std::string(to_string(span.label)));
  }
  return normalize_callsign_text(span.surface, rules.tables());
}

}  // namespace taxisentinel
