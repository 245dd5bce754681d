#include <doctest.h>

#include "taxisentinel/error.hpp"
#include "taxisentinel/transcript.hpp"
#include "test_paths.hpp"

using namespace taxisentinel;
using testing_support::fixture;

namespace {

Utterance utt(std::string time, std::string text) {
  Utterance u;
  u.time_text = time;
  u.time = parse_clock(time);
  u.text = std::move(text);
  return u;
}

InfoRow row(double t, std::string cs, std::optional<std::string> rwy) {
  InfoRow r;
  r.time = t;
  r.callsign = std::move(cs);
  r.dest_runway = std::move(rwy);
  r.runway_explicit = r.dest_runway.has_value();
  return r;
}

}  // namespace

TEST_CASE("clock parsing") {
  CHECK(parse_clock("17:45:11") == 17 * 3600 + 45 * 60 + 11);
  CHECK(parse_clock("0:08") == 8);
  CHECK(parse_clock("2:10") == 130);
  CHECK_THROWS_AS(parse_clock("17h45"), Error);
  CHECK_THROWS_AS(parse_clock("1:75"), Error);
}

TEST_CASE("transcript loading") {
  const auto t = parse_transcript_jsonl(
      "{\"time\":\"0:08\",\"speaker\":\"GND\",\"text\":\"a\"}\n\n{\"time\":\"0:08\",\"text\":\"b\"}\n");
  REQUIRE(t.size() == 2);
  CHECK(t[0].speaker == "GND");
  CHECK(t[1].speaker.empty());
  CHECK(parse_transcript_jsonl("").empty());
  try {
    (void)parse_transcript_jsonl("{\"time\":\"0:09\",\"text\":\"a\"}\n{\"time\":\"0:08\",\"text\":\"b\"}\n");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonMonotoneTime);
  }
  CHECK_THROWS_AS(parse_transcript_jsonl("{\"time\":\"0:08\"}\n"), Error);
  CHECK(load_transcript(fixture("transcripts/haneda.jsonl")).size() == 13);
}

TEST_CASE("runway classification") {
  const auto tables = bundled_tables();
  CHECK(classify_dest_runway("34R", tables) == "34R");
  CHECK(classify_dest_runway("runway 34R", tables) == "34R");
  CHECK(classify_dest_runway("runway 08 right", tables) == "08R");
  CHECK(classify_dest_runway("runway eight right", tables) == "08R");
  CHECK(classify_dest_runway("runway 8 right", tables) == "08R");
  CHECK(classify_dest_runway("runway two seven left", tables) == "27L");
  CHECK(classify_dest_runway("runway 9", tables) == "09");
  CHECK_FALSE(classify_dest_runway("holding point C5", tables).has_value());
  CHECK_FALSE(classify_dest_runway("runway 40", tables).has_value());
  CHECK_FALSE(classify_dest_runway("spot 5", tables).has_value());
}

TEST_CASE("one row per callsign utterance, first callsign keys the row") {
  const RuleSet rules = bundled_ruleset();
  const auto table = build_info_table({utt("17:45:11", "JA722A, Tokyo Tower, good evening, number 1, taxi to holding point C5."),
                                       utt("17:45:12", "Tokyo Tower, good evening."),
                                       utt("17:45:19", "Japan Air 516 traffic, JA722A, hold.")},
                                      rules);
  REQUIRE(table.rows.size() == 2);
  REQUIRE(table.skipped.size() == 1);
  CHECK(table.skipped[0].index == 1);
  const InfoRow& r = table.rows[0];
  CHECK(r.time_text == "17:45:11");
  CHECK(r.callsign == "JA722A");
  CHECK(r.ac_state == std::vector<std::string>{"taxi"});
  CHECK_FALSE(r.dest_runway.has_value());
  CHECK(r.destination_raw == "holding point C5");
  CHECK(r.destination_display() == "holding point C5");
  CHECK(table.rows[1].callsign == "JAL516");
  CHECK(table.rows[1].remarks == std::vector<std::string>{"JA722A"});
  CHECK(build_info_table({}, rules).rows.empty());
}

TEST_CASE("destinations link to graph nodes") {
  const RuleSet rules = bundled_ruleset();
  const AirportGraph g = load_graph(fixture("graphs/haneda.json"));
  const auto table = build_info_table({utt("17:45:11", "JA722A, taxi to holding point C5."),
                                       utt("17:45:20", "Japan Air 516, runway 34R, cleared to land.")},
                                      rules, nullptr, &g);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].destination_node == "Txy_C5_C5B");
  CHECK(table.rows[0].destination_display() == "holding point C5(Txy_C5_C5B)");
  CHECK(table.rows[1].dest_runway == "34R");
  CHECK(table.rows[1].destination_node == "Rwy_03_001");
  CHECK(table.rows[1].destination_display() == "Rwy_03_001");
}

TEST_CASE("external predictions are overridden where rules match") {
  const RuleSet rules = bundled_ruleset();
  const std::string text = "Delta 295, taxi via Romeo.";
  EntitySpan wrong;  // mislabeled callsign region
  wrong.start = 0;
  wrong.end = 9;
  wrong.label = EntityLabel::kDestination;
  wrong.surface = "Delta 295";
  wrong.source = SpanSource::kExternal;
  EntitySpan extra;  // something the rules do not know
  extra.start = 11;
  extra.end = 19;
  extra.label = EntityLabel::kAcState;
  extra.surface = "taxi via";
  extra.source = SpanSource::kExternal;
  const std::vector<std::vector<EntitySpan>> ext = {{wrong, extra}};
  const auto table = build_info_table({utt("0:08", text)}, rules, &ext);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].callsign == "DAL295");
  // "taxi" from the rules overlaps "taxi via" and wins.
  CHECK(table.rows[0].ac_state == std::vector<std::string>{"taxi"});

  const std::vector<std::vector<EntitySpan>> misaligned = {};
  CHECK_THROWS_AS(build_info_table({utt("0:08", text)}, rules, &misaligned), Error);
}

TEST_CASE("carry_forward") {
  SUBCASE("fills from the same callsign") {
    const auto t = carry_forward({row(1, "DAL295", "08R"), row(2, "DAL295", std::nullopt)});
    CHECK(t[1].dest_runway == "08R");
    CHECK_FALSE(t[1].runway_explicit);
  }
  SUBCASE("single row unchanged") {
    const auto t = carry_forward({row(1, "DAL295", std::nullopt)});
    CHECK_FALSE(t[0].dest_runway.has_value());
  }
  SUBCASE("never crosses callsigns, never overwrites") {
    const auto t = carry_forward({row(1, "DAL295", "08R"), row(2, "EDV5526", std::nullopt),
                                  row(3, "EDV5526", "26L"), row(4, "DAL295", std::nullopt),
                                  row(5, "DAL295", "09L"), row(6, "EDV5526", std::nullopt)});
    CHECK_FALSE(t[1].dest_runway.has_value());
    CHECK(t[2].dest_runway == "26L");
    CHECK(t[3].dest_runway == "08R");
    CHECK(t[4].dest_runway == "09L");
    CHECK(t[5].dest_runway == "26L");
  }
  SUBCASE("idempotent") {
    const auto once = carry_forward({row(1, "A", "16L"), row(2, "B", std::nullopt), row(3, "A", std::nullopt)});
    const auto twice = carry_forward(once);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(once[i].dest_runway == twice[i].dest_runway);
      CHECK(once[i].runway_explicit == twice[i].runway_explicit);
    }
  }
}

TEST_CASE("csv output") {
  InfoRow r = row(0, "JAL516", "34R");
  r.time_text = "17:43:02";
  r.ac_state = {"approach", "departure"};
  r.destination_node = "Rwy_03_001";
  const std::string csv = info_table_csv({r});
  CHECK(csv ==
        "TIME,CALLSIGN,ACSTATE,DEST_RUNWAY,DESTINATION,DEST_NODE\r\n"
        "17:43:02,JAL516,\"approach,departure\",34R,Rwy_03_001,Rwy_03_001\r\n");
  const auto j = info_table_json({r});
  CHECK(j[0]["callsign"] == "JAL516");
  CHECK(j[0]["ac_state"].size() == 2);
}
