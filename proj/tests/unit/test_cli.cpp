#include <doctest.h>

#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "taxisentinel/stats_fit.hpp"
#include "taxisentinel/text_util.hpp"
#include "test_paths.hpp"

using testing_support::fixture;
using testing_support::run_cli;
using testing_support::scratch_dir;
using testing_support::slurp;

namespace {

std::string f(const char* rel) { return fixture(rel).string(); }

std::string error_name(const std::string& err) {
  return nlohmann::json::parse(err.substr(err.rfind('{'))).at("error").get<std::string>();
}

}  // namespace

TEST_CASE("usage errors") {
  const auto dir = scratch_dir("cli_usage");
  auto r = run_cli({}, dir);
  CHECK(r.exit_code == 1);
  CHECK(error_name(r.err) == "USAGE");
  r = run_cli({"extract", "--out", (dir / "x").string()}, dir);
  CHECK(r.exit_code == 1);
  r = run_cli({"stats", "--samples", f("stats/weight_class_samples.csv"), "--test", "chi2"}, dir);
  CHECK(r.exit_code == 1);
  r = run_cli({"--help"}, dir);
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("extract") != std::string::npos);
}

TEST_CASE("extract") {
  const auto dir = scratch_dir("cli_extract");
  SUBCASE("empty transcript") {
    const auto r = run_cli({"extract", "--transcript", f("transcripts/empty.jsonl"), "--out", (dir / "o").string()},
                           dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out == "0 rows, 0 skipped\n");
    CHECK(slurp(dir / "o" / "info_table.json").find("[]") != std::string::npos);
  }
  SUBCASE("missing rule file") {
    const auto r = run_cli({"extract", "--rules", (dir / "nope.json").string(), "--transcript",
                            f("transcripts/haneda.jsonl"), "--out", (dir / "o").string()},
                           dir);
    CHECK(r.exit_code == 1);
    CHECK(error_name(r.err) == "IO_ERROR");
  }
  SUBCASE("bad pattern") {
    taxisentinel::write_text_file(dir / "bad.json", R"([{"id":"x","label":"CALLSIGN","kind":"REGULAR_EXPRESSION","body":"(unclosed","priority":1}])");
    const auto r = run_cli({"extract", "--rules", (dir / "bad.json").string(), "--transcript",
                            f("transcripts/haneda.jsonl"), "--out", (dir / "o").string()},
                           dir);
    CHECK(r.exit_code == 1);
  }
  SUBCASE("haneda") {
    const auto r = run_cli({"extract", "--transcript", f("transcripts/haneda.jsonl"), "--graph",
                            f("graphs/haneda.json"), "--out", (dir / "o").string()},
                           dir);
    CHECK(r.exit_code == 0);
    const auto rows = nlohmann::json::parse(slurp(dir / "o" / "info_table.json"));
    CHECK(rows.size() >= 13);
    CHECK(slurp(dir / "o" / "info_table.csv").rfind("TIME,", 0) == 0);
  }
}

TEST_CASE("eval") {
  const auto dir = scratch_dir("cli_eval");
  auto r = run_cli({"eval", "--gold", f("ner/gold.json"), "--pred", f("ner/gold.json")}, dir);
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["external"]["f1"] == 1.0);
  CHECK(j["external"]["fp"] == 0);

  r = run_cli({"eval", "--gold", f("ner/gold.json"), "--pred", f("ner/external_degraded.json"), "--rules", "bundled",
               "--split", "train=" + f("ner/train.json")},
              dir);
  REQUIRE(r.exit_code == 0);
  j = nlohmann::json::parse(r.out);
  CHECK(j["merged"]["f1"].get<double>() > j["external"]["f1"].get<double>());
  CHECK(j["corpus"][0]["split"] == "train");

  r = run_cli({"eval", "--gold", f("ner/gold.json"), "--pred", f("ner/train.json")}, dir);
  CHECK(r.exit_code == 1);
  CHECK(error_name(r.err) == "LENGTH_MISMATCH");
  r = run_cli({"eval"}, dir);
  CHECK(r.exit_code == 1);
}

TEST_CASE("plan") {
  const auto dir = scratch_dir("cli_plan");
  auto r = run_cli({"plan", "--graph", f("graphs/katl.json"), "--from", "Gate_A10", "--to", "Rwy_02_001"}, dir);
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["nodes"].front() == "Gate_A10");
  CHECK(j["nodes"].back() == "Rwy_02_001");
  r = run_cli({"plan", "--graph", f("graphs/katl.json"), "--from", "Nowhere", "--to", "Rwy_02_001"}, dir);
  CHECK(r.exit_code == 1);
  CHECK(error_name(r.err) == "UNKNOWN_NODE");
}

TEST_CASE("risk") {
  const auto dir = scratch_dir("cli_risk");
  SUBCASE("scenario") {
    const auto r = run_cli({"risk", "--scenario", f("scenarios/haneda_case.json"), "--out", (dir / "o").string()}, dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out == "Rwy_03_006\n");
    CHECK(std::filesystem::exists(dir / "o" / "risk_map.json"));
    CHECK(std::filesystem::exists(dir / "o" / "risk_map.csv"));
  }
  SUBCASE("disjoint plans") {
    const auto r = run_cli({"risk", "--scenario", f("scenarios/disjoint.json"), "--out", (dir / "o").string()}, dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out == "none\n");
    CHECK(r.err.find("warning") != std::string::npos);
  }
  SUBCASE("unresolved destination") {
    // A table row whose destination did not link to a node.
    taxisentinel::write_text_file(dir / "table.json", R"([
      {"time":"17:45:19","time_seconds":63919,"callsign":"JAL516","callsign_surface":"Japan Air 516",
       "ac_state":"","dest_runway":"","runway_explicit":false,"destination":"spot nine nine",
       "destination_raw":"spot nine nine","dest_node":null,"remarks":""},
      {"time":"17:45:20","time_seconds":63920,"callsign":"JA722A","callsign_surface":"JA722A",
       "ac_state":"","dest_runway":"","runway_explicit":false,"destination":"C5",
       "destination_raw":"C5","dest_node":"Txy_C5_C5B","remarks":""}])");
    const auto r = run_cli({"risk", "--table", (dir / "table.json").string(), "--graph", f("graphs/haneda.json"),
                            "--origin", "JAL516=App_34R_003", "--origin", "JA722A=Ramp_CG", "--out",
                            (dir / "o").string()},
                           dir);
    CHECK(r.exit_code == 2);
    CHECK(error_name(r.err) == "UNRESOLVED_DESTINATION");
  }
  SUBCASE("bad r_c") {
    const auto r = run_cli({"risk", "--scenario", f("scenarios/haneda_case.json"), "--r-c", "-1", "--out",
                            (dir / "o").string()},
                           dir);
    CHECK(r.exit_code == 1);
  }
}

TEST_CASE("simulate") {
  const auto dir = scratch_dir("cli_sim");
  const auto r = run_cli({"simulate", "--scenario", f("scenarios/katl_case.json"), "--step", "5", "--out",
                          (dir / "o").string()},
                         dir);
  REQUIRE(r.exit_code == 0);
  const std::string jsonl = slurp(dir / "o" / "frames.jsonl");
  const auto lines = std::count(jsonl.begin(), jsonl.end(), '\n');
  CHECK(r.out == std::to_string(lines) + " frames\n");
  CHECK(lines > 1);
}

TEST_CASE("fit and stats") {
  const auto dir = scratch_dir("cli_fit");
  auto r = run_cli({"fit", "--tracks", f("tracks/katl_taxiway_e.csv"), "--graph", f("graphs/katl.json"), "--out",
                    (dir / "o").string()},
                   dir);
  REQUIRE(r.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "o" / "fits.json"));
  CHECK(std::filesystem::exists(dir / "o" / "speed_samples.csv"));

  r = run_cli({"stats", "--samples", f("stats/weight_class_samples.csv"), "--test", "anova", "--link",
               "Txy_E_004->Txy_E_003"},
              dir);
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 1);

  const auto samples = taxisentinel::parse_speed_samples_csv(
      taxisentinel::read_text_file(fixture("stats/weight_class_samples.csv")));
  std::map<taxisentinel::WeightClass, std::vector<double>> by;
  for (const auto& s : samples) {
    if (s.link_id == "Txy_E_004->Txy_E_003") by[*s.weight_class].push_back(s.speed);
  }
  std::vector<std::vector<double>> groups;
  for (auto& [w, v] : by) groups.push_back(v);
  const auto expected = taxisentinel::anova_f(groups);
  CHECK(j[0]["statistic"].get<double>() == doctest::Approx(expected.statistic).epsilon(1e-12));
  CHECK(j[0]["p_value"].get<double>() == doctest::Approx(expected.p_value).epsilon(1e-12));

  taxisentinel::write_text_file(dir / "tied.csv", "link,timestamp,speed,weight_class\nL,0,5,SMALL\nL,1,5,SMALL\nL,2,5,HEAVY\nL,3,5,HEAVY\n");
  r = run_cli({"stats", "--samples", (dir / "tied.csv").string(), "--test", "kw"}, dir);
  CHECK(r.exit_code == 2);
  CHECK(error_name(r.err) == "ALL_TIED");
}

TEST_CASE("rules-check") {
  const auto dir = scratch_dir("cli_rules");
  const auto r = run_cli({"rules-check", "--text", "Japan Air 516 runway 34R cleared to land"}, dir);
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(!j.empty());
}
