// taxi_sentinel: transcript extraction, taxi planning and collision risk.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_errors.hpp"
#include "taxisentinel/airport_graph.hpp"
#include "taxisentinel/collision_risk.hpp"
#include "taxisentinel/error.hpp"
#include "taxisentinel/montecarlo.hpp"
#include "taxisentinel/ner_eval.hpp"
#include "taxisentinel/phraseology.hpp"
#include "taxisentinel/stats_fit.hpp"
#include "taxisentinel/text_util.hpp"
#include "taxisentinel/transcript.hpp"

namespace fs = std::filesystem;
namespace ts = taxisentinel;
using nlohmann::ordered_json;

namespace {

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) ts::fail(ts::ErrorCode::kIo, std::string(what) + " not found: " + path);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) ts::fail(ts::ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// "CALLSIGN=VALUE"
std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
    ts::fail(ts::ErrorCode::kInvalidArgument, "expected CALLSIGN=VALUE, got '" + s + "'");
  }
  return {s.substr(0, eq), s.substr(eq + 1)};
}

ts::RuleSet load_rules(const std::string& rules, const std::string& tables) {
  ts::LexiconTables lex = ts::bundled_tables();
  if (!tables.empty()) {
    require_file(tables, "tables file");
    lex = ts::load_tables(tables);
  }
  if (rules.empty()) return ts::RuleSet(ts::bundled_ruleset().patterns(), lex);
  require_file(rules, "rules file");
  return ts::compile_ruleset(rules, lex);
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
  std::string rules, tables, transcript, external, graph, out;
};

int cmd_extract(const ExtractArgs& a) {
  ts::RuleSet rules = load_rules(a.rules, a.tables);
  require_file(a.transcript, "transcript");
  const auto transcript = ts::load_transcript(a.transcript);

  std::vector<std::vector<ts::EntitySpan>> external;
  if (!a.external.empty()) {
    require_file(a.external, "external predictions");
    const auto preds = ts::load_annotated(a.external, ts::SpanSource::kExternal);
    if (preds.size() != transcript.size()) {
      ts::fail(ts::ErrorCode::kLengthMismatch, "external predictions must align with transcript lines");
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].text != transcript[i].text) {
        ts::fail(ts::ErrorCode::kLengthMismatch, "external prediction text differs at line " + std::to_string(i + 1));
      }
      external.push_back(preds[i].gold);
    }
  }
  std::optional<ts::AirportGraph> graph;
  if (!a.graph.empty()) {
    require_file(a.graph, "graph");
    graph = ts::load_graph(a.graph);
  }

  ts::InfoTable table = ts::build_info_table(transcript, rules, a.external.empty() ? nullptr : &external,
                                             graph ? &*graph : nullptr);
  const auto rows = ts::carry_forward(std::move(table.rows));

  const fs::path out(a.out);
  ensure_dir(out);
  ts::write_text_file(out / "info_table.csv", ts::info_table_csv(rows));
  ts::write_text_file(out / "info_table.json", dump(ts::info_table_json(rows)));
  ts::write_text_file(out / "skipped.json", dump(ts::skip_report_json(table.skipped)));
  std::cout << rows.size() << " rows, " << table.skipped.size() << " skipped\n";
  return ts::cli::kExitOk;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
  std::string gold, pred, rules, tables;
  std::vector<std::string> splits;
};

int cmd_eval(const EvalArgs& a) {
  ordered_json out;
  if (!a.gold.empty()) {
    if (a.pred.empty()) ts::fail(ts::ErrorCode::kInvalidArgument, "--pred is required with --gold");
    require_file(a.gold, "gold file");
    require_file(a.pred, "prediction file");
    const auto gold = ts::load_annotated(a.gold, ts::SpanSource::kExternal);
    const auto pred = ts::load_annotated(a.pred, ts::SpanSource::kExternal);
    if (gold.size() != pred.size()) {
      ts::fail(ts::ErrorCode::kLengthMismatch, "gold and prediction files differ in length");
    }
    std::vector<std::vector<ts::EntitySpan>> predicted;
    predicted.reserve(pred.size());
    for (const auto& u : pred) predicted.push_back(u.gold);
    out["external"] = ts::metrics_to_json(ts::score(gold, predicted));
    if (!a.rules.empty()) {
      const ts::RuleSet rules = load_rules(a.rules == "bundled" ? std::string() : a.rules, a.tables);
      std::vector<std::vector<ts::EntitySpan>> merged;
      merged.reserve(pred.size());
      for (std::size_t i = 0; i < pred.size(); ++i) {
        merged.push_back(ts::merge_override(predicted[i], ts::match_rules(rules, gold[i].text)));
      }
      out["merged"] = ts::metrics_to_json(ts::score(gold, merged));
    }
  }
  if (!a.splits.empty()) {
    std::vector<std::pair<std::string, std::vector<ts::AnnotatedUtterance>>> splits;
    for (const std::string& s : a.splits) {
      auto [name, path] = split_assignment(s);
      require_file(path, "split file");
      splits.emplace_back(name, ts::load_annotated(path, ts::SpanSource::kExternal));
    }
    ordered_json arr = ordered_json::array();
    for (const ts::SplitStats& st : ts::corpus_stats(splits)) {
      ordered_json j;
      j["split"] = st.name;
      for (ts::EntityLabel l : ts::kAllLabels) {
        const auto i = static_cast<std::size_t>(l);
        j[std::string(ts::to_string(l))] = {{"count", st.counts[i]}, {"percent", st.percent[i]}};
      }
      j["total"] = st.total;
      arr.push_back(std::move(j));
    }
    out["corpus"] = std::move(arr);
  }
  if (out.empty()) ts::fail(ts::ErrorCode::kInvalidArgument, "nothing to evaluate: give --gold/--pred or --split");
  std::cout << dump(out);
  return ts::cli::kExitOk;
}

// ------------------------------------------------------------------- plan

struct PlanArgs {
  std::string graph, from, to, callsign, out;
  std::vector<std::string> via;
  double start = 0.0;
};

int cmd_plan(const PlanArgs& a) {
  require_file(a.graph, "graph");
  const ts::AirportGraph graph = ts::load_graph(a.graph);
  const ts::TaxiPlan plan = ts::shortest_taxi_plan(graph, a.from, a.to, a.via, a.start, a.callsign);
  const std::string text = dump(ts::plan_to_json(graph, plan));
  if (a.out.empty()) {
    std::cout << text;
  } else {
    ts::write_text_file(a.out, text);
  }
  return ts::cli::kExitOk;
}

// ------------------------------------------------------------------- risk

struct RiskArgs {
  std::string scenario, table, graph, out, oracle_spot;
  std::vector<std::string> origins, thens, starts;
  std::optional<double> r_c;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
};

// Latest row of the callsign that names a destination.
const ordered_json* latest_destination(const ordered_json& table, const std::string& callsign) {
  const ordered_json* found = nullptr;
  for (const auto& row : table) {
    if (row.value("callsign", std::string()) != callsign) continue;
    if (!row.value("destination", std::string()).empty()) found = &row;
  }
  return found;
}

std::vector<ts::TaxiPlan> plans_from_table(const RiskArgs& a, const ts::AirportGraph& graph) {
  require_file(a.table, "info table");
  const nlohmann::json raw = ts::read_json_file(a.table);
  const ordered_json table = ordered_json::parse(raw.dump());
  if (!table.is_array()) ts::fail(ts::ErrorCode::kMalformedFile, "info table must be a JSON array");
  if (a.origins.size() != 2) {
    ts::fail(ts::ErrorCode::kInvalidArgument, "table mode needs exactly two --origin CALLSIGN=NODE");
  }
  std::map<std::string, std::string> thens;
  for (const auto& s : a.thens) thens.insert(split_assignment(s));
  std::map<std::string, double> starts;
  for (const auto& s : a.starts) {
    auto [cs, v] = split_assignment(s);
    starts[cs] = ts::parse_clock(v);
  }

  std::vector<ts::TaxiPlan> plans;
  for (const std::string& o : a.origins) {
    const auto [callsign, origin] = split_assignment(o);
    const ordered_json* row = latest_destination(table, callsign);
    if (row == nullptr) ts::fail(ts::ErrorCode::kUnresolvedDestination, callsign + ": no destination in table");
    const auto& node = (*row)["dest_node"];
    if (!node.is_string()) {
      ts::fail(ts::ErrorCode::kUnresolvedDestination,
               callsign + ": '" + row->value("destination", std::string()) + "' matches no node");
    }
    const std::string dest = node.get<std::string>();
    double start = row->value("time_seconds", 0.0);
    if (auto it = starts.find(callsign); it != starts.end()) start = it->second;
    if (auto it = thens.find(callsign); it != thens.end()) {
      plans.push_back(ts::shortest_taxi_plan(graph, origin, it->second, {dest}, start, callsign));
    } else {
      plans.push_back(ts::shortest_taxi_plan(graph, origin, dest, {}, start, callsign));
    }
  }
  return plans;
}

int cmd_risk(const RiskArgs& a) {
  std::optional<ts::Scenario> scenario;
  std::vector<ts::TaxiPlan> plans;
  ts::AirportGraph graph;
  double r_c = 32.5;
  const bool table_mode = a.scenario.empty();
  if (!table_mode) {
    require_file(a.scenario, "scenario");
    scenario = ts::load_scenario(a.scenario);
    graph = scenario->graph;
    plans = scenario->plans;
    r_c = scenario->config.r_c;
  } else {
    if (a.table.empty() || a.graph.empty()) {
      ts::fail(ts::ErrorCode::kInvalidArgument, "give --scenario, or --table with --graph");
    }
    require_file(a.graph, "graph");
    graph = ts::load_graph(a.graph);
    plans = plans_from_table(a, graph);
  }
  if (a.r_c) r_c = *a.r_c;
  if (plans.size() < 2) ts::fail(ts::ErrorCode::kInvalidArgument, "need two aircraft");

  const ts::RiskMap map = ts::risk_map(plans[0], plans[1], graph, r_c);
  for (const std::string& w : map.warnings) ts::cli::report_warning(w);
  if (map.scores.empty()) {
    if (table_mode) ts::fail(ts::ErrorCode::kEmptyOverlap, plans[0].callsign + " and " + plans[1].callsign);
    ts::cli::report_warning("plans share no node; risk map is empty");
  }

  const fs::path out(a.out);
  ensure_dir(out);
  ts::write_text_file(out / "risk_map.json", dump(ts::risk_map_json(map)));
  ts::write_text_file(out / "risk_map.csv", ts::risk_map_csv(map, graph));
  if (graph.geodetic()) ts::write_text_file(out / "risk_map.geojson", dump(ts::risk_map_geojson(map, graph)));
  ordered_json plan_json = ordered_json::array();
  for (const auto& p : plans) plan_json.push_back(ts::plan_to_json(graph, p));
  ts::write_text_file(out / "plans.json", dump(plan_json));

  if (!a.oracle_spot.empty()) {
    if (!scenario) {
      ts::ScenarioConfig config;
      config.r_c = r_c;
      for (const auto& p : plans) config.aircraft.push_back({p.callsign, p.nodes, p.start_time});
      scenario = ts::make_scenario(std::move(config), graph);
    }
    scenario->config.r_c = r_c;
    if (a.seed) scenario->config.seed = *a.seed;
    if (a.samples) scenario->config.samples = *a.samples;
    const ts::OracleEstimate est = ts::mc_collision_oracle(*scenario, a.oracle_spot);
    ordered_json j;
    j["spot"] = a.oracle_spot;
    j["p_hat"] = est.p_hat;
    j["standard_error"] = est.standard_error;
    j["hits"] = est.hits;
    j["samples"] = est.samples;
    j["seed"] = scenario->config.seed;
    ts::write_text_file(out / "oracle.json", dump(j));
  }

  const std::size_t best = map.argmax();
  std::cout << (map.scores.empty() ? std::string("none") : map.scores[best].node) << '\n';
  return ts::cli::kExitOk;
}

// --------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scenario, out;
  double step = 1.0;
  std::size_t sample = 0;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a) {
  require_file(a.scenario, "scenario");
  ts::Scenario scenario = ts::load_scenario(a.scenario);
  if (a.seed) scenario.config.seed = *a.seed;
  const auto frames = ts::replay(scenario, a.sample, a.step);
  const fs::path out(a.out);
  ensure_dir(out);
  ts::write_text_file(out / "frames.jsonl", ts::frames_jsonl(frames, scenario));
  ts::write_text_file(out / "frames.csv", ts::frames_csv(frames));
  std::cout << frames.size() << " frames\n";
  return ts::cli::kExitOk;
}

// -------------------------------------------------------------------- fit

struct FitArgs {
  std::string tracks, graph, out;
  std::size_t min_samples = 5;
  double cutoff = 0.5;
  double gate = 50.0;
};

int cmd_fit(const FitArgs& a) {
  require_file(a.tracks, "tracks");
  require_file(a.graph, "graph");
  const ts::AirportGraph graph = ts::load_graph(a.graph);
  ts::ExtractOptions options;
  options.stationary_cutoff = a.cutoff;
  options.max_distance = a.gate;
  const auto samples = ts::link_speed_extract(ts::load_tracks(a.tracks), graph, options);
  const auto reports = ts::fit_links(samples, a.min_samples);
  const fs::path out(a.out);
  ensure_dir(out);
  ts::write_text_file(out / "speed_samples.csv", ts::speed_samples_csv(samples));
  ts::write_text_file(out / "fits.json", dump(ts::fit_reports_json(reports)));
  std::cout << samples.size() << " samples, " << reports.size() << " links fitted\n";
  return ts::cli::kExitOk;
}

// ------------------------------------------------------------------ stats

struct StatsArgs {
  std::string samples, group_by = "weight_class", test = "anova", link;
};

int cmd_stats(const StatsArgs& a) {
  if (a.group_by != "weight_class") {
    ts::fail(ts::ErrorCode::kInvalidArgument, "unsupported --group-by '" + a.group_by + "'");
  }
  require_file(a.samples, "samples");
  const auto samples = ts::parse_speed_samples_csv(ts::read_text_file(a.samples));

  std::map<std::string, std::map<ts::WeightClass, std::vector<double>>> by_link;
  for (const auto& s : samples) {
    if (!s.weight_class) continue;
    if (!a.link.empty() && s.link_id != a.link) continue;
    by_link[s.link_id][*s.weight_class].push_back(s.speed);
  }
  if (by_link.empty()) ts::fail(ts::ErrorCode::kTooFewSamples, "no samples with a weight class");

  ordered_json out = ordered_json::array();
  for (const auto& [link, groups] : by_link) {
    ordered_json j;
    j["link"] = link;
    j["test"] = a.test;
    ordered_json sizes;
    std::vector<std::vector<double>> values;
    for (const auto& [wc, v] : groups) {
      sizes[std::string(ts::to_string(wc))] = v.size();
      values.push_back(v);
    }
    j["groups"] = sizes;
    if (a.test == "anova" || a.test == "kw") {
      const ts::TestResult r = a.test == "anova" ? ts::anova_f(values) : ts::kruskal_wallis(values);
      j["statistic"] = r.statistic;
      j["p_value"] = r.p_value;
      j["df1"] = r.df1;
      j["df2"] = r.df2;
    } else {
      // One-sample K-S of each group against its own log-normal fit.
      ordered_json per = ordered_json::object();
      for (const auto& [wc, v] : groups) {
        const auto fit = ts::fit_lognormal(v);
        const auto ks = ts::ks_test(v, ts::Hypothesis::lognormal(fit));
        per[std::string(ts::to_string(wc))] = {{"mu_log", fit.mu_log}, {"sigma_log", fit.sigma_log},
                                               {"statistic", ks.statistic}, {"p_value", ks.p_value}};
      }
      j["ks"] = per;
    }
    out.push_back(std::move(j));
  }
  std::cout << dump(out);
  return ts::cli::kExitOk;
}

// ------------------------------------------------------------ rules-check

struct RulesCheckArgs {
  std::string rules, tables;
  std::vector<std::string> texts;
};

int cmd_rules_check(const RulesCheckArgs& a) {
  const ts::RuleSet rules = load_rules(a.rules, a.tables);
  ordered_json out;
  out["rules"] = rules.size();
  const auto counts = rules.counts_by_label();
  for (ts::EntityLabel l : ts::kAllLabels) {
    out[std::string(ts::to_string(l))] = counts[static_cast<std::size_t>(l)];
  }
  if (!a.texts.empty()) {
    ordered_json matches = ordered_json::array();
    for (const std::string& text : a.texts) {
      ordered_json spans = ordered_json::array();
      for (const ts::EntitySpan& s : ts::match_rules(rules, text)) {
        ordered_json j;
        j["start"] = ts::byte_to_char_offset(text, s.start);
        j["end"] = ts::byte_to_char_offset(text, s.end);
        j["label"] = ts::to_string(s.label);
        j["surface"] = s.surface;
        j["rule"] = s.rule_id.value_or("");
        if (s.normalized) j["normalized"] = *s.normalized;
        spans.push_back(std::move(j));
      }
      matches.push_back({{"text", text}, {"spans", spans}});
    }
    out["matches"] = std::move(matches);
  }
  std::cout << dump(out);
  return ts::cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Taxi conflict analysis from ATC transcripts"};
  app.require_subcommand(1);

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Build the information table from a transcript");
  extract->add_option("--rules", ex.rules, "Rule file (bundled rules when omitted)");
  extract->add_option("--tables", ex.tables, "Lexicon tables (bundled when omitted)");
  extract->add_option("--transcript", ex.transcript, "Transcript JSON Lines")->required();
  extract->add_option("--external-preds", ex.external, "External entity predictions");
  extract->add_option("--graph", ex.graph, "Airport graph for destination linking");
  extract->add_option("--out", ex.out, "Output directory")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score predictions against gold annotations");
  eval->add_option("--gold", ev.gold, "Gold annotations");
  eval->add_option("--pred", ev.pred, "Predicted annotations");
  eval->add_option("--rules", ev.rules, "Rule file used to override predictions ('bundled' for the defaults)");
  eval->add_option("--tables", ev.tables, "Lexicon tables");
  eval->add_option("--split", ev.splits, "NAME=FILE corpus split for entity statistics");

  PlanArgs pl;
  auto* plan = app.add_subcommand("plan", "Shortest taxi plan");
  plan->add_option("--graph", pl.graph, "Airport graph")->required();
  plan->add_option("--from", pl.from, "Origin node")->required();
  plan->add_option("--to", pl.to, "Destination node")->required();
  plan->add_option("--via", pl.via, "Intermediate nodes in order");
  plan->add_option("--start", pl.start, "Start time, seconds");
  plan->add_option("--callsign", pl.callsign, "Callsign");
  plan->add_option("--out", pl.out, "Output file (stdout when omitted)");

  RiskArgs rk;
  auto* risk = app.add_subcommand("risk", "Collision risk map for two aircraft");
  risk->add_option("--scenario", rk.scenario, "Scenario file with explicit plans");
  risk->add_option("--table", rk.table, "Information table JSON from extract");
  risk->add_option("--graph", rk.graph, "Airport graph (table mode)");
  risk->add_option("--origin", rk.origins, "CALLSIGN=NODE starting node (table mode, two required)");
  risk->add_option("--then", rk.thens, "CALLSIGN=NODE node reached after the cleared destination");
  risk->add_option("--start", rk.starts, "CALLSIGN=CLOCK start time override");
  risk->add_option("--r-c", rk.r_c, "Collision radius, meters");
  risk->add_option("--oracle-spot", rk.oracle_spot, "Also run the Monte Carlo oracle at this node");
  risk->add_option("--seed", rk.seed, "Oracle seed (scenario seed when omitted)");
  risk->add_option("--samples", rk.samples, "Oracle sample count");
  risk->add_option("--out", rk.out, "Output directory")->required();

  SimulateArgs sm;
  auto* simulate = app.add_subcommand("simulate", "Replay one sampled realization as snapshot frames");
  simulate->add_option("--scenario", sm.scenario, "Scenario file")->required();
  simulate->add_option("--step", sm.step, "Frame step, seconds")->check(CLI::PositiveNumber);
  simulate->add_option("--sample", sm.sample, "Sample index");
  simulate->add_option("--seed", sm.seed, "Seed (scenario seed when omitted)");
  simulate->add_option("--out", sm.out, "Output directory")->required();

  FitArgs ft;
  auto* fit = app.add_subcommand("fit", "Fit per-link speed distributions from surface tracks");
  fit->add_option("--tracks", ft.tracks, "Track CSV")->required();
  fit->add_option("--graph", ft.graph, "Airport graph")->required();
  fit->add_option("--min-samples", ft.min_samples, "Minimum samples per fitted link");
  fit->add_option("--stationary-cutoff", ft.cutoff, "Drop speeds below this, m/s");
  fit->add_option("--gate", ft.gate, "Map-matching distance gate, meters");
  fit->add_option("--out", ft.out, "Output directory")->required();

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Compare speed samples across weight classes");
  stats->add_option("--samples", st.samples, "Speed samples CSV")->required();
  stats->add_option("--group-by", st.group_by, "Grouping column");
  stats->add_option("--test", st.test, "anova, kw or ks")->check(CLI::IsMember({"anova", "kw", "ks"}));
  stats->add_option("--link", st.link, "Restrict to one link");

  RulesCheckArgs rc;
  auto* rules_check = app.add_subcommand("rules-check", "Compile a rule file and optionally match text");
  rules_check->add_option("--rules", rc.rules, "Rule file (bundled rules when omitted)");
  rules_check->add_option("--tables", rc.tables, "Lexicon tables");
  rules_check->add_option("--text", rc.texts, "Utterance to match");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ts::cli::report_error("USAGE", e.what());
    return ts::cli::kExitInput;
  }

  try {
    if (*extract) return cmd_extract(ex);
    if (*eval) return cmd_eval(ev);
    if (*plan) return cmd_plan(pl);
    if (*risk) return cmd_risk(rk);
    if (*simulate) return cmd_simulate(sm);
    if (*fit) return cmd_fit(ft);
    if (*stats) return cmd_stats(st);
    if (*rules_check) return cmd_rules_check(rc);
  } catch (const ts::Error& e) {
    ts::cli::report_error(ts::to_string(e.code()), e.detail());
    return ts::cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    ts::cli::report_error("INVARIANT_VIOLATION", e.what());
    return ts::cli::kExitInvariant;
  }
  return ts::cli::kExitInvariant;
}
