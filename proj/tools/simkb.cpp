// Copyright 2026 The simkb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// simkb command-line tool.
//
// Exit codes: 0 ok, 1 user error (bad input, missing prerequisite, bad
// flags), 2 internal error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "simkb/simkb.hpp"

namespace {

using simkb::Error;
using json = nlohmann::ordered_json;

struct Globals {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<unsigned> jobs;
  std::vector<std::string> overrides;
  std::string out_dir;
};

simkb::PipelineConfig make_config(const Globals& g) {
  simkb::PipelineConfig c = g.config.empty() ? simkb::PipelineConfig{} : simkb::PipelineConfig::load(g.config);
  for (const auto& kv : g.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) c.seed = *g.seed;
  if (g.jobs) c.jobs = std::max(1u, *g.jobs);
  if (!g.out_dir.empty()) c.output_dir = g.out_dir;
  return c;
}

json answers_json(const std::vector<simkb::RankedAnswer>& xs, bool explain) {
  json arr = json::array();
  for (size_t i = 0; i < xs.size(); ++i) {
    json a = {{"rank", i + 1}, {"answer", xs[i].answer}, {"score", xs[i].score}};
    if (explain) {
      json cs = json::array();
      for (const auto& c : xs[i].contributions)
        cs.push_back({{"topic", c.topic},
                      {"frequency", c.frequency},
                      {"plausibility", c.plausibility},
                      {"typicality", c.typicality},
                      {"term", c.term}});
      a["contributions"] = cs;
    }
    arr.push_back(a);
  }
  return arr;
}

void print_answers(const std::vector<simkb::RankedAnswer>& xs, bool explain) {
  if (explain) {
    std::cout << answers_json(xs, true).dump(2) << '\n';
    return;
  }
  for (size_t i = 0; i < xs.size(); ++i)
    std::cout << i + 1 << '\t' << xs[i].answer << '\t' << simkb::format_double(xs[i].score) << '\n';
}

std::vector<std::string> tokens_of(std::string_view s) {
  std::vector<std::string> t;
  for (auto w : simkb::split_ws(s)) t.emplace_back(w);
  return t;
}

int run(int argc, char** argv) {
  CLI::App app{"simkb: simile knowledge base toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "root random seed");
  app.add_option("--jobs", g.jobs, "worker threads");
  app.add_option("--set", g.overrides, "config override key=value (repeatable)");
  app.add_option("--out-dir", g.out_dir, "pipeline output directory");

  // run
  auto* run_cmd = app.add_subcommand("run", "run pipeline stages (default: all enabled)");
  std::vector<std::string> stages;
  run_cmd->add_option("stages", stages, "stage names");

  // Single-stage shortcuts with path flags.
  struct StageCmd {
    CLI::App* cmd;
    simkb::Stage stage;
    std::vector<std::pair<std::string, std::string>> paths;
  };
  std::vector<StageCmd> stage_cmds;
  auto add_stage_cmd = [&](std::string name, simkb::Stage st, std::string help,
                           std::vector<std::string> keys) -> StageCmd& {
    StageCmd sc{app.add_subcommand(name, help), st, {}};
    sc.paths.reserve(keys.size());
    for (auto& k : keys) sc.paths.emplace_back(k, "");
    stage_cmds.push_back(std::move(sc));
    auto& ref = stage_cmds.back();
    for (auto& [k, v] : ref.paths) {
      std::string flag = "--" + k;
      std::replace(flag.begin(), flag.end(), '_', '-');
      ref.cmd->add_option(flag, v, k);
    }
    return ref;
  };
  stage_cmds.reserve(4);
  add_stage_cmd("extract", simkb::Stage::extract, "scan a tagged corpus for like/be candidates", {"corpus"});
  add_stage_cmd("cotrain", simkb::Stage::detect, "co-train simile classifiers over both views",
                {"corpus", "seeds"});
  add_stage_cmd("components", simkb::Stage::components, "extract topic and vehicle from parse trees",
                {"trees", "coref"});
  add_stage_cmd("properties", simkb::Stage::properties, "score properties and emit simile instances",
                {"trees", "knowledge_table", "context_table", "knowledge_url", "context_url"});

  // kb
  auto* kb_cmd = app.add_subcommand("kb", "knowledge base operations");
  kb_cmd->require_subcommand(1);
  std::string kb_in, kb_out;
  auto* kb_build = kb_cmd->add_subcommand("build", "aggregate instances into an unfinalized KB");
  kb_build->add_option("--instances", kb_in)->required()->check(CLI::ExistingFile);
  kb_build->add_option("--out", kb_out)->required();
  auto* kb_final = kb_cmd->add_subcommand("finalize", "compute typicality");
  kb_final->add_option("--kb", kb_in)->required()->check(CLI::ExistingFile);
  kb_final->add_option("--out", kb_out)->required();
  auto* kb_query = kb_cmd->add_subcommand("query", "list triplets by topic/property/vehicle");
  std::string q_topic, q_property, q_vehicle;
  kb_query->add_option("--kb", kb_in)->required()->check(CLI::ExistingFile);
  kb_query->add_option("--topic", q_topic);
  kb_query->add_option("--property", q_property);
  kb_query->add_option("--vehicle", q_vehicle);

  // inference
  std::string kb_path, topic, vehicle, property;
  size_t k = 10;
  bool explain_flag = false;
  auto* interp = app.add_subcommand("interpret", "rank properties for (topic, vehicle)");
  interp->add_option("--kb", kb_path)->required()->check(CLI::ExistingFile);
  interp->add_option("--topic", topic)->required();
  interp->add_option("--vehicle", vehicle)->required();
  interp->add_option("-k", k)->check(CLI::PositiveNumber);
  interp->add_flag("--explain", explain_flag, "JSON output with contributing triplets");
  auto* gen = app.add_subcommand("generate", "rank vehicles for (topic, property)");
  gen->add_option("--kb", kb_path)->required()->check(CLI::ExistingFile);
  gen->add_option("--topic", topic)->required();
  gen->add_option("--property", property)->required();
  gen->add_option("-k", k)->check(CLI::PositiveNumber);
  gen->add_flag("--explain", explain_flag, "JSON output with contributing triplets");
  double gamma = 2.0;
  size_t polish_k = 5;
  auto* pol = app.add_subcommand("polish", "rewrite sentences from stdin into similes");
  pol->add_option("--kb", kb_path)->required()->check(CLI::ExistingFile);
  pol->add_option("--gamma", gamma);
  pol->add_option("-k", polish_k)->check(CLI::PositiveNumber);
  pol->add_flag("--explain", explain_flag, "JSON output with alternatives");
  auto* expl = app.add_subcommand("explain", "provenance of one triplet");
  expl->add_option("--kb", kb_path)->required()->check(CLI::ExistingFile);
  expl->add_option("--topic", topic)->required();
  expl->add_option("--property", property)->required();
  expl->add_option("--vehicle", vehicle)->required();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluation metrics");
  ev->require_subcommand(1);
  std::string cases_path;
  double min_freq = 0.0;
  std::vector<size_t> ks{1, 3, 5, 10};
  auto* ev_rank = ev->add_subcommand("ranking", "MRR and Recall@k over JSON-line ranking cases");
  ev_rank->add_option("--cases", cases_path)->required()->check(CLI::ExistingFile);
  ev_rank->add_option("--min-frequency", min_freq, "keep cases with frequency above this");
  ev_rank->add_option("--k", ks);
  auto* ev_si = ev->add_subcommand("si", "interpret every case against a KB and score it");
  auto* ev_sg = ev->add_subcommand("sg", "generate for every case against a KB and score it");
  for (auto* c : {ev_si, ev_sg}) {
    c->add_option("--kb", kb_path)->required()->check(CLI::ExistingFile);
    c->add_option("--cases", cases_path)->required()->check(CLI::ExistingFile);
    c->add_option("--min-frequency", min_freq);
    c->add_option("--k", ks);
  }
  int bleu_n = 2;
  auto* ev_bleu = ev->add_subcommand("bleu", "corpus BLEU over JSON lines {candidate, reference}");
  ev_bleu->add_option("--cases", cases_path)->required()->check(CLI::ExistingFile);
  ev_bleu->add_option("-n", bleu_n)->check(CLI::Range(1, 4));

  // stats
  auto* st = app.add_subcommand("stats", "KB statistics");
  st->require_subcommand(1);
  auto* st_freq = st->add_subcommand("freq", "(t,v) pair frequency histogram as CSV");
  st_freq->add_option("--kb", kb_path)->required()->check(CLI::ExistingFile);
  std::string taxonomy;
  auto* st_dom = st->add_subcommand("domains", "domain mapping table as CSV");
  st_dom->add_option("--kb", kb_path)->required()->check(CLI::ExistingFile);
  st_dom->add_option("--taxonomy", taxonomy)->required()->check(CLI::ExistingFile);

  // mask
  std::string sentence;
  size_t like_index = 0;
  auto* mask = app.add_subcommand("mask", "masked context sentence and its provider key");
  mask->add_option("--sentence", sentence)->required();
  mask->add_option("--index", like_index, "token index of 'like'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*run_cmd) {
    simkb::Pipeline p(make_config(g));
    if (stages.empty() || (stages.size() == 1 && stages[0] == "all")) {
      p.run_all();
    } else {
      for (const auto& s : stages) p.run(simkb::parse_stage(s));
    }
    return 0;
  }
  for (auto& sc : stage_cmds) {
    if (!*sc.cmd) continue;
    auto cfg = make_config(g);
    for (const auto& [key, v] : sc.paths)
      if (!v.empty()) cfg.set(key, v);
    simkb::Pipeline(cfg).run(sc.stage);
    return 0;
  }

  if (*kb_build) {
    std::vector<simkb::SimileInstance> inst;
    for (const auto& line : simkb::read_lines(kb_in))
      if (!line.empty()) inst.push_back(simkb::parse_instance(line));
    auto kb = simkb::KnowledgeBase::aggregate(inst);
    kb.set_config_hash(make_config(g).hash());
    kb.save(kb_out);
    std::cerr << "stage=build instances=" << inst.size() << " triplets=" << kb.size() << '\n';
    return 0;
  }
  if (*kb_final) {
    auto kb = simkb::KnowledgeBase::load(kb_in);
    auto w = kb.finalize();
    std::sort(w.begin(), w.end());
    for (const auto& x : w) std::cerr << "warning " << x << '\n';
    kb.save(kb_out);
    std::cerr << "stage=finalize triplets=" << kb.size() << " degenerate_groups=" << w.size() << '\n';
    return 0;
  }
  if (*kb_query) {
    auto kb = simkb::KnowledgeBase::load(kb_in);
    std::vector<const simkb::SimileTriplet*> hits;
    for (const auto& t : kb.triplets()) {
      if (!q_topic.empty() && t.topic != simkb::normalize_term(q_topic)) continue;
      if (!q_property.empty() && t.property != simkb::normalize_term(q_property)) continue;
      if (!q_vehicle.empty() && t.vehicle != simkb::normalize_term(q_vehicle)) continue;
      hits.push_back(&t);
    }
    std::cout << "topic\tproperty\tvehicle\tN\tP\tT(p|t,v)\tT(t,v|p)\n";
    for (const auto* t : hits)
      std::cout << t->topic << '\t' << t->property << '\t' << t->vehicle << '\t' << t->frequency() << '\t'
                << simkb::format_double(t->plausibility) << '\t' << simkb::format_double(t->typ_p_given_tv) << '\t'
                << simkb::format_double(t->typ_tv_given_p) << '\n';
    return 0;
  }
  if (*interp) {
    print_answers(simkb::interpret(simkb::KnowledgeBase::load(kb_path), topic, vehicle, k), explain_flag);
    return 0;
  }
  if (*gen) {
    print_answers(simkb::generate_vehicles(simkb::KnowledgeBase::load(kb_path), topic, property, k), explain_flag);
    return 0;
  }
  if (*pol) {
    auto kb = simkb::KnowledgeBase::load(kb_path);
    int rc = 0;
    std::string line;
    while (std::getline(std::cin, line)) {
      if (simkb::trim(line).empty()) continue;
      try {
        auto r = simkb::polish_rewrite(kb, tokens_of(line), {gamma, polish_k});
        if (explain_flag) {
          std::cout << json{{"input", line},
                            {"output", r.sentence()},
                            {"property", r.property},
                            {"alternatives", answers_json(r.alternatives, false)}}
                           .dump()
                    << '\n';
        } else {
          std::cout << line << '\t' << r.sentence() << '\n';
        }
      } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        std::cout << line << '\t' << '\n';
        rc = 1;
      }
    }
    return rc;
  }
  if (*expl) {
    std::cout << simkb::explain(simkb::KnowledgeBase::load(kb_path), topic, property, vehicle);
    return 0;
  }
  auto ranking_report = [&](std::vector<simkb::RankingCase> cases) {
    cases = simkb::filter_by_frequency(cases, min_freq);
    if (cases.empty()) throw Error("no cases left after frequency filtering");
    json m = {{"cases", cases.size()}, {"mrr", simkb::mrr(cases)}};
    for (size_t kk : ks) m["recall@" + std::to_string(kk)] = simkb::recall_at_k(cases, kk);
    std::cout << m.dump(2) << '\n';
  };
  if (*ev_rank) {
    std::vector<simkb::RankingCase> cases;
    for (const auto& line : simkb::read_lines(cases_path))
      if (!simkb::trim(line).empty()) cases.push_back(simkb::parse_ranking_case(line));
    ranking_report(std::move(cases));
    return 0;
  }
  if (*ev_si || *ev_sg) {
    const bool si = ev_si->parsed();
    auto kb = simkb::KnowledgeBase::load(kb_path);
    const size_t depth = *std::max_element(ks.begin(), ks.end());
    std::vector<simkb::RankingCase> cases;
    for (const auto& line : simkb::read_lines(cases_path)) {
      if (simkb::trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw Error("malformed case line: " + line);
      simkb::RankingCase c;
      for (const auto& x : j.value("gold", std::vector<std::string>{})) c.gold.push_back(simkb::normalize_term(x));
      if (j.contains("frequency")) c.frequency = j["frequency"].get<double>();
      auto ans = si ? simkb::interpret(kb, j.value("topic", ""), j.value("vehicle", ""), depth)
                    : simkb::generate_vehicles(kb, j.value("topic", ""), j.value("property", ""), depth);
      for (const auto& a : ans) c.ranking.push_back(a.answer);
      cases.push_back(std::move(c));
    }
    ranking_report(std::move(cases));
    return 0;
  }
  if (*ev_bleu) {
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
    for (const auto& line : simkb::read_lines(cases_path)) {
      if (simkb::trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw Error("malformed case line: " + line);
      pairs.emplace_back(tokens_of(simkb::to_lower(j.value("candidate", ""))),
                         tokens_of(simkb::to_lower(j.value("reference", ""))));
    }
    std::cout << json{{"pairs", pairs.size()}, {"bleu", simkb::corpus_bleu(pairs, bleu_n)}, {"n", bleu_n}}.dump(2)
              << '\n';
    return 0;
  }
  if (*st_freq) {
    std::cout << simkb::histogram_csv(simkb::freq_distribution(simkb::KnowledgeBase::load(kb_path)));
    return 0;
  }
  if (*st_dom) {
    auto table = simkb::domain_mapping_table(simkb::KnowledgeBase::load(kb_path), simkb::Taxonomy::load(taxonomy));
    for (const auto& w : table.warnings) std::cerr << "warning " << w << '\n';
    std::cout << simkb::domain_table_csv(table);
    return 0;
  }
  if (*mask) {
    auto masked = simkb::mask_sentence(tokens_of(sentence), like_index);
    std::cout << simkb::masked_sentence_key(masked) << '\t' << masked << '\n';
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const simkb::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
