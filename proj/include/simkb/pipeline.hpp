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

#pragma once

// End-to-end pipeline: configuration, stages, manifests, provenance.
//
// Stages communicate only through files in the output directory. Each stage
// writes a manifest.<stage>.json holding content hashes of its inputs and
// outputs, the configuration hash and its counters; reruns on identical
// inputs are byte-identical.

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "simkb/common.hpp"
#include "simkb/component_extract.hpp"
#include "simkb/cotrain.hpp"
#include "simkb/eval_stats.hpp"
#include "simkb/inference.hpp"
#include "simkb/kb_store.hpp"
#include "simkb/pattern_extract.hpp"
#include "simkb/property_scoring.hpp"
#include "simkb/text_classifier.hpp"
#include "simkb/treebank.hpp"

namespace simkb {

inline constexpr std::string_view kToolVersion = "simkb 1.0";

enum class Stage { extract, detect, components, properties, build, finalize, query, polish, eval, stats };

inline constexpr std::array<Stage, 10> kAllStages = {Stage::extract,  Stage::detect, Stage::components,
                                                     Stage::properties, Stage::build, Stage::finalize,
                                                     Stage::query,    Stage::polish, Stage::eval,
                                                     Stage::stats};

inline std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::extract: return "extract";
    case Stage::detect: return "detect";
    case Stage::components: return "components";
    case Stage::properties: return "properties";
    case Stage::build: return "build";
    case Stage::finalize: return "finalize";
    case Stage::query: return "query";
    case Stage::polish: return "polish";
    case Stage::eval: return "eval";
    case Stage::stats: return "stats";
  }
  return "?";
}

inline Stage parse_stage(std::string_view s) {
  for (Stage st : kAllStages)
    if (stage_name(st) == s) return st;
  throw Error("unknown stage '" + std::string(s) + "'");
}

// ---------------------------------------------------------------- config

struct PipelineConfig {
  // Inputs. Relative paths are resolved against the config file directory.
  std::string corpus;
  std::string trees;
  std::string seeds;
  std::string coref;
  std::string knowledge_table;
  std::string context_table;
  std::string knowledge_url;
  std::string context_url;
  std::string taxonomy;
  std::string queries;
  std::string polish_input;
  std::string eval_si;
  std::string eval_sg;
  std::string output_dir = "simkb-out";

  uint64_t seed = 0;
  unsigned jobs = 1;
  CotrainConfig cotrain;
  CotrainMode cotrain_mode = CotrainMode::cotraining;
  PropertyThresholds thresholds;
  double gamma = 2.0;
  size_t k = 10;
  double eval_min_frequency = 0.0;
  std::map<Stage, bool> enabled = {
      {Stage::extract, true}, {Stage::detect, true},  {Stage::components, true}, {Stage::properties, true},
      {Stage::build, true},   {Stage::finalize, true}, {Stage::query, false},     {Stage::polish, false},
      {Stage::eval, false},   {Stage::stats, false}};

  bool stage_enabled(Stage s) const { return enabled.at(s); }

  void set(std::string_view key, std::string_view value, const std::filesystem::path& base = {}) {
    const std::string k(trim(key));
    const std::string v(trim(value));
    auto path = [&](std::string& dst) {
      std::filesystem::path p(v);
      dst = (p.is_relative() && !base.empty() && !v.empty()) ? (base / p).lexically_normal().string() : v;
    };
    auto boolean = [&] {
      if (v == "true" || v == "1" || v == "on") return true;
      if (v == "false" || v == "0" || v == "off") return false;
      throw Error("config '" + k + "': expected true/false, got '" + v + "'");
    };
    if (k == "corpus") path(corpus);
    else if (k == "trees") path(trees);
    else if (k == "seeds") path(seeds);
    else if (k == "coref") path(coref);
    else if (k == "knowledge_table") path(knowledge_table);
    else if (k == "context_table") path(context_table);
    else if (k == "knowledge_url") knowledge_url = v;
    else if (k == "context_url") context_url = v;
    else if (k == "taxonomy") path(taxonomy);
    else if (k == "queries") path(queries);
    else if (k == "polish_input") path(polish_input);
    else if (k == "eval_si") path(eval_si);
    else if (k == "eval_sg") path(eval_sg);
    else if (k == "output_dir") path(output_dir);
    else if (k == "seed") seed = static_cast<uint64_t>(parse_int(v, k));
    else if (k == "jobs") jobs = static_cast<unsigned>(std::max<long long>(1, parse_int(v, k)));
    else if (k == "cotrain.iterations") cotrain.iterations = static_cast<int>(parse_int(v, k));
    else if (k == "cotrain.sample_ratio_like") cotrain.sample_ratio_like = parse_double(v, k);
    else if (k == "cotrain.sample_ratio_be") cotrain.sample_ratio_be = parse_double(v, k);
    else if (k == "cotrain.threshold_like") cotrain.threshold_like = parse_double(v, k);
    else if (k == "cotrain.threshold_be") cotrain.threshold_be = parse_double(v, k);
    else if (k == "cotrain.mode") {
      if (v == "cotraining") cotrain_mode = CotrainMode::cotraining;
      else if (v == "self_training") cotrain_mode = CotrainMode::self_training;
      else throw Error("config 'cotrain.mode': expected cotraining or self_training");
    } else if (k == "theta_knowledge") thresholds.knowledge = parse_double(v, k);
    else if (k == "theta_context") thresholds.context = parse_double(v, k);
    else if (k == "gamma") gamma = parse_double(v, k);
    else if (k == "k") k_from(v);
    else if (k == "eval.min_frequency") eval_min_frequency = parse_double(v, k);
    else if (k.starts_with("stage.")) enabled[parse_stage(std::string_view(k).substr(6))] = boolean();
    else throw Error("unknown config key '" + k + "'");
  }

  // key=value lines; '#' starts a comment.
  static PipelineConfig load(const std::string& path) {
    PipelineConfig c;
    const auto base = std::filesystem::path(path).parent_path();
    size_t n = 0;
    for (const auto& raw : read_lines(path)) {
      ++n;
      std::string_view line = raw;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      if (trim(line).empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string_view::npos) throw Error(path + ":" + std::to_string(n) + ": expected key=value");
      c.set(line.substr(0, eq), line.substr(eq + 1), base);
    }
    return c;
  }

  // Everything that influences stage outputs except file locations (inputs
  // are covered by content hashes) and the job count.
  std::string canonical() const {
    std::string s;
    auto kv = [&](std::string_view k, const std::string& v) { s += std::string(k) + '=' + v + '\n'; };
    kv("seed", std::to_string(seed));
    kv("cotrain.iterations", std::to_string(cotrain.iterations));
    kv("cotrain.sample_ratio_like", format_double(cotrain.sample_ratio_like));
    kv("cotrain.sample_ratio_be", format_double(cotrain.sample_ratio_be));
    kv("cotrain.threshold_like", format_double(cotrain.threshold_like));
    kv("cotrain.threshold_be", format_double(cotrain.threshold_be));
    kv("cotrain.mode", cotrain_mode == CotrainMode::cotraining ? "cotraining" : "self_training");
    kv("theta_knowledge", format_double(thresholds.knowledge));
    kv("theta_context", format_double(thresholds.context));
    kv("gamma", format_double(gamma));
    kv("k", std::to_string(k));
    kv("eval.min_frequency", format_double(eval_min_frequency));
    kv("knowledge_url", knowledge_url);
    kv("context_url", context_url);
    for (const auto& [st, on] : enabled) kv("stage." + std::string(stage_name(st)), on ? "true" : "false");
    return s;
  }

  std::string hash() const { return hex64(fnv1a64(canonical())); }

 private:
  void k_from(const std::string& v) {
    const long long x = parse_int(v, "k");
    if (x < 1) throw Error("config 'k' must be >= 1");
    k = static_cast<size_t>(x);
  }
};

// ---------------------------------------------------------------- artifacts

namespace artifact {
inline constexpr std::string_view candidates = "candidates.tsv";
inline constexpr std::string_view similes_like = "similes_like.txt";
inline constexpr std::string_view similes_be = "similes_be.txt";
inline constexpr std::string_view model_like = "model_like.simcls";
inline constexpr std::string_view model_be = "model_be.simcls";
inline constexpr std::string_view detect_audit = "detect_audit.tsv";
inline constexpr std::string_view components = "components.tsv";
inline constexpr std::string_view instances = "instances.tsv";
inline constexpr std::string_view kb_raw = "kb_raw.jsonl";
inline constexpr std::string_view kb = "kb.jsonl";
inline constexpr std::string_view query_results = "query_results.tsv";
inline constexpr std::string_view polish = "polish.tsv";
inline constexpr std::string_view eval = "eval.json";
inline constexpr std::string_view freq = "freq_distribution.csv";
inline constexpr std::string_view domains = "domain_mapping.csv";
}  // namespace artifact

inline std::string file_hash(const std::string& path) { return hex64(fnv1a64(read_file(path))); }

struct StageReport {
  Stage stage = Stage::extract;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  std::vector<std::string> warnings;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg, std::ostream* log = &std::cerr) : cfg_(std::move(cfg)), log_(log) {
    std::filesystem::create_directories(cfg_.output_dir);
  }

  const PipelineConfig& config() const { return cfg_; }

  std::string out(std::string_view name) const {
    return (std::filesystem::path(cfg_.output_dir) / std::string(name)).string();
  }

  StageReport run(Stage s) {
    StageReport r;
    r.stage = s;
    inputs_ = nlohmann::ordered_json::object();
    outputs_ = nlohmann::ordered_json::object();
    switch (s) {
      case Stage::extract: run_extract(r); break;
      case Stage::detect: run_detect(r); break;
      case Stage::components: run_components(r); break;
      case Stage::properties: run_properties(r); break;
      case Stage::build: run_build(r); break;
      case Stage::finalize: run_finalize(r); break;
      case Stage::query: run_query(r); break;
      case Stage::polish: run_polish(r); break;
      case Stage::eval: run_eval(r); break;
      case Stage::stats: run_stats(r); break;
    }
    write_manifest(r);
    if (log_) {
      *log_ << "stage=" << stage_name(s);
      for (const auto& [k, v] : r.counts.items()) *log_ << ' ' << k << '=' << v.dump();
      *log_ << '\n';
      for (const auto& w : r.warnings) *log_ << "warning stage=" << stage_name(s) << ' ' << w << '\n';
    }
    return r;
  }

  // Runs every enabled build stage in dependency order.
  std::vector<StageReport> run_all() {
    std::vector<StageReport> out;
    for (Stage s : kAllStages)
      if (cfg_.stage_enabled(s)) out.push_back(run(s));
    return out;
  }

  std::string manifest_path(Stage s) const { return out("manifest." + std::string(stage_name(s)) + ".json"); }

 private:
  // ------------------------------------------------------------ helpers

  std::string require_input(const std::string& path, std::string_view key) {
    if (path.empty()) throw Error("config key '" + std::string(key) + "' is not set");
    if (!std::filesystem::exists(path)) throw Error("input '" + std::string(key) + "' not found: " + path);
    inputs_[std::string(key)] = file_hash(path);
    return path;
  }

  std::string require_artifact(std::string_view name, Stage producer) {
    const std::string p = out(name);
    if (!std::filesystem::exists(p))
      throw Error("missing " + std::string(name) + ": run stage '" + std::string(stage_name(producer)) + "' first");
    inputs_[std::string(name)] = file_hash(p);
    return p;
  }

  void emit(std::string_view name, const std::string& data) {
    write_file(out(name), data);
    outputs_[std::string(name)] = hex64(fnv1a64(data));
  }

  void write_manifest(const StageReport& r) {
    nlohmann::ordered_json m = {{"stage", stage_name(r.stage)},
                                {"tool", kToolVersion},
                                {"config_hash", cfg_.hash()},
                                {"inputs", inputs_},
                                {"outputs", outputs_},
                                {"counts", r.counts}};
    write_file(manifest_path(r.stage), m.dump(2) + "\n");
  }

  std::vector<TaggedSentence> load_corpus(StageReport& r) {
    std::ifstream in(require_input(cfg_.corpus, "corpus"));
    auto c = read_corpus(in);
    for (const auto& d : c.diagnostics)
      r.warnings.push_back("corpus line " + std::to_string(d.line) + ": " + d.message);
    return std::move(c.sentences);
  }

  std::vector<SimileCandidate> load_candidates() {
    std::vector<SimileCandidate> cs;
    for (const auto& line : read_lines(require_artifact(artifact::candidates, Stage::extract)))
      if (!line.empty()) cs.push_back(parse_candidate(line));
    return cs;
  }

  std::unordered_map<std::string, Tree> load_trees(StageReport& r) {
    std::unordered_map<std::string, Tree> trees;
    size_t n = 0;
    for (const auto& line : read_lines(require_input(cfg_.trees, "trees"))) {
      ++n;
      if (trim(line).empty()) continue;
      try {
        auto rec = parse_tree_line(line);
        trees.insert_or_assign(rec.id, std::move(rec.tree));
      } catch (const Error& e) {
        r.warnings.push_back("trees line " + std::to_string(n) + ": " + e.what());
      }
    }
    return trees;
  }

  static std::vector<std::string> ids_of(const std::vector<SimileCandidate>& cs, View v) {
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (const auto& c : cs)
      if (c.view == v && seen.insert(c.sentence_id).second) ids.push_back(c.sentence_id);
    return ids;
  }

  // ------------------------------------------------------------ stages

  void run_extract(StageReport& r) {
    auto sentences = load_corpus(r);
    auto scan = scan_sentences(sentences, cfg_.jobs);
    std::string data;
    for (const auto& c : scan.candidates) data += format_candidate(c) + '\n';
    emit(artifact::candidates, data);
    r.counts["sentences"] = sentences.size();
    r.counts["malformed_lines"] = r.warnings.size();
    r.counts["like"] = scan.counts.like;
    r.counts["be"] = scan.counts.be;
  }

  void run_detect(StageReport& r) {
    auto sentences = load_corpus(r);
    auto cands = load_candidates();
    std::unordered_map<std::string, const TaggedSentence*> by_id;
    for (const auto& s : sentences) by_id.emplace(s.id, &s);
    auto pool = [&](View v) {
      std::vector<UnlabeledItem> items;
      for (const auto& id : ids_of(cands, v)) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw Error("candidate '" + id + "' not in corpus; rerun stage 'extract'");
        items.push_back({id, it->second->text()});
      }
      return items;
    };
    auto u_like = pool(View::like);
    auto u_be = pool(View::be);

    std::vector<LabeledExample> seeds;
    size_t n = 0;
    for (const auto& line : read_lines(require_input(cfg_.seeds, "seeds"))) {
      ++n;
      if (trim(line).empty()) continue;
      auto f = split(line, '\t');
      if (f.size() != 2) throw Error("seeds line " + std::to_string(n) + ": expected label<TAB>text");
      seeds.push_back({std::string(f[1]), parse_label(trim(f[0]))});
    }

    CotrainConfig cc = cfg_.cotrain;
    cc.seed = derive_seed(cfg_.seed, "cotrain");
    auto res = run_cotraining(seeds, u_like, u_be, cc, DefaultTrainer{}, cfg_.cotrain_mode, cfg_.jobs);

    emit(artifact::similes_like, join(res.simile_like, "\n") + (res.simile_like.empty() ? "" : "\n"));
    emit(artifact::similes_be, join(res.simile_be, "\n") + (res.simile_be.empty() ? "" : "\n"));
    emit(artifact::model_like, res.model_like.serialize());
    emit(artifact::model_be, res.model_be.serialize());
    std::string audit =
        "iteration\tsampled_like\tsampled_be\tpos_like\tneg_like\tpos_be\tneg_be\tbalanced_like\tbalanced_be\t"
        "scarce_like\tscarce_be\tbe_model_carried\tlabeled_like\tlabeled_be\n";
    for (const auto& a : res.audit) {
      audit += std::to_string(a.iteration) + '\t' + std::to_string(a.sampled_like) + '\t' +
               std::to_string(a.sampled_be) + '\t' + std::to_string(a.pseudo_pos_like) + '\t' +
               std::to_string(a.pseudo_neg_like) + '\t' + std::to_string(a.pseudo_pos_be) + '\t' +
               std::to_string(a.pseudo_neg_be) + '\t' + std::to_string(a.balanced_like) + '\t' +
               std::to_string(a.balanced_be) + '\t' + std::to_string(a.negatives_scarce_like) + '\t' +
               std::to_string(a.negatives_scarce_be) + '\t' + std::to_string(a.be_model_carried) + '\t' +
               std::to_string(a.labeled_like) + '\t' + std::to_string(a.labeled_be) + '\n';
      if (a.negatives_scarce_like || a.negatives_scarce_be)
        r.warnings.push_back("iteration " + std::to_string(a.iteration) + ": fewer pseudo-negatives than positives");
    }
    emit(artifact::detect_audit, audit);
    r.counts["unlabeled_like"] = u_like.size();
    r.counts["unlabeled_be"] = u_be.size();
    r.counts["seeds"] = seeds.size();
    r.counts["similes_like"] = res.simile_like.size();
    r.counts["similes_be"] = res.simile_be.size();
  }

  void run_components(StageReport& r) {
    std::vector<std::string> ids;
    if (cfg_.stage_enabled(Stage::detect)) {
      for (const auto& line : read_lines(require_artifact(artifact::similes_like, Stage::detect)))
        if (!trim(line).empty()) ids.emplace_back(trim(line));
    } else {
      ids = ids_of(load_candidates(), View::like);
    }
    auto trees = load_trees(r);
    std::unique_ptr<CorefResolver> resolver;
    if (!cfg_.coref.empty())
      resolver = std::make_unique<TableResolver>(TableResolver::load(require_input(cfg_.coref, "coref")));
    else
      resolver = std::make_unique<IdentityResolver>();
    auto batch = extract_batch(trees, ids, resolver.get(), cfg_.jobs);
    std::string data;
    for (const auto& res : batch.results) data += format_extraction(res) + '\n';
    emit(artifact::components, data);
    r.counts["sentences"] = ids.size();
    r.counts["results"] = batch.summary.total;
    for (const auto& [k, v] : batch.summary.by_status) r.counts["status:" + k] = v;
  }

  std::unique_ptr<PropertyProvider> make_provider(Perspective kind) {
    const bool knowledge = kind == Perspective::knowledge;
    const std::string& table = knowledge ? cfg_.knowledge_table : cfg_.context_table;
    const std::string& url = knowledge ? cfg_.knowledge_url : cfg_.context_url;
    const std::string key = knowledge ? "knowledge_table" : "context_table";
    if (!table.empty()) return std::make_unique<TableProvider>(TableProvider::load(require_input(table, key), kind));
    if (!url.empty()) return std::make_unique<HttpProvider>(kind, url);
    throw Error("no " + std::string(perspective_name(kind)) + " provider configured (set " + key + " or " +
                std::string(perspective_name(kind)) + "_url)");
  }

  void run_properties(StageReport& r) {
    std::vector<ExtractionRecord> recs;
    for (const auto& line : read_lines(require_artifact(artifact::components, Stage::components)))
      if (!line.empty()) recs.push_back(parse_extraction(line));
    auto trees = load_trees(r);
    std::vector<PropertyQuery> queries;
    for (const auto& e : recs) {
      if (e.status != "ok") continue;
      auto it = trees.find(e.sentence_id);
      if (it == trees.end()) throw Error("no tree for '" + e.sentence_id + "'");
      PropertyQuery q{e.sentence_id, normalize_term(e.topic), normalize_term(e.vehicle), {}, e.anchor_index};
      for (NodeId l : it->second.leaves()) q.tokens.push_back(*it->second.node(l).token);
      queries.push_back(std::move(q));
    }
    auto knowledge = make_provider(Perspective::knowledge);
    auto context = make_provider(Perspective::context);
    auto built = build_instances(queries, *knowledge, *context, cfg_.thresholds, cfg_.jobs);
    std::string data;
    for (const auto& s : built.instances) data += format_instance(s) + '\n';
    emit(artifact::instances, data);
    r.warnings.insert(r.warnings.end(), built.diagnostics.begin(), built.diagnostics.end());
    r.counts["similes"] = queries.size();
    r.counts["instances"] = built.instances.size();
    r.counts["provider_failures"] = built.diagnostics.size();
  }

  void run_build(StageReport& r) {
    std::vector<SimileInstance> inst;
    for (const auto& line : read_lines(require_artifact(artifact::instances, Stage::properties)))
      if (!line.empty()) inst.push_back(parse_instance(line));
    auto kb = KnowledgeBase::aggregate(inst);
    kb.set_config_hash(cfg_.hash());
    emit(artifact::kb_raw, kb.serialize());
    r.counts["instances"] = inst.size();
    r.counts["triplets"] = kb.size();
  }

  void run_finalize(StageReport& r) {
    auto kb = KnowledgeBase::load(require_artifact(artifact::kb_raw, Stage::build));
    auto warnings = kb.finalize();
    std::sort(warnings.begin(), warnings.end());
    r.warnings.insert(r.warnings.end(), warnings.begin(), warnings.end());
    emit(artifact::kb, kb.serialize());
    r.counts["triplets"] = kb.size();
    r.counts["degenerate_groups"] = warnings.size();
  }

  KnowledgeBase load_final_kb() { return KnowledgeBase::load(require_artifact(artifact::kb, Stage::finalize)); }

  // Query file lines: `si<TAB>topic<TAB>vehicle` or `sg<TAB>topic<TAB>property`.
  void run_query(StageReport& r) {
    auto kb = load_final_kb();
    std::string data = "task\ttopic\tquery\trank\tanswer\tscore\n";
    size_t n = 0, answered = 0;
    for (const auto& line : read_lines(require_input(cfg_.queries, "queries"))) {
      if (trim(line).empty()) continue;
      auto f = split(line, '\t');
      if (f.size() != 3 || (f[0] != "si" && f[0] != "sg"))
        throw Error("queries line " + std::to_string(n + 1) + ": expected si|sg<TAB>topic<TAB>term");
      ++n;
      auto ans = f[0] == "si" ? interpret(kb, f[1], f[2], cfg_.k) : generate_vehicles(kb, f[1], f[2], cfg_.k);
      answered += !ans.empty();
      for (size_t i = 0; i < ans.size(); ++i)
        data += std::string(f[0]) + '\t' + std::string(f[1]) + '\t' + std::string(f[2]) + '\t' +
                std::to_string(i + 1) + '\t' + ans[i].answer + '\t' + format_double(ans[i].score) + '\n';
    }
    emit(artifact::query_results, data);
    r.counts["queries"] = n;
    r.counts["answered"] = answered;
  }

  void run_polish(StageReport& r) {
    auto kb = load_final_kb();
    std::string data = "input\toutput\n";
    size_t n = 0, covered = 0;
    for (const auto& line : read_lines(require_input(cfg_.polish_input, "polish_input"))) {
      if (trim(line).empty()) continue;
      ++n;
      std::vector<std::string> toks;
      for (auto w : split_ws(line)) toks.emplace_back(w);
      std::string output;
      try {
        output = polish_rewrite(kb, toks, {cfg_.gamma, cfg_.k}).sentence();
        ++covered;
      } catch (const Error& e) {
        r.warnings.push_back(std::string(trim(line)) + ": " + e.what());
      }
      data += std::string(trim(line)) + '\t' + output + '\n';
    }
    emit(artifact::polish, data);
    r.counts["sentences"] = n;
    r.counts["covered"] = covered;
  }

  // Eval files: JSON lines {"topic", "vehicle"|"property", "gold": [...], "frequency"?}.
  void run_eval(StageReport& r) {
    auto kb = load_final_kb();
    nlohmann::ordered_json result = nlohmann::ordered_json::object();
    auto evaluate = [&](const std::string& path, std::string_view key, bool si) {
      if (path.empty()) return;
      std::vector<RankingCase> cases;
      for (const auto& line : read_lines(require_input(path, key))) {
        if (trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error(std::string(key) + ": malformed JSON line");
        RankingCase c;
        c.gold = j.value("gold", std::vector<std::string>{});
        for (auto& g : c.gold) g = normalize_term(g);
        if (j.contains("frequency")) c.frequency = j["frequency"].get<double>();
        auto ans = si ? interpret(kb, j.value("topic", ""), j.value("vehicle", ""), cfg_.k)
                      : generate_vehicles(kb, j.value("topic", ""), j.value("property", ""), cfg_.k);
        for (const auto& a : ans) c.ranking.push_back(a.answer);
        cases.push_back(std::move(c));
      }
      cases = filter_by_frequency(cases, cfg_.eval_min_frequency);
      if (cases.empty()) {
        r.warnings.push_back(std::string(key) + ": no cases after filtering");
        return;
      }
      nlohmann::ordered_json m = {{"cases", cases.size()}, {"mrr", mrr(cases)}};
      for (size_t k : {1, 3, 5, 10}) m["recall@" + std::to_string(k)] = recall_at_k(cases, k);
      result[std::string(key)] = m;
      r.counts[std::string(key) + "_cases"] = cases.size();
    };
    evaluate(cfg_.eval_si, "eval_si", true);
    evaluate(cfg_.eval_sg, "eval_sg", false);
    emit(artifact::eval, result.dump(2) + "\n");
  }

  void run_stats(StageReport& r) {
    auto kb = load_final_kb();
    auto hist = freq_distribution(kb);
    emit(artifact::freq, histogram_csv(hist));
    r.counts["pairs"] = [&] {
      size_t n = 0;
      for (const auto& [_, c] : hist) n += c;
      return n;
    }();
    if (!cfg_.taxonomy.empty()) {
      auto tax = Taxonomy::load(require_input(cfg_.taxonomy, "taxonomy"));
      auto table = domain_mapping_table(kb, tax);
      emit(artifact::domains, domain_table_csv(table));
      r.warnings.insert(r.warnings.end(), table.warnings.begin(), table.warnings.end());
      r.counts["domain_assigned_triplets"] = table.assigned_triplets;
    }
  }

  PipelineConfig cfg_;
  std::ostream* log_;
  nlohmann::ordered_json inputs_;
  nlohmann::ordered_json outputs_;
};

// ---------------------------------------------------------------- explain

namespace detail {

inline size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<size_t> row(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diag = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1])});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace detail

// Human-readable provenance for one triplet with every formula evaluated.
inline std::string explain(const KnowledgeBase& kb, std::string_view t, std::string_view p, std::string_view v) {
  const SimileTriplet* tr = kb.find(t, p, v);
  if (!tr) {
    const std::string key = normalize_term(t) + " | " + normalize_term(p) + " | " + normalize_term(v);
    std::vector<std::pair<size_t, std::string>> near;
    for (const auto& x : kb.triplets()) {
      std::string k = x.topic + " | " + x.property + " | " + x.vehicle;
      near.emplace_back(detail::edit_distance(key, k), std::move(k));
    }
    std::sort(near.begin(), near.end());
    std::string msg = "triplet not found: (" + key + ")";
    if (!near.empty()) {
      msg += "; nearest:";
      for (size_t i = 0; i < near.size() && i < 3; ++i) msg += " (" + near[i].second + ")";
    }
    throw Error(msg);
  }
  std::string s;
  s += "triplet (" + tr->topic + ", " + tr->property + ", " + tr->vehicle + ")\n";
  s += "  instances: N = " + std::to_string(tr->frequency()) + ", scores = [";
  for (size_t i = 0; i < tr->instance_scores.size(); ++i)
    s += (i ? ", " : "") + format_double(tr->instance_scores[i]);
  s += "]\n";
  s += "  plausibility: P = 1 - prod(1 - S_i) = 1 - ";
  for (size_t i = 0; i < tr->instance_scores.size(); ++i)
    s += (i ? " * " : "") + std::string("(1 - ") + format_double(tr->instance_scores[i]) + ")";
  s += " = " + format_double(tr->plausibility) + "\n";
  s += "  weight: N * P = " + format_double(tr->weight()) + "\n";
  double tv_total = 0.0, p_total = 0.0;
  auto tv = kb.query_tv(tr->topic, tr->vehicle);
  auto pg = kb.query_p(tr->property);
  for (const auto* x : tv) tv_total += x->weight();
  for (const auto* x : pg) p_total += x->weight();
  s += "  typicality T(p|t,v) = " + format_double(tr->weight()) + " / " + format_double(tv_total) + " over " +
       std::to_string(tv.size()) + " triplet(s) in G(t,v) = " + format_double(tr->typ_p_given_tv) + "\n";
  s += "  typicality T(t,v|p) = " + format_double(tr->weight()) + " / " + format_double(p_total) + " over " +
       std::to_string(pg.size()) + " triplet(s) in G(p) = " + format_double(tr->typ_tv_given_p) + "\n";
  if (kb.finalized()) {
    s += "  S_(t,v)(p) = " + format_double(score_property(kb, t, v, p)) + "\n";
    s += "  S_(t,p)(v) = " + format_double(score_vehicle(kb, t, p, v)) + "\n";
  }
  return s;
}

}  // namespace simkb
