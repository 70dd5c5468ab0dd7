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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "simkb/simkb.hpp"
#include "support/gold.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace simkb;
namespace fs = std::filesystem;

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && first_failure_.empty()) first_failure_ = what;
    ok_ = ok_ && ok;
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s << what << ": got " << format_double(got) << ", want " << format_double(want) << " +- " << tol;
    expect(std::abs(got - want) <= tol, s.str());
  }
  bool ok() const { return ok_; }
  const std::string& failure() const { return first_failure_; }

 private:
  bool ok_ = true;
  std::string first_failure_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome finish(const Check& c, const std::string& detail) {
  return {c.ok(), c.ok() ? detail : detail + "; first failure: " + c.failure()};
}

// ---------------------------------------------------------------- 1

Outcome noisy_or() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> pos(std::nextafter(0.0, 1.0), 1.0);
  Check c;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> s(1 + rng() % 8);
    for (auto& x : s) x = u(rng);
    const double p = plausibility(s);
    worst = std::max(worst, std::abs(p - oracle::noisy_or(s)));
    c.near(p, oracle::noisy_or(s), 1e-12, "list " + std::to_string(i));
    s.push_back(pos(rng));
    c.expect(plausibility(s) >= p, "monotonicity on list " + std::to_string(i));
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 1.0, "runtime " + format_double(secs) + " s");
  return finish(c, "1000 lists, max |diff| " + format_double(worst) + ", " + format_double(secs) + " s");
}

// ---------------------------------------------------------------- 2

Outcome typicality() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  Check c;
  size_t groups = 0;
  for (int k = 0; k < 50; ++k) {
    auto kb = oracle::to_kb(oracle::random_raw_kb(rng, 500));
    c.expect(kb.size() <= 500, "KB size");
    std::map<std::pair<std::string, std::string>, double> tv;
    std::map<std::string, double> p;
    for (const auto& t : kb.triplets()) {
      tv[{t.topic, t.vehicle}] += t.typ_p_given_tv;
      p[t.property] += t.typ_tv_given_p;
    }
    for (const auto& [key, s] : tv) c.near(s, 1.0, 1e-9, "T(p|t,v) sum for " + key.first + "/" + key.second);
    for (const auto& [key, s] : p) c.near(s, 1.0, 1e-9, "T(t,v|p) sum for " + key);
    groups += tv.size() + p.size();
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 5.0, "runtime " + format_double(secs) + " s");
  return finish(c, "50 KBs, " + std::to_string(groups) + " groups, " + format_double(secs) + " s");
}

// ---------------------------------------------------------------- 3

// Triplets whose instance scores are all equal, chosen so that the
// plausibility is P for frequency N.
std::vector<oracle::RawTriplet> uniform_kb(const std::vector<std::tuple<std::string, std::string, std::string, int, double>>& shape,
                                           int scale) {
  std::vector<oracle::RawTriplet> out;
  for (const auto& [t, p, v, n, P] : shape) {
    const int m = n * scale;
    const double s = 1.0 - std::pow(1.0 - P, 1.0 / m);
    out.push_back({t, p, v, std::vector<double>(static_cast<size_t>(m), s)});
  }
  return out;
}

std::vector<std::string> answers(const std::vector<RankedAnswer>& xs) {
  std::vector<std::string> out;
  for (const auto& x : xs) out.push_back(x.answer);
  return out;
}

Outcome inference() {
  std::mt19937_64 rng(303);
  Check c;
  size_t rankings = 0;
  for (int k = 0; k < 100; ++k) {
    auto raw = oracle::random_raw_kb(rng, 100);
    auto kb = oracle::to_kb(raw);
    std::set<std::string> vs, ps;
    for (const auto& r : raw) vs.insert(r.v), ps.insert(r.p);
    for (const auto& v : vs) {
      // Oracle ranking: every property seen with v, by score then name.
      std::vector<std::pair<double, std::string>> want;
      for (const auto& p : ps) {
        bool seen = false;
        for (const auto& r : raw) seen = seen || (r.p == p && r.v == v);
        if (seen) want.emplace_back(-oracle::interpret_score(raw, p, v), p);
      }
      std::sort(want.begin(), want.end());
      auto got = interpret(kb, "topic a", v, 1000);
      c.expect(got.size() == want.size(), "interpret size for " + v);
      for (size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
        c.expect(got[i].answer == want[i].second, "interpret order for " + v);
        c.near(got[i].score, -want[i].first, 1e-9, "S(p) for " + v);
      }
      c.expect(answers(got) == answers(interpret(kb, "a different topic", v, 1000)), "topic independence (SI)");
      ++rankings;
    }
    for (const auto& p : ps) {
      std::vector<std::pair<double, std::string>> want;
      for (const auto& v : vs) {
        bool seen = false;
        for (const auto& r : raw) seen = seen || (r.p == p && r.v == v);
        if (seen) want.emplace_back(-oracle::generate_score(raw, p, v), v);
      }
      std::sort(want.begin(), want.end());
      auto got = generate_vehicles(kb, "topic a", p, 1000);
      c.expect(got.size() == want.size(), "generate size for " + p);
      for (size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
        c.expect(got[i].answer == want[i].second, "generate order for " + p);
        c.near(got[i].score, -want[i].first, 1e-9, "S(v) for " + p);
      }
      auto other = generate_vehicles(kb, "", p, 1000);
      for (size_t i = 0; i < got.size() && i < other.size(); ++i)
        c.expect(got[i].answer == other[i].answer && got[i].score == other[i].score, "topic independence (SG)");
      ++rankings;
    }
  }
  // Frequency scaling with plausibility held fixed.
  size_t scaled = 0;
  for (int k = 0; k < 50; ++k) {
    static const std::vector<std::string> T{"hair", "eyes", "night"}, P{"soft", "dark", "cold", "bright"},
        V{"silk", "ice", "a raven", "stars", "the deep sea"};
    std::uniform_real_distribution<double> up(0.05, 0.95);
    std::set<std::tuple<std::string, std::string, std::string>> keys;
    std::vector<std::tuple<std::string, std::string, std::string, int, double>> shape;
    for (int i = 0; i < 25; ++i) {
      auto key = std::make_tuple(T[rng() % T.size()], P[rng() % P.size()], V[rng() % V.size()]);
      if (!keys.insert(key).second) continue;
      shape.emplace_back(std::get<0>(key), std::get<1>(key), std::get<2>(key), 1 + static_cast<int>(rng() % 4),
                        up(rng));
    }
    auto base = oracle::to_kb(uniform_kb(shape, 1));
    for (int scale : {2, 3, 5}) {
      auto kb = oracle::to_kb(uniform_kb(shape, scale));
      for (const auto& v : V) c.expect(answers(interpret(base, "", v, 100)) == answers(interpret(kb, "", v, 100)),
                                       "scaling x" + std::to_string(scale) + " changed SI ranking for " + v);
      for (const auto& p : P)
        c.expect(answers(generate_vehicles(base, "", p, 100)) == answers(generate_vehicles(kb, "", p, 100)),
                 "scaling x" + std::to_string(scale) + " changed SG ranking for " + p);
      ++scaled;
    }
  }
  return finish(c, std::to_string(rankings) + " rankings vs brute force, " + std::to_string(scaled) +
                       " scaled KBs");
}

// ---------------------------------------------------------------- 4

Outcome gamma_zero() {
  std::mt19937_64 rng(404);
  Check c;
  size_t queries = 0, boosted = 0;
  while (queries < 200) {
    auto raw = oracle::random_raw_kb(rng, 60);
    auto kb = oracle::to_kb(raw);
    for (const auto& r : raw) {
      if (queries == 200) break;
      c.near(polish_score(kb, r.p, r.v, 0.0), oracle::generate_score(raw, r.p, r.v), 1e-12,
             "gamma=0 for (" + r.p + ", " + r.v + ")");
      ++queries;
      if (word_count(r.v) == 3) {
        auto t0 = polish_terms(kb, r.p, r.v, 0.0);
        auto t2 = polish_terms(kb, r.p, r.v, 2.0);
        for (size_t i = 0; i < t0.size(); ++i) c.near(t2[i] / t0[i], std::exp(6.0), 1e-9, "e^6 factor");
        ++boosted;
      }
    }
  }
  c.expect(boosted > 0, "no 3-word vehicle sampled");
  return finish(c, std::to_string(queries) + " queries, " + std::to_string(boosted) + " 3-word vehicles");
}

// ---------------------------------------------------------------- 5

Outcome components() {
  const std::string dir = SIMKB_FIXTURES "/gold/";
  auto s = gold::evaluate(dir + "trees.tsv", dir + "gold.tsv", dir + "coref.tsv");
  Check c;
  auto rows = gold::load_rows(dir + "gold.tsv");
  std::set<std::string> ids;
  std::set<std::string> reasons;
  for (const auto& r : rows) {
    ids.insert(r.id);
    if (r.status.starts_with("filtered:")) reasons.insert(r.status);
  }
  c.expect(ids.size() >= 25, "gold corpus has " + std::to_string(ids.size()) + " sentences");
  c.expect(reasons.size() == 3, "gold corpus covers " + std::to_string(reasons.size()) + " filter rules");
  c.expect(s.hard.f1 >= 0.90, "hard F1 " + format_double(s.hard.f1));
  c.expect(s.easy.f1 >= 0.95, "easy F1 " + format_double(s.easy.f1));
  c.expect(s.filter_failures.empty(), s.filter_failures.empty() ? "" : s.filter_failures.front());
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu sentences, hard F1 %.4f, easy F1 %.4f, filter examples rejected correctly",
                ids.size(), s.hard.f1, s.easy.f1);
  return finish(c, buf);
}

// ---------------------------------------------------------------- 6

Outcome cotraining() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  constexpr int kReplicates = 20;
  double co_like = 0, co_be = 0, sup_like = 0, sup_be = 0, min_f1 = 1.0;
  int like_wins = 0;
  for (int rep = 1; rep <= kReplicates; ++rep) {
    synthetic::TwoViewOptions o;  // 50 seeds, 5000 unlabeled per view
    auto d = synthetic::TwoViewGenerator(static_cast<uint64_t>(rep), o).generate();
    CotrainConfig cfg;  // default hyper-parameters
    cfg.seed = static_cast<uint64_t>(rep);
    auto r = run_cotraining<DefaultTrainer>(d.seeds, d.u_like, d.u_be, cfg);
    // Supervision only: the same trainer on the seeds alone, with the seeds
    // co-training uses for its iteration-0 models.
    auto s_like = HashedLinearModel::train(d.seeds, derive_seed(cfg.seed, "train-like", 0));
    auto s_be = HashedLinearModel::train(d.seeds, derive_seed(cfg.seed, "train-be", 0));
    const double fl = synthetic::simile_f1(r.model_like, d.test_like);
    const double fb = synthetic::simile_f1(r.model_be, d.test_be);
    const double sl = synthetic::simile_f1(s_like, d.test_like);
    const double sb = synthetic::simile_f1(s_be, d.test_be);
    c.expect(fl >= 0.90, "replicate " + std::to_string(rep) + " like F1 " + format_double(fl));
    c.expect(fb >= 0.90, "replicate " + std::to_string(rep) + " be F1 " + format_double(fb));
    min_f1 = std::min({min_f1, fl, fb});
    like_wins += fl >= sl;
    co_like += fl / kReplicates;
    co_be += fb / kReplicates;
    sup_like += sl / kReplicates;
    sup_be += sb / kReplicates;
  }
  c.expect(co_like >= sup_like, "mean like F1 " + format_double(co_like) + " < " + format_double(sup_like));
  c.expect(co_be >= sup_be, "mean be F1 " + format_double(co_be) + " < " + format_double(sup_be));
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "runtime " + format_double(secs) + " s");
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%d replicates, min F1 %.4f; mean F1 like %.4f vs %.4f supervised (%d/%d replicates >=), "
                "be %.4f vs %.4f; %.1f s",
                kReplicates, min_f1, co_like, sup_like, like_wins, kReplicates, co_be, sup_be, secs);
  return finish(c, buf);
}

// ---------------------------------------------------------------- 7

std::vector<std::string> random_words(std::mt19937_64& rng, size_t max_len) {
  static const std::vector<std::string> vocab{"a", "the", "cat", "dog", "like", "silk", "soft", "run", "sea"};
  std::vector<std::string> out(rng() % (max_len + 1));
  for (auto& w : out) w = vocab[rng() % vocab.size()];
  return out;
}

Outcome metrics() {
  std::mt19937_64 rng(707);
  Check c;
  for (int i = 0; i < 200; ++i) {
    std::vector<RankingCase> cs;
    std::vector<std::vector<std::string>> gold, ranking;
    for (size_t n = 1 + rng() % 12; n > 0; --n) {
      auto g = random_words(rng, 3);
      if (g.empty()) g.push_back("sea");
      auto r = random_words(rng, 8);
      cs.push_back({g, r, {}});
      gold.push_back(g);
      ranking.push_back(r);
    }
    c.near(mrr(cs), oracle::mrr(gold, ranking), 1e-9, "MRR case " + std::to_string(i));
    double prev = -1.0;
    for (size_t k = 1; k <= 10; ++k) {
      const double r = recall_at_k(cs, k);
      c.near(r, oracle::recall_at(gold, ranking, k), 1e-9, "Recall@k case " + std::to_string(i));
      c.expect(r >= prev, "Recall@k not monotone in case " + std::to_string(i));
      prev = r;
    }
    auto cand = random_words(rng, 10), ref = random_words(rng, 10);
    for (int n : {1, 2}) c.near(bleu_n(cand, ref, n), oracle::bleu(cand, ref, n), 1e-9, "BLEU case " + std::to_string(i));
    if (!cand.empty())
      for (int n : {1, 2}) c.near(bleu_n(cand, cand, n), 1.0, 0.0, "bleu_n(x,x)");
    std::vector<int> g(30), p(30);
    size_t tp = 0, fp = 0, fn = 0;
    for (size_t j = 0; j < 30; ++j) {
      g[j] = static_cast<int>(rng() % 2);
      p[j] = static_cast<int>(rng() % 2);
      tp += g[j] && p[j];
      fp += !g[j] && p[j];
      fn += g[j] && !p[j];
    }
    auto m = prf1(tp, fp, fn);
    auto o = oracle::prf(g, p);
    c.near(m.precision, o.p, 1e-9, "precision");
    c.near(m.recall, o.r, 1e-9, "recall");
    c.near(m.f1, o.f, 1e-9, "F1");
  }
  return finish(c, "200 cases: MRR, Recall@1..10, BLEU-1/2, P/R/F1");
}

// ---------------------------------------------------------------- 8

std::map<std::string, std::string> run_pipeline(const std::string& dir) {
  fs::remove_all(dir);
  auto cfg = PipelineConfig::load(SIMKB_FIXTURES "/pipeline/config.txt");
  cfg.output_dir = dir;
  Pipeline p(cfg, nullptr);
  p.run_all();
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name == artifact::kb || name.starts_with("manifest.")) files[name] = read_file(e.path().string());
  }
  return files;
}

bool bit_equal(double a, double b) { return std::bit_cast<uint64_t>(a) == std::bit_cast<uint64_t>(b); }

Outcome determinism() {
  Check c;
  const auto tmp = fs::temp_directory_path();
  auto a = run_pipeline((tmp / "simkb_accept_a").string());
  auto b = run_pipeline((tmp / "simkb_accept_b").string());
  c.expect(a.count(std::string(artifact::kb)) == 1, "pipeline produced no KB");
  c.expect(a.size() == b.size(), "different file sets");
  for (const auto& [name, data] : a) c.expect(b.count(name) && b.at(name) == data, name + " differs");

  auto kb = KnowledgeBase::deserialize(a[std::string(artifact::kb)]);
  const auto path = (tmp / "simkb_accept_roundtrip.jsonl").string();
  kb.save(path);
  auto back = KnowledgeBase::load(path);
  c.expect(back.size() == kb.size() && back.finalized() == kb.finalized() &&
               back.config_hash() == kb.config_hash(),
           "header fields differ after round trip");
  for (size_t i = 0; i < std::min(kb.size(), back.size()); ++i) {
    const auto& x = kb.triplets()[i];
    const auto& y = back.triplets()[i];
    bool same = x.topic == y.topic && x.property == y.property && x.vehicle == y.vehicle &&
                x.instance_scores.size() == y.instance_scores.size() && bit_equal(x.plausibility, y.plausibility) &&
                bit_equal(x.typ_p_given_tv, y.typ_p_given_tv) && bit_equal(x.typ_tv_given_p, y.typ_tv_given_p);
    for (size_t j = 0; same && j < x.instance_scores.size(); ++j)
      same = bit_equal(x.instance_scores[j], y.instance_scores[j]);
    c.expect(same, "triplet " + std::to_string(i) + " differs after round trip");
  }
  c.expect(back.serialize() == a[std::string(artifact::kb)], "re-serialized KB differs");
  return finish(c, std::to_string(a.size()) + " files byte-identical across runs, " + std::to_string(kb.size()) +
                       " triplets round-trip bit-exactly");
}

// ---------------------------------------------------------------- 9

Outcome counts() {
  Check c;
  auto manifest = nlohmann::json::parse(read_file(SIMKB_FIXTURES "/manifest.json"));
  for (const char* name : {"corpus/corpus.tsv", "corpus/two.tsv"}) {
    const auto& m = manifest[name];
    std::ifstream in(std::string(SIMKB_FIXTURES "/") + name);
    auto corpus = read_corpus(in);
    auto r = scan_sentences(corpus.sentences);
    const std::string n(name);
    c.expect(corpus.sentences.size() == m["sentences"].get<size_t>(), n + " sentence count");
    c.expect(corpus.diagnostics.size() == m["malformed_lines"].get<size_t>(), n + " malformed lines");
    c.expect(r.counts.like == m["like"].get<size_t>(), n + " like count " + std::to_string(r.counts.like));
    c.expect(r.counts.be == m["be"].get<size_t>(), n + " be count " + std::to_string(r.counts.be));
    if (m.contains("per_sentence")) {
      std::map<std::string, std::pair<size_t, size_t>> got;
      for (const auto& cand : r.candidates)
        (cand.view == View::like ? got[cand.sentence_id].first : got[cand.sentence_id].second)++;
      c.expect(got.size() == m["per_sentence"].size(), n + " sentences with candidates");
      for (const auto& [id, v] : m["per_sentence"].items())
        c.expect(got[id].first == v[0].get<size_t>() && got[id].second == v[1].get<size_t>(), n + " " + id);
    }
  }
  const auto& gm = manifest["gold/trees.tsv"];
  auto resolver = TableResolver::load(SIMKB_FIXTURES "/gold/coref.tsv");
  size_t trees = 0;
  ExtractionSummary summary;
  for (const auto& line : read_lines(SIMKB_FIXTURES "/gold/trees.tsv")) {
    if (trim(line).empty()) continue;
    auto rec = parse_tree_line(line);
    ++trees;
    for (const auto& r : extract_components(rec.tree, rec.id, &resolver)) summary.add(r);
  }
  c.expect(trees == gm["trees"].get<size_t>(), "tree count");
  c.expect(summary.total == gm["results"].get<size_t>(), "extraction result count");
  c.expect(summary.by_status == gm["status"].get<std::map<std::string, size_t>>(), "status partition");
  std::string parts;
  for (const auto& [k, v] : summary.by_status) parts += (parts.empty() ? "" : " ") + k + "=" + std::to_string(v);
  return finish(c, "corpus like/be and status partition match (" + parts + ")");
}

// ---------------------------------------------------------------- 10

Outcome domains() {
  Check c;
  std::vector<SimileInstance> xs;
  for (const auto& line : read_lines(SIMKB_FIXTURES "/domains/instances.tsv"))
    if (!trim(line).empty()) xs.push_back(parse_instance(line));
  auto kb = KnowledgeBase::aggregate(xs);
  kb.finalize();
  auto d = domain_mapping_table(kb, Taxonomy::load(SIMKB_FIXTURES "/domains/taxonomy.tsv"));
  std::map<std::pair<std::string, std::string>, double> want;
  for (const auto& line : read_lines(SIMKB_FIXTURES "/domains/expected.csv")) {
    if (line.empty() || line[0] == '#' || line.starts_with("topic_domain")) continue;
    auto f = split(line, ',');
    want[{std::string(f[0]), std::string(f[1])}] = parse_double(f[2], "percent");
  }
  c.expect(d.cells.size() == want.size(), "cell count " + std::to_string(d.cells.size()));
  double sum = 0.0;
  for (const auto& [k, p] : d.cells) {
    sum += p;
    auto it = want.find(k);
    c.expect(it != want.end(), "unexpected cell " + k.first + "," + k.second);
    if (it != want.end()) c.near(p, it->second, 0.01, k.first + "," + k.second);
  }
  c.near(sum, 100.0, 1e-9, "total");
  return finish(c, std::to_string(d.cells.size()) + " cells within 0.01, total " + format_double(sum) + "%");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"noisy-or plausibility oracle", noisy_or},
      {"typicality normalization", typicality},
      {"inference oracle, topic independence, frequency scaling", inference},
      {"polish gamma=0 equivalence and length factor", gamma_zero},
      {"component extraction on the gold corpus", components},
      {"co-training on synthetic two-view data", cotraining},
      {"metric oracles", metrics},
      {"end-to-end determinism and KB round trip", determinism},
      {"fixture pattern and extraction counts", counts},
      {"domain mapping table", domains},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << i + 1 << ": " << criteria[i].first << " -- "
              << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
