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

#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "simkb/property_scoring.hpp"

namespace simkb {
namespace {

std::vector<std::string> toks(std::string_view s) {
  std::vector<std::string> out;
  for (auto t : split_ws(s)) out.emplace_back(t);
  return out;
}

TEST(Mask, ReplacesTheAnchor) {
  auto t = toks("Her hair felt like silk .");
  EXPECT_EQ(mask_sentence(t, 3), "Her hair felt as [MASK] as silk .");
  EXPECT_THROW(mask_sentence(t, 2), Error);
  EXPECT_THROW(mask_sentence(t, 9), Error);
}

TEST(Mask, KeyIsStableHex) {
  auto k = masked_sentence_key("a as [MASK] as b");
  EXPECT_EQ(k.size(), 16u);
  EXPECT_EQ(k, masked_sentence_key("a as [MASK] as b"));
  EXPECT_NE(k, masked_sentence_key("a as [MASK] as c"));
}

TEST(Normalize, HalvesAndChecksRange) {
  std::vector<ScoredProperty> raw{{"soft", 0.8}, {"smooth", 0.0}};
  auto n = normalize_scores(raw);
  EXPECT_DOUBLE_EQ(n[0].score, 0.4);
  EXPECT_DOUBLE_EQ(n[1].score, 0.0);
  EXPECT_THROW(normalize_scores(std::vector<ScoredProperty>{{"x", 1.2}}), Error);
  EXPECT_THROW(normalize_scores(std::vector<ScoredProperty>{{"x", -0.1}}), Error);
  EXPECT_THROW(normalize_scores(std::vector<ScoredProperty>(11, {"x", 0.1})), Error);
}

TEST(Normalize, PreservesOrder) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<ScoredProperty> raw;
    for (int i = 0; i < 10; ++i) raw.push_back({"p" + std::to_string(i), u(rng)});
    auto n = normalize_scores(raw);
    for (size_t i = 0; i < raw.size(); ++i)
      for (size_t j = 0; j < raw.size(); ++j)
        EXPECT_EQ(raw[i].score < raw[j].score, n[i].score < n[j].score);
  }
}

TEST(Select, EitherPerspectiveAboveThreshold) {
  std::vector<ScoredProperty> k{{"soft", 0.45}, {"white", 0.2}, {"cold", 0.31}};
  std::vector<ScoredProperty> c{{"soft", 0.1}, {"white", 0.05}, {"smooth", 0.0}};
  auto s = select_properties(k, c);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].property, "cold");
  EXPECT_DOUBLE_EQ(s[0].score, 0.31);
  EXPECT_EQ(s[1].property, "soft");
  EXPECT_DOUBLE_EQ(s[1].score, 0.55);
  EXPECT_DOUBLE_EQ(s[1].knowledge, 0.45);
  EXPECT_DOUBLE_EQ(s[1].context, 0.1);
  EXPECT_EQ(s[2].property, "white");  // context 0.05 > 0
  EXPECT_DOUBLE_EQ(s[2].score, 0.25);
}

TEST(Select, ThresholdsAreStrict) {
  std::vector<ScoredProperty> k{{"a", 0.3}};
  std::vector<ScoredProperty> c{{"b", 0.0}};
  EXPECT_TRUE(select_properties(k, c).empty());
  EXPECT_EQ(select_properties(k, c, {0.29, 0.0}).size(), 1u);
}

TEST(Select, DuplicatesKeepTheBestScore) {
  std::vector<ScoredProperty> k{{"soft", 0.35}, {"soft", 0.4}};
  auto s = select_properties(k, {});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].score, 0.4);
}

TEST(Instance, RoundTrip) {
  SimileInstance s{"g01", "Her hair", "soft", "silk", 0.55, 0.45, 0.1};
  EXPECT_EQ(parse_instance(format_instance(s)), s);
  EXPECT_THROW(parse_instance("a\tb\tc"), Error);
  EXPECT_THROW(parse_instance("a\tb\tc\td\t1.5\t0\t0"), Error);
}

TEST(Table, KnowledgeIsKeyedByNormalizedVehicle) {
  TableProvider p(Perspective::knowledge);
  for (int i = 0; i < 12; ++i) p.add("Silk", "p" + std::to_string(i), i / 20.0);
  auto r = p.query("  silk ");
  ASSERT_EQ(r.size(), kMaxProviderCandidates);
  EXPECT_EQ(r.front().property, "p11");
  EXPECT_TRUE(p.query("wool").empty());
}

TEST(Table, ContextAcceptsHashOrSentence) {
  const std::string masked = "Her hair felt as [MASK] as silk .";
  TableProvider p(Perspective::context);
  p.add(masked, "soft", 0.9);
  p.add(masked_sentence_key("other as [MASK] as x"), "hard", 0.5);
  EXPECT_EQ(p.query(masked_sentence_key(masked)).size(), 1u);
  EXPECT_EQ(p.query(masked).front().property, "soft");
  EXPECT_EQ(p.query("other as [MASK] as x").front().property, "hard");
}

TEST(Table, LoadRejectsMalformedLines) {
  const auto path = (std::filesystem::temp_directory_path() / "simkb_bad_table.tsv").string();
  write_file(path, "silk\tsoft\n");
  EXPECT_THROW(TableProvider::load(path, Perspective::knowledge), Error);
  write_file(path, "silk\tsoft\thigh\n");
  EXPECT_THROW(TableProvider::load(path, Perspective::knowledge), Error);
}

class LocalServer {
 public:
  explicit LocalServer(httplib::Server::Handler h) {
    server_.Post("/properties", std::move(h));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(Http, PostsKindAndInput) {
  LocalServer srv([](const httplib::Request& req, httplib::Response& res) {
    auto j = nlohmann::json::parse(req.body);
    nlohmann::json out = {{"candidates", nlohmann::json::array()}};
    if (j["kind"] == "knowledge" && j["input"] == "silk") {
      out["candidates"].push_back({{"property", "smooth"}, {"score", 0.6}});
      out["candidates"].push_back({{"property", "soft"}, {"score", 0.8}});
    }
    res.set_content(out.dump(), "application/json");
  });
  HttpProvider p(Perspective::knowledge, srv.url());
  auto r = p.query("silk");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].property, "soft");
  EXPECT_TRUE(p.query("wool").empty());
}

TEST(Http, ErrorsAreReported) {
  LocalServer bad([](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
  EXPECT_THROW(HttpProvider(Perspective::context, bad.url()).query("x"), Error);
  LocalServer fail([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  EXPECT_THROW(HttpProvider(Perspective::context, fail.url()).query("x"), Error);
}

TEST(Build, InstancesFromBothPerspectives) {
  TableProvider k(Perspective::knowledge), c(Perspective::context);
  k.add("silk", "soft", 0.8);
  k.add("silk", "white", 0.2);
  c.add("Her hair felt as [MASK] as silk .", "shiny", 0.4);
  c.add("Her hair felt as [MASK] as silk .", "soft", 0.2);
  std::vector<PropertyQuery> qs{{"g01", "Her hair", "silk", toks("Her hair felt like silk ."), 3},
                                {"bad", "x", "y", toks("x is y"), 1}};
  auto b = build_instances(qs, k, c);
  ASSERT_EQ(b.instances.size(), 2u);
  EXPECT_EQ(b.instances[0].property, "shiny");
  EXPECT_DOUBLE_EQ(b.instances[0].score, 0.2);
  EXPECT_EQ(b.instances[1].property, "soft");
  EXPECT_DOUBLE_EQ(b.instances[1].score, 0.5);
  ASSERT_EQ(b.diagnostics.size(), 1u);
  EXPECT_EQ(b.diagnostics[0].rfind("bad:", 0), 0u);
}

TEST(Build, JobInvariant) {
  TableProvider k(Perspective::knowledge), c(Perspective::context);
  std::vector<PropertyQuery> qs;
  for (int i = 0; i < 50; ++i) {
    const std::string v = "v" + std::to_string(i % 7);
    k.add(v, "p" + std::to_string(i % 5), 0.7);
    k.add(v, "q" + std::to_string(i % 3), 0.9);
    qs.push_back({"s" + std::to_string(i), "t", v, toks("t like " + v), 1});
  }
  auto a = build_instances(qs, k, c, {}, 1);
  auto b = build_instances(qs, k, c, {}, 6);
  EXPECT_EQ(a.instances, b.instances);
}

}  // namespace
}  // namespace simkb
