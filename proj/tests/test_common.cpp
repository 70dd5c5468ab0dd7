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
#include <set>

#include "simkb/common.hpp"

namespace simkb {
namespace {

TEST(Strings, SplitKeepsEmptyFields) {
  auto f = split("a\t\tb\t", '\t');
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[0], "a");
  EXPECT_EQ(f[1], "");
  EXPECT_EQ(f[3], "");
}

TEST(Strings, SplitWsDropsRuns) {
  auto f = split_ws("  a \t b\n c  ");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[2], "c");
  EXPECT_TRUE(split_ws("   ").empty());
}

TEST(Strings, NormalizeTerm) {
  EXPECT_EQ(normalize_term("  Kids  in A\tCandy store "), "kids in a candy store");
  EXPECT_EQ(word_count("kids in a candy store"), 5u);
  EXPECT_EQ(word_count(""), 0u);
}

TEST(Numbers, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456.789, 0.0, 2.5e17}) {
    EXPECT_EQ(parse_double(format_double(x), "x"), x);
  }
}

TEST(Numbers, ParseRejectsGarbage) {
  EXPECT_THROW(parse_double("1.5x", "v"), Error);
  EXPECT_THROW(parse_double("", "v"), Error);
  EXPECT_THROW(parse_int("3.2", "v"), Error);
  EXPECT_EQ(parse_int(" 42 ", "v"), 42);
}

TEST(Hashing, KnownFnvVectors) {
  // Published FNV-1a test vectors.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a32("a"), 0xe40c292cu);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Random, DeriveSeedSeparatesStreams) {
  std::set<uint64_t> seen;
  for (uint64_t i = 0; i < 100; ++i) {
    seen.insert(derive_seed(1, "a", i));
    seen.insert(derive_seed(1, "b", i));
  }
  EXPECT_EQ(seen.size(), 200u);
  EXPECT_EQ(derive_seed(5, "x", 3), derive_seed(5, "x", 3));
}

TEST(Random, BoundedStaysInRange) {
  std::mt19937_64 rng(3);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) {
    auto v = bounded(rng, 7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  for (int c : hist) EXPECT_GT(c, 800);
}

TEST(Random, ShuffleIsPermutationAndDeterministic) {
  std::vector<int> a(50), b;
  for (int i = 0; i < 50; ++i) a[i] = i;
  b = a;
  deterministic_shuffle(a, 9);
  deterministic_shuffle(b, 9);
  EXPECT_EQ(a, b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Parallel, MapPreservesOrderForAnyJobCount) {
  for (unsigned jobs : {1u, 2u, 3u, 8u}) {
    auto out = parallel_map(101, jobs, [](size_t i) { return i * i; });
    ASSERT_EQ(out.size(), 101u);
    for (size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
  }
  EXPECT_TRUE(parallel_map(0, 4, [](size_t i) { return i; }).empty());
}

TEST(Files, WriteThenReadLines) {
  const auto path = (std::filesystem::temp_directory_path() / "simkb_common_lines.txt").string();
  write_file(path, "a\r\nb\n\nc");
  auto lines = read_lines(path);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[2], "");
  EXPECT_EQ(lines[3], "c");
  EXPECT_THROW(read_file(path + ".missing"), Error);
}

}  // namespace
}  // namespace simkb
