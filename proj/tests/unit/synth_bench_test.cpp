#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "refsearch/bench.hpp"
#include "refsearch/synth.hpp"

using namespace refsearch;

TEST(Synth, DeterministicAndValid) {
  SynthOptions o;
  o.count = 3000;
  o.seed = 9;
  const auto a = generate_cases(o);
  const auto b = generate_cases(o);
  ASSERT_EQ(a.size(), 3000u);
  EXPECT_EQ(a, b);
  std::set<std::string> ids, types;
  std::string min_date = "9999", max_date;
  for (const auto& c : a) {
    ASSERT_TRUE(validate_case(c).empty()) << to_json(c).dump();
    ids.insert(c.id);
    types.insert(c.type);
    min_date = std::min(min_date, c.commit.date);
    max_date = std::max(max_date, c.commit.date);
    if (c.extract_method && c.after && c.after->location.begin) {
      EXPECT_EQ(c.extract_method->extracted_lines, c.after->location.lines);
    }
  }
  EXPECT_EQ(ids.size(), a.size());
  EXPECT_GE(types.size(), 10u);
  EXPECT_LE(max_date.substr(0, 4), "2022");
  EXPECT_GE(std::stoi(max_date.substr(0, 4)) - std::stoi(min_date.substr(0, 4)), 9);
  o.seed = 10;
  EXPECT_NE(generate_cases(o), a);
}

TEST(Synth, ExampleQueriesHaveMatches) {
  SynthOptions o;
  o.count = 20000;
  Store store = Store::in_memory();
  generate_corpus(o, [&](std::vector<RefactoringCase>&& batch) { store.put_cases(batch); });
  EXPECT_EQ(store.size(), 20000u);
  for (const char* q : {"type ~ /^Rename/ & rename.from ~ /^get/i & rename.to ~ /^retrieve/i",
                        R"(type = "Extract Method" & extractMethod.sourceMethodsCount >= 2)",
                        R"(type = "Extract Method" & extractMethod.sourceMethodLines >= 100)",
                        R"(type = "Extract Method" & commit.message ~ /extract/i)"}) {
    SearchRequest r;
    r.query = parse_query(q);
    const auto total = store.search(r).total;
    EXPECT_GT(total, 0u) << q;
    EXPECT_LT(total, store.size()) << q;
  }
}

TEST(Bench, ReadsQueriesAndReportsLines) {
  std::istringstream in("# comment\n\ntype = x\n  # indented comment\ntype ~ /^R/\n");
  const auto queries = read_bench_queries(in);
  ASSERT_EQ(queries.size(), 2u);
  EXPECT_EQ(queries[0].line, 3u);
  EXPECT_EQ(queries[1].line, 5u);

  std::istringstream bad("type = x\n\ntype = \n");
  try {
    read_bench_queries(bad);
    FAIL();
  } catch (const BenchQueryError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.error().offset(), 7u);
  }
}

TEST(Bench, SamplesAndMedian) {
  SynthOptions o;
  o.count = 2000;
  Store store = Store::in_memory();
  store.put_cases(generate_cases(o));
  std::istringstream in("type = \"Extract Method\"\ntype ~ /^Rename/\n");
  const BenchReport report = run_bench(store, read_bench_queries(in), 5);
  EXPECT_EQ(report.corpus_size, 2000u);
  ASSERT_EQ(report.entries.size(), 2u);
  for (const auto& e : report.entries) {
    EXPECT_EQ(e.samples_ms.size(), 5u);
    EXPECT_LE(e.min_ms, e.median_ms);
    EXPECT_LE(e.median_ms, e.max_ms);
  }
  EXPECT_EQ(report.entries[0].plan, R"(IndexEq(type, "Extract Method"))");
  EXPECT_EQ(report.entries[1].plan, "FullScan");
  EXPECT_DOUBLE_EQ(median_of({3, 1, 2}), 2);
  EXPECT_DOUBLE_EQ(median_of({4, 1, 2, 3}), 2.5);
  const auto j = to_json(report);
  EXPECT_EQ(j["queries"][0]["samplesMs"].size(), 5u);
}
