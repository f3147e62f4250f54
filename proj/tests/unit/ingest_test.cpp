#include <gtest/gtest.h>

#include <regex>

#include "refsearch/ingest.hpp"
#include "refsearch/process.hpp"
#include "test_util.hpp"

using namespace refsearch;
using nlohmann::json;

namespace {

constexpr const char* kGradleSha = "e35b0a8c39182fdfbd11164eee028099657c0393";
constexpr const char* kGradleRepo = "https://github.com/gradle/gradle";

json fixture_json(const char* name) { return json::parse(testutil::read_text(testutil::fixture(name))); }

CodeElement element(std::string role, std::string name, std::int64_t begin, std::int64_t end) {
  return CodeElement{std::move(role), std::move(name), "A.java", begin, end};
}

DetectorRecord record(std::string type, std::vector<CodeElement> left, std::vector<CodeElement> right) {
  DetectorRecord r;
  r.tool = std::string(kRefDiff);
  r.commit_sha1 = kGradleSha;
  r.type = std::move(type);
  r.left = std::move(left);
  r.right = std::move(right);
  return r;
}

}  // namespace

TEST(RMinerParser, GradleFixture) {
  const auto parsed = parse_rminer_output(fixture_json("gradle/rminer.json"));
  ASSERT_EQ(parsed.records.size(), 2u);
  EXPECT_EQ(parsed.rejected, 0u);
  const DetectorRecord& r = parsed.records[0];
  EXPECT_EQ(r.tool, "RefactoringMiner");
  EXPECT_EQ(r.commit_sha1, kGradleSha);
  EXPECT_EQ(r.type, "Extract Method");
  EXPECT_EQ(r.description.rfind("Extract Method private generateImplementationClassFor", 0), 0u);
  ASSERT_FALSE(r.left.empty());
  EXPECT_EQ(r.left[0].role, "source method declaration before extraction");
  EXPECT_EQ(r.left[0].name, "loaderFor(Class<?>)");
  EXPECT_EQ(r.left[0].begin_line, 95);
  EXPECT_EQ(r.left[0].end_line, 261);
  EXPECT_EQ(r.left[0].lines(), 167);
  EXPECT_FALSE(r.raw.is_null());
  EXPECT_TRUE(parsed.commits.count(kGradleSha));
}

TEST(RMinerParser, EmptyRefactoringsAndRejections) {
  const auto empty = parse_rminer_output(json::parse(R"({"commits":[{"sha1":"abc","refactorings":[]}]})"));
  EXPECT_TRUE(empty.records.empty());
  EXPECT_EQ(empty.commits.size(), 1u);

  const auto partial = parse_rminer_output(json::parse(
      R"({"commits":[{"sha1":"abc","refactorings":[{"description":"no type"},{"type":"","description":"x"},
          {"type":"Rename Method","description":"ok"}]}]})"));
  EXPECT_EQ(partial.records.size(), 1u);
  EXPECT_EQ(partial.rejected, 2u);
  EXPECT_EQ(partial.rejections.size(), 2u);

  EXPECT_THROW(parse_rminer_output(json::parse(R"({"commits":[{"refactorings":[]}]})")), IngestError);
  EXPECT_THROW(parse_rminer_output(json::parse(R"([1,2])")), IngestError);
  EXPECT_THROW(parse_detector_output("RefactoringMiner", "{not json"), IngestError);
}

TEST(RefDiffParser, GradleFixture) {
  const auto parsed = parse_refdiff_output(fixture_json("gradle/refdiff.json"));
  ASSERT_EQ(parsed.records.size(), 5u);
  const DetectorRecord& r = parsed.records[0];
  EXPECT_EQ(r.tool, "RefDiff");
  EXPECT_EQ(r.type, "Extract Method");
  ASSERT_EQ(r.left.size(), 1u);
  EXPECT_EQ(r.left[0].name, "loaderFor(Class)");
  EXPECT_EQ(r.left[0].lines(), 167);
  EXPECT_EQ(r.right.at(0).lines(), 97);
  EXPECT_EQ(r.description, "Extracted method generateImplementationClassFor(Class) from loaderFor(Class)");
  EXPECT_EQ(parsed.records[3].type, "Rename Method");
}

TEST(RefDiffParser, ArrayShapeUnknownKindsAndSameDropped) {
  const auto parsed = parse_detector_output("refdiff", R"js([
    {"commit":"abc","type":"WIDEN","nodeBefore":{"type":"Method","localName":"f()"},"nodeAfter":{"type":"Method","localName":"f()"}},
    {"commit":"abc","type":"SAME","nodeBefore":{"type":"Method","localName":"g()"},"nodeAfter":{"type":"Method","localName":"g()"}},
    {"commit":"abc","type":"RENAME","nodeBefore":{"type":"Method","localName":"getX()"},"nodeAfter":{"type":"Method","localName":"retrieveX()"}}
  ])js");
  ASSERT_EQ(parsed.records.size(), 2u);
  EXPECT_EQ(parsed.records[0].type, "WIDEN");
  EXPECT_EQ(parsed.records[1].type, "Rename Method");
}

TEST(RefDiffParser, TranslationTable) {
  EXPECT_EQ(translate_refdiff_type("EXTRACT", "Method"), "Extract Method");
  EXPECT_EQ(translate_refdiff_type("RENAME", "Method"), "Rename Method");
  EXPECT_EQ(translate_refdiff_type("RENAME", "Class"), "Rename Class");
  EXPECT_EQ(translate_refdiff_type("MOVE", "Method"), "Move Method");
  EXPECT_EQ(translate_refdiff_type("INLINE", "Method"), "Inline Method");
  EXPECT_EQ(translate_refdiff_type("PULL_UP", "Method"), "Pull Up Method");
  EXPECT_EQ(translate_refdiff_type("WIDEN", "Method"), "WIDEN");
}

TEST(ToolNames, Canonicalization) {
  EXPECT_EQ(canonical_tool("rminer"), "RefactoringMiner");
  EXPECT_EQ(canonical_tool("REFDIFF"), "RefDiff");
  EXPECT_FALSE(canonical_tool("gumtree").has_value());
}

TEST(DeriveExtractMethod, Rules) {
  const auto gradle = parse_refdiff_output(fixture_json("gradle/refdiff.json")).records.at(0);
  EXPECT_EQ(derive_extract_method_fields(gradle), (ExtractMethodInfo{1, 167, 97}));

  const auto two = record("Extract Method",
                          {element("source method declaration before extraction", "a()", 1, 30),
                           element("source method declaration before extraction", "b()", 40, 89)},
                          {element("extracted method declaration", "c()", 100, 111)});
  EXPECT_EQ(derive_extract_method_fields(two), (ExtractMethodInfo{2, 50, 12}));

  DetectorRecord no_spans = two;
  for (auto& e : no_spans.left) e.begin_line.reset();
  for (auto& e : no_spans.right) e.end_line.reset();
  EXPECT_FALSE(derive_extract_method_fields(no_spans).has_value());
}

TEST(DeriveRename, Rules) {
  EXPECT_EQ(derive_rename_fields(record("Rename Method", {element("original method declaration", "getName()", 1, 2)},
                                        {element("renamed method declaration", "retrieveName()", 1, 2)})),
            (RenameInfo{"getName", "retrieveName"}));
  EXPECT_EQ(derive_rename_fields(record("Rename Class", {element("original type declaration", "Foo", 1, 2)},
                                        {element("renamed type declaration", "Bar", 1, 2)})),
            (RenameInfo{"Foo", "Bar"}));
  EXPECT_FALSE(derive_rename_fields(record("Rename Method", {element("original", "getName()", 1, 2)}, {})).has_value());
  EXPECT_EQ(simple_identifier("public getName(int x) : String"), "getName");
  EXPECT_EQ(simple_identifier("org.a.Foo"), "Foo");
}

TEST(Commits, JsonlReaderAndValidation) {
  const CommitMap commits = read_commits_jsonl(testutil::fixture("gradle/commits.jsonl"));
  const CommitRecord& c = commits.at(kGradleSha);
  EXPECT_EQ(c.files_changed, 2);
  EXPECT_EQ(c.lines_inserted, 171);
  EXPECT_EQ(c.lines_deleted, 175);
  EXPECT_EQ(c.date, "2022-03-17T17:07:34Z");

  const CommitMap sample = read_commits_jsonl(testutil::fixture("sample/commits.jsonl"));
  for (const auto& [_, rec] : sample) EXPECT_TRUE(is_iso8601_utc(rec.date)) << rec.date;

  testutil::TempDir dir;
  std::ofstream(dir / "bad.jsonl") << testutil::read_text(testutil::fixture("gradle/commits.jsonl")) << "\n\n"
                                   << R"({"sha1":"xyz"})" << "\n";
  try {
    read_commits_jsonl(dir / "bad.jsonl");
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find(":4:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(commit_from_json(json::parse(R"({"sha1":"e35b0a8c39182fdfbd11164eee028099657c0393","date":"2022-03-17T17:07:34Z",
      "message":"m","authorName":"a","filesChanged":-1,"linesInserted":0,"linesDeleted":0})")),
               IngestError);
}

TEST(Convert, GradleRefDiffTotals) {
  const auto parsed = parse_refdiff_output(fixture_json("gradle/refdiff.json"));
  const auto commits = read_commits_jsonl(testutil::fixture("gradle/commits.jsonl"));
  const ConvertResult result = convert(parsed.records, commits, "https://github.com/gradle/gradle.git");
  ASSERT_EQ(result.cases.size(), 5u);
  EXPECT_EQ(result.rejected, 0u);
  for (const auto& c : result.cases) {
    EXPECT_EQ(c.commit.refactorings_total, 5);
    EXPECT_EQ(c.repository, kGradleRepo);
    EXPECT_TRUE(validate_case(c).empty());
    if (c.extract_method && c.after && c.after->location.begin) {
      EXPECT_EQ(c.extract_method->extracted_lines, c.after->location.lines);
    }
  }
  EXPECT_EQ(result.cases[0].id, "ee950f93fdeefe289ab9d6ed1957e3ef24f1b4e1");
  EXPECT_EQ(to_json(result.cases[0]), fixture_json("gradle/loader_for_case.json"));
}

TEST(Convert, EmptyDuplicatesAndMissingCommits) {
  EXPECT_TRUE(convert({}, {}, kGradleRepo).cases.empty());

  auto records = parse_refdiff_output(fixture_json("gradle/refdiff.json")).records;
  const auto commits = read_commits_jsonl(testutil::fixture("gradle/commits.jsonl"));
  records.push_back(records[0]);
  const ConvertResult dup = convert(records, commits, kGradleRepo);
  EXPECT_EQ(dup.cases.size(), 5u);
  EXPECT_EQ(dup.duplicates, 1u);

  const ConvertResult missing = convert(records, {}, kGradleRepo);
  EXPECT_TRUE(missing.cases.empty());
  EXPECT_EQ(missing.rejected, records.size());
}

TEST(Convert, TotalsArePerTool) {
  auto records = parse_refdiff_output(fixture_json("gradle/refdiff.json")).records;
  const auto rminer = parse_rminer_output(fixture_json("gradle/rminer.json")).records;
  records.insert(records.end(), rminer.begin(), rminer.end());
  const ConvertResult result = convert(records, read_commits_jsonl(testutil::fixture("gradle/commits.jsonl")), kGradleRepo);
  ASSERT_EQ(result.cases.size(), 7u);
  for (const auto& c : result.cases) EXPECT_EQ(c.commit.refactorings_total, c.tool == "RefDiff" ? 5 : 2);
}

namespace {

struct ShortStat {
  std::int64_t files = 0, inserted = 0, deleted = 0;
};

// git's own summary line, e.g. " 2 files changed, 3 insertions(+), 1 deletion(-)".
ShortStat parse_shortstat(const std::string& text) {
  ShortStat s;
  std::smatch m;
  if (std::regex_search(text, m, std::regex(R"((\d+) files? changed)"))) s.files = std::stoll(m[1]);
  if (std::regex_search(text, m, std::regex(R"((\d+) insertions?\(\+\))"))) s.inserted = std::stoll(m[1]);
  if (std::regex_search(text, m, std::regex(R"((\d+) deletions?\(-\))"))) s.deleted = std::stoll(m[1]);
  return s;
}

std::string sh(const std::string& cmd) {
  const ProcessResult r = run_shell(cmd);
  EXPECT_EQ(r.exit_code, 0) << cmd << "\n" << r.err;
  return r.out;
}

}  // namespace

TEST(GitHistory, MergeUsesFirstParentAndEmptyCommitIsZero) {
  testutil::TempDir dir;
  const std::string repo = shell_quote(dir.path().string());
  const std::string git = "git -C " + repo + " -c user.name=Dev -c user.email=dev@example.org ";
  sh("git init -q -b main " + repo);
  sh("printf 'a\\nb\\nc\\n' > " + repo + "/one.txt && " + git + "add . && " +
     "GIT_AUTHOR_DATE='2022-03-17T19:07:34+02:00' " + git + "commit -q -m 'first'");
  sh(git + "checkout -q -b side && printf 'x\\ny\\n' > " + repo + "/two.txt && printf 'a\\nB\\nc\\nd\\n' > " + repo +
     "/one.txt && " + git + "add . && " + git + "commit -q -m 'side change'");
  sh(git + "checkout -q main && printf 'z\\n' > " + repo + "/three.txt && " + git + "add . && " + git +
     "commit -q -m 'main change'");
  sh(git + "merge -q --no-ff side -m 'Merge side\n\nwith body'");
  sh(git + "commit -q --allow-empty -m 'empty'");

  const std::string merge = sh(git + "rev-parse HEAD~1").substr(0, 40);
  const std::string empty = sh(git + "rev-parse HEAD").substr(0, 40);
  const std::string first = sh(git + "rev-list --max-parents=0 HEAD").substr(0, 40);

  const CommitMap history = read_git_history(dir.path());
  EXPECT_EQ(history.size(), 5u);

  const ShortStat want = parse_shortstat(sh(git + "diff --shortstat --no-renames " + merge + "^1 " + merge));
  const CommitRecord& m = history.at(merge);
  EXPECT_EQ(m.files_changed, want.files);
  EXPECT_EQ(m.lines_inserted, want.inserted);
  EXPECT_EQ(m.lines_deleted, want.deleted);
  EXPECT_EQ(want.files, 2);
  EXPECT_EQ(m.message.rfind("Merge side", 0), 0u);
  EXPECT_NE(m.message.find("with body"), std::string::npos);

  const CommitRecord& e = history.at(empty);
  EXPECT_EQ(e.files_changed, 0);
  EXPECT_EQ(e.lines_inserted, 0);
  EXPECT_EQ(e.lines_deleted, 0);

  const CommitRecord& f = history.at(first);
  EXPECT_EQ(f.date, "2022-03-17T17:07:34Z");
  EXPECT_EQ(f.author_name, "Dev");
  EXPECT_EQ(f.files_changed, 1);
  EXPECT_EQ(f.lines_inserted, 3);

  EXPECT_THROW(read_git_history(dir / "missing"), IngestError);
}
