#include "refsearch/bench.hpp"

#include <algorithm>
#include <chrono>

namespace refsearch {

BenchQueryError::BenchQueryError(std::size_t line, const ParseError& error)
    : std::runtime_error("line " + std::to_string(line) + ": " + error.message()), line_(line), error_(error) {}

std::vector<BenchQuery> read_bench_queries(std::istream& in) {
  std::vector<BenchQuery> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      QueryAst ast = parse_query(line);
      out.push_back(BenchQuery{line, line_no, std::move(ast)});
    } catch (const ParseError& e) {
      throw BenchQueryError(line_no, e);
    }
  }
  return out;
}

double median_of(std::vector<double> samples) {
  if (samples.empty()) return 0;
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  return samples.size() % 2 == 1 ? samples[mid] : (samples[mid - 1] + samples[mid]) / 2;
}

BenchReport run_bench(const Store& store, const std::vector<BenchQuery>& queries, std::size_t repeat) {
  using clock = std::chrono::steady_clock;
  BenchReport report;
  report.corpus_size = store.size();
  report.repeat = repeat;
  for (const auto& q : queries) {
    SearchRequest request;
    request.query = q.ast;
    BenchEntry entry;
    entry.query = q.text;
    entry.line = q.line;
    entry.plan = store.plan(q.ast).describe();
    entry.total = store.search(request).total;  // warm-up
    for (std::size_t i = 0; i < repeat; ++i) {
      const auto start = clock::now();
      const SearchPage page = store.search(request);
      const std::chrono::duration<double, std::milli> elapsed = clock::now() - start;
      entry.samples_ms.push_back(elapsed.count());
      entry.total = page.total;
    }
    if (!entry.samples_ms.empty()) {
      entry.min_ms = *std::min_element(entry.samples_ms.begin(), entry.samples_ms.end());
      entry.max_ms = *std::max_element(entry.samples_ms.begin(), entry.samples_ms.end());
      entry.median_ms = median_of(entry.samples_ms);
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"query", e.query},
                       {"line", e.line},
                       {"plan", e.plan},
                       {"total", e.total},
                       {"minMs", e.min_ms},
                       {"medianMs", e.median_ms},
                       {"maxMs", e.max_ms},
                       {"samplesMs", e.samples_ms}});
  }
  return {{"corpusSize", report.corpus_size}, {"repeat", report.repeat}, {"queries", std::move(entries)}};
}

}  // namespace refsearch
