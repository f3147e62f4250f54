#pragma once

#include <cstddef>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "refsearch/store.hpp"

namespace refsearch {

struct BenchQuery {
  std::string text;
  std::size_t line = 0;
  QueryAst ast;
};

/// A query line that does not parse.
class BenchQueryError : public std::runtime_error {
 public:
  BenchQueryError(std::size_t line, const ParseError& error);
  std::size_t line() const { return line_; }
  const ParseError& error() const { return error_; }

 private:
  std::size_t line_;
  ParseError error_;
};

/// One query per line; blank lines and lines starting with `#` are skipped.
/// Throws BenchQueryError.
std::vector<BenchQuery> read_bench_queries(std::istream& in);

struct BenchEntry {
  std::string query;
  std::size_t line = 0;
  std::string plan;
  std::size_t total = 0;
  std::vector<double> samples_ms;
  double min_ms = 0;
  double median_ms = 0;
  double max_ms = 0;
};

struct BenchReport {
  std::size_t corpus_size = 0;
  std::size_t repeat = 0;
  std::vector<BenchEntry> entries;
};

/// Runs every query once to warm up, then `repeat` timed times as a first
/// page search with the default sort.
BenchReport run_bench(const Store& store, const std::vector<BenchQuery>& queries, std::size_t repeat);

nlohmann::json to_json(const BenchReport& report);

double median_of(std::vector<double> samples);

}  // namespace refsearch
