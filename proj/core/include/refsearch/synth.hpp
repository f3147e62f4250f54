#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "refsearch/refactoring_case.hpp"

namespace refsearch {

struct SynthOptions {
  std::size_t count = 300000;
  std::uint64_t seed = 42;
  std::size_t repositories = 10;
  /// Cases handed to the sink per call.
  std::size_t batch_size = 5000;
  /// Commit dates are spread over this many years ending 2022-12-31.
  int years = 10;
};

/// Refactoring types the generator draws from, most frequent first.
const std::vector<std::string>& synth_types();

/// Deterministic synthetic corpus: commits with one to eight cases each,
/// Extract Method cases with consistent line spans, renames where about a
/// third of the method renames turn a getter into `retrieve*`.
void generate_corpus(const SynthOptions& options,
                     const std::function<void(std::vector<RefactoringCase>&&)>& sink);

std::vector<RefactoringCase> generate_cases(const SynthOptions& options);

}  // namespace refsearch
