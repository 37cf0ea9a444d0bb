#pragma once

#include "hatelab/data.hpp"

#include <filesystem>
#include <ostream>

namespace hatelab {

struct PreprocessOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::filesystem::path fixtures;
  std::string text_column = "text";
  bool force = false;
};

struct ExperimentOptions {
  std::filesystem::path spec;
  std::size_t jobs = 1;
  bool force = false;
  bool quiet = false;
};

struct CompareOptions {
  std::filesystem::path a;
  std::filesystem::path b;
  std::filesystem::path output = "comparison.json";
  std::size_t subset = 3;
  bool force = false;
};

/// Each returns the process exit code: 0 on success, 1 on any error.
int cmd_preprocess(const PreprocessOptions& opts, std::ostream& out, std::ostream& err);
int cmd_experiment(const ExperimentOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace hatelab
