#pragma once

#include <iosfwd>
#include <string>

#include "sva/analysis.hpp"
#include "sva/pipeline.hpp"

namespace sva {

// Run configuration: a key=value text file plus command-line overrides
// (flags win). Paths are resolved relative to the working directory.
struct RunConfig {
  std::string scripts_dir;
  std::string manifest;
  std::string demographics;
  std::string embeddings;
  std::string sentiment;  // path, "bilstm:<seed>:<hidden>", or "zero"
  std::string parses;
  std::string genres;     // genre vocabulary file
  std::string out_dir = "out";
  std::string log_level = "info";

  int sentiment_dim = 8;  // width of the zero provider
  int ngram_order = 2;

  TrainConfig train;

  InteractionGrouping grouping = InteractionGrouping::GenderRaceBoth;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config_file(const std::string& path);

// Applies one key=value assignment; unknown keys are an error.
void apply_config_entry(RunConfig& cfg, std::string_view key, std::string_view value);

}  // namespace sva
