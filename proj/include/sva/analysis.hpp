#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sva/roles.hpp"
#include "sva/stats.hpp"

namespace sva {

// Grouping key for the interaction omnibus test.
enum class InteractionGrouping { GenderPair, RacePair, GenderRaceBoth };

InteractionGrouping grouping_from_string(std::string_view text);
std::string_view to_string(InteractionGrouping grouping);

struct BatteryRow {
  std::string grouping;              // human-readable description
  std::optional<StatResult> result;  // absent when the test was degenerate
  std::string status;                // "ok" or the reason it could not run
};

struct ResidualBlock {
  std::string title;
  ContingencyTable table;
  Eigen::MatrixXd residuals;
};

struct StatsReport {
  std::vector<BatteryRow> rows;
  std::vector<ResidualBlock> residual_blocks;
};

// The full battery over gated role assignments:
//  - per violence level and role, gender t-tests and race ANOVAs on
//    per-character role rates residualized against the movie fixed effect;
//  - an omnibus ANOVA over interaction-cell frequencies (one observation
//    per perpetrator/victim character pair);
//  - pairwise gender-cell proportion tests with Bonferroni correction;
//  - Pearson residual tables for gender x gender and race x race.
// `demographics` supplies speaker gender and race. Degenerate inputs (too
// few observations, zero variance) produce a row with a status message
// instead of failing the run.
StatsReport run_battery(const std::vector<RoleAssignment>& roles,
                        const std::vector<InteractionPair>& interactions,
                        const DemographicsIndex& demographics,
                        InteractionGrouping grouping = InteractionGrouping::GenderRaceBoth);

std::string format_stats_report(const StatsReport& report);

}  // namespace sva
