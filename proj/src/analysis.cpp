#include "sva/analysis.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>

#include "sva/numio.hpp"

namespace sva {

namespace {

constexpr std::array<ViolenceLabel, 2> kGatedLevels = {ViolenceLabel::Med, ViolenceLabel::High};
constexpr std::array<SpeakerRole, 3> kRoles = {SpeakerRole::Victim, SpeakerRole::Perpetrator,
                                               SpeakerRole::Narrator};

struct CharacterKey {
  std::string movie_id;
  std::string character_id;
  bool operator<(const CharacterKey& other) const {
    return std::tie(movie_id, character_id) < std::tie(other.movie_id, other.character_id);
  }
};

struct RoleCounts {
  std::array<long, 3> by_role{0, 0, 0};
  long total = 0;
};

BatteryRow failed_row(std::string grouping, const std::string& reason) {
  BatteryRow row;
  row.grouping = std::move(grouping);
  row.status = reason;
  return row;
}

BatteryRow result_row(std::string grouping, StatResult result) {
  BatteryRow row;
  row.grouping = std::move(grouping);
  row.result = std::move(result);
  row.status = "ok";
  return row;
}

CharacterDemo demo_for(const DemographicsIndex& demographics, const std::string& movie_id,
                       const std::string& character_id) {
  const auto it = demographics.find({movie_id, character_id});
  if (it == demographics.end()) return {};
  return {it->second.gender, it->second.race};
}

std::string gender_pair_key(const InteractionPair& pair) {
  return std::string(to_string(pair.perpetrator_demo.gender)) + ">" +
         std::string(to_string(pair.victim_demo.gender));
}

std::string race_pair_key(const InteractionPair& pair) {
  return std::string(to_string(pair.perpetrator_demo.race)) + ">" +
         std::string(to_string(pair.victim_demo.race));
}

std::string cell_key(const InteractionPair& pair, InteractionGrouping grouping) {
  switch (grouping) {
    case InteractionGrouping::GenderPair:
      return gender_pair_key(pair);
    case InteractionGrouping::RacePair:
      return race_pair_key(pair);
    case InteractionGrouping::GenderRaceBoth:
      return gender_pair_key(pair) + "|" + race_pair_key(pair);
  }
  return gender_pair_key(pair);
}

// Per-character role rates at one violence level, residualized against the
// movie fixed effect, then compared across speaker demographics.
void role_tests(const std::vector<RoleAssignment>& roles, const DemographicsIndex& demographics,
                ViolenceLabel level, std::vector<BatteryRow>& rows) {
  std::map<CharacterKey, RoleCounts> counts;
  for (const RoleAssignment& assignment : roles) {
    if (assignment.violence_level != level) continue;
    RoleCounts& c = counts[{assignment.triplet.movie_id, assignment.speaker_id}];
    c.by_role[static_cast<std::size_t>(assignment.speaker_role)] += 1;
    c.total += 1;
  }

  const std::string level_name(to_string(level));
  for (const SpeakerRole role : kRoles) {
    const std::string label = std::string(to_string(role)) + " rate at " + level_name;
    if (counts.empty()) {
      rows.push_back(failed_row("gender t-test: " + label, "no observations"));
      rows.push_back(failed_row("race ANOVA: " + label, "no observations"));
      continue;
    }

    std::vector<double> rates;
    std::vector<std::string> movie_ids;
    std::vector<CharacterDemo> demos;
    for (const auto& [key, c] : counts) {
      rates.push_back(static_cast<double>(c.by_role[static_cast<std::size_t>(role)]) /
                      static_cast<double>(c.total));
      movie_ids.push_back(key.movie_id);
      demos.push_back(demo_for(demographics, key.movie_id, key.character_id));
    }
    const std::vector<double> residuals = residualize_fixed_effect(rates, movie_ids);

    std::vector<double> female;
    std::vector<double> male;
    std::map<Race, std::vector<double>> by_race;
    for (std::size_t i = 0; i < residuals.size(); ++i) {
      if (demos[i].gender == Gender::Female) female.push_back(residuals[i]);
      if (demos[i].gender == Gender::Male) male.push_back(residuals[i]);
      if (demos[i].race != Race::Unknown) by_race[demos[i].race].push_back(residuals[i]);
    }

    try {
      rows.push_back(result_row("gender t-test: " + label, t_test_two_sample(female, male)));
    } catch (const ValidationError& e) {
      rows.push_back(failed_row("gender t-test: " + label, e.what()));
    }

    std::vector<std::vector<double>> race_groups;
    for (const auto& [race, values] : by_race) {
      if (!values.empty()) race_groups.push_back(values);
    }
    try {
      if (race_groups.size() < 2) throw ValidationError("fewer than 2 race groups observed");
      rows.push_back(result_row("race ANOVA: " + label, anova_oneway(race_groups)));
    } catch (const ValidationError& e) {
      rows.push_back(failed_row("race ANOVA: " + label, e.what()));
    }
  }
}

// One observation per distinct perpetrator/victim character pair: how many
// gated interactions that pair produced. Cells with a single pair cannot
// enter the ANOVA's within-group variance, but stay in the table.
void omnibus_test(const std::vector<InteractionPair>& interactions,
                  InteractionGrouping grouping, std::vector<BatteryRow>& rows) {
  const std::string label =
      std::string("interaction omnibus ANOVA over ") + std::string(to_string(grouping)) +
      " cells";
  if (interactions.empty()) {
    rows.push_back(failed_row(label, "no interactions"));
    return;
  }
  std::map<std::pair<std::string, std::string>, std::pair<std::string, long>> pair_counts;
  for (const InteractionPair& pair : interactions) {
    const std::string pair_id = pair.perpetrator_id + ">" + pair.victim_id;
    auto& [cell, count] = pair_counts[{pair.movie_id, pair_id}];
    cell = cell_key(pair, grouping);
    count += 1;
  }
  std::map<std::string, std::vector<double>> cells;
  for (const auto& [key, value] : pair_counts) {
    cells[value.first].push_back(static_cast<double>(value.second));
  }
  std::vector<std::vector<double>> groups;
  for (const auto& [cell, values] : cells) {
    groups.push_back(values);
  }
  try {
    if (groups.size() < 2) throw ValidationError("fewer than 2 demographic cells observed");
    rows.push_back(result_row(label, anova_oneway(groups)));
  } catch (const ValidationError& e) {
    rows.push_back(failed_row(label, e.what()));
  }
}

// Share of interactions falling in each perpetrator>victim gender cell,
// every unordered cell pair tested and Bonferroni-adjusted as one family.
void pairwise_gender_tests(const std::vector<InteractionPair>& interactions,
                           std::vector<BatteryRow>& rows) {
  const std::array<std::pair<Gender, Gender>, 4> cells = {
      std::make_pair(Gender::Female, Gender::Female), std::make_pair(Gender::Female, Gender::Male),
      std::make_pair(Gender::Male, Gender::Female), std::make_pair(Gender::Male, Gender::Male)};
  std::array<long, 4> counts{0, 0, 0, 0};
  long total = 0;
  for (const InteractionPair& pair : interactions) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (pair.perpetrator_demo.gender == cells[i].first &&
          pair.victim_demo.gender == cells[i].second) {
        counts[i] += 1;
        total += 1;
      }
    }
  }

  const auto cell_name = [&cells](std::size_t i) {
    return std::string(to_string(cells[i].first)) + ">" + std::string(to_string(cells[i].second));
  };

  std::vector<std::pair<std::size_t, std::size_t>> tested;
  std::vector<StatResult> results;
  std::vector<std::string> failures;
  std::vector<double> p_values;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      tested.emplace_back(i, j);
      if (total == 0) {
        failures.emplace_back("no gendered interactions");
        results.emplace_back();
        continue;
      }
      results.push_back(prop_test_two(counts[i], total, counts[j], total));
      failures.emplace_back();
      p_values.push_back(results.back().p_value);
    }
  }
  const std::vector<double> adjusted = bonferroni(p_values);

  std::size_t adjusted_index = 0;
  for (std::size_t t = 0; t < tested.size(); ++t) {
    const std::string label =
        "proportion test: " + cell_name(tested[t].first) + " vs " + cell_name(tested[t].second);
    if (!failures[t].empty()) {
      rows.push_back(failed_row(label, failures[t]));
      continue;
    }
    StatResult result = results[t];
    result.p_adjusted = adjusted[adjusted_index++];
    rows.push_back(result_row(label, std::move(result)));
  }
}

template <typename Enum>
void residual_block(const std::vector<InteractionPair>& interactions, const std::string& title,
                    Enum CharacterDemo::* field, std::vector<Enum> categories,
                    std::vector<ResidualBlock>& blocks) {
  std::vector<Enum> present;
  for (const Enum category : categories) {
    const bool seen_perp = std::any_of(
        interactions.begin(), interactions.end(),
        [&](const InteractionPair& p) { return p.perpetrator_demo.*field == category; });
    const bool seen_victim = std::any_of(
        interactions.begin(), interactions.end(),
        [&](const InteractionPair& p) { return p.victim_demo.*field == category; });
    if (seen_perp && seen_victim) present.push_back(category);
  }
  if (present.size() < 2) return;

  ContingencyTable table;
  table.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(present.size()),
                                       static_cast<Eigen::Index>(present.size()));
  for (const Enum category : present) {
    table.row_labels.emplace_back(to_string(category));
    table.col_labels.emplace_back(to_string(category));
  }
  for (const InteractionPair& pair : interactions) {
    const auto row = std::find(present.begin(), present.end(), pair.perpetrator_demo.*field);
    const auto col = std::find(present.begin(), present.end(), pair.victim_demo.*field);
    if (row == present.end() || col == present.end()) continue;
    table.counts(row - present.begin(), col - present.begin()) += 1.0;
  }
  if (table.counts.rowwise().sum().minCoeff() <= 0.0 ||
      table.counts.colwise().sum().minCoeff() <= 0.0) {
    return;
  }

  ResidualBlock block;
  block.title = title;
  block.residuals = pearson_residuals(table);
  block.table = std::move(table);
  blocks.push_back(std::move(block));
}

std::string format_optional(const std::optional<double>& value) {
  return value.has_value() ? format_double(*value) : std::string("-");
}

}  // namespace

InteractionGrouping grouping_from_string(std::string_view text) {
  if (text == "gender") return InteractionGrouping::GenderPair;
  if (text == "race") return InteractionGrouping::RacePair;
  if (text == "gender_race") return InteractionGrouping::GenderRaceBoth;
  throw ValidationError("unknown interaction grouping '" + std::string(text) +
                        "' (expected gender, race or gender_race)");
}

std::string_view to_string(InteractionGrouping grouping) {
  switch (grouping) {
    case InteractionGrouping::GenderPair: return "gender";
    case InteractionGrouping::RacePair: return "race";
    case InteractionGrouping::GenderRaceBoth: return "gender_race";
  }
  return "gender_race";
}

StatsReport run_battery(const std::vector<RoleAssignment>& roles,
                        const std::vector<InteractionPair>& interactions,
                        const DemographicsIndex& demographics, InteractionGrouping grouping) {
  for (const RoleAssignment& assignment : roles) {
    if (assignment.violence_level == ViolenceLabel::Low) {
      throw ValidationError("battery: LOW-classified assignment for movie '" +
                            assignment.triplet.movie_id + "' should have been gated out");
    }
  }

  StatsReport report;
  for (const ViolenceLabel level : kGatedLevels) {
    role_tests(roles, demographics, level, report.rows);
  }
  omnibus_test(interactions, grouping, report.rows);
  pairwise_gender_tests(interactions, report.rows);

  residual_block(interactions, "gender x gender interaction counts", &CharacterDemo::gender,
                 {Gender::Female, Gender::Male}, report.residual_blocks);
  residual_block(interactions, "race x race interaction counts", &CharacterDemo::race,
                 {Race::White, Race::Black, Race::Latino, Race::Asian, Race::Mixed, Race::Other},
                 report.residual_blocks);
  return report;
}

std::string format_stats_report(const StatsReport& report) {
  std::ostringstream out;
  out << "stats_report format=1\n";
  out << "kind\tgrouping\tstatistic\tdf1\tdf2\tp\tp_adjusted\tstars\tstatus\n";
  for (const BatteryRow& row : report.rows) {
    if (row.result.has_value()) {
      const StatResult& r = *row.result;
      out << to_string(r.test_kind) << '\t' << row.grouping << '\t'
          << format_double(r.statistic) << '\t' << format_double(r.df1) << '\t'
          << format_optional(r.df2) << '\t' << format_double(r.p_value) << '\t'
          << format_optional(r.p_adjusted) << '\t'
          << significance_stars(r.p_adjusted.value_or(r.p_value)) << '\t' << row.status << '\n';
    } else {
      out << "-\t" << row.grouping << "\t-\t-\t-\t-\t-\t\t" << row.status << '\n';
    }
  }
  for (const ResidualBlock& block : report.residual_blocks) {
    out << "[residuals " << block.title << "]\n";
    out << "perp\\victim";
    for (const std::string& label : block.table.col_labels) out << '\t' << label;
    out << '\n';
    for (Eigen::Index i = 0; i < block.residuals.rows(); ++i) {
      out << block.table.row_labels[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < block.residuals.cols(); ++j) {
        out << '\t' << format_double(block.residuals(i, j));
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace sva
