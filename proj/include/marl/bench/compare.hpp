#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace marl::bench {

struct PaperReference {
  int n_agents;
  double sampling_reduction_pct;
  double total_reduction_pct;
  double reward_baseline;
  double reward_optimized;
};

// Published desk-independent reference values, shown beside measurements.
const std::vector<PaperReference>& paper_reference();

struct MeanStd {
  double mean = 0;
  double stddev = 0;  // population
};

MeanStd mean_std(const std::vector<double>& xs);

struct CellSummary {
  int n_agents = 0;
  std::uint64_t seed = 0;
  double sampling_ms = 0;
  double total_ms = 0;
  std::int64_t update_rounds = 0;
  double final_reward = 0;        // mean over the last 10% of episodes
  double first_window_reward = 0; // mean over the first min(100, episodes) episodes
  int episodes = 0;
};

CellSummary load_cell(const std::filesystem::path& dir);
std::vector<CellSummary> load_cells(const std::filesystem::path& dir);

// Mean over the final 10% of a reward series (at least one episode).
double final_window_mean(const std::vector<double>& rewards);

struct ComparisonRow {
  int n_agents = 0;
  int seeds = 0;
  MeanStd sampling_base, sampling_opt;
  double sampling_reduction_pct = 0;
  MeanStd total_base, total_opt;
  double total_reduction_pct = 0;
  MeanStd reward_base, reward_opt;
  double reward_delta_pct = 0;  // 100 * (opt - base) / |base|
  bool reward_parity = true;    // |opt - base| <= 10% of |base|
  std::optional<PaperReference> reference;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;

  // Optimized total time no worse than baseline by more than tolerance_pct
  // at every agent count.
  bool non_regression(double tolerance_pct = 2.0) const;
};

double percent_reduction(double base, double opt);

ComparisonReport cmd_compare(const std::filesystem::path& baseline_dir,
                             const std::filesystem::path& optimized_dir);

nlohmann::json to_json(const ComparisonReport& r);
std::string to_table(const ComparisonReport& r);

}  // namespace marl::bench
