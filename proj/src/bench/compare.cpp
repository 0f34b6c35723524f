#include "marl/bench/compare.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "marl/errors.hpp"
#include "marl/profiler/profiler.hpp"

namespace marl::bench {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<PaperReference>& paper_reference() {
  static const std::vector<PaperReference> refs = {
      {3, 26.66, 5.6, 21.04, 20.05},
      {6, 26.68, 7.8, 103.96, 105.94},
      {12, 27.39, 10.2, 870.39, 872.49},
  };
  return refs;
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(var / static_cast<double>(xs.size()));
  return m;
}

double final_window_mean(const std::vector<double>& rewards) {
  if (rewards.empty()) return 0;
  const std::size_t window = std::max<std::size_t>(1, rewards.size() / 10);
  double sum = 0;
  for (std::size_t k = rewards.size() - window; k < rewards.size(); ++k) sum += rewards[k];
  return sum / static_cast<double>(window);
}

double percent_reduction(double base, double opt) {
  return base != 0 ? 100.0 * (base - opt) / base : 0.0;
}

namespace {

json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot open " + p.string());
  return json::parse(f);
}

std::vector<double> read_mean_rewards(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot open " + p.string());
  std::string line;
  std::getline(f, line);
  std::vector<double> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string episode, reward;
    std::getline(row, episode, ',');
    std::getline(row, reward, ',');
    out.push_back(std::stod(reward));
  }
  return out;
}

}  // namespace

CellSummary load_cell(const fs::path& dir) {
  const json run = read_json(dir / "run.json");
  if (run.value("status", "") != "ok") {
    throw std::runtime_error(dir.string() + ": run did not complete");
  }
  const auto profile = profiler::from_json(read_json(dir / "profile.json"));
  const auto rewards = read_mean_rewards(dir / "stats.csv");
  CellSummary c;
  c.n_agents = run.at("n_agents").get<int>();
  c.seed = run.at("seed").get<std::uint64_t>();
  c.sampling_ms = static_cast<double>(profile.ns(profiler::PhaseId::MiniBatchSampling)) / 1e6;
  c.total_ms = static_cast<double>(profile.total_ns()) / 1e6;
  c.update_rounds = profile.meta.update_rounds;
  c.episodes = static_cast<int>(rewards.size());
  c.final_reward = final_window_mean(rewards);
  const std::size_t first = std::min<std::size_t>(100, rewards.size());
  double sum = 0;
  for (std::size_t k = 0; k < first; ++k) sum += rewards[k];
  c.first_window_reward = first ? sum / static_cast<double>(first) : 0.0;
  return c;
}

std::vector<CellSummary> load_cells(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::vector<fs::path> cells;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "run.json")) cells.push_back(entry.path());
  }
  std::sort(cells.begin(), cells.end());
  std::vector<CellSummary> out;
  for (const auto& c : cells) out.push_back(load_cell(c));
  return out;
}

ComparisonReport cmd_compare(const fs::path& baseline_dir, const fs::path& optimized_dir) {
  using Key = std::pair<int, std::uint64_t>;
  std::map<Key, CellSummary> base, opt;
  for (auto& c : load_cells(baseline_dir)) base[{c.n_agents, c.seed}] = c;
  for (auto& c : load_cells(optimized_dir)) opt[{c.n_agents, c.seed}] = c;
  if (base.empty()) throw PairingError("no runs found in " + baseline_dir.string());

  std::string missing;
  auto note = [&missing](const Key& k, const char* where) {
    missing += " (" + std::to_string(k.first) + ", seed " + std::to_string(k.second) + ") missing from " + where + ";";
  };
  for (const auto& [k, _] : base) {
    if (!opt.count(k)) note(k, "optimized");
  }
  for (const auto& [k, _] : opt) {
    if (!base.count(k)) note(k, "baseline");
  }
  if (!missing.empty()) throw PairingError("unpaired runs:" + missing);

  std::set<int> counts;
  for (const auto& [k, _] : base) counts.insert(k.first);
  ComparisonReport report;
  for (int n : counts) {
    std::vector<double> sb, so, tb, to, rb, ro;
    for (const auto& [k, c] : base) {
      if (k.first != n) continue;
      const auto& o = opt.at(k);
      sb.push_back(c.sampling_ms);
      so.push_back(o.sampling_ms);
      tb.push_back(c.total_ms);
      to.push_back(o.total_ms);
      rb.push_back(c.final_reward);
      ro.push_back(o.final_reward);
    }
    ComparisonRow row;
    row.n_agents = n;
    row.seeds = static_cast<int>(sb.size());
    row.sampling_base = mean_std(sb);
    row.sampling_opt = mean_std(so);
    row.sampling_reduction_pct = percent_reduction(row.sampling_base.mean, row.sampling_opt.mean);
    row.total_base = mean_std(tb);
    row.total_opt = mean_std(to);
    row.total_reduction_pct = percent_reduction(row.total_base.mean, row.total_opt.mean);
    row.reward_base = mean_std(rb);
    row.reward_opt = mean_std(ro);
    const double delta = row.reward_opt.mean - row.reward_base.mean;
    const double scale = std::abs(row.reward_base.mean);
    row.reward_delta_pct = scale > 0 ? 100.0 * delta / scale : 0.0;
    row.reward_parity = std::abs(delta) <= 0.1 * scale;
    for (const auto& ref : paper_reference()) {
      if (ref.n_agents == n) row.reference = ref;
    }
    report.rows.push_back(row);
  }
  return report;
}

bool ComparisonReport::non_regression(double tolerance_pct) const {
  return std::all_of(rows.begin(), rows.end(), [tolerance_pct](const ComparisonRow& r) {
    return r.total_reduction_pct >= -tolerance_pct;
  });
}

json to_json(const ComparisonReport& r) {
  auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"stddev", m.stddev}}; };
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j{{"n_agents", row.n_agents},
           {"seeds", row.seeds},
           {"sampling_ms", {{"baseline", ms(row.sampling_base)}, {"optimized", ms(row.sampling_opt)}}},
           {"sampling_reduction_pct", row.sampling_reduction_pct},
           {"total_ms", {{"baseline", ms(row.total_base)}, {"optimized", ms(row.total_opt)}}},
           {"total_reduction_pct", row.total_reduction_pct},
           {"final_reward", {{"baseline", ms(row.reward_base)}, {"optimized", ms(row.reward_opt)}}},
           {"reward_delta_pct", row.reward_delta_pct},
           {"reward_parity", row.reward_parity}};
    if (row.reference) {
      j["reference"] = {{"sampling_reduction_pct", row.reference->sampling_reduction_pct},
                        {"total_reduction_pct", row.reference->total_reduction_pct},
                        {"reward_baseline", row.reference->reward_baseline},
                        {"reward_optimized", row.reference->reward_optimized}};
    }
    rows.push_back(j);
  }
  return {{"kind", "comparison"}, {"rows", rows}, {"non_regression_2pct", r.non_regression()}};
}

std::string to_table(const ComparisonReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::setw(4) << "N" << std::setw(6) << "seeds" << std::setw(14) << "samp base ms"
     << std::setw(14) << "samp opt ms" << std::setw(10) << "samp %" << std::setw(14)
     << "total base ms" << std::setw(14) << "total opt ms" << std::setw(10) << "total %"
     << std::setw(12) << "rew base" << std::setw(12) << "rew opt" << std::setw(8) << "parity"
     << "   ref samp% / total% / rewards\n";
  for (const auto& row : r.rows) {
    os << std::setw(4) << row.n_agents << std::setw(6) << row.seeds << std::setw(14)
       << row.sampling_base.mean << std::setw(14) << row.sampling_opt.mean << std::setw(10)
       << row.sampling_reduction_pct << std::setw(14) << row.total_base.mean << std::setw(14)
       << row.total_opt.mean << std::setw(10) << row.total_reduction_pct << std::setw(12)
       << row.reward_base.mean << std::setw(12) << row.reward_opt.mean << std::setw(8)
       << (row.reward_parity ? "ok" : "FLAG");
    if (row.reference) {
      os << "   " << row.reference->sampling_reduction_pct << " / "
         << row.reference->total_reduction_pct << " / " << row.reference->reward_baseline
         << " -> " << row.reference->reward_optimized;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace marl::bench
