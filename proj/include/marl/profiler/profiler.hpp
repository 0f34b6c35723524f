#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace marl::profiler {

// Training phases. The last four listed before Other are children of
// UpdateAllTrainers; everything else sits directly under the run total.
enum class PhaseId : int {
  ActionSelection,
  EnvStep,
  ExperienceCollection,
  UpdateAllTrainers,
  MiniBatchSampling,
  TargetQCalc,
  QLoss,
  PLoss,
  Other,
};

inline constexpr std::size_t kPhaseCount = 9;
inline constexpr std::array<PhaseId, kPhaseCount> kAllPhases = {
    PhaseId::ActionSelection, PhaseId::EnvStep,     PhaseId::ExperienceCollection,
    PhaseId::UpdateAllTrainers, PhaseId::MiniBatchSampling, PhaseId::TargetQCalc,
    PhaseId::QLoss,           PhaseId::PLoss,       PhaseId::Other};

std::string_view name(PhaseId p);
std::optional<PhaseId> parse_phase(std::string_view s);
std::optional<PhaseId> parent(PhaseId p);

enum class NestingPolicy { Throw, Count };

#ifdef NDEBUG
inline constexpr NestingPolicy kDefaultNestingPolicy = NestingPolicy::Count;
#else
inline constexpr NestingPolicy kDefaultNestingPolicy = NestingPolicy::Throw;
#endif

// Extension point for attaching an external counter source (perf events,
// PAPI, ...) to every scope.
class PhaseObserver {
 public:
  virtual ~PhaseObserver() = default;
  virtual void on_enter(PhaseId phase) = 0;
  virtual void on_exit(PhaseId phase, std::int64_t elapsed_ns) = 0;
};

struct RunMeta {
  std::string scenario;
  std::string algorithm;
  std::string sampler;
  int n_agents = 0;
  std::uint64_t seed = 0;
  int episodes = 0;
  std::int64_t update_rounds = 0;
  std::int64_t skipped_updates = 0;
  std::int64_t sampler_fallbacks = 0;

  bool operator==(const RunMeta&) const = default;
};

class PhaseScope;

// Accumulated wall-clock time per phase for one training run. Not shared
// across threads; combine finished reports with merge().
class ProfileReport {
 public:
  explicit ProfileReport(NestingPolicy policy = kDefaultNestingPolicy) : policy_(policy) {}

  std::int64_t ns(PhaseId p) const { return ns_[index(p)]; }
  std::int64_t count(PhaseId p) const { return count_[index(p)]; }
  std::int64_t total_ns() const { return total_ns_; }
  std::int64_t nesting_violations() const { return violations_; }

  void add(PhaseId p, std::int64_t ns, std::int64_t count = 1);
  void set_total_ns(std::int64_t ns) { total_ns_ = ns; }
  void set_observer(PhaseObserver* observer) { observer_ = observer; }

  // Unattributed time directly under the run total.
  std::int64_t residual_ns() const;

  RunMeta meta;

 private:
  friend class PhaseScope;
  static std::size_t index(PhaseId p) { return static_cast<std::size_t>(p); }
  bool try_enter(PhaseId p);
  void leave(PhaseId p, std::int64_t elapsed_ns);

  NestingPolicy policy_;
  std::array<std::int64_t, kPhaseCount> ns_{};
  std::array<std::int64_t, kPhaseCount> count_{};
  std::int64_t total_ns_ = 0;
  std::int64_t violations_ = 0;
  std::array<PhaseId, 4> open_{};
  int depth_ = 0;
  PhaseObserver* observer_ = nullptr;
};

// Adds the elapsed monotonic time to its phase on destruction.
class PhaseScope {
 public:
  PhaseScope(ProfileReport& report, PhaseId phase);
  ~PhaseScope();
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  ProfileReport& report_;
  PhaseId phase_;
  bool active_;
  std::chrono::steady_clock::time_point start_;
};

[[nodiscard]] inline PhaseScope phase_scope(ProfileReport& report, PhaseId phase) {
  return PhaseScope(report, phase);
}

struct BreakdownRow {
  std::string name;
  std::optional<PhaseId> phase;   // empty for the update-level residual row
  std::optional<PhaseId> parent;  // empty for rows directly under the total
  std::int64_t ns = 0;
  double percent = 0;
};

// Percent-of-parent rows. Each level closes to 100% through a residual row:
// Other under the total, "Unattributed" under UpdateAllTrainers.
std::vector<BreakdownRow> breakdown(const ProfileReport& report);

struct GrowthRates {
  std::array<std::optional<double>, kPhaseCount> phase{};
  std::optional<double> total;

  std::optional<double> operator[](PhaseId p) const { return phase[static_cast<std::size_t>(p)]; }
};

// time_b / time_a per phase; empty where the denominator is zero.
GrowthRates growth_rate(const ProfileReport& a, const ProfileReport& b);

ProfileReport merge(const ProfileReport& a, const ProfileReport& b);

nlohmann::json to_json(const ProfileReport& report);
ProfileReport from_json(const nlohmann::json& j);
std::string to_csv(const ProfileReport& report);

}  // namespace marl::profiler
