#include "marl/profiler/profiler.hpp"

#include <iostream>
#include <sstream>

#include "marl/errors.hpp"

namespace marl::profiler {

std::string_view name(PhaseId p) {
  switch (p) {
    case PhaseId::ActionSelection: return "ActionSelection";
    case PhaseId::EnvStep: return "EnvStep";
    case PhaseId::ExperienceCollection: return "ExperienceCollection";
    case PhaseId::UpdateAllTrainers: return "UpdateAllTrainers";
    case PhaseId::MiniBatchSampling: return "MiniBatchSampling";
    case PhaseId::TargetQCalc: return "TargetQCalc";
    case PhaseId::QLoss: return "QLoss";
    case PhaseId::PLoss: return "PLoss";
    case PhaseId::Other: return "Other";
  }
  return "?";
}

std::optional<PhaseId> parse_phase(std::string_view s) {
  for (auto p : kAllPhases) {
    if (name(p) == s) return p;
  }
  return std::nullopt;
}

std::optional<PhaseId> parent(PhaseId p) {
  switch (p) {
    case PhaseId::MiniBatchSampling:
    case PhaseId::TargetQCalc:
    case PhaseId::QLoss:
    case PhaseId::PLoss: return PhaseId::UpdateAllTrainers;
    default: return std::nullopt;
  }
}

void ProfileReport::add(PhaseId p, std::int64_t ns, std::int64_t count) {
  ns_[index(p)] += ns;
  count_[index(p)] += count;
}

std::int64_t ProfileReport::residual_ns() const {
  std::int64_t attributed = 0;
  for (auto p : kAllPhases) {
    if (!parent(p) && p != PhaseId::Other) attributed += ns(p);
  }
  return std::max<std::int64_t>(0, total_ns_ - attributed - ns(PhaseId::Other));
}

bool ProfileReport::try_enter(PhaseId p) {
  const auto want = parent(p);
  const bool ok = want ? (depth_ > 0 && open_[depth_ - 1] == *want) : depth_ == 0;
  if (!ok) {
    std::string msg = "illegal phase nesting: " + std::string(name(p)) + " inside " +
                      (depth_ > 0 ? std::string(name(open_[depth_ - 1])) : std::string("<root>"));
    if (policy_ == NestingPolicy::Throw) throw InstrumentationError(msg);
    if (violations_++ == 0) std::cerr << "warning: " << msg << '\n';
    return false;
  }
  open_[depth_++] = p;
  if (observer_) observer_->on_enter(p);
  return true;
}

void ProfileReport::leave(PhaseId p, std::int64_t elapsed_ns) {
  --depth_;
  add(p, elapsed_ns);
  if (observer_) observer_->on_exit(p, elapsed_ns);
}

PhaseScope::PhaseScope(ProfileReport& report, PhaseId phase)
    : report_(report), phase_(phase), active_(report.try_enter(phase)) {
  start_ = std::chrono::steady_clock::now();
}

PhaseScope::~PhaseScope() {
  if (!active_) return;
  const auto elapsed = std::chrono::steady_clock::now() - start_;
  report_.leave(phase_, std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());
}

std::vector<BreakdownRow> breakdown(const ProfileReport& r) {
  if (r.total_ns() <= 0) throw EmptyReportError("breakdown: report has no recorded time");
  std::vector<BreakdownRow> rows;
  const double total = static_cast<double>(r.total_ns());
  for (auto p : kAllPhases) {
    if (parent(p) || p == PhaseId::Other) continue;
    rows.push_back({std::string(name(p)), p, std::nullopt, r.ns(p), 100.0 * r.ns(p) / total});
  }
  const std::int64_t other = r.ns(PhaseId::Other) + r.residual_ns();
  rows.push_back({"Other", PhaseId::Other, std::nullopt, other, 100.0 * other / total});

  const std::int64_t update = r.ns(PhaseId::UpdateAllTrainers);
  if (update > 0) {
    std::int64_t children = 0;
    for (auto p : kAllPhases) {
      if (parent(p) != PhaseId::UpdateAllTrainers) continue;
      children += r.ns(p);
      rows.push_back({std::string(name(p)), p, PhaseId::UpdateAllTrainers, r.ns(p),
                      100.0 * r.ns(p) / static_cast<double>(update)});
    }
    const std::int64_t rest = std::max<std::int64_t>(0, update - children);
    rows.push_back({"Unattributed", std::nullopt, PhaseId::UpdateAllTrainers, rest,
                    100.0 * rest / static_cast<double>(update)});
  }
  return rows;
}

GrowthRates growth_rate(const ProfileReport& a, const ProfileReport& b) {
  auto ratio = [](std::int64_t num, std::int64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  GrowthRates g;
  for (auto p : kAllPhases) {
    const auto i = static_cast<std::size_t>(p);
    if (p == PhaseId::Other) {
      g.phase[i] = ratio(b.ns(p) + b.residual_ns(), a.ns(p) + a.residual_ns());
    } else {
      g.phase[i] = ratio(b.ns(p), a.ns(p));
    }
  }
  g.total = ratio(b.total_ns(), a.total_ns());
  return g;
}

ProfileReport merge(const ProfileReport& a, const ProfileReport& b) {
  ProfileReport out = a;
  for (auto p : kAllPhases) out.add(p, b.ns(p), b.count(p));
  out.set_total_ns(a.total_ns() + b.total_ns());
  out.meta.update_rounds += b.meta.update_rounds;
  out.meta.skipped_updates += b.meta.skipped_updates;
  out.meta.sampler_fallbacks += b.meta.sampler_fallbacks;
  return out;
}

namespace {

double pct_of_parent(const ProfileReport& r, PhaseId p, std::int64_t ns) {
  const auto up = parent(p);
  const std::int64_t den = up ? r.ns(*up) : r.total_ns();
  return den > 0 ? 100.0 * static_cast<double>(ns) / static_cast<double>(den) : 0.0;
}

std::int64_t reported_ns(const ProfileReport& r, PhaseId p) {
  return p == PhaseId::Other ? r.ns(p) + r.residual_ns() : r.ns(p);
}

}  // namespace

nlohmann::json to_json(const ProfileReport& r) {
  nlohmann::json j;
  j["meta"] = {{"scenario", r.meta.scenario},
               {"algorithm", r.meta.algorithm},
               {"sampler", r.meta.sampler},
               {"n_agents", r.meta.n_agents},
               {"seed", r.meta.seed},
               {"episodes", r.meta.episodes},
               {"update_rounds", r.meta.update_rounds},
               {"skipped_updates", r.meta.skipped_updates},
               {"sampler_fallbacks", r.meta.sampler_fallbacks},
               {"total_ns", r.total_ns()}};
  j["phases"] = nlohmann::json::array();
  for (auto p : kAllPhases) {
    const auto ns = reported_ns(r, p);
    const auto up = parent(p);
    j["phases"].push_back({{"name", name(p)},
                           {"parent", up ? std::string(name(*up)) : std::string("total")},
                           {"ns", ns},
                           {"count", r.count(p)},
                           {"pct_of_parent", pct_of_parent(r, p, ns)}});
  }
  return j;
}

ProfileReport from_json(const nlohmann::json& j) {
  ProfileReport r;
  const auto& m = j.at("meta");
  r.meta.scenario = m.value("scenario", "");
  r.meta.algorithm = m.value("algorithm", "");
  r.meta.sampler = m.value("sampler", "");
  r.meta.n_agents = m.value("n_agents", 0);
  r.meta.seed = m.value("seed", std::uint64_t{0});
  r.meta.episodes = m.value("episodes", 0);
  r.meta.update_rounds = m.value("update_rounds", std::int64_t{0});
  r.meta.skipped_updates = m.value("skipped_updates", std::int64_t{0});
  r.meta.sampler_fallbacks = m.value("sampler_fallbacks", std::int64_t{0});
  r.set_total_ns(m.at("total_ns").get<std::int64_t>());
  for (const auto& ph : j.at("phases")) {
    const auto p = parse_phase(ph.at("name").get<std::string>());
    if (!p) throw std::runtime_error("unknown phase " + ph.at("name").get<std::string>());
    r.add(*p, ph.at("ns").get<std::int64_t>(), ph.at("count").get<std::int64_t>());
  }
  return r;
}

std::string to_csv(const ProfileReport& r) {
  std::ostringstream os;
  os << "name,parent,ns,count,pct_of_parent\n";
  for (auto p : kAllPhases) {
    const auto ns = reported_ns(r, p);
    const auto up = parent(p);
    os << name(p) << ',' << (up ? name(*up) : std::string_view("total")) << ',' << ns << ','
       << r.count(p) << ',' << pct_of_parent(r, p, ns) << '\n';
  }
  os << "total,," << r.total_ns() << ",1,100\n";
  return os.str();
}

}  // namespace marl::profiler
