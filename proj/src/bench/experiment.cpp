#include "marl/bench/experiment.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "marl/errors.hpp"
#include "marl/nn/serialize.hpp"

namespace marl::bench {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentSpec::validate() const {
  trainer.validate();
  if (repetitions < 1) throw ParameterError("repetitions must be >= 1");
  if (sweep.empty()) throw ParameterError("sweep must not be empty");
  for (int n : sweep) {
    if (n < 1) throw ParameterError("sweep values must be >= 1");
  }
  if (jobs < 1) throw ParameterError("jobs must be >= 1");
  if (landmarks && *landmarks < 0) throw ParameterError("landmarks must be >= 0");
  env_for(sweep.front(), trainer.seed).validate();
}

envs::EnvConfig ExperimentSpec::env_for(int n_learners, std::uint64_t seed) const {
  envs::EnvConfig e = env;
  e.n_learners = n_learners;
  e.seed = seed;
  if (e.scenario == envs::Scenario::CoopNav) {
    e.n_prey = 0;
    e.n_landmarks = landmarks.value_or(n_learners);
  } else {
    e.n_landmarks = landmarks.value_or(0);
  }
  return e;
}

trainers::TrainerConfig ExperimentSpec::trainer_for(std::uint64_t seed) const {
  auto t = trainer;
  t.seed = seed;
  return t;
}

json to_json(const ExperimentSpec& s) {
  const auto& t = s.trainer;
  const auto& e = s.env;
  json j;
  j["schema_version"] = kSpecSchemaVersion;
  j["trainer"] = {{"gamma", t.gamma},
                  {"tau", t.tau},
                  {"lr", t.lr},
                  {"batch_size", t.batch_size},
                  {"update_every", t.update_every},
                  {"buffer_capacity", t.buffer_capacity},
                  {"entropy_alpha", t.entropy_alpha},
                  {"exploration_sigma", t.exploration_sigma},
                  {"algorithm", trainers::to_string(t.algorithm)},
                  {"sampler", trainers::to_string(t.sampler)},
                  {"neighbors", t.neighbors},
                  {"episodes", t.episodes},
                  {"seed", t.seed},
                  {"hidden", t.hidden},
                  {"mask_time_limit_dones", t.mask_time_limit_dones}};
  j["env"] = {{"scenario", envs::to_string(e.scenario)},
              {"n_prey", e.n_prey},
              {"landmarks", s.landmarks ? json(*s.landmarks) : json(nullptr)},
              {"dt", e.dt},
              {"damping", e.damping},
              {"max_speed", e.max_speed},
              {"max_episode_length", e.max_episode_length},
              {"world_halfwidth", e.world_halfwidth},
              {"agent_radius", e.agent_radius},
              {"landmark_radius", e.landmark_radius},
              {"collision_penalty", e.collision_penalty},
              {"tag_reward", e.tag_reward},
              {"distance_shaping", e.distance_shaping}};
  j["sweep"] = s.sweep;
  j["repetitions"] = s.repetitions;
  j["out"] = s.out_dir.string();
  j["jobs"] = s.jobs;
  j["checkpoints"] = s.checkpoints;
  return j;
}

namespace {

template <typename T>
void read(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj.at(key).get<T>();
}

}  // namespace

ExperimentSpec spec_from_json(const json& j) {
  const int version = j.value("schema_version", 0);
  if (version != kSpecSchemaVersion) {
    throw ParameterError("unsupported config schema_version " + std::to_string(version));
  }
  ExperimentSpec s;
  if (j.contains("trainer")) {
    const auto& t = j.at("trainer");
    read(t, "gamma", s.trainer.gamma);
    read(t, "tau", s.trainer.tau);
    read(t, "lr", s.trainer.lr);
    read(t, "batch_size", s.trainer.batch_size);
    read(t, "update_every", s.trainer.update_every);
    read(t, "buffer_capacity", s.trainer.buffer_capacity);
    read(t, "entropy_alpha", s.trainer.entropy_alpha);
    read(t, "exploration_sigma", s.trainer.exploration_sigma);
    if (t.contains("algorithm")) s.trainer.algorithm = trainers::parse_algorithm(t.at("algorithm").get<std::string>());
    if (t.contains("sampler")) s.trainer.sampler = trainers::parse_sampler(t.at("sampler").get<std::string>());
    read(t, "neighbors", s.trainer.neighbors);
    read(t, "episodes", s.trainer.episodes);
    read(t, "seed", s.trainer.seed);
    read(t, "hidden", s.trainer.hidden);
    read(t, "mask_time_limit_dones", s.trainer.mask_time_limit_dones);
  }
  if (j.contains("env")) {
    const auto& e = j.at("env");
    if (e.contains("scenario")) s.env.scenario = envs::parse_scenario(e.at("scenario").get<std::string>());
    read(e, "n_prey", s.env.n_prey);
    if (e.contains("landmarks") && !e.at("landmarks").is_null()) s.landmarks = e.at("landmarks").get<int>();
    read(e, "dt", s.env.dt);
    read(e, "damping", s.env.damping);
    read(e, "max_speed", s.env.max_speed);
    read(e, "max_episode_length", s.env.max_episode_length);
    read(e, "world_halfwidth", s.env.world_halfwidth);
    read(e, "agent_radius", s.env.agent_radius);
    read(e, "landmark_radius", s.env.landmark_radius);
    read(e, "collision_penalty", s.env.collision_penalty);
    read(e, "tag_reward", s.env.tag_reward);
    read(e, "distance_shaping", s.env.distance_shaping);
  }
  read(j, "sweep", s.sweep);
  read(j, "repetitions", s.repetitions);
  if (j.contains("out")) s.out_dir = j.at("out").get<std::string>();
  read(j, "jobs", s.jobs);
  read(j, "checkpoints", s.checkpoints);
  if (s.env.scenario == envs::Scenario::CoopNav) s.env.n_prey = 0;
  if (s.env.scenario == envs::Scenario::PredatorPrey && !(j.contains("env") && j["env"].contains("n_prey"))) {
    s.env.n_prey = 1;
  }
  return s;
}

std::string cell_name(int n_agents, std::uint64_t seed) {
  return "n" + std::to_string(n_agents) + "_seed" + std::to_string(seed);
}

void write_checkpoints(const fs::path& dir, const std::vector<trainers::AgentBundle>& agents) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "mlp-blob-v1";
  manifest["agents"] = json::array();
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    const std::string prefix = "agent" + std::to_string(i) + "_";
    json entry;
    const std::pair<const char*, const trainers::Params*> nets[] = {
        {"actor", &a.actor},
        {"critic", &a.critic},
        {"target_actor", &a.target_actor},
        {"target_critic", &a.target_critic}};
    for (const auto& [role, params] : nets) {
      const std::string file = prefix + role + ".bin";
      nn::save_mlp(dir / file, *params);
      entry[role] = file;
    }
    manifest["agents"].push_back(entry);
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

namespace {

void write_run_json(const fs::path& dir, const ExperimentSpec& spec, int n, std::uint64_t seed,
                    const std::string& status, const std::string& error,
                    const trainers::UpdateCounters* counters) {
  ExperimentSpec cell = spec;
  cell.sweep = {n};
  cell.repetitions = 1;
  cell.jobs = 1;
  cell.trainer.seed = seed;
  json j;
  j["spec"] = to_json(cell);
  j["n_agents"] = n;
  j["seed"] = seed;
  j["observation_dim"] = envs::observation_dim(spec.env_for(n, seed));
  j["status"] = status;
  if (!error.empty()) j["error"] = error;
  if (counters) {
    j["update_rounds"] = counters->rounds - counters->skipped;
    j["skipped_updates"] = counters->skipped;
    j["sampler_fallbacks"] = counters->sampler_fallbacks;
  }
  std::ofstream(dir / "run.json") << j.dump(2) << '\n';
}

}  // namespace

RunArtifacts run_cell(const ExperimentSpec& spec, int n, std::uint64_t seed) {
  const fs::path dir = spec.out_dir / cell_name(n, seed);
  fs::create_directories(dir);
  std::ofstream stats(dir / "stats.csv");
  stats.precision(17);
  stats << "episode,mean_episode_reward";
  for (int i = 0; i < n; ++i) stats << ",agent_" << i;
  stats << ",wall_ms\n";
  auto on_episode = [&stats](const trainers::EpisodeStats& s) {
    stats << s.episode << ',' << s.mean_reward;
    for (Real r : s.agent_rewards) stats << ',' << r;
    stats << ',' << s.wall_ms << '\n';
    stats.flush();
  };
  write_run_json(dir, spec, n, seed, "running", "", nullptr);
  trainers::TrainingResult result;
  try {
    result = trainers::run_training(spec.trainer_for(seed), spec.env_for(n, seed), on_episode);
  } catch (const std::exception& e) {
    write_run_json(dir, spec, n, seed, "failed", e.what(), nullptr);
    throw;
  }
  std::ofstream(dir / "profile.json") << profiler::to_json(result.profile).dump(2) << '\n';
  std::ofstream(dir / "profile.csv") << profiler::to_csv(result.profile);
  if (spec.checkpoints) write_checkpoints(dir / "checkpoints", result.agents);
  write_run_json(dir, spec, n, seed, "ok", "", &result.counters);
  return {dir, n, seed};
}

std::vector<RunArtifacts> cmd_train(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::pair<int, std::uint64_t>> cells;
  for (int n : spec.sweep) {
    for (int r = 0; r < spec.repetitions; ++r) {
      cells.emplace_back(n, spec.trainer.seed + static_cast<std::uint64_t>(r));
    }
  }
  std::vector<RunArtifacts> out(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      try {
        out[k] = run_cell(spec, cells[k].first, cells[k].second);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };
  const int workers = std::min<int>(spec.jobs, static_cast<int>(cells.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace marl::bench
