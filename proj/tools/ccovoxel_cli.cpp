#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccovoxel/ccovoxel.h"

namespace {

struct Common {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c, bool with_workers) {
  cmd->add_option("-s,--scenario", c.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the scenario's master seed");
  if (with_workers) cmd->add_option("-j,--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--out", c.out, "Output directory");
}

int report(ccv_status s) {
  if (s == CCV_OK) return 0;
  std::fprintf(stderr, "error [%s]: %s\n", ccv_status_name(s), ccv_last_error());
  return 1;
}

// Owns a loaded scenario with the common overrides applied.
class ScenarioHandle {
 public:
  ~ScenarioHandle() { ccv_scenario_free(h_); }
  ccv_status load(const Common& c, std::optional<int> trials = std::nullopt) {
    ccv_status s = ccv_scenario_load(c.scenario.c_str(), &h_);
    if (s == CCV_OK && c.seed) s = ccv_scenario_set_seed(h_, *c.seed);
    if (s == CCV_OK && trials) s = ccv_scenario_set_trials(h_, *trials);
    return s;
  }
  ccv_scenario* get() const { return h_; }

 private:
  ccv_scenario* h_ = nullptr;
};

int run_bench(const Common& c, std::optional<int> trials, const std::vector<std::string>& names, bool frontend_only,
              const char* prefix) {
  ScenarioHandle sc;
  if (int rc = report(sc.load(c, trials))) return rc;
  std::vector<const char*> ptrs;
  for (const auto& n : names) ptrs.push_back(n.c_str());
  ccv_report* r = nullptr;
  const ccv_status s = ccv_bench(sc.get(), ptrs.data(), ptrs.size(), c.workers, frontend_only ? 1 : 0,
                                 c.out.c_str(), prefix, &r);
  if (s != CCV_OK) return report(s);
  std::printf("%s", ccv_report_table(r));
  std::printf("wrote %s/%s.csv\n", c.out.c_str(), prefix);
  ccv_report_free(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chance-constrained trajectory planning on noisy voxel maps"};
  app.require_subcommand(1);
  int verbosity = 1;
  app.add_option("--log-level", verbosity, "0 quiet, 1 warnings, 2 info")->check(CLI::Range(0, 2));

  Common plan_c;
  std::string baseline = "proposed";
  int trial = 0;
  auto* plan = app.add_subcommand("plan", "Plan one scenario and write the trajectory and traces");
  add_common(plan, plan_c, false);
  plan->add_option("-b,--baseline", baseline, "proposed, deterministic or bounding_volume");
  plan->add_option("-t,--trial", trial, "Trial index used to seed the world")->check(CLI::NonNegativeNumber);

  Common bench_c;
  std::optional<int> bench_trials;
  std::vector<std::string> bench_baselines = {"proposed", "deterministic", "bounding_volume"};
  auto* bench = app.add_subcommand("bench", "Run every baseline over the scenario's trials");
  add_common(bench, bench_c, true);
  bench->add_option("-n,--trials", bench_trials, "Override the trial count")->check(CLI::PositiveNumber);
  bench->add_option("-b,--baselines", bench_baselines, "Baselines to run");

  Common af_c;
  std::optional<int> af_trials;
  auto* af = app.add_subcommand("ablate-frontend", "Search-only comparison of MMD and deterministic A*");
  add_common(af, af_c, true);
  af->add_option("-n,--trials", af_trials, "Override the trial count")->check(CLI::PositiveNumber);

  Common am_c;
  std::string encoder_path;
  int am_vectors = 200;
  int am_latent = 10;
  auto* am = app.add_subcommand("ablate-mmd", "Time full-sample against latent MMD");
  add_common(am, am_c, false);
  am->add_option("-e,--encoder", encoder_path, "Trained encoder; one is trained when omitted")->check(CLI::ExistingFile);
  am->add_option("--vectors", am_vectors, "Violation vectors")->check(CLI::Range(2, 1000000));
  am->add_option("--latent-dim", am_latent, "Latent size when training")->check(CLI::PositiveNumber);

  Common te_c;
  int te_vectors = 600;
  int te_latent = 10;
  int te_epochs = 500;
  double te_step = 1e-3;
  auto* te = app.add_subcommand("train-encoder", "Train the violation autoencoder");
  add_common(te, te_c, false);
  te->add_option("--vectors", te_vectors, "Training vectors")->check(CLI::PositiveNumber);
  te->add_option("--latent-dim", te_latent, "Latent size")->check(CLI::PositiveNumber);
  te->add_option("--epochs", te_epochs, "SGD epochs")->check(CLI::NonNegativeNumber);
  te->add_option("--step", te_step, "Initial step size")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  if (int rc = report(ccv_set_log_level(verbosity))) return rc;

  if (*plan) {
    ScenarioHandle sc;
    if (int rc = report(sc.load(plan_c))) return rc;
    ccv_run_summary r{};
    if (int rc = report(ccv_plan(sc.get(), baseline.c_str(), trial, plan_c.out.c_str(), &r))) return rc;
    std::printf("planned=%d success=%d collision=%d goal_reached=%d\n", r.planned, r.success, r.collision,
                r.goal_reached);
    std::printf("duration=%.3f s  length=%.3f m  smoothness=%.4f  min_clearance=%.3f m  mmd=%.6g\n", r.duration,
                r.path_length, r.smoothness, r.min_clearance, r.final_mmd);
    std::printf("expansions=%llu  frontend=%.3f s  backend=%.3f s\n", static_cast<unsigned long long>(r.expansions),
                r.frontend_seconds, r.backend_seconds);
    std::printf("wrote %s\n", plan_c.out.c_str());
    return 0;
  }
  if (*bench) return run_bench(bench_c, bench_trials, bench_baselines, false, "bench");
  if (*af) return run_bench(af_c, af_trials, {"proposed", "deterministic"}, true, "frontend_ablation");
  if (*am) {
    ScenarioHandle sc;
    if (int rc = report(sc.load(am_c))) return rc;
    ccv_encoder* enc = nullptr;
    if (!encoder_path.empty())
      if (int rc = report(ccv_encoder_load(encoder_path.c_str(), &enc))) return rc;
    ccv_mmd_ablation a{};
    const ccv_status s = ccv_ablate_mmd(sc.get(), enc, am_vectors, am_latent, am_c.out.c_str(), &a);
    ccv_encoder_free(enc);
    if (int rc = report(s)) return rc;
    std::printf("vectors=%d m=%d p=%d\n", a.vectors, a.samples, a.latent_dim);
    std::printf("full median %.3e s  latent median %.3e s  speedup %.2fx\n", a.full_median_seconds,
                a.latent_median_seconds, a.speedup);
    std::printf("rank correlation %.4f  identity max error %.3e\n", a.rank_correlation, a.identity_max_error);
    std::printf("wrote %s/mmd_ablation.csv\n", am_c.out.c_str());
    return 0;
  }
  if (*te) {
    ScenarioHandle sc;
    if (int rc = report(sc.load(te_c))) return rc;
    std::filesystem::create_directories(te_c.out);
    const std::string path = (std::filesystem::path(te_c.out) / "encoder.txt").string();
    ccv_train_summary t{};
    if (int rc = report(ccv_train_encoder(sc.get(), te_vectors, te_latent, te_epochs, te_step, path.c_str(), &t)))
      return rc;
    std::printf("trained %d -> %d on %d vectors, %d epochs\n", t.input_dim, t.latent_dim, t.vectors, t.epochs);
    std::printf("loss %.6g -> %.6g (step %.3g)\n", t.initial_loss, t.final_loss, t.final_step_size);
    std::printf("wrote %s\n", path.c_str());
    return 0;
  }
  return 0;
}
