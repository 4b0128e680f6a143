#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "ccovoxel/ccovoxel.h"

namespace {

const std::string kDir = CCV_SCENARIO_DIR;

const char* kEmpty = R"(
name: capi-empty
seed: 3
trials: 2
world: {archetype: custom, extent: [20, 10, 6], resolution: 0.5}
query: {start: [3, 5, 3], goal: [7, 5, 3]}
planner:
  samples_per_point: 30
  backend: {samples: 10, elites: 3, iterations: 2, eval_points: 20}
)";

std::filesystem::path scratch(const char* leaf) {
  const auto d = std::filesystem::temp_directory_path() / "ccv_capi_test" / leaf;
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("status names, version and log level") {
  CHECK(std::string(ccv_status_name(CCV_OK)) == "ok");
  for (int s = 0; s <= CCV_ERR_INTERNAL; ++s) CHECK(std::strlen(ccv_status_name(static_cast<ccv_status>(s))) > 0);
  CHECK(std::strlen(ccv_version()) > 0);
  CHECK(ccv_set_log_level(0) == CCV_OK);
  CHECK(ccv_set_log_level(7) == CCV_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(ccv_last_error()) > 0);
}

TEST_CASE("null pointers are rejected, frees accept null") {
  ccv_grid* g = nullptr;
  const int dims[3] = {2, 2, 2};
  const double origin[3] = {0, 0, 0};
  CHECK(ccv_grid_create(nullptr, 1.0, origin, &g) == CCV_ERR_NULL_POINTER);
  CHECK(ccv_grid_create(dims, 1.0, origin, nullptr) == CCV_ERR_NULL_POINTER);
  CHECK(ccv_grid_dims(nullptr, nullptr) == CCV_ERR_NULL_POINTER);
  double out = 0.0;
  CHECK(ccv_mmd_to_dirac(nullptr, 3, 0.1, &out) == CCV_ERR_NULL_POINTER);
  CHECK(ccv_scenario_parse(nullptr, ".", nullptr) == CCV_ERR_NULL_POINTER);
  CHECK(ccv_plan(nullptr, "proposed", 0, nullptr, nullptr) == CCV_ERR_NULL_POINTER);
  CHECK(std::string(ccv_scenario_name(nullptr)).empty());
  ccv_grid_free(nullptr);
  ccv_field_free(nullptr);
  ccv_encoder_free(nullptr);
  ccv_scenario_free(nullptr);
  ccv_report_free(nullptr);
}

TEST_CASE("grid and distance field round trip") {
  ccv_grid* g = nullptr;
  const int dims[3] = {5, 5, 5};
  const double origin[3] = {0, 0, 0};
  REQUIRE(ccv_grid_create(dims, 1.0, origin, &g) == CCV_OK);
  const int center[3] = {2, 2, 2};
  REQUIRE(ccv_grid_set(g, center, 1) == CCV_OK);
  int occ = 0;
  CHECK(ccv_grid_get(g, center, &occ) == CCV_OK);
  CHECK(occ == 1);
  size_t count = 0;
  CHECK(ccv_grid_occupied_count(g, &count) == CCV_OK);
  CHECK(count == 1);
  const int outside[3] = {5, 0, 0};
  CHECK(ccv_grid_get(g, outside, &occ) == CCV_ERR_OUT_OF_BOUNDS);

  ccv_field* f = nullptr;
  REQUIRE(ccv_field_compute(g, 10.0, &f) == CCV_OK);
  double d = -1.0;
  CHECK(ccv_field_at(f, center, &d) == CCV_OK);
  CHECK(d == 0.0);
  const int corner[3] = {2, 2, 4};
  CHECK(ccv_field_at(f, corner, &d) == CCV_OK);
  CHECK(d == 2.0);
  const double p[3] = {2.5, 2.5, 4.5};
  CHECK(ccv_field_query(f, p, &d) == CCV_OK);
  CHECK(d == doctest::Approx(2.0));

  const auto path = (scratch("grid") / "g.txt").string();
  CHECK(ccv_grid_save(g, path.c_str()) == CCV_OK);
  ccv_grid* back = nullptr;
  REQUIRE(ccv_grid_load(path.c_str(), &back) == CCV_OK);
  int bd[3];
  CHECK(ccv_grid_dims(back, bd) == CCV_OK);
  CHECK(bd[0] == 5);
  CHECK(ccv_grid_get(back, center, &occ) == CCV_OK);
  CHECK(occ == 1);
  CHECK(ccv_grid_load((scratch("grid") / "none.txt").string().c_str(), &back) == CCV_ERR_IO);

  ccv_grid* noisy = nullptr;
  CHECK(ccv_grid_corrupt(g, -1.0, 1, &noisy) == CCV_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ccv_last_error()).size() > 0);
  ccv_grid_free(back);
  ccv_field_free(f);
  ccv_grid_free(g);
}

TEST_CASE("generated worlds are deterministic") {
  const double extent[3] = {20, 20, 6};
  ccv_grid *a = nullptr, *b = nullptr;
  REQUIRE(ccv_grid_generate("box_cylinder", extent, 0.5, 0.15, 9, &a) == CCV_OK);
  REQUIRE(ccv_grid_generate("box_cylinder", extent, 0.5, 0.15, 9, &b) == CCV_OK);
  size_t ca = 0, cb = 0;
  ccv_grid_occupied_count(a, &ca);
  ccv_grid_occupied_count(b, &cb);
  CHECK(ca == cb);
  CHECK(ca > 0);
  ccv_grid* c = nullptr;
  CHECK(ccv_grid_generate("maze", extent, 0.5, 0.15, 9, &c) == CCV_ERR_INVALID_ARGUMENT);
  ccv_grid_free(a);
  ccv_grid_free(b);
}

TEST_CASE("mmd entry points agree with closed forms") {
  const double zeros[4] = {0, 0, 0, 0};
  double out = -1.0;
  CHECK(ccv_mmd_to_dirac(zeros, 4, 0.1, &out) == CCV_OK);
  CHECK(out == 0.0);
  const double one[1] = {0.3};
  CHECK(ccv_mmd_to_dirac(one, 1, 0.2, &out) == CCV_OK);
  CHECK(std::abs(out - (2.0 - 2.0 * std::exp(-0.09 / 0.08))) <= 1e-12);
  const double v[2] = {0.0, 0.4};
  const double alpha[2] = {0.5, 0.5}, beta[2] = {1.0, 0.0};
  CHECK(ccv_mmd_squared(v, alpha, beta, 2, 0.25, &out) == CCV_OK);
  CHECK(std::abs(out - 0.5 * (1.0 - std::exp(-0.16 / 0.125))) <= 1e-14);
  CHECK(ccv_mmd_to_dirac(one, 1, 0.0, &out) == CCV_ERR_INVALID_ARGUMENT);
  const double bad_alpha[2] = {0.9, 0.9};
  CHECK(ccv_mmd_squared(v, bad_alpha, beta, 2, 0.25, &out) != CCV_OK);
}

TEST_CASE("scenarios: load, parse errors and accessors") {
  ccv_scenario* s = nullptr;
  REQUIRE(ccv_scenario_load((kDir + "/box_cylinder.yaml").c_str(), &s) == CCV_OK);
  CHECK(std::string(ccv_scenario_name(s)) == "box-cylinder");
  uint64_t seed = 0;
  CHECK(ccv_scenario_seed(s, &seed) == CCV_OK);
  CHECK(seed == 7);
  CHECK(ccv_scenario_set_seed(s, 42) == CCV_OK);
  ccv_scenario_seed(s, &seed);
  CHECK(seed == 42);
  int trials = 0;
  CHECK(ccv_scenario_set_trials(s, 4) == CCV_OK);
  ccv_scenario_trials(s, &trials);
  CHECK(trials == 4);
  CHECK(ccv_scenario_set_trials(s, 0) == CCV_ERR_INVALID_ARGUMENT);
  ccv_scenario_free(s);

  ccv_scenario* bad = nullptr;
  CHECK(ccv_scenario_parse("query: {start: [1, 1, 1], goal: [2, 2, 2]}\nbogus: 1\n", ".", &bad) == CCV_ERR_PARSE);
  CHECK(std::string(ccv_last_error()).find("bogus") != std::string::npos);
  CHECK(ccv_scenario_load((kDir + "/missing.yaml").c_str(), &bad) == CCV_ERR_IO);
}

TEST_CASE("plan and bench through the C interface") {
  ccv_scenario* s = nullptr;
  REQUIRE(ccv_scenario_parse(kEmpty, ".", &s) == CCV_OK);
  ccv_run_summary r{};
  const auto plan_dir = scratch("plan");
  REQUIRE(ccv_plan(s, "proposed", 0, plan_dir.string().c_str(), &r) == CCV_OK);
  CHECK(r.planned == 1);
  CHECK(r.success == 1);
  CHECK(r.smoothness > 0.0);
  CHECK(std::filesystem::exists(plan_dir / "search_trace.csv"));
  CHECK(ccv_plan(s, "optimistic", 0, nullptr, &r) == CCV_ERR_INVALID_ARGUMENT);

  const char* baselines[] = {"proposed", "deterministic", "bounding_volume"};
  ccv_report* rep = nullptr;
  const auto bench_dir = scratch("bench");
  REQUIRE(ccv_bench(s, baselines, 3, 1, 0, bench_dir.string().c_str(), "bench", &rep) == CCV_OK);
  size_t n = 0;
  CHECK(ccv_report_size(rep, &n) == CCV_OK);
  REQUIRE(n == 3);
  ccv_baseline_summary sm{};
  CHECK(ccv_report_summary(rep, 1, &sm) == CCV_OK);
  CHECK(std::string(sm.baseline) == "deterministic");
  CHECK(sm.trials == 2);
  CHECK(sm.successes == 2);
  CHECK(ccv_report_summary(rep, 3, &sm) == CCV_ERR_OUT_OF_BOUNDS);
  CHECK(std::string(ccv_report_table(rep)).find("bounding_volume") != std::string::npos);
  CHECK(std::filesystem::exists(bench_dir / "bench_trials.csv"));
  ccv_report_free(rep);
  const char* unknown[] = {"optimistic"};
  CHECK(ccv_bench(s, unknown, 1, 1, 0, nullptr, "bench", &rep) == CCV_ERR_INVALID_ARGUMENT);
  REQUIRE(ccv_bench(s, nullptr, 0, 1, 1, nullptr, "bench", &rep) == CCV_OK);
  CHECK(ccv_report_size(rep, &n) == CCV_OK);
  CHECK(n == 3);
  ccv_report_free(rep);
  ccv_scenario_free(s);
}

TEST_CASE("encoder training, loading and ablation") {
  ccv_scenario* s = nullptr;
  REQUIRE(ccv_scenario_load((kDir + "/box_cylinder.yaml").c_str(), &s) == CCV_OK);
  const auto model = (scratch("encoder") / "ae.txt").string();
  ccv_train_summary t{};
  REQUIRE(ccv_train_encoder(s, 30, 5, 50, 0.01, model.c_str(), &t) == CCV_OK);
  CHECK(t.latent_dim == 5);
  CHECK(t.final_loss <= t.initial_loss);

  ccv_encoder* e = nullptr;
  REQUIRE(ccv_encoder_load(model.c_str(), &e) == CCV_OK);
  int m = 0, p = 0;
  CHECK(ccv_encoder_dims(e, &m, &p) == CCV_OK);
  CHECK(m == t.input_dim);
  CHECK(p == 5);
  std::vector<double> v(static_cast<size_t>(m), 0.0), z(static_cast<size_t>(p), 1.0);
  CHECK(ccv_encoder_encode(e, v.data(), v.size(), z.data(), z.size()) == CCV_OK);
  for (double x : z) CHECK(x == 0.0);
  CHECK(ccv_encoder_encode(e, v.data(), v.size() - 1, z.data(), z.size()) == CCV_ERR_DIMENSION_MISMATCH);

  ccv_mmd_ablation a{};
  CHECK(ccv_ablate_mmd(s, e, 20, 0, nullptr, &a) == CCV_OK);
  CHECK(a.vectors == 20);
  CHECK(a.latent_dim == 5);
  CHECK(a.identity_max_error <= 1e-10);
  ccv_encoder_free(e);
  ccv_scenario_free(s);
}
