#include "ccovoxel/ccovoxel.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ccovoxel/embedding.hpp"
#include "ccovoxel/error.hpp"
#include "ccovoxel/harness.hpp"
#include "ccovoxel/log.hpp"
#include "ccovoxel/rkhs.hpp"
#include "ccovoxel/scenario.hpp"
#include "ccovoxel/world.hpp"

struct ccv_grid {
  ccv::VoxelGrid grid;
};

struct ccv_field {
  ccv::DistanceField field;
};

struct ccv_encoder {
  ccv::Autoencoder model;
};

struct ccv_scenario {
  ccv::Scenario scenario;
};

struct ccv_report {
  ccv::BenchmarkReport report;
  std::string table;
};

namespace {

thread_local std::string g_last_error;

ccv_status to_status(ccv::ErrorCode c) {
  using ccv::ErrorCode;
  switch (c) {
    case ErrorCode::InvalidArgument: return CCV_ERR_INVALID_ARGUMENT;
    case ErrorCode::InvalidSpec: return CCV_ERR_INVALID_SPEC;
    case ErrorCode::OutOfBounds: return CCV_ERR_OUT_OF_BOUNDS;
    case ErrorCode::DimensionMismatch: return CCV_ERR_DIMENSION_MISMATCH;
    case ErrorCode::Domain: return CCV_ERR_DOMAIN;
    case ErrorCode::DegenerateFit: return CCV_ERR_DEGENERATE_FIT;
    case ErrorCode::TrainingFailure: return CCV_ERR_TRAINING_FAILURE;
    case ErrorCode::SearchFailure: return CCV_ERR_SEARCH_FAILURE;
    case ErrorCode::InvalidQuery: return CCV_ERR_INVALID_QUERY;
    case ErrorCode::RefinementFailure: return CCV_ERR_REFINEMENT_FAILURE;
    case ErrorCode::Io: return CCV_ERR_IO;
    case ErrorCode::Parse: return CCV_ERR_PARSE;
  }
  return CCV_ERR_INTERNAL;
}

ccv_status set_error(ccv_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
ccv_status guarded(F&& f) {
  try {
    f();
    return CCV_OK;
  } catch (const ccv::Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CCV_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CCV_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(CCV_ERR_INTERNAL, "unknown error");
  }
}

ccv_status null_arg(const char* name) { return set_error(CCV_ERR_NULL_POINTER, std::string(name) + " is null"); }

#define CCV_REQUIRE(ptr)                   \
  do {                                     \
    if ((ptr) == nullptr) return null_arg(#ptr); \
  } while (0)

Eigen::Vector3i vec3i(const int v[3]) { return {v[0], v[1], v[2]}; }
Eigen::Vector3d vec3d(const double v[3]) { return {v[0], v[1], v[2]}; }

ccv::Archetype parse_archetype(const std::string& s) {
  if (s == "box_cylinder") return ccv::Archetype::BoxCylinder;
  if (s == "wall_grid") return ccv::Archetype::WallGrid;
  if (s == "custom") return ccv::Archetype::Custom;
  ccv::fail(ccv::ErrorCode::InvalidArgument, "unknown archetype '" + s + "'");
}

void fill_run(const ccv::RunResult& r, ccv_run_summary* out) {
  out->planned = r.planned;
  out->goal_reached = r.goal_reached;
  out->collision = r.collision;
  out->success = r.success;
  out->smoothness = r.smoothness;
  out->path_length = r.path_length;
  out->min_clearance = r.min_clearance;
  out->duration = r.duration;
  out->final_mmd = r.final_mmd;
  out->expansions = r.expansions;
  out->frontend_seconds = r.frontend_seconds;
  out->backend_seconds = r.backend_seconds;
}

}  // namespace

extern "C" {

const char* ccv_status_name(ccv_status s) {
  switch (s) {
    case CCV_OK: return "ok";
    case CCV_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case CCV_ERR_INVALID_SPEC: return "invalid-spec";
    case CCV_ERR_OUT_OF_BOUNDS: return "out-of-bounds";
    case CCV_ERR_DIMENSION_MISMATCH: return "dimension-mismatch";
    case CCV_ERR_DOMAIN: return "domain";
    case CCV_ERR_DEGENERATE_FIT: return "degenerate-fit";
    case CCV_ERR_TRAINING_FAILURE: return "training-failure";
    case CCV_ERR_SEARCH_FAILURE: return "search-failure";
    case CCV_ERR_INVALID_QUERY: return "invalid-query";
    case CCV_ERR_REFINEMENT_FAILURE: return "refinement-failure";
    case CCV_ERR_IO: return "io";
    case CCV_ERR_PARSE: return "parse";
    case CCV_ERR_NULL_POINTER: return "null-pointer";
    case CCV_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* ccv_last_error(void) { return g_last_error.c_str(); }

const char* ccv_version(void) { return "0.1.0"; }

ccv_status ccv_set_log_level(int level) {
  if (level < 0 || level > 2) return set_error(CCV_ERR_INVALID_ARGUMENT, "log level must be 0, 1 or 2");
  ccv::set_log_level(static_cast<ccv::LogLevel>(level));
  return CCV_OK;
}

ccv_status ccv_grid_create(const int dims[3], double resolution, const double origin[3], ccv_grid** out) {
  CCV_REQUIRE(dims);
  CCV_REQUIRE(out);
  return guarded([&] {
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) ccv::fail(ccv::ErrorCode::InvalidArgument, "grid dims must be >= 1");
    if (!(resolution > 0.0)) ccv::fail(ccv::ErrorCode::InvalidArgument, "resolution must be > 0");
    const Eigen::Vector3d o = origin ? vec3d(origin) : Eigen::Vector3d::Zero();
    *out = new ccv_grid{ccv::VoxelGrid(vec3i(dims), resolution, o)};
  });
}

ccv_status ccv_grid_generate(const char* archetype, const double extent[3], double resolution, double density,
                             uint64_t seed, ccv_grid** out) {
  CCV_REQUIRE(archetype);
  CCV_REQUIRE(extent);
  CCV_REQUIRE(out);
  return guarded([&] {
    ccv::WorldSpec spec;
    spec.archetype = parse_archetype(archetype);
    spec.extent = vec3d(extent);
    spec.resolution = resolution;
    spec.density = density;
    spec.seed = seed;
    *out = new ccv_grid{ccv::generate_world(spec)};
  });
}

ccv_status ccv_grid_dims(const ccv_grid* grid, int dims[3]) {
  CCV_REQUIRE(grid);
  CCV_REQUIRE(dims);
  for (int a = 0; a < 3; ++a) dims[a] = grid->grid.dims()[a];
  return CCV_OK;
}

ccv_status ccv_grid_get(const ccv_grid* grid, const int voxel[3], int* occupied) {
  CCV_REQUIRE(grid);
  CCV_REQUIRE(voxel);
  CCV_REQUIRE(occupied);
  if (!grid->grid.contains(vec3i(voxel))) return set_error(CCV_ERR_OUT_OF_BOUNDS, "voxel outside grid");
  *occupied = grid->grid.occupied(vec3i(voxel)) ? 1 : 0;
  return CCV_OK;
}

ccv_status ccv_grid_set(ccv_grid* grid, const int voxel[3], int occupied) {
  CCV_REQUIRE(grid);
  CCV_REQUIRE(voxel);
  if (!grid->grid.contains(vec3i(voxel))) return set_error(CCV_ERR_OUT_OF_BOUNDS, "voxel outside grid");
  grid->grid.set_occupied(vec3i(voxel), occupied != 0);
  return CCV_OK;
}

ccv_status ccv_grid_occupied_count(const ccv_grid* grid, size_t* count) {
  CCV_REQUIRE(grid);
  CCV_REQUIRE(count);
  *count = grid->grid.occupied_count();
  return CCV_OK;
}

ccv_status ccv_grid_corrupt(const ccv_grid* grid, double sigma, uint64_t seed, ccv_grid** out) {
  CCV_REQUIRE(grid);
  CCV_REQUIRE(out);
  return guarded([&] { *out = new ccv_grid{ccv::corrupt_grid(grid->grid, sigma, seed)}; });
}

ccv_status ccv_grid_save(const ccv_grid* grid, const char* path) {
  CCV_REQUIRE(grid);
  CCV_REQUIRE(path);
  return guarded([&] { ccv::save_grid(grid->grid, path); });
}

ccv_status ccv_grid_load(const char* path, ccv_grid** out) {
  CCV_REQUIRE(path);
  CCV_REQUIRE(out);
  return guarded([&] { *out = new ccv_grid{ccv::load_grid(path)}; });
}

void ccv_grid_free(ccv_grid* grid) { delete grid; }

ccv_status ccv_field_compute(const ccv_grid* grid, double clamp, ccv_field** out) {
  CCV_REQUIRE(grid);
  CCV_REQUIRE(out);
  return guarded([&] { *out = new ccv_field{ccv::compute_edt(grid->grid, clamp)}; });
}

ccv_status ccv_field_at(const ccv_field* field, const int voxel[3], double* distance) {
  CCV_REQUIRE(field);
  CCV_REQUIRE(voxel);
  CCV_REQUIRE(distance);
  return guarded([&] { *distance = field->field.at(vec3i(voxel)); });
}

ccv_status ccv_field_query(const ccv_field* field, const double point[3], double* distance) {
  CCV_REQUIRE(field);
  CCV_REQUIRE(point);
  CCV_REQUIRE(distance);
  return guarded([&] { *distance = ccv::query_distance(field->field, vec3d(point)); });
}

void ccv_field_free(ccv_field* field) { delete field; }

ccv_status ccv_mmd_to_dirac(const double* v, size_t n, double sigma, double* out) {
  CCV_REQUIRE(v);
  CCV_REQUIRE(out);
  return guarded([&] { *out = ccv::mmd_to_dirac(std::span<const double>(v, n), ccv::KernelSpec::rbf(sigma)); });
}

ccv_status ccv_mmd_squared(const double* v, const double* alpha, const double* beta, size_t n, double sigma,
                           double* out) {
  CCV_REQUIRE(v);
  CCV_REQUIRE(alpha);
  CCV_REQUIRE(beta);
  CCV_REQUIRE(out);
  return guarded([&] {
    if (n == 0) ccv::fail(ccv::ErrorCode::InvalidArgument, "need at least one sample");
    const auto len = static_cast<Eigen::Index>(n);
    ccv::WeightVectors w{Eigen::Map<const Eigen::VectorXd>(alpha, len), Eigen::Map<const Eigen::VectorXd>(beta, len)};
    w.validate();
    const ccv::MmdWorkspace ws(ccv::KernelSpec::rbf(sigma), w);
    *out = ccv::mmd_squared(ccv::ViolationSamples{std::vector<double>(v, v + n), 0.0}, w, ws);
  });
}

ccv_status ccv_encoder_load(const char* path, ccv_encoder** out) {
  CCV_REQUIRE(path);
  CCV_REQUIRE(out);
  return guarded([&] { *out = new ccv_encoder{ccv::Autoencoder::load(path)}; });
}

ccv_status ccv_encoder_dims(const ccv_encoder* encoder, int* input_dim, int* latent_dim) {
  CCV_REQUIRE(encoder);
  if (input_dim) *input_dim = encoder->model.input_dim();
  if (latent_dim) *latent_dim = encoder->model.latent_dim();
  return CCV_OK;
}

ccv_status ccv_encoder_encode(const ccv_encoder* encoder, const double* v, size_t m, double* z, size_t p) {
  CCV_REQUIRE(encoder);
  CCV_REQUIRE(v);
  CCV_REQUIRE(z);
  return guarded([&] {
    if (m != static_cast<size_t>(encoder->model.input_dim()) || p != static_cast<size_t>(encoder->model.latent_dim()))
      ccv::fail(ccv::ErrorCode::DimensionMismatch, "buffer sizes do not match the encoder");
    const Eigen::VectorXd out = encoder->model.encode(Eigen::Map<const Eigen::VectorXd>(v, static_cast<Eigen::Index>(m)));
    std::copy(out.data(), out.data() + out.size(), z);
  });
}

void ccv_encoder_free(ccv_encoder* encoder) { delete encoder; }

ccv_status ccv_scenario_load(const char* path, ccv_scenario** out) {
  CCV_REQUIRE(path);
  CCV_REQUIRE(out);
  return guarded([&] { *out = new ccv_scenario{ccv::load_scenario(path)}; });
}

ccv_status ccv_scenario_parse(const char* text, const char* base_dir, ccv_scenario** out) {
  CCV_REQUIRE(text);
  CCV_REQUIRE(out);
  return guarded([&] { *out = new ccv_scenario{ccv::parse_scenario(text, base_dir ? base_dir : ".")}; });
}

const char* ccv_scenario_name(const ccv_scenario* scenario) {
  return scenario ? scenario->scenario.name.c_str() : "";
}

ccv_status ccv_scenario_seed(const ccv_scenario* scenario, uint64_t* seed) {
  CCV_REQUIRE(scenario);
  CCV_REQUIRE(seed);
  *seed = scenario->scenario.seed;
  return CCV_OK;
}

ccv_status ccv_scenario_set_seed(ccv_scenario* scenario, uint64_t seed) {
  CCV_REQUIRE(scenario);
  scenario->scenario.seed = seed;
  return CCV_OK;
}

ccv_status ccv_scenario_trials(const ccv_scenario* scenario, int* trials) {
  CCV_REQUIRE(scenario);
  CCV_REQUIRE(trials);
  *trials = scenario->scenario.trials;
  return CCV_OK;
}

ccv_status ccv_scenario_set_trials(ccv_scenario* scenario, int trials) {
  CCV_REQUIRE(scenario);
  if (trials < 1) return set_error(CCV_ERR_INVALID_ARGUMENT, "trials must be >= 1");
  scenario->scenario.trials = trials;
  return CCV_OK;
}

void ccv_scenario_free(ccv_scenario* scenario) { delete scenario; }

ccv_status ccv_plan(const ccv_scenario* scenario, const char* baseline, int trial, const char* out_dir,
                    ccv_run_summary* summary) {
  CCV_REQUIRE(scenario);
  CCV_REQUIRE(baseline);
  CCV_REQUIRE(summary);
  return guarded([&] {
    if (trial < 0) ccv::fail(ccv::ErrorCode::InvalidArgument, "trial must be >= 0");
    const ccv::PlanArtifacts a = ccv::plan_scenario(scenario->scenario, ccv::parse_baseline(baseline), trial);
    if (out_dir) ccv::write_plan_artifacts(a, scenario->scenario, out_dir);
    fill_run(a.score, summary);
  });
}

ccv_status ccv_bench(const ccv_scenario* scenario, const char* const* baselines, size_t baseline_count, int workers,
                     int frontend_only, const char* out_dir, const char* prefix, ccv_report** out) {
  CCV_REQUIRE(scenario);
  CCV_REQUIRE(out);
  return guarded([&] {
    std::vector<ccv::Baseline> bs;
    if (baselines == nullptr || baseline_count == 0) {
      bs.assign(std::begin(ccv::kAllBaselines), std::end(ccv::kAllBaselines));
    } else {
      for (size_t i = 0; i < baseline_count; ++i) {
        if (!baselines[i]) ccv::fail(ccv::ErrorCode::InvalidArgument, "baseline name is null");
        bs.push_back(ccv::parse_baseline(baselines[i]));
      }
    }
    auto r = std::make_unique<ccv_report>();
    r->report = ccv::run_benchmark(scenario->scenario, bs, workers, frontend_only != 0);
    if (out_dir) ccv::write_report(r->report, out_dir, prefix ? prefix : "bench");
    std::ostringstream os;
    ccv::print_table(r->report, os);
    r->table = os.str();
    *out = r.release();
  });
}

ccv_status ccv_report_size(const ccv_report* report, size_t* baselines) {
  CCV_REQUIRE(report);
  CCV_REQUIRE(baselines);
  *baselines = report->report.summary.size();
  return CCV_OK;
}

ccv_status ccv_report_summary(const ccv_report* report, size_t index, ccv_baseline_summary* out) {
  CCV_REQUIRE(report);
  CCV_REQUIRE(out);
  if (index >= report->report.summary.size()) return set_error(CCV_ERR_OUT_OF_BOUNDS, "summary index out of range");
  const ccv::BaselineSummary& s = report->report.summary[index];
  std::memset(out, 0, sizeof(*out));
  std::strncpy(out->baseline, ccv::to_string(s.baseline), sizeof(out->baseline) - 1);
  out->trials = s.trials;
  out->planned = s.planned;
  out->successes = s.successes;
  out->collisions = s.collisions;
  out->success_rate = s.success_rate;
  out->collision_rate = s.collision_rate;
  out->mean_smoothness = s.mean_smoothness;
  out->mean_path_length = s.mean_path_length;
  out->mean_min_clearance = s.mean_min_clearance;
  out->mean_seconds = s.mean_seconds;
  out->std_seconds = s.std_seconds;
  return CCV_OK;
}

const char* ccv_report_table(const ccv_report* report) { return report ? report->table.c_str() : ""; }

void ccv_report_free(ccv_report* report) { delete report; }

ccv_status ccv_ablate_mmd(const ccv_scenario* scenario, const ccv_encoder* encoder, int vectors, int latent_dim,
                          const char* out_dir, ccv_mmd_ablation* out) {
  CCV_REQUIRE(scenario);
  CCV_REQUIRE(out);
  return guarded([&] {
    const ccv::MmdAblation a =
        ccv::run_mmd_ablation(scenario->scenario, encoder ? &encoder->model : nullptr, vectors, latent_dim);
    if (out_dir) ccv::write_mmd_ablation(a, out_dir);
    out->vectors = a.vectors;
    out->samples = a.samples;
    out->latent_dim = a.latent_dim;
    out->full_median_seconds = a.full_median_seconds;
    out->latent_median_seconds = a.latent_median_seconds;
    out->speedup = a.speedup;
    out->rank_correlation = a.rank_correlation;
    out->identity_max_error = a.identity_max_error;
  });
}

ccv_status ccv_train_encoder(const ccv_scenario* scenario, int vectors, int latent_dim, int epochs, double step_size,
                             const char* model_path, ccv_train_summary* out) {
  CCV_REQUIRE(scenario);
  CCV_REQUIRE(model_path);
  CCV_REQUIRE(out);
  return guarded([&] {
    ccv::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.step_size = step_size;
    cfg.seed = scenario->scenario.seed;
    const ccv::EncoderTraining t = ccv::train_encoder(scenario->scenario, vectors, latent_dim, cfg);
    t.result.model.save(model_path);
    out->vectors = vectors;
    out->input_dim = t.result.model.input_dim();
    out->latent_dim = t.result.model.latent_dim();
    out->epochs = static_cast<int>(t.result.loss_history.size()) - 1;
    out->initial_loss = t.result.loss_history.front();
    out->final_loss = t.result.loss_history.back();
    out->final_step_size = t.result.final_step_size;
  });
}

}  // extern "C"
