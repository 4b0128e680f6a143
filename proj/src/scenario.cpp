#include "ccovoxel/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "ccovoxel/error.hpp"

namespace ccv {

namespace {

// A mapping node whose keys must all be consumed; leftovers are reported.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(ErrorCode::Parse, path_ + ": expected a mapping");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0 || !node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(ErrorCode::Parse, path_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) {
    if (!node_ || !node_.IsMap() || !node_[key]) return false;
    seen_.insert(key);
    return true;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception& e) {
      fail(ErrorCode::Parse, where(key) + ": " + e.what());
    }
  }

  void get(const std::string& key, Eigen::Vector3d& out) {
    if (!has(key)) return;
    out = vec<3>(node_[key], where(key));
  }

  void get(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    try {
      out = node_[key].as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail(ErrorCode::Parse, where(key) + ": expected a non-negative integer");
    }
  }

  std::optional<YAML::Node> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return node_[key];
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  template <int N>
  static Eigen::Matrix<double, N, 1> vec(const YAML::Node& n, const std::string& where) {
    if (!n.IsSequence() || n.size() != N)
      fail(ErrorCode::Parse, where + ": expected a list of " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> v;
    try {
      for (int i = 0; i < N; ++i) v[i] = n[static_cast<std::size_t>(i)].as<double>();
    } catch (const YAML::Exception&) {
      fail(ErrorCode::Parse, where + ": expected numbers");
    }
    return v;
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

Archetype parse_archetype(const std::string& s) {
  if (s == "box_cylinder") return Archetype::BoxCylinder;
  if (s == "wall_grid") return Archetype::WallGrid;
  if (s == "custom") return Archetype::Custom;
  fail(ErrorCode::Parse, "world.archetype: expected box_cylinder, wall_grid or custom, got '" + s + "'");
}

void parse_world(const YAML::Node& node, Scenario& s) {
  Section w(node, "world");
  std::string archetype = "box_cylinder";
  w.get("archetype", archetype);
  s.world.archetype = parse_archetype(archetype);
  w.get("extent", s.world.extent);
  w.get("resolution", s.world.resolution);
  w.get("origin", s.world.origin);
  w.get("density", s.world.density);
  w.get("opening", s.world.opening);
  w.get("keep_free_radius", s.world.keep_free_radius);
  w.get("distance_clamp", s.distance_clamp);
  if (auto opt = w.child("boxes")) {
    const YAML::Node& boxes = *opt;
    if (!boxes.IsSequence()) fail(ErrorCode::Parse, "world.boxes: expected a list");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      Section b(boxes[i], "world.boxes[" + std::to_string(i) + "]");
      BoxObstacle box{Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
      if (!b.has("min") || !b.has("max")) fail(ErrorCode::Parse, b.where("min/max") + ": both corners required");
      b.get("min", box.min_corner);
      b.get("max", box.max_corner);
      s.world.boxes.push_back(box);
    }
  }
  if (auto opt = w.child("cylinders")) {
    const YAML::Node& cyls = *opt;
    if (!cyls.IsSequence()) fail(ErrorCode::Parse, "world.cylinders: expected a list");
    for (std::size_t i = 0; i < cyls.size(); ++i) {
      const std::string path = "world.cylinders[" + std::to_string(i) + "]";
      Section c(cyls[i], path);
      CylinderObstacle cyl;
      if (!c.has("center")) fail(ErrorCode::Parse, path + ".center: required");
      cyl.center = Section::vec<2>(cyls[i]["center"], path + ".center");
      c.get("radius", cyl.radius);
      cyl.z_min = s.world.origin.z();
      cyl.z_max = s.world.origin.z() + s.world.extent.z();
      c.get("z_min", cyl.z_min);
      c.get("z_max", cyl.z_max);
      s.world.cylinders.push_back(cyl);
    }
  }
}

NoiseModel parse_noise(const YAML::Node& node, const std::string& base_dir) {
  Section n(node, "sensing.distance_noise");
  std::string type = "gaussian";
  n.get("type", type);
  if (type == "gaussian") {
    double sigma = 0.2;
    n.get("sigma", sigma);
    return NoiseModel::gaussian(sigma);
  }
  if (type == "mixture") {
    std::vector<MixtureComponent> comps;
    const auto opt = n.child("components");
    if (!opt || !opt->IsSequence()) fail(ErrorCode::Parse, "sensing.distance_noise.components: expected a list");
    const YAML::Node& list = *opt;
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section c(list[i], "sensing.distance_noise.components[" + std::to_string(i) + "]");
      MixtureComponent mc;
      c.get("weight", mc.weight);
      c.get("mean", mc.mean);
      c.get("sigma", mc.sigma);
      comps.push_back(mc);
    }
    return NoiseModel::mixture(std::move(comps));
  }
  if (type == "empirical") {
    std::string file;
    n.get("file", file);
    if (file.empty()) fail(ErrorCode::Parse, "sensing.distance_noise.file: required for empirical noise");
    std::filesystem::path p(file);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return NoiseModel::load_empirical(p.string());
  }
  fail(ErrorCode::Parse, "sensing.distance_noise.type: expected gaussian, mixture or empirical, got '" + type + "'");
}

void parse_frontend(const YAML::Node& node, SearchConfig& f) {
  Section s(node, "planner.frontend");
  s.get("u_max", f.u_max);
  s.get("resolution_r", f.resolution_r);
  s.get("tau", f.tau);
  s.get("rho", f.rho);
  s.get("v_max", f.v_max);
  s.get("w_mmd", f.w_mmd);
  s.get("clamp_edge_cost", f.clamp_edge_cost);
  s.get("hard_clearance", f.hard_clearance);
  s.get("collision_checks", f.collision_checks);
  s.get("prune_resolution", f.prune_resolution);
  s.get("prune_velocity_resolution", f.prune_velocity_resolution);
  s.get("goal_tolerance", f.goal_tolerance);
  s.get("shot_radius", f.shot_radius);
  s.get("shot_mmd_threshold", f.shot_mmd_threshold);
  s.get("max_expansions", f.max_expansions);
  s.get("heuristic_weight", f.heuristic_weight);
}

void parse_backend(const YAML::Node& node, CemConfig& b) {
  Section s(node, "planner.backend");
  s.get("samples", b.samples);
  s.get("iterations", b.iterations);
  s.get("elites", b.elites);
  s.get("memory_fraction", b.memory_fraction);
  s.get("w_mmd", b.w_mmd);
  s.get("lambda_smooth", b.lambda_smooth);
  s.get("lambda_limit", b.lambda_limit);
  s.get("lambda_second_difference", b.lambda_second_difference);
  s.get("eval_points", b.eval_points);
  s.get("initial_sigma", b.initial_sigma);
  s.get("sigma_min", b.sigma_min);
  s.get("hard_clearance", b.hard_clearance);
  s.get("clearance_penalty", b.clearance_penalty);
  s.get("out_of_bounds_penalty", b.out_of_bounds_penalty);
  s.get("v_max", b.limits.v_max);
  s.get("a_min", b.limits.a_min);
  s.get("a_max", b.limits.a_max);
}

void parse_planner(const YAML::Node& node, PlannerConfig& p) {
  Section s(node, "planner");
  if (auto f = s.child("frontend")) parse_frontend(*f, p.frontend);
  if (auto b = s.child("backend")) parse_backend(*b, p.backend);
  if (auto fit = s.child("fit")) {
    Section f(*fit, "planner.fit");
    f.get("degree", p.fit.degree);
    f.get("waypoint_dt", p.fit.waypoint_dt);
  }
  if (auto bw = s.child("bandwidth")) {
    Section b(*bw, "planner.bandwidth");
    std::string policy = "median";
    b.get("policy", policy);
    if (policy != "median" && policy != "fixed")
      fail(ErrorCode::Parse, "planner.bandwidth.policy: expected median or fixed, got '" + policy + "'");
    p.bandwidth.median = policy == "median";
    b.get("value", p.bandwidth.value);
  }
  s.get("samples_per_point", p.samples_per_point);
  s.get("bounding_volume_k", p.bounding_volume_k);
  s.get("encoder", p.encoder_path);
  s.get("latent_bandwidth", p.latent_bandwidth);
}

Scenario parse_root(const YAML::Node& root, const std::string& base_dir) {
  Scenario s;
  s.base_dir = base_dir;
  Section top(root, "scenario");
  top.get("name", s.name);
  top.get("seed", s.seed);
  top.get("trials", s.trials);
  if (auto w = top.child("world")) parse_world(*w, s);
  if (auto sensing = top.child("sensing")) {
    Section sec(*sensing, "sensing");
    sec.get("map_noise_sigma", s.map_noise_sigma);
    if (auto n = sec.child("distance_noise")) s.noise = parse_noise(*n, base_dir);
  }
  if (auto q = top.child("query")) {
    Section sec(*q, "query");
    if (!sec.has("start") || !sec.has("goal")) fail(ErrorCode::Parse, "query: start and goal are required");
    sec.get("start", s.start);
    sec.get("goal", s.goal);
    sec.get("r_safe", s.r_safe);
    s.robot_radius = s.r_safe;
    sec.get("robot_radius", s.robot_radius);
  } else {
    fail(ErrorCode::Parse, "scenario: missing 'query' section");
  }
  if (auto p = top.child("planner")) parse_planner(*p, s.planner);
  s.world.seed = s.seed;
  s.world.keep_free = {s.start, s.goal};
  validate(s);
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::Parse, std::string("scenario: ") + e.what());
  }
  if (!root.IsMap()) fail(ErrorCode::Parse, "scenario: top level must be a mapping");
  return parse_root(root, base_dir);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_scenario(ss.str(), dir.empty() ? "." : dir.string());
}

void validate(const Scenario& s) {
  if (s.trials < 1) fail(ErrorCode::InvalidSpec, "trials must be >= 1");
  if (!(s.r_safe > 0.0)) fail(ErrorCode::InvalidSpec, "r_safe must be > 0");
  if (!(s.robot_radius >= 0.0)) fail(ErrorCode::InvalidSpec, "robot_radius must be >= 0");
  if (!(s.map_noise_sigma >= 0.0)) fail(ErrorCode::InvalidSpec, "map_noise_sigma must be >= 0");
  if (!(s.distance_clamp > 0.0)) fail(ErrorCode::InvalidSpec, "distance_clamp must be > 0");
  if (s.planner.samples_per_point < 1) fail(ErrorCode::InvalidSpec, "samples_per_point must be >= 1");
  if (!(s.planner.bounding_volume_k >= 0.0)) fail(ErrorCode::InvalidSpec, "bounding_volume_k must be >= 0");
  if (s.planner.fit.degree < 5) fail(ErrorCode::InvalidSpec, "fit degree must be >= 5");
  if (!(s.planner.fit.waypoint_dt > 0.0)) fail(ErrorCode::InvalidSpec, "waypoint_dt must be > 0");
  if (s.planner.frontend.resolution_r < 1) fail(ErrorCode::InvalidSpec, "resolution_r must be >= 1");
  if (s.planner.frontend.rho < 0.0) fail(ErrorCode::InvalidSpec, "rho must be >= 0");
  if (s.planner.backend.samples < 2) fail(ErrorCode::InvalidSpec, "backend samples must be >= 2");
  if (s.planner.backend.elites < 1 || s.planner.backend.elites > s.planner.backend.samples)
    fail(ErrorCode::InvalidSpec, "backend elites must lie in [1, samples]");
  if (s.planner.backend.memory_fraction < 0.0 || s.planner.backend.memory_fraction >= 1.0)
    fail(ErrorCode::InvalidSpec, "memory_fraction must lie in [0, 1)");
  const Eigen::Vector3d hi = s.world.origin + s.world.extent;
  for (const auto* p : {&s.start, &s.goal})
    if ((p->array() < s.world.origin.array()).any() || (p->array() >= hi.array()).any())
      fail(ErrorCode::InvalidSpec, "start and goal must lie inside the world extent");
}

}  // namespace ccv
