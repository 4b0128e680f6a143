#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "ccovoxel/error.hpp"
#include "ccovoxel/scenario.hpp"

using namespace ccv;

namespace {

const std::string kDir = CCV_SCENARIO_DIR;

const std::string kMinimal = R"(
query:
  start: [2, 2, 2]
  goal: [8, 8, 2]
world:
  extent: [10, 10, 4]
)";

ErrorCode parse_code(const std::string& text, const std::string& base = ".") {
  try {
    parse_scenario(text, base);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a parse error");
  return ErrorCode::InvalidArgument;
}

std::string message_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("checked-in scenarios load and validate") {
  for (const char* file : {"box_cylinder.yaml", "wall_grid.yaml", "one_obstacle.yaml"}) {
    CAPTURE(file);
    const Scenario s = load_scenario(kDir + "/" + file);
    CHECK_FALSE(s.name.empty());
    CHECK(s.trials >= 1);
    CHECK_NOTHROW(validate(s));
    CHECK(s.world.keep_free.size() == 2);
    CHECK(s.world.seed == s.seed);
  }
  const Scenario bc = load_scenario(kDir + "/box_cylinder.yaml");
  CHECK(bc.name == "box-cylinder");
  CHECK(bc.seed == 7);
  CHECK(bc.world.archetype == Archetype::BoxCylinder);
  CHECK(bc.start == Eigen::Vector3d(8, 15, 2));
  CHECK(bc.planner.backend.elites == 10);
  CHECK(bc.planner.bandwidth.median);

  const Scenario wall = load_scenario(kDir + "/wall_grid.yaml");
  CHECK(wall.world.archetype == Archetype::WallGrid);
  CHECK(wall.world.opening == 1.75);

  const Scenario one = load_scenario(kDir + "/one_obstacle.yaml");
  REQUIRE(one.world.cylinders.size() == 1);
  CHECK(one.world.cylinders[0].radius == 1.0);
  CHECK(one.planner.backend.w_mmd == 1000.0);
}

TEST_CASE("omitted keys take their defaults") {
  const Scenario s = parse_scenario(kMinimal);
  const SearchConfig f;
  const CemConfig b;
  CHECK(s.r_safe == 0.6);
  CHECK(s.robot_radius == s.r_safe);
  CHECK(s.trials == 50);
  CHECK(s.planner.frontend.heuristic_weight == f.heuristic_weight);
  CHECK(s.planner.frontend.prune_resolution == f.prune_resolution);
  CHECK(s.planner.backend.samples == b.samples);
  CHECK(s.planner.samples_per_point == kDefaultSamplesPerPoint);
  CHECK(std::holds_alternative<GaussianNoise>(s.noise.kind()));
  CHECK(s.base_dir == ".");
}

TEST_CASE("robot radius follows r_safe unless given") {
  const Scenario a = parse_scenario("world: {extent: [10, 10, 4]}\nquery: {start: [2, 2, 2], goal: [8, 8, 2], r_safe: 0.4}\n");
  CHECK(a.robot_radius == 0.4);
  const Scenario b = parse_scenario(R"(
query:
  start: [2, 2, 2]
  goal: [8, 8, 2]
  r_safe: 0.4
  robot_radius: 0.3
world:
  extent: [10, 10, 4]
)");
  CHECK(b.robot_radius == 0.3);
}

TEST_CASE("unknown keys are parse errors naming their path") {
  CHECK(parse_code(kMinimal + "plannr: {}\n") == ErrorCode::Parse);
  const std::string msg = message_of(kMinimal + "planner:\n  frontend:\n    u_maxx: 2\n");
  CHECK(msg.find("planner.frontend") != std::string::npos);
  CHECK(msg.find("u_maxx") != std::string::npos);
}

TEST_CASE("malformed documents are parse errors") {
  CHECK(parse_code("world: {extent: [10, 10, 4]}\n") == ErrorCode::Parse);
  CHECK(parse_code("query:\n  start: [1, 1, 1]\n") == ErrorCode::Parse);
  CHECK(parse_code("- 1\n- 2\n") == ErrorCode::Parse);
  CHECK(parse_code("query: [\n") == ErrorCode::Parse);
  CHECK(parse_code(kMinimal + "trials: many\n") == ErrorCode::Parse);
  CHECK(parse_code(kMinimal + "seed: -3\n") == ErrorCode::Parse);
  CHECK(parse_code(R"(
query: {start: [1, 1], goal: [2, 2, 2]}
)") == ErrorCode::Parse);
  CHECK(parse_code(kMinimal + "  archetype: maze\n") == ErrorCode::Parse);
  CHECK(parse_code(kMinimal + "planner:\n  bandwidth:\n    policy: silverman\n") == ErrorCode::Parse);
}

TEST_CASE("cross-field invariants are spec errors") {
  CHECK(parse_code(kMinimal + "trials: 0\n") == ErrorCode::InvalidSpec);
  CHECK(parse_code("world: {extent: [10, 10, 4]}\nquery: {start: [2, 2, 2], goal: [8, 8, 2], r_safe: 0}\n") ==
        ErrorCode::InvalidSpec);
  CHECK(parse_code(kMinimal + "planner:\n  backend:\n    samples: 5\n    elites: 6\n") == ErrorCode::InvalidSpec);
  CHECK(parse_code(kMinimal + "planner:\n  backend:\n    memory_fraction: 1.0\n") == ErrorCode::InvalidSpec);
  CHECK(parse_code(kMinimal + "planner:\n  fit:\n    degree: 4\n") == ErrorCode::InvalidSpec);
  CHECK(parse_code(R"(
query: {start: [2, 2, 2], goal: [12, 8, 2]}
world: {extent: [10, 10, 4]}
)") == ErrorCode::InvalidSpec);
}

TEST_CASE("seed and trial count are read as given") {
  const Scenario s = parse_scenario(kMinimal + "seed: 123456789012\ntrials: 3\n");
  CHECK(s.seed == 123456789012ULL);
  CHECK(s.trials == 3);
}

TEST_CASE("noise models: mixture weights must sum to one") {
  const std::string head = kMinimal + "sensing:\n  distance_noise:\n    type: mixture\n    components:\n";
  const Scenario ok = parse_scenario(head +
                                     "      - {weight: 0.7, mean: 0.0, sigma: 0.1}\n"
                                     "      - {weight: 0.3, mean: 0.2, sigma: 0.4}\n");
  const auto* mix = std::get_if<MixtureNoise>(&ok.noise.kind());
  REQUIRE(mix);
  REQUIRE(mix->components.size() == 2);
  CHECK(mix->components[1].mean == 0.2);
  CHECK_THROWS_AS(parse_scenario(head + "      - {weight: 0.7, mean: 0.0, sigma: 0.1}\n"), Error);
  CHECK(parse_code(head + "      - {weight: 1.0, sigmaa: 0.1}\n") == ErrorCode::Parse);
  CHECK(parse_code(kMinimal + "sensing:\n  distance_noise:\n    type: cauchy\n") == ErrorCode::Parse);
}

TEST_CASE("noise models: empirical files resolve against the scenario directory") {
  const auto dir = std::filesystem::temp_directory_path() / "ccv_scenario_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "noise.txt");
    out << "# measured errors\n0.1\n-0.2\n\n0.05\n";
  }
  const std::string text = kMinimal + "sensing:\n  distance_noise:\n    type: empirical\n    file: noise.txt\n";
  {
    std::ofstream out(dir / "s.yaml");
    out << text;
  }
  const Scenario s = load_scenario((dir / "s.yaml").string());
  const auto* emp = std::get_if<EmpiricalNoise>(&s.noise.kind());
  REQUIRE(emp);
  CHECK(emp->pool == std::vector<double>{0.1, -0.2, 0.05});
  CHECK(s.base_dir == dir.string());
  CHECK(parse_code(text, (dir / "nowhere").string()) == ErrorCode::Io);
  CHECK(parse_code(kMinimal + "sensing:\n  distance_noise:\n    type: empirical\n") == ErrorCode::Parse);
}

TEST_CASE("missing scenario files are I/O errors") {
  try {
    load_scenario(kDir + "/does_not_exist.yaml");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}
