#include "ccovoxel/frontend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "ccovoxel/error.hpp"
#include "ccovoxel/rng.hpp"

namespace ccv {

std::vector<Eigen::Vector3d> generate_controls(double u_max, int r) {
  if (r < 1) fail(ErrorCode::InvalidArgument, "control resolution must be >= 1");
  if (!(u_max > 0.0)) fail(ErrorCode::InvalidArgument, "u_max must be > 0");
  std::vector<Eigen::Vector3d> out;
  out.reserve(static_cast<std::size_t>((2 * r + 1) * (2 * r + 1) * (2 * r + 1)));
  const double step = u_max / r;
  for (int i = -r; i <= r; ++i)
    for (int j = -r; j <= r; ++j)
      for (int k = -r; k <= r; ++k) out.emplace_back(i * step, j * step, k * step);
  return out;
}

KinoState propagate(const KinoState& s, const MotionPrimitive& m) {
  KinoState out;
  out.position = s.position + s.velocity * m.tau + 0.5 * m.u * m.tau * m.tau;
  out.velocity = s.velocity + m.u * m.tau;
  return out;
}

namespace {

// Positive real roots of sum coeffs[i] T^(deg - i).
std::vector<double> positive_real_roots(std::vector<double> coeffs) {
  while (!coeffs.empty() && coeffs.front() == 0.0) coeffs.erase(coeffs.begin());
  std::vector<double> roots;
  const int deg = static_cast<int>(coeffs.size()) - 1;
  if (deg < 1) return roots;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) companion(0, i) = -coeffs[static_cast<std::size_t>(i + 1)] / coeffs[0];
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  for (int i = 0; i < deg; ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z.real())) && z.real() > 0.0) roots.push_back(z.real());
  }
  return roots;
}

}  // namespace

double heuristic(const KinoState& s, const KinoState& goal, double rho, double* optimal_time) {
  if (rho < 0.0) fail(ErrorCode::InvalidArgument, "rho must be >= 0");
  const Eigen::Vector3d dp = goal.position - s.position;
  const Eigen::Vector3d& v0 = s.velocity;
  const Eigen::Vector3d& v1 = goal.velocity;
  const double a = dp.squaredNorm();
  const double b = (v0 + v1).dot(dp);
  const double c = v0.squaredNorm() + v0.dot(v1) + v1.squaredNorm();
  auto cost = [&](double t) { return 12.0 * a / (t * t * t) - 12.0 * b / (t * t) + 4.0 * c / t + rho * t; };

  double best = std::numeric_limits<double>::infinity();
  double best_t = 0.0;
  // dJ/dT * T^4 = rho T^4 - 4c T^2 + 24b T - 36a
  for (double t : positive_real_roots({rho, 0.0, -4.0 * c, 24.0 * b, -36.0 * a})) {
    const double j = cost(t);
    if (j < best) {
      best = j;
      best_t = t;
    }
  }
  if (rho == 0.0 || !std::isfinite(best)) {
    // Without a time penalty (or with nothing to move) the infimum is the
    // T -> infinity limit, which is 0.
    if (rho == 0.0 || (a == 0.0 && b == 0.0 && c == 0.0)) {
      best = 0.0;
      best_t = 0.0;
    }
  }
  if (optimal_time) *optimal_time = best_t;
  return std::max(best, 0.0);
}

double edge_cost(const MotionPrimitive& m, double rho, double w_mmd, double mmd_parent, double mmd_child, bool clamp) {
  const double e = (m.u.squaredNorm() + rho) * m.tau + w_mmd * (mmd_child - mmd_parent);
  return clamp ? std::max(0.0, e) : e;
}

ClosingSegment closing_segment(const Eigen::Vector3d& p0, const Eigen::Vector3d& v0, const Eigen::Vector3d& p1,
                               const Eigen::Vector3d& v1, double duration) {
  if (!(duration > 0.0)) fail(ErrorCode::InvalidArgument, "closing segment duration must be > 0");
  const double t = duration;
  ClosingSegment seg;
  seg.duration = t;
  const Eigen::Vector3d dp = p1 - p0 - v0 * t;
  const Eigen::Vector3d dv = v1 - v0;
  seg.poly.row(0) = p0.transpose();
  seg.poly.row(1) = v0.transpose();
  seg.poly.row(2) = ((3.0 * dp - dv * t) / (t * t)).transpose();
  seg.poly.row(3) = ((dv * t - 2.0 * dp) / (t * t * t)).transpose();
  return seg;
}

double control_energy(const ClosingSegment& seg) {
  // Acceleration is linear in t, so the endpoint form is exact.
  const Eigen::Vector3d a0 = seg.acceleration(0.0);
  const Eigen::Vector3d a1 = seg.acceleration(seg.duration);
  return seg.duration * (a0.squaredNorm() + a0.dot(a1) + a1.squaredNorm()) / 3.0;
}

Eigen::Vector3d ClosingSegment::position(double t) const {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int i = 3; i >= 0; --i) out = out * t + poly.row(i).transpose();
  return out;
}

Eigen::Vector3d ClosingSegment::velocity(double t) const {
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int i = 3; i >= 1; --i) out = out * t + i * poly.row(i).transpose();
  return out;
}

Eigen::Vector3d ClosingSegment::acceleration(double t) const {
  return 2.0 * poly.row(2).transpose() + 6.0 * t * poly.row(3).transpose();
}

double SearchResult::duration() const {
  double t = 0.0;
  for (const auto& n : nodes) t += n.primitive.tau;
  if (closing) t += closing->duration;
  return t;
}

Eigen::Vector3d SearchResult::position(double t) const {
  if (nodes.empty()) fail(ErrorCode::InvalidArgument, "empty path");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double tau = nodes[i].primitive.tau;
    if (t <= tau) {
      const auto& s = nodes[i - 1].state;
      return s.position + s.velocity * t + 0.5 * nodes[i].primitive.u * t * t;
    }
    t -= tau;
  }
  if (closing) return closing->position(std::min(t, closing->duration));
  return nodes.back().state.position;
}

Eigen::Vector3d SearchResult::velocity(double t) const {
  if (nodes.empty()) fail(ErrorCode::InvalidArgument, "empty path");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double tau = nodes[i].primitive.tau;
    if (t <= tau) return nodes[i - 1].state.velocity + nodes[i].primitive.u * t;
    t -= tau;
  }
  if (closing) return closing->velocity(std::min(t, closing->duration));
  return nodes.back().state.velocity;
}

std::vector<Eigen::Vector3d> SearchResult::sample_positions(double dt) const {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "dt must be > 0");
  const double total = duration();
  std::vector<Eigen::Vector3d> out;
  const auto steps = static_cast<std::size_t>(std::ceil(total / dt));
  for (std::size_t i = 0; i < steps; ++i) out.push_back(position(static_cast<double>(i) * dt));
  out.push_back(position(total));
  return out;
}

std::vector<double> SearchResult::mmd_trace() const {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(n.mmd);
  return out;
}

std::uint64_t node_stream(std::uint64_t seed, const Eigen::Vector3i& cell) {
  return derive_seed({seed, 0x6e6f6465ULL, static_cast<std::uint64_t>(static_cast<std::int64_t>(cell.x())),
                      static_cast<std::uint64_t>(static_cast<std::int64_t>(cell.y())),
                      static_cast<std::uint64_t>(static_cast<std::int64_t>(cell.z()))});
}

namespace {

using CellKey = std::array<int, 6>;

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 0;
    for (int v : k) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)));
    return static_cast<std::size_t>(h);
  }
};

struct Node {
  KinoState state;
  MotionPrimitive primitive;
  double g = 0.0;
  double h = 0.0;
  double mmd = 0.0;
  std::ptrdiff_t parent = -1;
  CellKey key{};
  bool closed = false;
};

struct OpenEntry {
  double f;
  double mmd;
  std::size_t seq;
  std::size_t idx;
  bool operator>(const OpenEntry& o) const {
    if (f != o.f) return f > o.f;
    if (mmd != o.mmd) return mmd > o.mmd;
    return seq > o.seq;
  }
};

class Searcher {
 public:
  Searcher(const ViolationModel& model, const SearchConfig& cfg, const Eigen::Vector3d& goal)
      : model_(model), cfg_(cfg), goal_(goal) {}

  Eigen::Vector3i cell_of(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d u = (p - model_.field().origin()) / cfg_.prune_resolution;
    return {static_cast<int>(std::floor(u.x())), static_cast<int>(std::floor(u.y())),
            static_cast<int>(std::floor(u.z()))};
  }

  CellKey key_of(const KinoState& st) const {
    CellKey k{};
    const Eigen::Vector3i c = cell_of(st.position);
    for (int a = 0; a < 3; ++a) k[static_cast<std::size_t>(a)] = c[a];
    if (cfg_.prune_velocity_resolution > 0.0)
      for (int a = 0; a < 3; ++a)
        k[static_cast<std::size_t>(3 + a)] =
            static_cast<int>(std::floor(st.velocity[a] / cfg_.prune_velocity_resolution));
    return k;
  }

  // Inside the map and not inside a measured-occupied voxel.
  bool free_point(const Eigen::Vector3d& p) const {
    const DistanceField& f = model_.field();
    if (!f.inside(p)) return false;
    if (f.at(f.voxel_of(p)) <= 0.0) return false;
    if (cfg_.hard_clearance > 0.0 && f.query(p) < cfg_.hard_clearance) return false;
    return true;
  }

  bool primitive_ok(const KinoState& s, const MotionPrimitive& m, KinoState& out) const {
    out = propagate(s, m);
    if ((out.velocity.array().abs() > cfg_.v_max + 1e-9).any()) return false;
    for (int k = 1; k <= cfg_.collision_checks; ++k) {
      const double t = m.tau * k / cfg_.collision_checks;
      if (!free_point(s.position + s.velocity * t + 0.5 * m.u * t * t)) return false;
    }
    return true;
  }

  double mmd_at(const ViolationModel& m, const Eigen::Vector3d& p) const {
    if (cfg_.w_mmd == 0.0) return 0.0;
    const Eigen::Vector3i c = cell_of(p);
    const CellKey key{c.x(), c.y(), c.z(), 0, 0, 0};
    auto it = offsets_.find(key);
    if (it == offsets_.end()) it = offsets_.emplace(key, m.noise_offsets(node_stream(cfg_.seed, c))).first;
    return m.mmd(p, it->second);
  }

  // Rest-to-rest closing segment to the goal, or nullopt when every trial
  // duration breaks a limit, leaves the map, or crosses risky space.
  std::optional<ClosingSegment> try_shot(const ViolationModel& m, const Node& n) const {
    KinoState goal_state;
    goal_state.position = goal_;
    double t_opt = 0.0;
    heuristic(n.state, goal_state, cfg_.rho, &t_opt);
    const double dist = (goal_ - n.state.position).norm();
    if (!(t_opt > 0.0)) t_opt = std::max(dist / cfg_.v_max, cfg_.tau);
    for (double scale : {1.0, 1.5, 2.0, 3.0}) {
      const ClosingSegment seg =
          closing_segment(n.state.position, n.state.velocity, goal_, Eigen::Vector3d::Zero(), t_opt * scale);
      const int checks = std::max(10, static_cast<int>(std::ceil(seg.duration / (cfg_.tau / cfg_.collision_checks))));
      bool ok = true;
      for (int k = 1; k <= checks && ok; ++k) {
        const double t = seg.duration * k / checks;
        const Eigen::Vector3d p = seg.position(t);
        if ((seg.velocity(t).array().abs() > cfg_.v_max + 1e-9).any() ||
            (seg.acceleration(t).array().abs() > cfg_.u_max + 1e-9).any() || !free_point(p))
          ok = false;
        else if (cfg_.w_mmd != 0.0 && mmd_at(m, p) > cfg_.shot_mmd_threshold)
          ok = false;
      }
      if (ok) return seg;
    }
    return std::nullopt;
  }

  SearchResult run(const KinoState& start, const ExpansionSink& sink) {
    const DistanceField& f = model_.field();
    auto occupied_or_outside = [&](const Eigen::Vector3d& p) { return !f.inside(p) || f.at(f.voxel_of(p)) <= 0.0; };
    if (occupied_or_outside(start.position)) fail(ErrorCode::InvalidQuery, "start is outside the map or occupied");
    if (occupied_or_outside(goal_)) fail(ErrorCode::InvalidQuery, "goal is outside the map or occupied");

    const auto controls = generate_controls(cfg_.u_max, cfg_.resolution_r);
    KinoState goal_state;
    goal_state.position = goal_;

    // Freeze the kernel from the first expansion batch when asked to.
    KernelSpec kernel = model_.kernel();
    if (cfg_.bandwidth && cfg_.w_mmd != 0.0) {
      std::vector<double> pooled;
      auto add = [&](const Eigen::Vector3d& p) {
        const auto v = model_.violations(p, node_stream(cfg_.seed, cell_of(p)));
        pooled.insert(pooled.end(), v.values.begin(), v.values.end());
      };
      add(start.position);
      for (const auto& u : controls) {
        KinoState child;
        if (primitive_ok(start, {u, cfg_.tau}, child)) add(child.position);
      }
      kernel = resolve_kernel(*cfg_.bandwidth, pooled);
    }
    const ViolationModel m = model_.with_kernel(kernel);

    std::vector<Node> nodes;
    std::unordered_map<CellKey, std::size_t, CellKeyHash> by_cell;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
    std::size_t seq = 0;

    Node root;
    root.state = start;
    root.h = heuristic(start, goal_state, cfg_.rho);
    root.mmd = mmd_at(m, start.position);
    root.key = key_of(start);
    nodes.push_back(root);
    by_cell[root.key] = 0;
    open.push({cfg_.heuristic_weight * root.h, root.mmd, seq++, 0});

    std::size_t expansions = 0;
    while (!open.empty()) {
      const OpenEntry top = open.top();
      open.pop();
      Node& cur = nodes[top.idx];
      if (cur.closed || by_cell.at(cur.key) != top.idx) continue;
      cur.closed = true;
      ++expansions;
      if (sink) sink({expansions, cur.state, cur.g, cur.h, cur.mmd});
      if (expansions > cfg_.max_expansions) {
        std::ostringstream os;
        os << "search exhausted its budget after " << expansions - 1 << " expansions";
        fail(ErrorCode::SearchFailure, os.str());
      }

      const double dist = (cur.state.position - goal_).norm();
      std::optional<ClosingSegment> shot;
      if (dist <= cfg_.shot_radius) shot = try_shot(m, cur);
      if (shot || dist <= cfg_.goal_tolerance) return finish(nodes, top.idx, shot, expansions, kernel);

      const std::size_t cur_idx = top.idx;
      for (const auto& u : controls) {
        const MotionPrimitive prim{u, cfg_.tau};
        KinoState child_state;
        if (!primitive_ok(nodes[cur_idx].state, prim, child_state)) continue;
        Node child;
        child.state = child_state;
        child.primitive = prim;
        child.parent = static_cast<std::ptrdiff_t>(cur_idx);
        child.mmd = mmd_at(m, child_state.position);
        child.g = nodes[cur_idx].g +
                  edge_cost(prim, cfg_.rho, cfg_.w_mmd, nodes[cur_idx].mmd, child.mmd, cfg_.clamp_edge_cost);
        child.key = key_of(child_state);
        const auto it = by_cell.find(child.key);
        if (it != by_cell.end()) {
          const Node& existing = nodes[it->second];
          const bool better = child.g < existing.g || (child.g == existing.g && child.mmd < existing.mmd);
          if (!better) continue;
        }
        child.h = heuristic(child_state, goal_state, cfg_.rho);
        const std::size_t idx = nodes.size();
        nodes.push_back(child);
        by_cell[child.key] = idx;
        open.push({child.g + cfg_.heuristic_weight * child.h, child.mmd, seq++, idx});
      }
    }
    std::ostringstream os;
    os << "open list exhausted after " << expansions << " expansions without reaching the goal";
    fail(ErrorCode::SearchFailure, os.str());
  }

 private:
  SearchResult finish(const std::vector<Node>& nodes, std::size_t last, const std::optional<ClosingSegment>& shot,
                      std::size_t expansions, const KernelSpec& kernel) const {
    SearchResult r;
    r.kernel = kernel;
    r.expansions = expansions;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(last); i >= 0; i = nodes[static_cast<std::size_t>(i)].parent) {
      const Node& n = nodes[static_cast<std::size_t>(i)];
      r.nodes.push_back({n.state, n.primitive, n.g, n.h, n.mmd});
    }
    std::reverse(r.nodes.begin(), r.nodes.end());
    r.cost = r.nodes.back().g;
    if (shot) {
      r.closing = shot;
      r.cost += control_energy(*shot) + cfg_.rho * shot->duration;
    }
    return r;
  }

  const ViolationModel& model_;
  const SearchConfig& cfg_;
  // Noise draws per pruning cell; identical to drawing the cell stream afresh.
  mutable std::unordered_map<CellKey, std::vector<double>, CellKeyHash> offsets_;
  Eigen::Vector3d goal_;
};

}  // namespace

SearchResult search(const KinoState& start, const Eigen::Vector3d& goal, const ViolationModel& model,
                    const SearchConfig& cfg, const ExpansionSink& sink) {
  if (!(cfg.tau > 0.0)) fail(ErrorCode::InvalidArgument, "tau must be > 0");
  if (!(cfg.v_max > 0.0)) fail(ErrorCode::InvalidArgument, "v_max must be > 0");
  if (!(cfg.prune_resolution > 0.0)) fail(ErrorCode::InvalidArgument, "prune resolution must be > 0");
  if (cfg.prune_velocity_resolution < 0.0) fail(ErrorCode::InvalidArgument, "velocity prune resolution must be >= 0");
  if (cfg.collision_checks < 1) fail(ErrorCode::InvalidArgument, "collision checks must be >= 1");
  Searcher s(model, cfg, goal);
  return s.run(start, sink);
}

}  // namespace ccv
