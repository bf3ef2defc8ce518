#include "spex/structural.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>

#include "spex/spatial.hpp"

namespace spex {

namespace {

// kg/m^3 * m/s^2 -> N/mm^3
constexpr double kDensityToWeight = 1e-9;

Mat3 element_rotation(const Vec3& a, const Vec3& b) {
  const Vec3 x = (b - a).normalized();
  // local y from the global z unless the member is vertical
  Vec3 ref = Vec3::UnitZ();
  if (std::abs(x.dot(ref)) > 1.0 - 1e-9) ref = Vec3::UnitX();
  const Vec3 y = ref.cross(x).normalized();
  const Vec3 z = x.cross(y);
  Mat3 r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  return r;
}

Eigen::Matrix<double, 12, 12> local_stiffness(double length, const MaterialSpec& m, const SectionSpec& s) {
  const double L = length;
  const double L2 = L * L;
  const double L3 = L2 * L;
  const double E = m.elastic_modulus;
  const double G = m.shear_modulus;
  Eigen::Matrix<double, 12, 12> k = Eigen::Matrix<double, 12, 12>::Zero();

  const double axial = E * s.area / L;
  const double torsion = G * s.torsion / L;
  k(0, 0) = axial;   k(0, 6) = -axial;
  k(6, 0) = -axial;  k(6, 6) = axial;
  k(3, 3) = torsion;   k(3, 9) = -torsion;
  k(9, 3) = -torsion;  k(9, 9) = torsion;

  // bending in the local x-y plane (about z)
  const double bz = E * s.iz;
  k(1, 1) = 12 * bz / L3;   k(1, 5) = 6 * bz / L2;   k(1, 7) = -12 * bz / L3;  k(1, 11) = 6 * bz / L2;
  k(5, 1) = 6 * bz / L2;    k(5, 5) = 4 * bz / L;    k(5, 7) = -6 * bz / L2;   k(5, 11) = 2 * bz / L;
  k(7, 1) = -12 * bz / L3;  k(7, 5) = -6 * bz / L2;  k(7, 7) = 12 * bz / L3;   k(7, 11) = -6 * bz / L2;
  k(11, 1) = 6 * bz / L2;   k(11, 5) = 2 * bz / L;   k(11, 7) = -6 * bz / L2;  k(11, 11) = 4 * bz / L;

  // bending in the local x-z plane (about y)
  const double by = E * s.iy;
  k(2, 2) = 12 * by / L3;   k(2, 4) = -6 * by / L2;  k(2, 8) = -12 * by / L3;  k(2, 10) = -6 * by / L2;
  k(4, 2) = -6 * by / L2;   k(4, 4) = 4 * by / L;    k(4, 8) = 6 * by / L2;    k(4, 10) = 2 * by / L;
  k(8, 2) = -12 * by / L3;  k(8, 4) = 6 * by / L2;   k(8, 8) = 12 * by / L3;   k(8, 10) = 6 * by / L2;
  k(10, 2) = -6 * by / L2;  k(10, 4) = 2 * by / L;   k(10, 8) = 6 * by / L2;   k(10, 10) = 4 * by / L;
  return k;
}

}  // namespace

Eigen::Matrix<double, 12, 12> frame_element_stiffness(const Vec3& a, const Vec3& b, const MaterialSpec& material,
                                                      const SectionSpec& section) {
  const Mat3 r = element_rotation(a, b);
  Eigen::Matrix<double, 12, 12> t = Eigen::Matrix<double, 12, 12>::Zero();
  for (int blk = 0; blk < 4; ++blk) t.block<3, 3>(3 * blk, 3 * blk) = r;
  const auto k_local = local_stiffness((b - a).norm(), material, section);
  return t.transpose() * k_local * t;
}

Vec3 center_of_gravity(const TrussModel& model, std::span<const int> elements) {
  Vec3 moment = Vec3::Zero();
  double total = 0.0;
  for (int e : elements) {
    const double len = model.length(e);
    moment += len * 0.5 * (model.start_point(e) + model.end_point(e));
    total += len;
  }
  return total > 0.0 ? Vec3(moment / total) : Vec3::Zero();
}

StiffnessResult analyze(const TrussModel& model, std::span<const int> elements, const Vec3& gravity) {
  StiffnessResult result;
  if (elements.empty()) {
    result.solved = true;
    return result;
  }

  // node -> dof block; free nodes first, supports after
  std::map<int, int> free_index;
  std::map<int, int> support_index;
  for (int e : elements) {
    for (int n : {model.element(e).start_node, model.element(e).end_node}) {
      if (model.node(n).grounded) {
        support_index.emplace(n, 0);
      } else {
        free_index.emplace(n, 0);
      }
    }
  }
  int counter = 0;
  for (auto& [node, idx] : free_index) {
    idx = counter++;
    result.free_nodes.push_back(node);
  }
  const int n_free = counter;
  for (auto& [node, idx] : support_index) {
    idx = counter++;
    result.support_nodes.push_back(node);
  }
  const int n_total = counter;

  auto block_of = [&](int node) {
    auto it = free_index.find(node);
    return it != free_index.end() ? it->second : support_index.at(node);
  };

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(6 * n_total, 6 * n_total);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(6 * n_total);
  const double weight_density =
      model.material().density * kDensityToWeight * model.section().area;  // N/mm per unit g
  for (int e : elements) {
    const Element& el = model.element(e);
    const Vec3 a = model.node(el.start_node).position;
    const Vec3 b = model.node(el.end_node).position;
    const auto ke = frame_element_stiffness(a, b, model.material(), model.section());
    const int ba = block_of(el.start_node);
    const int bb = block_of(el.end_node);
    const int offsets[2] = {6 * ba, 6 * bb};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        k.block<6, 6>(offsets[i], offsets[j]) += ke.block<6, 6>(6 * i, 6 * j);
      }
    }
    // half the self-weight at each end
    const Vec3 half = 0.5 * weight_density * (b - a).norm() * gravity;
    f.segment<3>(offsets[0]) += half;
    f.segment<3>(offsets[1]) += half;
    result.total_weight += 2.0 * half.norm();
  }

  const int nf = 6 * n_free;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(6 * n_total);
  if (nf > 0) {
    const Eigen::MatrixXd kff = k.topLeftCorner(nf, nf);
    const Eigen::VectorXd ff = f.head(nf);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(kff);
    if (ldlt.info() != Eigen::Success) return result;
    const auto d = ldlt.vectorD();
    const double scale = kff.diagonal().cwiseAbs().maxCoeff();
    if (d.minCoeff() <= 1e-12 * scale) return result;  // not positive definite: mechanism
    u.head(nf) = ldlt.solve(ff);
    const double fnorm = ff.norm();
    result.relative_residual = fnorm > 0.0 ? (kff * u.head(nf) - ff).norm() / fnorm : 0.0;
    if (!u.allFinite() || result.relative_residual > 1e-8) return result;
  }

  result.displacements.resize(n_free);
  for (int i = 0; i < n_free; ++i) {
    result.displacements[i] = u.segment<6>(6 * i);
    result.max_translation = std::max(result.max_translation, u.segment<3>(6 * i).norm());
  }
  // support reactions: K_rf u_f - f_r
  const Eigen::VectorXd reaction = k.bottomRows(6 * n_total - nf) * u - f.tail(6 * n_total - nf);
  result.reactions.resize(result.support_nodes.size());
  for (std::size_t i = 0; i < result.support_nodes.size(); ++i) {
    result.reactions[i] = reaction.segment<6>(6 * i);
  }
  result.solved = true;
  return result;
}

namespace {

bool cog_inside_support(const TrussModel& model, std::span<const int> elements, const Vec3& gravity) {
  // project along gravity onto the plane orthogonal to it
  const Vec3 down = gravity.normalized();
  const Vec3 u = reference_x_axis(down);
  const Vec3 v = down.cross(u);
  auto project = [&](const Vec3& p) { return Vec2(p.dot(u), p.dot(v)); };

  std::vector<Vec2> supports;
  for (int e : elements) {
    for (int n : {model.element(e).start_node, model.element(e).end_node}) {
      if (model.node(n).grounded) supports.push_back(project(model.node(n).position));
    }
  }
  if (supports.empty()) return false;
  return point_in_hull(project(center_of_gravity(model, elements)), convex_hull_2d(supports), 1e-6);
}

bool no_tensile_support(const StiffnessResult& r, const Vec3& gravity, double tolerance) {
  const Vec3 up = -gravity.normalized();
  const double limit = tolerance * std::max(r.total_weight, 1e-300);
  return std::all_of(r.reactions.begin(), r.reactions.end(),
                     [&](const auto& reaction) { return reaction.template head<3>().dot(up) >= -limit; });
}

}  // namespace

StructuralVerdict check_structure(const TrussModel& model, std::span<const int> elements,
                                  const StructuralSettings& settings) {
  StructuralVerdict verdict;
  if (elements.empty()) return verdict;
  const StiffnessResult r = analyze(model, elements, settings.gravity);
  verdict.stiff = r.solved && r.max_translation < settings.displacement_tolerance;
  verdict.stable = cog_inside_support(model, elements, settings.gravity) && r.solved &&
                   no_tensile_support(r, settings.gravity, settings.tension_tolerance);
  return verdict;
}

bool check_stiffness(const TrussModel& model, std::span<const int> elements, const StructuralSettings& settings) {
  if (elements.empty()) return true;
  const StiffnessResult r = analyze(model, elements, settings.gravity);
  return r.solved && r.max_translation < settings.displacement_tolerance;
}

bool check_stability(const TrussModel& model, std::span<const int> elements, const StructuralSettings& settings) {
  if (elements.empty()) return true;
  if (!cog_inside_support(model, elements, settings.gravity)) return false;
  const StiffnessResult r = analyze(model, elements, settings.gravity);
  return r.solved && no_tensile_support(r, settings.gravity, settings.tension_tolerance);
}

}  // namespace spex
