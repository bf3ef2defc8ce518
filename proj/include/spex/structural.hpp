#pragma once

#include <span>
#include <vector>

#include "spex/truss_model.hpp"

namespace spex {

// Gravity in m/s^2. Loads are derived from the model's density and section.
struct StructuralSettings {
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  double displacement_tolerance = 1.0;  // mm
  double tension_tolerance = 1e-6;      // relative to total self-weight
};

struct StiffnessResult {
  bool solved = false;                   // false: singular system (mechanism)
  std::vector<int> free_nodes;           // node ids with unknown DOFs
  std::vector<Eigen::Matrix<double, 6, 1>> displacements;  // per free node: ux uy uz rx ry rz (mm, rad)
  double max_translation = 0.0;          // mm
  std::vector<int> support_nodes;        // grounded node ids in the partial structure
  std::vector<Eigen::Matrix<double, 6, 1>> reactions;      // per support node: Fx Fy Fz (N), Mx My Mz (N mm)
  double total_weight = 0.0;             // N
  double relative_residual = 0.0;        // ||K u - f|| / ||f||
};

// Linear 3D frame analysis of the listed elements under self-weight, with
// grounded nodes fully clamped.
StiffnessResult analyze(const TrussModel& model, std::span<const int> elements, const Vec3& gravity);

// 12x12 element stiffness in global coordinates (DOF order: node a then node b,
// each ux uy uz rx ry rz).
Eigen::Matrix<double, 12, 12> frame_element_stiffness(const Vec3& a, const Vec3& b, const MaterialSpec& material,
                                                      const SectionSpec& section);

bool check_stiffness(const TrussModel& model, std::span<const int> elements, const StructuralSettings& settings);

// Centre of gravity over the grounded support hull and no tensile support
// reaction.
bool check_stability(const TrussModel& model, std::span<const int> elements, const StructuralSettings& settings);

// Both checks from one solve.
struct StructuralVerdict {
  bool stiff = true;
  bool stable = true;
};
StructuralVerdict check_structure(const TrussModel& model, std::span<const int> elements,
                                  const StructuralSettings& settings);

Vec3 center_of_gravity(const TrussModel& model, std::span<const int> elements);

}  // namespace spex
