#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "spex/types.hpp"

namespace spex {

struct Node {
  int id = 0;
  Vec3 position = Vec3::Zero();  // mm
  bool grounded = false;
};

struct Element {
  int id = 0;
  int start_node = 0;
  int end_node = 0;
  std::optional<int> layer;
};

// Elastic moduli in MPa, density in kg/m^3.
struct MaterialSpec {
  double elastic_modulus = 3500.0;
  double shear_modulus = 1290.0;
  double density = 1240.0;
};

// Areas in mm^2, second moments in mm^4, radius in mm (collision geometry).
struct SectionSpec {
  double area = 0.0;
  double iy = 0.0;
  double iz = 0.0;
  double torsion = 0.0;
  double radius = 0.0;

  static SectionSpec solid_circle(double radius_mm);
};

// Immutable node/element graph. Construct through load_model or
// TrussModel::create, both of which validate.
class TrussModel {
 public:
  static TrussModel create(std::vector<Node> nodes, std::vector<Element> elements,
                           MaterialSpec material, SectionSpec section);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Element>& elements() const { return elements_; }
  const MaterialSpec& material() const { return material_; }
  const SectionSpec& section() const { return section_; }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int element_count() const { return static_cast<int>(elements_.size()); }

  const Node& node(int id) const { return nodes_.at(id); }
  const Element& element(int id) const { return elements_.at(id); }

  Vec3 start_point(int element_id) const { return nodes_[elements_[element_id].start_node].position; }
  Vec3 end_point(int element_id) const { return nodes_[elements_[element_id].end_node].position; }
  double length(int element_id) const { return (end_point(element_id) - start_point(element_id)).norm(); }

  bool has_layers() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Element> elements_;
  MaterialSpec material_;
  SectionSpec section_;
};

TrussModel load_model(const nlohmann::json& document);
TrussModel load_model_file(const std::string& path);
nlohmann::json serialize_model(const TrussModel& model);

// Symmetric n x n element adjacency (shared node), zero diagonal.
std::vector<std::vector<char>> adjacency(const TrussModel& model);

// G[i] = 1 iff element i touches a grounded node.
std::vector<char> grounded_vector(const TrussModel& model);

// Path points for extruding one element from from_node to the other end.
struct PathPoints {
  int element_id = 0;
  int from_node = 0;
  int to_node = 0;
  std::vector<Vec3> points;

  int count() const { return static_cast<int>(points.size()); }
};

constexpr double kDefaultSpacing = 5.0;

// ceil(length / spacing) + 1 uniformly spaced points. from_node < 0 keeps the
// element's own start->end orientation.
PathPoints discretize_element(const TrussModel& model, int element_id, double spacing,
                              int from_node = -1);

struct LayerGroups {
  std::vector<std::vector<int>> groups;  // element ids per layer, ascending layer order
  std::vector<std::string> warnings;
};

// layer_of[e] is the layer of element e. Throws InputError on missing ids or
// gaps in the layer numbering.
LayerGroups validate_decomposition(const TrussModel& model, const std::vector<int>& layer_of);

// Layer vector taken from the model's own element annotations, or all zeros.
std::vector<int> model_layers(const TrussModel& model);

}  // namespace spex
