#include "spex/truss_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <utility>

namespace spex {

namespace {

constexpr int kModelSchemaVersion = 1;

[[noreturn]] void fail(const std::string& message) { throw InputError("model: " + message); }

double positive_field(const nlohmann::json& block, const char* key, const char* block_name) {
  if (!block.contains(key) || !block.at(key).is_number()) {
    fail(std::string(block_name) + "." + key + " must be a number");
  }
  const double value = block.at(key).get<double>();
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(std::string(block_name) + "." + key + " must be strictly positive");
  }
  return value;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

SectionSpec SectionSpec::solid_circle(double radius_mm) {
  SectionSpec s;
  const double r2 = radius_mm * radius_mm;
  s.area = kPi * r2;
  s.iy = kPi * r2 * r2 / 4.0;
  s.iz = s.iy;
  s.torsion = kPi * r2 * r2 / 2.0;
  s.radius = radius_mm;
  return s;
}

TrussModel TrussModel::create(std::vector<Node> nodes, std::vector<Element> elements,
                              MaterialSpec material, SectionSpec section) {
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(elements.begin(), elements.end(),
            [](const Element& a, const Element& b) { return a.id < b.id; });

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != static_cast<int>(i)) fail("node ids must be dense 0..N-1");
    if (!nodes[i].position.allFinite()) fail("node " + std::to_string(i) + " has a non-finite position");
  }
  if (elements.empty()) fail("model has no elements");

  const int n_nodes = static_cast<int>(nodes.size());
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const Element& e = elements[i];
    if (e.id != static_cast<int>(i)) fail("element ids must be dense 0..N-1");
    if (e.start_node < 0 || e.start_node >= n_nodes || e.end_node < 0 || e.end_node >= n_nodes) {
      fail("element " + std::to_string(e.id) + " references an unknown node");
    }
    if (e.start_node == e.end_node ||
        (nodes[e.start_node].position - nodes[e.end_node].position).norm() < 1e-9) {
      fail("element " + std::to_string(e.id) + " has zero length");
    }
    const auto key = std::minmax(e.start_node, e.end_node);
    if (!seen.insert(key).second) fail("duplicate element " + std::to_string(e.id));
  }

  if (std::none_of(nodes.begin(), nodes.end(), [](const Node& n) { return n.grounded; })) {
    fail("no grounded node");
  }

  // every element must reach a grounded node through shared nodes
  std::vector<int> parent(n_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  for (const Element& e : elements) parent[find_root(parent, e.start_node)] = find_root(parent, e.end_node);
  std::vector<char> root_grounded(n_nodes, 0);
  for (const Node& n : nodes) {
    if (n.grounded) root_grounded[find_root(parent, n.id)] = 1;
  }
  for (const Element& e : elements) {
    if (!root_grounded[find_root(parent, e.start_node)]) {
      fail("element " + std::to_string(e.id) + " is disconnected from ground");
    }
  }

  if (!(material.elastic_modulus > 0 && material.shear_modulus > 0 && material.density > 0)) {
    fail("material properties must be strictly positive");
  }
  if (!(section.area > 0 && section.iy > 0 && section.iz > 0 && section.torsion > 0 && section.radius > 0)) {
    fail("section properties must be strictly positive");
  }

  TrussModel model;
  model.nodes_ = std::move(nodes);
  model.elements_ = std::move(elements);
  model.material_ = material;
  model.section_ = section;
  return model;
}

bool TrussModel::has_layers() const {
  return std::any_of(elements_.begin(), elements_.end(), [](const Element& e) { return e.layer.has_value(); });
}

TrussModel load_model(const nlohmann::json& doc) {
  if (!doc.is_object()) fail("document must be an object");
  if (doc.contains("version") && doc.at("version") != kModelSchemaVersion) {
    fail("unsupported schema version " + doc.at("version").dump());
  }
  if (!doc.contains("nodes") || !doc.at("nodes").is_array()) fail("missing nodes array");
  if (!doc.contains("elements") || !doc.at("elements").is_array()) fail("missing elements array");

  std::vector<Node> nodes;
  for (const auto& jn : doc.at("nodes")) {
    if (!jn.is_object() || !jn.contains("id") || !jn.contains("xyz")) fail("node entries need id and xyz");
    const auto& xyz = jn.at("xyz");
    if (!xyz.is_array() || xyz.size() != 3) fail("node xyz must have 3 components");
    Node n;
    n.id = jn.at("id").get<int>();
    n.position = Vec3(xyz[0].get<double>(), xyz[1].get<double>(), xyz[2].get<double>());
    n.grounded = jn.value("grounded", false);
    nodes.push_back(n);
  }

  std::vector<Element> elements;
  bool any_layer = false;
  bool all_layer = true;
  for (const auto& je : doc.at("elements")) {
    if (!je.is_object() || !je.contains("id") || !je.contains("start") || !je.contains("end")) {
      fail("element entries need id, start and end");
    }
    Element e;
    e.id = je.at("id").get<int>();
    e.start_node = je.at("start").get<int>();
    e.end_node = je.at("end").get<int>();
    if (je.contains("layer") && !je.at("layer").is_null()) {
      e.layer = je.at("layer").get<int>();
      any_layer = true;
    } else {
      all_layer = false;
    }
    elements.push_back(e);
  }
  if (any_layer && !all_layer) fail("either every element or no element carries a layer");

  MaterialSpec material;
  if (doc.contains("material")) {
    const auto& m = doc.at("material");
    material.elastic_modulus = positive_field(m, "elastic_modulus", "material");
    material.shear_modulus = positive_field(m, "shear_modulus", "material");
    material.density = positive_field(m, "density", "material");
  }

  if (!doc.contains("section")) fail("missing section");
  const auto& s = doc.at("section");
  SectionSpec section;
  const double radius = positive_field(s, "radius", "section");
  if (s.contains("area")) {
    section.area = positive_field(s, "area", "section");
    section.iy = positive_field(s, "iy", "section");
    section.iz = positive_field(s, "iz", "section");
    section.torsion = positive_field(s, "torsion", "section");
    section.radius = radius;
  } else {
    section = SectionSpec::solid_circle(radius);
  }

  return TrussModel::create(std::move(nodes), std::move(elements), material, section);
}

TrussModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("model file " + path + " is not valid JSON: " + e.what());
  }
  try {
    return load_model(doc);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model: schema violation: ") + e.what());
  }
}

nlohmann::json serialize_model(const TrussModel& model) {
  nlohmann::json doc;
  doc["version"] = kModelSchemaVersion;
  auto& nodes = doc["nodes"] = nlohmann::json::array();
  for (const Node& n : model.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"xyz", {n.position.x(), n.position.y(), n.position.z()}},
                     {"grounded", n.grounded}});
  }
  auto& elements = doc["elements"] = nlohmann::json::array();
  for (const Element& e : model.elements()) {
    nlohmann::json je = {{"id", e.id}, {"start", e.start_node}, {"end", e.end_node}};
    if (e.layer) je["layer"] = *e.layer;
    elements.push_back(je);
  }
  const auto& m = model.material();
  doc["material"] = {{"elastic_modulus", m.elastic_modulus},
                     {"shear_modulus", m.shear_modulus},
                     {"density", m.density}};
  const auto& s = model.section();
  doc["section"] = {{"area", s.area}, {"iy", s.iy}, {"iz", s.iz}, {"torsion", s.torsion}, {"radius", s.radius}};
  return doc;
}

std::vector<std::vector<char>> adjacency(const TrussModel& model) {
  const int n = model.element_count();
  std::vector<std::vector<int>> incident(model.node_count());
  for (const Element& e : model.elements()) {
    incident[e.start_node].push_back(e.id);
    incident[e.end_node].push_back(e.id);
  }
  std::vector<std::vector<char>> a(n, std::vector<char>(n, 0));
  for (const auto& list : incident) {
    for (int i : list) {
      for (int j : list) {
        if (i != j) a[i][j] = 1;
      }
    }
  }
  return a;
}

std::vector<char> grounded_vector(const TrussModel& model) {
  std::vector<char> g(model.element_count(), 0);
  for (const Element& e : model.elements()) {
    g[e.id] = model.node(e.start_node).grounded || model.node(e.end_node).grounded;
  }
  return g;
}

PathPoints discretize_element(const TrussModel& model, int element_id, double spacing, int from_node) {
  if (!(spacing > 0.0)) throw std::invalid_argument("discretize_element: spacing must be positive");
  const Element& e = model.element(element_id);
  PathPoints path;
  path.element_id = element_id;
  path.from_node = e.start_node;
  path.to_node = e.end_node;
  if (from_node >= 0) {
    if (from_node == e.end_node) {
      std::swap(path.from_node, path.to_node);
    } else if (from_node != e.start_node) {
      throw std::invalid_argument("discretize_element: node is not an endpoint of the element");
    }
  }
  const Vec3 a = model.node(path.from_node).position;
  const Vec3 b = model.node(path.to_node).position;
  const int segments = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing - 1e-12)));
  path.points.reserve(segments + 1);
  for (int k = 0; k <= segments; ++k) {
    const double t = static_cast<double>(k) / segments;
    path.points.push_back(a + t * (b - a));
  }
  path.points.front() = a;
  path.points.back() = b;
  return path;
}

LayerGroups validate_decomposition(const TrussModel& model, const std::vector<int>& layer_of) {
  const int n = model.element_count();
  if (static_cast<int>(layer_of.size()) != n) {
    throw InputError("decomposition: expected " + std::to_string(n) + " entries, got " +
                     std::to_string(layer_of.size()));
  }
  int max_layer = -1;
  for (int e = 0; e < n; ++e) {
    if (layer_of[e] < 0) throw InputError("decomposition: element " + std::to_string(e) + " has no layer");
    max_layer = std::max(max_layer, layer_of[e]);
  }
  LayerGroups out;
  out.groups.assign(max_layer + 1, {});
  for (int e = 0; e < n; ++e) out.groups[layer_of[e]].push_back(e);
  for (int l = 0; l <= max_layer; ++l) {
    if (out.groups[l].empty()) throw InputError("decomposition: layer " + std::to_string(l) + " is empty");
  }

  // Union of layers 0..l must be ground-connected, otherwise the search fails fast.
  std::vector<int> parent(model.node_count());
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<char> used(n, 0);
  for (int l = 0; l <= max_layer; ++l) {
    for (int e : out.groups[l]) {
      const Element& el = model.element(e);
      parent[find_root(parent, el.start_node)] = find_root(parent, el.end_node);
      used[e] = 1;
    }
    std::vector<char> root_grounded(model.node_count(), 0);
    for (const Node& node : model.nodes()) {
      if (node.grounded) root_grounded[find_root(parent, node.id)] = 1;
    }
    for (int e = 0; e < n; ++e) {
      if (used[e] && !root_grounded[find_root(parent, model.element(e).start_node)]) {
        out.warnings.push_back("layers 0.." + std::to_string(l) + " leave element " + std::to_string(e) +
                               " disconnected from ground");
        break;
      }
    }
  }
  return out;
}

std::vector<int> model_layers(const TrussModel& model) {
  std::vector<int> layers(model.element_count(), 0);
  for (const Element& e : model.elements()) layers[e.id] = e.layer.value_or(0);
  return layers;
}

}  // namespace spex
