#include "qcsg/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qcsg/error.hpp"

namespace qcsg::io {

namespace {

Error input_error(const std::string& what) { return Error(ErrorKind::Input, what); }

template <class T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw input_error(where + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw input_error(where + ": field '" + key + "': " + e.what());
  }
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
    throw input_error(where + ": expected an array of 3 numbers");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

std::string element_id(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw input_error(where + ": element ids must be strings or integers");
}

}  // namespace

json load_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw input_error(path.string() + ": " + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write " + path.string());
  out << text;
}

PrimitiveSet primitives_from_json(const json& doc) {
  if (!doc.is_array()) throw input_error("primitive set: expected a JSON array");
  PrimitiveSet set;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& p = doc[i];
    const std::string where = "primitive #" + std::to_string(i);
    const auto id = field<std::string>(p, "id", where);
    const auto kind = field<std::string>(p, "kind", where);
    Pose pose;
    pose.translation = vec3(field<json>(p, "translation", where), where + " translation");
    if (p.contains("rotation")) {
      const json& r = p["rotation"];
      if (!r.is_array() || r.size() != 4) throw input_error(where + ": rotation must be [w,x,y,z]");
      pose.rotation = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
    }
    const json params = field<json>(p, "params", where);
    Shape shape;
    if (kind == "sphere") {
      shape = Sphere{field<double>(params, "radius", where)};
    } else if (kind == "box") {
      shape = Box{vec3(field<json>(params, "half_extents", where), where + " half_extents")};
    } else if (kind == "cylinder") {
      shape = Cylinder{field<double>(params, "radius", where), field<double>(params, "half_height", where)};
    } else {
      throw input_error(where + ": unknown kind '" + kind + "'");
    }
    set.add(Primitive(id, shape, pose));
  }
  return set;
}

ordered_json primitives_to_json(const PrimitiveSet& primitives) {
  ordered_json out = ordered_json::array();
  for (const auto& p : primitives) {
    ordered_json j;
    j["id"] = p.id();
    j["kind"] = to_string(p.kind());
    const Pose& pose = p.pose();
    j["translation"] = {pose.translation.x, pose.translation.y, pose.translation.z};
    j["rotation"] = {pose.rotation.w, pose.rotation.x, pose.rotation.y, pose.rotation.z};
    ordered_json params;
    if (const auto* s = std::get_if<Sphere>(&p.shape())) {
      params["radius"] = s->radius;
    } else if (const auto* b = std::get_if<Box>(&p.shape())) {
      params["half_extents"] = {b->half_extents.x, b->half_extents.y, b->half_extents.z};
    } else if (const auto* c = std::get_if<Cylinder>(&p.shape())) {
      params["radius"] = c->radius;
      params["half_height"] = c->half_height;
    }
    j["params"] = params;
    out.push_back(j);
  }
  return out;
}

CsgTree tree_from_json(const json& doc) {
  const auto op = field<std::string>(doc, "op", "tree node");
  if (op == "prim") return CsgTree::leaf(field<std::string>(doc, "prim", "prim node"));
  const auto children_json = field<json>(doc, "children", op + " node");
  if (!children_json.is_array()) throw input_error(op + " node: children must be an array");
  std::vector<CsgTree> children;
  for (const auto& c : children_json) children.push_back(tree_from_json(c));
  try {
    if (op == "union") return CsgTree::unite(std::move(children));
    if (op == "inter") return CsgTree::intersect(std::move(children));
    if (op == "comp") {
      if (children.size() != 1) throw input_error("comp node needs exactly one child");
      return CsgTree::complement(std::move(children.front()));
    }
  } catch (const Error& e) {
    throw input_error(e.what());
  }
  throw input_error("unknown tree op '" + op + "'");
}

ordered_json tree_to_json(const CsgTree& tree) {
  ordered_json j;
  switch (tree.op()) {
    case CsgTree::Op::Leaf:
      j["op"] = "prim";
      j["prim"] = tree.primitive();
      return j;
    case CsgTree::Op::Union:
      j["op"] = "union";
      break;
    case CsgTree::Op::Intersection:
      j["op"] = "inter";
      break;
    case CsgTree::Op::Complement:
      j["op"] = "comp";
      break;
  }
  j["children"] = ordered_json::array();
  for (const auto& c : tree.children()) j["children"].push_back(tree_to_json(c));
  return j;
}

PointCloud read_cloud(std::istream& in) {
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<double> v;
    for (std::string tok; fields >> tok;) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw input_error("cloud line " + std::to_string(lineno) + ": invalid number '" + tok + "'");
      }
    }
    if (v.size() != 3 && v.size() != 6) {
      throw input_error("cloud line " + std::to_string(lineno) + ": expected 3 or 6 values");
    }
    CloudPoint p{{v[0], v[1], v[2]}, std::nullopt};
    if (v.size() == 6) {
      const Vec3 n{v[3], v[4], v[5]};
      if (std::abs(n.norm() - 1.0) > 1e-6) {
        throw input_error("cloud line " + std::to_string(lineno) + ": normal is not unit length");
      }
      p.normal = n;
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

void write_cloud(const PointCloud& cloud, std::ostream& out) {
  out << std::setprecision(17);
  for (const auto& p : cloud.points) {
    out << p.position.x << ' ' << p.position.y << ' ' << p.position.z;
    if (p.normal) out << ' ' << p.normal->x << ' ' << p.normal->y << ' ' << p.normal->z;
    out << '\n';
  }
}

PointCloud load_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot read " + path.string());
  return read_cloud(in);
}

IntersectionGraph graph_from_json(const json& doc) {
  // Abstract instances name their vertices "primitives".
  const char* key = !doc.contains("vertices") && doc.contains("primitives") ? "primitives" : "vertices";
  IntersectionGraph g(field<std::vector<std::string>>(doc, key, "graph"));
  const auto edges = field<json>(doc, "edges", "graph");
  if (!edges.is_array()) throw input_error("graph: edges must be an array");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2) throw input_error("graph: each edge must be a pair");
    g.add_edge(element_id(e[0], "edge"), element_id(e[1], "edge"));
  }
  return g;
}

ordered_json graph_to_json(const IntersectionGraph& graph) {
  ordered_json j;
  j["vertices"] = graph.vertices();
  j["edges"] = ordered_json::array();
  for (const auto& [a, b] : graph.edges()) {
    j["edges"].push_back({graph.vertices()[a], graph.vertices()[b]});
  }
  return j;
}

ordered_json cliques_to_json(const std::vector<Clique>& cliques) {
  ordered_json out = ordered_json::array();
  for (const auto& c : cliques) out.push_back(c.members);
  return out;
}

AbstractInstance abstract_from_json(const json& doc) {
  json graph_doc;
  graph_doc["vertices"] = field<json>(doc, "primitives", "abstract instance");
  graph_doc["edges"] = field<json>(doc, "edges", "abstract instance");
  AbstractInstance out{graph_from_json(graph_doc), {}};
  const auto products = field<json>(doc, "products", "abstract instance");
  if (!products.is_array()) throw input_error("abstract instance: products must be an array");
  std::vector<AbstractProduct> list;
  for (const auto& p : products) {
    AbstractProduct ap;
    ap.positives = field<std::vector<std::string>>(p, "positives", "product");
    ap.inside = field<bool>(p, "inside", "product");
    list.push_back(std::move(ap));
  }
  out.table = make_abstract_table(out.graph, list);
  return out;
}

ordered_json table_to_json(const ProductTable& table, const IntersectionGraph& graph) {
  ordered_json j;
  j["primitives"] = table.primitives;
  j["edges"] = graph_to_json(graph)["edges"];
  j["products"] = ordered_json::array();
  for (std::size_t i = 0; i < table.n_f(); ++i) {
    const auto& p = table.products[i];
    ordered_json pj;
    pj["positives"] = table.positive_ids(i);
    pj["inside"] = p.label == ProductLabel::Inside;
    pj["label"] = to_string(p.label);
    pj["inside_fraction"] = p.inside_fraction;
    pj["witnesses"] = p.samples.size();
    j["products"].push_back(pj);
  }
  j["n_f"] = table.n_f();
  j["universe"] = ordered_json::array();
  for (std::size_t u : table.universe) j["universe"].push_back(table.name(u));
  j["warnings"] = table.warnings;
  return j;
}

CoverInstance cover_instance_from_json(const json& doc) {
  CoverInstance instance;
  const auto universe = field<json>(doc, "universe", "cover instance");
  if (!universe.is_array()) throw input_error("cover instance: universe must be an array");
  std::map<std::string, std::size_t> position;
  for (const auto& u : universe) {
    const std::string id = element_id(u, "universe");
    if (!position.emplace(id, instance.universe.size()).second) {
      throw input_error("cover instance: duplicate universe element " + id);
    }
    instance.universe.push_back(id);
  }
  const auto subsets = field<json>(doc, "subsets", "cover instance");
  if (!subsets.is_array()) throw input_error("cover instance: subsets must be an array");
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const std::string where = "subset #" + std::to_string(i);
    CoverSubset s;
    s.name = field<std::string>(subsets[i], "name", where);
    const auto covers = field<json>(subsets[i], "covers", where);
    if (!covers.is_array()) throw input_error(where + ": covers must be an array");
    for (const auto& c : covers) {
      const std::string id = element_id(c, where);
      auto it = position.find(id);
      if (it == position.end()) throw input_error(where + ": unknown element " + id);
      s.covers.push_back(it->second);
    }
    std::sort(s.covers.begin(), s.covers.end());
    s.covers.erase(std::unique(s.covers.begin(), s.covers.end()), s.covers.end());
    if (subsets[i].contains("literals")) s.literals = field<std::size_t>(subsets[i], "literals", where);
    instance.subsets.push_back(std::move(s));
  }
  return instance;
}

ordered_json cover_instance_to_json(const CoverInstance& instance) {
  ordered_json j;
  j["universe"] = instance.universe;
  j["subsets"] = ordered_json::array();
  for (const auto& s : instance.subsets) {
    ordered_json sj;
    sj["name"] = s.name;
    sj["covers"] = ordered_json::array();
    for (std::size_t e : s.covers) sj["covers"].push_back(instance.universe[e]);
    sj["literals"] = s.literals;
    j["subsets"].push_back(sj);
  }
  return j;
}

ordered_json solution_to_json(const CoverInstance& instance, const CoverSolution& solution) {
  ordered_json j;
  j["selected"] = ordered_json::array();
  for (std::size_t s : solution.selected) j["selected"].push_back(instance.subsets[s].name);
  j["indices"] = solution.selected;
  j["subsets_used"] = solution.subsets_used;
  j["total_literals"] = solution.total_literals;
  return j;
}

}  // namespace qcsg::io
