#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcsg/cover.hpp"
#include "qcsg/geometry.hpp"
#include "qcsg/graph.hpp"
#include "qcsg/products.hpp"

namespace qcsg::io {

using nlohmann::json;
using nlohmann::ordered_json;

/// Reads and parses a JSON document. Throws Error(Input).
json load_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// Array of {"id", "kind", "translation", "rotation" (w,x,y,z), "params"}.
PrimitiveSet primitives_from_json(const json& doc);
ordered_json primitives_to_json(const PrimitiveSet& primitives);

// {"op": "union"|"inter"|"comp"|"prim", "children": [...], "prim": id}
CsgTree tree_from_json(const json& doc);
ordered_json tree_to_json(const CsgTree& tree);

/// One point per line: "x y z [nx ny nz]"; '#' starts a comment line.
PointCloud read_cloud(std::istream& in);
void write_cloud(const PointCloud& cloud, std::ostream& out);
PointCloud load_cloud(const std::filesystem::path& path);

// {"vertices": [...], "edges": [["A","B"], ...]}; "primitives" is accepted for "vertices".
IntersectionGraph graph_from_json(const json& doc);
ordered_json graph_to_json(const IntersectionGraph& graph);
ordered_json cliques_to_json(const std::vector<Clique>& cliques);

struct AbstractInstance {
  IntersectionGraph graph;
  ProductTable table;
};

// {"primitives": [...], "edges": [...], "products": [{"positives": [...], "inside": bool}]}
AbstractInstance abstract_from_json(const json& doc);
/// Abstract-instance layout plus labels, inside fractions and witness counts.
ordered_json table_to_json(const ProductTable& table, const IntersectionGraph& graph);

// {"universe": [...], "subsets": [{"name", "covers": [...], "literals"?}]}
// Element ids may be strings or integers.
CoverInstance cover_instance_from_json(const json& doc);
ordered_json cover_instance_to_json(const CoverInstance& instance);
ordered_json solution_to_json(const CoverInstance& instance, const CoverSolution& solution);

}  // namespace qcsg::io
