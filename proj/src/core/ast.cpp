#include "carve/ast.hpp"

#include <algorithm>
#include <array>

#include "carve/error.hpp"
#include "carve/io.hpp"

namespace carve {

namespace {

constexpr std::array<std::pair<NodeKind, std::string_view>, 21> kKindNames{{
    {NodeKind::Module, "Module"},
    {NodeKind::FunctionDecl, "FunctionDecl"},
    {NodeKind::Param, "Param"},
    {NodeKind::ExprStmt, "ExprStmt"},
    {NodeKind::AssignStmt, "AssignStmt"},
    {NodeKind::ReturnStmt, "ReturnStmt"},
    {NodeKind::IfStmt, "IfStmt"},
    {NodeKind::ForStmt, "ForStmt"},
    {NodeKind::WhileStmt, "WhileStmt"},
    {NodeKind::Block, "Block"},
    {NodeKind::CallExpr, "CallExpr"},
    {NodeKind::NewExpr, "NewExpr"},
    {NodeKind::NameExpr, "NameExpr"},
    {NodeKind::SelfExpr, "SelfExpr"},
    {NodeKind::AttributeExpr, "AttributeExpr"},
    {NodeKind::SubscriptExpr, "SubscriptExpr"},
    {NodeKind::Literal, "Literal"},
    {NodeKind::BinaryExpr, "BinaryExpr"},
    {NodeKind::UnaryExpr, "UnaryExpr"},
    {NodeKind::ListExpr, "ListExpr"},
    {NodeKind::MapExpr, "MapExpr"},
}};

std::string describe(const AstNode& node) {
  return std::string(to_string(node.kind)) + " iid=" + std::to_string(node.iid);
}

Iid number_preorder(AstNode& node, Iid next) {
  node.iid = next++;
  for (auto& child : node.children) next = number_preorder(child, next);
  return next;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

std::optional<NodeKind> node_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kKindNames)
    if (name == text) return k;
  return std::nullopt;
}

bool is_statement_kind(NodeKind kind) {
  switch (kind) {
    case NodeKind::ExprStmt:
    case NodeKind::AssignStmt:
    case NodeKind::ReturnStmt:
    case NodeKind::IfStmt:
    case NodeKind::ForStmt:
    case NodeKind::WhileStmt:
      return true;
    default:
      return false;
  }
}

std::string AstNode::attr_string(std::string_view key) const {
  auto it = attrs.find(key);
  if (it == attrs.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

bool AstNode::attr_flag(std::string_view key) const {
  auto it = attrs.find(key);
  return it != attrs.end() && it->is_boolean() && it->get<bool>();
}

bool AstNode::has_attr(std::string_view key) const { return attrs.contains(key); }

AstForest::AstForest(std::vector<SourceFile> files) : files_(std::move(files)) {
  for (std::size_t i = 0; i < files_.size(); ++i) index_node(files_[i].root, i, std::nullopt);
}

void AstForest::index_node(const AstNode& node, std::size_t file, std::optional<Iid> parent) {
  if (node.iid <= 0)
    throw Error(ErrorKind::Schema, "non-positive iid on " + describe(node));
  if (!node.span.well_formed())
    throw Error(ErrorKind::Schema, "ill-formed span on " + describe(node));
  auto [it, inserted] = index_.emplace(node.iid, Entry{&node, file, parent});
  if (!inserted) throw Error(ErrorKind::Integrity, "duplicate iid " + std::to_string(node.iid));
  max_iid_ = std::max(max_iid_, node.iid);
  for (const auto& child : node.children) {
    if (!node.span.contains(child.span))
      throw Error(ErrorKind::Integrity,
                  describe(child) + " span escapes parent " + describe(node));
    index_node(child, file, node.iid);
  }
}

const AstNode& AstForest::node(Iid iid) const {
  auto it = index_.find(iid);
  if (it == index_.end()) throw Error(ErrorKind::Lookup, "unknown iid " + std::to_string(iid));
  return *it->second.node;
}

const std::string& AstForest::file_of(Iid iid) const {
  auto it = index_.find(iid);
  if (it == index_.end()) throw Error(ErrorKind::Lookup, "unknown iid " + std::to_string(iid));
  return files_[it->second.file].path;
}

std::optional<Iid> AstForest::parent_of(Iid iid) const {
  auto it = index_.find(iid);
  if (it == index_.end()) throw Error(ErrorKind::Lookup, "unknown iid " + std::to_string(iid));
  return it->second.parent;
}

const AstNode* AstForest::enclosing(Iid iid, NodeKind kind) const {
  std::optional<Iid> cur = iid;
  while (cur) {
    const AstNode& n = node(*cur);
    if (n.kind == kind) return &n;
    cur = parent_of(*cur);
  }
  return nullptr;
}

std::vector<const AstNode*> AstForest::function_decls() const {
  std::vector<const AstNode*> out;
  auto walk = [&](auto&& self, const AstNode& n) -> void {
    if (n.kind == NodeKind::FunctionDecl) out.push_back(&n);
    for (const auto& c : n.children) self(self, c);
  };
  for (const auto& f : files_) walk(walk, f.root);
  return out;
}

Iid assign_iids(std::vector<SourceFile>& files, Iid first) {
  std::sort(files.begin(), files.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
  Iid next = first;
  for (auto& f : files) next = number_preorder(f.root, next);
  return next;
}

Json node_to_json(const AstNode& node) {
  Json children = Json::array();
  for (const auto& c : node.children) children.push_back(node_to_json(c));
  return Json{
      {"iid", node.iid},
      {"kind", std::string(to_string(node.kind))},
      {"span", {node.span.start.line, node.span.start.col, node.span.end.line, node.span.end.col}},
      {"attrs", node.attrs},
      {"children", std::move(children)},
  };
}

AstNode node_from_json(const Json& value) {
  auto fail = [&](const std::string& what) -> AstNode {
    std::string where = value.is_object() && value.contains("iid") ? value["iid"].dump() : "?";
    throw Error(ErrorKind::Schema, "node iid=" + where + ": " + what);
  };
  if (!value.is_object()) return fail("node is not an object");
  for (const char* key : {"iid", "kind", "span", "attrs", "children"})
    if (!value.contains(key)) return fail(std::string("missing field '") + key + "'");
  if (!value["iid"].is_number_integer()) return fail("iid is not an integer");
  AstNode node;
  node.iid = value["iid"].get<Iid>();
  if (!value["kind"].is_string()) return fail("kind is not a string");
  auto kind = node_kind_from_string(value["kind"].get<std::string>());
  if (!kind) return fail("unknown kind " + value["kind"].get<std::string>());
  node.kind = *kind;
  const Json& span = value["span"];
  if (!span.is_array() || span.size() != 4) return fail("span must be [sl, sc, el, ec]");
  for (const auto& s : span)
    if (!s.is_number_integer()) return fail("span entries must be integers");
  node.span = Span{{span[0].get<int>(), span[1].get<int>()}, {span[2].get<int>(), span[3].get<int>()}};
  if (!value["attrs"].is_object()) return fail("attrs is not an object");
  node.attrs = value["attrs"];
  if (!value["children"].is_array()) return fail("children is not an array");
  node.children.reserve(value["children"].size());
  for (const auto& c : value["children"]) node.children.push_back(node_from_json(c));
  return node;
}

AstForest forest_from_json(const Json& document) {
  if (!document.is_object()) throw Error(ErrorKind::Schema, "document is not an object");
  if (!document.contains("version") || document["version"] != 1)
    throw Error(ErrorKind::Schema, "unsupported or missing version");
  if (!document.contains("files") || !document["files"].is_array())
    throw Error(ErrorKind::Schema, "missing files array");
  std::vector<SourceFile> files;
  for (const auto& f : document["files"]) {
    if (!f.is_object() || !f.contains("path") || !f["path"].is_string() || !f.contains("root"))
      throw Error(ErrorKind::Schema, "file entry needs path and root");
    SourceFile sf{f["path"].get<std::string>(), node_from_json(f["root"])};
    if (sf.root.kind != NodeKind::Module)
      throw Error(ErrorKind::Schema, "root of " + sf.path + " is not a Module");
    files.push_back(std::move(sf));
  }
  return AstForest(std::move(files));
}

Json forest_to_json(const AstForest& forest) {
  Json files = Json::array();
  for (const auto& f : forest.files())
    files.push_back(Json{{"path", f.path}, {"root", node_to_json(f.root)}});
  return Json{{"version", 1}, {"files", std::move(files)}};
}

AstForest load_ast(const std::filesystem::path& path) { return forest_from_json(read_json(path)); }

void save_ast(const AstForest& forest, const std::filesystem::path& path) {
  write_json(path, forest_to_json(forest));
}

AstLocation iid_to_location(const AstForest& forest, Iid iid) {
  return AstLocation{forest.file_of(iid), forest.node(iid).span};
}

bool belongs_to_ast(const AstLocation& loc, const AstForest& forest, Iid iid) {
  const AstNode& n = forest.node(iid);
  return forest.file_of(iid) == loc.file && loc.span.contains(n.span);
}

Json location_to_json(const AstLocation& loc) {
  return Json{{"file", loc.file},
              {"span", {loc.span.start.line, loc.span.start.col, loc.span.end.line, loc.span.end.col}}};
}

AstLocation location_from_json(const Json& value) {
  if (!value.is_object() || !value.contains("file") || !value.contains("span") ||
      !value["span"].is_array() || value["span"].size() != 4)
    throw Error(ErrorKind::Schema, "malformed location " + value.dump());
  const Json& s = value["span"];
  return AstLocation{value["file"].get<std::string>(),
                     Span{{s[0].get<int>(), s[1].get<int>()}, {s[2].get<int>(), s[3].get<int>()}}};
}

}  // namespace carve
