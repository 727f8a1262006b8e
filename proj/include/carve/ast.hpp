#pragma once

// Normalized AST interchange format shared by the core and the tracing
// harness. Every node carries an iid; iids are unique across a snapshot.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace carve {

using Iid = std::int64_t;
using Json = nlohmann::json;

enum class NodeKind {
  Module,
  FunctionDecl,
  Param,
  ExprStmt,
  AssignStmt,
  ReturnStmt,
  IfStmt,
  ForStmt,
  WhileStmt,
  Block,
  CallExpr,
  NewExpr,
  NameExpr,
  SelfExpr,
  AttributeExpr,
  SubscriptExpr,
  Literal,
  BinaryExpr,
  UnaryExpr,
  ListExpr,
  MapExpr,
};

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view text);

bool is_statement_kind(NodeKind kind);

struct Position {
  int line = 0;
  int col = 0;

  friend auto operator<=>(const Position&, const Position&) = default;
};

struct Span {
  Position start;
  Position end;

  bool well_formed() const { return start <= end; }
  bool contains(const Span& other) const { return start <= other.start && other.end <= end; }

  friend bool operator==(const Span&, const Span&) = default;
};

struct AstLocation {
  std::string file;
  Span span;

  friend bool operator==(const AstLocation&, const AstLocation&) = default;
};

struct AstNode {
  Iid iid = 0;
  NodeKind kind = NodeKind::Module;
  Span span;
  // Kind-specific scalars: identifier text, operator symbol, literal
  // {type, text, value}, declaration flags.
  Json attrs = Json::object();
  std::vector<AstNode> children;

  std::string attr_string(std::string_view key) const;
  bool attr_flag(std::string_view key) const;
  bool has_attr(std::string_view key) const;
};

struct SourceFile {
  std::string path;
  AstNode root;
};

// Immutable after construction. Move-only: the iid index points into the
// owned node storage.
class AstForest {
 public:
  AstForest() = default;
  // Validates iid uniqueness, span well-formedness and containment.
  explicit AstForest(std::vector<SourceFile> files);

  AstForest(const AstForest&) = delete;
  AstForest& operator=(const AstForest&) = delete;
  AstForest(AstForest&&) noexcept = default;
  AstForest& operator=(AstForest&&) noexcept = default;

  const std::vector<SourceFile>& files() const { return files_; }

  bool contains(Iid iid) const { return index_.contains(iid); }
  const AstNode& node(Iid iid) const;
  const std::string& file_of(Iid iid) const;
  // Parent iid, or nullopt for file roots.
  std::optional<Iid> parent_of(Iid iid) const;
  Iid max_iid() const { return max_iid_; }

  // Nearest enclosing node (inclusive) of the given kind.
  const AstNode* enclosing(Iid iid, NodeKind kind) const;

  // All FunctionDecl nodes in pre-order.
  std::vector<const AstNode*> function_decls() const;

 private:
  struct Entry {
    const AstNode* node = nullptr;
    std::size_t file = 0;
    std::optional<Iid> parent;
  };

  void index_node(const AstNode& node, std::size_t file, std::optional<Iid> parent);

  std::vector<SourceFile> files_;
  std::unordered_map<Iid, Entry> index_;
  Iid max_iid_ = 0;
};

// Assigns iids by pre-order traversal, files in lexicographic path order,
// starting at `first`. Returns the next unused iid.
Iid assign_iids(std::vector<SourceFile>& files, Iid first = 1);

AstForest load_ast(const std::filesystem::path& path);
AstForest forest_from_json(const Json& document);
Json forest_to_json(const AstForest& forest);
Json node_to_json(const AstNode& node);
AstNode node_from_json(const Json& value);
void save_ast(const AstForest& forest, const std::filesystem::path& path);

AstLocation iid_to_location(const AstForest& forest, Iid iid);
bool belongs_to_ast(const AstLocation& loc, const AstForest& forest, Iid iid);

Json location_to_json(const AstLocation& loc);
AstLocation location_from_json(const Json& value);

}  // namespace carve
