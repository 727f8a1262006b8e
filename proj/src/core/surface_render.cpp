#include <sstream>

#include "carve/error.hpp"
#include "carve/surface.hpp"

namespace carve::surface {

namespace {

constexpr int kUnaryPrec = 7;
constexpr int kPostfixPrec = 8;
constexpr int kPrimaryPrec = 9;

int binary_prec(const std::string& op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  return 6;
}

int prec_of(const AstNode& n) {
  switch (n.kind) {
    case NodeKind::BinaryExpr: return binary_prec(n.attr_string("op"));
    case NodeKind::UnaryExpr: return kUnaryPrec;
    case NodeKind::Literal: {
      // Substituted negative numbers carry their sign in the text.
      std::string text = n.attr_string("text");
      return !text.empty() && text[0] == '-' ? kUnaryPrec : kPrimaryPrec;
    }
    case NodeKind::CallExpr:
    case NodeKind::AttributeExpr:
    case NodeKind::SubscriptExpr:
      return kPostfixPrec;
    default:
      return kPrimaryPrec;
  }
}

std::string wrap(const AstNode& n, bool parens) {
  std::string s = render_expression(n);
  return parens ? "(" + s + ")" : s;
}

std::string render_args(const AstNode& n, std::size_t first) {
  std::string out = "(";
  for (std::size_t i = first; i < n.children.size(); ++i) {
    if (i > first) out += ", ";
    out += render_expression(n.children[i]);
  }
  return out + ")";
}

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 2, ' '); }

std::string render_simple(const AstNode& n) {
  if (n.kind == NodeKind::AssignStmt) {
    std::string decl = n.attr_string("decl");
    std::string out = decl.empty() ? "" : decl + " ";
    return out + render_expression(n.children.at(0)) + " " + n.attr_string("op") + " " +
           render_expression(n.children.at(1));
  }
  if (n.kind == NodeKind::ExprStmt) return render_expression(n.children.at(0));
  throw Error(ErrorKind::Usage, "not a simple statement: " + std::string(to_string(n.kind)));
}

void render_block_body(std::ostringstream& out, const AstNode& block, int indent) {
  for (const auto& s : block.children) out << render_statement(s, indent);
}

}  // namespace

std::string render_expression(const AstNode& n) {
  switch (n.kind) {
    case NodeKind::Literal:
      return n.attr_string("text");
    case NodeKind::NameExpr:
      return n.attr_string("name");
    case NodeKind::SelfExpr:
      return "this";
    case NodeKind::AttributeExpr: {
      const AstNode& base = n.children.at(0);
      return wrap(base, prec_of(base) < kPostfixPrec) + "." + n.attr_string("name");
    }
    case NodeKind::SubscriptExpr: {
      const AstNode& base = n.children.at(0);
      return wrap(base, prec_of(base) < kPostfixPrec) + "[" +
             render_expression(n.children.at(1)) + "]";
    }
    case NodeKind::CallExpr: {
      const AstNode& callee = n.children.at(0);
      return wrap(callee, prec_of(callee) < kPostfixPrec) + render_args(n, 1);
    }
    case NodeKind::NewExpr:
      return "new " + n.attr_string("class") + render_args(n, 1);
    case NodeKind::BinaryExpr: {
      int p = prec_of(n);
      const AstNode& lhs = n.children.at(0);
      const AstNode& rhs = n.children.at(1);
      return wrap(lhs, prec_of(lhs) < p) + " " + n.attr_string("op") + " " +
             wrap(rhs, prec_of(rhs) <= p);
    }
    case NodeKind::UnaryExpr: {
      const AstNode& operand = n.children.at(0);
      // "- -x" must not collapse into a different token sequence.
      std::string inner = wrap(operand, prec_of(operand) < kUnaryPrec);
      std::string op = n.attr_string("op");
      if (!inner.empty() && inner[0] == op[0]) inner = "(" + inner + ")";
      return op + inner;
    }
    case NodeKind::ListExpr: {
      std::string out = "[";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        out += render_expression(n.children[i]);
      }
      return out + "]";
    }
    case NodeKind::MapExpr: {
      const Json& keys = n.attrs.at("keys");
      std::string out = "{";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        std::string key = keys.at(i).get<std::string>();
        out += (is_identifier(key) ? key : quote_string(key)) + ": " +
               render_expression(n.children[i]);
      }
      return out + "}";
    }
    default:
      throw Error(ErrorKind::Usage, "not an expression: " + std::string(to_string(n.kind)));
  }
}

std::string render_statement(const AstNode& n, int indent) {
  std::ostringstream out;
  switch (n.kind) {
    case NodeKind::ExprStmt:
      if (n.attr_flag("isImport")) {
        out << pad(indent) << "import " << quote_string(n.attr_string("module")) << ";\n";
      } else {
        out << pad(indent) << render_simple(n) << ";\n";
      }
      break;
    case NodeKind::AssignStmt:
      out << pad(indent) << render_simple(n) << ";\n";
      break;
    case NodeKind::ReturnStmt:
      out << pad(indent) << "return";
      if (!n.children.empty()) out << " " << render_expression(n.children[0]);
      out << ";\n";
      break;
    case NodeKind::IfStmt:
      out << pad(indent) << "if (" << render_expression(n.children.at(0)) << ") {\n";
      render_block_body(out, n.children.at(1), indent + 1);
      out << pad(indent) << "}";
      if (n.children.size() > 2) {
        out << " else {\n";
        render_block_body(out, n.children[2], indent + 1);
        out << pad(indent) << "}";
      }
      out << "\n";
      break;
    case NodeKind::WhileStmt:
      out << pad(indent) << "while (" << render_expression(n.children.at(0)) << ") {\n";
      render_block_body(out, n.children.at(1), indent + 1);
      out << pad(indent) << "}\n";
      break;
    case NodeKind::ForStmt:
      out << pad(indent) << "for (" << render_simple(n.children.at(0)) << "; "
          << render_expression(n.children.at(1)) << "; " << render_simple(n.children.at(2))
          << ") {\n";
      render_block_body(out, n.children.at(3), indent + 1);
      out << pad(indent) << "}\n";
      break;
    case NodeKind::FunctionDecl: {
      const AstNode& body = n.children.back();
      if (n.attr_flag("isTest")) {
        out << pad(indent) << "test " << quote_string(n.attr_string("name")) << " {\n";
      } else {
        out << pad(indent) << (n.attr_flag("static") ? "static " : "") << "function "
            << n.attr_string("name") << "(";
        bool first = true;
        for (const auto& c : n.children) {
          if (c.kind != NodeKind::Param) continue;
          if (!first) out << ", ";
          out << c.attr_string("name");
          first = false;
        }
        out << ") {\n";
      }
      render_block_body(out, body, indent + 1);
      out << pad(indent) << "}\n";
      break;
    }
    case NodeKind::Block:
      out << pad(indent) << "{\n";
      render_block_body(out, n, indent + 1);
      out << pad(indent) << "}\n";
      break;
    default:
      throw Error(ErrorKind::Usage, "not a statement: " + std::string(to_string(n.kind)));
  }
  return out.str();
}

std::string render_module(const AstNode& n) {
  std::ostringstream out;
  bool prev_import = false;
  bool first = true;
  for (const auto& item : n.children) {
    bool import = item.attr_flag("isImport");
    if (!first && !(import && prev_import)) out << "\n";
    out << render_statement(item, 0);
    prev_import = import;
    first = false;
  }
  return out.str();
}

}  // namespace carve::surface
