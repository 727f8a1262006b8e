#include <algorithm>
#include <charconv>
#include <cmath>

#include "carve/error.hpp"
#include "carve/io.hpp"
#include "carve/surface.hpp"

namespace carve::surface {

namespace {

class Parser {
 public:
  Parser(std::string_view source, std::string_view file)
      : file_(file), toks_(tokenize(source, file)) {}

  AstNode module() {
    AstNode mod;
    mod.kind = NodeKind::Module;
    mod.span.start = {1, 1};
    while (!at_end()) mod.children.push_back(item());
    mod.span.end = peek().end;
    return mod;
  }

  AstNode single_statement() {
    AstNode s = statement();
    expect_end();
    return s;
  }

  AstNode single_expression() {
    AstNode e = expression();
    expect_end();
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at_end() const { return peek().kind == TokenKind::End; }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  Position last_end() const { return pos_ == 0 ? Position{1, 1} : toks_[pos_ - 1].end; }

  bool is(std::string_view text) const {
    const Token& t = peek();
    return (t.kind == TokenKind::Punct || t.kind == TokenKind::Keyword) && t.text == text;
  }
  bool accept(std::string_view text) {
    if (!is(text)) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw Error(ErrorKind::Parse, std::string(file_) + ":" + std::to_string(t.start.line) + ":" +
                                      std::to_string(t.start.col) + ": " + msg + " near '" +
                                      t.text + "'");
  }
  const Token& expect(std::string_view text) {
    if (!is(text)) fail("expected '" + std::string(text) + "'");
    return take();
  }
  std::string expect_ident() {
    if (peek().kind != TokenKind::Ident) fail("expected identifier");
    return take().text;
  }
  void expect_end() {
    if (!at_end()) fail("trailing input");
  }

  static AstNode make(NodeKind kind, Position start, Position end) {
    AstNode n;
    n.kind = kind;
    n.span = {start, end};
    return n;
  }

  AstNode item() {
    Position start = peek().start;
    if (accept("import")) {
      if (peek().kind != TokenKind::String) fail("expected module string");
      const Token& t = take();
      AstNode lit = string_literal(t);
      expect(";");
      AstNode stmt = make(NodeKind::ExprStmt, start, last_end());
      stmt.attrs = {{"isImport", true}, {"module", t.text}};
      stmt.children.push_back(std::move(lit));
      return stmt;
    }
    if (accept("test")) {
      if (peek().kind != TokenKind::String) fail("expected test name string");
      std::string name = take().text;
      AstNode body = block();
      AstNode decl = make(NodeKind::FunctionDecl, start, last_end());
      decl.attrs = {{"name", name}, {"isTest", true}};
      decl.children.push_back(std::move(body));
      return decl;
    }
    bool is_static = accept("static");
    expect("function");
    std::string first = expect_ident();
    std::string owner;
    std::string method = first;
    if (accept(".")) {
      owner = first;
      method = expect_ident();
    }
    AstNode decl = make(NodeKind::FunctionDecl, start, start);
    decl.attrs = {{"name", owner.empty() ? method : owner + "." + method}, {"method", method}};
    if (!owner.empty()) decl.attrs["owner"] = owner;
    if (is_static) decl.attrs["static"] = true;
    expect("(");
    if (!is(")")) {
      do {
        Position ps = peek().start;
        std::string pname = expect_ident();
        AstNode p = make(NodeKind::Param, ps, last_end());
        p.attrs = {{"name", pname}};
        decl.children.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    decl.children.push_back(block());
    decl.span.end = last_end();
    return decl;
  }

  AstNode block() {
    Position start = peek().start;
    expect("{");
    AstNode b = make(NodeKind::Block, start, start);
    while (!is("}")) {
      if (at_end()) fail("unterminated block");
      b.children.push_back(statement());
    }
    expect("}");
    b.span.end = last_end();
    return b;
  }

  // Assignment or expression statement without the trailing ';'.
  AstNode simple() {
    Position start = peek().start;
    if (is("let") || is("const")) {
      std::string decl = take().text;
      Position ns = peek().start;
      std::string name = expect_ident();
      AstNode target = make(NodeKind::NameExpr, ns, last_end());
      target.attrs = {{"name", name}};
      expect("=");
      AstNode value = expression();
      AstNode s = make(NodeKind::AssignStmt, start, last_end());
      s.attrs = {{"decl", decl}, {"op", "="}};
      s.children.push_back(std::move(target));
      s.children.push_back(std::move(value));
      return s;
    }
    AstNode lhs = expression();
    for (std::string_view op : {"=", "+=", "-=", "*=", "/="}) {
      if (is(op)) {
        if (lhs.kind != NodeKind::NameExpr && lhs.kind != NodeKind::AttributeExpr &&
            lhs.kind != NodeKind::SubscriptExpr)
          fail("invalid assignment target");
        take();
        AstNode value = expression();
        AstNode s = make(NodeKind::AssignStmt, start, last_end());
        s.attrs = {{"decl", ""}, {"op", std::string(op)}};
        s.children.push_back(std::move(lhs));
        s.children.push_back(std::move(value));
        return s;
      }
    }
    AstNode s = make(NodeKind::ExprStmt, start, last_end());
    s.children.push_back(std::move(lhs));
    return s;
  }

  AstNode statement() {
    Position start = peek().start;
    if (accept("return")) {
      AstNode s = make(NodeKind::ReturnStmt, start, start);
      if (!is(";")) s.children.push_back(expression());
      expect(";");
      s.span.end = last_end();
      return s;
    }
    if (accept("if")) {
      expect("(");
      AstNode cond = expression();
      expect(")");
      AstNode then_block = block();
      AstNode s = make(NodeKind::IfStmt, start, start);
      s.children.push_back(std::move(cond));
      s.children.push_back(std::move(then_block));
      if (accept("else")) {
        if (is("if")) {
          Position es = peek().start;
          AstNode nested = statement();
          AstNode wrap = make(NodeKind::Block, es, nested.span.end);
          wrap.children.push_back(std::move(nested));
          s.children.push_back(std::move(wrap));
        } else {
          s.children.push_back(block());
        }
      }
      s.span.end = last_end();
      return s;
    }
    if (accept("while")) {
      expect("(");
      AstNode cond = expression();
      expect(")");
      AstNode body = block();
      AstNode s = make(NodeKind::WhileStmt, start, last_end());
      s.children.push_back(std::move(cond));
      s.children.push_back(std::move(body));
      return s;
    }
    if (accept("for")) {
      expect("(");
      AstNode init = simple();
      if (init.kind != NodeKind::AssignStmt) fail("for-init must be an assignment");
      expect(";");
      AstNode cond = expression();
      expect(";");
      AstNode update = simple();
      if (update.kind != NodeKind::AssignStmt) fail("for-update must be an assignment");
      expect(")");
      AstNode body = block();
      AstNode s = make(NodeKind::ForStmt, start, last_end());
      s.children.push_back(std::move(init));
      s.children.push_back(std::move(cond));
      s.children.push_back(std::move(update));
      s.children.push_back(std::move(body));
      return s;
    }
    AstNode s = simple();
    expect(";");
    s.span.end = last_end();
    return s;
  }

  static int precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return 0;
  }

  AstNode expression(int min_prec = 1) {
    AstNode lhs = unary();
    for (;;) {
      const Token& t = peek();
      if (t.kind != TokenKind::Punct) break;
      int prec = precedence(t.text);
      if (prec == 0 || prec < min_prec) break;
      std::string op = take().text;
      AstNode rhs = expression(prec + 1);
      AstNode bin = make(NodeKind::BinaryExpr, lhs.span.start, rhs.span.end);
      bin.attrs = {{"op", op}};
      bin.children.push_back(std::move(lhs));
      bin.children.push_back(std::move(rhs));
      lhs = std::move(bin);
    }
    return lhs;
  }

  AstNode unary() {
    Position start = peek().start;
    if (is("-") || is("!")) {
      std::string op = take().text;
      AstNode operand = unary();
      AstNode u = make(NodeKind::UnaryExpr, start, operand.span.end);
      u.attrs = {{"op", op}};
      u.children.push_back(std::move(operand));
      return u;
    }
    return postfix(primary());
  }

  std::vector<AstNode> arguments() {
    std::vector<AstNode> args;
    expect("(");
    if (!is(")")) {
      do args.push_back(expression());
      while (accept(","));
    }
    expect(")");
    return args;
  }

  AstNode postfix(AstNode base) {
    for (;;) {
      if (accept(".")) {
        std::string name = expect_ident();
        AstNode a = make(NodeKind::AttributeExpr, base.span.start, last_end());
        a.attrs = {{"name", name}};
        a.children.push_back(std::move(base));
        base = std::move(a);
      } else if (accept("[")) {
        AstNode index = expression();
        expect("]");
        AstNode s = make(NodeKind::SubscriptExpr, base.span.start, last_end());
        s.children.push_back(std::move(base));
        s.children.push_back(std::move(index));
        base = std::move(s);
      } else if (is("(")) {
        if (base.kind != NodeKind::NameExpr && base.kind != NodeKind::AttributeExpr)
          fail("only names and attributes are callable");
        std::vector<AstNode> args = arguments();
        AstNode call = make(NodeKind::CallExpr, base.span.start, last_end());
        call.children.push_back(std::move(base));
        for (auto& a : args) call.children.push_back(std::move(a));
        base = std::move(call);
      } else {
        return base;
      }
    }
  }

  AstNode string_literal(const Token& t) {
    AstNode lit = make(NodeKind::Literal, t.start, t.end);
    lit.attrs = {{"type", "string"}, {"text", quote_string(t.text)}, {"value", t.text}};
    return lit;
  }

  AstNode primary() {
    const Token& t = peek();
    Position start = t.start;
    switch (t.kind) {
      case TokenKind::Int: {
        take();
        std::int64_t v = 0;
        auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (res.ec != std::errc()) fail("integer literal out of range");
        AstNode lit = make(NodeKind::Literal, start, t.end);
        lit.attrs = {{"type", "int"}, {"text", t.text}, {"value", v}};
        return lit;
      }
      case TokenKind::Float: {
        take();
        double v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        AstNode lit = make(NodeKind::Literal, start, t.end);
        lit.attrs = {{"type", "float"}, {"text", t.text}, {"value", v}};
        return lit;
      }
      case TokenKind::String:
        take();
        return string_literal(t);
      case TokenKind::Ident: {
        take();
        AstNode n = make(NodeKind::NameExpr, start, t.end);
        n.attrs = {{"name", t.text}};
        return n;
      }
      case TokenKind::Keyword: {
        if (t.text == "this") {
          take();
          return make(NodeKind::SelfExpr, start, t.end);
        }
        if (t.text == "true" || t.text == "false") {
          take();
          AstNode lit = make(NodeKind::Literal, start, t.end);
          lit.attrs = {{"type", "boolean"}, {"text", t.text}, {"value", t.text == "true"}};
          return lit;
        }
        if (t.text == "null" || t.text == "undefined") {
          take();
          AstNode lit = make(NodeKind::Literal, start, t.end);
          lit.attrs = {{"type", t.text}, {"text", t.text}, {"value", nullptr}};
          return lit;
        }
        if (t.text == "Infinity" || t.text == "NaN") {
          take();
          AstNode lit = make(NodeKind::Literal, start, t.end);
          lit.attrs = {{"type", "float"}, {"text", t.text}, {"value", t.text}};
          return lit;
        }
        if (t.text == "new") {
          take();
          Position ns = peek().start;
          std::string cls = expect_ident();
          AstNode callee = make(NodeKind::NameExpr, ns, last_end());
          callee.attrs = {{"name", cls}};
          std::vector<AstNode> args = arguments();
          AstNode n = make(NodeKind::NewExpr, start, last_end());
          n.attrs = {{"class", cls}};
          n.children.push_back(std::move(callee));
          for (auto& a : args) n.children.push_back(std::move(a));
          return n;
        }
        fail("unexpected keyword");
      }
      case TokenKind::Punct: {
        if (t.text == "(") {
          take();
          AstNode inner = expression();
          expect(")");
          return inner;
        }
        if (t.text == "[") {
          take();
          AstNode list = make(NodeKind::ListExpr, start, start);
          if (!is("]")) {
            do list.children.push_back(expression());
            while (accept(","));
          }
          expect("]");
          list.span.end = last_end();
          return list;
        }
        if (t.text == "{") {
          take();
          AstNode map = make(NodeKind::MapExpr, start, start);
          Json keys = Json::array();
          if (!is("}")) {
            do {
              const Token& k = peek();
              if (k.kind != TokenKind::Ident && k.kind != TokenKind::String)
                fail("expected map key");
              keys.push_back(take().text);
              expect(":");
              map.children.push_back(expression());
            } while (accept(","));
          }
          expect("}");
          map.attrs = {{"keys", std::move(keys)}};
          map.span.end = last_end();
          return map;
        }
        fail("unexpected token");
      }
      case TokenKind::End:
        fail("unexpected end of input");
    }
    fail("unexpected token");
  }

  std::string_view file_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

AstNode parse_module(std::string_view source, std::string_view file) {
  return Parser(source, file).module();
}

AstNode parse_statement(std::string_view source) {
  return Parser(source, "<statement>").single_statement();
}

AstNode parse_expression(std::string_view source) {
  return Parser(source, "<expression>").single_expression();
}

AstForest parse_project(std::vector<SourceText> sources) {
  std::vector<SourceFile> files;
  files.reserve(sources.size());
  for (auto& s : sources) files.push_back(SourceFile{s.path, parse_module(s.text, s.path)});
  assign_iids(files);
  return AstForest(std::move(files));
}

std::vector<SourceText> collect_sources(const std::vector<std::filesystem::path>& dirs,
                                        const std::filesystem::path& base) {
  std::vector<SourceText> out;
  for (const auto& dir : dirs) {
    if (!std::filesystem::is_directory(dir))
      throw Error(ErrorKind::Io, "not a directory: " + dir.string());
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".tj") continue;
      std::string rel = std::filesystem::relative(entry.path(), base).generic_string();
      out.push_back(SourceText{rel, read_text(entry.path())});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SourceText& a, const SourceText& b) { return a.path < b.path; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const SourceText& a, const SourceText& b) { return a.path == b.path; }),
            out.end());
  return out;
}

}  // namespace carve::surface
