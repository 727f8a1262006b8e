#pragma once

// Canonical subject-neutral surface syntax ("tiny JS", *.tj files).
//
// The same syntax is used for the bundled corpus sources, for the canonical
// rendering of generated test plans, and for the round-trip checks on the
// interchange format. Grammar, informally:
//
//   file      := (import | function | test)*
//   import    := 'import' STRING ';'
//   function  := ['static'] 'function' NAME ['.' NAME] '(' params ')' block
//   test      := 'test' STRING block
//   statement := ('let'|'const') NAME '=' expr ';'
//              | target ('='|'+='|'-='|'*='|'/=') expr ';'
//              | expr ';' | 'return' [expr] ';'
//              | 'if' '(' expr ')' block ['else' (block | if)]
//              | 'for' '(' simple ';' expr ';' simple ')' block
//              | 'while' '(' expr ')' block

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "carve/ast.hpp"

namespace carve::surface {

enum class TokenKind { Ident, Keyword, Int, Float, String, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // source text; for strings the decoded value
  Position start;
  Position end;
};

std::vector<Token> tokenize(std::string_view source, std::string_view file);

// Parsed nodes carry iid 0; number them with assign_iids.
AstNode parse_module(std::string_view source, std::string_view file);
AstNode parse_statement(std::string_view source);
AstNode parse_expression(std::string_view source);

struct SourceText {
  std::string path;
  std::string text;
};

// Parses and numbers a whole snapshot.
AstForest parse_project(std::vector<SourceText> sources);

// Collects *.tj files under each directory, recursively. Paths in the
// snapshot are relative to `base`, with forward slashes.
std::vector<SourceText> collect_sources(const std::vector<std::filesystem::path>& dirs,
                                        const std::filesystem::path& base);

std::string render_expression(const AstNode& node);
std::string render_statement(const AstNode& node, int indent = 0);
std::string render_module(const AstNode& node);

std::string quote_string(std::string_view value);
bool is_identifier(std::string_view text);

}  // namespace carve::surface
