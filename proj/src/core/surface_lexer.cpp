#include <array>
#include <cctype>

#include "carve/error.hpp"
#include "carve/surface.hpp"

namespace carve::surface {

namespace {

constexpr std::array<std::string_view, 19> kKeywords{
    "let",  "const", "function", "static", "test", "import", "return",
    "if",   "else",  "for",      "while",  "new",  "this",   "true",
    "false", "null", "undefined", "Infinity", "NaN"};

// Longest first so that "+=" wins over "+".
constexpr std::array<std::string_view, 28> kPuncts{
    "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "(", ")", "{", "}",
    "[",  "]",  ",",  ";",  ".",  ":",  "=",  "<",  ">",  "+",  "-",  "*", "/", "%"};

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

}  // namespace

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(text[0])) || text[0] == '_' || text[0] == '$'))
    return false;
  for (char c : text)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$')) return false;
  return !is_keyword(text);
}

std::vector<Token> tokenize(std::string_view src, std::string_view file) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::Parse, std::string(file) + ":" + std::to_string(line) + ":" +
                                      std::to_string(col) + ": " + msg);
  };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.start = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '$'))
        ++j;
      tok.text = std::string(src.substr(i, j - i));
      tok.kind = is_keyword(tok.text) ? TokenKind::Keyword : TokenKind::Ident;
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool is_float = false;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        is_float = true;
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          is_float = true;
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      tok.text = std::string(src.substr(i, j - i));
      tok.kind = is_float ? TokenKind::Float : TokenKind::Int;
      advance(j - i);
    } else if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      for (;;) {
        if (j >= src.size() || src[j] == '\n') fail("unterminated string");
        char d = src[j];
        if (d == '"') break;
        if (d == '\\') {
          if (j + 1 >= src.size()) fail("unterminated escape");
          char e = src[j + 1];
          switch (e) {
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case 'r': value += '\r'; break;
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            default: fail(std::string("unknown escape \\") + e);
          }
          j += 2;
          continue;
        }
        value += d;
        ++j;
      }
      tok.text = std::move(value);
      tok.kind = TokenKind::String;
      advance(j + 1 - i);
    } else {
      bool matched = false;
      for (auto p : kPuncts) {
        if (src.substr(i, p.size()) == p) {
          tok.text = std::string(p);
          tok.kind = TokenKind::Punct;
          advance(p.size());
          matched = true;
          break;
        }
      }
      if (!matched) fail(std::string("unexpected character '") + c + "'");
    }
    tok.end = {line, col};
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = TokenKind::End;
  end.start = end.end = {line, col};
  out.push_back(end);
  return out;
}

std::string quote_string(std::string_view value) {
  std::string out = "\"";
  for (char c : value) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace carve::surface
