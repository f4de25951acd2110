#include <algorithm>
#include <array>

#include "xanim/oal/token.hpp"

namespace xanim::oal {

namespace {

constexpr std::array<std::string_view, 39> kKeywords = {
    "create", "object",   "instance", "of",      "delete",      "assign",    "select", "any",
    "many",   "one",      "from",     "instances", "where",     "related",   "by",     "relate",
    "unrelate", "to",     "across",   "if",      "elif",        "else",      "end",    "while",
    "for",    "each",     "in",       "return",  "self",        "selected",  "true",   "false",
    "none",   "and",      "or",       "not",     "cardinality", "empty",     "not_empty"};

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }
bool ident_char(char c) { return ident_start(c) || digit(c); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  TokenizeResult run() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        line_start_ = ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        ++pos_;
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (ident_start(c)) {
        word();
      } else if (digit(c)) {
        number();
      } else if (c == '"') {
        string();
      } else {
        punct();
      }
    }
    return std::move(out_);
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  int col(std::size_t at) const { return static_cast<int>(at - line_start_); }

  void emit(TokenKind kind, std::size_t start, std::string value = {}) {
    Token t;
    t.kind = kind;
    t.text = std::string(src_.substr(start, pos_ - start));
    t.value = std::move(value);
    t.span = {line_, col(start), col(pos_)};
    out_.tokens.push_back(std::move(t));
  }

  void error(std::string msg, std::size_t start, std::size_t end) {
    out_.diagnostics.push_back(error_at(std::move(msg), {line_, col(start), col(end)}));
  }

  void word() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    std::string_view w = src_.substr(start, pos_ - start);
    if (is_keyword(w))
      emit(TokenKind::Keyword, start);
    else if (w.size() >= 2 && w[0] == 'R' && std::all_of(w.begin() + 1, w.end(), digit))
      emit(TokenKind::RelationId, start);
    else
      emit(TokenKind::Identifier, start);
  }

  void number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
    if (peek(0) == '.' && digit(peek(1))) {
      ++pos_;
      while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
      emit(TokenKind::Real, start);
    } else {
      emit(TokenKind::Integer, start);
    }
  }

  void string() {
    std::size_t start = pos_++;
    std::string value;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        error("unterminated string literal", start, pos_);
        return;
      }
      char c = src_[pos_];
      if (c == '"') {
        ++pos_;
        emit(TokenKind::String, start, std::move(value));
        return;
      }
      if (c == '\\') {
        char next = peek(1);
        if (next == '"' || next == '\\') {
          value += next;
          pos_ += 2;
          continue;
        }
        error("unknown escape sequence in string literal", pos_, pos_ + (next && next != '\n' ? 2 : 1));
        ++pos_;
        continue;
      }
      value += c;
      ++pos_;
    }
  }

  void punct() {
    std::size_t start = pos_;
    char c = src_[pos_];
    char n = peek(1);
    auto two = [&](TokenKind k) {
      pos_ += 2;
      emit(k, start);
    };
    auto one = [&](TokenKind k) {
      pos_ += 1;
      emit(k, start);
    };
    switch (c) {
      case ';': return one(TokenKind::Semicolon);
      case ',': return one(TokenKind::Comma);
      case '.': return one(TokenKind::Dot);
      case '(': return one(TokenKind::LParen);
      case ')': return one(TokenKind::RParen);
      case '[': return one(TokenKind::LBracket);
      case ']': return one(TokenKind::RBracket);
      case '+': return one(TokenKind::Plus);
      case '*': return one(TokenKind::Star);
      case '/': return one(TokenKind::Slash);
      case '-': return n == '>' ? two(TokenKind::Arrow) : one(TokenKind::Minus);
      case '=': return n == '=' ? two(TokenKind::Equal) : one(TokenKind::Assign);
      case '<': return n == '=' ? two(TokenKind::LessEqual) : one(TokenKind::Less);
      case '>': return n == '=' ? two(TokenKind::GreaterEqual) : one(TokenKind::Greater);
      case '!':
        if (n == '=') return two(TokenKind::NotEqual);
        break;
      default: break;
    }
    ++pos_;
    std::string shown = static_cast<unsigned char>(c) >= 0x20 && static_cast<unsigned char>(c) < 0x7f
                            ? std::string(1, c)
                            : "byte 0x" + to_hex(static_cast<unsigned char>(c));
    error("illegal character '" + shown + "'", start, pos_);
  }

  static std::string to_hex(unsigned char c) {
    static constexpr char kHex[] = "0123456789abcdef";
    return {kHex[c >> 4], kHex[c & 0xF]};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  int line_ = 1;
  TokenizeResult out_;
};

}  // namespace

bool is_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::string_view token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Integer: return "integer literal";
    case TokenKind::Real: return "real literal";
    case TokenKind::String: return "string literal";
    case TokenKind::RelationId: return "relation id";
    case TokenKind::Semicolon: return "';'";
    case TokenKind::Comma: return "','";
    case TokenKind::Dot: return "'.'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::Assign: return "'='";
    case TokenKind::Equal: return "'=='";
    case TokenKind::NotEqual: return "'!='";
    case TokenKind::Less: return "'<'";
    case TokenKind::LessEqual: return "'<='";
    case TokenKind::Greater: return "'>'";
    case TokenKind::GreaterEqual: return "'>='";
    case TokenKind::Plus: return "'+'";
    case TokenKind::Minus: return "'-'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::Arrow: return "'->'";
    case TokenKind::End: return "end of input";
  }
  return "?";
}

TokenizeResult tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace xanim::oal
