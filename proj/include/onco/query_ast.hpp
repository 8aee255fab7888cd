#pragma once

// Concept-level user queries.
//
//   expr := term ('and' term)*
//   term := Name
//         | 'hasAssociation' 'some' primary
//         | 'hasAttribute' 'some' primary
//         | 'hasValue' 'value' STRING
//         | '(' expr ')'
//   primary := Name | '(' expr ')'
//
// Names are thesaurus concepts (an optional `n:` prefix is dropped). Names
// with the `c:` prefix denote generated UML classes or attribute classes,
// depending on where they occur, so every intermediate rewriting stage can
// be printed and read back.

#include <array>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "onco/error.hpp"

namespace onco::query {

enum class Stage { Parse, UmlExtract, ValueExtract, Validate, PathFind, ValueReinsert, Mcc, Cql };

inline constexpr std::array<Stage, 8> kStages{Stage::Parse,    Stage::UmlExtract,    Stage::ValueExtract,
                                              Stage::Validate, Stage::PathFind,      Stage::ValueReinsert,
                                              Stage::Mcc,      Stage::Cql};

inline std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Parse: return "parse";
    case Stage::UmlExtract: return "umlExtract";
    case Stage::ValueExtract: return "valueExtract";
    case Stage::Validate: return "validate";
    case Stage::PathFind: return "pathFind";
    case Stage::ValueReinsert: return "valueReinsert";
    case Stage::Mcc: return "mcc";
    case Stage::Cql: return "cql";
  }
  return "?";
}

// A pipeline failure, labelled with the stage that raised it.
class QueryError : public Error {
 public:
  enum class Code {
    Syntax,
    UnknownKeyword,
    Structure,
    NoUmlCandidate,
    Rejected,
    NoPath,
    Unresolvable,
    CandidateLimit,
    Translation,
  };

  QueryError(Stage stage, Code code, const std::string& message)
      : Error("[" + std::string(stage_name(stage)) + "] " + message), stage_(stage), code_(code) {}

  Stage stage() const noexcept { return stage_; }
  Code code() const noexcept { return code_; }

 private:
  Stage stage_;
  Code code_;
};

// One concrete association hop introduced by path finding.
struct Hop {
  std::string property;  // c:Source_role_Target
  std::string role;
  std::string range;  // c:Target
  friend bool operator==(const Hop&, const Hop&) = default;
};

struct QueryNode {
  enum class Kind {
    ConceptRef,
    And,
    HasAssociationSome,
    HasAttributeSome,
    HasValueEquals,
    UmlClassRef,
    UmlAttributeRef,
    // Replaces a HasAssociationSome: a chain of hops followed by the
    // original filler as the only child.
    AssocStep,
  };

  Kind kind = Kind::ConceptRef;
  std::string name;  // concept / class / attribute-class name, or the literal
  std::vector<Hop> hops;
  std::vector<QueryNode> children;

  static QueryNode concept_ref(std::string n) { return {Kind::ConceptRef, std::move(n), {}, {}}; }
  static QueryNode uml_class(std::string n) { return {Kind::UmlClassRef, std::move(n), {}, {}}; }
  static QueryNode uml_attribute(std::string n) { return {Kind::UmlAttributeRef, std::move(n), {}, {}}; }
  static QueryNode value(std::string literal) { return {Kind::HasValueEquals, std::move(literal), {}, {}}; }
  static QueryNode has_association(QueryNode filler) { return {Kind::HasAssociationSome, {}, {}, {std::move(filler)}}; }
  static QueryNode has_attribute(QueryNode filler) { return {Kind::HasAttributeSome, {}, {}, {std::move(filler)}}; }
  static QueryNode assoc_step(std::vector<Hop> hops, QueryNode filler) {
    return {Kind::AssocStep, {}, std::move(hops), {std::move(filler)}};
  }
  // Nested conjunctions are flattened; a single item is returned as is.
  static QueryNode conj(std::vector<QueryNode> items) {
    std::vector<QueryNode> flat;
    for (auto& item : items) {
      if (item.kind == Kind::And) {
        for (auto& inner : item.children) flat.push_back(std::move(inner));
      } else {
        flat.push_back(std::move(item));
      }
    }
    if (flat.size() == 1) return std::move(flat.front());
    return {Kind::And, {}, {}, std::move(flat)};
  }

  bool is(Kind k) const { return kind == k; }
  const QueryNode& filler() const { return children.at(0); }

  friend bool operator==(const QueryNode&, const QueryNode&) = default;
};

using Address = std::vector<std::size_t>;

inline const QueryNode* node_at(const QueryNode& root, const Address& address) {
  const QueryNode* cur = &root;
  for (std::size_t i : address) {
    if (i >= cur->children.size()) return nullptr;
    cur = &cur->children[i];
  }
  return cur;
}

inline QueryNode* node_at(QueryNode& root, const Address& address) {
  return const_cast<QueryNode*>(node_at(static_cast<const QueryNode&>(root), address));
}

// The class reference heading a class-position expression, or nullptr.
inline const QueryNode* head_class(const QueryNode& n) {
  if (n.is(QueryNode::Kind::ConceptRef) || n.is(QueryNode::Kind::UmlClassRef)) return &n;
  if (n.is(QueryNode::Kind::And))
    for (const auto& c : n.children)
      if (c.is(QueryNode::Kind::ConceptRef) || c.is(QueryNode::Kind::UmlClassRef)) return &c;
  return nullptr;
}

// The attribute reference inside a hasAttribute filler, or nullptr.
inline const QueryNode* head_attribute(const QueryNode& n) {
  if (n.is(QueryNode::Kind::ConceptRef) || n.is(QueryNode::Kind::UmlAttributeRef)) return &n;
  if (n.is(QueryNode::Kind::And))
    for (const auto& c : n.children)
      if (c.is(QueryNode::Kind::ConceptRef) || c.is(QueryNode::Kind::UmlAttributeRef)) return &c;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Printing

struct PrintOptions {
  // Name the concrete association role in expanded steps:
  // `hasAssociation(gene) some …` instead of `hasAssociation some …`.
  bool concreteRoles = true;
};

namespace detail {

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string to_string(const QueryNode& n, const PrintOptions& opts = {});

namespace detail {

inline std::string primary(const QueryNode& n, const PrintOptions& opts) {
  auto s = to_string(n, opts);
  return n.is(QueryNode::Kind::And) ? "(" + s + ")" : s;
}

}  // namespace detail

inline std::string to_string(const QueryNode& n, const PrintOptions& opts) {
  using K = QueryNode::Kind;
  switch (n.kind) {
    case K::ConceptRef:
    case K::UmlClassRef:
    case K::UmlAttributeRef:
      return n.name;
    case K::HasValueEquals:
      return "hasValue value " + detail::quote(n.name);
    case K::And: {
      std::string out;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += " and ";
        out += detail::primary(n.children[i], opts);
      }
      return out;
    }
    case K::HasAssociationSome:
      return "hasAssociation some " + detail::primary(n.filler(), opts);
    case K::HasAttributeSome:
      return "hasAttribute some (" + to_string(n.filler(), opts) + ")";
    case K::AssocStep: {
      std::string out;
      for (std::size_t i = 0; i < n.hops.size(); ++i) {
        out += "hasAssociation";
        if (opts.concreteRoles) out += "(" + n.hops[i].role + ")";
        out += " some ";
        out += i + 1 < n.hops.size() ? n.hops[i].range + " and " : detail::primary(n.filler(), opts);
      }
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct Token {
  enum class Kind { Name, String, LParen, RParen, End };
  Kind kind;
  std::string text;
  std::size_t offset;
};

inline bool is_reserved(std::string_view w) {
  static constexpr std::string_view kReserved[] = {"or", "not", "only", "min", "max", "exactly",
                                                   "that", "inverse", "Self", "xor", "value", "some"};
  for (auto r : kReserved)
    if (w == r) return true;
  return false;
}

class QueryLexer {
 public:
  explicit QueryLexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ >= text_.size()) break;
      char c = text_[pos_];
      std::size_t start = pos_;
      if (c == '(') {
        out.push_back({Token::Kind::LParen, "(", pos_++});
      } else if (c == ')') {
        out.push_back({Token::Kind::RParen, ")", pos_++});
      } else if (c == '"') {
        ++pos_;
        std::string lit;
        for (;;) {
          if (pos_ >= text_.size()) fail(start, "unterminated string literal");
          char d = text_[pos_++];
          if (d == '"') break;
          if (d == '\\') {
            if (pos_ >= text_.size()) fail(start, "unterminated string literal");
            d = text_[pos_++];
          }
          lit += d;
        }
        out.push_back({Token::Kind::String, std::move(lit), start});
      } else if (name_char(c)) {
        while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
        out.push_back({Token::Kind::Name, std::string(text_.substr(start, pos_ - start)), start});
      } else {
        fail(pos_, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back({Token::Kind::End, "", text_.size()});
    return out;
  }

 private:
  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' || c == '-' || c == '.';
  }

  [[noreturn]] void fail(std::size_t at, const std::string& message) const {
    throw QueryError(Stage::Parse, QueryError::Code::Syntax, "syntax error at offset " + std::to_string(at) + ": " + message);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class QueryParser {
 public:
  explicit QueryParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  QueryNode parse() {
    QueryNode n = expr();
    if (peek().kind != Token::Kind::End) unexpected("end of query");
    return n;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool peek_word(std::string_view w) const { return peek().kind == Token::Kind::Name && peek().text == w; }
  const Token& advance() { return tokens_[pos_++]; }

  [[noreturn]] void unexpected(const std::string& wanted) const {
    const auto& t = peek();
    if (t.kind == Token::Kind::Name && is_reserved(t.text) && t.text != "some" && t.text != "value")
      throw QueryError(Stage::Parse, QueryError::Code::UnknownKeyword,
                       "unknown keyword '" + t.text + "' at offset " + std::to_string(t.offset));
    std::string found = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
    throw QueryError(Stage::Parse, QueryError::Code::Syntax,
                     "syntax error at offset " + std::to_string(t.offset) + ": expected " + wanted + ", found " + found);
  }

  void expect_word(std::string_view w) {
    if (!peek_word(w)) unexpected("'" + std::string(w) + "'");
    ++pos_;
  }

  QueryNode expr() {
    std::vector<QueryNode> terms{term()};
    while (peek_word("and")) {
      ++pos_;
      terms.push_back(term());
    }
    return QueryNode::conj(std::move(terms));
  }

  QueryNode term() {
    if (peek_word("hasAssociation")) {
      ++pos_;
      expect_word("some");
      return QueryNode::has_association(primary());
    }
    if (peek_word("hasAttribute")) {
      ++pos_;
      expect_word("some");
      return QueryNode::has_attribute(primary());
    }
    if (peek_word("hasValue")) {
      ++pos_;
      expect_word("value");
      if (peek().kind != Token::Kind::String) unexpected("a string literal");
      return QueryNode::value(advance().text);
    }
    return primary();
  }

  QueryNode primary() {
    if (peek().kind == Token::Kind::LParen) {
      ++pos_;
      QueryNode inner = expr();
      if (peek().kind != Token::Kind::RParen) unexpected("')'");
      ++pos_;
      return inner;
    }
    if (peek().kind == Token::Kind::Name && !is_reserved(peek().text) && peek().text != "and" &&
        peek().text != "hasAssociation" && peek().text != "hasAttribute" && peek().text != "hasValue") {
      std::string name = advance().text;
      if (name.rfind("n:", 0) == 0) name.erase(0, 2);
      return QueryNode::concept_ref(std::move(name));
    }
    unexpected("a concept name or '('");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

[[noreturn]] inline void structure_error(const std::string& message) {
  throw QueryError(Stage::Parse, QueryError::Code::Structure, message);
}

inline bool is_uml_name(const std::string& s) { return s.rfind("c:", 0) == 0; }

inline void resolve_attribute_context(QueryNode& n);

// Expression denoting objects of one class: a class reference alone, or a
// conjunction of exactly one class reference with association and
// attribute restrictions.
inline void resolve_class_context(QueryNode& n) {
  using K = QueryNode::Kind;
  auto resolve_ref = [](QueryNode& ref) {
    if (ref.is(K::ConceptRef) && is_uml_name(ref.name)) ref.kind = K::UmlClassRef;
  };
  if (n.is(K::ConceptRef) || n.is(K::UmlClassRef)) {
    resolve_ref(n);
    return;
  }
  if (!n.is(K::And)) structure_error("expected a class expression, found '" + to_string(n) + "'");
  std::size_t classes = 0;
  for (auto& item : n.children) {
    switch (item.kind) {
      case K::ConceptRef:
      case K::UmlClassRef:
        ++classes;
        resolve_ref(item);
        break;
      case K::HasAssociationSome:
      case K::AssocStep:
        resolve_class_context(item.children.at(0));
        break;
      case K::HasAttributeSome:
        resolve_attribute_context(item.children.at(0));
        break;
      case K::HasValueEquals:
        structure_error("hasValue may only restrict an attribute: '" + to_string(n) + "'");
      default:
        structure_error("unexpected '" + to_string(item) + "' in class expression");
    }
  }
  if (classes != 1)
    structure_error("a class expression needs exactly one class, found " + std::to_string(classes) + " in '" +
                    to_string(n) + "'");
}

inline void resolve_attribute_context(QueryNode& n) {
  using K = QueryNode::Kind;
  auto resolve_ref = [](QueryNode& ref) {
    if (ref.is(K::ConceptRef) && is_uml_name(ref.name)) ref.kind = K::UmlAttributeRef;
  };
  if (n.is(K::ConceptRef) || n.is(K::UmlAttributeRef)) {
    resolve_ref(n);
    return;
  }
  if (!n.is(K::And)) structure_error("expected an attribute expression, found '" + to_string(n) + "'");
  std::size_t attrs = 0;
  for (auto& item : n.children) {
    if (item.is(K::ConceptRef) || item.is(K::UmlAttributeRef)) {
      ++attrs;
      resolve_ref(item);
    } else if (!item.is(K::HasValueEquals)) {
      structure_error("unexpected '" + to_string(item) + "' in attribute expression");
    }
  }
  if (attrs != 1)
    structure_error("an attribute expression needs exactly one attribute, found " + std::to_string(attrs) + " in '" +
                    to_string(n) + "'");
}

}  // namespace detail

// Throws QueryError (stage parse) on syntax errors, unknown keywords, and
// expressions that do not denote a class (e.g. a value outside hasAttribute).
inline QueryNode parse_query(std::string_view text) {
  auto tokens = detail::QueryLexer(text).run();
  QueryNode root = detail::QueryParser(std::move(tokens)).parse();
  detail::resolve_class_context(root);
  return root;
}

}  // namespace onco::query
