#pragma once

// EL-profile class expressions, axioms and the line-oriented ontology file
// format:
//
//   # onco-rewriter ontology
//   Prefix(c:=<urn:onco:model:caBIO:4.2#>)
//   ...
//
//   SubClassOf(c:CytogeneticLocation ObjectSomeValuesFrom(c:Location_chromosome_Chromosome c:Chromosome))
//
// One axiom per line; a blank line separates the prefix header from the body.

#include <cctype>
#include <cstddef>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "onco/error.hpp"

namespace onco {

struct ClassExpr {
  enum class Kind {
    Named,
    Conjunction,
    Existential,
    DataExistential,
    // Not EL. Never produced by generation; only reachable by parsing a
    // foreign ontology file, so the conformance report has something to flag.
    Universal,
  };

  Kind kind = Kind::Named;
  // Named: class name. Existential/Universal: property. DataExistential: datatype.
  std::string name;
  std::vector<ClassExpr> operands;

  static ClassExpr named(std::string n) { return {Kind::Named, std::move(n), {}}; }
  static ClassExpr conjunction(std::vector<ClassExpr> ops) { return {Kind::Conjunction, {}, std::move(ops)}; }
  static ClassExpr some(std::string property, ClassExpr filler) {
    return {Kind::Existential, std::move(property), {std::move(filler)}};
  }
  static ClassExpr some_value(std::string datatype) { return {Kind::DataExistential, std::move(datatype), {}}; }

  bool is_named() const { return kind == Kind::Named; }
  const ClassExpr& filler() const { return operands.at(0); }

  friend bool operator==(const ClassExpr&, const ClassExpr&) = default;
};

// The single data property used for attribute value restrictions.
inline constexpr std::string_view kHasValue = "u:hasValue";

struct Declaration {
  enum class Entity { Class, ObjectProperty, DataProperty };
  Entity entity = Entity::Class;
  std::string name;
  friend bool operator==(const Declaration&, const Declaration&) = default;
};

struct SubClassOf {
  ClassExpr sub;
  ClassExpr sup;
  friend bool operator==(const SubClassOf&, const SubClassOf&) = default;
};

struct SubPropertyOf {
  std::string sub;
  std::string sup;
  friend bool operator==(const SubPropertyOf&, const SubPropertyOf&) = default;
};

struct TransitiveProperty {
  std::string property;
  friend bool operator==(const TransitiveProperty&, const TransitiveProperty&) = default;
};

using Axiom = std::variant<Declaration, SubClassOf, SubPropertyOf, TransitiveProperty>;

struct AxiomSet {
  std::vector<Axiom> axioms;
  std::map<std::string, std::string> prefixes;  // prefix (without ':') -> IRI

  friend bool operator==(const AxiomSet&, const AxiomSet&) = default;
};

// ---------------------------------------------------------------------------
// Rendering

inline std::string render(const ClassExpr& e) {
  switch (e.kind) {
    case ClassExpr::Kind::Named:
      return e.name;
    case ClassExpr::Kind::Conjunction: {
      std::string out = "ObjectIntersectionOf(";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ' ';
        out += render(e.operands[i]);
      }
      return out + ")";
    }
    case ClassExpr::Kind::Existential:
      return "ObjectSomeValuesFrom(" + e.name + " " + render(e.filler()) + ")";
    case ClassExpr::Kind::DataExistential:
      return "DataSomeValuesFrom(" + std::string(kHasValue) + " " + e.name + ")";
    case ClassExpr::Kind::Universal:
      return "ObjectAllValuesFrom(" + e.name + " " + render(e.filler()) + ")";
  }
  return {};
}

inline std::string render(const Axiom& ax) {
  struct Visitor {
    std::string operator()(const Declaration& d) const {
      const char* kind = d.entity == Declaration::Entity::Class            ? "Class"
                         : d.entity == Declaration::Entity::ObjectProperty ? "ObjectProperty"
                                                                            : "DataProperty";
      return std::string("Declaration(") + kind + "(" + d.name + "))";
    }
    std::string operator()(const SubClassOf& s) const {
      return "SubClassOf(" + render(s.sub) + " " + render(s.sup) + ")";
    }
    std::string operator()(const SubPropertyOf& s) const {
      return "SubObjectPropertyOf(" + s.sub + " " + s.sup + ")";
    }
    std::string operator()(const TransitiveProperty& t) const {
      return "TransitiveObjectProperty(" + t.property + ")";
    }
  };
  return std::visit(Visitor{}, ax);
}

inline std::string serialize_axioms(const AxiomSet& set) {
  std::string out = "# onco-rewriter ontology\n";
  for (const auto& [prefix, iri] : set.prefixes) out += "Prefix(" + prefix + ":=<" + iri + ">)\n";
  out += "\n";
  for (const auto& ax : set.axioms) out += render(ax) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class AxiomLexer {
 public:
  AxiomLexer(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  // Name tokens: prefixed names and keywords (no whitespace or parentheses).
  std::string word() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw LoadError("line " + std::to_string(line_), message + " at column " + std::to_string(pos_ + 1));
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline ClassExpr parse_class_expr(AxiomLexer& lex) {
  std::string head = lex.word();
  if (!lex.peek('(')) return ClassExpr::named(head);
  lex.expect('(');
  ClassExpr out;
  if (head == "ObjectIntersectionOf") {
    std::vector<ClassExpr> ops;
    while (!lex.peek(')')) ops.push_back(parse_class_expr(lex));
    if (ops.empty()) lex.fail("empty ObjectIntersectionOf");
    out = ClassExpr::conjunction(std::move(ops));
  } else if (head == "ObjectSomeValuesFrom" || head == "ObjectAllValuesFrom") {
    std::string property = lex.word();
    ClassExpr filler = parse_class_expr(lex);
    out = ClassExpr::some(std::move(property), std::move(filler));
    if (head == "ObjectAllValuesFrom") out.kind = ClassExpr::Kind::Universal;
  } else if (head == "DataSomeValuesFrom") {
    std::string property = lex.word();
    if (property != kHasValue) lex.fail("unsupported data property '" + property + "'");
    out = ClassExpr::some_value(lex.word());
  } else {
    lex.fail("unknown class constructor '" + head + "'");
  }
  lex.expect(')');
  return out;
}

inline Axiom parse_axiom_line(std::string_view line, std::size_t lineno) {
  AxiomLexer lex(line, lineno);
  std::string head = lex.word();
  lex.expect('(');
  Axiom ax;
  if (head == "Declaration") {
    std::string kind = lex.word();
    Declaration d;
    if (kind == "Class") d.entity = Declaration::Entity::Class;
    else if (kind == "ObjectProperty") d.entity = Declaration::Entity::ObjectProperty;
    else if (kind == "DataProperty") d.entity = Declaration::Entity::DataProperty;
    else lex.fail("unknown entity kind '" + kind + "'");
    lex.expect('(');
    d.name = lex.word();
    lex.expect(')');
    ax = std::move(d);
  } else if (head == "SubClassOf") {
    ClassExpr sub = parse_class_expr(lex);
    ClassExpr sup = parse_class_expr(lex);
    ax = SubClassOf{std::move(sub), std::move(sup)};
  } else if (head == "SubObjectPropertyOf") {
    std::string sub = lex.word();
    std::string sup = lex.word();
    ax = SubPropertyOf{std::move(sub), std::move(sup)};
  } else if (head == "TransitiveObjectProperty") {
    ax = TransitiveProperty{lex.word()};
  } else {
    lex.fail("unknown axiom '" + head + "'");
  }
  lex.expect(')');
  if (!lex.at_end()) lex.fail("trailing characters");
  return ax;
}

}  // namespace detail

inline AxiomSet parse_axioms(std::string_view document) {
  AxiomSet set;
  std::istringstream in{std::string(document)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string_view body = std::string_view(line).substr(first);
    if (body.rfind("Prefix(", 0) == 0) {
      auto colon = body.find(":=<");
      auto close = body.rfind(">)");
      if (colon == std::string_view::npos || close == std::string_view::npos || close < colon)
        throw LoadError("line " + std::to_string(lineno), "malformed prefix declaration");
      set.prefixes[std::string(body.substr(7, colon - 7))] = std::string(body.substr(colon + 3, close - colon - 3));
      continue;
    }
    set.axioms.push_back(detail::parse_axiom_line(body, lineno));
  }
  return set;
}

// ---------------------------------------------------------------------------
// EL conformance

namespace detail {

inline void collect_el_violations(const ClassExpr& e, const std::string& where,
                                  std::vector<std::string>& out) {
  switch (e.kind) {
    case ClassExpr::Kind::Named:
      if (e.name.empty()) out.push_back(where + ": empty class name");
      break;
    case ClassExpr::Kind::Conjunction:
      if (e.operands.size() < 2) out.push_back(where + ": conjunction with fewer than two operands");
      break;
    case ClassExpr::Kind::Existential:
      if (e.operands.size() != 1) out.push_back(where + ": existential without a single filler");
      break;
    case ClassExpr::Kind::DataExistential:
      if (e.name.rfind("xsd:", 0) != 0) out.push_back(where + ": data restriction over non-XSD type " + e.name);
      break;
    case ClassExpr::Kind::Universal:
      out.push_back(where + ": universal restriction on " + e.name + " is outside the EL profile");
      break;
  }
  for (const auto& op : e.operands) collect_el_violations(op, where, out);
}

}  // namespace detail

// Empty when every axiom lies in the EL profile.
inline std::vector<std::string> el_conformance_report(const AxiomSet& set) {
  std::vector<std::string> violations;
  for (std::size_t i = 0; i < set.axioms.size(); ++i) {
    if (const auto* s = std::get_if<SubClassOf>(&set.axioms[i])) {
      std::string where = "axiom " + std::to_string(i + 1);
      detail::collect_el_violations(s->sub, where, violations);
      detail::collect_el_violations(s->sup, where, violations);
    }
  }
  return violations;
}

}  // namespace onco
