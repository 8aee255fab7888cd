#pragma once

// Monoid comprehensions  ⊕{ e ‖ q̄ }  over bags.
//
// Qualifiers are generators over a class extent (v ← C), generators over an
// association role of an earlier variable (w ← v.role), type restrictions on
// an already bound variable (w ← C), and attribute filters.

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "onco/cql.hpp"

namespace onco::mcc {

// The bag monoid: merge ⊎, zero Z⊎ = {{}}, unit e(x) = {{x}}.
struct BagMonoid {
  static constexpr std::string_view symbol = "⊎";
  static constexpr std::string_view zero_symbol = "{{}}";

  template <class T>
  static std::vector<T> zero() {
    return {};
  }
  template <class T>
  static std::vector<T> unit(T x) {
    return {std::move(x)};
  }
  template <class T>
  static std::vector<T> merge(std::vector<T> a, const std::vector<T>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }
};

struct ExtentGenerator {
  std::string var;
  std::string className;
  friend bool operator==(const ExtentGenerator&, const ExtentGenerator&) = default;
};

struct PathGenerator {
  std::string var;
  std::string source;
  std::string role;
  friend bool operator==(const PathGenerator&, const PathGenerator&) = default;
};

struct TypeBind {
  std::string var;
  std::string className;
  friend bool operator==(const TypeBind&, const TypeBind&) = default;
};

struct Filter {
  std::string var;
  std::string attribute;
  cql::Predicate predicate = cql::Predicate::EqualTo;
  std::optional<std::string> literal;
  friend bool operator==(const Filter&, const Filter&) = default;
};

using Qualifier = std::variant<ExtentGenerator, PathGenerator, TypeBind, Filter>;

struct Comprehension {
  std::string head;
  std::vector<Qualifier> qualifiers;
  friend bool operator==(const Comprehension&, const Comprehension&) = default;
};

// `%` and `_` are wildcards, anything else is matched exactly.
inline cql::Predicate predicate_for(std::string_view literal) {
  return literal.find_first_of("%_") == std::string_view::npos ? cql::Predicate::EqualTo : cql::Predicate::Like;
}

inline std::string to_string(const Qualifier& q) {
  if (const auto* e = std::get_if<ExtentGenerator>(&q)) return e->var + " ← " + e->className;
  if (const auto* p = std::get_if<PathGenerator>(&q)) return p->var + " ← " + p->source + "." + p->role;
  if (const auto* t = std::get_if<TypeBind>(&q)) return t->var + " ← " + t->className;
  const auto& f = std::get<Filter>(q);
  std::string out = f.var + "." + f.attribute;
  if (f.predicate == cql::Predicate::EqualTo) out += " =";
  else out += " " + std::string(cql::to_string(f.predicate));
  if (f.literal) out += " " + *f.literal;
  return out;
}

inline std::string to_string(const Comprehension& m) {
  std::string out = std::string(BagMonoid::symbol) + "{ " + m.head + " ‖ ";
  for (std::size_t i = 0; i < m.qualifiers.size(); ++i) {
    if (i) out += ", ";
    out += to_string(m.qualifiers[i]);
  }
  return out + " }";
}

// Problems with variable scoping; empty when well formed.
inline std::vector<std::string> well_formedness(const Comprehension& m) {
  std::vector<std::string> out;
  if (m.qualifiers.empty() || !std::holds_alternative<ExtentGenerator>(m.qualifiers.front()) ||
      std::get<ExtentGenerator>(m.qualifiers.front()).var != m.head)
    out.push_back("head variable '" + m.head + "' is not introduced by the first qualifier");
  std::set<std::string> bound;
  for (std::size_t i = 0; i < m.qualifiers.size(); ++i) {
    const auto& q = m.qualifiers[i];
    auto need = [&](const std::string& v) {
      if (!bound.count(v)) out.push_back("qualifier " + std::to_string(i) + " uses unbound variable '" + v + "'");
    };
    auto bind = [&](const std::string& v) {
      if (!bound.insert(v).second) out.push_back("qualifier " + std::to_string(i) + " rebinds '" + v + "'");
    };
    if (const auto* e = std::get_if<ExtentGenerator>(&q)) {
      bind(e->var);
    } else if (const auto* p = std::get_if<PathGenerator>(&q)) {
      need(p->source);
      bind(p->var);
    } else if (const auto* t = std::get_if<TypeBind>(&q)) {
      need(t->var);
    } else {
      need(std::get<Filter>(q).var);
    }
  }
  return out;
}

}  // namespace onco::mcc
