#pragma once

// caGrid CQL query AST and grammar validation.
//
//   CQLQuery    -> Target | Target QueryModifier
//   Target      -> Name Attribute | Name Association | Name Group
//   Attribute   -> Name Predicate Value
//   Association -> RoleName | RoleName Association | RoleName Attribute | RoleName Group
//   Group       -> LogicalOp Attribute Group1 | LogicalOp Association Group1
//   Group1      -> Attribute Group1 | Association Group1 | Group | ε
//   QueryModifier -> DistinctAttribute | DistinctAttribute AttributeNames
//
// A Target without a child is accepted as well: it selects every object of
// the target type. Groups are kept with at least two items; a one-item group
// is written as the item itself.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "onco/box.hpp"

namespace onco::cql {

enum class Predicate {
  EqualTo,
  NotEqualTo,
  Like,
  IsNull,
  IsNotNull,
  LessThan,
  LessThanEqualTo,
  GreaterThan,
  GreaterThanEqualTo,
};

inline constexpr Predicate kAllPredicates[] = {
    Predicate::EqualTo,     Predicate::NotEqualTo,      Predicate::Like,
    Predicate::IsNull,      Predicate::IsNotNull,       Predicate::LessThan,
    Predicate::LessThanEqualTo, Predicate::GreaterThan, Predicate::GreaterThanEqualTo,
};

inline std::string_view to_string(Predicate p) {
  switch (p) {
    case Predicate::EqualTo: return "EQUAL_TO";
    case Predicate::NotEqualTo: return "NOT_EQUAL_TO";
    case Predicate::Like: return "LIKE";
    case Predicate::IsNull: return "IS_NULL";
    case Predicate::IsNotNull: return "IS_NOT_NULL";
    case Predicate::LessThan: return "LESS_THAN";
    case Predicate::LessThanEqualTo: return "LESS_THAN_EQUAL_TO";
    case Predicate::GreaterThan: return "GREATER_THAN";
    case Predicate::GreaterThanEqualTo: return "GREATER_THAN_EQUAL_TO";
  }
  return "EQUAL_TO";
}

inline std::optional<Predicate> parse_predicate(std::string_view s) {
  for (auto p : kAllPredicates)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

inline bool takes_value(Predicate p) { return p != Predicate::IsNull && p != Predicate::IsNotNull; }

enum class LogicalOp { And, Or };

inline std::string_view to_string(LogicalOp op) { return op == LogicalOp::And ? "AND" : "OR"; }

struct Attribute {
  std::string name;
  Predicate predicate = Predicate::EqualTo;
  std::optional<std::string> value;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Association;
struct Group;
using Constraint = std::variant<Attribute, Association, Group>;

struct Association {
  std::string name;  // fully-qualified class name
  std::string roleName;
  std::optional<Box<Constraint>> child;
};

struct Group {
  LogicalOp op = LogicalOp::And;
  std::vector<Constraint> items;
};

inline bool operator==(const Association& a, const Association& b) {
  return a.name == b.name && a.roleName == b.roleName && a.child == b.child;
}

inline bool operator==(const Group& a, const Group& b) { return a.op == b.op && a.items == b.items; }

struct Target {
  std::string name;
  std::optional<Box<Constraint>> child;

  friend bool operator==(const Target&, const Target&) = default;
};

struct QueryModifier {
  std::optional<std::string> distinctAttribute;
  std::vector<std::string> attributeNames;

  friend bool operator==(const QueryModifier&, const QueryModifier&) = default;
};

struct CqlQuery {
  Target target;
  std::optional<QueryModifier> modifier;

  friend bool operator==(const CqlQuery&, const CqlQuery&) = default;
};

namespace detail {

inline void check_constraint(const Constraint& c, const std::string& where, std::vector<std::string>& out);

inline void check_child(const std::optional<Box<Constraint>>& child, const std::string& where,
                        std::vector<std::string>& out) {
  if (child) check_constraint(**child, where, out);
}

inline void check_constraint(const Constraint& c, const std::string& where, std::vector<std::string>& out) {
  if (const auto* a = std::get_if<Attribute>(&c)) {
    std::string here = where + "/Attribute[" + a->name + "]";
    if (a->name.empty()) out.push_back(here + ": empty attribute name");
    if (takes_value(a->predicate) && !a->value)
      out.push_back(here + ": predicate " + std::string(to_string(a->predicate)) + " requires a value");
    if (!takes_value(a->predicate) && a->value)
      out.push_back(here + ": predicate " + std::string(to_string(a->predicate)) + " takes no value");
  } else if (const auto* as = std::get_if<Association>(&c)) {
    std::string here = where + "/Association[" + as->name + "]";
    if (as->name.empty()) out.push_back(here + ": empty class name");
    if (as->roleName.empty()) out.push_back(here + ": empty role name");
    check_child(as->child, here, out);
  } else {
    const auto& g = std::get<Group>(c);
    std::string here = where + "/Group";
    if (g.items.size() < 2) out.push_back(here + ": a group needs at least two items");
    for (std::size_t i = 0; i < g.items.size(); ++i) {
      bool is_group = std::holds_alternative<Group>(g.items[i]);
      if (is_group && i == 0) out.push_back(here + ": a group cannot start with a nested group");
      else if (is_group && i + 1 != g.items.size())
        out.push_back(here + ": a nested group must be the last item");
      check_constraint(g.items[i], here + "[" + std::to_string(i) + "]", out);
    }
  }
}

}  // namespace detail

// Violations of the grammar above; empty when `q` is derivable.
inline std::vector<std::string> validate_grammar(const CqlQuery& q) {
  std::vector<std::string> out;
  if (q.target.name.empty()) out.push_back("Target: empty class name");
  detail::check_child(q.target.child, "Target", out);
  if (q.modifier) {
    if (!q.modifier->distinctAttribute)
      out.push_back("QueryModifier: DistinctAttribute is required");
    else if (q.modifier->distinctAttribute->empty())
      out.push_back("QueryModifier: empty DistinctAttribute");
    for (const auto& n : q.modifier->attributeNames)
      if (n.empty()) out.push_back("QueryModifier: empty attribute name");
  }
  return out;
}

// Wraps two or more constraints in a group, or returns the single one.
inline std::optional<Box<Constraint>> combine(std::vector<Constraint> items, LogicalOp op = LogicalOp::And) {
  if (items.empty()) return std::nullopt;
  if (items.size() == 1) return Box<Constraint>(std::move(items.front()));
  return Box<Constraint>(Constraint(Group{op, std::move(items)}));
}

}  // namespace onco::cql
