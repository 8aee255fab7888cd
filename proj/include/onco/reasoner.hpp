#pragma once

// EL classification and association-path search over generated ontologies.
//
// classify() normalizes SubClassOf axioms into the four EL normal forms
//
//   A ⊑ B      A1 ⊓ A2 ⊑ B      A ⊑ ∃r.B      ∃r.A ⊑ B
//
// (introducing internal names for complex sub-expressions) and saturates
// with the completion rules, using one worklist for subsumers and one for
// role edges. Role inclusions and transitive roles are honoured, so
// X ⊑ ∃u:hasAssociation.Y is entailed whenever Y is reachable through
// association sub-properties.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include "onco/axioms.hpp"
#include "onco/error.hpp"
#include "onco/ontogen.hpp"

namespace onco::reasoner {

// One association hop: the concrete property and the class it leads to.
struct Edge {
  std::string property;
  std::string range;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct AssociationPath {
  std::string source;
  std::vector<Edge> steps;

  std::size_t node_count() const { return steps.size() + 1; }
  const std::string& target() const { return steps.empty() ? source : steps.back().range; }
  friend bool operator==(const AssociationPath&, const AssociationPath&) = default;
};

class SubsumptionIndex {
 public:
  bool declared(std::string_view name) const { return subsumers_.find(name) != subsumers_.end(); }

  // Reflexive-transitive named subsumers.
  const std::set<std::string>& subsumers(std::string_view name) const { return lookup(subsumers_, name); }

  // Attribute classes of `name`, inherited ones included.
  const std::set<std::string>& attributes_of(std::string_view name) const { return lookup(attributes_, name); }

  // Outgoing association edges with their declared ranges, inherited ones included.
  const std::set<Edge>& edges_of(std::string_view name) const { return lookup(edges_, name); }

  // Classes reachable from `name` by one or more association edges.
  const std::set<std::string>& reachable_from(std::string_view name) const { return lookup(reach_, name); }

  // Every entailed X ⊑ ∃p.Z with Z a named class, as (p, Z).
  const std::set<std::pair<std::string, std::string>>& existentials(std::string_view name) const {
    return lookup(existentials_, name);
  }

  bool entails(std::string_view sub, std::string_view sup) const { return subsumers(sub).count(std::string(sup)) > 0; }

  bool is_uml_class(std::string_view name) const {
    return name != ontogen::kUmlClass && declared(name) && entails(name, ontogen::kUmlClass);
  }
  bool is_attribute_class(std::string_view name) const {
    return name != ontogen::kUmlAttribute && declared(name) && entails(name, ontogen::kUmlAttribute);
  }

  const std::vector<std::string>& uml_classes() const { return uml_classes_; }
  const std::vector<std::string>& attribute_classes() const { return attribute_classes_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : subsumers_) out.push_back(name);
    return out;
  }

 private:
  friend SubsumptionIndex classify(const AxiomSet&);

  template <typename V>
  const V& lookup(const std::map<std::string, V, std::less<>>& m, std::string_view name) const {
    auto it = m.find(name);
    if (it != m.end()) return it->second;
    if (!declared(name)) throw ReasonerError("unknown name '" + std::string(name) + "'");
    static const V empty{};
    return empty;
  }

  std::map<std::string, std::set<std::string>, std::less<>> subsumers_;
  std::map<std::string, std::set<std::string>, std::less<>> attributes_;
  std::map<std::string, std::set<Edge>, std::less<>> edges_;
  std::map<std::string, std::set<std::string>, std::less<>> reach_;
  std::map<std::string, std::set<std::pair<std::string, std::string>>, std::less<>> existentials_;
  std::vector<std::string> uml_classes_, attribute_classes_;
};

namespace detail {

// Completion-rule saturation over normalized axioms. Node ids index both
// named classes and internal names introduced by normalization.
class Saturation {
 public:
  explicit Saturation(const AxiomSet& set) {
    if (auto report = el_conformance_report(set); !report.empty())
      throw ReasonerError("non-EL axiom: " + report.front());
    for (const auto& ax : set.axioms) {
      if (const auto* d = std::get_if<Declaration>(&ax)) {
        if (d->entity == Declaration::Entity::Class) node(d->name);
        else role(d->name);
      } else if (const auto* s = std::get_if<SubPropertyOf>(&ax)) {
        role_parents_.resize(roles_.size() + 2);
        int sub = role(s->sub), sup = role(s->sup);
        role_parents_[sub].push_back(sup);
      } else if (const auto* t = std::get_if<TransitiveProperty>(&ax)) {
        transitive_.insert(role(t->property));
      }
    }
    for (const auto& ax : set.axioms)
      if (const auto* s = std::get_if<SubClassOf>(&ax)) rhs(lhs_atom(s->sub), s->sup);
    close_roles();
    saturate();
  }

  std::size_t size() const { return names_.size(); }
  bool internal(int x) const { return internal_[x]; }
  const std::string& name(int x) const { return names_[x]; }
  const std::string& role_name(int r) const { return role_names_[r]; }
  std::size_t role_count() const { return role_names_.size(); }
  const std::unordered_set<int>& subsumers(int x) const { return subs_[x]; }
  const std::unordered_set<int>& successors(int r, int x) const { return succ_[r][x]; }
  const std::vector<std::pair<int, int>>& told_existentials(int a) const { return rhs_exist_[a]; }
  const std::vector<int>& super_roles(int r) const { return super_roles_[r]; }
  int find_role(std::string_view name) const {
    auto it = roles_.find(std::string(name));
    return it == roles_.end() ? -1 : it->second;
  }

 private:
  int node(const std::string& name) {
    auto [it, fresh] = nodes_.emplace(name, static_cast<int>(names_.size()));
    if (fresh) add_node(name, false);
    return it->second;
  }

  int fresh_node() {
    add_node("_:x" + std::to_string(names_.size()), true);
    return static_cast<int>(names_.size()) - 1;
  }

  void add_node(std::string name, bool internal) {
    names_.push_back(std::move(name));
    internal_.push_back(internal);
    told_.emplace_back();
    conj_by_.emplace_back();
    rhs_exist_.emplace_back();
    lhs_by_filler_.emplace_back();
  }

  int role(const std::string& name) {
    auto [it, fresh] = roles_.emplace(name, static_cast<int>(role_names_.size()));
    if (fresh) role_names_.push_back(name);
    return it->second;
  }

  // Name standing for a left-hand-side expression: every instance of the
  // expression is an instance of the returned node.
  int lhs_atom(const ClassExpr& e) {
    switch (e.kind) {
      case ClassExpr::Kind::Named:
        return node(e.name);
      case ClassExpr::Kind::Conjunction: {
        int acc = lhs_atom(e.operands[0]);
        for (std::size_t i = 1; i < e.operands.size(); ++i) {
          int next = lhs_atom(e.operands[i]);
          int joined = fresh_node();
          add_conjunction(acc, next, joined);
          acc = joined;
        }
        return acc;
      }
      case ClassExpr::Kind::Existential:
      case ClassExpr::Kind::DataExistential: {
        int r = role(e.kind == ClassExpr::Kind::Existential ? e.name : std::string(kHasValue));
        int filler = e.kind == ClassExpr::Kind::Existential ? lhs_atom(e.filler()) : node(e.name);
        int out = fresh_node();
        lhs_by_filler_[filler].emplace_back(r, out);
        return out;
      }
      case ClassExpr::Kind::Universal:
        break;
    }
    throw ReasonerError("non-EL class expression " + render(e));
  }

  // Records `a ⊑ e`.
  void rhs(int a, const ClassExpr& e) {
    switch (e.kind) {
      case ClassExpr::Kind::Named: {
        int b = node(e.name);
        told_[a].push_back(b);
        return;
      }
      case ClassExpr::Kind::Conjunction:
        for (const auto& op : e.operands) rhs(a, op);
        return;
      case ClassExpr::Kind::Existential: {
        int r = role(e.name);
        int filler;
        if (e.filler().is_named()) {
          filler = node(e.filler().name);
        } else {
          filler = fresh_node();
          rhs(filler, e.filler());
        }
        rhs_exist_[a].emplace_back(r, filler);
        return;
      }
      case ClassExpr::Kind::DataExistential: {
        int r = role(std::string(kHasValue));
        int filler = node(e.name);
        rhs_exist_[a].emplace_back(r, filler);
        return;
      }
      case ClassExpr::Kind::Universal:
        break;
    }
    throw ReasonerError("non-EL class expression " + render(e));
  }

  void add_conjunction(int a, int b, int result) {
    if (a == b) {
      told_[a].push_back(result);
      return;
    }
    conj_by_[a].emplace_back(b, result);
    conj_by_[b].emplace_back(a, result);
  }

  void close_roles() {
    std::size_t n = role_names_.size();
    role_parents_.resize(n);
    super_roles_.assign(n, {});
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<bool> seen(n, false);
      std::vector<int> stack{static_cast<int>(r)};
      seen[r] = true;
      while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        super_roles_[r].push_back(cur);
        for (int p : role_parents_[cur])
          if (!seen[p]) {
            seen[p] = true;
            stack.push_back(p);
          }
      }
      std::sort(super_roles_[r].begin(), super_roles_[r].end());
    }
  }

  void saturate() {
    std::size_t n = names_.size();
    subs_.assign(n, {});
    succ_.assign(role_names_.size(), std::vector<std::unordered_set<int>>(n));
    pred_.assign(role_names_.size(), std::vector<std::unordered_set<int>>(n));

    for (std::size_t x = 0; x < n; ++x) concepts_.emplace_back(static_cast<int>(x), static_cast<int>(x));
    while (!concepts_.empty() || !edges_.empty()) {
      while (!concepts_.empty()) {
        auto [x, a] = concepts_.front();
        concepts_.pop_front();
        add_subsumer(x, a);
      }
      if (!edges_.empty()) {
        auto [r, x, y] = edges_.front();
        edges_.pop_front();
        add_edge(r, x, y);
      }
    }
  }

  void add_subsumer(int x, int a) {
    if (!subs_[x].insert(a).second) return;
    for (int b : told_[a]) concepts_.emplace_back(x, b);
    for (auto [other, result] : conj_by_[a])
      if (subs_[x].count(other)) concepts_.emplace_back(x, result);
    for (auto [r, y] : rhs_exist_[a]) edges_.emplace_back(r, x, y);
    for (auto [r, result] : lhs_by_filler_[a])
      for (int w : pred_[r][x]) concepts_.emplace_back(w, result);
  }

  void add_edge(int r, int x, int y) {
    if (!succ_[r][x].insert(y).second) return;
    pred_[r][y].insert(x);
    for (int s : super_roles_[r])
      if (s != r) edges_.emplace_back(s, x, y);
    for (int a : subs_[y])
      for (auto [rr, result] : lhs_by_filler_[a])
        if (rr == r) concepts_.emplace_back(x, result);
    if (transitive_.count(r)) {
      for (int z : succ_[r][y]) edges_.emplace_back(r, x, z);
      for (int w : pred_[r][x]) edges_.emplace_back(r, w, y);
    }
  }

  std::map<std::string, int> nodes_;
  std::vector<std::string> names_;
  std::vector<bool> internal_;
  std::map<std::string, int> roles_;
  std::vector<std::string> role_names_;
  std::vector<std::vector<int>> role_parents_;
  std::vector<std::vector<int>> super_roles_;  // reflexive
  std::set<int> transitive_;

  std::vector<std::vector<int>> told_;
  std::vector<std::vector<std::pair<int, int>>> conj_by_;        // other operand, result
  std::vector<std::vector<std::pair<int, int>>> rhs_exist_;      // role, filler
  std::vector<std::vector<std::pair<int, int>>> lhs_by_filler_;  // role, result

  std::vector<std::unordered_set<int>> subs_;
  std::vector<std::vector<std::unordered_set<int>>> succ_;
  std::vector<std::vector<std::unordered_set<int>>> pred_;
  std::deque<std::pair<int, int>> concepts_;
  std::deque<std::tuple<int, int, int>> edges_;
};

}  // namespace detail

// Builds the subsumption index. Throws ReasonerError on non-EL input.
inline SubsumptionIndex classify(const AxiomSet& axioms) {
  detail::Saturation sat(axioms);
  SubsumptionIndex index;

  const int has_association = sat.find_role(ontogen::kHasAssociation);
  const int has_attribute = sat.find_role(ontogen::kHasAttribute);
  auto is_association = [&](int r) {
    if (has_association < 0 || r == has_association) return false;
    const auto& supers = sat.super_roles(r);
    return std::binary_search(supers.begin(), supers.end(), has_association);
  };

  for (std::size_t xi = 0; xi < sat.size(); ++xi) {
    int x = static_cast<int>(xi);
    if (sat.internal(x)) continue;
    const auto& name = sat.name(x);
    auto& subs = index.subsumers_[name];
    auto& attrs = index.attributes_[name];
    auto& edges = index.edges_[name];
    auto& exists = index.existentials_[name];
    for (int a : sat.subsumers(x)) {
      if (sat.internal(a)) continue;
      subs.insert(sat.name(a));
      for (auto [r, y] : sat.told_existentials(a)) {
        if (sat.internal(y)) continue;
        if (r == has_attribute) attrs.insert(sat.name(y));
        else if (is_association(r)) edges.insert(Edge{sat.role_name(r), sat.name(y)});
      }
    }
    for (std::size_t r = 0; r < sat.role_count(); ++r)
      for (int y : sat.successors(static_cast<int>(r), x))
        for (int z : sat.subsumers(y))
          if (!sat.internal(z)) exists.emplace(sat.role_name(static_cast<int>(r)), sat.name(z));
  }

  for (const auto& [name, _] : index.subsumers_) {
    std::set<std::string> seen;
    std::vector<std::string> frontier;
    for (const auto& e : index.edges_[name])
      if (seen.insert(e.range).second) frontier.push_back(e.range);
    while (!frontier.empty()) {
      std::string cur = std::move(frontier.back());
      frontier.pop_back();
      for (const auto& e : index.edges_[cur])
        if (seen.insert(e.range).second) frontier.push_back(e.range);
    }
    index.reach_[name] = std::move(seen);
    if (index.is_uml_class(name)) index.uml_classes_.push_back(name);
    if (index.is_attribute_class(name)) index.attribute_classes_.push_back(name);
  }
  return index;
}

inline bool entails_subclass(const SubsumptionIndex& index, std::string_view sub, std::string_view sup) {
  if (!index.declared(sup)) throw ReasonerError("unknown name '" + std::string(sup) + "'");
  return index.entails(sub, sup);
}

// A hop landing on `range` ends a journey towards `target` when either is a
// subclass of the other.
inline bool terminal_match(const SubsumptionIndex& index, std::string_view range, std::string_view target) {
  return range == target || index.entails(range, target) || index.entails(target, range);
}

inline bool association_reachable(const SubsumptionIndex& index, std::string_view from, std::string_view to) {
  if (!index.declared(to)) throw ReasonerError("unknown name '" + std::string(to) + "'");
  for (const auto& r : index.reachable_from(from))
    if (r != from && terminal_match(index, r, to)) return true;
  return false;
}

// All simple association paths from `from` ending on a class matching `to`
// with at most `max_nodes` classes (endpoints included). Ordered by length,
// then lexicographically by (property, range) steps.
inline std::vector<AssociationPath> find_paths(const SubsumptionIndex& index, std::string_view from,
                                               std::string_view to, std::size_t max_nodes) {
  if (!index.declared(from)) throw ReasonerError("unknown name '" + std::string(from) + "'");
  if (!index.declared(to)) throw ReasonerError("unknown name '" + std::string(to) + "'");
  if (max_nodes < 2) throw ReasonerError("max_nodes must be at least 2");

  // Whether some matching class is still reachable from a class; memoized
  // over the classes the search actually visits.
  std::map<std::string, bool, std::less<>> useful_memo;
  auto useful = [&](const std::string& name) {
    auto [it, fresh] = useful_memo.emplace(name, false);
    if (fresh)
      for (const auto& r : index.reachable_from(name))
        if (terminal_match(index, r, to)) {
          it->second = true;
          break;
        }
    return it->second;
  };

  std::vector<AssociationPath> out;
  AssociationPath current{std::string(from), {}};
  std::set<std::string> on_path{std::string(from)};
  auto dfs = [&](auto&& self, const std::string& at) -> void {
    if (current.node_count() >= max_nodes) return;
    for (const auto& e : index.edges_of(at)) {
      if (on_path.count(e.range)) continue;
      bool match = terminal_match(index, e.range, to);
      if (!match && !useful(e.range)) continue;
      current.steps.push_back(e);
      on_path.insert(e.range);
      if (match) out.push_back(current);
      self(self, e.range);
      on_path.erase(e.range);
      current.steps.pop_back();
    }
  };
  dfs(dfs, std::string(from));

  std::stable_sort(out.begin(), out.end(), [](const AssociationPath& a, const AssociationPath& b) {
    if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
    return a.steps < b.steps;
  });
  return out;
}

}  // namespace onco::reasoner
