#pragma once

// Thesaurus modules for a model signature.
//
// The thesaurus is rendered as acyclic Named ⊑ Named subsumptions, where a
// ⊥-local module for Σ is exactly the upward closure of Σ: keep every axiom
// whose left-hand side is already in the signature, and add its right-hand
// side to the signature, until nothing changes.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "onco/axioms.hpp"
#include "onco/model.hpp"

namespace onco {

struct ThesaurusAxiomSet {
  // Concepts this set talks about: every concept of a stripped thesaurus, or
  // the (resolved) signature plus everything reached from it for a module.
  std::set<std::string> concepts;
  std::vector<std::pair<std::string, std::string>> subsumptions;  // (child, parent)
  bool disjointsRemoved = false;

  // Ontology-file rendering with the n: prefix.
  AxiomSet to_axiom_set() const {
    AxiomSet out;
    out.prefixes["n"] = "urn:onco:thesaurus#";
    for (const auto& c : concepts) out.axioms.push_back(Declaration{Declaration::Entity::Class, "n:" + c});
    for (const auto& [child, parent] : subsumptions)
      out.axioms.push_back(SubClassOf{ClassExpr::named("n:" + child), ClassExpr::named("n:" + parent)});
    return out;
  }

  friend bool operator==(const ThesaurusAxiomSet&, const ThesaurusAxiomSet&) = default;
};

namespace modext {

inline ThesaurusAxiomSet strip_disjoints(const Thesaurus& t) {
  ThesaurusAxiomSet out;
  out.concepts = t.concepts;
  out.subsumptions.assign(t.subsumptions.begin(), t.subsumptions.end());
  out.disjointsRemoved = true;
  return out;
}

// Names in `sigma` unknown to `t` are ignored.
inline ThesaurusAxiomSet extract_module(const ThesaurusAxiomSet& t, const Signature& sigma) {
  std::map<std::string, std::vector<std::size_t>> by_child;
  for (std::size_t i = 0; i < t.subsumptions.size(); ++i) by_child[t.subsumptions[i].first].push_back(i);

  std::set<std::string> reached;
  std::vector<std::string> work;
  for (const auto& s : sigma)
    if (t.concepts.count(s) && reached.insert(s).second) work.push_back(s);

  std::vector<bool> taken(t.subsumptions.size(), false);
  while (!work.empty()) {
    std::string next = std::move(work.back());
    work.pop_back();
    auto it = by_child.find(next);
    if (it == by_child.end()) continue;
    for (std::size_t i : it->second) {
      taken[i] = true;
      const auto& parent = t.subsumptions[i].second;
      if (reached.insert(parent).second) work.push_back(parent);
    }
  }

  ThesaurusAxiomSet out;
  out.disjointsRemoved = t.disjointsRemoved;
  out.concepts = std::move(reached);
  for (std::size_t i = 0; i < t.subsumptions.size(); ++i)
    if (taken[i]) out.subsumptions.push_back(t.subsumptions[i]);
  return out;
}

}  // namespace modext
}  // namespace onco
