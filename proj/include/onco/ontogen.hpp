#pragma once

// UML model -> EL ontology.
//
// Every UML class C becomes c:C ⊑ u:UMLClass; every attribute a of C becomes
// an OWL class c:C_a ⊑ u:UMLAttribute with a hasValue datatype restriction;
// every association (S, r, T) becomes a sub-property c:S_r_T of the
// transitive u:hasAssociation. Inherited attributes and associations are
// written out on each subclass. Annotations map a class onto its primary
// thesaurus concept, with qualifiers encoded as an l:OWLList chain.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "onco/axioms.hpp"
#include "onco/error.hpp"
#include "onco/modext.hpp"
#include "onco/model.hpp"

namespace onco::ontogen {

inline constexpr std::string_view kUmlClass = "u:UMLClass";
inline constexpr std::string_view kUmlAttribute = "u:UMLAttribute";
inline constexpr std::string_view kOwlList = "l:OWLList";
inline constexpr std::string_view kHasAssociation = "u:hasAssociation";
inline constexpr std::string_view kHasAttribute = "u:hasAttribute";
inline constexpr std::string_view kHasContents = "l:hasContents";
inline constexpr std::string_view kHasNext = "l:hasNext";

inline std::string class_iri(std::string_view cls) { return "c:" + std::string(cls); }
inline std::string concept_iri(std::string_view name) { return "n:" + std::string(name); }
inline std::string attribute_class_iri(std::string_view cls, std::string_view attr) {
  return "c:" + std::string(cls) + "_" + std::string(attr);
}
inline std::string property_iri(const UmlAssociation& a) {
  return "c:" + a.source + "_" + a.roleName + "_" + a.target;
}

// Strips a namespace prefix ("c:SNP" -> "SNP").
inline std::string local_name(std::string_view iri) {
  auto colon = iri.find(':');
  return std::string(colon == std::string_view::npos ? iri : iri.substr(colon + 1));
}

inline std::string_view xsd_type(Datatype d) {
  switch (d) {
    case Datatype::String: return "xsd:string";
    case Datatype::Integer: return "xsd:integer";
    case Datatype::Float: return "xsd:double";
    case Datatype::Boolean: return "xsd:boolean";
    case Datatype::Date: return "xsd:dateTime";
  }
  return "xsd:string";
}

inline std::map<std::string, std::string> standard_prefixes(const UmlModel& m) {
  return {
      {"c", "urn:onco:model:" + m.project + ":" + m.version + "#"},
      {"l", "urn:onco:list#"},
      {"n", "urn:onco:thesaurus#"},
      {"u", "urn:onco:uml#"},
      {"xsd", "http://www.w3.org/2001/XMLSchema#"},
  };
}

// Names generated for a model, and what they stand for.
struct Vocabulary {
  struct AttributeEntry {
    std::string owner;  // declaring UML class
    std::string attribute;
    Datatype datatype = Datatype::String;
  };
  std::map<std::string, std::string> classes;  // c:C -> C
  std::map<std::string, AttributeEntry> attributes;
  std::map<std::string, UmlAssociation> properties;

  const AttributeEntry* attribute(std::string_view iri) const {
    auto it = attributes.find(std::string(iri));
    return it == attributes.end() ? nullptr : &it->second;
  }
  const UmlAssociation* property(std::string_view iri) const {
    auto it = properties.find(std::string(iri));
    return it == properties.end() ? nullptr : &it->second;
  }
};

// Builds the naming table. Two model elements mapping onto the same
// generated name is an error; nothing is renamed.
inline Vocabulary build_vocabulary(const UmlModel& m) {
  Vocabulary v;
  std::map<std::string, std::string> owner_of;
  auto claim = [&](const std::string& iri, const std::string& what) {
    auto [it, fresh] = owner_of.emplace(iri, what);
    if (!fresh) throw GenerationError("name collision on " + iri + ": " + it->second + " and " + what);
  };
  for (const auto& c : m.classes) {
    claim(class_iri(c.name), "class " + c.name);
    v.classes.emplace(class_iri(c.name), c.name);
  }
  for (const auto& c : m.classes)
    for (const auto& a : c.attributes) {
      auto iri = attribute_class_iri(c.name, a.name);
      claim(iri, "attribute " + c.name + "." + a.name);
      v.attributes.emplace(iri, Vocabulary::AttributeEntry{c.name, a.name, a.datatype});
    }
  for (const auto& a : m.associations) {
    auto iri = property_iri(a);
    claim(iri, "association " + a.source + "." + a.roleName);
    v.properties.emplace(iri, a);
  }
  return v;
}

// n:P, or n:P ⊓ (l:OWLList ⊓ ∃l:hasContents.n:Q1 ⊓ ∃l:hasNext.(…)) with one
// list cell per qualifier, in order.
inline ClassExpr annotation_expr(const Annotation& a) {
  auto primary = ClassExpr::named(concept_iri(a.primary));
  if (a.qualifiers.empty()) return primary;
  std::optional<ClassExpr> tail;
  for (auto it = a.qualifiers.rbegin(); it != a.qualifiers.rend(); ++it) {
    std::vector<ClassExpr> cell{ClassExpr::named(std::string(kOwlList)),
                                ClassExpr::some(std::string(kHasContents), ClassExpr::named(concept_iri(*it)))};
    if (tail) cell.push_back(ClassExpr::some(std::string(kHasNext), std::move(*tail)));
    tail = ClassExpr::conjunction(std::move(cell));
  }
  return ClassExpr::conjunction({std::move(primary), std::move(*tail)});
}

// Inverse of annotation_expr; nullopt when `e` does not have that shape.
inline std::optional<Annotation> recover_annotation(const ClassExpr& e) {
  auto concept_of = [](const ClassExpr& x) -> std::optional<std::string> {
    if (!x.is_named() || x.name.rfind("n:", 0) != 0) return std::nullopt;
    return x.name.substr(2);
  };
  if (auto p = concept_of(e)) return Annotation{*p, {}};
  if (e.kind != ClassExpr::Kind::Conjunction || e.operands.size() != 2) return std::nullopt;
  auto primary = concept_of(e.operands[0]);
  if (!primary) return std::nullopt;
  Annotation out{*primary, {}};
  const ClassExpr* cell = &e.operands[1];
  while (cell) {
    if (cell->kind != ClassExpr::Kind::Conjunction || cell->operands.size() < 2 || cell->operands.size() > 3)
      return std::nullopt;
    const auto& ops = cell->operands;
    if (!ops[0].is_named() || ops[0].name != kOwlList) return std::nullopt;
    if (ops[1].kind != ClassExpr::Kind::Existential || ops[1].name != kHasContents) return std::nullopt;
    auto q = concept_of(ops[1].filler());
    if (!q) return std::nullopt;
    out.qualifiers.push_back(*q);
    cell = nullptr;
    if (ops.size() == 3) {
      if (ops[2].kind != ClassExpr::Kind::Existential || ops[2].name != kHasNext) return std::nullopt;
      cell = &ops[2].filler();
    }
  }
  return out;
}

inline std::vector<Axiom> upper_vocabulary() {
  using E = Declaration::Entity;
  return {
      Declaration{E::Class, std::string(kUmlClass)},
      Declaration{E::Class, std::string(kUmlAttribute)},
      Declaration{E::Class, std::string(kOwlList)},
      Declaration{E::ObjectProperty, std::string(kHasAssociation)},
      Declaration{E::ObjectProperty, std::string(kHasAttribute)},
      Declaration{E::ObjectProperty, std::string(kHasContents)},
      Declaration{E::ObjectProperty, std::string(kHasNext)},
      Declaration{E::DataProperty, std::string(kHasValue)},
      TransitiveProperty{std::string(kHasAssociation)},
  };
}

// Pass the extracted thesaurus module to have annotation concepts checked
// against its signature.
inline AxiomSet generate_ontology(const UmlModel& m, const ThesaurusAxiomSet* module = nullptr) {
  build_vocabulary(m);  // collision check

  if (module) {
    auto check = [&](const std::optional<Annotation>& a, const std::string& where) {
      if (!a) return;
      auto need = [&](const std::string& c) {
        if (!module->concepts.count(c))
          throw GenerationError(where + ": annotation concept '" + c + "' is not in the thesaurus module");
      };
      need(a->primary);
      for (const auto& q : a->qualifiers) need(q);
    };
    for (const auto& c : m.classes) {
      check(c.annotation, "class " + c.name);
      for (const auto& a : c.attributes) check(a.annotation, "attribute " + c.name + "." + a.name);
    }
  }

  AxiomSet out;
  out.prefixes = standard_prefixes(m);
  std::set<std::string> seen;
  auto emit = [&](Axiom ax) {
    if (seen.insert(render(ax)).second) out.axioms.push_back(std::move(ax));
  };
  auto sub = [](std::string lhs, ClassExpr rhs) { return SubClassOf{ClassExpr::named(std::move(lhs)), std::move(rhs)}; };

  for (auto& ax : upper_vocabulary()) emit(std::move(ax));

  for (const auto& c : m.classes) {
    const auto self = class_iri(c.name);
    // (a) class and its annotation
    emit(sub(self, ClassExpr::named(std::string(kUmlClass))));
    if (c.annotation) emit(sub(self, annotation_expr(*c.annotation)));
    // (b) attributes
    for (const auto& a : c.attributes) {
      auto attr = attribute_class_iri(c.name, a.name);
      emit(sub(attr, ClassExpr::named(std::string(kUmlAttribute))));
      emit(sub(attr, ClassExpr::some_value(std::string(xsd_type(a.datatype)))));
      if (a.annotation) emit(sub(attr, annotation_expr(*a.annotation)));
      emit(sub(self, ClassExpr::some(std::string(kHasAttribute), ClassExpr::named(attr))));
    }
    // (c) outgoing associations
    for (const auto& a : m.associations) {
      if (a.source != c.name) continue;
      emit(SubPropertyOf{property_iri(a), std::string(kHasAssociation)});
      emit(sub(self, ClassExpr::some(property_iri(a), ClassExpr::named(class_iri(a.target)))));
    }
    // (d) generalization plus everything inherited from ancestors
    for (const auto& s : c.superclasses) emit(sub(self, ClassExpr::named(class_iri(s))));
    for (const auto& anc : m.ancestors(c.name)) {
      const auto* ac = m.find_class(anc);
      for (const auto& a : ac->attributes)
        emit(sub(self, ClassExpr::some(std::string(kHasAttribute), ClassExpr::named(attribute_class_iri(anc, a.name)))));
      for (const auto& a : m.associations)
        if (a.source == anc)
          emit(sub(self, ClassExpr::some(property_iri(a), ClassExpr::named(class_iri(a.target)))));
    }
  }
  return out;
}

// Union of two axiom sets, keeping first occurrences and merging prefixes.
inline AxiomSet merge(const AxiomSet& a, const AxiomSet& b) {
  AxiomSet out;
  out.prefixes = a.prefixes;
  out.prefixes.insert(b.prefixes.begin(), b.prefixes.end());
  std::set<std::string> seen;
  for (const auto* set : {&a, &b})
    for (const auto& ax : set->axioms)
      if (seen.insert(render(ax)).second) out.axioms.push_back(ax);
  return out;
}

}  // namespace onco::ontogen
