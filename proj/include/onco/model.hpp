#pragma once

// Annotated UML information models and thesaurus fixtures.
//
// Model documents are JSON:
//
//   { "project": "caBIO", "version": "4.2",
//     "packagePrefix": "gov.nih.nci.cabio.domain",
//     "classes": [ { "name": "Gene", "superclasses": [],
//                    "annotation": { "primary": "Gene", "qualifiers": [] },
//                    "attributes": [ { "name": "symbol", "datatype": "string",
//                                      "annotation": {...} } ] } ],
//     "associations": [ { "source": "SNP", "roleName": "...", "target": "..." } ] }
//
// Thesaurus documents are line based: `CONCEPT <name>`, `SUB <child> <parent>`,
// `DISJOINT <a> <b>`, with `#` comments.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "onco/error.hpp"

namespace onco {

enum class Datatype { String, Integer, Float, Boolean, Date };

inline std::string_view to_string(Datatype d) {
  switch (d) {
    case Datatype::String: return "string";
    case Datatype::Integer: return "integer";
    case Datatype::Float: return "float";
    case Datatype::Boolean: return "boolean";
    case Datatype::Date: return "date";
  }
  return "string";
}

inline std::optional<Datatype> parse_datatype(std::string_view s) {
  if (s == "string") return Datatype::String;
  if (s == "integer") return Datatype::Integer;
  if (s == "float") return Datatype::Float;
  if (s == "boolean") return Datatype::Boolean;
  if (s == "date") return Datatype::Date;
  return std::nullopt;
}

// Primary concept plus ordered qualifier concepts.
struct Annotation {
  std::string primary;
  std::vector<std::string> qualifiers;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct UmlAttribute {
  std::string name;
  Datatype datatype = Datatype::String;
  std::optional<Annotation> annotation;

  friend bool operator==(const UmlAttribute&, const UmlAttribute&) = default;
};

struct UmlClass {
  std::string name;
  std::vector<std::string> superclasses;
  std::vector<UmlAttribute> attributes;
  std::optional<Annotation> annotation;

  const UmlAttribute* find_attribute(std::string_view attr) const {
    for (const auto& a : attributes)
      if (a.name == attr) return &a;
    return nullptr;
  }

  friend bool operator==(const UmlClass&, const UmlClass&) = default;
};

// Directed navigable association end: source --roleName--> target.
struct UmlAssociation {
  std::string source;
  std::string roleName;
  std::string target;

  friend bool operator==(const UmlAssociation&, const UmlAssociation&) = default;
};

struct UmlModel {
  std::string project;
  std::string version;
  std::string packagePrefix;
  std::vector<UmlClass> classes;
  std::vector<UmlAssociation> associations;

  const UmlClass* find_class(std::string_view name) const {
    for (const auto& c : classes)
      if (c.name == name) return &c;
    return nullptr;
  }

  // Transitive superclasses of `name` in depth-first preorder over the
  // declared superclass lists, each listed once. Excludes `name` itself.
  std::vector<std::string> ancestors(std::string_view name) const {
    std::vector<std::string> out;
    std::set<std::string> seen{std::string(name)};
    std::vector<std::string> stack;
    auto push_supers = [&](const UmlClass& c) {
      for (auto it = c.superclasses.rbegin(); it != c.superclasses.rend(); ++it) stack.push_back(*it);
    };
    if (const auto* c = find_class(name)) push_supers(*c);
    while (!stack.empty()) {
      std::string next = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(next).second) continue;
      out.push_back(next);
      if (const auto* c = find_class(next)) push_supers(*c);
    }
    return out;
  }

  bool is_subclass_or_self(std::string_view sub, std::string_view sup) const {
    if (sub == sup) return true;
    for (const auto& a : ancestors(sub))
      if (a == sup) return true;
    return false;
  }

  // Attribute declared on `cls` or inherited from an ancestor.
  const UmlAttribute* find_attribute(std::string_view cls, std::string_view attr) const {
    if (const auto* c = find_class(cls)) {
      if (const auto* a = c->find_attribute(attr)) return a;
      for (const auto& anc : ancestors(cls))
        if (const auto* ac = find_class(anc))
          if (const auto* a = ac->find_attribute(attr)) return a;
    }
    return nullptr;
  }

  // Outgoing association with `role` from `cls` or one of its ancestors.
  const UmlAssociation* find_association(std::string_view cls, std::string_view role) const {
    for (const auto& a : associations)
      if (a.source == cls && a.roleName == role) return &a;
    for (const auto& owner : ancestors(cls))
      for (const auto& a : associations)
        if (a.source == owner && a.roleName == role) return &a;
    return nullptr;
  }

  friend bool operator==(const UmlModel&, const UmlModel&) = default;
};

struct Thesaurus {
  std::set<std::string> concepts;
  std::set<std::pair<std::string, std::string>> subsumptions;  // (child, parent)
  std::set<std::pair<std::string, std::string>> disjoint;       // stored with first < second

  friend bool operator==(const Thesaurus&, const Thesaurus&) = default;
};

using Signature = std::set<std::string>;

namespace detail {

inline void require_acyclic(const std::map<std::string, std::vector<std::string>>& edges,
                            const std::string& what) {
  enum class Mark { None, Active, Done };
  std::map<std::string, Mark> mark;
  std::vector<std::string> trail;
  auto visit = [&](auto&& self, const std::string& node) -> void {
    auto& m = mark[node];
    if (m == Mark::Done) return;
    if (m == Mark::Active) {
      auto from = std::find(trail.begin(), trail.end(), node);
      std::string cycle;
      for (auto it = from; it != trail.end(); ++it) cycle += *it + " -> ";
      throw LoadError(what, "cycle " + cycle + node);
    }
    m = Mark::Active;
    trail.push_back(node);
    if (auto it = edges.find(node); it != edges.end())
      for (const auto& next : it->second) self(self, next);
    trail.pop_back();
    mark[node] = Mark::Done;
  };
  for (const auto& [node, _] : edges) visit(visit, node);
}

inline const nlohmann::json& member(const nlohmann::json& obj, const char* key,
                                    const std::string& where) {
  if (!obj.is_object()) throw LoadError(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw LoadError(where, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string string_member(const nlohmann::json& obj, const char* key,
                                 const std::string& where) {
  const auto& v = member(obj, key, where);
  if (!v.is_string()) throw LoadError(where + "." + key, "expected a string");
  return v.get<std::string>();
}

inline std::vector<std::string> string_list(const nlohmann::json& obj, const char* key,
                                            const std::string& where) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw LoadError(where + "." + key, "expected an array");
  for (std::size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_string())
      throw LoadError(where + "." + key + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back((*it)[i].get<std::string>());
  }
  return out;
}

inline std::optional<Annotation> annotation_member(const nlohmann::json& obj,
                                                   const std::string& where) {
  auto it = obj.find("annotation");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  std::string here = where + ".annotation";
  Annotation a;
  a.primary = string_member(*it, "primary", here);
  if (a.primary.empty()) throw LoadError(here + ".primary", "empty concept name");
  a.qualifiers = string_list(*it, "qualifiers", here);
  return a;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto ok_first = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  if (!ok_first(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

inline nlohmann::json annotation_json(const std::optional<Annotation>& a) {
  if (!a) return nullptr;
  return {{"primary", a->primary}, {"qualifiers", a->qualifiers}};
}

}  // namespace detail

// Parses and validates a model document. Every type invariant is checked;
// violations are reported with the element location.
inline UmlModel load_model(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError("document", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw LoadError("document", "expected a top-level object");

  UmlModel m;
  m.project = detail::string_member(doc, "project", "document");
  m.version = detail::string_member(doc, "version", "document");
  m.packagePrefix = detail::string_member(doc, "packagePrefix", "document");

  const auto& classes = detail::member(doc, "classes", "document");
  if (!classes.is_array()) throw LoadError("classes", "expected an array");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    std::string where = "classes[" + std::to_string(i) + "]";
    const auto& jc = classes[i];
    UmlClass c;
    c.name = detail::string_member(jc, "name", where);
    if (!detail::is_identifier(c.name)) throw LoadError(where + ".name", "invalid class name '" + c.name + "'");
    if (!index.emplace(c.name, i).second)
      throw LoadError(where + ".name", "duplicate class name '" + c.name + "'");
    c.superclasses = detail::string_list(jc, "superclasses", where);
    c.annotation = detail::annotation_member(jc, where);
    if (auto it = jc.find("attributes"); it != jc.end() && !it->is_null()) {
      if (!it->is_array()) throw LoadError(where + ".attributes", "expected an array");
      std::set<std::string> names;
      for (std::size_t k = 0; k < it->size(); ++k) {
        std::string aw = where + ".attributes[" + std::to_string(k) + "]";
        const auto& ja = (*it)[k];
        UmlAttribute a;
        a.name = detail::string_member(ja, "name", aw);
        if (!detail::is_identifier(a.name)) throw LoadError(aw + ".name", "invalid attribute name '" + a.name + "'");
        if (!names.insert(a.name).second)
          throw LoadError(aw + ".name", "duplicate attribute '" + a.name + "' in class " + c.name);
        std::string dt = detail::string_member(ja, "datatype", aw);
        auto parsed = parse_datatype(dt);
        if (!parsed) throw LoadError(aw + ".datatype", "unknown datatype '" + dt + "'");
        a.datatype = *parsed;
        a.annotation = detail::annotation_member(ja, aw);
        c.attributes.push_back(std::move(a));
      }
    }
    m.classes.push_back(std::move(c));
  }

  std::map<std::string, std::vector<std::string>> generalizations;
  for (std::size_t i = 0; i < m.classes.size(); ++i) {
    const auto& c = m.classes[i];
    auto& supers = generalizations[c.name];
    for (std::size_t k = 0; k < c.superclasses.size(); ++k) {
      const auto& s = c.superclasses[k];
      if (!index.count(s))
        throw LoadError("classes[" + std::to_string(i) + "].superclasses[" + std::to_string(k) + "]",
                        "undeclared superclass '" + s + "'");
      supers.push_back(s);
    }
  }
  detail::require_acyclic(generalizations, "generalizations");

  if (auto it = doc.find("associations"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw LoadError("associations", "expected an array");
    std::set<std::pair<std::string, std::string>> ends;
    for (std::size_t i = 0; i < it->size(); ++i) {
      std::string where = "associations[" + std::to_string(i) + "]";
      const auto& ja = (*it)[i];
      UmlAssociation a;
      a.source = detail::string_member(ja, "source", where);
      a.roleName = detail::string_member(ja, "roleName", where);
      a.target = detail::string_member(ja, "target", where);
      if (!index.count(a.source)) throw LoadError(where + ".source", "dangling endpoint '" + a.source + "'");
      if (!index.count(a.target)) throw LoadError(where + ".target", "dangling endpoint '" + a.target + "'");
      if (!detail::is_identifier(a.roleName)) throw LoadError(where + ".roleName", "invalid role name '" + a.roleName + "'");
      if (!ends.emplace(a.source, a.roleName).second)
        throw LoadError(where + ".roleName", "duplicate role '" + a.roleName + "' on class " + a.source);
      m.associations.push_back(std::move(a));
    }
  }
  return m;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline UmlModel load_model_file(const std::string& path) { return load_model(read_file(path)); }

// Inverse of load_model, used for writing fixtures.
inline std::string dump_model(const UmlModel& m) {
  nlohmann::ordered_json doc;
  doc["project"] = m.project;
  doc["version"] = m.version;
  doc["packagePrefix"] = m.packagePrefix;
  doc["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : m.classes) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["superclasses"] = c.superclasses;
    jc["annotation"] = detail::annotation_json(c.annotation);
    jc["attributes"] = nlohmann::ordered_json::array();
    for (const auto& a : c.attributes) {
      nlohmann::ordered_json ja;
      ja["name"] = a.name;
      ja["datatype"] = std::string(to_string(a.datatype));
      ja["annotation"] = detail::annotation_json(a.annotation);
      jc["attributes"].push_back(std::move(ja));
    }
    doc["classes"].push_back(std::move(jc));
  }
  doc["associations"] = nlohmann::ordered_json::array();
  for (const auto& a : m.associations)
    doc["associations"].push_back({{"source", a.source}, {"roleName", a.roleName}, {"target", a.target}});
  return doc.dump(2) + "\n";
}

inline Thesaurus load_thesaurus(std::string_view document) {
  Thesaurus t;
  struct Ref {
    std::string name;
    std::size_t line;
  };
  std::vector<Ref> refs;
  std::istringstream in{std::string(document)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string w; ls >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    std::string where = "line " + std::to_string(lineno);
    const auto& kw = tok[0];
    if (kw == "CONCEPT") {
      if (tok.size() != 2) throw LoadError(where, "expected 'CONCEPT <name>'");
      t.concepts.insert(tok[1]);
    } else if (kw == "SUB") {
      if (tok.size() != 3) throw LoadError(where, "expected 'SUB <child> <parent>'");
      t.subsumptions.emplace(tok[1], tok[2]);
      refs.push_back({tok[1], lineno});
      refs.push_back({tok[2], lineno});
    } else if (kw == "DISJOINT") {
      if (tok.size() != 3) throw LoadError(where, "expected 'DISJOINT <a> <b>'");
      t.disjoint.insert(std::minmax(tok[1], tok[2]));
      refs.push_back({tok[1], lineno});
      refs.push_back({tok[2], lineno});
    } else {
      throw LoadError(where, "unknown directive '" + kw + "'");
    }
  }
  for (const auto& r : refs)
    if (!t.concepts.count(r.name))
      throw LoadError("line " + std::to_string(r.line), "undeclared concept '" + r.name + "'");

  std::map<std::string, std::vector<std::string>> edges;
  for (const auto& [child, parent] : t.subsumptions)
    if (child != parent) edges[child].push_back(parent);
  detail::require_acyclic(edges, "subsumptions");
  return t;
}

inline Thesaurus load_thesaurus_file(const std::string& path) { return load_thesaurus(read_file(path)); }

inline std::string dump_thesaurus(const Thesaurus& t) {
  std::string out;
  for (const auto& c : t.concepts) out += "CONCEPT " + c + "\n";
  for (const auto& [a, b] : t.subsumptions) out += "SUB " + a + " " + b + "\n";
  for (const auto& [a, b] : t.disjoint) out += "DISJOINT " + a + " " + b + "\n";
  return out;
}

// Every concept named by a class or attribute annotation (primary and qualifiers).
inline Signature model_signature(const UmlModel& m) {
  Signature sig;
  auto add = [&](const std::optional<Annotation>& a) {
    if (!a) return;
    sig.insert(a->primary);
    sig.insert(a->qualifiers.begin(), a->qualifiers.end());
  };
  for (const auto& c : m.classes) {
    add(c.annotation);
    for (const auto& a : c.attributes) add(a.annotation);
  }
  return sig;
}

// Annotation concepts must resolve against the thesaurus.
inline void check_annotations(const UmlModel& m, const Thesaurus& t) {
  auto check = [&](const std::optional<Annotation>& a, const std::string& where) {
    if (!a) return;
    if (!t.concepts.count(a->primary))
      throw LoadError(where + ".annotation.primary", "unknown concept '" + a->primary + "'");
    for (std::size_t i = 0; i < a->qualifiers.size(); ++i)
      if (!t.concepts.count(a->qualifiers[i]))
        throw LoadError(where + ".annotation.qualifiers[" + std::to_string(i) + "]",
                        "unknown concept '" + a->qualifiers[i] + "'");
  };
  for (std::size_t i = 0; i < m.classes.size(); ++i) {
    std::string where = "classes[" + std::to_string(i) + "]";
    check(m.classes[i].annotation, where);
    for (std::size_t k = 0; k < m.classes[i].attributes.size(); ++k)
      check(m.classes[i].attributes[k].annotation, where + ".attributes[" + std::to_string(k) + "]");
  }
}

}  // namespace onco
