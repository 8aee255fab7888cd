#pragma once

// Query rewriting: concept-level query text to CQL, one candidate per choice
// of UML classes and association paths.
//
//   parse → UML extraction → value extraction → validation → path finding
//         → value re-insertion → MCC → CQL

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "onco/cql.hpp"
#include "onco/error.hpp"
#include "onco/mcc.hpp"
#include "onco/model.hpp"
#include "onco/modext.hpp"
#include "onco/ontogen.hpp"
#include "onco/query_ast.hpp"
#include "onco/reasoner.hpp"

namespace onco::query {

// Everything derived once from a model and a thesaurus.
struct KnowledgeBase {
  UmlModel model;
  ThesaurusAxiomSet module;
  AxiomSet ontology;
  AxiomSet combined;
  ontogen::Vocabulary vocabulary;
  reasoner::SubsumptionIndex index;

  static KnowledgeBase build(const UmlModel& model, const Thesaurus& thesaurus) {
    check_annotations(model, thesaurus);
    KnowledgeBase kb;
    kb.model = model;
    kb.module = modext::extract_module(modext::strip_disjoints(thesaurus), model_signature(model));
    kb.ontology = ontogen::generate_ontology(model, &kb.module);
    kb.combined = ontogen::merge(kb.ontology, kb.module.to_axiom_set());
    kb.vocabulary = ontogen::build_vocabulary(model);
    kb.index = reasoner::classify(kb.combined);
    return kb;
  }
};

struct ClassChoice {
  std::string term;
  bool attribute = false;  // attribute position
  std::string chosen;
  friend bool operator==(const ClassChoice&, const ClassChoice&) = default;
};

struct PathChoice {
  std::string from;
  std::string to;
  std::vector<Hop> hops;
  friend bool operator==(const PathChoice&, const PathChoice&) = default;
};

struct Provenance {
  std::vector<ClassChoice> classes;
  std::vector<PathChoice> paths;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CandidateQuery {
  QueryNode ast;
  Provenance provenance;
};

struct ValueBinding {
  Address path;      // the hasAttribute node the value restricted
  std::size_t slot;  // position of the value inside that node's conjunction
  std::string literal;
  friend bool operator==(const ValueBinding&, const ValueBinding&) = default;
};

struct Extraction {
  QueryNode stripped;
  std::vector<ValueBinding> bindings;
};

struct Validation {
  bool ok = true;
  std::string subject;
  std::string object;
  std::string reason;
  QueryError::Code code = QueryError::Code::Rejected;
};

namespace detail {

struct Slot {
  Address address;
  bool attribute;
  std::string term;
};

inline void collect_attribute_slots(const QueryNode& n, Address& at, std::vector<Slot>& out) {
  using K = QueryNode::Kind;
  if (n.is(K::ConceptRef)) {
    out.push_back({at, true, n.name});
    return;
  }
  if (!n.is(K::And)) return;
  for (std::size_t i = 0; i < n.children.size(); ++i)
    if (n.children[i].is(K::ConceptRef)) {
      at.push_back(i);
      out.push_back({at, true, n.children[i].name});
      at.pop_back();
    }
}

inline void collect_class_slots(const QueryNode& n, Address& at, std::vector<Slot>& out) {
  using K = QueryNode::Kind;
  if (n.is(K::ConceptRef)) {
    out.push_back({at, false, n.name});
    return;
  }
  if (!n.is(K::And)) return;
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const auto& c = n.children[i];
    at.push_back(i);
    if (c.is(K::ConceptRef)) {
      out.push_back({at, false, c.name});
    } else if (c.is(K::HasAssociationSome) || c.is(K::AssocStep)) {
      at.push_back(0);
      collect_class_slots(c.filler(), at, out);
      at.pop_back();
    } else if (c.is(K::HasAttributeSome)) {
      at.push_back(0);
      collect_attribute_slots(c.filler(), at, out);
      at.pop_back();
    }
    at.pop_back();
  }
}

// Product of the sizes, or limit + 1 once it exceeds `limit`.
inline std::size_t bounded_product(const std::vector<std::size_t>& sizes, std::size_t limit) {
  std::size_t p = 1;
  for (auto s : sizes) {
    if (s == 0) return 0;
    if (p > limit / s) return limit + 1;
    p *= s;
  }
  return p;
}

// Calls `f(choice)` for every index tuple, last position varying fastest.
template <class F>
void for_each_choice(const std::vector<std::size_t>& sizes, F&& f) {
  std::vector<std::size_t> choice(sizes.size(), 0);
  for (auto s : sizes)
    if (s == 0) return;
  for (;;) {
    f(choice);
    std::size_t k = sizes.size();
    while (k > 0) {
      --k;
      if (++choice[k] < sizes[k]) break;
      choice[k] = 0;
      if (k == 0) return;
    }
    if (sizes.empty()) return;
  }
}

struct Journey {
  Address address;  // the hasAssociation node
  std::string from;
  std::string to;
};

inline void collect_journeys(const QueryNode& n, Address& at, std::vector<Journey>& out) {
  using K = QueryNode::Kind;
  const QueryNode* head = head_class(n);
  if (!n.is(K::And)) return;
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const auto& c = n.children[i];
    if (!c.is(K::HasAssociationSome)) continue;
    at.push_back(i);
    const QueryNode* target = head_class(c.filler());
    out.push_back({at, head ? head->name : "", target ? target->name : ""});
    at.push_back(0);
    collect_journeys(c.filler(), at, out);
    at.pop_back();
    at.pop_back();
  }
}

inline void strip_values(QueryNode& n, Address& at, std::vector<ValueBinding>& out) {
  using K = QueryNode::Kind;
  if (n.is(K::HasAttributeSome)) {
    QueryNode& f = n.children[0];
    if (f.is(K::And)) {
      std::vector<QueryNode> kept;
      for (std::size_t i = 0; i < f.children.size(); ++i) {
        if (f.children[i].is(K::HasValueEquals)) out.push_back({at, i, f.children[i].name});
        else kept.push_back(std::move(f.children[i]));
      }
      f.children = std::move(kept);
      if (f.children.size() == 1) {
        QueryNode only = std::move(f.children.front());
        f = std::move(only);
      }
    }
    return;
  }
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    at.push_back(i);
    strip_values(n.children[i], at, out);
    at.pop_back();
  }
}

inline std::string lower_initial(std::string_view s) {
  if (s.empty()) return "x";
  return std::string(1, static_cast<char>(std::tolower(static_cast<unsigned char>(s.front()))));
}

class VariableNamer {
 public:
  std::string fresh(std::string_view basis) {
    std::string base = lower_initial(basis);
    auto& n = used_[base];
    ++n;
    return n == 1 ? base : base + std::to_string(n);
  }

 private:
  std::map<std::string, int> used_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Stages

inline std::vector<CandidateQuery> extract_uml(const QueryNode& ast, const reasoner::SubsumptionIndex& index,
                                               std::size_t candidateLimit = 64) {
  std::vector<detail::Slot> slots;
  Address at;
  detail::collect_class_slots(ast, at, slots);

  std::vector<std::vector<std::string>> options;
  std::vector<std::size_t> sizes;
  for (const auto& slot : slots) {
    std::string iri = ontogen::concept_iri(slot.term);
    std::vector<std::string> found;
    if (index.declared(iri)) {
      for (const auto& c : slot.attribute ? index.attribute_classes() : index.uml_classes())
        if (index.entails(c, iri)) found.push_back(c);
    }
    if (found.empty())
      throw QueryError(Stage::UmlExtract, QueryError::Code::NoUmlCandidate,
                       "no UML " + std::string(slot.attribute ? "attribute" : "class") + " matches concept '" +
                           slot.term + "'");
    sizes.push_back(found.size());
    options.push_back(std::move(found));
  }
  if (detail::bounded_product(sizes, candidateLimit) > candidateLimit)
    throw QueryError(Stage::UmlExtract, QueryError::Code::CandidateLimit,
                     "more than " + std::to_string(candidateLimit) + " UML class combinations");

  std::vector<CandidateQuery> out;
  detail::for_each_choice(sizes, [&](const std::vector<std::size_t>& choice) {
    CandidateQuery c{ast, {}};
    for (std::size_t i = 0; i < slots.size(); ++i) {
      QueryNode* n = node_at(c.ast, slots[i].address);
      n->kind = slots[i].attribute ? QueryNode::Kind::UmlAttributeRef : QueryNode::Kind::UmlClassRef;
      n->name = options[i][choice[i]];
      c.provenance.classes.push_back({slots[i].term, slots[i].attribute, n->name});
    }
    out.push_back(std::move(c));
  });
  return out;
}

inline Extraction extract_data_values(const QueryNode& ast) {
  Extraction e{ast, {}};
  Address at;
  detail::strip_values(e.stripped, at, e.bindings);
  return e;
}

inline Validation validate_semantics(const QueryNode& stripped, const reasoner::SubsumptionIndex& index) {
  using K = QueryNode::Kind;
  Validation v;
  auto reject = [&](std::string subject, std::string object, std::string reason,
                    QueryError::Code code = QueryError::Code::Rejected) {
    if (v.ok) v = {false, std::move(subject), std::move(object), std::move(reason), code};
  };
  auto visit = [&](auto&& self, const QueryNode& n) -> void {
    const QueryNode* head = head_class(n);
    if (!head || !head->is(K::UmlClassRef) || !index.is_uml_class(head->name)) {
      reject(head ? head->name : to_string(n), "", "not a UML class");
      return;
    }
    if (!n.is(K::And)) return;
    for (const auto& c : n.children) {
      if (c.is(K::HasAttributeSome)) {
        const QueryNode* attr = head_attribute(c.filler());
        std::string a = attr ? attr->name : to_string(c.filler());
        if (!attr || !index.attributes_of(head->name).count(a))
          reject(head->name, a, a + " is not an attribute of " + head->name);
      } else if (c.is(K::HasAssociationSome)) {
        const QueryNode* target = head_class(c.filler());
        if (!target || !index.is_uml_class(target->name)) {
          reject(target ? target->name : to_string(c.filler()), "", "not a UML class");
          continue;
        }
        if (!reasoner::association_reachable(index, head->name, target->name))
          reject(head->name, target->name, "no association path from " + head->name + " to " + target->name,
                 QueryError::Code::NoPath);
        self(self, c.filler());
      } else if (c.is(K::AssocStep)) {
        self(self, c.filler());
      }
    }
  };
  visit(visit, stripped);
  return v;
}

struct PathExpansion {
  QueryNode ast;
  std::vector<PathChoice> paths;
};

inline std::vector<PathExpansion> find_property_paths(const QueryNode& stripped, const KnowledgeBase& kb,
                                                      std::size_t maxNodes = 16, std::size_t candidateLimit = 64) {
  std::vector<detail::Journey> journeys;
  Address at;
  detail::collect_journeys(stripped, at, journeys);

  std::vector<std::vector<reasoner::AssociationPath>> options;
  std::vector<std::size_t> sizes;
  for (const auto& j : journeys) {
    auto paths = reasoner::find_paths(kb.index, j.from, j.to, maxNodes);
    if (paths.empty())
      throw QueryError(Stage::PathFind, QueryError::Code::NoPath,
                       "no association path from " + j.from + " to " + j.to + " within " + std::to_string(maxNodes) +
                           " classes");
    sizes.push_back(paths.size());
    options.push_back(std::move(paths));
  }
  if (detail::bounded_product(sizes, candidateLimit) > candidateLimit)
    throw QueryError(Stage::PathFind, QueryError::Code::CandidateLimit,
                     "more than " + std::to_string(candidateLimit) + " path combinations");

  std::vector<PathExpansion> out;
  detail::for_each_choice(sizes, [&](const std::vector<std::size_t>& choice) {
    PathExpansion e{stripped, {}};
    for (std::size_t i = 0; i < journeys.size(); ++i) {
      const auto& path = options[i][choice[i]];
      std::vector<Hop> hops;
      for (const auto& step : path.steps) {
        const auto* assoc = kb.vocabulary.property(step.property);
        if (!assoc) throw InvariantError("path step on unknown property " + step.property);
        hops.push_back({step.property, assoc->roleName, step.range});
      }
      QueryNode* n = node_at(e.ast, journeys[i].address);
      n->kind = QueryNode::Kind::AssocStep;
      n->hops = hops;
      e.paths.push_back({journeys[i].from, journeys[i].to, std::move(hops)});
    }
    out.push_back(std::move(e));
  });
  return out;
}

inline QueryNode reinsert_data_values(const QueryNode& ast, const std::vector<ValueBinding>& bindings) {
  using K = QueryNode::Kind;
  QueryNode out = ast;
  for (const auto& b : bindings) {
    QueryNode* n = node_at(out, b.path);
    if (!n || !n->is(K::HasAttributeSome))
      throw QueryError(Stage::ValueReinsert, QueryError::Code::Unresolvable,
                       "binding address does not name a hasAttribute restriction");
    QueryNode& f = n->children[0];
    if (!f.is(K::And)) f = QueryNode{K::And, {}, {}, {std::move(f)}};
    if (b.slot > f.children.size())
      throw QueryError(Stage::ValueReinsert, QueryError::Code::Unresolvable,
                       "binding slot " + std::to_string(b.slot) + " out of range");
    f.children.insert(f.children.begin() + static_cast<std::ptrdiff_t>(b.slot), QueryNode::value(b.literal));
  }
  return out;
}

inline mcc::Comprehension to_mcc(const QueryNode& ast, const KnowledgeBase& kb) {
  using K = QueryNode::Kind;
  mcc::Comprehension m;
  detail::VariableNamer names;
  auto fail = [](const std::string& why) -> void {
    throw QueryError(Stage::Mcc, QueryError::Code::Translation, why);
  };

  auto items = [&](auto&& self, const QueryNode& n, const std::string& var) -> void {
    if (!n.is(K::And)) return;
    for (const auto& c : n.children) {
      if (c.is(K::HasAttributeSome)) {
        const QueryNode* attr = head_attribute(c.filler());
        const auto* entry = attr ? kb.vocabulary.attribute(attr->name) : nullptr;
        if (!entry) fail("unknown attribute in '" + to_string(c) + "'");
        bool any = false;
        if (c.filler().is(K::And))
          for (const auto& v : c.filler().children)
            if (v.is(K::HasValueEquals)) {
              m.qualifiers.push_back(mcc::Filter{var, entry->attribute, mcc::predicate_for(v.name), v.name});
              any = true;
            }
        if (!any) m.qualifiers.push_back(mcc::Filter{var, entry->attribute, cql::Predicate::IsNotNull, std::nullopt});
      } else if (c.is(K::AssocStep)) {
        const QueryNode* target = head_class(c.filler());
        if (!target) fail("association filler without a class");
        std::string cur = var;
        for (std::size_t i = 0; i < c.hops.size(); ++i) {
          std::string w = names.fresh(c.hops[i].role);
          m.qualifiers.push_back(mcc::PathGenerator{w, cur, c.hops[i].role});
          bool last = i + 1 == c.hops.size();
          m.qualifiers.push_back(mcc::TypeBind{w, ontogen::local_name(last ? target->name : c.hops[i].range)});
          cur = w;
        }
        self(self, c.filler(), cur);
      } else if (c.is(K::HasAssociationSome)) {
        fail("association restriction was not expanded into a path: '" + to_string(c) + "'");
      }
    }
  };

  const QueryNode* head = head_class(ast);
  if (!head || !head->is(K::UmlClassRef)) fail("query does not start with a UML class");
  std::string cls = ontogen::local_name(head->name);
  m.head = names.fresh(cls);
  m.qualifiers.push_back(mcc::ExtentGenerator{m.head, cls});
  items(items, ast, m.head);
  return m;
}

inline cql::CqlQuery mcc_to_cql(const mcc::Comprehension& m, const UmlModel& model) {
  auto fail = [](const std::string& why) -> void {
    throw QueryError(Stage::Cql, QueryError::Code::Translation, why);
  };
  if (auto problems = mcc::well_formedness(m); !problems.empty()) fail(problems.front());

  auto qualified = [&](const std::string& cls) {
    return model.packagePrefix.empty() ? cls : model.packagePrefix + "." + cls;
  };

  struct Entry {
    const mcc::Filter* filter = nullptr;
    std::string child;  // variable introduced by a path generator
  };
  struct Binding {
    std::string cls;
    std::string role;
    std::vector<Entry> entries;
  };
  std::map<std::string, Binding> vars;

  for (std::size_t i = 0; i < m.qualifiers.size(); ++i) {
    const auto& q = m.qualifiers[i];
    if (const auto* e = std::get_if<mcc::ExtentGenerator>(&q)) {
      if (!model.find_class(e->className)) fail("unknown class '" + e->className + "'");
      vars[e->var].cls = e->className;
    } else if (const auto* p = std::get_if<mcc::PathGenerator>(&q)) {
      const auto& src = vars.at(p->source);
      const auto* assoc = model.find_association(src.cls, p->role);
      if (!assoc) fail("class " + src.cls + " has no association '" + p->role + "'");
      std::string cls = assoc->target;
      if (i + 1 < m.qualifiers.size())
        if (const auto* t = std::get_if<mcc::TypeBind>(&m.qualifiers[i + 1]); t && t->var == p->var) {
          if (!model.find_class(t->className)) fail("unknown class '" + t->className + "'");
          if (!model.is_subclass_or_self(t->className, cls) && !model.is_subclass_or_self(cls, t->className))
            fail("variable " + p->var + " bound to " + t->className + " but " + src.cls + "." + p->role +
                 " yields " + cls);
          cls = t->className;
          ++i;
        }
      vars[p->var] = {cls, p->role, {}};
      vars.at(p->source).entries.push_back({nullptr, p->var});
    } else if (const auto* t = std::get_if<mcc::TypeBind>(&q)) {
      if (vars.at(t->var).cls != t->className)
        fail("variable " + t->var + " is a " + vars.at(t->var).cls + ", not a " + t->className);
    } else {
      const auto& f = std::get<mcc::Filter>(q);
      auto& b = vars.at(f.var);
      if (!model.find_attribute(b.cls, f.attribute)) fail("class " + b.cls + " has no attribute '" + f.attribute + "'");
      b.entries.push_back({&f, {}});
    }
  }

  auto build = [&](auto&& self, const std::string& var) -> std::optional<Box<cql::Constraint>> {
    std::vector<cql::Constraint> items;
    for (const auto& e : vars.at(var).entries) {
      if (e.filter) {
        items.emplace_back(cql::Attribute{e.filter->attribute, e.filter->predicate, e.filter->literal});
      } else {
        const auto& child = vars.at(e.child);
        items.emplace_back(cql::Association{qualified(child.cls), child.role, self(self, e.child)});
      }
    }
    return cql::combine(std::move(items), cql::LogicalOp::And);
  };

  cql::CqlQuery out;
  out.target.name = qualified(vars.at(m.head).cls);
  out.target.child = build(build, m.head);
  return out;
}

// ---------------------------------------------------------------------------
// Whole pipeline

enum class Selection { All, First, Interactive };

inline std::optional<Selection> parse_selection(std::string_view s) {
  if (s == "all") return Selection::All;
  if (s == "first") return Selection::First;
  if (s == "interactive") return Selection::Interactive;
  return std::nullopt;
}

struct RewriteResult;

struct Options {
  std::size_t maxNodes = 16;
  std::size_t candidateLimit = 64;
  Selection selection = Selection::All;
  bool expandPaths = true;
  // Picks one of several candidates under Selection::Interactive.
  std::function<std::size_t(const std::vector<RewriteResult>&)> chooser;
};

struct RewriteResult {
  QueryNode umlExtracted;
  QueryNode stripped;
  std::vector<ValueBinding> bindings;
  QueryNode expanded;
  QueryNode final;
  mcc::Comprehension mcc;
  cql::CqlQuery cql;
  Provenance provenance;

  std::size_t path_length() const {
    std::size_t n = 0;
    for (const auto& p : provenance.paths) n = std::max(n, p.hops.size());
    return n;
  }
};

// Receives the time spent in each stage; stages run once per candidate are
// reported once per candidate.
using StageObserver = std::function<void(Stage, std::chrono::nanoseconds)>;

namespace detail {

template <class F>
auto timed(const StageObserver& observer, Stage stage, F&& f) {
  if (!observer) return f();
  auto start = std::chrono::steady_clock::now();
  struct Report {
    const StageObserver& observer;
    Stage stage;
    std::chrono::steady_clock::time_point start;
    ~Report() { observer(stage, std::chrono::steady_clock::now() - start); }
  } report{observer, stage, start};
  return f();
}

}  // namespace detail

inline std::vector<RewriteResult> rewrite(std::string_view text, const KnowledgeBase& kb, const Options& options = {},
                                          const StageObserver& observer = {}) {
  QueryNode ast = detail::timed(observer, Stage::Parse, [&] { return parse_query(text); });
  auto candidates =
      detail::timed(observer, Stage::UmlExtract, [&] { return extract_uml(ast, kb.index, options.candidateLimit); });

  std::vector<RewriteResult> out;
  std::optional<QueryError> first_error;
  std::size_t max_nodes = options.expandPaths ? options.maxNodes : 2;

  for (auto& cand : candidates) {
    auto ex = detail::timed(observer, Stage::ValueExtract, [&] { return extract_data_values(cand.ast); });
    auto verdict = detail::timed(observer, Stage::Validate, [&] { return validate_semantics(ex.stripped, kb.index); });
    if (!verdict.ok) {
      if (!first_error) first_error.emplace(Stage::Validate, verdict.code, verdict.reason);
      continue;
    }
    std::vector<PathExpansion> expansions;
    try {
      expansions = detail::timed(observer, Stage::PathFind,
                                 [&] { return find_property_paths(ex.stripped, kb, max_nodes, options.candidateLimit); });
    } catch (const QueryError& e) {
      if (e.code() != QueryError::Code::NoPath) throw;
      if (!first_error) first_error = e;
      continue;
    }
    for (auto& expansion : expansions) {
      RewriteResult r;
      r.umlExtracted = cand.ast;
      r.stripped = ex.stripped;
      r.bindings = ex.bindings;
      r.provenance = cand.provenance;
      r.provenance.paths = expansion.paths;
      r.final = detail::timed(observer, Stage::ValueReinsert,
                              [&] { return reinsert_data_values(expansion.ast, ex.bindings); });
      r.expanded = std::move(expansion.ast);
      r.mcc = detail::timed(observer, Stage::Mcc, [&] { return to_mcc(r.final, kb); });
      r.cql = detail::timed(observer, Stage::Cql, [&] { return mcc_to_cql(r.mcc, kb.model); });
      if (auto problems = cql::validate_grammar(r.cql); !problems.empty())
        throw InvariantError("emitted CQL violates the grammar: " + problems.front());
      out.push_back(std::move(r));
      if (out.size() > options.candidateLimit)
        throw QueryError(Stage::PathFind, QueryError::Code::CandidateLimit,
                         "more than " + std::to_string(options.candidateLimit) + " candidate queries");
    }
  }

  if (out.empty()) {
    if (first_error) throw *first_error;
    throw InvariantError("rewriting produced no candidates and no error");
  }
  if (options.selection == Selection::First) {
    out.resize(1);
  } else if (options.selection == Selection::Interactive && out.size() > 1) {
    if (!options.chooser) throw Error("interactive selection needs a chooser");
    std::size_t pick = options.chooser(out);
    if (pick >= out.size()) throw Error("selection " + std::to_string(pick) + " out of range");
    RewriteResult chosen = std::move(out[pick]);
    out.clear();
    out.push_back(std::move(chosen));
  }
  return out;
}

}  // namespace onco::query
