#include <gtest/gtest.h>

#include <functional>
#include <set>
#include <string>

#include "onco/cql_xml.hpp"
#include "onco/pipeline.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace onco;
using namespace onco::query;

namespace {

std::string fixture(const std::string& name) { return std::string(ONCO_FIXTURES) + "/" + name; }

const KnowledgeBase& cabio() {
  static const auto kb = KnowledgeBase::build(load_model_file(fixture("cabio_fragment.json")),
                                              load_thesaurus_file(fixture("ncit_fragment.txt")));
  return kb;
}

const KnowledgeBase& diamond() {
  static const auto kb = KnowledgeBase::build(load_model_file(fixture("diamond.json")),
                                              load_thesaurus_file(fixture("diamond_thesaurus.txt")));
  return kb;
}

const KnowledgeBase& catissue() {
  static const auto kb = KnowledgeBase::build(load_model_file(fixture("catissue_fragment.json")),
                                              load_thesaurus_file(fixture("ncit_fragment.txt")));
  return kb;
}

const char* kQueryC =
    "Single_Nucleotide_Polymorphism and hasAssociation some (Gene and hasAttribute some (Gene_Symbol and hasValue "
    "value \"TGFB1\"))";

QueryError error_of(const std::string& text, const KnowledgeBase& kb, Options opts = {}) {
  try {
    rewrite(text, kb, opts);
  } catch (const QueryError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for " << text;
  return QueryError(Stage::Parse, QueryError::Code::Syntax, "none");
}

QueryError parse_error(const std::string& text) {
  try {
    parse_query(text);
  } catch (const QueryError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for " << text;
  return QueryError(Stage::Parse, QueryError::Code::Syntax, "none");
}

}  // namespace

// ---------------------------------------------------------------------------
// Parsing

TEST(Parse, Examples) {
  EXPECT_EQ(parse_query("Specimen"), QueryNode::concept_ref("Specimen"));
  auto b = parse_query("Gene and hasAttribute some (Gene_Symbol and hasValue value \"BRCA%\")");
  auto expected = QueryNode::conj(
      {QueryNode::concept_ref("Gene"),
       QueryNode::has_attribute(QueryNode::conj({QueryNode::concept_ref("Gene_Symbol"), QueryNode::value("BRCA%")}))});
  EXPECT_EQ(b, expected);
  EXPECT_EQ(to_string(b), "Gene and hasAttribute some (Gene_Symbol and hasValue value \"BRCA%\")");
  EXPECT_EQ(parse_query("n:Gene"), QueryNode::concept_ref("Gene"));
  EXPECT_EQ(parse_query("((Gene))"), QueryNode::concept_ref("Gene"));
  EXPECT_EQ(parse_query("c:Gene").kind, QueryNode::Kind::UmlClassRef);
  EXPECT_EQ(parse_query("c:Gene and hasAttribute some c:Gene_symbol").children[1].filler().kind,
            QueryNode::Kind::UmlAttributeRef);
  auto escaped = parse_query(R"(A and hasAttribute some (B and hasValue value "q\"t"))");
  EXPECT_EQ(escaped.children[1].filler().children[1].name, "q\"t");
}

TEST(Parse, Errors) {
  auto e = parse_error("and and");
  EXPECT_EQ(e.code(), QueryError::Code::Syntax);
  EXPECT_EQ(e.stage(), Stage::Parse);
  EXPECT_NE(std::string(e.what()).find("offset 0"), std::string::npos) << e.what();

  EXPECT_EQ(parse_error("Gene or Chromosome").code(), QueryError::Code::UnknownKeyword);
  EXPECT_NE(std::string(parse_error("Gene or Chromosome").what()).find("offset 5"), std::string::npos);
  EXPECT_EQ(parse_error("not Gene").code(), QueryError::Code::UnknownKeyword);
  EXPECT_EQ(parse_error("").code(), QueryError::Code::Syntax);
  EXPECT_EQ(parse_error("(Gene").code(), QueryError::Code::Syntax);
  EXPECT_EQ(parse_error("Gene and hasValue value \"x").code(), QueryError::Code::Syntax);
  EXPECT_EQ(parse_error("hasAssociation Gene").code(), QueryError::Code::Syntax);
  EXPECT_EQ(parse_error("Gene and hasValue value \"x\"").code(), QueryError::Code::Structure);
  EXPECT_EQ(parse_error("Gene and Chromosome").code(), QueryError::Code::Structure);
  EXPECT_EQ(parse_error("Gene and hasAttribute some (A and B)").code(), QueryError::Code::Structure);
  EXPECT_EQ(parse_error("Gene and hasAttribute some (hasAssociation some A)").code(), QueryError::Code::Structure);
  EXPECT_EQ(parse_error("Gene $").code(), QueryError::Code::Syntax);
}

TEST(Parse, PrintRoundTrip) {
  gen::Rng rng(61);
  for (int trial = 0; trial < 300; ++trial) {
    auto ast = gen::random_class_expr(rng, 3);
    EXPECT_EQ(parse_query(to_string(ast)), ast) << to_string(ast);
  }
}

// ---------------------------------------------------------------------------
// Stages on the worked example

TEST(Stages, WorkedExample) {
  const auto& kb = cabio();
  auto ast = parse_query(kQueryC);
  auto candidates = extract_uml(ast, kb.index);
  ASSERT_EQ(candidates.size(), 1u);
  EXPECT_EQ(to_string(candidates[0].ast),
            "c:SNP and hasAssociation some (c:Gene and hasAttribute some (c:Gene_symbol and hasValue value \"TGFB1\"))");

  auto ex = extract_data_values(candidates[0].ast);
  EXPECT_EQ(to_string(ex.stripped), "c:SNP and hasAssociation some (c:Gene and hasAttribute some (c:Gene_symbol))");
  ASSERT_EQ(ex.bindings.size(), 1u);
  EXPECT_EQ(ex.bindings[0].literal, "TGFB1");

  EXPECT_TRUE(validate_semantics(ex.stripped, kb.index).ok);

  auto expansions = find_property_paths(ex.stripped, kb);
  ASSERT_FALSE(expansions.empty());
  EXPECT_EQ(to_string(expansions[0].ast),
            "c:SNP and hasAssociation(relativeLocationCollection) some c:GeneRelativeLocation and "
            "hasAssociation(gene) some (c:Gene and hasAttribute some (c:Gene_symbol))");
  EXPECT_EQ(to_string(expansions[0].ast, {false}),
            "c:SNP and hasAssociation some c:GeneRelativeLocation and hasAssociation some (c:Gene and hasAttribute "
            "some (c:Gene_symbol))");

  auto final = reinsert_data_values(expansions[0].ast, ex.bindings);
  EXPECT_EQ(to_string(final, {false}),
            "c:SNP and hasAssociation some c:GeneRelativeLocation and hasAssociation some (c:Gene and hasAttribute "
            "some (c:Gene_symbol and hasValue value \"TGFB1\"))");

  auto m = to_mcc(final, kb);
  EXPECT_EQ(mcc::to_string(m),
            "⊎{ s ‖ s ← SNP, r ← s.relativeLocationCollection, r ← GeneRelativeLocation, g ← r.gene, g ← Gene, "
            "g.symbol = TGFB1 }");
  EXPECT_TRUE(mcc::well_formedness(m).empty());

  auto q = mcc_to_cql(m, kb.model);
  EXPECT_EQ(q.target.name, "gov.nih.nci.cabio.domain.SNP");
  EXPECT_TRUE(cql::validate_grammar(q).empty());
}

TEST(Rewrite, QueryC) {
  auto results = rewrite(kQueryC, cabio());
  ASSERT_FALSE(results.empty());
  const char* listing = R"(<ns1:CQLQuery xmlns:ns1="http://CQL.caBIG/1/gov.nih.nci.cagrid.CQLQuery">
<ns1:Target name="gov.nih.nci.cabio.domain.SNP">
  <ns1:Association name="gov.nih.nci.cabio.domain.GeneRelativeLocation" roleName= "relativeLocationCollection">
   <ns1:Association name="gov.nih.nci.cabio.domain.Gene" roleName="gene">
    <ns1:Attribute name="symbol" predicate="EQUAL_TO" value="TGFB1"/>
   </ns1:Association>
   </ns1:Association>
</ns1:Target>
 </ns1:CQLQuery>)";
  EXPECT_TRUE(cql::equivalent_xml(cql::to_xml(results[0].cql), listing));
  EXPECT_EQ(results[0].path_length(), 2u);
  ASSERT_EQ(results[0].provenance.classes.size(), 3u);
  EXPECT_EQ(results[0].provenance.classes[0].chosen, "c:SNP");
}

TEST(Rewrite, BareTarget) {
  auto results = rewrite("Specimen", catissue());
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(mcc::to_string(results[0].mcc), "⊎{ s ‖ s ← Specimen }");
  EXPECT_EQ(results[0].cql.target.name, "edu.wustl.catissuecore.domain.Specimen");
  EXPECT_FALSE(results[0].cql.target.child.has_value());
}

TEST(Rewrite, LikeMapping) {
  auto results = rewrite("Gene and hasAttribute some (Gene_Symbol and hasValue value \"BRCA%\")", cabio());
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(mcc::to_string(results[0].mcc), "⊎{ g ‖ g ← Gene, g.symbol LIKE BRCA% }");
  ASSERT_TRUE(results[0].cql.target.child);
  const auto& attr = std::get<cql::Attribute>(**results[0].cql.target.child);
  EXPECT_EQ(attr.predicate, cql::Predicate::Like);
  EXPECT_EQ(attr.value, "BRCA%");
  EXPECT_EQ(mcc::predicate_for("a_b"), cql::Predicate::Like);
  EXPECT_EQ(mcc::predicate_for("TGFB1"), cql::Predicate::EqualTo);
}

TEST(Rewrite, AttributeWithoutValue) {
  auto results = rewrite("Gene and hasAttribute some (Gene_Symbol)", cabio());
  ASSERT_EQ(results.size(), 1u);
  const auto& attr = std::get<cql::Attribute>(**results[0].cql.target.child);
  EXPECT_EQ(attr.predicate, cql::Predicate::IsNotNull);
  EXPECT_FALSE(attr.value.has_value());
}

TEST(Rewrite, MultipleFiltersGroup) {
  auto results = rewrite(
      "Gene and hasAttribute some (Gene_Symbol and hasValue value \"A\" and hasValue value \"B%\")", cabio());
  ASSERT_EQ(results.size(), 1u);
  const auto& g = std::get<cql::Group>(**results[0].cql.target.child);
  EXPECT_EQ(g.op, cql::LogicalOp::And);
  ASSERT_EQ(g.items.size(), 2u);
  EXPECT_EQ(std::get<cql::Attribute>(g.items[0]), (cql::Attribute{"symbol", cql::Predicate::EqualTo, "A"}));
  EXPECT_EQ(std::get<cql::Attribute>(g.items[1]), (cql::Attribute{"symbol", cql::Predicate::Like, "B%"}));
  EXPECT_TRUE(cql::validate_grammar(results[0].cql).empty());
}

TEST(Rewrite, NoUmlCandidate) {
  auto e = error_of("Specimen", cabio());
  EXPECT_EQ(e.code(), QueryError::Code::NoUmlCandidate);
  EXPECT_EQ(e.stage(), Stage::UmlExtract);
  EXPECT_EQ(error_of("Unheard_Of", cabio()).code(), QueryError::Code::NoUmlCandidate);
}

TEST(Rewrite, AttributeOfWrongClass) {
  auto v = validate_semantics(parse_query("c:Chromosome and hasAttribute some c:Gene_symbol"), cabio().index);
  EXPECT_FALSE(v.ok);
  EXPECT_EQ(v.subject, "c:Chromosome");
  EXPECT_EQ(v.object, "c:Gene_symbol");
  auto e = error_of("Chromosome and hasAttribute some (Gene_Symbol)", cabio());
  EXPECT_EQ(e.stage(), Stage::Validate);
  EXPECT_EQ(e.code(), QueryError::Code::Rejected);
}

TEST(Rewrite, Unreachable) {
  auto e = error_of("Gene and hasAssociation some Single_Nucleotide_Polymorphism", cabio());
  EXPECT_EQ(e.stage(), Stage::Validate);
  EXPECT_EQ(e.code(), QueryError::Code::NoPath);
  EXPECT_NE(std::string(e.what()).find("c:Gene to c:SNP"), std::string::npos) << e.what();

  Options tight;
  tight.maxNodes = 2;
  auto capped = error_of(kQueryC, cabio(), tight);
  EXPECT_EQ(capped.stage(), Stage::PathFind);
  EXPECT_EQ(capped.code(), QueryError::Code::NoPath);
}

TEST(Rewrite, SingleBareClassValidates) {
  EXPECT_TRUE(validate_semantics(parse_query("c:Gene"), cabio().index).ok);
}

TEST(Rewrite, DiamondGivesTwoCandidates) {
  auto results = rewrite("Patient and hasAssociation some Biospecimen", diamond());
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].provenance.paths[0].hops[0].role, "enrollmentCollection");
  EXPECT_EQ(results[1].provenance.paths[0].hops[0].role, "visitCollection");
  auto oracle_paths = oracle::exhaustive_paths(diamond().model, "Patient", "Sample", 16);
  EXPECT_EQ(oracle_paths.size(), results.size());

  Options first;
  first.selection = Selection::First;
  auto one = rewrite("Patient and hasAssociation some Biospecimen", diamond(), first);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(cql::to_xml(one[0].cql), cql::to_xml(results[0].cql));

  Options pick;
  pick.selection = Selection::Interactive;
  std::size_t offered = 0;
  pick.chooser = [&](const std::vector<RewriteResult>& all) {
    offered = all.size();
    return std::size_t{1};
  };
  auto chosen = rewrite("Patient and hasAssociation some Biospecimen", diamond(), pick);
  EXPECT_EQ(offered, 2u);
  ASSERT_EQ(chosen.size(), 1u);
  EXPECT_EQ(cql::to_xml(chosen[0].cql), cql::to_xml(results[1].cql));
}

TEST(Rewrite, CandidateCountLaw) {
  // Two journeys with two and one paths.
  auto results = rewrite(
      "Patient and hasAssociation some Biospecimen and hasAssociation some (Encounter and hasAssociation some "
      "Biospecimen)",
      diamond());
  EXPECT_EQ(results.size(), 2u);
  Options limited;
  limited.candidateLimit = 1;
  EXPECT_EQ(error_of("Patient and hasAssociation some Biospecimen", diamond(), limited).code(),
            QueryError::Code::CandidateLimit);
}

TEST(Rewrite, ConceptMatchingTwoClasses) {
  UmlModel m;
  m.packagePrefix = "p";
  m.classes.push_back({"A", {}, {}, Annotation{"X", {}}});
  m.classes.push_back({"B", {}, {}, Annotation{"Y", {}}});
  m.classes.push_back({"C", {}, {}, Annotation{"Z", {}}});
  auto t = load_thesaurus("CONCEPT X\nCONCEPT Y\nCONCEPT Z\nSUB Y X\n");
  auto kb = KnowledgeBase::build(m, t);

  auto closure = oracle::subsumption_closure(t.concepts, {t.subsumptions.begin(), t.subsumptions.end()});
  std::set<std::string> expected;
  for (const auto& c : m.classes)
    if (closure.count({c.annotation->primary, "X"})) expected.insert(c.name);

  auto results = rewrite("X", kb);
  ASSERT_EQ(results.size(), 2u);
  std::set<std::string> got;
  for (const auto& r : results) got.insert(r.mcc.qualifiers.size() ? std::get<mcc::ExtentGenerator>(r.mcc.qualifiers[0]).className : "");
  EXPECT_EQ(got, expected);
  EXPECT_EQ(results[0].cql.target.name, "p.A");
  EXPECT_EQ(results[1].cql.target.name, "p.B");
}

TEST(Rewrite, StageIndependenceOnDirectEdges) {
  Options no_paths;
  no_paths.expandPaths = false;
  for (const char* q : {"Patient and hasAssociation some Encounter",
                        "Patient and hasAttribute some (Medical_Record_Number and hasValue value \"7\")",
                        "Encounter and hasAssociation some (Biospecimen and hasAttribute some (Specimen_Type))"}) {
    auto full = rewrite(q, diamond());
    auto direct = rewrite(q, diamond(), no_paths);
    ASSERT_EQ(full.size(), direct.size()) << q;
    for (std::size_t i = 0; i < full.size(); ++i) EXPECT_EQ(cql::to_xml(full[i].cql), cql::to_xml(direct[i].cql)) << q;
  }
  EXPECT_EQ(error_of("Patient and hasAssociation some Biospecimen", diamond(), no_paths).code(),
            QueryError::Code::NoPath);
}

TEST(Rewrite, Deterministic) {
  for (const auto* kb : {&cabio(), &diamond()}) {
    for (const char* q : {kQueryC, "Patient and hasAssociation some Biospecimen", "Location"}) {
      std::string a, b;
      try {
        for (const auto& r : rewrite(q, *kb)) a += cql::to_xml(r.cql) + mcc::to_string(r.mcc);
        for (const auto& r : rewrite(q, *kb)) b += cql::to_xml(r.cql) + mcc::to_string(r.mcc);
      } catch (const QueryError&) {
        continue;
      }
      EXPECT_EQ(a, b);
    }
  }
}

TEST(Rewrite, PolymorphicLocationCandidates) {
  // Location has several annotated specializations; every one reachable from Chromosome survives.
  auto results = rewrite("Chromosome and hasAssociation some Location", cabio());
  EXPECT_GE(results.size(), 2u);
  for (const auto& r : results) EXPECT_TRUE(cql::validate_grammar(r.cql).empty());
}

// ---------------------------------------------------------------------------
// Properties

TEST(Properties, ExtractReinsertRoundTrip) {
  gen::Rng rng(62);
  for (int trial = 0; trial < 500; ++trial) {
    auto ast = gen::random_class_expr(rng, 3);
    auto ex = extract_data_values(ast);
    std::function<void(const QueryNode&)> no_values = [&](const QueryNode& n) {
      EXPECT_FALSE(n.is(QueryNode::Kind::HasValueEquals));
      for (const auto& c : n.children) no_values(c);
    };
    no_values(ex.stripped);
    EXPECT_EQ(reinsert_data_values(ex.stripped, ex.bindings), ast) << to_string(ast);
  }
  EXPECT_EQ(reinsert_data_values(parse_query("c:A"), {}), parse_query("c:A"));
}

TEST(Properties, ReinsertRejectsBadAddress) {
  auto ast = parse_query("c:A and hasAttribute some c:A_x");
  try {
    reinsert_data_values(ast, {{{7}, 0, "v"}});
    FAIL();
  } catch (const QueryError& e) {
    EXPECT_EQ(e.code(), QueryError::Code::Unresolvable);
  }
  EXPECT_THROW(reinsert_data_values(ast, {{{1}, 5, "v"}}), QueryError);
}

TEST(Properties, BindingsDepthFirst) {
  auto ex = extract_data_values(parse_query(
      "c:A and hasAttribute some (c:A_x and hasValue value \"1\") and hasAssociation some (c:B and hasAttribute some "
      "(hasValue value \"2\" and c:B_y))"));
  ASSERT_EQ(ex.bindings.size(), 2u);
  EXPECT_EQ(ex.bindings[0].literal, "1");
  EXPECT_EQ(ex.bindings[1].literal, "2");
  EXPECT_EQ(ex.bindings[1].slot, 0u);
}

TEST(Properties, RandomPipelineOutputsAreSound) {
  gen::Rng rng(63);
  std::size_t emitted = 0;
  for (int trial = 0; trial < 150; ++trial) {
    auto m = gen::random_model(rng, rng.between(2, 10), rng.between(1, 14), 0.25);
    auto kb = KnowledgeBase::build(m, gen::thesaurus_for(rng, m));
    for (int q = 0; q < 4; ++q) {
      auto text = gen::random_query_text(rng, m, rng.below(m.classes.size()));
      std::vector<RewriteResult> results;
      try {
        results = rewrite(text, kb);
      } catch (const QueryError& e) {
        EXPECT_TRUE(e.code() == QueryError::Code::CandidateLimit || e.code() == QueryError::Code::NoPath ||
                    e.code() == QueryError::Code::Rejected)
            << text << ": " << e.what();
        continue;
      }
      for (const auto& r : results) {
        ++emitted;
        ASSERT_TRUE(cql::validate_grammar(r.cql).empty());
        EXPECT_EQ(cql::parse_xml(cql::to_xml(r.cql)), r.cql);
        EXPECT_TRUE(mcc::well_formedness(r.mcc).empty());
        // Each association chain follows model edges, inherited ones included.
        for (const auto& p : r.provenance.paths) {
          std::string at = ontogen::local_name(p.from);
          for (const auto& hop : p.hops) {
            const auto* a = m.find_association(at, hop.role);
            ASSERT_NE(a, nullptr) << at << "." << hop.role;
            EXPECT_EQ(ontogen::class_iri(a->target), hop.range);
            at = a->target;
          }
        }
      }
    }
  }
  EXPECT_GT(emitted, 200u);
}
