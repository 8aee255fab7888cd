#include <gtest/gtest.h>

#include <set>
#include <string>
#include <utility>

#include "onco/modext.hpp"
#include "onco/reasoner.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace onco;

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

ThesaurusAxiomSet stripped(const std::string& doc) { return modext::strip_disjoints(load_thesaurus(doc)); }

}  // namespace

TEST(StripDisjoints, Examples) {
  auto s = stripped("CONCEPT A\nCONCEPT B\nCONCEPT C\nSUB A B\nDISJOINT B C\n");
  EXPECT_EQ(s.subsumptions, (Pairs{{"A", "B"}}));
  EXPECT_EQ(s.concepts, (std::set<std::string>{"A", "B", "C"}));
  EXPECT_TRUE(s.disjointsRemoved);

  auto only_disjoint = stripped("CONCEPT A\nCONCEPT B\nDISJOINT A B\n");
  EXPECT_TRUE(only_disjoint.subsumptions.empty());
  EXPECT_EQ(only_disjoint.concepts.size(), 2u);

  auto empty = stripped("");
  EXPECT_TRUE(empty.concepts.empty());
  EXPECT_TRUE(empty.subsumptions.empty());
}

TEST(StripDisjoints, KeepsEverySubsumption) {
  gen::Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = gen::random_thesaurus(rng, rng.between(1, 30), rng.between(0, 60));
    auto s = modext::strip_disjoints(t);
    using Edges = std::set<std::pair<std::string, std::string>>;
    EXPECT_EQ(Edges(s.subsumptions.begin(), s.subsumptions.end()), t.subsumptions);
    EXPECT_EQ(s.concepts, t.concepts);
    for (const auto& ax : s.to_axiom_set().axioms)
      EXPECT_TRUE(std::holds_alternative<Declaration>(ax) || std::holds_alternative<SubClassOf>(ax));
  }
}

TEST(ExtractModule, Chain) {
  auto t = stripped("CONCEPT A\nCONCEPT B\nCONCEPT C\nCONCEPT D\nCONCEPT E\nSUB A B\nSUB B C\nSUB D E\n");
  auto m = modext::extract_module(t, {"A"});
  EXPECT_EQ(m.subsumptions, (Pairs{{"A", "B"}, {"B", "C"}}));
  EXPECT_EQ(m.concepts, (std::set<std::string>{"A", "B", "C"}));
}

TEST(ExtractModule, EdgeCases) {
  auto t = stripped("CONCEPT A\nCONCEPT B\nSUB A B\n");
  auto none = modext::extract_module(t, {});
  EXPECT_TRUE(none.concepts.empty());
  EXPECT_TRUE(none.subsumptions.empty());
  auto top = modext::extract_module(t, {"B"});
  EXPECT_EQ(top.concepts, std::set<std::string>{"B"});
  EXPECT_TRUE(top.subsumptions.empty());
  auto unknown = modext::extract_module(t, {"Z"});
  EXPECT_TRUE(unknown.concepts.empty());
  auto whole = modext::extract_module(t, {"A", "B"});
  EXPECT_EQ(whole.subsumptions, t.subsumptions);
}

TEST(ExtractModule, CabioSignature) {
  auto t = modext::strip_disjoints(load_thesaurus_file(std::string(ONCO_FIXTURES) + "/ncit_fragment.txt"));
  auto sig = model_signature(load_model_file(std::string(ONCO_FIXTURES) + "/cabio_fragment.json"));
  auto m = modext::extract_module(t, sig);
  EXPECT_TRUE(m.concepts.count("Identifier"));  // Gene_Symbol ⊑ Name ⊑ Identifier
  EXPECT_TRUE(m.concepts.count("Genetic_Variation"));
  EXPECT_FALSE(m.concepts.count("Specimen"));
  EXPECT_TRUE(m.concepts.count("Position"));
  EXPECT_FALSE(m.concepts.count("Anatomic_Site"));  // below Location, not above anything used
}

TEST(ExtractModule, Properties) {
  gen::Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = gen::random_thesaurus(rng, rng.between(2, 25), rng.between(0, 50));
    auto s = modext::strip_disjoints(t);
    auto sigma = gen::random_signature(rng, t, 0.2);
    auto m = modext::extract_module(s, sigma);

    // Entailments among Σ are preserved, checked against a closure of the full thesaurus.
    auto full = oracle::subsumption_closure(s.concepts, s.subsumptions);
    auto local = oracle::subsumption_closure(m.concepts, m.subsumptions);
    for (const auto& a : sigma)
      for (const auto& b : s.concepts)
        EXPECT_EQ(full.count({a, b}) > 0, local.count({a, b}) > 0) << a << " ⊑ " << b;

    // The same answers from the EL reasoner on the rendered module.
    auto index = reasoner::classify(m.to_axiom_set());
    for (const auto& a : sigma)
      for (const auto& b : m.concepts)
        EXPECT_EQ(index.entails("n:" + a, "n:" + b), full.count({a, b}) > 0);

    // Idempotent.
    EXPECT_EQ(modext::extract_module(m, sigma), m);
    EXPECT_EQ(modext::extract_module(s, m.concepts), m);

    // Monotone in Σ.
    auto bigger = sigma;
    for (const auto& c : gen::random_signature(rng, t, 0.2)) bigger.insert(c);
    auto mb = modext::extract_module(s, bigger);
    for (const auto& ax : m.subsumptions)
      EXPECT_NE(std::find(mb.subsumptions.begin(), mb.subsumptions.end(), ax), mb.subsumptions.end());

    // Each kept axiom's left side lies in the module signature and nothing else qualifies.
    for (const auto& ax : s.subsumptions) {
      bool kept = std::find(m.subsumptions.begin(), m.subsumptions.end(), ax) != m.subsumptions.end();
      EXPECT_EQ(kept, m.concepts.count(ax.first) > 0);
    }
  }
}
