#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "onco/onco.hpp"

namespace fs = std::filesystem;
using namespace onco;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRejected = 2, kInternal = 3 };

struct Config {
  std::string model;
  std::string thesaurus;
  std::string query;
  std::string queryFile;
  std::string suite;
  std::string out;
  std::string format;
  std::string selection = "all";
  std::size_t maxNodes = 16;
  std::size_t candidateLimit = 64;
  std::size_t repetitions = 5;
};

// Raised for bad flags or unreadable/unwritable files.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw UsageError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << content;
  if (!f) throw UsageError("cannot write " + path.string());
}

// Writes to --out when given, otherwise stdout.
void emit(const Config& cfg, const std::string& content) {
  if (cfg.out.empty()) std::cout << content;
  else write_file(cfg.out, content);
}

void require_format(const Config& cfg, std::initializer_list<std::string_view> allowed) {
  if (cfg.format.empty()) return;
  for (auto a : allowed)
    if (cfg.format == a) return;
  std::string list;
  for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw UsageError("--format " + cfg.format + " is not supported here (expected " + list + ")");
}

query::KnowledgeBase knowledge_base(const Config& cfg) {
  return query::KnowledgeBase::build(load_model_file(cfg.model), load_thesaurus_file(cfg.thesaurus));
}

// ---------------------------------------------------------------------------
// Commands

int cmd_ontogen(const Config& cfg) {
  require_format(cfg, {"axioms"});
  auto kb = knowledge_base(cfg);
  if (auto report = el_conformance_report(kb.ontology); !report.empty())
    throw InvariantError("generated ontology is not EL: " + report.front());
  fs::path dir = cfg.out.empty() ? fs::path(".") : fs::path(cfg.out);
  write_file(dir / "ontology.ofn", serialize_axioms(kb.ontology));
  write_file(dir / "module.ofn", serialize_axioms(kb.module.to_axiom_set()));
  std::cout << "ontology.ofn  " << kb.ontology.axioms.size() << " axioms\n"
            << "module.ofn    " << kb.module.concepts.size() << " concepts, " << kb.module.subsumptions.size()
            << " subsumptions\n";
  return kOk;
}

int cmd_module(const Config& cfg) {
  require_format(cfg, {"axioms"});
  auto model = load_model_file(cfg.model);
  auto thesaurus = load_thesaurus_file(cfg.thesaurus);
  check_annotations(model, thesaurus);
  auto module = modext::extract_module(modext::strip_disjoints(thesaurus), model_signature(model));
  emit(cfg, serialize_axioms(module.to_axiom_set()));
  return kOk;
}

// The inferred named hierarchy, one SubClassOf per non-trivial subsumption.
int cmd_classify(const Config& cfg) {
  require_format(cfg, {"axioms"});
  auto kb = knowledge_base(cfg);
  AxiomSet inferred;
  inferred.prefixes = kb.combined.prefixes;
  for (const auto& name : kb.index.names())
    for (const auto& sup : kb.index.subsumers(name))
      if (sup != name) inferred.axioms.push_back(SubClassOf{ClassExpr::named(name), ClassExpr::named(sup)});
  emit(cfg, serialize_axioms(inferred));
  return kOk;
}

std::string read_query(const Config& cfg) {
  if (!cfg.query.empty() && !cfg.queryFile.empty()) throw UsageError("give either --query or --query-file, not both");
  if (!cfg.query.empty()) return cfg.query;
  std::string text;
  if (!cfg.queryFile.empty()) {
    try {
      text = read_file(cfg.queryFile);
    } catch (const LoadError& e) {
      throw UsageError(e.what());
    }
  } else {
    if (cfg.selection == "interactive") throw UsageError("interactive selection reads choices from stdin; pass --query");
    std::ostringstream in;
    in << std::cin.rdbuf();
    text = in.str();
  }
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  if (text.empty()) throw UsageError("empty query");
  return text;
}

std::string describe_paths(const query::RewriteResult& r) {
  std::string out;
  for (const auto& p : r.provenance.paths) {
    out += out.empty() ? "" : "; ";
    out += p.from;
    for (const auto& h : p.hops) out += " -" + h.role + "-> " + h.range;
  }
  return out.empty() ? "(no association paths)" : out;
}

std::size_t prompt_choice(const std::vector<query::RewriteResult>& all) {
  std::cerr << all.size() << " candidate queries:\n";
  for (std::size_t i = 0; i < all.size(); ++i)
    std::cerr << "  [" << i + 1 << "] " << describe_paths(all[i]) << "\n      " << mcc::to_string(all[i].mcc) << "\n";
  for (;;) {
    std::cerr << "select [1-" << all.size() << "]: " << std::flush;
    std::string line;
    if (!std::getline(std::cin, line)) throw UsageError("no selection given");
    try {
      std::size_t used = 0;
      auto n = std::stoul(line, &used);
      if (n >= 1 && n <= all.size()) return n - 1;
    } catch (const std::exception&) {
    }
    std::cerr << "not a candidate number: " << line << "\n";
  }
}

nlohmann::ordered_json provenance_json(const std::vector<query::RewriteResult>& results, const std::string& text) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["query"] = text;
  doc["candidates"] = ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    ordered_json c;
    std::ostringstream file;
    file << "candidate_" << std::setw(3) << std::setfill('0') << i + 1 << ".xml";
    c["file"] = file.str();
    c["classes"] = ordered_json::array();
    for (const auto& k : r.provenance.classes)
      c["classes"].push_back({{"concept", k.term}, {"position", k.attribute ? "attribute" : "class"}, {"chosen", k.chosen}});
    c["paths"] = ordered_json::array();
    for (const auto& p : r.provenance.paths) {
      ordered_json hops = ordered_json::array();
      for (const auto& h : p.hops) hops.push_back({{"property", h.property}, {"role", h.role}, {"range", h.range}});
      c["paths"].push_back({{"from", p.from}, {"to", p.to}, {"hops", hops}});
    }
    c["stages"] = {
        {"umlExtract", query::to_string(r.umlExtracted)},
        {"valueExtract", query::to_string(r.stripped)},
        {"pathFind", query::to_string(r.expanded)},
        {"valueReinsert", query::to_string(r.final)},
        {"mcc", mcc::to_string(r.mcc)},
    };
    doc["candidates"].push_back(std::move(c));
  }
  return doc;
}

int cmd_rewrite(const Config& cfg) {
  require_format(cfg, {"xml"});
  auto selection = query::parse_selection(cfg.selection);
  if (!selection) throw UsageError("--selection must be all, first or interactive");
  std::string text = read_query(cfg);
  auto kb = knowledge_base(cfg);

  query::Options opts;
  opts.maxNodes = cfg.maxNodes;
  opts.candidateLimit = cfg.candidateLimit;
  opts.selection = *selection;
  opts.chooser = prompt_choice;
  auto results = query::rewrite(text, kb, opts);

  if (cfg.out.empty()) {
    for (const auto& r : results) std::cout << cql::to_xml(r.cql);
    return kOk;
  }
  fs::path dir(cfg.out);
  auto prov = provenance_json(results, text);
  for (std::size_t i = 0; i < results.size(); ++i)
    write_file(dir / prov["candidates"][i]["file"].get<std::string>(), cql::to_xml(results[i].cql));
  write_file(dir / "provenance.json", prov.dump(2) + "\n");
  std::cout << results.size() << " candidate" << (results.size() == 1 ? "" : "s") << " written to " << cfg.out << "\n";
  return kOk;
}

int cmd_metrics(const Config& cfg) {
  require_format(cfg, {"table", "csv"});
  auto pm = metrics::path_metrics(load_model_file(cfg.model), cfg.maxNodes);
  emit(cfg, cfg.format == "csv" ? metrics::to_csv(pm) : metrics::to_table(pm));
  return kOk;
}

std::vector<std::string> read_suite(const std::string& path) {
  std::string doc;
  try {
    doc = read_file(path);
  } catch (const LoadError& e) {
    throw UsageError(e.what());
  }
  std::vector<std::string> queries;
  std::istringstream in(doc);
  for (std::string line; std::getline(in, line);) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    queries.push_back(line.substr(first, last - first + 1));
  }
  if (queries.empty()) throw UsageError("query suite " + path + " is empty");
  return queries;
}

int cmd_bench(const Config& cfg) {
  require_format(cfg, {"table", "csv"});
  auto queries = read_suite(cfg.suite);
  auto kb = knowledge_base(cfg);
  query::Options opts;
  opts.maxNodes = cfg.maxNodes;
  opts.candidateLimit = cfg.candidateLimit;
  auto report = metrics::stage_timings(queries, kb, cfg.repetitions, opts);
  emit(cfg, cfg.format == "csv" ? metrics::to_csv(report) : metrics::to_table(report));
  for (const auto& row : report.rows)
    if (!row.ok) return kRejected;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Config cfg;
  CLI::App app{"Concept-level query rewriting to CQL over annotated UML models", "onco-rewriter"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  auto model_opt = [&](CLI::App* sub) { sub->add_option("--model", cfg.model, "UML model (JSON)")->required()->check(CLI::ExistingFile); };
  auto thesaurus_opt = [&](CLI::App* sub) {
    sub->add_option("--thesaurus", cfg.thesaurus, "Thesaurus (CONCEPT/SUB/DISJOINT lines)")->required()->check(CLI::ExistingFile);
  };
  auto bound = CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max());

  auto* ontogen = app.add_subcommand("ontogen", "Write ontology.ofn and module.ofn for a model");
  model_opt(ontogen);
  thesaurus_opt(ontogen);
  ontogen->add_option("--out", cfg.out, "Output directory (default: current directory)");
  ontogen->add_option("--format", cfg.format, "axioms");

  auto* module = app.add_subcommand("module", "Extract the thesaurus module for a model's signature");
  model_opt(module);
  thesaurus_opt(module);
  module->add_option("--out", cfg.out, "Output file (default: stdout)");
  module->add_option("--format", cfg.format, "axioms");

  auto* classify = app.add_subcommand("classify", "Print the inferred named class hierarchy");
  model_opt(classify);
  thesaurus_opt(classify);
  classify->add_option("--out", cfg.out, "Output file (default: stdout)");
  classify->add_option("--format", cfg.format, "axioms");

  auto* rewrite = app.add_subcommand("rewrite", "Rewrite a concept-level query into CQL");
  model_opt(rewrite);
  thesaurus_opt(rewrite);
  rewrite->add_option("--query", cfg.query, "Query text (otherwise --query-file or stdin)");
  rewrite->add_option("--query-file", cfg.queryFile, "File holding the query text");
  rewrite->add_option("--max-nodes", cfg.maxNodes, "Longest association path, in classes")->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
  rewrite->add_option("--candidate-limit", cfg.candidateLimit, "Maximum number of candidate queries")->check(bound);
  rewrite->add_option("--selection", cfg.selection, "all | first | interactive");
  rewrite->add_option("--out", cfg.out, "Output directory for candidate_NNN.xml and provenance.json (default: stdout)");
  rewrite->add_option("--format", cfg.format, "xml");

  auto* metrics_cmd = app.add_subcommand("metrics", "Path metrics of a model's association graph");
  model_opt(metrics_cmd);
  metrics_cmd->add_option("--max-nodes", cfg.maxNodes, "Longest path enumerated, in classes")->check(bound);
  metrics_cmd->add_option("--format", cfg.format, "table | csv");
  metrics_cmd->add_option("--out", cfg.out, "Output file (default: stdout)");

  auto* bench = app.add_subcommand("bench", "Per-stage rewriting times for a query suite");
  model_opt(bench);
  thesaurus_opt(bench);
  bench->add_option("--suite", cfg.suite, "One query per line; # starts a comment")->required()->check(CLI::ExistingFile);
  bench->add_option("--repetitions", cfg.repetitions, "Timed runs per query after one warm-up")->check(bound);
  bench->add_option("--max-nodes", cfg.maxNodes, "Longest association path, in classes")->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
  bench->add_option("--candidate-limit", cfg.candidateLimit, "Maximum number of candidate queries")->check(bound);
  bench->add_option("--format", cfg.format, "table | csv");
  bench->add_option("--out", cfg.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ontogen) return cmd_ontogen(cfg);
    if (*module) return cmd_module(cfg);
    if (*classify) return cmd_classify(cfg);
    if (*rewrite) return cmd_rewrite(cfg);
    if (*metrics_cmd) return cmd_metrics(cfg);
    if (*bench) return cmd_bench(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRejected;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
