#pragma once

// Path metrics over association graphs and per-stage rewriting timings.

#include <array>
#include <chrono>
#include <cstddef>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "onco/model.hpp"
#include "onco/pipeline.hpp"

namespace onco::metrics {

struct Digraph {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> adj;

  std::size_t size() const { return names.size(); }
  void add_edge(std::size_t from, std::size_t to) {
    for (auto t : adj[from])
      if (t == to) return;
    adj[from].push_back(to);
  }
};

// Classes in model order; an edge C→T for every association declared on C
// or inherited from one of its ancestors.
inline Digraph association_graph(const UmlModel& m) {
  Digraph g;
  std::map<std::string, std::size_t> id;
  for (const auto& c : m.classes) {
    id.emplace(c.name, g.names.size());
    g.names.push_back(c.name);
  }
  g.adj.resize(g.names.size());
  for (const auto& c : m.classes) {
    std::vector<std::string> owners{c.name};
    auto anc = m.ancestors(c.name);
    owners.insert(owners.end(), anc.begin(), anc.end());
    for (const auto& owner : owners)
      for (const auto& a : m.associations)
        if (a.source == owner) g.add_edge(id.at(c.name), id.at(a.target));
  }
  return g;
}

// Path lengths count classes, endpoints included. The ratios are exact
// quotients of the integer fields.
struct PathMetrics {
  std::size_t maxNodes = 16;
  std::size_t longestPath = 0;
  std::size_t journeyCount = 0;
  std::size_t pathCount = 0;
  std::size_t totalNodes = 0;

  double avgPathsPerJourney() const { return journeyCount ? double(pathCount) / double(journeyCount) : 0.0; }
  double avgNodesPerPath() const { return pathCount ? double(totalNodes) / double(pathCount) : 0.0; }

  friend bool operator==(const PathMetrics&, const PathMetrics&) = default;
};

inline PathMetrics path_metrics(const Digraph& g, std::size_t maxNodes = 16) {
  PathMetrics pm;
  pm.maxNodes = maxNodes;
  std::vector<bool> on_path(g.size(), false);
  for (std::size_t s = 0; s < g.size(); ++s) {
    std::set<std::size_t> ends;
    auto dfs = [&](auto&& self, std::size_t at, std::size_t nodes) -> void {
      if (nodes >= maxNodes) return;
      for (auto t : g.adj[at]) {
        if (on_path[t]) continue;
        ++pm.pathCount;
        pm.totalNodes += nodes + 1;
        pm.longestPath = std::max(pm.longestPath, nodes + 1);
        ends.insert(t);
        on_path[t] = true;
        self(self, t, nodes + 1);
        on_path[t] = false;
      }
    };
    on_path[s] = true;
    dfs(dfs, s, 1);
    on_path[s] = false;
    pm.journeyCount += ends.size();
  }
  return pm;
}

inline PathMetrics path_metrics(const UmlModel& m, std::size_t maxNodes = 16) {
  return path_metrics(association_graph(m), maxNodes);
}

inline std::string to_table(const PathMetrics& pm) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "maxNodes            " << pm.maxNodes << "\n";
  out << "longestPath         " << pm.longestPath << "\n";
  out << "journeyCount        " << pm.journeyCount << "\n";
  out << "pathCount           " << pm.pathCount << "\n";
  out << "avgPathsPerJourney  " << pm.avgPathsPerJourney() << "\n";
  out << "avgNodesPerPath     " << pm.avgNodesPerPath() << "\n";
  return out.str();
}

inline std::string to_csv(const PathMetrics& pm) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << "maxNodes,longestPath,journeyCount,pathCount,avgPathsPerJourney,avgNodesPerPath\n";
  out << pm.maxNodes << "," << pm.longestPath << "," << pm.journeyCount << "," << pm.pathCount << ","
      << pm.avgPathsPerJourney() << "," << pm.avgNodesPerPath() << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Timings

using StageMeans = std::array<double, query::kStages.size()>;  // microseconds

struct QueryTiming {
  std::string query;
  bool ok = true;
  std::string error;
  std::size_t pathLength = 0;
  StageMeans meanUs{};
  double endToEndUs = 0;
};

struct GroupTiming {
  std::size_t queries = 0;
  StageMeans meanUs{};
  double endToEndUs = 0;
};

struct TimingReport {
  std::size_t repetitions = 0;
  std::vector<QueryTiming> rows;
  std::map<std::size_t, GroupTiming> groups;  // by path length
};

// One discarded warm-up run, then `repetitions` timed runs per query.
inline TimingReport stage_timings(const std::vector<std::string>& queries, const query::KnowledgeBase& kb,
                                  std::size_t repetitions, query::Options options = {}) {
  using clock = std::chrono::steady_clock;
  TimingReport report;
  report.repetitions = repetitions;
  options.selection = query::Selection::First;

  // One warm-up rewrite per query, then the repetitions run round-robin so
  // that slow drift in machine load spreads evenly over the queries.
  std::vector<std::array<std::chrono::nanoseconds, query::kStages.size()>> totals(queries.size());
  std::vector<std::chrono::nanoseconds> end_to_end(queries.size());
  for (const auto& text : queries) {
    QueryTiming row;
    row.query = text;
    try {
      row.pathLength = query::rewrite(text, kb, options).front().path_length();
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  for (std::size_t r = 0; r < repetitions; ++r)
    for (std::size_t q = 0; q < queries.size(); ++q) {
      if (!report.rows[q].ok) continue;
      auto& total = totals[q];
      query::StageObserver observer = [&](query::Stage s, std::chrono::nanoseconds d) {
        total[static_cast<std::size_t>(s)] += d;
      };
      auto start = clock::now();
      query::rewrite(queries[q], kb, options, observer);
      end_to_end[q] += clock::now() - start;
    }
  double n = repetitions ? double(repetitions) : 1.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto& row = report.rows[q];
    if (!row.ok) continue;
    for (std::size_t i = 0; i < totals[q].size(); ++i) row.meanUs[i] = double(totals[q][i].count()) / 1000.0 / n;
    row.endToEndUs = double(end_to_end[q].count()) / 1000.0 / n;
  }

  for (const auto& row : report.rows) {
    if (!row.ok) continue;
    auto& g = report.groups[row.pathLength];
    ++g.queries;
    for (std::size_t i = 0; i < row.meanUs.size(); ++i) g.meanUs[i] += row.meanUs[i];
    g.endToEndUs += row.endToEndUs;
  }
  for (auto& [len, g] : report.groups) {
    for (auto& v : g.meanUs) v /= double(g.queries);
    g.endToEndUs /= double(g.queries);
  }
  return report;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string to_csv(const TimingReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "query,stage,mean_us,pathLength\n";
  for (const auto& row : r.rows) {
    if (!row.ok) continue;
    for (std::size_t i = 0; i < query::kStages.size(); ++i)
      out << detail::csv_field(row.query) << "," << query::stage_name(query::kStages[i]) << "," << row.meanUs[i]
          << "," << row.pathLength << "\n";
  }
  return out.str();
}

inline std::string to_table(const TimingReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "repetitions " << r.repetitions << " (after one warm-up run), times in microseconds\n";
  auto header = [&](const std::string& first) {
    out << std::left << std::setw(8) << first << std::right;
    for (auto s : query::kStages) out << std::setw(14) << query::stage_name(s);
    out << std::setw(14) << "total" << "\n";
  };
  header("query");
  for (std::size_t q = 0; q < r.rows.size(); ++q) {
    const auto& row = r.rows[q];
    out << std::left << std::setw(8) << ("#" + std::to_string(q + 1)) << std::right;
    if (!row.ok) {
      out << "  failed: " << row.error << "\n";
      continue;
    }
    for (double v : row.meanUs) out << std::setw(14) << v;
    out << std::setw(14) << row.endToEndUs << "\n";
  }
  header("length");
  for (const auto& [len, g] : r.groups) {
    out << std::left << std::setw(8) << len << std::right;
    for (double v : g.meanUs) out << std::setw(14) << v;
    out << std::setw(14) << g.endToEndUs << "\n";
  }
  for (std::size_t q = 0; q < r.rows.size(); ++q) out << "#" << q + 1 << " " << r.rows[q].query << "\n";
  return out.str();
}

}  // namespace onco::metrics
