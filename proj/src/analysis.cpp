#include "synql/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "synql/error.hpp"
#include "synql/literal.hpp"

namespace synql {

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::star:
      return "Star";
    case Topology::chain:
      return "Chain";
    case Topology::fork:
      return "Fork";
  }
  return "?";
}

std::optional<Topology> parse_topology(std::string_view name) {
  for (Topology t : kTopologies) {
    if (to_string(t) == name) {
      return t;
    }
  }
  return std::nullopt;
}

Topology classify_join_graph(const JoinGraphSummary& s) {
  const auto touches = [](const std::pair<std::string, std::string>& e, const std::string& t) {
    return e.first == t || e.second == t;
  };
  bool star = true;
  for (const auto& e : s.edges) {
    star = star && touches(e, s.root);
  }
  if (star) {
    return Topology::star;
  }
  // Which endpoint each clause introduced: the one not seen before.
  std::set<std::string> seen{s.root};
  std::string previous = s.root;
  bool chain = true;
  for (const auto& e : s.edges) {
    chain = chain && touches(e, previous);
    const std::string& added = seen.count(e.second) ? e.first : e.second;
    seen.insert(e.first);
    seen.insert(e.second);
    previous = added;
  }
  return chain ? Topology::chain : Topology::fork;
}

JoinGraphSummary summary_of(const JoinBlueprint& bp) {
  JoinGraphSummary s;
  s.root = bp.root;
  for (std::size_t i = 0; i < bp.join_edges.size(); ++i) {
    s.edges.emplace_back(bp.anchors.at(i), bp.used_tables.at(i + 1));
  }
  return s;
}

Topology classify_blueprint(const JoinBlueprint& bp) { return classify_join_graph(summary_of(bp)); }

double entropy_bits(const std::vector<double>& fractions) {
  double sum = 0.0;
  for (double p : fractions) {
    if (!(p >= 0.0)) {
      throw ValidationError("entropy: fraction " + format_double(p) + " is negative");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw ValidationError("entropy: fractions sum to " + format_double(sum) + ", expected 1");
  }
  double h = 0.0;
  for (double p : fractions) {
    if (p > 0.0) {
      h -= p * std::log2(p);
    }
  }
  return h;
}

void DiversityAccumulator::add(Topology t, bool single_table) {
  ++counts_[static_cast<std::size_t>(t)];
  if (single_table) {
    ++single_table_;
  }
  ++total_;
}

void DiversityAccumulator::merge(const DiversityAccumulator& other) {
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    counts_[i] += other.counts_[i];
  }
  single_table_ += other.single_table_;
  total_ += other.total_;
}

DiversityReport DiversityAccumulator::report() const {
  if (total_ == 0) {
    throw ValidationError("diversity report needs at least one query");
  }
  DiversityReport r;
  r.counts = counts_;
  r.single_table = single_table_;
  r.total = total_;
  std::vector<double> fractions;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    r.fractions[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
    fractions.push_back(r.fractions[i]);
  }
  r.entropy_bits = entropy_bits(fractions);
  return r;
}

std::string format_report_text(const DiversityReport& r) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %10s %9s\n", "topology", "count", "percent");
  out += line;
  for (Topology t : kTopologies) {
    std::snprintf(line, sizeof line, "%-10s %10llu %8.2f%%\n", std::string(to_string(t)).c_str(),
                  static_cast<unsigned long long>(r.count(t)), 100.0 * r.fraction(t));
    out += line;
  }
  std::snprintf(line, sizeof line, "%-10s %10llu\n", "total", static_cast<unsigned long long>(r.total));
  out += line;
  std::snprintf(line, sizeof line, "single-table queries (counted as Star): %llu\n",
                static_cast<unsigned long long>(r.single_table));
  out += line;
  std::snprintf(line, sizeof line, "entropy: %.4f bits (max %.4f)\n", r.entropy_bits, std::log2(3.0));
  out += line;
  return out;
}

std::string format_report_csv(const DiversityReport& r) {
  std::string out = "topology,count,fraction\n";
  char line[128];
  for (Topology t : kTopologies) {
    std::snprintf(line, sizeof line, "%s,%llu,%.6f\n", std::string(to_string(t)).c_str(),
                  static_cast<unsigned long long>(r.count(t)), r.fraction(t));
    out += line;
  }
  std::snprintf(line, sizeof line, "single_table,%llu,%.6f\n",
                static_cast<unsigned long long>(r.single_table),
                static_cast<double>(r.single_table) / static_cast<double>(r.total));
  out += line;
  std::snprintf(line, sizeof line, "entropy_bits,,%.6f\n", r.entropy_bits);
  out += line;
  return out;
}

}  // namespace synql
