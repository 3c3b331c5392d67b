#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synql/sql_parser.hpp"
#include "synql/traversal.hpp"

namespace synql {

enum class Topology { star, chain, fork };

inline constexpr std::array kTopologies = {Topology::star, Topology::chain, Topology::fork};

std::string_view to_string(Topology t);  // "Star", "Chain", "Fork"
std::optional<Topology> parse_topology(std::string_view name);

/// Star if every edge touches the root (zero- and one-edge graphs included),
/// Chain if each clause attaches to the table the previous clause introduced,
/// Fork otherwise.
Topology classify_join_graph(const JoinGraphSummary& summary);

JoinGraphSummary summary_of(const JoinBlueprint& blueprint);
Topology classify_blueprint(const JoinBlueprint& blueprint);

/// Shannon entropy in bits. Throws ValidationError on a negative fraction or
/// when the fractions do not sum to 1 within 1e-9.
double entropy_bits(const std::vector<double>& fractions);

struct DiversityReport {
  std::array<std::uint64_t, 3> counts{};  // indexed by Topology
  std::array<double, 3> fractions{};
  std::uint64_t single_table = 0;        // zero-join queries, already inside Star
  std::uint64_t total = 0;
  double entropy_bits = 0.0;

  std::uint64_t count(Topology t) const { return counts[static_cast<std::size_t>(t)]; }
  double fraction(Topology t) const { return fractions[static_cast<std::size_t>(t)]; }
};

class DiversityAccumulator {
 public:
  void add(Topology t, bool single_table);
  void merge(const DiversityAccumulator& other);
  std::uint64_t total() const { return total_; }

  /// Throws ValidationError when nothing was added.
  DiversityReport report() const;

 private:
  std::array<std::uint64_t, 3> counts_{};
  std::uint64_t single_table_ = 0;
  std::uint64_t total_ = 0;
};

std::string format_report_text(const DiversityReport& report);
std::string format_report_csv(const DiversityReport& report);

}  // namespace synql
