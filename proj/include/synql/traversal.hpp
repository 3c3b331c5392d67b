#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "synql/rng.hpp"
#include "synql/schema.hpp"

namespace synql {

struct TraversalParams {
  double alpha_shape = 0.5;  // 1 -> star, 0 -> chain
  int k_join = 3;

  void validate() const;  // throws ConfigError
};

/// An FK edge reachable from the visited set: `anchor` is already visited,
/// `new_table` is not.
struct CandidateEdge {
  std::size_t edge = 0;  // index into SchemaGraph::edges()
  std::size_t anchor = 0;
  std::size_t new_table = 0;
};

/// Everything needed to recompute the weights of one expansion step.
struct ExpansionStep {
  std::vector<CandidateEdge> candidates;
  std::vector<std::size_t> anchor_distances;
  std::size_t d_max = 0;
  std::vector<double> weights;
  std::size_t chosen = 0;  // index into candidates; == size() when expansion stopped
};

/// Join tree rooted at `root`. used_tables[i+1] is the table added by
/// join_edges[i], and anchors[i] is the already-visited table that edge
/// attached to.
struct JoinBlueprint {
  std::string root;
  std::vector<std::string> used_tables;
  std::vector<FkEdge> join_edges;
  std::vector<std::string> anchors;
  int sampled_depth = 0;
};

/// Eq. 1 selection weight.
double edge_weight(std::size_t anchor, std::size_t root, std::size_t anchor_distance,
                   std::size_t d_max, double alpha_shape);

/// Edges with exactly one endpoint in `used` (by table index), in schema edge
/// order.
std::vector<CandidateEdge> candidate_edges(const SchemaGraph& graph,
                                           const std::vector<std::size_t>& used);

/// Name-based convenience overload; throws ValidationError on unknown tables.
std::vector<CandidateEdge> candidate_edges(const SchemaGraph& graph,
                                           const std::vector<std::string>& used);

/// Phase I. Draw order: root, sampled depth, then one uniform01 per step.
/// When `trace` is non-null every step (including a terminal one that stopped
/// expansion) is appended to it.
JoinBlueprint build_blueprint(const SchemaGraph& graph, const TraversalParams& params,
                              RandomStream& rng, std::vector<ExpansionStep>* trace = nullptr);

/// Throws InternalError when a blueprint breaks the tree invariants.
void check_blueprint(const JoinBlueprint& blueprint, const SchemaGraph& graph, int k_join);

}  // namespace synql
