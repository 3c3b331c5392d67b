#include "synql/traversal.hpp"

#include <algorithm>
#include <numeric>

#include "synql/error.hpp"

namespace synql {

void TraversalParams::validate() const {
  if (!(alpha_shape >= 0.0 && alpha_shape <= 1.0)) {
    throw ConfigError("alpha_shape = " + format_double(alpha_shape) + " is out of range [0, 1]");
  }
  if (k_join < 1) {
    throw ConfigError("k_join = " + std::to_string(k_join) + " must be >= 1");
  }
}

double edge_weight(std::size_t anchor, std::size_t root, std::size_t anchor_distance,
                   std::size_t d_max, double alpha_shape) {
  if (d_max == 0) {
    return 1.0;
  }
  const double indicator = anchor == root ? 1.0 : 0.0;
  return alpha_shape * indicator +
         (1.0 - alpha_shape) * (static_cast<double>(anchor_distance) / static_cast<double>(d_max));
}

std::vector<CandidateEdge> candidate_edges(const SchemaGraph& graph,
                                           const std::vector<std::size_t>& used) {
  std::vector<bool> in_used(graph.table_count(), false);
  for (std::size_t t : used) {
    in_used.at(t) = true;
  }
  std::vector<CandidateEdge> out;
  for (std::size_t e = 0; e < graph.edges().size(); ++e) {
    const std::size_t child = graph.edge_child(e);
    const std::size_t parent = graph.edge_parent(e);
    if (in_used[child] != in_used[parent]) {
      out.push_back(in_used[child] ? CandidateEdge{e, child, parent} : CandidateEdge{e, parent, child});
    }
  }
  return out;
}

std::vector<CandidateEdge> candidate_edges(const SchemaGraph& graph,
                                           const std::vector<std::string>& used) {
  std::vector<std::size_t> idx;
  for (const auto& name : used) {
    auto i = graph.table_index(name);
    if (!i) {
      throw ValidationError("unknown table '" + name + "'");
    }
    idx.push_back(*i);
  }
  return candidate_edges(graph, idx);
}

JoinBlueprint build_blueprint(const SchemaGraph& graph, const TraversalParams& params,
                              RandomStream& rng, std::vector<ExpansionStep>* trace) {
  params.validate();
  if (graph.empty()) {
    throw ConfigError("cannot build a join blueprint over an empty schema");
  }
  const std::size_t root = rng.uniform_below(graph.table_count());
  JoinBlueprint bp;
  bp.root = graph.table_at(root).name;
  bp.used_tables.push_back(bp.root);
  bp.sampled_depth = static_cast<int>(rng.uniform_int(1, params.k_join));

  std::vector<std::size_t> used{root};
  while (static_cast<int>(bp.join_edges.size()) < bp.sampled_depth) {
    ExpansionStep step;
    step.candidates = candidate_edges(graph, used);
    if (step.candidates.empty()) {
      break;  // schema exhausted
    }
    for (std::size_t t : used) {
      step.d_max = std::max(step.d_max, graph.distance(t, root));
    }
    double total = 0.0;
    for (const auto& c : step.candidates) {
      const std::size_t d = graph.distance(c.anchor, root);
      step.anchor_distances.push_back(d);
      step.weights.push_back(edge_weight(c.anchor, root, d, step.d_max, params.alpha_shape));
      total += step.weights.back();
    }
    if (total <= 0.0) {
      // Every candidate has zero weight: with alpha = 1 only root-anchored
      // edges are admissible, with alpha = 0 only non-root anchors. Neither
      // is left, so expansion ends as if the schema were exhausted.
      step.chosen = step.candidates.size();
      if (trace) {
        trace->push_back(std::move(step));
      }
      break;
    }
    // Cumulative-sum inversion in candidate (schema) order.
    const double target = rng.uniform01() * total;
    double acc = 0.0;
    step.chosen = step.candidates.size() - 1;
    for (std::size_t i = 0; i < step.weights.size(); ++i) {
      acc += step.weights[i];
      if (target < acc && step.weights[i] > 0.0) {
        step.chosen = i;
        break;
      }
    }
    // Guard rounding at the top end: the last positive-weight candidate.
    while (step.weights[step.chosen] <= 0.0 && step.chosen > 0) {
      --step.chosen;
    }
    const CandidateEdge& pick = step.candidates[step.chosen];
    bp.join_edges.push_back(graph.edges()[pick.edge]);
    bp.anchors.push_back(graph.table_at(pick.anchor).name);
    bp.used_tables.push_back(graph.table_at(pick.new_table).name);
    used.push_back(pick.new_table);
    if (trace) {
      trace->push_back(std::move(step));
    }
  }
  return bp;
}

void check_blueprint(const JoinBlueprint& bp, const SchemaGraph& graph, int k_join) {
  const auto fail = [&](const std::string& why) {
    throw InternalError("blueprint rooted at '" + bp.root + "': " + why);
  };
  if (bp.used_tables.empty() || bp.used_tables.front() != bp.root) {
    fail("root is not the first used table");
  }
  if (bp.used_tables.size() != bp.join_edges.size() + 1 || bp.anchors.size() != bp.join_edges.size()) {
    fail("used_tables/join_edges sizes break the tree property");
  }
  if (static_cast<int>(bp.join_edges.size()) > bp.sampled_depth || bp.sampled_depth > k_join ||
      bp.sampled_depth < 1) {
    fail("join count exceeds sampled depth or depth out of [1, k_join]");
  }
  for (std::size_t i = 0; i < bp.used_tables.size(); ++i) {
    if (!graph.find_table(bp.used_tables[i])) {
      fail("unknown table '" + bp.used_tables[i] + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (bp.used_tables[i] == bp.used_tables[j]) {
        fail("table '" + bp.used_tables[i] + "' visited twice");
      }
    }
  }
  for (std::size_t i = 0; i < bp.join_edges.size(); ++i) {
    const FkEdge& e = bp.join_edges[i];
    const std::string& added = bp.used_tables[i + 1];
    const std::string& anchor = bp.anchors[i];
    if (!e.connects(anchor, added)) {
      fail("edge " + std::to_string(i) + " does not connect its anchor to the added table");
    }
    const auto prior_end = bp.used_tables.begin() + static_cast<std::ptrdiff_t>(i + 1);
    if (std::find(bp.used_tables.begin(), prior_end, anchor) == prior_end) {
      fail("edge " + std::to_string(i) + " anchor was not visited before");
    }
    if (std::find(graph.edges().begin(), graph.edges().end(), e) == graph.edges().end()) {
      fail("edge " + std::to_string(i) + " is not a schema FK edge");
    }
  }
}

}  // namespace synql
