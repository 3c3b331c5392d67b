#pragma once

#include <cstddef>

#include "synql/db.hpp"
#include "synql/schema.hpp"

namespace synql {

struct IntrospectOptions {
  std::size_t max_samples = 10;
  std::size_t sample_scan_rows = 1000;  // rows read by the fallback sampler
};

/// Rebuilds a SchemaGraph from the live catalog: declared tables, columns,
/// primary keys and FK constraints, plus per-column statistics (min/max
/// probes; samples from pg_stats most-common values when present, else a
/// bounded scan). Columns of empty tables carry no stats.
SchemaGraph introspect_catalog(Connection& conn, const IntrospectOptions& options = {});

}  // namespace synql
