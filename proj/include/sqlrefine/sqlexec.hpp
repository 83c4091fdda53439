#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqlrefine/clock.hpp"

namespace sqlrefine {

/// One result cell. SQLite's five storage classes.
struct Cell {
  enum class Kind { null, integer, real, text, blob };

  Kind kind = Kind::null;
  std::int64_t int_value = 0;
  double real_value = 0.0;
  std::string text_value;  // also holds blob bytes

  static Cell null_cell() { return {}; }
  static Cell of_int(std::int64_t v);
  static Cell of_real(double v);
  static Cell of_text(std::string v);
  static Cell of_blob(std::string v);
};

using Row = std::vector<Cell>;

/// Result of running one statement: either rows or an error, never both.
struct ExecutionOutcome {
  std::vector<std::string> column_names;
  std::vector<Row> rows;
  std::optional<std::string> error;
  double duration_s = 0.0;

  bool ok() const { return !error.has_value(); }
};

/// Runs one read-only statement against a SQLite database file. Only a
/// single SELECT or WITH statement is accepted; anything else (and any
/// write attempt) becomes an error outcome. A statement still running after
/// timeout_s wall seconds is aborted with a "timeout after Ns" error. The
/// clock only measures the reported duration.
ExecutionOutcome execute_sql(const std::string& db_path, const std::string& sql,
                             double timeout_s, Clock& clock);

inline ExecutionOutcome execute_sql(const std::string& db_path, const std::string& sql,
                                    double timeout_s = 30.0) {
  SteadyClock clock;
  return execute_sql(db_path, sql, timeout_s, clock);
}

struct ComparisonResult {
  bool match = false;
  std::string reason;  // set when match is false
};

/// Result-set equivalence for scoring. Numeric cells compare with relative
/// tolerance 1e-6 (integers and reals interchangeably), text and blob bytes
/// exactly, NULL equals NULL. Row order is ignored unless the gold SQL
/// contains ORDER BY. A failed predicted execution never matches.
ComparisonResult compare_outcomes(const ExecutionOutcome& predicted,
                                  const ExecutionOutcome& gold,
                                  const std::string& gold_sql);

bool cells_equal(const Cell& a, const Cell& b);

/// Per-question inputs for the benchmark metrics.
struct MetricRecord {
  bool match = false;
  std::string difficulty;     // empty counts as "unknown"
  double gold_duration_s = 0.0;
  double predicted_duration_s = 0.0;
};

struct ExBreakdown {
  double overall = 0.0;  // percent
  std::vector<std::pair<std::string, double>> by_difficulty;  // insertion order
};

/// Percentage of records whose results matched, overall and per difficulty.
/// Throws MetricError on empty input.
ExBreakdown ex_metric(const std::vector<MetricRecord>& records);

/// Mean over records of match * sqrt(gold_duration / predicted_duration),
/// scaled to percent. Durations clamp to a 1 microsecond floor. Throws
/// MetricError on empty input.
double ves_metric(const std::vector<MetricRecord>& records);

}  // namespace sqlrefine
