#include "sqlrefine/sqlexec.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>

#include "sqlrefine/errors.hpp"
#include "sqlite_util.hpp"

namespace sqlrefine {

Cell Cell::of_int(std::int64_t v) {
  Cell c;
  c.kind = Kind::integer;
  c.int_value = v;
  return c;
}

Cell Cell::of_real(double v) {
  Cell c;
  c.kind = Kind::real;
  c.real_value = v;
  return c;
}

Cell Cell::of_text(std::string v) {
  Cell c;
  c.kind = Kind::text;
  c.text_value = std::move(v);
  return c;
}

Cell Cell::of_blob(std::string v) {
  Cell c;
  c.kind = Kind::blob;
  c.text_value = std::move(v);
  return c;
}

namespace {

/// First SQL keyword, skipping whitespace and both comment styles.
std::string leading_keyword(const std::string& sql) {
  std::size_t i = 0;
  while (i < sql.size()) {
    unsigned char c = static_cast<unsigned char>(sql[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (sql.compare(i, 2, "--") == 0) {
      while (i < sql.size() && sql[i] != '\n') ++i;
    } else if (sql.compare(i, 2, "/*") == 0) {
      std::size_t end = sql.find("*/", i + 2);
      if (end == std::string::npos) return {};
      i = end + 2;
    } else {
      break;
    }
  }
  std::string word;
  while (i < sql.size() && (std::isalpha(static_cast<unsigned char>(sql[i])) != 0)) {
    word += static_cast<char>(std::toupper(static_cast<unsigned char>(sql[i])));
    ++i;
  }
  return word;
}

bool tail_is_blank(const char* tail) {
  if (!tail) return true;
  std::string rest(tail);
  std::size_t i = 0;
  while (i < rest.size()) {
    unsigned char c = static_cast<unsigned char>(rest[i]);
    if (std::isspace(c) || rest[i] == ';') {
      ++i;
    } else if (rest.compare(i, 2, "--") == 0) {
      while (i < rest.size() && rest[i] != '\n') ++i;
    } else if (rest.compare(i, 2, "/*") == 0) {
      std::size_t end = rest.find("*/", i + 2);
      if (end == std::string::npos) return false;
      i = end + 2;
    } else {
      return false;
    }
  }
  return true;
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", s);
  return buf;
}

struct Deadline {
  std::chrono::steady_clock::time_point at;
  bool expired = false;
};

int progress_callback(void* ctx) {
  auto* deadline = static_cast<Deadline*>(ctx);
  if (std::chrono::steady_clock::now() >= deadline->at) {
    deadline->expired = true;
    return 1;  // abort the statement
  }
  return 0;
}

Cell read_cell(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_INTEGER:
      return Cell::of_int(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT:
      return Cell::of_real(sqlite3_column_double(stmt, col));
    case SQLITE_TEXT: {
      const unsigned char* p = sqlite3_column_text(stmt, col);
      int n = sqlite3_column_bytes(stmt, col);
      return Cell::of_text(std::string(reinterpret_cast<const char*>(p),
                                       static_cast<std::size_t>(n)));
    }
    case SQLITE_BLOB: {
      const void* p = sqlite3_column_blob(stmt, col);
      int n = sqlite3_column_bytes(stmt, col);
      return Cell::of_blob(std::string(static_cast<const char*>(p ? p : ""),
                                       static_cast<std::size_t>(n)));
    }
    default:
      return Cell::null_cell();
  }
}

}  // namespace

ExecutionOutcome execute_sql(const std::string& db_path, const std::string& sql,
                             double timeout_s, Clock& clock) {
  ExecutionOutcome out;
  double start = clock.now_s();
  auto finish = [&](std::optional<std::string> error) {
    out.duration_s = clock.now_s() - start;
    if (error) {
      out.error = std::move(error);
      out.rows.clear();
      out.column_names.clear();
    }
    return out;
  };

  std::string keyword = leading_keyword(sql);
  if (keyword != "SELECT" && keyword != "WITH") {
    return finish("only read-only SELECT statements are allowed, got '" +
                  (keyword.empty() ? std::string("<none>") : keyword) + "'");
  }

  sqlite3* raw = nullptr;
  int rc = sqlite3_open_v2(db_path.c_str(), &raw, SQLITE_OPEN_READONLY, nullptr);
  detail::DbHandle db(raw);
  if (rc != SQLITE_OK) {
    std::string msg = raw ? sqlite3_errmsg(raw) : "out of memory";
    return finish("cannot open database '" + db_path + "': " + msg);
  }
  sqlite3_exec(db.get(), "PRAGMA query_only=ON", nullptr, nullptr, nullptr);

  Deadline deadline{std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(timeout_s))};
  sqlite3_progress_handler(db.get(), 1000, progress_callback, &deadline);

  sqlite3_stmt* stmt_raw = nullptr;
  const char* tail = nullptr;
  rc = sqlite3_prepare_v2(db.get(), sql.c_str(), -1, &stmt_raw, &tail);
  detail::StmtHandle stmt(stmt_raw);
  if (rc != SQLITE_OK) {
    return finish(std::string(sqlite3_errmsg(db.get())));
  }
  if (!stmt) {
    return finish("statement is empty");
  }
  if (!tail_is_blank(tail)) {
    return finish("only a single statement is allowed");
  }

  int columns = sqlite3_column_count(stmt.get());
  for (int i = 0; i < columns; ++i) {
    const char* name = sqlite3_column_name(stmt.get(), i);
    out.column_names.push_back(name ? name : "");
  }

  while (true) {
    rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_ROW) {
      Row row;
      row.reserve(static_cast<std::size_t>(columns));
      for (int i = 0; i < columns; ++i) row.push_back(read_cell(stmt.get(), i));
      out.rows.push_back(std::move(row));
      continue;
    }
    if (rc == SQLITE_DONE) break;
    if (deadline.expired) {
      return finish("timeout after " + format_seconds(timeout_s) + "s");
    }
    return finish(std::string(sqlite3_errmsg(db.get())));
  }
  return finish(std::nullopt);
}

namespace {

bool is_numeric(const Cell& c) {
  return c.kind == Cell::Kind::integer || c.kind == Cell::Kind::real;
}

double numeric_value(const Cell& c) {
  return c.kind == Cell::Kind::integer ? static_cast<double>(c.int_value) : c.real_value;
}

/// Kind class for canonical ordering: numeric kinds collapse together.
int kind_rank(const Cell& c) {
  switch (c.kind) {
    case Cell::Kind::null: return 0;
    case Cell::Kind::integer:
    case Cell::Kind::real: return 1;
    case Cell::Kind::text: return 2;
    case Cell::Kind::blob: return 3;
  }
  return 4;
}

bool cell_less(const Cell& a, const Cell& b) {
  int ra = kind_rank(a);
  int rb = kind_rank(b);
  if (ra != rb) return ra < rb;
  switch (ra) {
    case 1: return numeric_value(a) < numeric_value(b);
    case 2:
    case 3: return a.text_value < b.text_value;
    default: return false;  // nulls tie
  }
}

bool row_less(const Row& a, const Row& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), cell_less);
}

bool gold_orders_rows(const std::string& gold_sql) {
  static const std::regex order_by(R"(\bORDER\s+BY\b)", std::regex::icase);
  return std::regex_search(gold_sql, order_by);
}

}  // namespace

bool cells_equal(const Cell& a, const Cell& b) {
  if (a.kind == Cell::Kind::null || b.kind == Cell::Kind::null) {
    return a.kind == b.kind;
  }
  if (is_numeric(a) && is_numeric(b)) {
    if (a.kind == Cell::Kind::integer && b.kind == Cell::Kind::integer) {
      return a.int_value == b.int_value;
    }
    double x = numeric_value(a);
    double y = numeric_value(b);
    double scale = std::max(std::fabs(x), std::fabs(y));
    return std::fabs(x - y) <= std::max(1e-9, 1e-6 * scale);
  }
  if (a.kind != b.kind) return false;
  return a.text_value == b.text_value;
}

ComparisonResult compare_outcomes(const ExecutionOutcome& predicted,
                                  const ExecutionOutcome& gold,
                                  const std::string& gold_sql) {
  if (gold.error) {
    return {false, "gold query failed: " + *gold.error};
  }
  if (predicted.error) {
    return {false, "predicted query failed: " + *predicted.error};
  }
  if (predicted.rows.size() != gold.rows.size()) {
    return {false, "row count " + std::to_string(predicted.rows.size()) + " vs " +
                       std::to_string(gold.rows.size())};
  }
  std::size_t columns = gold.rows.empty() ? gold.column_names.size() : gold.rows[0].size();
  std::size_t pred_columns =
      predicted.rows.empty() ? predicted.column_names.size() : predicted.rows[0].size();
  if (pred_columns != columns) {
    return {false, "column count " + std::to_string(pred_columns) + " vs " +
                       std::to_string(columns)};
  }

  std::vector<Row> lhs = predicted.rows;
  std::vector<Row> rhs = gold.rows;
  if (!gold_orders_rows(gold_sql)) {
    std::sort(lhs.begin(), lhs.end(), row_less);
    std::sort(rhs.begin(), rhs.end(), row_less);
  }
  for (std::size_t r = 0; r < rhs.size(); ++r) {
    for (std::size_t c = 0; c < rhs[r].size(); ++c) {
      if (!cells_equal(lhs[r][c], rhs[r][c])) {
        return {false, "cell mismatch at row " + std::to_string(r) + ", column " +
                           std::to_string(c)};
      }
    }
  }
  return {true, ""};
}

ExBreakdown ex_metric(const std::vector<MetricRecord>& records) {
  if (records.empty()) throw MetricError("ex metric over zero records");
  ExBreakdown out;
  std::size_t matches = 0;
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::size_t, std::size_t>> buckets;  // hits, total
  for (const auto& rec : records) {
    std::string difficulty = rec.difficulty.empty() ? "unknown" : rec.difficulty;
    if (buckets.find(difficulty) == buckets.end()) order.push_back(difficulty);
    auto& [hits, total] = buckets[difficulty];
    ++total;
    if (rec.match) {
      ++hits;
      ++matches;
    }
  }
  out.overall = 100.0 * static_cast<double>(matches) / static_cast<double>(records.size());
  for (const auto& difficulty : order) {
    const auto& [hits, total] = buckets[difficulty];
    out.by_difficulty.emplace_back(
        difficulty, 100.0 * static_cast<double>(hits) / static_cast<double>(total));
  }
  return out;
}

double ves_metric(const std::vector<MetricRecord>& records) {
  if (records.empty()) throw MetricError("ves metric over zero records");
  double sum = 0.0;
  for (const auto& rec : records) {
    if (!rec.match) continue;
    double gold = std::max(rec.gold_duration_s, 1e-6);
    double pred = std::max(rec.predicted_duration_s, 1e-6);
    sum += std::sqrt(gold / pred);
  }
  return 100.0 * sum / static_cast<double>(records.size());
}

}  // namespace sqlrefine
