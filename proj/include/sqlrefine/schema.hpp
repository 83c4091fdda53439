#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sqlrefine {

struct ColumnInfo {
  std::string name;
  std::string data_type;    // declared type, may be empty
  std::string description;  // from sidecar metadata, may be empty
  std::vector<std::string> example_values;  // at most 3, rendered as text
};

struct TableInfo {
  std::string name;
  std::string description;
  std::vector<ColumnInfo> columns;
};

struct ForeignKey {
  std::string from_table;
  std::string from_column;
  std::string to_table;
  std::string to_column;
};

/// Per-table pruning decision: keep every column, or keep an explicit
/// ordered list (most relevant first).
struct TableChoice {
  bool keep_all = false;
  std::vector<std::string> columns;
};

/// Pruned view over a DatabaseSchema. Tables not listed are dropped.
struct SchemaSubset {
  std::vector<std::pair<std::string, TableChoice>> tables;

  bool contains_table(const std::string& table) const;
  const TableChoice* choice_for(const std::string& table) const;
};

/// Schema snapshot of one SQLite database, in creation (rowid) order, plus
/// deterministic text rendering in the format the prompt templates expect:
///
///   # Table: schools, description
///   [
///   (id, INTEGER, unique school id, examples: [1, 2, 3]),
///   ...
///   ]
///
///   # Foreign keys:
///   schools.district_id = districts.id
///
/// Rendering is pure: identical inputs give byte-identical output.
class DatabaseSchema {
 public:
  std::string db_id;
  std::vector<TableInfo> tables;
  std::vector<ForeignKey> foreign_keys;

  const TableInfo* find_table(const std::string& name) const;
  const ColumnInfo* find_column(const std::string& table, const std::string& column) const;
  std::size_t total_columns() const;

  /// Table blocks only (the desc_str prompt placeholder).
  std::string render_tables(const SchemaSubset* subset = nullptr) const;

  /// One "from.col = to.col" line per foreign key whose endpoints survive
  /// the subset (the fk_str prompt placeholder).
  std::string render_foreign_keys(const SchemaSubset* subset = nullptr) const;

  /// Full rendering: table blocks, then a "# Foreign keys:" section.
  std::string render(const SchemaSubset* subset = nullptr) const;

  /// Throws SubsetError if the subset names an unknown table or column.
  void validate_references(const SchemaSubset& subset) const;

  /// validate_references plus the structural rules a pruning decision must
  /// satisfy: at least 3 tables kept when the schema has 3 or more, and no
  /// explicit column list longer than 6.
  void validate_subset(const SchemaSubset& subset) const;

  /// Subset that keeps every table with keep_all, in schema order.
  SchemaSubset full_subset() const;
};

/// Optional table/column descriptions loaded from a JSON sidecar file:
///   {"tables": {"schools": "..."} , "columns": {"schools.name": "..."}}
struct SchemaDescriptions {
  std::vector<std::pair<std::string, std::string>> tables;
  std::vector<std::pair<std::string, std::string>> columns;  // "table.column"

  static SchemaDescriptions load(const std::string& json_path);
  const std::string* table_description(const std::string& table) const;
  const std::string* column_description(const std::string& table,
                                        const std::string& column) const;
};

/// Reads tables, columns, foreign keys and up to 3 example values per column
/// from a SQLite database file. Tables appear in creation order, columns in
/// definition order. Example values are the first 3 distinct non-NULL values
/// in rowid order; values longer than 64 characters are truncated to 61
/// plus "...".
DatabaseSchema introspect_sqlite(const std::string& db_path,
                                 const std::string& db_id,
                                 const SchemaDescriptions* descriptions = nullptr);

}  // namespace sqlrefine
