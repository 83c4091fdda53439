#include "sqlrefine/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sqlite_util.hpp"

namespace sqlrefine {

namespace {

constexpr std::size_t kMaxExampleValues = 3;
constexpr std::size_t kMaxValueLength = 64;

std::string truncate_value(std::string value) {
  if (value.size() > kMaxValueLength) {
    value.resize(kMaxValueLength - 3);
    value += "...";
  }
  return value;
}

void append_table_block(std::string& out, const TableInfo& table,
                        const std::vector<const ColumnInfo*>& columns) {
  out += "# Table: ";
  out += table.name;
  out += ',';
  if (!table.description.empty()) {
    out += ' ';
    out += table.description;
  }
  out += "\n[\n";
  for (const ColumnInfo* col : columns) {
    out += '(';
    out += col->name;
    out += ", ";
    out += col->data_type;
    out += ", ";
    out += col->description;
    out += ", examples: [";
    for (std::size_t i = 0; i < col->example_values.size(); ++i) {
      if (i) out += ", ";
      out += col->example_values[i];
    }
    out += "]),\n";
  }
  out += "]\n";
}

}  // namespace

bool SchemaSubset::contains_table(const std::string& table) const {
  return choice_for(table) != nullptr;
}

const TableChoice* SchemaSubset::choice_for(const std::string& table) const {
  for (const auto& [name, choice] : tables) {
    if (name == table) return &choice;
  }
  return nullptr;
}

const TableInfo* DatabaseSchema::find_table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const ColumnInfo* DatabaseSchema::find_column(const std::string& table,
                                              const std::string& column) const {
  const TableInfo* t = find_table(table);
  if (!t) return nullptr;
  for (const auto& c : t->columns) {
    if (c.name == column) return &c;
  }
  return nullptr;
}

std::size_t DatabaseSchema::total_columns() const {
  std::size_t n = 0;
  for (const auto& t : tables) n += t.columns.size();
  return n;
}

std::string DatabaseSchema::render_tables(const SchemaSubset* subset) const {
  if (subset) validate_references(*subset);
  std::string out;
  bool first = true;
  for (const auto& table : tables) {
    const TableChoice* choice = nullptr;
    if (subset) {
      choice = subset->choice_for(table.name);
      if (!choice) continue;
    }
    std::vector<const ColumnInfo*> columns;
    if (!choice || choice->keep_all) {
      for (const auto& c : table.columns) columns.push_back(&c);
    } else {
      for (const auto& name : choice->columns) {
        columns.push_back(find_column(table.name, name));
      }
    }
    if (!first) out += '\n';
    first = false;
    append_table_block(out, table, columns);
  }
  return out;
}

std::string DatabaseSchema::render_foreign_keys(const SchemaSubset* subset) const {
  if (subset) validate_references(*subset);
  auto column_kept = [&](const std::string& table, const std::string& column) {
    if (!subset) return true;
    const TableChoice* choice = subset->choice_for(table);
    if (!choice) return false;
    if (choice->keep_all) return true;
    return std::find(choice->columns.begin(), choice->columns.end(), column) !=
           choice->columns.end();
  };
  std::string out;
  for (const auto& fk : foreign_keys) {
    if (!column_kept(fk.from_table, fk.from_column)) continue;
    if (!column_kept(fk.to_table, fk.to_column)) continue;
    out += fk.from_table;
    out += '.';
    out += fk.from_column;
    out += " = ";
    out += fk.to_table;
    out += '.';
    out += fk.to_column;
    out += '\n';
  }
  return out;
}

std::string DatabaseSchema::render(const SchemaSubset* subset) const {
  return render_tables(subset) + "\n# Foreign keys:\n" + render_foreign_keys(subset);
}

void DatabaseSchema::validate_references(const SchemaSubset& subset) const {
  std::set<std::string> seen;
  for (const auto& [name, choice] : subset.tables) {
    const TableInfo* table = find_table(name);
    if (!table) throw SubsetError("subset references unknown table '" + name + "'");
    if (!seen.insert(name).second) {
      throw SubsetError("subset lists table '" + name + "' twice");
    }
    if (choice.keep_all) continue;
    std::set<std::string> cols;
    for (const auto& col : choice.columns) {
      if (!find_column(name, col)) {
        throw SubsetError("subset references unknown column '" + name + "." + col + "'");
      }
      if (!cols.insert(col).second) {
        throw SubsetError("subset lists column '" + name + "." + col + "' twice");
      }
    }
  }
}

void DatabaseSchema::validate_subset(const SchemaSubset& subset) const {
  validate_references(subset);
  std::size_t required = std::min<std::size_t>(3, tables.size());
  if (subset.tables.size() < required) {
    throw SubsetError("subset keeps " + std::to_string(subset.tables.size()) +
                      " tables, needs at least " + std::to_string(required));
  }
  for (const auto& [name, choice] : subset.tables) {
    if (choice.keep_all) continue;
    if (choice.columns.empty()) {
      throw SubsetError("subset keeps table '" + name + "' with no columns");
    }
    if (choice.columns.size() > 6) {
      throw SubsetError("subset keeps " + std::to_string(choice.columns.size()) +
                        " columns of '" + name + "', limit is 6");
    }
  }
}

SchemaSubset DatabaseSchema::full_subset() const {
  SchemaSubset subset;
  for (const auto& t : tables) {
    subset.tables.emplace_back(t.name, TableChoice{true, {}});
  }
  return subset;
}

SchemaDescriptions SchemaDescriptions::load(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open descriptions file '" + json_path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad descriptions file '" + json_path + "': " + e.what());
  }
  SchemaDescriptions d;
  if (doc.contains("tables")) {
    for (const auto& [k, v] : doc.at("tables").items()) {
      d.tables.emplace_back(k, v.get<std::string>());
    }
  }
  if (doc.contains("columns")) {
    for (const auto& [k, v] : doc.at("columns").items()) {
      d.columns.emplace_back(k, v.get<std::string>());
    }
  }
  return d;
}

const std::string* SchemaDescriptions::table_description(const std::string& table) const {
  for (const auto& [name, desc] : tables) {
    if (name == table) return &desc;
  }
  return nullptr;
}

const std::string* SchemaDescriptions::column_description(const std::string& table,
                                                          const std::string& column) const {
  std::string key = table + "." + column;
  for (const auto& [name, desc] : columns) {
    if (name == key) return &desc;
  }
  return nullptr;
}

namespace {

std::vector<std::string> read_example_values(sqlite3* db, const std::string& table,
                                             const std::string& column) {
  using namespace detail;
  std::string base = "SELECT " + quote_ident(column) + " FROM " + quote_ident(table) +
                     " WHERE " + quote_ident(column) + " IS NOT NULL";
  StmtHandle stmt;
  try {
    stmt = prepare(db, base + " ORDER BY rowid");
  } catch (const IoError&) {
    // WITHOUT ROWID tables fall back to natural scan order.
    stmt = prepare(db, base);
  }
  std::vector<std::string> values;
  while (values.size() < kMaxExampleValues && sqlite3_step(stmt.get()) == SQLITE_ROW) {
    std::string value = truncate_value(column_as_text(stmt.get(), 0));
    if (std::find(values.begin(), values.end(), value) == values.end()) {
      values.push_back(std::move(value));
    }
  }
  return values;
}

struct RawForeignKey {
  int id;
  int seq;
  ForeignKey fk;
  bool needs_target_pk;
};

std::string nth_primary_key_column(sqlite3* db, const std::string& table, int seq) {
  using namespace detail;
  StmtHandle stmt = prepare(db, "PRAGMA table_info(" + quote_ident(table) + ")");
  std::vector<std::pair<int, std::string>> pk_columns;  // (pk ordinal, name)
  while (sqlite3_step(stmt.get()) == SQLITE_ROW) {
    int pk = sqlite3_column_int(stmt.get(), 5);
    if (pk > 0) pk_columns.emplace_back(pk, column_as_text(stmt.get(), 1));
  }
  std::sort(pk_columns.begin(), pk_columns.end());
  if (seq < 0 || static_cast<std::size_t>(seq) >= pk_columns.size()) {
    throw IoError("foreign key into '" + table + "' has no resolvable target column");
  }
  return pk_columns[static_cast<std::size_t>(seq)].second;
}

}  // namespace

DatabaseSchema introspect_sqlite(const std::string& db_path, const std::string& db_id,
                                 const SchemaDescriptions* descriptions) {
  using namespace detail;
  DbHandle db = open_read_only(db_path);
  DatabaseSchema schema;
  schema.db_id = db_id;

  {
    StmtHandle stmt = prepare(db.get(),
                              "SELECT name FROM sqlite_master WHERE type='table' "
                              "AND name NOT LIKE 'sqlite_%' ORDER BY rowid");
    while (sqlite3_step(stmt.get()) == SQLITE_ROW) {
      TableInfo table;
      table.name = column_as_text(stmt.get(), 0);
      schema.tables.push_back(std::move(table));
    }
  }

  for (auto& table : schema.tables) {
    if (descriptions) {
      if (const std::string* d = descriptions->table_description(table.name)) {
        table.description = *d;
      }
    }
    StmtHandle stmt = prepare(db.get(), "PRAGMA table_info(" + quote_ident(table.name) + ")");
    while (sqlite3_step(stmt.get()) == SQLITE_ROW) {
      ColumnInfo col;
      col.name = column_as_text(stmt.get(), 1);
      col.data_type = column_as_text(stmt.get(), 2);
      if (descriptions) {
        if (const std::string* d = descriptions->column_description(table.name, col.name)) {
          col.description = *d;
        }
      }
      table.columns.push_back(std::move(col));
    }
    for (auto& col : table.columns) {
      col.example_values = read_example_values(db.get(), table.name, col.name);
    }

    std::vector<RawForeignKey> raw;
    StmtHandle fks = prepare(db.get(),
                             "PRAGMA foreign_key_list(" + quote_ident(table.name) + ")");
    while (sqlite3_step(fks.get()) == SQLITE_ROW) {
      RawForeignKey r;
      r.id = sqlite3_column_int(fks.get(), 0);
      r.seq = sqlite3_column_int(fks.get(), 1);
      r.fk.from_table = table.name;
      r.fk.to_table = column_as_text(fks.get(), 2);
      r.fk.from_column = column_as_text(fks.get(), 3);
      r.needs_target_pk = sqlite3_column_type(fks.get(), 4) == SQLITE_NULL;
      if (!r.needs_target_pk) r.fk.to_column = column_as_text(fks.get(), 4);
      raw.push_back(std::move(r));
    }
    std::sort(raw.begin(), raw.end(), [](const RawForeignKey& a, const RawForeignKey& b) {
      return std::tie(a.id, a.seq) < std::tie(b.id, b.seq);
    });
    for (auto& r : raw) {
      if (r.needs_target_pk) {
        r.fk.to_column = nth_primary_key_column(db.get(), r.fk.to_table, r.seq);
      }
      schema.foreign_keys.push_back(std::move(r.fk));
    }
  }
  return schema;
}

}  // namespace sqlrefine
