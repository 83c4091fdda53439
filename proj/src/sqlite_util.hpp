#pragma once

#include <sqlite3.h>

#include <memory>
#include <string>

#include "sqlrefine/errors.hpp"

namespace sqlrefine::detail {

struct DbCloser {
  void operator()(sqlite3* db) const {
    if (db) sqlite3_close_v2(db);
  }
};
using DbHandle = std::unique_ptr<sqlite3, DbCloser>;

struct StmtFinalizer {
  void operator()(sqlite3_stmt* stmt) const {
    if (stmt) sqlite3_finalize(stmt);
  }
};
using StmtHandle = std::unique_ptr<sqlite3_stmt, StmtFinalizer>;

inline DbHandle open_read_only(const std::string& path) {
  sqlite3* raw = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READONLY, nullptr);
  DbHandle db(raw);
  if (rc != SQLITE_OK) {
    std::string msg = raw ? sqlite3_errmsg(raw) : "out of memory";
    throw IoError("cannot open database '" + path + "': " + msg);
  }
  return db;
}

inline StmtHandle prepare(sqlite3* db, const std::string& sql) {
  sqlite3_stmt* raw = nullptr;
  int rc = sqlite3_prepare_v2(db, sql.c_str(), -1, &raw, nullptr);
  StmtHandle stmt(raw);
  if (rc != SQLITE_OK) {
    throw IoError("sqlite prepare failed: " + std::string(sqlite3_errmsg(db)));
  }
  return stmt;
}

/// Double-quote an identifier for safe embedding in SQL text.
inline std::string quote_ident(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

inline std::string column_as_text(sqlite3_stmt* stmt, int col) {
  const unsigned char* p = sqlite3_column_text(stmt, col);
  return p ? reinterpret_cast<const char*>(p) : std::string();
}

}  // namespace sqlrefine::detail
