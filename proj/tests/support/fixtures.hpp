#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sqlrefine::testing {

/// Temporary directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Runs a script of statements against a database file, creating it.
void exec_sql_script(const std::string& db_path, const std::string& script);

/// Three related tables (districts, schools, scores) with foreign keys and a
/// fixed data set. The canonical small fixture.
void build_schools_db(const std::string& db_path);

/// One 12-column table plus two small ones, for pruning tests.
void build_wide_db(const std::string& db_path);

/// Small inventory table for metric fixtures.
void build_metrics_db(const std::string& db_path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Repository root (compile-time constant), for goldens and templates.
std::string repo_dir();

}  // namespace sqlrefine::testing
