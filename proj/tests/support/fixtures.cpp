#include "fixtures.hpp"

#include <sqlite3.h>

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sqlrefine::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  auto base = fs::temp_directory_path();
  std::mt19937_64 rng(std::random_device{}());
  for (int attempt = 0; attempt < 64; ++attempt) {
    fs::path candidate = base / ("sqlrefine_test_" + std::to_string(rng()));
    std::error_code ec;
    if (fs::create_directory(candidate, ec)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("could not create a temp directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void exec_sql_script(const std::string& db_path, const std::string& script) {
  sqlite3* db = nullptr;
  if (sqlite3_open(db_path.c_str(), &db) != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "open failed";
    sqlite3_close(db);
    throw std::runtime_error("fixture db open failed: " + msg);
  }
  char* err = nullptr;
  int rc = sqlite3_exec(db, script.c_str(), nullptr, nullptr, &err);
  std::string msg = err ? err : "";
  sqlite3_free(err);
  sqlite3_close(db);
  if (rc != SQLITE_OK) {
    throw std::runtime_error("fixture script failed: " + msg);
  }
}

void build_schools_db(const std::string& db_path) {
  exec_sql_script(db_path, R"sql(
CREATE TABLE districts (
  id INTEGER PRIMARY KEY,
  name TEXT NOT NULL,
  county TEXT
);
CREATE TABLE schools (
  id INTEGER PRIMARY KEY,
  name TEXT NOT NULL,
  district_id INTEGER REFERENCES districts(id),
  charter INTEGER,
  enrollment REAL
);
CREATE TABLE scores (
  school_id INTEGER REFERENCES schools(id),
  year INTEGER,
  reading REAL,
  math REAL
);
INSERT INTO districts VALUES
  (1,'Alameda Unified','Alameda'),
  (2,'Fresno Unified','Fresno'),
  (3,'Kings Valley','Kings');
INSERT INTO schools VALUES
  (1,'Bayview High',1,0,1200.0),
  (2,'Alameda Science Charter',1,1,640.0),
  (3,'Fresno Central',2,0,2210.0),
  (4,'Kings Canyon Prep',3,1,410.0),
  (5,'Riverbend Elementary',3,0,385.0);
INSERT INTO scores VALUES
  (1,2020,571.0,580.0),
  (1,2021,575.0,584.0),
  (2,2020,610.0,622.0),
  (2,2021,612.0,630.0),
  (3,2020,540.0,548.0),
  (3,2021,545.0,551.0),
  (4,2020,588.0,579.0),
  (4,2021,590.0,585.0),
  (5,2020,560.0,566.0),
  (5,2021,562.0,569.0);
)sql");
}

void build_wide_db(const std::string& db_path) {
  std::ostringstream script;
  script << "CREATE TABLE catalog (\n";
  for (int i = 1; i <= 12; ++i) {
    script << "  col" << (i < 10 ? "0" : "") << i << (i % 3 == 0 ? " TEXT" : " INTEGER")
           << (i < 12 ? ",\n" : "\n");
  }
  script << ");\n";
  script << "CREATE TABLE suppliers (id INTEGER PRIMARY KEY, name TEXT);\n";
  script << "CREATE TABLE regions (id INTEGER PRIMARY KEY, name TEXT);\n";
  script << "INSERT INTO suppliers VALUES (1,'Acme'),(2,'Globex');\n";
  script << "INSERT INTO regions VALUES (1,'North'),(2,'South');\n";
  script << "INSERT INTO catalog VALUES (1,2,'a',4,5,'b',7,8,'c',10,11,'d');\n";
  script << "INSERT INTO catalog VALUES (2,3,'e',5,6,'f',8,9,'g',11,12,'h');\n";
  exec_sql_script(db_path, script.str());
}

void build_metrics_db(const std::string& db_path) {
  exec_sql_script(db_path, R"sql(
CREATE TABLE items (
  id INTEGER PRIMARY KEY,
  name TEXT,
  price REAL,
  qty INTEGER
);
INSERT INTO items VALUES
  (1,'bolt',0.25,500),
  (2,'nut',0.10,800),
  (3,'washer',0.05,1200),
  (4,'screw',0.30,450),
  (5,'nail',0.02,5000),
  (6,'anchor',1.25,60),
  (7,'rivet',0.15,700),
  (8,'clamp',2.40,35);
)sql");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

std::string repo_dir() { return SQLREFINE_SOURCE_DIR; }

}  // namespace sqlrefine::testing
