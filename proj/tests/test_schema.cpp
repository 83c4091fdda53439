#include "sqlrefine/schema.hpp"

#include "doctest.h"
#include "sqlrefine/errors.hpp"
#include "support/fixtures.hpp"

using namespace sqlrefine;
using namespace sqlrefine::testing;

TEST_CASE("introspection reads tables, columns, examples and foreign keys") {
  TempDir dir;
  std::string db = dir.file("schools.sqlite");
  build_schools_db(db);
  DatabaseSchema schema = introspect_sqlite(db, "schools");

  REQUIRE(schema.tables.size() == 3);
  CHECK(schema.tables[0].name == "districts");
  CHECK(schema.tables[1].name == "schools");
  CHECK(schema.tables[2].name == "scores");
  CHECK(schema.total_columns() == 12);

  const ColumnInfo* charter = schema.find_column("schools", "charter");
  REQUIRE(charter);
  // Only two distinct values exist in the data.
  CHECK(charter->example_values == std::vector<std::string>{"0", "1"});

  const ColumnInfo* name = schema.find_column("districts", "name");
  REQUIRE(name);
  CHECK(name->example_values.size() == 3);
  CHECK(name->example_values[0] == "Alameda Unified");

  REQUIRE(schema.foreign_keys.size() == 2);
  CHECK(schema.foreign_keys[0].from_table == "schools");
  CHECK(schema.foreign_keys[0].from_column == "district_id");
  CHECK(schema.foreign_keys[0].to_table == "districts");
  CHECK(schema.foreign_keys[0].to_column == "id");
  CHECK(schema.foreign_keys[1].from_table == "scores");
  CHECK(schema.foreign_keys[1].to_table == "schools");
}

TEST_CASE("full rendering matches the golden byte for byte") {
  TempDir dir;
  std::string db = dir.file("schools.sqlite");
  build_schools_db(db);
  DatabaseSchema schema = introspect_sqlite(db, "schools");
  std::string golden = read_file(repo_dir() + "/tests/golden/schools_schema.txt");
  CHECK(schema.render() == golden);
}

TEST_CASE("rendering is deterministic across introspections") {
  TempDir dir;
  std::string db = dir.file("schools.sqlite");
  build_schools_db(db);
  std::string a = introspect_sqlite(db, "schools").render();
  std::string b = introspect_sqlite(db, "schools").render();
  CHECK(a == b);
}

TEST_CASE("pruned rendering honours subset column order and matches golden") {
  TempDir dir;
  std::string db = dir.file("wide.sqlite");
  build_wide_db(db);
  DatabaseSchema schema = introspect_sqlite(db, "wide");
  REQUIRE(schema.tables.size() == 3);
  CHECK(schema.tables[0].columns.size() == 12);

  SchemaSubset subset;
  subset.tables.emplace_back(
      "catalog", TableChoice{false, {"col05", "col01", "col09", "col02", "col11", "col03"}});
  subset.tables.emplace_back("suppliers", TableChoice{true, {}});
  subset.tables.emplace_back("regions", TableChoice{true, {}});
  schema.validate_subset(subset);

  std::string golden = read_file(repo_dir() + "/tests/golden/wide_pruned_schema.txt");
  CHECK(schema.render(&subset) == golden);
}

TEST_CASE("foreign key lines drop when either endpoint is pruned") {
  TempDir dir;
  std::string db = dir.file("schools.sqlite");
  build_schools_db(db);
  DatabaseSchema schema = introspect_sqlite(db, "schools");

  SchemaSubset subset;
  subset.tables.emplace_back("districts", TableChoice{false, {"name"}});
  subset.tables.emplace_back("schools", TableChoice{true, {}});
  subset.tables.emplace_back("scores", TableChoice{true, {}});

  std::string fks = schema.render_foreign_keys(&subset);
  CHECK(fks == "scores.school_id = schools.id\n");

  SchemaSubset no_scores;
  no_scores.tables.emplace_back("districts", TableChoice{true, {}});
  no_scores.tables.emplace_back("schools", TableChoice{true, {}});
  CHECK(schema.render_foreign_keys(&no_scores) ==
        "schools.district_id = districts.id\n");
}

TEST_CASE("subset validation") {
  TempDir dir;
  std::string db = dir.file("schools.sqlite");
  build_schools_db(db);
  DatabaseSchema schema = introspect_sqlite(db, "schools");

  SUBCASE("unknown table") {
    SchemaSubset s;
    s.tables.emplace_back("nope", TableChoice{true, {}});
    CHECK_THROWS_AS(schema.validate_references(s), SubsetError);
  }
  SUBCASE("unknown column") {
    SchemaSubset s;
    s.tables.emplace_back("schools", TableChoice{false, {"nope"}});
    CHECK_THROWS_AS(schema.validate_references(s), SubsetError);
  }
  SUBCASE("duplicate table") {
    SchemaSubset s;
    s.tables.emplace_back("schools", TableChoice{true, {}});
    s.tables.emplace_back("schools", TableChoice{true, {}});
    CHECK_THROWS_AS(schema.validate_references(s), SubsetError);
  }
  SUBCASE("too few tables kept") {
    SchemaSubset s;
    s.tables.emplace_back("schools", TableChoice{true, {}});
    s.tables.emplace_back("scores", TableChoice{true, {}});
    CHECK_THROWS_AS(schema.validate_subset(s), SubsetError);
  }
  SUBCASE("column list longer than six") {
    TempDir wide_dir;
    std::string wide = wide_dir.file("wide.sqlite");
    build_wide_db(wide);
    DatabaseSchema ws = introspect_sqlite(wide, "wide");
    SchemaSubset s;
    s.tables.emplace_back("catalog", TableChoice{false,
        {"col01", "col02", "col03", "col04", "col05", "col06", "col07"}});
    s.tables.emplace_back("suppliers", TableChoice{true, {}});
    s.tables.emplace_back("regions", TableChoice{true, {}});
    CHECK_THROWS_AS(ws.validate_subset(s), SubsetError);
  }
  SUBCASE("kept table with empty column list") {
    SchemaSubset s;
    s.tables.emplace_back("districts", TableChoice{false, {}});
    s.tables.emplace_back("schools", TableChoice{true, {}});
    s.tables.emplace_back("scores", TableChoice{true, {}});
    CHECK_THROWS_AS(schema.validate_subset(s), SubsetError);
  }
  SUBCASE("full subset always validates") {
    CHECK_NOTHROW(schema.validate_subset(schema.full_subset()));
  }
}

TEST_CASE("empty tables render empty example lists") {
  TempDir dir;
  std::string db = dir.file("empty.sqlite");
  exec_sql_script(db, "CREATE TABLE nothing_here (a INTEGER, b TEXT);");
  DatabaseSchema schema = introspect_sqlite(db, "empty");
  REQUIRE(schema.tables.size() == 1);
  CHECK(schema.tables[0].columns[0].example_values.empty());
  CHECK(schema.render_tables().find("(a, INTEGER, , examples: []),") != std::string::npos);
}

TEST_CASE("long example values truncate to 64 characters") {
  TempDir dir;
  std::string db = dir.file("long.sqlite");
  std::string long_value(80, 'x');
  exec_sql_script(db, "CREATE TABLE notes (body TEXT);"
                      "INSERT INTO notes VALUES ('" + long_value + "');");
  DatabaseSchema schema = introspect_sqlite(db, "long");
  const auto& value = schema.tables[0].columns[0].example_values[0];
  CHECK(value.size() == 64);
  CHECK(value == std::string(61, 'x') + "...");
}

TEST_CASE("without-rowid tables still produce examples") {
  TempDir dir;
  std::string db = dir.file("kv.sqlite");
  exec_sql_script(db, "CREATE TABLE kv (k TEXT PRIMARY KEY, v TEXT) WITHOUT ROWID;"
                      "INSERT INTO kv VALUES ('alpha','1'),('beta','2');");
  DatabaseSchema schema = introspect_sqlite(db, "kv");
  CHECK(schema.tables[0].columns[0].example_values.size() == 2);
}

TEST_CASE("sidecar descriptions attach to tables and columns") {
  TempDir dir;
  std::string db = dir.file("schools.sqlite");
  build_schools_db(db);
  std::string sidecar = dir.file("schools.descriptions.json");
  write_file(sidecar, R"({
    "tables": {"districts": "school districts"},
    "columns": {"districts.county": "county the district belongs to"}
  })");
  SchemaDescriptions desc = SchemaDescriptions::load(sidecar);
  DatabaseSchema schema = introspect_sqlite(db, "schools", &desc);
  CHECK(schema.tables[0].description == "school districts");
  CHECK(schema.find_column("districts", "county")->description ==
        "county the district belongs to");
  std::string rendered = schema.render_tables();
  CHECK(rendered.find("# Table: districts, school districts") != std::string::npos);
  CHECK(rendered.find("(county, TEXT, county the district belongs to, examples:") !=
        std::string::npos);
}
