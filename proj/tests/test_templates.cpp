#include "sqlrefine/templates.hpp"

#include "doctest.h"
#include "sqlrefine/errors.hpp"

using namespace sqlrefine;

TEST_CASE("placeholder substitution") {
  std::map<std::string, std::string> vars{{"query", "list schools"}, {"evidence", ""}};

  SUBCASE("bound names substitute, including to empty") {
    CHECK(substitute_placeholders("Q: {query} E: {evidence}!", vars) ==
          "Q: list schools E: !");
  }
  SUBCASE("unknown braced text stays literal") {
    CHECK(substitute_placeholders(R"({"schools": "keep_all"})", vars) ==
          R"({"schools": "keep_all"})");
    CHECK(substitute_placeholders("{not_a_placeholder}", vars) == "{not_a_placeholder}");
    CHECK(substitute_placeholders("{ query }", vars) == "{ query }");
  }
  SUBCASE("known placeholder without a binding is an error") {
    CHECK_THROWS_AS(substitute_placeholders("{sql}", vars), TemplateError);
  }
  SUBCASE("substituted values are not rescanned") {
    std::map<std::string, std::string> tricky{{"query", "{sql}"}};
    CHECK(substitute_placeholders("{query}", tricky) == "{sql}");
  }
}

TEST_CASE("template files split into the four sections") {
  PromptTemplate t = PromptTemplate::parse(
      "[[schema]]\n"
      "schema {db_id}\n"
      "[[few_shot]]\n"
      "example in\n"
      "example out\n"
      "[[instruction]]\n"
      "do the thing with {query}\n"
      "[[feedback]]\n"
      "[Answer]\n");
  CHECK(t.schema_section == "schema {db_id}");
  CHECK(t.few_shot_section == "example in\nexample out");
  CHECK(t.instruction_section == "do the thing with {query}");
  CHECK(t.feedback_section == "[Answer]");

  PromptParts parts = t.bind({{"db_id", "demo"}, {"query", "Q"}});
  CHECK(parts.schema_text == "schema demo");
  CHECK(parts.instruction_block == "do the thing with Q");
}

TEST_CASE("text before any section marker is rejected") {
  CHECK_THROWS_AS(PromptTemplate::parse("stray\n[[schema]]\nx\n"), TemplateError);
}

TEST_CASE("missing sections are empty, not errors") {
  PromptTemplate t = PromptTemplate::parse("[[instruction]]\nonly this\n");
  CHECK(t.schema_section.empty());
  CHECK(t.few_shot_section.empty());
  CHECK(t.feedback_section.empty());
  CHECK(t.instruction_section == "only this");
}
