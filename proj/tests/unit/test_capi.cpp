#include "kmsf/kmsf.h"

#include <doctest.h>

#include <cstring>
#include <string>

namespace {

std::string fixture_path(const char* name) { return std::string(KMSF_FIXTURES_DIR) + "/" + name + ".kgf"; }

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and status names") {
  CHECK(std::string(kmsf_version()).size() > 0);
  CHECK(std::string(kmsf_status_name(KMSF_OK)) == "ok");
  CHECK(std::string(kmsf_status_name(KMSF_ERR_NOT_SIMPLE)) == "not-simple");
}

TEST_CASE("null arguments") {
  kmsf_family* f = nullptr;
  CHECK(kmsf_family_parse(nullptr, &f) == KMSF_ERR_INVALID_ARGUMENT);
  CHECK(kmsf_family_parse("[graph]\n", nullptr) == KMSF_ERR_INVALID_ARGUMENT);
  CHECK(kmsf_classify(nullptr, "1", nullptr, nullptr) == KMSF_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(kmsf_last_error()) > 0);
  kmsf_family_free(nullptr);
  kmsf_verdict_free(nullptr);
  kmsf_string_free(nullptr);
}

TEST_CASE("error codes") {
  kmsf_family* f = nullptr;
  CHECK(kmsf_family_parse("[graph]\nkind = spiral\n", &f) == KMSF_ERR_PARSE);
  CHECK(f == nullptr);
  CHECK(kmsf_family_load("/nonexistent/x.kgf", &f) == KMSF_ERR_IO);

  REQUIRE(kmsf_family_load(fixture_path("cycle3").c_str(), &f) == KMSF_OK);
  kmsf_verdict* v = nullptr;
  CHECK(kmsf_classify(f, "1", nullptr, &v) == KMSF_ERR_NOT_SIMPLE);
  CHECK(std::string(kmsf_last_error()).find("not-simple") == std::string::npos);
  CHECK(kmsf_classify(f, "one", nullptr, &v) == KMSF_ERR_PARSE);
  kmsf_family_free(f);
}

TEST_CASE("classify round trip") {
  kmsf_family* f = nullptr;
  REQUIRE(kmsf_family_load(fixture_path("ray_const_lambda").c_str(), &f) == KMSF_OK);
  char* text = nullptr;
  REQUIRE(kmsf_family_serialize(f, &text) == KMSF_OK);
  kmsf_family* g = nullptr;
  REQUIRE(kmsf_family_parse(text, &g) == KMSF_OK);
  kmsf_string_free(text);

  kmsf_options o;
  kmsf_options_default(&o);
  o.mode = KMSF_MODE_DETOUR;
  kmsf_verdict* v = nullptr;
  REQUIRE(kmsf_classify(g, "1", &o, &v) == KMSF_OK);
  CHECK(kmsf_verdict_type(v) == KMSF_III_LAMBDA);
  double lambda = 0;
  CHECK(kmsf_verdict_lambda(v, &lambda) == 1);
  CHECK(lambda == doctest::Approx(0.5));
  CHECK(std::string(kmsf_verdict_lambda_text(v)) == "1/2");
  char* rep = nullptr;
  REQUIRE(kmsf_verdict_report(v, KMSF_FORMAT_JSON_LINES, &rep) == KMSF_OK);
  CHECK(std::string(rep).find("\"kmsf.verdict/1\"") != std::string::npos);
  kmsf_string_free(rep);
  kmsf_verdict_free(v);
  kmsf_family_free(g);
  kmsf_family_free(f);
}

TEST_CASE("subcommand reports") {
  kmsf_family* f = nullptr;
  REQUIRE(kmsf_family_load(fixture_path("ray_slim").c_str(), &f) == KMSF_OK);
  char* rep = nullptr;
  int undecided = -1;
  REQUIRE(kmsf_green(f, "1", "v0", "v5", 1e-12, 100000, 0, &rep, &undecided) == KMSF_OK);
  CHECK(undecided == 0);
  CHECK(std::string(rep).find("converged=true") != std::string::npos);
  kmsf_string_free(rep);
  CHECK(kmsf_green(f, "1", "v0", "nowhere", 1e-12, 1000, 0, &rep, &undecided) == KMSF_ERR_INVALID_ARGUMENT);
  REQUIRE(kmsf_exits(f, "1", 20, 1e-9, &rep, &undecided) == KMSF_OK);
  kmsf_string_free(rep);
  REQUIRE(kmsf_sample_orbits(f, "1", 20000, 8, 3, nullptr, &rep, &undecided) == KMSF_OK);
  kmsf_string_free(rep);
  kmsf_family_free(f);
}

}  // TEST_SUITE
