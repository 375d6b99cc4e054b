#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace geodepth {

/// One golden test vector: the operation it exercises, its input and
/// expected output as JSON, a numeric tolerance (0 means exact), and a
/// one-line note on where the expected value comes from. harness is
/// "library" for fixtures this module can evaluate in-process and "cli"
/// for end-to-end fixtures executed by the command-line test driver.
struct GoldenFixture {
  std::string name;
  std::string op;
  std::string source;
  std::string harness = "library";
  nlohmann::ordered_json input;
  nlohmann::ordered_json expected;
  double tolerance = 0;
  std::filesystem::path file;
};

struct FixtureResult {
  std::string name;
  std::string op;
  bool pass = false;
  std::string detail;  ///< mismatch diff or error text when failing
};

struct FixtureReport {
  std::vector<FixtureResult> results;
  int passed = 0;
  int failed = 0;
  int skipped = 0;  ///< cli-harness fixtures, validated elsewhere

  bool ok() const { return failed == 0; }
};

/// Loads every *.json fixture in the directory, sorted by file name.
/// A missing or non-directory path is a ConfigError; an unreadable or
/// malformed fixture file is reported as a failing entry by
/// verify_fixtures rather than aborting the batch.
std::vector<GoldenFixture> load_fixtures(const std::filesystem::path& dir);

/// Evaluates one library-harness fixture against the live
/// implementation.
FixtureResult verify_fixture(const GoldenFixture& fixture);

/// Loads and evaluates a fixture directory. Malformed fixture files
/// become named failures.
FixtureReport verify_fixtures(const std::filesystem::path& dir);

/// Compares actual output against expected JSON: numbers within
/// tolerance (absolute for |expected| <= 1, relative beyond), containers
/// recursively, everything else exactly. Objects compare the expected
/// keys only. Returns an empty string on match, else a description of
/// the first difference.
std::string json_mismatch(const nlohmann::ordered_json& actual, const nlohmann::ordered_json& expected,
                          double tolerance);

}  // namespace geodepth
