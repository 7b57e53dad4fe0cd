#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sheaflens/extend.hpp"
#include "sheaflens/metricsheaf.hpp"

namespace sheaflens::cli {

// A self-contained problem: space (explicit or poset-generated), sheaf,
// assignment, options.  The raw blocks are kept so serialization is a
// faithful canonical round-trip.
struct ProblemFile {
  std::string version = "1";

  // exactly one of the two space blocks
  std::vector<std::string> points;
  std::vector<std::vector<std::string>> opens;                  // explicit topology
  std::vector<std::pair<std::string, std::string>> leq;         // poset block
  bool from_poset = false;
  std::string poset_convention = "lower";

  std::map<int, nlohmann::json> stalk_blocks;        // open id -> descriptor
  std::map<std::pair<int, int>, nlohmann::json> restriction_blocks;  // (V,U)

  std::map<int, nlohmann::json> value_blocks;  // open id -> value
  std::vector<int> support;

  std::string field = "f2";
  std::string objective = "linf";
  double tol = 1e-6;
  int cap = 4096;

  // built objects
  std::shared_ptr<const FiniteSpace> space;
  std::shared_ptr<const MetricSheaf> sheaf;
  Assignment assignment;
};

ProblemFile parse_problem(const nlohmann::json& j);
ProblemFile parse_problem_text(const std::string& text);
ProblemFile load_problem(const std::string& path);
nlohmann::json serialize_problem(const ProblemFile& p);

struct RunResult {
  int exit_code = 0;
  nlohmann::json report;
  std::string text;  // human-readable rendering (or CSV under --plot-data)
};

// Full command dispatch: radius | filtration | pointcloud | interleave.
// Never throws; failures map to the documented exit codes with a JSON
// diagnostic in the report.
RunResult run(const std::vector<std::string>& args);

std::string format_number(double x);

}  // namespace sheaflens::cli
