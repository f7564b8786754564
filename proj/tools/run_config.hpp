#pragma once

#include "lrcc/common.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrcc::cli {

/// Exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a subcommand reads. JSON config keys use the flag names with
/// dashes replaced by underscores; flags given on the command line win.
struct RunConfig {
  std::string subcommand;

  // inputs
  std::string data;
  std::string labels;
  std::string pred;
  std::string edges;
  std::string means;
  std::string x_hat;

  // graph
  Index graph_k = 10;
  std::string knn_mode = "union";
  double kernel_scale = 0.0;

  // model
  std::optional<double> gamma1;
  std::optional<double> gamma2;
  std::vector<double> gamma1_grid;
  std::vector<double> gamma2_grid;

  // solver
  double tol = 1e-6;
  int max_outer = 100;
  double sigma0 = 1.0;
  double sigma_growth = 3.0;
  double sigma_cap = 1e8;
  double merge_tol = 1e-6;
  int workers = 1;
  bool write_trace = true;

  std::uint64_t seed = 0;
  std::string out = ".";

  // gen; d1/d2 also give the sample shape of CSV input
  std::string generator;
  Index n_per = 100;
  Index n = 200;
  Index d1 = 20;
  Index d2 = 10;
  Index clusters = 4;
  Index rank = 2;
  double noise = 0.1;
  double scale = 1.0;
  std::vector<Index> sizes;
  bool share_factors = false;

  // check
  std::string mode = "recovery";
  double sigma = 0.1;
  double t = 2.0;
  double epsilon = 0.01;

  // baseline
  int k = 2;
  std::string init = "random";
  int max_iter = 100;

  // embed
  Index dims = 2;
};

void from_json(const nlohmann::json& j, RunConfig& c);
nlohmann::json to_json(const RunConfig& c);

/// Throws UsageError when a field the subcommand needs is missing or invalid.
void validate(const RunConfig& c);

std::vector<double> parse_grid(const std::string& text);

}  // namespace lrcc::cli
