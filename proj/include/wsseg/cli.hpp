#ifndef WSSEG_CLI_HPP
#define WSSEG_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsseg/pipeline.hpp"
#include "wsseg/refine.hpp"
#include "wsseg/stlp.hpp"

namespace wsseg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,  // bad flags, out-of-range parameters
  kExitData = 2,   // unreadable or inconsistent inputs
};

// Inputs and parameters shared by all subcommands. Loaded from a JSON
// config, then overridden by command-line flags.
struct PipelineConfig {
  std::string cloud;
  std::string logits;
  std::string views;       // view manifest
  std::string prototypes;  // C x d LF01, for embedding views
  std::string mask;
  std::string classes;
  std::string partition;
  std::string gt;
  std::string labels;
  std::string confidence;
  std::string out;

  RefineParams refine;
  StlpConfig stlp;  // stlp.refine is overwritten by `refine` at use
  SuperpointConfig superpoints;
  std::uint64_t seed = 0;
  int jobs = 1;

  // Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
  StlpConfig stlp_config() const;
};

// Keys: the path fields above, "seed", "jobs", and the sections
//   "refine": {"top_v", "alpha"}
//   "stlp": {"rounds", "update": "retained"|"full",
//            "classifier": {"neighbors", "color_weight"}}
//   "superpoint": {"angle_threshold", "adjacency_k", "min_size",
//                  "edge_length_percentile", "max_curvature", "normal_neighbors"}
// Relative paths are resolved against `base_dir`.
PipelineConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = "");
PipelineConfig load_config(const std::string& path);
nlohmann::json to_json(const PipelineConfig& config);

// Entry point behind the `wsseg` executable. `args` excludes the program
// name. Returns an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wsseg::cli

#endif  // WSSEG_CLI_HPP
