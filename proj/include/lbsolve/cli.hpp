#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lbsolve/error.hpp"
#include "lbsolve/fmm.hpp"
#include "lbsolve/geometry.hpp"
#include "lbsolve/linsys.hpp"
#include "lbsolve/solver.hpp"

namespace lbs {

enum class DataKind { constant, poles, file };

struct RunConfig {
  std::string command;
  std::size_t n = 128;
  std::vector<std::size_t> n_list;
  std::string geometry_json;  // raw geometry block, rebuilt per N
  DataKind data = DataKind::constant;
  double constant = 0.0;
  std::vector<Complex> poles;  // empty with DataKind::poles: use the anchors
  std::filesystem::path data_file;
  GmresConfig gmres;
  FmmOptions fmm;
  ApplyMode mode = ApplyMode::fmm;
  std::size_t grid_nlat = 0, grid_nlon = 0;
  std::size_t samples = 80;
  bool report_timings = true;
  std::string vortices_json;
  std::filesystem::path base_dir;  // directory of the config file
  std::filesystem::path output_dir;
  std::string hash;                // FNV-1a of the canonical config text
};

// Parses and validates a JSON config. Throws Error(ConfigInvalid).
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Builds the domain described by the geometry block at n nodes per curve.
std::shared_ptr<const IslandDomain> build_domain(const RunConfig& cfg, std::size_t n);

// Process exit status for an error code: 2 for input errors, 3 for numerical failures.
int exit_status(ErrorCode code);

int cmd_solve(const RunConfig& cfg);
int cmd_study(const RunConfig& cfg);
int cmd_bench(const RunConfig& cfg);
int cmd_vortex(const RunConfig& cfg);
int cmd_selftest(const RunConfig& cfg);

// Entry point shared by the executable and the tests.
int run_cli(const std::vector<std::string>& args);

}  // namespace lbs
