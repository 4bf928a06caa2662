#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "habdf/fusion.hpp"
#include "habdf/io/config.hpp"
#include "habdf/io/csv.hpp"
#include "habdf/sim.hpp"

namespace habdf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::size_t kMaxSweepCells = 10000;

struct SimulateOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::filesystem::path summary;  // default: <out>.summary.csv
  std::optional<std::uint64_t> seed;
};

struct FuseOptions {
  std::filesystem::path tracks;
  std::filesystem::path config;   // optional; defaults apply when empty
  std::filesystem::path out;
  std::filesystem::path weights;  // default: <out>.weights.csv
};

struct EvalOptions {
  std::vector<std::filesystem::path> inputs;
  std::filesystem::path gt;
  std::filesystem::path out;
  std::filesystem::path summary;  // default: <out>.summary.csv
};

struct SweepOptions {
  std::filesystem::path config;
  std::string grid;  // grid file path, or inline "key=a|b;key2=c|d"
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

int cmd_simulate(const SimulateOptions& opts, std::ostream& log, std::ostream& err);
int cmd_fuse(const FuseOptions& opts, std::ostream& log, std::ostream& err);
int cmd_eval(const EvalOptions& opts, std::ostream& log, std::ostream& err);
int cmd_sweep(const SweepOptions& opts, std::ostream& log, std::ostream& err);

// Building blocks shared by the commands and the tests.

void write_sim_csv(std::ostream& out, const SimRecord& record);
void write_sim_summary(std::ostream& out, const SimSummary& summary);

struct FusedTrackRow {
  std::int64_t frame = 0;
  BoundingBox box;
  Eigen::Vector4d var = Eigen::Vector4d::Zero();
  bool coasting = false;
  std::vector<DetectorDiagnostics> per_detector;
};

struct FuseResult {
  std::vector<std::string> detector_ids;  // first-appearance order
  std::vector<FusedTrackRow> rows;        // frames where the center is initialized
};

/// Offline replay of a track log through the pipeline; one tick per frame
/// from the first to the last frame in the log.
FuseResult fuse_tracks(const std::vector<io::TrackRecord>& records, const io::RunConfig& config);

void write_fused(std::ostream& out, const FuseResult& result);
void write_weights(std::ostream& out, const FuseResult& result);

/// Grid axes: each key with its alternatives, in declaration order.
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

std::vector<GridAxis> parse_grid(const std::string& spec_or_path);

}  // namespace habdf::cli
