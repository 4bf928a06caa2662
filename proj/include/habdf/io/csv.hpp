#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "habdf/box.hpp"

namespace habdf::io {

/// Bad or unreadable input file. Carries the file and, when known, the
/// 1-based line number.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 9 significant digits, the interchange precision of every CSV we write.
std::string format_real(double x);

/// Header plus rows of a comma-separated file. Blank lines are skipped; the
/// line number of each row is kept for diagnostics.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  /// Index of `name` in the header, or -1.
  int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in, const std::string& origin);
CsvTable read_csv(const std::filesystem::path& path);

/// Opens `path` for writing, creating parent directories; throws InputError on
/// failure.
std::ofstream open_output(const std::filesystem::path& path);

/// "out/run.csv" + "summary" -> "out/run.summary.csv".
std::filesystem::path sibling_path(const std::filesystem::path& path, const std::string& tag);

double parse_real(const std::string& text, const std::string& where);
std::int64_t parse_int(const std::string& text, const std::string& where);
bool parse_bool(const std::string& text, const std::string& where);

/// One detector's box at one frame:
///   frame,detector_id,u,v,h,w,valid
struct TrackRecord {
  std::int64_t frame = 0;
  std::string detector_id;
  BoundingBox box;
  bool valid = true;

  bool operator==(const TrackRecord&) const = default;
};

/// Rows must have a nonempty detector id and nondecreasing frames per
/// detector. Malformed rows raise InputError naming the line.
std::vector<TrackRecord> read_tracks(std::istream& in, const std::string& origin);
std::vector<TrackRecord> read_tracks(const std::filesystem::path& path);
void write_tracks(std::ostream& out, const std::vector<TrackRecord>& records);

}  // namespace habdf::io
