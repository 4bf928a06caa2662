#include "habdf/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace habdf::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string at(const std::string& origin, std::size_t line) {
  return origin + ":" + std::to_string(line);
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(std::istream& in, const std::string& origin) {
  CsvTable t;
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw InputError(at(origin, n) + ": expected " + std::to_string(t.header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(n);
  }
  if (!have_header) throw InputError(origin + ": empty file");
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return read_csv(in, path.string());
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  return out;
}

std::filesystem::path sibling_path(const std::filesystem::path& path, const std::string& tag) {
  std::filesystem::path out = path;
  const std::string ext = path.has_extension() ? path.extension().string() : ".csv";
  out.replace_filename(path.stem().string() + "." + tag + ext);
  return out;
}

double parse_real(const std::string& text, const std::string& where) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw InputError(where + ": '" + s + "' is not a number");
  }
  return v;
}

std::int64_t parse_int(const std::string& text, const std::string& where) {
  const std::string s = trim(text);
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw InputError(where + ": '" + s + "' is not an integer");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& where) {
  const std::string s = trim(text);
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw InputError(where + ": '" + s + "' is not a boolean (true/false/1/0)");
}

std::vector<TrackRecord> read_tracks(std::istream& in, const std::string& origin) {
  const CsvTable t = read_csv(in, origin);
  const char* required[] = {"frame", "detector_id", "u", "v", "h", "w"};
  for (const char* name : required) {
    if (t.column(name) < 0) throw InputError(origin + ": missing column '" + name + "'");
  }
  const int c_frame = t.column("frame");
  const int c_id = t.column("detector_id");
  const int c_u = t.column("u");
  const int c_v = t.column("v");
  const int c_h = t.column("h");
  const int c_w = t.column("w");
  const int c_valid = t.column("valid");

  std::vector<TrackRecord> out;
  out.reserve(t.rows.size());
  std::map<std::string, std::int64_t> last_frame;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = at(origin, t.lines[r]);
    TrackRecord rec;
    rec.frame = parse_int(row[c_frame], where + " (frame)");
    rec.detector_id = row[c_id];
    if (rec.detector_id.empty()) throw InputError(where + ": empty detector_id");
    rec.box.u = parse_real(row[c_u], where + " (u)");
    rec.box.v = parse_real(row[c_v], where + " (v)");
    rec.box.h = parse_real(row[c_h], where + " (h)");
    rec.box.w = parse_real(row[c_w], where + " (w)");
    rec.valid = c_valid < 0 ? true : parse_bool(row[c_valid], where + " (valid)");
    if (rec.valid) {
      if (!std::isfinite(rec.box.u) || !std::isfinite(rec.box.v) || !std::isfinite(rec.box.h) ||
          !std::isfinite(rec.box.w)) {
        throw InputError(where + ": non-finite box");
      }
      if (rec.box.h < 0.0 || rec.box.w < 0.0) throw InputError(where + ": negative box size");
    }
    auto it = last_frame.find(rec.detector_id);
    if (it != last_frame.end() && rec.frame < it->second) {
      throw InputError(where + ": frame " + std::to_string(rec.frame) + " of detector '" +
                       rec.detector_id + "' goes backwards");
    }
    last_frame[rec.detector_id] = rec.frame;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<TrackRecord> read_tracks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return read_tracks(in, path.string());
}

void write_tracks(std::ostream& out, const std::vector<TrackRecord>& records) {
  out << "frame,detector_id,u,v,h,w,valid\n";
  for (const auto& r : records) {
    out << r.frame << ',' << r.detector_id << ',' << format_real(r.box.u) << ','
        << format_real(r.box.v) << ',' << format_real(r.box.h) << ',' << format_real(r.box.w)
        << ',' << (r.valid ? 1 : 0) << '\n';
  }
}

}  // namespace habdf::io
