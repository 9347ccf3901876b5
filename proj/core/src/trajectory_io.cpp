#include "keymps/trajectory_io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "keymps/error.hpp"

namespace keymps {
namespace {

Error parse_error(std::size_t line, const std::string& why) {
  return Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + why, {.index = line});
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size() || !std::isfinite(value)) {
    throw parse_error(line, "'" + std::string(field) + "' is not a finite number");
  }
  return value;
}

double round9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

bool reproduces(const std::vector<double>& times, double dt) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (round9(static_cast<double>(i) * dt) != times[i]) return false;
  }
  return true;
}

// Midpoint of the steps consistent with every 9-digit time, i*dt rounding to times[i].
double consistent_step(const std::vector<double>& times) {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= 0.0) return 0.0;
    const double half = 0.5 * std::pow(10.0, std::floor(std::log10(times[i])) - 8.0);
    lo = std::max(lo, (times[i] - half) / static_cast<double>(i));
    hi = std::min(hi, (times[i] + half) / static_cast<double>(i));
  }
  return lo < hi ? 0.5 * (lo + hi) : 0.0;
}

}  // namespace

std::string format_trajectory_csv(const Trajectory& trajectory) {
  std::string out = "t,x,y,z\n";
  out.reserve(out.size() + trajectory.points.size() * 48);
  char row[128];
  for (std::size_t i = 0; i < trajectory.points.size(); ++i) {
    const Vec3& p = trajectory.points[i];
    const int n = std::snprintf(row, sizeof row, "%.9g,%.9g,%.9g,%.9g\n", static_cast<double>(i) * trajectory.dt,
                                p.x(), p.y(), p.z());
    out.append(row, static_cast<std::size_t>(n));
  }
  return out;
}

Trajectory parse_trajectory_csv(std::string_view text) {
  std::vector<double> times;
  Trajectory out;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "t,x,y,z") throw parse_error(line_no, "expected header 't,x,y,z'");
      header_seen = true;
      continue;
    }
    double v[4];
    std::size_t field = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      if (field == 4) throw parse_error(line_no, "more than 4 fields");
      v[field++] = parse_number(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos), line_no);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (field != 4) throw parse_error(line_no, "expected 4 fields, found " + std::to_string(field));
    times.push_back(v[0]);
    out.points.emplace_back(v[1], v[2], v[3]);
  }
  if (!header_seen) throw parse_error(line_no, "missing header 't,x,y,z'");
  if (out.points.size() < 2) {
    out.dt = 0.0;
    return out;
  }
  const std::size_t n = times.size();
  out.dt = (times.back() - times.front()) / static_cast<double>(n - 1);
  if (!(out.dt > 0.0)) throw parse_error(line_no, "time column is not increasing");
  // Prefer a step that reproduces the written time column digit for digit.
  for (double candidate : {out.dt, times[1] - times[0], round9(out.dt), consistent_step(times)}) {
    if (times.front() == 0.0 && reproduces(times, candidate)) {
      out.dt = candidate;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double expected = times.front() + static_cast<double>(i) * out.dt;
    if (std::abs(times[i] - expected) > 1e-3 * out.dt + 1e-8 * std::abs(expected)) {
      throw parse_error(i + 2, "time step is not uniform");
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void save_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path) {
  write_text_file(path, format_trajectory_csv(trajectory));
}

Trajectory load_trajectory_csv(const std::filesystem::path& path) { return parse_trajectory_csv(read_text_file(path)); }

}  // namespace keymps
