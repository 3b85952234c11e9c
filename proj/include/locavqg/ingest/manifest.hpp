#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "locavqg/core/types.hpp"
#include "locavqg/util/fs.hpp"
#include "locavqg/util/strings.hpp"

namespace locavqg::ingest {

struct ManifestRowError {
  size_t line = 0;  // 1-based
  std::string task_id;
  std::string message;
};

struct ManifestLoad {
  std::vector<LocaVQGTask> tasks;
  std::vector<ManifestRowError> row_errors;
};

// Tab-separated manifest: task_id, lat, lon, then the four image paths in
// N/E/S/W order; an optional 8th column names the city (otherwise it is
// inferred from the geocoded address later). '#' lines and blank lines are
// skipped. Structurally unparseable rows (too few columns, bad numbers) are
// fatal with the line number; semantically invalid rows (range, missing
// image path, duplicate id) are collected as row errors.
inline ManifestLoad parse_manifest(const std::string& content) {
  ManifestLoad out;
  std::set<std::string> seen_ids;
  size_t line_no = 0;
  for (const auto& raw_line : split(content, '\n')) {
    ++line_no;
    std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#') continue;

    auto cols = split(raw_line, '\t');
    for (auto& c : cols) c = trim(c);
    while (!cols.empty() && cols.back().empty()) cols.pop_back();
    if (cols.size() < 3)
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": expected at least task_id, lat, lon");

    LocaVQGTask task;
    task.task_id = cols[0];
    if (task.task_id.empty())
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": empty task_id");
    auto lat = parse_double(cols[1]);
    auto lon = parse_double(cols[2]);
    if (!lat || !lon)
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": unparseable coordinate");
    task.coordinate.latitude = *lat;
    task.coordinate.longitude = *lon;
    for (size_t d = 0; d < 4; ++d)
      task.images.refs[d] = cols.size() > 3 + d ? cols[3 + d] : "";
    if (cols.size() > 7 && !cols[7].empty()) task.city = cols[7];

    if (seen_ids.count(task.task_id)) {
      out.row_errors.push_back({line_no, task.task_id, "duplicate task_id"});
      continue;
    }
    seen_ids.insert(task.task_id);

    auto report = validate_task(task);
    if (!report.ok()) {
      out.row_errors.push_back({line_no, task.task_id, report.violations.front()});
      continue;
    }
    out.tasks.push_back(std::move(task));
  }
  return out;
}

inline ManifestLoad load_manifest(const std::string& path) {
  return parse_manifest(read_file(path));
}

}  // namespace locavqg::ingest
