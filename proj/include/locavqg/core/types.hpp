#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "locavqg/util/strings.hpp"

namespace locavqg {

enum class Direction { north = 0, east = 1, south = 2, west = 3 };

inline constexpr std::array<Direction, 4> kDirections = {
    Direction::north, Direction::east, Direction::south, Direction::west};

inline std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::north: return "north";
    case Direction::east: return "east";
    case Direction::south: return "south";
    case Direction::west: return "west";
  }
  return "";
}

// Capitalized form used inside prompts ("On your North, ...").
inline std::string_view direction_title(Direction d) {
  switch (d) {
    case Direction::north: return "North";
    case Direction::east: return "East";
    case Direction::south: return "South";
    case Direction::west: return "West";
  }
  return "";
}

inline std::optional<Direction> direction_from_name(std::string_view name) {
  for (Direction d : kDirections)
    if (direction_name(d) == name) return d;
  return std::nullopt;
}

struct GeoCoordinate {
  double latitude = 0.0;
  double longitude = 0.0;

  bool in_range() const {
    return latitude >= -90.0 && latitude <= 90.0 && longitude >= -180.0 &&
           longitude <= 180.0;
  }
  bool operator==(const GeoCoordinate&) const = default;
};

// One image reference (file path or opaque id) per compass direction.
struct DirectionalImages {
  std::array<std::string, 4> refs;

  const std::string& at(Direction d) const { return refs[static_cast<size_t>(d)]; }
  std::string& at(Direction d) { return refs[static_cast<size_t>(d)]; }
  bool operator==(const DirectionalImages&) const = default;

  // Builds from (direction-name, ref) entries; reports duplicate or missing
  // direction keys instead of silently keeping one of them.
  static DirectionalImages from_entries(
      const std::vector<std::pair<std::string, std::string>>& entries,
      std::vector<std::string>& violations) {
    DirectionalImages out;
    std::array<int, 4> seen = {0, 0, 0, 0};
    for (const auto& [key, ref] : entries) {
      auto d = direction_from_name(key);
      if (!d) {
        violations.push_back("unknown direction key \"" + key + "\"");
        continue;
      }
      if (seen[static_cast<size_t>(*d)]++) {
        violations.push_back("duplicate direction key \"" + key + "\"");
        continue;
      }
      out.at(*d) = ref;
    }
    for (Direction d : kDirections)
      if (!seen[static_cast<size_t>(d)])
        violations.push_back(std::string("missing direction ") +
                             std::string(direction_name(d)));
    return out;
  }
};

// The task tuple: a GPS coordinate plus four directional street-view images.
struct LocaVQGTask {
  std::string task_id;
  GeoCoordinate coordinate;
  DirectionalImages images;
  std::optional<std::string> city;

  bool operator==(const LocaVQGTask&) const = default;
};

// Task tuple enriched with per-direction captions and a reverse-geocoded
// street address.
struct CaptionedTask {
  LocaVQGTask task;
  std::array<std::string, 4> captions;
  std::string address;

  const std::string& caption(Direction d) const {
    return captions[static_cast<size_t>(d)];
  }
  std::string& caption(Direction d) { return captions[static_cast<size_t>(d)]; }
  bool operator==(const CaptionedTask&) const = default;
};

enum class QuestionSource { llm, student, teacher, human };

inline std::string_view question_source_name(QuestionSource s) {
  switch (s) {
    case QuestionSource::llm: return "llm";
    case QuestionSource::student: return "student";
    case QuestionSource::teacher: return "teacher";
    case QuestionSource::human: return "human";
  }
  return "";
}

inline std::optional<QuestionSource> question_source_from_name(std::string_view name) {
  for (auto s : {QuestionSource::llm, QuestionSource::student,
                 QuestionSource::teacher, QuestionSource::human})
    if (question_source_name(s) == name) return s;
  return std::nullopt;
}

struct Question {
  std::string text;
  std::optional<double> engaging_score;
  QuestionSource source = QuestionSource::llm;
  std::string task_id;

  bool operator==(const Question&) const = default;
};

// A task tuple with its filtered question list; the unit of the dataset.
struct DatasetRecord {
  CaptionedTask captioned;
  std::vector<Question> questions;
  std::vector<Question> rejected;

  bool operator==(const DatasetRecord&) const = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_task(const LocaVQGTask& task) {
  ValidationReport report;
  if (task.task_id.empty()) report.violations.push_back("task_id empty");
  if (task.coordinate.latitude < -90.0 || task.coordinate.latitude > 90.0)
    report.violations.push_back("latitude out of range");
  if (task.coordinate.longitude < -180.0 || task.coordinate.longitude > 180.0)
    report.violations.push_back("longitude out of range");
  for (Direction d : kDirections)
    if (task.images.at(d).empty())
      report.violations.push_back(std::string("missing direction ") +
                                  std::string(direction_name(d)));
  return report;
}

inline ValidationReport validate_captioned(const CaptionedTask& ct) {
  ValidationReport report = validate_task(ct.task);
  for (Direction d : kDirections)
    if (trim(ct.caption(d)).empty())
      report.violations.push_back(std::string("empty caption for ") +
                                  std::string(direction_name(d)));
  if (ct.address.empty()) report.violations.push_back("address empty");
  return report;
}

inline ValidationReport validate_question(const Question& q) {
  ValidationReport report;
  if (q.text.empty()) report.violations.push_back("question text empty");
  if (q.engaging_score &&
      (*q.engaging_score < 0.0 || *q.engaging_score > 1.0))
    report.violations.push_back("engaging_score outside [0,1]");
  return report;
}

// `threshold` is the filter threshold recorded in the dataset header.
inline ValidationReport validate_record(const DatasetRecord& record,
                                        double threshold) {
  ValidationReport report = validate_captioned(record.captioned);
  for (const auto& q : record.questions) {
    auto qr = validate_question(q);
    report.violations.insert(report.violations.end(), qr.violations.begin(),
                             qr.violations.end());
    if (q.engaging_score && *q.engaging_score < threshold)
      report.violations.push_back("kept question scored below threshold: " +
                                  q.text);
  }
  for (const auto& q : record.rejected) {
    auto qr = validate_question(q);
    report.violations.insert(report.violations.end(), qr.violations.begin(),
                             qr.violations.end());
    if (q.engaging_score && *q.engaging_score >= threshold)
      report.violations.push_back("rejected question scored at/above threshold: " +
                                  q.text);
  }
  return report;
}

// Infers the city by substring match against a configured list.
inline std::optional<std::string> infer_city(
    const std::string& address, const std::vector<std::string>& city_list) {
  std::string addr = to_lower(address);
  for (const auto& city : city_list)
    if (addr.find(to_lower(city)) != std::string::npos) return city;
  return std::nullopt;
}

inline const std::vector<std::string>& default_city_list() {
  static const std::vector<std::string> cities = {"Pittsburgh", "Orlando",
                                                  "New York"};
  return cities;
}

}  // namespace locavqg
