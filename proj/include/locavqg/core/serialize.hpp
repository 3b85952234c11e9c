#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "locavqg/core/types.hpp"
#include "locavqg/util/fs.hpp"

namespace locavqg {

using json = nlohmann::json;

// ---- JSON conversion ----
// nlohmann keeps object keys sorted, so dumps are deterministic.

inline json to_json(const GeoCoordinate& c) {
  return json{{"latitude", c.latitude}, {"longitude", c.longitude}};
}

inline GeoCoordinate coordinate_from_json(const json& j) {
  return GeoCoordinate{j.at("latitude").get<double>(),
                       j.at("longitude").get<double>()};
}

inline json to_json(const DirectionalImages& imgs) {
  json j = json::object();
  for (Direction d : kDirections) j[std::string(direction_name(d))] = imgs.at(d);
  return j;
}

inline DirectionalImages images_from_json(const json& j) {
  DirectionalImages out;
  for (Direction d : kDirections)
    out.at(d) = j.at(std::string(direction_name(d))).get<std::string>();
  return out;
}

inline json to_json(const LocaVQGTask& t) {
  json j{{"task_id", t.task_id},
         {"coordinate", to_json(t.coordinate)},
         {"images", to_json(t.images)}};
  j["city"] = t.city ? json(*t.city) : json(nullptr);
  return j;
}

inline LocaVQGTask task_from_json(const json& j) {
  LocaVQGTask t;
  t.task_id = j.at("task_id").get<std::string>();
  t.coordinate = coordinate_from_json(j.at("coordinate"));
  t.images = images_from_json(j.at("images"));
  if (j.contains("city") && !j.at("city").is_null())
    t.city = j.at("city").get<std::string>();
  return t;
}

inline json to_json(const CaptionedTask& ct) {
  json captions = json::object();
  for (Direction d : kDirections)
    captions[std::string(direction_name(d))] = ct.caption(d);
  return json{{"task", to_json(ct.task)},
              {"captions", captions},
              {"address", ct.address}};
}

inline CaptionedTask captioned_from_json(const json& j) {
  CaptionedTask ct;
  ct.task = task_from_json(j.at("task"));
  const json& captions = j.at("captions");
  for (Direction d : kDirections)
    ct.caption(d) = captions.at(std::string(direction_name(d))).get<std::string>();
  ct.address = j.at("address").get<std::string>();
  return ct;
}

inline json to_json(const Question& q) {
  json j{{"text", q.text},
         {"source", std::string(question_source_name(q.source))},
         {"task_id", q.task_id}};
  j["engaging_score"] = q.engaging_score ? json(*q.engaging_score) : json(nullptr);
  return j;
}

inline Question question_from_json(const json& j) {
  Question q;
  q.text = j.at("text").get<std::string>();
  q.task_id = j.at("task_id").get<std::string>();
  auto src = question_source_from_name(j.at("source").get<std::string>());
  if (!src) throw std::runtime_error("unknown question source in record");
  q.source = *src;
  if (j.contains("engaging_score") && !j.at("engaging_score").is_null())
    q.engaging_score = j.at("engaging_score").get<double>();
  return q;
}

inline json to_json(const DatasetRecord& r) {
  json questions = json::array();
  for (const auto& q : r.questions) questions.push_back(to_json(q));
  json rejected = json::array();
  for (const auto& q : r.rejected) rejected.push_back(to_json(q));
  return json{{"captioned", to_json(r.captioned)},
              {"questions", questions},
              {"rejected", rejected}};
}

inline DatasetRecord record_from_json(const json& j) {
  DatasetRecord r;
  r.captioned = captioned_from_json(j.at("captioned"));
  for (const auto& q : j.at("questions")) r.questions.push_back(question_from_json(q));
  for (const auto& q : j.at("rejected")) r.rejected.push_back(question_from_json(q));
  return r;
}

// ---- Dataset file ----
// Newline-delimited records; the first line is a header metadata record
// carrying the filter threshold, generator config, and schema version.

struct DatasetHeader {
  int schema_version = 1;
  double threshold = 0.5;
  bool filtered = true;
  json generator = json::object();  // backend ids, seeds, prompt flags
  json policies = json::object();   // tokenization / normalization policy ids

  bool operator==(const DatasetHeader& o) const {
    return schema_version == o.schema_version && threshold == o.threshold &&
           filtered == o.filtered && generator == o.generator &&
           policies == o.policies;
  }
};

inline std::string serialize_header(const DatasetHeader& h) {
  json j{{"kind", "locavqg-dataset"},
         {"schema_version", h.schema_version},
         {"threshold", h.threshold},
         {"filtered", h.filtered},
         {"generator", h.generator},
         {"policies", h.policies}};
  return j.dump();
}

inline DatasetHeader header_from_json(const json& j) {
  if (!j.contains("kind") || j.at("kind") != "locavqg-dataset")
    throw std::runtime_error("not a dataset header line");
  DatasetHeader h;
  h.schema_version = j.at("schema_version").get<int>();
  h.threshold = j.at("threshold").get<double>();
  h.filtered = j.value("filtered", true);
  h.generator = j.value("generator", json::object());
  h.policies = j.value("policies", json::object());
  return h;
}

// One line of UTF-8 text; JSON escaping guarantees no raw newlines inside
// fields. Throws on invalid UTF-8 in any field.
inline std::string serialize_record(const DatasetRecord& r) {
  try {
    return to_json(r).dump(-1, ' ', false, json::error_handler_t::strict);
  } catch (const json::type_error&) {
    throw std::runtime_error("serialization failure: invalid UTF-8 in record");
  }
}

inline DatasetRecord deserialize_record(const std::string& line) {
  return record_from_json(json::parse(line));
}

struct Dataset {
  DatasetHeader header;
  std::vector<DatasetRecord> records;
};

inline void write_dataset(const std::string& path, const Dataset& ds) {
  std::ostringstream out;
  out << serialize_header(ds.header) << "\n";
  for (const auto& r : ds.records) out << serialize_record(r) << "\n";
  write_file(path, out.str());
}

inline Dataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  Dataset ds;
  std::string line;
  size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("dataset parse error at line " +
                               std::to_string(lineno) + ": " + e.what());
    }
    if (!have_header) {
      ds.header = header_from_json(j);
      have_header = true;
    } else {
      ds.records.push_back(record_from_json(j));
    }
  }
  if (!have_header) throw std::runtime_error("dataset file missing header line");
  return ds;
}

}  // namespace locavqg
