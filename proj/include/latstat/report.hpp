#pragma once

// Experiment reports: JSON sections plus flat CSV tables.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace latstat::report {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form.
std::string format_number(double x);
std::string format_number(std::uint64_t x);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws InvariantError when the row width differs from the header.
  void add_row(std::vector<std::string> row);
  std::string to_csv() const;
};

class ExperimentReport {
 public:
  explicit ExperimentReport(std::string experiment) : experiment_(std::move(experiment)) {}

  const std::string& experiment() const { return experiment_; }

  void add_empirical(const std::string& key, double value, double stderr_value);
  void add_empirical(const std::string& key, Json value);
  void add_predicted(const std::string& key, double value, const std::string& reference);
  void add_predicted(const std::string& key, Json value, const std::string& reference);
  void add_distance(const std::string& key, double value);
  void add_check(const std::string& key, bool passed, const std::string& detail);

  Json& empirical() { return empirical_; }
  Json& predicted() { return predicted_; }
  Json& provenance() { return provenance_; }
  const Json& empirical() const { return empirical_; }
  const Json& predicted() const { return predicted_; }
  const Json& distances() const { return distances_; }
  const Json& checks() const { return checks_; }
  const Json& provenance() const { return provenance_; }

  Table& table(const std::string& name, std::vector<std::string> header);
  const std::vector<std::pair<std::string, Table>>& tables() const { return tables_; }
  const Table* find_table(const std::string& name) const;

  Json to_json() const;
  // report.json plus tables/<name>.csv under dir (created if missing).
  void write(const std::filesystem::path& dir) const;

 private:
  std::string experiment_;
  Json empirical_ = Json::object();
  Json predicted_ = Json::object();
  Json distances_ = Json::object();
  Json checks_ = Json::object();
  Json provenance_ = Json::object();
  std::vector<std::pair<std::string, Table>> tables_;
};

}  // namespace latstat::report
