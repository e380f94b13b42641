#include "latstat/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "latstat/error.hpp"

namespace latstat::report {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string format_number(std::uint64_t x) { return std::to_string(x); }

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw InvariantError("table row width does not match header");
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void ExperimentReport::add_empirical(const std::string& key, double value, double stderr_value) {
  empirical_[key] = Json{{"value", value}, {"stderr", stderr_value}};
}

void ExperimentReport::add_empirical(const std::string& key, Json value) { empirical_[key] = std::move(value); }

void ExperimentReport::add_predicted(const std::string& key, double value, const std::string& reference) {
  predicted_[key] = Json{{"value", value}, {"reference", reference}};
}

void ExperimentReport::add_predicted(const std::string& key, Json value, const std::string& reference) {
  predicted_[key] = Json{{"value", std::move(value)}, {"reference", reference}};
}

void ExperimentReport::add_distance(const std::string& key, double value) { distances_[key] = value; }

void ExperimentReport::add_check(const std::string& key, bool passed, const std::string& detail) {
  checks_[key] = Json{{"passed", passed}, {"detail", detail}};
}

Table& ExperimentReport::table(const std::string& name, std::vector<std::string> header) {
  for (auto& [n, t] : tables_) {
    if (n == name) return t;
  }
  tables_.emplace_back(name, Table{std::move(header), {}});
  return tables_.back().second;
}

const Table* ExperimentReport::find_table(const std::string& name) const {
  for (const auto& [n, t] : tables_) {
    if (n == name) return &t;
  }
  return nullptr;
}

Json ExperimentReport::to_json() const {
  Json out;
  out["experiment"] = experiment_;
  out["empirical"] = empirical_;
  out["predicted"] = predicted_;
  out["distances"] = distances_;
  out["checks"] = checks_;
  out["provenance"] = provenance_;
  return out;
}

void ExperimentReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir / "tables");
  {
    std::ofstream f(dir / "report.json", std::ios::binary);
    f << to_json().dump(2) << '\n';
    if (!f) throw ResourceError("cannot write " + (dir / "report.json").string());
  }
  for (const auto& [name, t] : tables_) {
    const auto path = dir / "tables" / (name + ".csv");
    std::ofstream f(path, std::ios::binary);
    f << t.to_csv();
    if (!f) throw ResourceError("cannot write " + path.string());
  }
}

}  // namespace latstat::report
