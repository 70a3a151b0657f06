#include "chmm/ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "chmm/errors.hpp"

namespace chmm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& path, long line_no) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + text + "'");
  }
  return value;
}

long parse_long(const std::string& text, const std::string& path, long line_no) {
  long value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad integer '" + text + "'");
  }
  return value;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::chrono::year_month_day parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u", &y, &m, &d) != 3) {
    throw ParseError("bad date '" + text + "', expected YYYY-MM-DD");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw ParseError("invalid calendar date '" + text + "'");
  return ymd;
}

AggregateResult aggregate_checklists(const std::vector<ChecklistRecord>& records,
                                     const std::string& species,
                                     std::chrono::year_month_day epoch, int n_weeks,
                                     const std::vector<std::string>& node_ids) {
  if (n_weeks < 1) throw InvalidInput("at least one week is required");
  std::unordered_map<std::string, Index> index;
  for (std::size_t j = 0; j < node_ids.size(); ++j) {
    index.emplace(node_ids[j], static_cast<Index>(j));
  }

  AggregateResult out;
  out.obs.y = Matrix::Zero(n_weeks, static_cast<Index>(node_ids.size()));
  out.obs.t = Matrix::Zero(n_weeks, static_cast<Index>(node_ids.size()));

  const std::chrono::sys_days start{epoch};
  for (const auto& record : records) {
    auto it = index.find(record.node_id);
    if (it == index.end()) {
      throw UnknownNode("checklist references unknown node: " + record.node_id);
    }
    if (record.count < 0) throw InvariantViolation("negative checklist count");
    if (!(record.effort_hours > 0.0)) {
      throw InvariantViolation("checklist effort must be positive");
    }
    const auto days = (std::chrono::sys_days{record.date} - start).count();
    if (days < 0 || days >= 7L * n_weeks) {
      ++out.skipped_out_of_range;
      continue;
    }
    const Index week = static_cast<Index>(days / 7);
    out.obs.t(week, it->second) += record.effort_hours;
    if (record.species == species) {
      out.obs.y(week, it->second) += static_cast<double>(record.count);
    }
  }
  out.obs.validate();
  return out;
}

std::vector<ChecklistRecord> load_checklists(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (strip_cr(line) != "node_id,date,species,count,effort_hours") {
    throw ParseError(path + ":1: expected header node_id,date,species,count,effort_hours");
  }
  std::vector<ChecklistRecord> records;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 5 fields");
    }
    ChecklistRecord record;
    record.node_id = fields[0];
    try {
      record.date = parse_date(fields[1]);
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    record.species = fields[2];
    record.count = parse_long(fields[3], path, line_no);
    record.effort_hours = parse_double(fields[4], path, line_no);
    records.push_back(std::move(record));
  }
  return records;
}

ObservationSet load_counts(const std::string& path,
                           const std::vector<std::string>& node_ids) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (strip_cr(line) != "time_index,node_id,count,effort_hours") {
    throw ParseError(path + ":1: expected header time_index,node_id,count,effort_hours");
  }
  std::unordered_map<std::string, Index> index;
  for (std::size_t j = 0; j < node_ids.size(); ++j) {
    index.emplace(node_ids[j], static_cast<Index>(j));
  }

  struct Cell {
    Index time;
    Index node;
    double count;
    double effort;
  };
  std::vector<Cell> cells;
  Index max_time = -1;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 4 fields");
    }
    const long time = parse_long(fields[0], path, line_no);
    if (time < 0) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": negative time index");
    }
    auto it = index.find(fields[1]);
    if (it == index.end()) {
      throw UnknownNode(path + ":" + std::to_string(line_no) + ": unknown node '" +
                        fields[1] + "'");
    }
    cells.push_back(Cell{static_cast<Index>(time), it->second,
                         parse_double(fields[2], path, line_no),
                         parse_double(fields[3], path, line_no)});
    max_time = std::max(max_time, static_cast<Index>(time));
  }
  if (max_time < 0) throw ParseError(path + ": no data rows");

  ObservationSet obs;
  obs.y = Matrix::Zero(max_time + 1, static_cast<Index>(node_ids.size()));
  obs.t = Matrix::Zero(max_time + 1, static_cast<Index>(node_ids.size()));
  for (const auto& cell : cells) {
    obs.y(cell.time, cell.node) = cell.count;
    obs.t(cell.time, cell.node) = cell.effort;
  }
  obs.validate();
  return obs;
}

void save_counts(const std::string& path, const ObservationSet& obs,
                 const std::vector<std::string>& node_ids) {
  obs.validate();
  if (static_cast<Index>(node_ids.size()) != obs.n_node()) {
    throw InvalidInput("node id list does not match the observation set");
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "time_index,node_id,count,effort_hours\n";
  char buffer[64];
  for (Index i = 0; i < obs.n_time(); ++i) {
    for (Index j = 0; j < obs.n_node(); ++j) {
      auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), obs.t(i, j));
      out << i << ',' << node_ids[static_cast<std::size_t>(j)] << ','
          << static_cast<long long>(obs.y(i, j)) << ','
          << std::string_view(buffer, static_cast<std::size_t>(ptr - buffer)) << '\n';
    }
  }
  if (!out) throw ParseError("write failed for " + path);
}

std::array<double, 2> project_equirectangular(double lon_deg, double lat_deg,
                                              double ref_lat_deg) {
  constexpr double kEarthRadiusKm = 6371.0;
  const double to_rad = std::numbers::pi / 180.0;
  return {kEarthRadiusKm * lon_deg * to_rad * std::cos(ref_lat_deg * to_rad),
          kEarthRadiusKm * lat_deg * to_rad};
}

}  // namespace chmm
