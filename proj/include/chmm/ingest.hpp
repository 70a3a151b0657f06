#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "chmm/hmm.hpp"

namespace chmm {

struct ChecklistRecord {
  std::string node_id;
  std::chrono::year_month_day date;
  std::string species;
  long count = 0;
  double effort_hours = 0.0;
};

struct AggregateResult {
  ObservationSet obs;
  long skipped_out_of_range = 0;
};

// Aggregate checklists into week x node counts and efforts. Weeks are
// consecutive 7-day blocks starting at `epoch`. Counts sum only records of
// the target species; efforts sum every checklist in the cell. Records
// outside [epoch, epoch + 7 * n_weeks) are skipped and counted.
AggregateResult aggregate_checklists(const std::vector<ChecklistRecord>& records,
                                     const std::string& species,
                                     std::chrono::year_month_day epoch, int n_weeks,
                                     const std::vector<std::string>& node_ids);

// CSV: node_id,date(YYYY-MM-DD),species,count,effort_hours with header.
std::vector<ChecklistRecord> load_checklists(const std::string& path);

// Long-format counts CSV: time_index,node_id,count,effort_hours. Cells
// absent from the file load as zero count and zero effort.
ObservationSet load_counts(const std::string& path,
                           const std::vector<std::string>& node_ids);
void save_counts(const std::string& path, const ObservationSet& obs,
                 const std::vector<std::string>& node_ids);

std::chrono::year_month_day parse_date(const std::string& text);

// Equirectangular projection to kilometers around a reference latitude;
// used to turn lon/lat centroids into the planar coordinates the graph
// expects.
std::array<double, 2> project_equirectangular(double lon_deg, double lat_deg,
                                              double ref_lat_deg);

}  // namespace chmm
