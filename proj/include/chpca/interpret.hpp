#pragma once

// Eigenvector projection, attribute groupings, barycentres and the
// mean-distance table.

#include <algorithm>
#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chpca/hilbert.hpp"
#include "chpca/ingest.hpp"
#include "chpca/spectrum.hpp"

namespace chpca {

struct Projection {
  double argument = 0.0;  // (-pi, pi]; larger means leading
  double amplitude = 0.0;
};

inline std::vector<Projection> project(const Eigen::VectorXcd& eigenvector) {
  std::vector<Projection> out(static_cast<std::size_t>(eigenvector.size()));
  for (Eigen::Index c = 0; c < eigenvector.size(); ++c) {
    const auto ap = amplitude_phase(eigenvector(c));
    out[static_cast<std::size_t>(c)] = {ap.phase, ap.amplitude};
  }
  return out;
}

inline constexpr std::string_view kMissingGroup = "missing";
inline constexpr std::array<std::string_view, 5> kQuintileLabels{"First", "Second", "Third", "Fourth",
                                                                 "Fifth"};

/// Group label per country; "missing" marks countries without a value.
struct Grouping {
  std::vector<std::string> labels;
  /// Report order of the non-missing groups.
  std::vector<std::string> order;
};

/// Sorts observed values ascending (ties by country code) and cuts the ranks
/// into five contiguous bins; bin sizes differ by at most one, larger bins first.
inline Grouping quintile_grouping(const std::vector<std::optional<double>>& values,
                                  const std::vector<std::string>& countries) {
  if (values.size() != countries.size()) throw Error("quintile_grouping: size mismatch");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i]) order.push_back(i);
  if (order.size() < 5) throw Error("quintile_grouping: need at least 5 observed values");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (*values[a] != *values[b]) return *values[a] < *values[b];
    return countries[a] < countries[b];
  });

  Grouping g;
  g.labels.assign(values.size(), std::string(kMissingGroup));
  const std::size_t base = order.size() / 5, extra = order.size() % 5;
  std::size_t pos = 0;
  for (std::size_t bin = 0; bin < 5; ++bin) {
    const std::size_t size = base + (bin < extra ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) g.labels[order[pos++]] = std::string(kQuintileLabels[bin]);
    g.order.emplace_back(kQuintileLabels[bin]);
  }
  return g;
}

inline Grouping region_grouping(const std::vector<std::optional<std::string>>& regions) {
  Grouping g;
  for (const auto& r : regions) g.labels.push_back(r ? *r : std::string(kMissingGroup));
  for (auto name : kRegions) g.order.emplace_back(name);
  return g;
}

inline Grouping attribute_grouping(const AuxiliaryTable& table, Attribute attribute) {
  if (attribute == Attribute::region) return region_grouping(table.region);
  return quintile_grouping(table.numeric(attribute), table.countries);
}

struct GroupBarycentre {
  std::string label;
  std::complex<double> barycentre;
  double mean_distance = 0.0;
  std::size_t member_count = 0;
};

struct BarycentreReport {
  std::vector<GroupBarycentre> groups;
  std::size_t missing_count = 0;
  std::vector<std::string> warnings;
};

/// Complex mean of each group's components and the mean modulus of the
/// deviations from it. Groups in `grouping.order` with no members are omitted
/// with a warning; the missing group is only counted.
inline BarycentreReport barycentres(const Eigen::VectorXcd& eigenvector, const Grouping& grouping) {
  if (static_cast<std::size_t>(eigenvector.size()) != grouping.labels.size())
    throw Error("barycentres: grouping does not cover the eigenvector");
  BarycentreReport report;
  for (const auto& label : grouping.labels)
    if (label == kMissingGroup) ++report.missing_count;

  for (const auto& label : grouping.order) {
    std::vector<std::complex<double>> members;
    for (std::size_t c = 0; c < grouping.labels.size(); ++c)
      if (grouping.labels[c] == label) members.push_back(eigenvector(static_cast<Eigen::Index>(c)));
    if (members.empty()) {
      report.warnings.push_back("group '" + label + "' has no members; omitted");
      continue;
    }
    GroupBarycentre g;
    g.label = label;
    g.member_count = members.size();
    for (const auto& z : members) g.barycentre += z;
    g.barycentre /= static_cast<double>(members.size());
    for (const auto& z : members) g.mean_distance += std::abs(z - g.barycentre);
    g.mean_distance /= static_cast<double>(members.size());
    report.groups.push_back(g);
  }
  return report;
}

/// "leading" when the group's barycentre argument exceeds the reference argument.
inline std::string_view lead_lag_label(std::complex<double> barycentre, std::complex<double> reference) {
  return wrap_angle(principal_arg(barycentre) - principal_arg(reference)) > 0.0 ? "leading" : "lagging";
}

/// Inputs for one analysis period.
struct PeriodAnalysis {
  const Spectrum* spectrum = nullptr;
  const AuxiliaryTable* auxiliary = nullptr;
};

struct MeanDistanceRow {
  Attribute attribute;
  std::string group;
  std::array<std::optional<double>, 4> values;  // entire, 2020, 2021, 2022
};

struct MeanDistanceTable {
  int rank = 1;
  std::vector<MeanDistanceRow> rows;
  std::vector<std::string> warnings;
};

inline std::size_t period_column(Period p) {
  return static_cast<std::size_t>(std::find(kAllPeriods.begin(), kAllPeriods.end(), p) - kAllPeriods.begin());
}

/// Mean distance from the barycentre per (attribute, group) and period for
/// eigenvector `rank` (1-based). All four periods are required; attributes
/// whose source is absent in a period are skipped with a warning.
inline MeanDistanceTable report_tables(const std::map<Period, PeriodAnalysis>& periods, int rank,
                                       const std::vector<Attribute>& attributes =
                                           {kAllAttributes.begin(), kAllAttributes.end()}) {
  for (Period p : kAllPeriods) {
    auto it = periods.find(p);
    if (it == periods.end() || !it->second.spectrum || !it->second.auxiliary)
      throw Error("report_tables: missing spectrum for period " + std::string(period_name(p)));
    if (rank < 1 || rank > it->second.spectrum->size())
      throw Error("report_tables: rank out of range for period " + std::string(period_name(p)));
    if (it->second.spectrum->countries != it->second.auxiliary->countries)
      throw Error("report_tables: auxiliary table and spectrum disagree on countries for period " +
                  std::string(period_name(p)));
  }

  MeanDistanceTable table;
  table.rank = rank;
  for (Attribute attribute : attributes) {
    std::vector<std::string> order;
    std::map<std::string, std::array<std::optional<double>, 4>> cells;
    bool any = false;
    for (Period p : kAllPeriods) {
      const auto& input = periods.at(p);
      if (!input.auxiliary->available.contains(attribute)) {
        table.warnings.push_back(std::string(attribute_key(attribute)) + ": no data for period " +
                                 std::string(period_name(p)));
        continue;
      }
      Grouping grouping;
      try {
        grouping = attribute_grouping(*input.auxiliary, attribute);
      } catch (const Error& e) {
        table.warnings.push_back(std::string(attribute_key(attribute)) + " (" +
                                 std::string(period_name(p)) + "): " + e.what());
        continue;
      }
      if (order.empty()) order = grouping.order;
      const auto report =
          barycentres(input.spectrum->eigenvectors.col(rank - 1), grouping);
      for (const auto& w : report.warnings) table.warnings.push_back(w);
      for (const auto& g : report.groups) cells[g.label][period_column(p)] = g.mean_distance;
      any = true;
    }
    if (!any) continue;
    for (const auto& label : order) table.rows.push_back({attribute, label, cells[label]});
  }
  return table;
}

}  // namespace chpca
