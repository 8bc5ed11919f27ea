#pragma once

// Case-count ingestion and auxiliary attribute tables.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "chpca/csv.hpp"
#include "chpca/types.hpp"

namespace chpca {

struct CaseRecord {
  std::string country;
  Date date;
  double new_cases = 0.0;

  friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

/// Column mapping and filters for parse_cases. Defaults follow the WHO dashboard export.
struct IngestConfig {
  std::string date_column = "Date_reported";
  std::string country_column = "Country_code";
  std::string cases_column = "New_cases";
  char delimiter = ',';
  /// Countries to keep. Empty means every code that looks like an ISO 3166-1 code.
  std::vector<std::string> countries;
  Date window_begin = make_date(2020, 1, 3);
  Date window_end = make_date(2023, 1, 5);
};

struct CaseData {
  std::vector<CaseRecord> records;             // sorted by (country, date), gap-free
  std::vector<std::string> excluded_countries;  // sorted, unique
  std::size_t source_rows = 0;
  std::size_t gap_filled = 0;
};

/// True for 2-3 letter alphabetic codes outside the ISO 3166-1 user-assigned
/// ranges (AA, QM-QZ, XA-XZ, ZZ). The WHO export uses those ranges and blanks
/// for territories without an ISO code.
inline bool is_iso_country_code(std::string_view code) {
  if (code.size() < 2 || code.size() > 3) return false;
  for (char c : code)
    if (!std::isupper(static_cast<unsigned char>(c))) return false;
  if (code.size() == 2) {
    if (code == "AA" || code == "ZZ") return false;
    if (code[0] == 'X') return false;
    if (code[0] == 'Q' && code[1] >= 'M') return false;
  } else {
    if (code.substr(0, 2) == "AA" || code.substr(0, 2) == "ZZ") return false;
    if (code[0] == 'X') return false;
    if (code[0] == 'Q' && code[1] >= 'M') return false;
  }
  return true;
}

/// Reads delimited case counts. Days missing inside the observed span are
/// synthesized with zero cases for every retained country.
inline CaseData parse_cases(std::istream& in, const IngestConfig& config = {}) {
  csv::Reader reader(in, config.delimiter);
  const auto header = reader.next();
  if (!header) throw ParseError("empty case input", 0);
  const std::size_t date_col = csv::column_index(*header, config.date_column);
  const std::size_t country_col = csv::column_index(*header, config.country_column);
  const std::size_t cases_col = csv::column_index(*header, config.cases_column);
  const std::size_t needed = std::max({date_col, country_col, cases_col}) + 1;

  const std::set<std::string> allowed(config.countries.begin(), config.countries.end());
  std::map<std::string, std::map<Date, double>> by_country;
  std::set<std::string> excluded;
  CaseData out;

  while (auto row = reader.next()) {
    const std::size_t line = reader.line();
    if (row->size() < needed) throw ParseError("expected at least " + std::to_string(needed) +
                                                   " fields, got " + std::to_string(row->size()),
                                               line);
    ++out.source_rows;
    Date date;
    try {
      date = parse_date((*row)[date_col]);
    } catch (const Error& e) {
      throw ParseError(e.what(), line);
    }
    const std::string& code = (*row)[country_col];
    const std::string& cases_text = (*row)[cases_col];
    double cases = 0.0;
    if (!cases_text.empty()) {
      cases = csv::parse_double(cases_text, line);
      if (cases != std::floor(cases)) throw ParseError("non-integer case count '" + cases_text + "'", line);
    }

    const bool keep = allowed.empty() ? is_iso_country_code(code) : allowed.contains(code);
    if (!keep) {
      excluded.insert(code);
      continue;
    }
    if (date < config.window_begin || date > config.window_end) continue;
    auto [it, inserted] = by_country[code].emplace(date, cases);
    if (!inserted) throw ParseError("duplicate record for " + code + " on " + format_date(date), line);
  }
  if (out.source_rows == 0) throw ParseError("case input has a header but no records", 0);
  if (by_country.empty()) throw Error("no records left after country and period filtering");

  Date first = Date::max(), last = Date::min();
  for (const auto& [code, days] : by_country) {
    first = std::min(first, days.begin()->first);
    last = std::max(last, days.rbegin()->first);
  }
  for (const auto& [code, days] : by_country) {
    for (Date d = first; d <= last; d += std::chrono::days{1}) {
      auto it = days.find(d);
      if (it == days.end()) {
        out.records.push_back({code, d, 0.0});
        ++out.gap_filled;
      } else {
        out.records.push_back({code, d, it->second});
      }
    }
  }
  out.excluded_countries.assign(excluded.begin(), excluded.end());
  return out;
}

struct CleanedCases {
  std::vector<CaseRecord> records;
  std::size_t replaced = 0;
};

inline constexpr double kCaseFloor = 0.1;

/// Replaces zero and negative counts with 0.1.
inline CleanedCases clean_cases(std::vector<CaseRecord> records) {
  CleanedCases out{std::move(records), 0};
  for (auto& r : out.records) {
    if (r.new_cases <= 0.0) {
      r.new_cases = kCaseFloor;
      ++out.replaced;
    }
  }
  return out;
}

enum class Period { entire, y2020, y2021, y2022 };

inline constexpr std::array<Period, 4> kAllPeriods{Period::entire, Period::y2020, Period::y2021,
                                                   Period::y2022};

inline std::string_view period_name(Period p) {
  switch (p) {
    case Period::entire: return "entire";
    case Period::y2020: return "2020";
    case Period::y2021: return "2021";
    case Period::y2022: return "2022";
  }
  return "";
}

inline Period parse_period(std::string_view text) {
  for (Period p : kAllPeriods)
    if (period_name(p) == text) return p;
  throw Error("unknown period '" + std::string(text) + "' (expected entire, 2020, 2021 or 2022)");
}

/// Inclusive calendar bounds of an analysis period.
inline std::pair<Date, Date> period_bounds(Period p) {
  const Date start = make_date(2020, 1, 3);
  switch (p) {
    case Period::entire: return {start, make_date(2022, 12, 31)};
    case Period::y2020: return {start, make_date(2020, 12, 31)};
    case Period::y2021: return {make_date(2021, 1, 1), make_date(2021, 12, 31)};
    case Period::y2022: return {make_date(2022, 1, 1), make_date(2022, 12, 31)};
  }
  throw Error("bad period");
}

/// Assembles a country x day panel for the period, countries sorted by code.
/// Records must be gap-free over the days they cover.
inline Panel build_panel(const std::vector<CaseRecord>& records, Period period) {
  auto [begin, end] = period_bounds(period);
  std::map<std::string, std::map<Date, double>> by_country;
  Date first = Date::max(), last = Date::min();
  for (const auto& r : records) {
    if (r.date < begin || r.date > end) continue;
    by_country[r.country][r.date] = r.new_cases;
    first = std::min(first, r.date);
    last = std::max(last, r.date);
  }
  if (by_country.empty())
    throw Error("period " + std::string(period_name(period)) + " contains no days");

  Panel panel;
  for (Date d = first; d <= last; d += std::chrono::days{1}) panel.dates.push_back(d);
  panel.values.resize(static_cast<Eigen::Index>(by_country.size()),
                      static_cast<Eigen::Index>(panel.dates.size()));
  Eigen::Index row = 0;
  for (const auto& [code, days] : by_country) {
    panel.countries.push_back(code);
    for (std::size_t t = 0; t < panel.dates.size(); ++t) {
      auto it = days.find(panel.dates[t]);
      if (it == days.end())
        throw Error("country " + code + " has no record on " + format_date(panel.dates[t]) +
                    "; records are not gap-free");
      panel.values(row, static_cast<Eigen::Index>(t)) = it->second;
    }
    ++row;
  }
  return panel;
}

// ---------------------------------------------------------------------------
// Auxiliary attributes

enum class Attribute { region, population, gdp_per_capita, stringency, containment, vaccination, democracy };

inline constexpr std::array<Attribute, 7> kAllAttributes{
    Attribute::region,      Attribute::population,  Attribute::gdp_per_capita,
    Attribute::stringency,  Attribute::containment, Attribute::vaccination,
    Attribute::democracy};

/// Short identifier used on the command line and in CSV files.
inline std::string_view attribute_key(Attribute a) {
  switch (a) {
    case Attribute::region: return "region";
    case Attribute::population: return "population";
    case Attribute::gdp_per_capita: return "gdp_per_capita";
    case Attribute::stringency: return "stringency";
    case Attribute::containment: return "containment";
    case Attribute::vaccination: return "vaccination";
    case Attribute::democracy: return "democracy";
  }
  return "";
}

/// Block label in the mean-distance table.
inline std::string_view attribute_label(Attribute a) {
  switch (a) {
    case Attribute::region: return "Regions";
    case Attribute::population: return "Population";
    case Attribute::gdp_per_capita: return "GDP/Population";
    case Attribute::stringency: return "Stringency Index";
    case Attribute::containment: return "Containment & Health Index";
    case Attribute::vaccination: return "Vaccination Rate";
    case Attribute::democracy: return "Democracy Index";
  }
  return "";
}

inline Attribute parse_attribute(std::string_view key) {
  for (Attribute a : kAllAttributes)
    if (attribute_key(a) == key) return a;
  throw Error("unknown attribute '" + std::string(key) + "'");
}

inline constexpr std::array<std::string_view, 5> kRegions{"Asia", "Europe", "Africa", "Oceania",
                                                          "Americas"};

/// Observations of one attribute: country -> (year -> values in that year).
using AttributeSeries = std::map<std::string, std::map<int, std::vector<double>>>;
using RegionMap = std::map<std::string, std::string>;

/// Reads `country,region`.
inline RegionMap read_regions(std::istream& in, char delimiter = ',') {
  csv::Reader reader(in, delimiter);
  const auto header = reader.next();
  if (!header) throw ParseError("empty region file", 0);
  const std::size_t country_col = csv::column_index(*header, "country");
  const std::size_t region_col = csv::column_index(*header, "region");
  RegionMap out;
  while (auto row = reader.next()) {
    if (row->size() <= std::max(country_col, region_col))
      throw ParseError("too few fields", reader.line());
    const std::string& region = (*row)[region_col];
    if (region.empty()) continue;
    if (std::find(kRegions.begin(), kRegions.end(), region) == kRegions.end())
      throw ParseError("unknown region '" + region + "'", reader.line());
    out[(*row)[country_col]] = region;
  }
  return out;
}

/// Reads `country,year,value` or `country,date,value` long-format files.
/// Empty values are skipped; several rows in one year are averaged later.
inline AttributeSeries read_attribute(std::istream& in, char delimiter = ',') {
  csv::Reader reader(in, delimiter);
  const auto header = reader.next();
  if (!header) throw ParseError("empty attribute file", 0);
  const std::size_t country_col = csv::column_index(*header, "country");
  const std::size_t value_col = csv::column_index(*header, "value");
  const bool has_year = std::find(header->begin(), header->end(), "year") != header->end();
  const std::size_t time_col = csv::column_index(*header, has_year ? "year" : "date");
  AttributeSeries out;
  while (auto row = reader.next()) {
    const std::size_t line = reader.line();
    if (row->size() <= std::max({country_col, value_col, time_col}))
      throw ParseError("too few fields", line);
    const std::string& value = (*row)[value_col];
    if (value.empty()) continue;
    int year = 0;
    try {
      year = has_year ? static_cast<int>(csv::parse_double((*row)[time_col], line))
                      : year_of(parse_date((*row)[time_col]));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line);
    }
    out[(*row)[country_col]][year].push_back(csv::parse_double(value, line));
  }
  return out;
}

struct AuxiliarySources {
  std::optional<RegionMap> regions;
  std::optional<AttributeSeries> population;
  std::optional<AttributeSeries> gdp;
  std::optional<AttributeSeries> stringency;
  std::optional<AttributeSeries> containment;
  std::optional<AttributeSeries> vaccination;
  std::optional<AttributeSeries> democracy;
};

/// Per-country attributes resolved for one analysis period. Missing values stay empty.
struct AuxiliaryTable {
  Period period = Period::entire;
  std::vector<std::string> countries;
  std::vector<std::optional<std::string>> region;
  std::vector<std::optional<double>> population;
  std::vector<std::optional<double>> gdp;
  std::vector<std::optional<double>> gdp_per_capita;
  std::vector<std::optional<double>> stringency;
  std::vector<std::optional<double>> containment;
  std::vector<std::optional<double>> vaccination;
  std::vector<std::optional<double>> vaccination_per_capita;
  std::vector<std::optional<double>> democracy;
  /// Attributes whose source file was supplied.
  std::set<Attribute> available;
  std::vector<std::string> warnings;

  /// Values used for grouping. Vaccination is grouped per capita.
  const std::vector<std::optional<double>>& numeric(Attribute a) const {
    switch (a) {
      case Attribute::population: return population;
      case Attribute::gdp_per_capita: return gdp_per_capita;
      case Attribute::stringency: return stringency;
      case Attribute::containment: return containment;
      case Attribute::vaccination: return vaccination_per_capita;
      case Attribute::democracy: return democracy;
      case Attribute::region: break;
    }
    throw Error("region is categorical");
  }

  std::size_t missing_count(Attribute a) const {
    if (a == Attribute::region)
      return static_cast<std::size_t>(std::count(region.begin(), region.end(), std::nullopt));
    const auto& v = numeric(a);
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), std::nullopt));
  }
};

namespace detail {

enum class Resolution { reference_year, period_mean };

inline std::optional<double> resolve(const std::map<int, std::vector<double>>& years, Period period,
                                     Resolution entire_rule) {
  auto mean_of = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  auto year_value = [&](int y) -> std::optional<double> {
    auto it = years.find(y);
    if (it == years.end() || it->second.empty()) return std::nullopt;
    return mean_of(it->second);
  };
  switch (period) {
    case Period::y2020: return year_value(2020);
    case Period::y2021: return year_value(2021);
    case Period::y2022: return year_value(2022);
    case Period::entire: break;
  }
  if (entire_rule == Resolution::reference_year) return year_value(2020);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [y, values] : years) {
    if (y < 2020 || y > 2022) continue;
    sum = std::accumulate(values.begin(), values.end(), sum);
    n += values.size();
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace detail

/// Joins auxiliary sources onto `countries` for one period. For the entire
/// period, population, GDP and democracy use 2020 values while the policy
/// indices and vaccination use their mean over 2020-2022.
inline AuxiliaryTable assemble_auxiliary(const std::vector<std::string>& countries, Period period,
                                         const AuxiliarySources& sources) {
  AuxiliaryTable table;
  table.period = period;
  table.countries = countries;
  const std::size_t n = countries.size();
  const std::set<std::string> known(countries.begin(), countries.end());

  auto warn_unknown = [&](std::string_view what, const auto& keyed) {
    for (const auto& [code, unused] : keyed)
      if (!known.contains(code))
        table.warnings.push_back(std::string(what) + ": unknown country code '" + code +
                                 "' skipped");
  };

  table.region.assign(n, std::nullopt);
  if (sources.regions) {
    table.available.insert(Attribute::region);
    warn_unknown("region", *sources.regions);
    for (std::size_t i = 0; i < n; ++i)
      if (auto it = sources.regions->find(countries[i]); it != sources.regions->end())
        table.region[i] = it->second;
  }

  auto fill = [&](std::string_view what, const std::optional<AttributeSeries>& src,
                  detail::Resolution rule) {
    std::vector<std::optional<double>> out(n);
    if (!src) return out;
    warn_unknown(what, *src);
    for (std::size_t i = 0; i < n; ++i)
      if (auto it = src->find(countries[i]); it != src->end())
        out[i] = detail::resolve(it->second, period, rule);
    return out;
  };
  using detail::Resolution;
  table.population = fill("population", sources.population, Resolution::reference_year);
  table.gdp = fill("gdp", sources.gdp, Resolution::reference_year);
  table.stringency = fill("stringency", sources.stringency, Resolution::period_mean);
  table.containment = fill("containment", sources.containment, Resolution::period_mean);
  table.vaccination = fill("vaccination", sources.vaccination, Resolution::period_mean);
  table.democracy = fill("democracy", sources.democracy, Resolution::reference_year);

  table.gdp_per_capita.assign(n, std::nullopt);
  table.vaccination_per_capita.assign(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pop = table.population[i];
    if (!pop || *pop <= 0.0) continue;
    if (table.gdp[i]) table.gdp_per_capita[i] = *table.gdp[i] / *pop;
    if (table.vaccination[i]) table.vaccination_per_capita[i] = *table.vaccination[i] / *pop;
  }

  if (sources.population) table.available.insert(Attribute::population);
  if (sources.population && sources.gdp) table.available.insert(Attribute::gdp_per_capita);
  if (sources.stringency) table.available.insert(Attribute::stringency);
  if (sources.containment) table.available.insert(Attribute::containment);
  if (sources.population && sources.vaccination) table.available.insert(Attribute::vaccination);
  if (sources.democracy) table.available.insert(Attribute::democracy);
  return table;
}

/// Paths of the auxiliary files; empty paths are skipped.
struct AuxiliaryFiles {
  std::string regions, population, gdp, stringency, containment, vaccination, democracy;
};

inline AuxiliaryTable load_auxiliary(const AuxiliaryFiles& files, Period period,
                                     const std::vector<std::string>& countries) {
  auto open = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open auxiliary file '" + path + "'");
    return in;
  };
  auto attribute = [&](const std::string& path) -> std::optional<AttributeSeries> {
    if (path.empty()) return std::nullopt;
    auto in = open(path);
    try {
      return read_attribute(in);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), 0);
    }
  };
  AuxiliarySources sources;
  if (!files.regions.empty()) {
    auto in = open(files.regions);
    sources.regions = read_regions(in);
  }
  sources.population = attribute(files.population);
  sources.gdp = attribute(files.gdp);
  sources.stringency = attribute(files.stringency);
  sources.containment = attribute(files.containment);
  sources.vaccination = attribute(files.vaccination);
  sources.democracy = attribute(files.democracy);
  return assemble_auxiliary(countries, period, sources);
}

/// Maps observed values to their rank on a uniform grid over [0, 1]. Ties are
/// ordered by country code. A single observation maps to 0.5.
inline std::vector<std::optional<double>> rank_normalize(
    const std::vector<std::optional<double>>& values, const std::vector<std::string>& countries) {
  if (values.size() != countries.size()) throw Error("rank_normalize: size mismatch");
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i]) order.push_back(i);
  if (order.empty()) throw Error("rank_normalize: every value is missing");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (*values[a] != *values[b]) return *values[a] < *values[b];
    return countries[a] < countries[b];
  });
  std::vector<std::optional<double>> out(values.size());
  const double denom = static_cast<double>(order.size() - 1);
  for (std::size_t r = 0; r < order.size(); ++r)
    out[order[r]] = order.size() == 1 ? 0.5 : static_cast<double>(r) / denom;
  return out;
}

}  // namespace chpca
