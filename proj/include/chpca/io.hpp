#pragma once

// File formats: panel CSV, correlation CSV/JSON, spectrum JSON, and the
// report tables. CSV floats use %.17g.

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "chpca/csv.hpp"
#include "chpca/hilbert.hpp"
#include "chpca/interpret.hpp"
#include "chpca/spectrum.hpp"
#include "chpca/types.hpp"

namespace chpca::io {

using nlohmann::json;

// --- Panel -----------------------------------------------------------------

/// Header: country,<date>,<date>,... then one row per country.
inline void write_panel_csv(std::ostream& out, const Panel& panel) {
  out << "country";
  for (Date d : panel.dates) out << ',' << format_date(d);
  out << '\n';
  for (Eigen::Index c = 0; c < panel.n_series(); ++c) {
    out << panel.countries[static_cast<std::size_t>(c)];
    for (Eigen::Index t = 0; t < panel.n_days(); ++t) out << ',' << format_double(panel.values(c, t));
    out << '\n';
  }
}

inline Panel read_panel_csv(std::istream& in) {
  csv::Reader reader(in, ',');
  const auto header = reader.next();
  if (!header || header->empty() || (*header)[0] != "country")
    throw ParseError("panel CSV must start with a 'country' header", 1);
  Panel panel;
  for (std::size_t i = 1; i < header->size(); ++i) {
    try {
      panel.dates.push_back(parse_date((*header)[i]));
    } catch (const Error& e) {
      throw ParseError(e.what(), 1);
    }
    if (i > 1 && panel.dates.back() != panel.dates[i - 2] + std::chrono::days{1})
      throw ParseError("panel dates must be consecutive", 1);
  }
  std::vector<std::vector<double>> rows;
  while (auto row = reader.next()) {
    if (row->size() != header->size())
      throw ParseError("expected " + std::to_string(header->size()) + " fields", reader.line());
    for (const auto& existing : panel.countries)
      if (existing == (*row)[0]) throw ParseError("duplicate country " + existing, reader.line());
    panel.countries.push_back((*row)[0]);
    std::vector<double> values;
    for (std::size_t i = 1; i < row->size(); ++i) values.push_back(csv::parse_double((*row)[i], reader.line()));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("panel CSV has no rows", 0);
  panel.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(panel.dates.size()));
  for (std::size_t c = 0; c < rows.size(); ++c)
    for (std::size_t t = 0; t < rows[c].size(); ++t)
      panel.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = rows[c][t];
  return panel;
}

// --- Correlation matrix ----------------------------------------------------

/// Header: country,<b>_re,<b>_im,... Each row holds M_ab for one a.
inline void write_correlation_csv(std::ostream& out, const ComplexCorrMatrix& m) {
  out << "country";
  for (const auto& c : m.countries) out << ',' << c << "_re," << c << "_im";
  out << '\n';
  for (Eigen::Index a = 0; a < m.values.rows(); ++a) {
    out << m.countries[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < m.values.cols(); ++b)
      out << ',' << format_double(m.values(a, b).real()) << ',' << format_double(m.values(a, b).imag());
    out << '\n';
  }
}

inline json correlation_json(const ComplexCorrMatrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index a = 0; a < m.values.rows(); ++a) {
    json r = json::array(), i = json::array();
    for (Eigen::Index b = 0; b < m.values.cols(); ++b) {
      r.push_back(m.values(a, b).real());
      i.push_back(m.values(a, b).imag());
    }
    re.push_back(std::move(r));
    im.push_back(std::move(i));
  }
  return {{"countries", m.countries}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline ComplexCorrMatrix correlation_from_json(const json& j) {
  ComplexCorrMatrix m;
  m.countries = j.at("countries").get<std::vector<std::string>>();
  const auto n = static_cast<Eigen::Index>(m.countries.size());
  m.values.resize(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      m.values(a, b) = {j.at("re").at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b)).get<double>(),
                        j.at("im").at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b)).get<double>()};
  return m;
}

// --- Spectrum --------------------------------------------------------------

/// Eigenvectors are exported for the first `vector_count` ranks (all when negative).
inline json spectrum_json(const Spectrum& s, int vector_count = -1) {
  json j;
  j["countries"] = s.countries;
  j["eigenvalues"] = std::vector<double>(s.eigenvalues.data(), s.eigenvalues.data() + s.size());
  if (s.rrs) {
    const auto& r = *s.rrs;
    j["rrs"] = {
        {"n_samples", r.config.n_samples},
        {"confidence_multiplier", r.config.confidence_multiplier},
        {"seed", r.config.seed},
        {"spread", spread_name(r.config.spread)},
        {"mean", std::vector<double>(r.mean.data(), r.mean.data() + r.mean.size())},
        {"sd", std::vector<double>(r.sd.data(), r.sd.data() + r.sd.size())},
        {"se", std::vector<double>(r.se.data(), r.se.data() + r.se.size())},
    };
    std::vector<double> margin;
    for (const auto& row : scree_table(s)) margin.push_back(row.margin);
    j["margin"] = margin;
    j["significant"] = s.significant;
    j["n_significant"] = significant_count(s);
  }
  const Eigen::Index k = vector_count < 0 ? s.size() : std::min<Eigen::Index>(vector_count, s.size());
  json vectors = json::array();
  for (Eigen::Index r = 0; r < k; ++r) {
    json comps = json::array();
    for (Eigen::Index c = 0; c < s.eigenvectors.rows(); ++c) {
      const auto z = s.eigenvectors(c, r);
      const auto ap = amplitude_phase(z);
      comps.push_back({{"country", s.countries[static_cast<std::size_t>(c)]},
                       {"re", z.real()},
                       {"im", z.imag()},
                       {"amplitude", ap.amplitude},
                       {"argument", ap.phase}});
    }
    vectors.push_back({{"rank", r + 1}, {"eigenvalue", s.eigenvalues(r)}, {"components", std::move(comps)}});
  }
  j["eigenvectors"] = std::move(vectors);
  return j;
}

inline Spectrum spectrum_from_json(const json& j) {
  Spectrum s;
  s.countries = j.at("countries").get<std::vector<std::string>>();
  const auto ev = j.at("eigenvalues").get<std::vector<double>>();
  const auto n = static_cast<Eigen::Index>(ev.size());
  if (n != static_cast<Eigen::Index>(s.countries.size())) throw Error("spectrum JSON: size mismatch");
  s.eigenvalues = Eigen::Map<const Eigen::VectorXd>(ev.data(), n);
  const auto& vectors = j.at("eigenvectors");
  s.eigenvectors = Eigen::MatrixXcd::Zero(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    const auto& comps = vectors[r].at("components");
    if (comps.size() != static_cast<std::size_t>(n)) throw Error("spectrum JSON: eigenvector length mismatch");
    for (std::size_t c = 0; c < comps.size(); ++c)
      s.eigenvectors(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = {
          comps[c].at("re").get<double>(), comps[c].at("im").get<double>()};
  }
  if (j.contains("rrs")) {
    const auto& r = j.at("rrs");
    RrsStats stats;
    stats.config.n_samples = r.at("n_samples").get<int>();
    stats.config.confidence_multiplier = r.at("confidence_multiplier").get<double>();
    stats.config.seed = r.at("seed").get<std::uint64_t>();
    stats.config.spread = parse_spread(r.at("spread").get<std::string>());
    auto vec = [&](const char* key) {
      const auto v = r.at(key).get<std::vector<double>>();
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    stats.mean = vec("mean");
    stats.sd = vec("sd");
    stats.se = vec("se");
    s.rrs = stats;
    s.significant = j.at("significant").get<std::vector<bool>>();
  }
  return s;
}

inline void write_scree_csv(std::ostream& out, const Spectrum& s) {
  out << "rank,observed,rrs_mean,error_bar,threshold,margin,significant\n";
  for (const auto& row : scree_table(s))
    out << row.rank << ',' << format_double(row.observed) << ',' << format_double(row.rrs_mean) << ','
        << format_double(row.error_bar) << ',' << format_double(row.rrs_mean + row.error_bar) << ','
        << format_double(row.margin) << ',' << (row.significant ? "true" : "false") << '\n';
}

// --- Interpretation reports -------------------------------------------------

/// One row per country: group label, rank-normalized value, projection and components.
inline void write_scatter_csv(std::ostream& out, const Eigen::VectorXcd& v,
                              const std::vector<std::string>& countries, const Grouping& grouping,
                              const std::vector<std::optional<double>>& rank_values) {
  out << "country,group,rank_value,argument,amplitude,re,im\n";
  const auto proj = project(v);
  for (std::size_t c = 0; c < countries.size(); ++c) {
    out << countries[c] << ',' << grouping.labels[c] << ',';
    if (c < rank_values.size() && rank_values[c]) out << format_double(*rank_values[c]);
    const auto z = v(static_cast<Eigen::Index>(c));
    out << ',' << format_double(proj[c].argument) << ',' << format_double(proj[c].amplitude) << ','
        << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
  }
}

inline void write_barycentre_csv(std::ostream& out, std::string_view attribute, std::string_view period,
                                 const BarycentreReport& report, std::complex<double> reference,
                                 bool header = true) {
  if (header)
    out << "attribute,period,group,members,re,im,argument,amplitude,mean_distance,position\n";
  for (const auto& g : report.groups) {
    const auto ap = amplitude_phase(g.barycentre);
    out << attribute << ',' << period << ',' << g.label << ',' << g.member_count << ','
        << format_double(g.barycentre.real()) << ',' << format_double(g.barycentre.imag()) << ','
        << format_double(ap.phase) << ',' << format_double(ap.amplitude) << ','
        << format_double(g.mean_distance) << ',' << lead_lag_label(g.barycentre, reference) << '\n';
  }
}

inline void write_mean_distance_csv(std::ostream& out, const MeanDistanceTable& table) {
  out << "attribute,group,entire,2020,2021,2022\n";
  for (const auto& row : table.rows) {
    out << attribute_key(row.attribute) << ',' << row.group;
    for (const auto& v : row.values) {
      out << ',';
      if (v) out << format_double(*v);
    }
    out << '\n';
  }
}

/// Aligned text in the layout of the published table (three decimals).
inline void write_mean_distance_text(std::ostream& out, const MeanDistanceTable& table) {
  out << std::left << std::setw(28) << "" << std::setw(10) << "Group" << std::right << std::setw(8)
      << "Entire" << std::setw(8) << "2020" << std::setw(8) << "2021" << std::setw(8) << "2022" << '\n';
  std::optional<Attribute> current;
  for (const auto& row : table.rows) {
    const bool first = !current || *current != row.attribute;
    if (first && current) out << std::string(70, '-') << '\n';
    current = row.attribute;
    out << std::left << std::setw(28) << (first ? std::string(attribute_label(row.attribute)) : "")
        << std::setw(10) << row.group << std::right;
    for (const auto& v : row.values) {
      std::ostringstream cell;
      if (v)
        cell << std::fixed << std::setprecision(3) << *v;
      else
        cell << "-";
      out << std::setw(8) << cell.str();
    }
    out << '\n';
  }
}

}  // namespace chpca::io
