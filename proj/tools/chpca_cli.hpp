#pragma once

// Subcommands of the chpca tool: ingest, analyze, interpret, synth.
// Flags override CHPCA_* environment variables, which override defaults.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "chpca/chpca.hpp"

namespace chpca::cli {

inline constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;
using nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

/// Files are staged in memory and written only once every stage has succeeded.
class OutputSet {
public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  std::ostringstream& open(const std::string& name) { return files_[name]; }

  void commit() const {
    fs::create_directories(dir_);
    for (const auto& [name, content] : files_) {
      const fs::path target = dir_ / name;
      const fs::path tmp = dir_ / (name + ".tmp");
      {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << content.str();
      }
      fs::rename(tmp, target);
    }
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, unused] : files_) out.push_back(name);
    return out;
  }

private:
  fs::path dir_;
  std::map<std::string, std::ostringstream> files_;
};

struct InputFile {
  std::string path;
  std::string content;
  json manifest() const { return {{"path", path}, {"sha256", sha256_hex(content)}}; }
};

inline InputFile load_input(const std::string& path) { return {path, read_file(path)}; }

/// Runs one pipeline stage and prefixes its errors with the stage name.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(std::string("stage ") + name + ": " + e.what());
  }
}

// --- ingest ------------------------------------------------------------------

struct IngestArgs {
  std::string cases;
  std::string countries_file;
  std::string period = "entire";
  std::string out;
  IngestConfig config;
  std::string delimiter = ",";
};

inline std::vector<std::string> read_country_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  csv::Reader reader(in, ',');
  while (auto row = reader.next()) {
    const std::string& code = row->front();
    if (code.empty() || code == "country" || code.front() == '#') continue;
    out.push_back(code);
  }
  return out;
}

inline void cmd_ingest(const IngestArgs& args) {
  const Period period = parse_period(args.period);
  const InputFile cases = load_input(args.cases);
  IngestConfig config = args.config;
  if (args.delimiter.size() != 1) throw Error("--delimiter must be a single character");
  config.delimiter = args.delimiter[0];
  json inputs = json::array({cases.manifest()});
  if (!args.countries_file.empty()) {
    const InputFile list = load_input(args.countries_file);
    config.countries = read_country_list(list.content);
    inputs.push_back(list.manifest());
  }

  std::istringstream in(cases.content);
  const CaseData parsed = stage("parse", [&] { return parse_cases(in, config); });
  const CleanedCases cleaned = clean_cases(parsed.records);
  const Panel panel = stage("build_panel", [&] { return build_panel(cleaned.records, period); });

  const std::string stem = "panel_" + std::string(period_name(period));
  OutputSet out(args.out);
  io::write_panel_csv(out.open(stem + ".csv"), panel);
  const json provenance = {
      {"tool", "chpca"},
      {"version", kVersion},
      {"period", period_name(period)},
      {"inputs", inputs},
      {"countries", panel.n_series()},
      {"days", panel.n_days()},
      {"first_date", format_date(panel.dates.front())},
      {"last_date", format_date(panel.dates.back())},
      {"source_rows", parsed.source_rows},
      {"gap_filled_records", parsed.gap_filled},
      {"replaced_nonpositive_records", cleaned.replaced},
      {"case_floor", kCaseFloor},
      {"excluded_countries", parsed.excluded_countries},
  };
  out.open(stem + ".json") << provenance.dump(2) << '\n';
  out.commit();
  std::cout << "ingest: " << panel.n_series() << " countries x " << panel.n_days() << " days -> "
            << (fs::path(args.out) / (stem + ".csv")).string() << '\n';
}

// --- analyze -----------------------------------------------------------------

struct AnalyzeArgs {
  std::string panel;
  std::string out;
  std::string period;  // inferred from the panel dates when empty
  std::string detrend = "state-space";
  int max_iters = 200;
  double variance_floor = 1e-8;
  bool raw_scale_detrend = false;
  int rrs_samples = 20;
  double confidence = 2.33;
  std::string spread = "sd";
  std::uint64_t seed = 0;
  bool unnormalized = false;
  int vectors = -1;
  bool export_correlation = false;
};

inline std::string infer_period(const Panel& panel) {
  const int first = year_of(panel.dates.front()), last = year_of(panel.dates.back());
  if (first == last && first >= 2020 && first <= 2022) return std::to_string(first);
  return "entire";
}

inline void cmd_analyze(const AnalyzeArgs& args) {
  DetrendConfig detrend;
  detrend.method = parse_detrend(args.detrend);
  detrend.max_likelihood_iters = args.max_iters;
  detrend.variance_floor = args.variance_floor;
  detrend.log_domain = !args.raw_scale_detrend;
  detrend.validate();
  RrsConfig rrs;
  rrs.n_samples = args.rrs_samples;
  rrs.confidence_multiplier = args.confidence;
  rrs.seed = args.seed;
  rrs.spread = parse_spread(args.spread);
  rrs.validate();
  const CorrelationOptions corr{!args.unnormalized};

  const InputFile input = load_input(args.panel);
  std::istringstream in(input.content);
  const Panel panel = stage("read_panel", [&] { return io::read_panel_csv(in); });
  const std::string period = args.period.empty() ? infer_period(panel) : args.period;
  parse_period(period);

  const Panel detrended = stage("detrend", [&] { return detrend_panel(panel, detrend); });
  const Panel ratios = stage("log_ratio", [&] { return log_ratio(detrended); });
  const Panel standardized = stage("standardize", [&] { return standardize(ratios); });
  const AnalyticPanel analytic = stage("analytic_signal", [&] { return analytic_signal(standardized); });
  const ComplexCorrMatrix matrix = stage("correlate", [&] { return complex_correlation(analytic, corr); });
  Spectrum spectrum = stage("eigendecompose", [&] { return eigendecompose(matrix); });
  spectrum.rrs = stage("rrs", [&] { return rrs_ensemble(standardized, rrs, corr); });
  spectrum.significant = stage("significance", [&] {
    return significance(spectrum.eigenvalues, spectrum.rrs->mean, spectrum.rrs->spread(),
                        rrs.confidence_multiplier);
  });

  const json manifest = {
      {"tool", "chpca"},
      {"version", kVersion},
      {"command", "analyze"},
      {"inputs", json::array({input.manifest()})},
      {"period", period},
      {"detrend",
       {{"method", detrend_name(detrend.method)},
        {"max_likelihood_iters", detrend.max_likelihood_iters},
        {"variance_floor", detrend.variance_floor},
        {"log_domain", detrend.log_domain}}},
      {"rrs",
       {{"n_samples", rrs.n_samples},
        {"confidence_multiplier", rrs.confidence_multiplier},
        {"spread", spread_name(rrs.spread)},
        {"seed", rrs.seed}}},
      {"normalized_correlation", corr.normalize},
      {"eigenvector_ranks_exported", args.vectors < 0 ? spectrum.size() : args.vectors},
      {"output_dir", args.out},
  };

  OutputSet out(args.out);
  json doc = io::spectrum_json(spectrum, args.vectors);
  doc["period"] = period;
  doc["days_analyzed"] = standardized.n_days();
  doc["manifest"] = manifest;
  out.open("spectrum.json") << doc.dump(1) << '\n';
  io::write_scree_csv(out.open("scree.csv"), spectrum);
  out.open("manifest.json") << manifest.dump(2) << '\n';
  if (args.export_correlation) {
    io::write_correlation_csv(out.open("correlation.csv"), matrix);
    out.open("correlation.json") << io::correlation_json(matrix).dump() << '\n';
  }
  out.commit();
  std::cout << "analyze: period " << period << ", " << spectrum.size() << " eigenvalues, "
            << significant_count(spectrum) << " significant\n";
}

// --- interpret ---------------------------------------------------------------

struct InterpretArgs {
  std::vector<std::string> spectra;
  AuxiliaryFiles aux;
  std::vector<std::string> attributes{"all"};
  int rank = 1;
  std::string planted;
  std::string out;
};

inline void cmd_interpret(const InterpretArgs& args) {
  if (args.rank < 1) throw Error("--rank must be at least 1");
  std::vector<Attribute> attributes;
  for (const auto& a : args.attributes) {
    if (a == "all") {
      attributes.assign(kAllAttributes.begin(), kAllAttributes.end());
      break;
    }
    attributes.push_back(parse_attribute(a));
  }

  struct Loaded {
    Spectrum spectrum;
    AuxiliaryTable aux;
  };
  std::map<Period, Loaded> loaded;
  for (const auto& path : args.spectra) {
    const json doc = json::parse(read_file(path));
    const Period period = parse_period(doc.value("period", std::string("entire")));
    if (loaded.contains(period)) throw Error("two spectra for period " + std::string(period_name(period)));
    Spectrum s = io::spectrum_from_json(doc);
    if (args.rank > s.eigenvectors.cols())
      throw Error(path + ": eigenvector rank " + std::to_string(args.rank) + " was not exported");
    AuxiliaryTable aux = load_auxiliary(args.aux, period, s.countries);
    for (const auto& w : aux.warnings) std::cerr << "warning: " << w << '\n';
    loaded.emplace(period, Loaded{std::move(s), std::move(aux)});
  }
  if (loaded.empty()) throw Error("no spectrum given");

  OutputSet out(args.out);
  const std::string suffix = "_rank" + std::to_string(args.rank);
  auto& bary = out.open("barycentres" + suffix + ".csv");
  bool bary_header = true;
  for (const auto& [period, item] : loaded) {
    const Eigen::VectorXcd v = item.spectrum.eigenvectors.col(args.rank - 1);
    const std::complex<double> reference = v.mean();
    for (Attribute attribute : attributes) {
      if (!item.aux.available.contains(attribute)) {
        std::cerr << "warning: no data for attribute " << attribute_key(attribute) << "; skipped\n";
        continue;
      }
      Grouping grouping;
      std::vector<std::optional<double>> rank_values(item.spectrum.countries.size());
      try {
        grouping = attribute_grouping(item.aux, attribute);
        if (attribute != Attribute::region)
          rank_values = rank_normalize(item.aux.numeric(attribute), item.aux.countries);
      } catch (const Error& e) {
        std::cerr << "warning: " << attribute_key(attribute) << " (" << period_name(period) << "): " << e.what()
                  << "; skipped\n";
        continue;
      }
      io::write_scatter_csv(out.open("scatter_" + std::string(period_name(period)) + "_" +
                                     std::string(attribute_key(attribute)) + suffix + ".csv"),
                            v, item.spectrum.countries, grouping, rank_values);
      const auto report = barycentres(v, grouping);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      io::write_barycentre_csv(bary, attribute_key(attribute), period_name(period), report, reference,
                               bary_header);
      bary_header = false;
    }
  }

  if (loaded.size() == kAllPeriods.size()) {
    std::map<Period, PeriodAnalysis> periods;
    for (const auto& [period, item] : loaded) periods[period] = {&item.spectrum, &item.aux};
    const auto table = report_tables(periods, args.rank, attributes);
    io::write_mean_distance_csv(out.open("mean_distance" + suffix + ".csv"), table);
    io::write_mean_distance_text(out.open("mean_distance" + suffix + ".txt"), table);
  } else {
    std::cerr << "note: mean-distance table needs spectra for entire, 2020, 2021 and 2022; not written\n";
  }

  if (!args.planted.empty()) {
    const json planted = json::parse(read_file(args.planted));
    const auto phases = planted.at("planted_phases").get<std::vector<double>>();
    const auto& item = loaded.begin()->second;
    const double err = recovery_error(item.spectrum.eigenvectors.col(args.rank - 1), phases);
    out.open("recovery" + suffix + ".json") << json{{"rank", args.rank}, {"recovery_error", err}}.dump(2) << '\n';
    std::cout << "interpret: recovery error " << err << " rad\n";
  }
  out.commit();
  std::cout << "interpret: wrote " << out.names().size() << " files to " << args.out << '\n';
}

// --- synth -------------------------------------------------------------------

struct SynthArgs {
  SynthSpec spec;
  std::string clusters = "0";
  std::string out;
};

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(csv::parse_double(std::string(csv::trim(item)), 0));
  return out;
}

inline void cmd_synth(const SynthArgs& args) {
  SynthSpec spec = args.spec;
  spec.planted_phases = cluster_phases(spec.n_series, parse_list(args.clusters));
  const Panel panel = generate(spec);
  OutputSet out(args.out);
  io::write_panel_csv(out.open("panel.csv"), panel);
  const json planted = {
      {"countries", panel.countries}, {"planted_phases", spec.planted_phases},
      {"n_series", spec.n_series},    {"n_days", spec.n_days},
      {"carrier_freq", spec.carrier_freq}, {"snr", spec.snr},
      {"seed", spec.seed},            {"weekly_amp", spec.weekly_amp},
      {"base", spec.base},
  };
  out.open("planted.json") << planted.dump(2) << '\n';
  out.commit();
  std::cout << "synth: " << spec.n_series << " series x " << spec.n_days << " days -> " << args.out << '\n';
}

// --- entry point -------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Complex Hilbert PCA with rotational random shuffling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->envname("CHPCA_THREADS");

  IngestArgs ingest;
  auto* ing = app.add_subcommand("ingest", "Parse daily case counts into a cleaned panel");
  ing->add_option("--cases", ingest.cases, "Case-count CSV")->required()->envname("CHPCA_CASES");
  ing->add_option("--period", ingest.period, "entire | 2020 | 2021 | 2022")->envname("CHPCA_PERIOD");
  ing->add_option("--out", ingest.out, "Output directory")->required()->envname("CHPCA_OUT");
  ing->add_option("--countries", ingest.countries_file, "File listing country codes to keep");
  ing->add_option("--date-column", ingest.config.date_column)->envname("CHPCA_DATE_COLUMN");
  ing->add_option("--country-column", ingest.config.country_column)->envname("CHPCA_COUNTRY_COLUMN");
  ing->add_option("--cases-column", ingest.config.cases_column)->envname("CHPCA_CASES_COLUMN");
  ing->add_option("--delimiter", ingest.delimiter)->envname("CHPCA_DELIMITER");

  AnalyzeArgs analyze;
  auto* ana = app.add_subcommand("analyze", "CHPCA spectrum with RRS significance");
  ana->add_option("--panel", analyze.panel, "Panel CSV")->required()->envname("CHPCA_PANEL");
  ana->add_option("--out", analyze.out, "Output directory")->required()->envname("CHPCA_OUT");
  ana->add_option("--period", analyze.period, "Period label (default: from the panel dates)");
  ana->add_option("--detrend", analyze.detrend, "state-space | ma7 | none")->envname("CHPCA_DETREND");
  ana->add_option("--max-iters", analyze.max_iters, "Likelihood optimizer iterations")->envname("CHPCA_MAX_ITERS");
  ana->add_option("--variance-floor", analyze.variance_floor)->envname("CHPCA_VARIANCE_FLOOR");
  ana->add_flag("--raw-scale-detrend", analyze.raw_scale_detrend, "Fit the state-space model on counts, not logs");
  ana->add_option("--rrs-samples", analyze.rrs_samples, "Number of RRS surrogates")->envname("CHPCA_RRS_SAMPLES");
  ana->add_option("--confidence", analyze.confidence, "Multiplier on the ensemble spread")->envname("CHPCA_CONFIDENCE");
  ana->add_option("--spread", analyze.spread, "sd | se")->envname("CHPCA_SPREAD");
  ana->add_option("--seed", analyze.seed, "RRS seed")->envname("CHPCA_SEED");
  ana->add_flag("--unnormalized", analyze.unnormalized, "Keep (1/T) W W* without unit-diagonal scaling");
  ana->add_option("--vectors", analyze.vectors, "Eigenvector ranks to export (default all)");
  ana->add_flag("--export-correlation", analyze.export_correlation, "Also write the correlation matrix");

  InterpretArgs interpret;
  auto* itp = app.add_subcommand("interpret", "Group eigenvector components by auxiliary attributes");
  itp->add_option("--spectrum", interpret.spectra, "spectrum.json (repeat per period)")->required();
  itp->add_option("--region", interpret.aux.regions)->envname("CHPCA_REGION");
  itp->add_option("--population", interpret.aux.population)->envname("CHPCA_POPULATION");
  itp->add_option("--gdp", interpret.aux.gdp)->envname("CHPCA_GDP");
  itp->add_option("--stringency", interpret.aux.stringency)->envname("CHPCA_STRINGENCY");
  itp->add_option("--containment", interpret.aux.containment)->envname("CHPCA_CONTAINMENT");
  itp->add_option("--vaccination", interpret.aux.vaccination)->envname("CHPCA_VACCINATION");
  itp->add_option("--democracy", interpret.aux.democracy)->envname("CHPCA_DEMOCRACY");
  itp->add_option("--attr", interpret.attributes, "Attribute(s) or 'all'")->delimiter(',');
  itp->add_option("--rank", interpret.rank, "Eigenvector rank (1-based)")->envname("CHPCA_RANK");
  itp->add_option("--planted", interpret.planted, "planted.json from synth; reports recovery error");
  itp->add_option("--out", interpret.out, "Output directory")->required()->envname("CHPCA_OUT");

  SynthArgs synth;
  auto* syn = app.add_subcommand("synth", "Generate a panel with planted lead-lag phases");
  syn->add_option("--series", synth.spec.n_series);
  syn->add_option("--days", synth.spec.n_days);
  syn->add_option("--clusters", synth.clusters, "Comma-separated cluster phases (radians)");
  syn->add_option("--carrier-freq", synth.spec.carrier_freq, "Carrier cycles per panel length");
  syn->add_option("--snr", synth.spec.snr);
  syn->add_option("--seed", synth.spec.seed)->envname("CHPCA_SEED");
  syn->add_option("--weekly-amp", synth.spec.weekly_amp);
  syn->add_option("--out", synth.out, "Output directory")->required()->envname("CHPCA_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  thread_count() = threads;

  try {
    if (*ing) cmd_ingest(ingest);
    if (*ana) cmd_analyze(analyze);
    if (*itp) cmd_interpret(interpret);
    if (*syn) cmd_synth(synth);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace chpca::cli
