#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "chpca_cli.hpp"

namespace fs = std::filesystem;
using chpca::cli::json;
using chpca::cli::read_file;

namespace {

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("chpca_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "chpca");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return chpca::cli::run_cli(static_cast<int>(argv.size()), argv.data());
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  // Three countries over 20 days in WHO layout, plus an excluded territory.
  void write_who_cases() const {
    std::ostringstream csv;
    csv << "Date_reported,Country_code,Country,WHO_region,New_cases,Cumulative_cases\n";
    const auto start = chpca::make_date(2020, 1, 3);
    for (int t = 0; t < 20; ++t) {
      const auto d = chpca::format_date(start + std::chrono::days{t});
      csv << d << ",JP,Japan,WPRO," << 10 + t << ",0\n";
      csv << d << ",FR,France,EURO," << (t % 3 == 0 ? "" : std::to_string(5 * t)) << ",0\n";
      csv << d << ",BR,Brazil,AMRO," << 100 - t << ",0\n";
      csv << d << ",XK,Kosovo,EURO,7,0\n";
    }
    write("cases.csv", csv.str());
  }

  // Synth panel of 30 series; every attribute file covers all of them.
  void write_synth_and_aux() {
    ASSERT_EQ(run({"synth", "--out", path("synth"), "--clusters", "0,0.785398163397448", "--seed", "4"}), 0);
    std::ostringstream regions, attr;
    regions << "country,region\n";
    attr << "country,year,value\n";
    for (int c = 1; c <= 30; ++c) {
      char code[8];
      std::snprintf(code, sizeof code, "S%03d", c);
      regions << code << ',' << chpca::kRegions[static_cast<std::size_t>(c) % 5] << '\n';
      for (int y = 2020; y <= 2022; ++y) attr << code << ',' << y << ',' << (c * 37) % 31 + y - 2000 << '\n';
    }
    write("regions.csv", regions.str());
    write("attr.csv", attr.str());
  }

  std::vector<std::string> aux_flags() const {
    return {"--region",     path("regions.csv"), "--population",  path("attr.csv"), "--gdp",
            path("attr.csv"), "--stringency", path("attr.csv"), "--containment", path("attr.csv"),
            "--vaccination", path("attr.csv"), "--democracy",   path("attr.csv")};
  }

  static std::size_t data_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, IngestWritesPanelAndProvenance) {
  write_who_cases();
  ASSERT_EQ(run({"ingest", "--cases", path("cases.csv"), "--out", path("out")}), 0);
  std::ifstream in(path("out/panel_entire.csv"));
  const auto panel = chpca::io::read_panel_csv(in);
  EXPECT_EQ(panel.countries, (std::vector<std::string>{"BR", "FR", "JP"}));
  EXPECT_EQ(panel.n_days(), 20);
  EXPECT_EQ(panel.values(1, 0), chpca::kCaseFloor);  // empty cell read as 0, then floored
  const auto prov = json::parse(read_file(path("out/panel_entire.json")));
  EXPECT_EQ(prov.at("countries").get<int>(), 3);
  EXPECT_EQ(prov.at("excluded_countries"), json::array({"XK"}));
  EXPECT_EQ(prov.at("inputs")[0].at("sha256").get<std::string>(),
            chpca::cli::sha256_hex(read_file(path("cases.csv"))));
}

TEST_F(Cli, MissingInputFailsWithoutOutputs) {
  EXPECT_EQ(run({"ingest", "--cases", path("absent.csv"), "--out", path("out")}), 1);
  EXPECT_FALSE(fs::exists(path("out")));
  write("bad.csv", "country,date,new_cases\nJP,2020-13-45,3\n");
  EXPECT_EQ(run({"ingest", "--cases", path("bad.csv"), "--out", path("out"), "--date-column", "date",
                 "--country-column", "country", "--cases-column", "new_cases"}),
            1);
  EXPECT_FALSE(fs::exists(path("out")));
}

TEST_F(Cli, AnalyzeIsByteIdenticalAcrossRuns) {
  write_synth_and_aux();
  const std::vector<std::string> args{"analyze", "--panel", path("synth/panel.csv"), "--out", path("a"),
                                      "--detrend", "ma7", "--export-correlation"};
  ASSERT_EQ(run(args), 0);
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(path("a"))) first[e.path().filename()] = read_file(e.path());
  EXPECT_EQ(first.size(), 5u);
  auto threaded = args;
  threaded.insert(threaded.begin(), {"--threads", "3"});
  ASSERT_EQ(run(threaded), 0);
  for (const auto& [name, content] : first) EXPECT_EQ(read_file(path("a/" + name)), content) << name;

  const auto doc = json::parse(first.at("spectrum.json"));
  EXPECT_EQ(doc.at("period"), "2021");
  EXPECT_EQ(doc.at("days_analyzed").get<int>(), 364);
  EXPECT_EQ(doc.at("n_significant").get<int>(), 1);
}

TEST_F(Cli, AnalyzeRejectsBadRrsConfig) {
  write_synth_and_aux();
  EXPECT_EQ(run({"analyze", "--panel", path("synth/panel.csv"), "--out", path("a"), "--rrs-samples", "1"}), 1);
  EXPECT_EQ(run({"analyze", "--panel", path("synth/panel.csv"), "--out", path("a"), "--spread", "iqr"}), 1);
  EXPECT_EQ(run({"analyze", "--panel", path("synth/panel.csv"), "--out", path("a"), "--detrend", "loess"}), 1);
  EXPECT_FALSE(fs::exists(path("a")));
}

TEST_F(Cli, SynthRejectsZeroSnr) {
  EXPECT_EQ(run({"synth", "--out", path("s"), "--snr", "0"}), 1);
  EXPECT_FALSE(fs::exists(path("s")));
}

TEST_F(Cli, SynthAnalyzeInterpretRecoversPhases) {
  write_synth_and_aux();
  ASSERT_EQ(run({"analyze", "--panel", path("synth/panel.csv"), "--out", path("a"), "--detrend", "none"}), 0);
  ASSERT_EQ(run({"interpret", "--spectrum", path("a/spectrum.json"), "--planted", path("synth/planted.json"),
                 "--attr", "region", "--region", path("regions.csv"), "--out", path("i")}),
            0);
  const auto rec = json::parse(read_file(path("i/recovery_rank1.json")));
  EXPECT_LT(rec.at("recovery_error").get<double>(), 0.1);
  EXPECT_EQ(data_lines(read_file(path("i/barycentres_rank1.csv"))), 5u);
  EXPECT_EQ(data_lines(read_file(path("i/scatter_2021_region_rank1.csv"))), 30u);
  EXPECT_FALSE(fs::exists(path("i/mean_distance_rank1.csv")));
}

TEST_F(Cli, InterpretAllPeriodsWritesMeanDistanceTable) {
  write_synth_and_aux();
  std::vector<std::string> args{"interpret"};
  for (const char* period : {"entire", "2020", "2021", "2022"}) {
    const std::string out = path(std::string("a_") + period);
    ASSERT_EQ(run({"analyze", "--panel", path("synth/panel.csv"), "--out", out, "--detrend", "none", "--period",
                   period, "--rrs-samples", "5"}),
              0);
    args.insert(args.end(), {"--spectrum", out + "/spectrum.json"});
  }
  const auto aux = aux_flags();
  args.insert(args.end(), aux.begin(), aux.end());
  auto rank2 = args;
  args.insert(args.end(), {"--attr", "all", "--out", path("i")});
  ASSERT_EQ(run(args), 0);
  const auto table = read_file(path("i/mean_distance_rank1.csv"));
  EXPECT_EQ(data_lines(table), 35u);
  EXPECT_EQ(table.rfind("attribute,group,entire,2020,2021,2022\n", 0), 0u);
  EXPECT_TRUE(fs::exists(path("i/mean_distance_rank1.txt")));
  EXPECT_EQ(data_lines(read_file(path("i/barycentres_rank1.csv"))), 4u * 35u);

  rank2.insert(rank2.end(), {"--rank", "2", "--attr", "region,democracy", "--out", path("i2")});
  ASSERT_EQ(run(rank2), 0);
  EXPECT_EQ(data_lines(read_file(path("i2/mean_distance_rank2.csv"))), 10u);

  args.back() = path("i3");
  args.insert(args.end(), {"--spectrum", path("a_2020/spectrum.json")});
  EXPECT_EQ(run(args), 1);  // the same period twice
}

TEST_F(Cli, EnvironmentFallbackAndFlagPrecedence) {
  ::setenv("CHPCA_SEED", "11", 1);
  ASSERT_EQ(run({"synth", "--out", path("env"), "--series", "4", "--days", "40", "--carrier-freq", "3"}), 0);
  ASSERT_EQ(run({"synth", "--out", path("flag"), "--series", "4", "--days", "40", "--carrier-freq", "3",
                 "--seed", "12"}),
            0);
  ::unsetenv("CHPCA_SEED");
  EXPECT_EQ(json::parse(read_file(path("env/planted.json"))).at("seed").get<int>(), 11);
  EXPECT_EQ(json::parse(read_file(path("flag/planted.json"))).at("seed").get<int>(), 12);
}
