#pragma once

#include <chrono>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace chpca {

using Date = std::chrono::sys_days;

using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Country x day matrix of real values. Rows follow `countries`, columns follow `dates`.
struct Panel {
  std::vector<std::string> countries;
  std::vector<Date> dates;
  RealMatrix values;

  Eigen::Index n_series() const { return values.rows(); }
  Eigen::Index n_days() const { return values.cols(); }
};

/// Row-wise analytic signals of a standardized panel.
struct AnalyticPanel {
  std::vector<std::string> countries;
  ComplexMatrix values;
};

/// Hermitian complex correlation matrix indexed by `countries`.
struct ComplexCorrMatrix {
  std::vector<std::string> countries;
  Eigen::MatrixXcd values;
};

inline Date make_date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

/// Parses YYYY-MM-DD. Accepts a trailing time component ("2020-01-03T00:00:00Z").
inline Date parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2u-%2u%n", &y, &m, &d, &consumed) != 3 || consumed != 10)
    throw Error("invalid date '" + text + "'");
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) throw Error("invalid date '" + text + "'");
  if (text.size() > 10 && text[10] != 'T' && text[10] != ' ')
    throw Error("invalid date '" + text + "'");
  return Date{ymd};
}

inline std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline int year_of(Date date) {
  return static_cast<int>(std::chrono::year_month_day{date}.year());
}

/// Round-trip formatting used by every CSV writer.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace chpca
