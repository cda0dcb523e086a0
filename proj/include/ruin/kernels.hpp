#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace ruin {

enum class KernelFamily { Fbm, SubFbm, BiFbm, TimeChangedBm, TimeAvgFbm, Tabulated };

std::string family_name(KernelFamily f);

// Full covariance table on a fixed node set. Queries off the node set are
// errors, never extrapolated. Construction checks symmetry and positive
// semidefiniteness (eigenvalue floor >= -1e-8 * trace).
class TabulatedCov {
 public:
  TabulatedCov(std::vector<double> nodes, std::vector<double> values_row_major);

  static TabulatedCov from_csv(const std::string& path);  // header: s,t,cov

  double at(double s, double t) const;
  const std::vector<double>& nodes() const { return nodes_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  std::size_t index_of(double t) const;
  std::vector<double> nodes_;
  std::vector<double> values_;  // n x n row-major, symmetric
  double min_eigenvalue_ = 0.0;
};

class KernelSpec {
 public:
  static KernelSpec fbm(double hurst);
  static KernelSpec sub_fbm(double hurst);
  static KernelSpec bi_fbm(double k, double hurst);
  static KernelSpec time_changed_bm(double hurst);
  static KernelSpec time_avg_fbm(double hurst);
  static KernelSpec tabulated(TabulatedCov table);

  KernelFamily family() const { return family_; }
  double hurst() const { return hurst_; }
  double k_param() const { return k_; }
  const TabulatedCov& table() const;

  // Perfectly correlated line process (fBm or time-average fBm at H=1).
  bool degenerate_line() const;

  double cov(double s, double t) const;
  double variance(double t) const { return cov(t, t); }
  double std_dev(double t) const;
  double correlation(double s, double t) const;
  // E (X(t) - X(s))^2
  double increment_second_moment(double s, double t) const;

  // Plain key-value serialization used by the experiment config format.
  std::map<std::string, std::string> to_config() const;
  static KernelSpec from_config(const std::map<std::string, std::string>& kv);

 private:
  KernelSpec(KernelFamily f, double hurst, double k) : family_(f), hurst_(hurst), k_(k) {}
  KernelFamily family_;
  double hurst_ = 0.0;
  double k_ = 0.0;
  std::shared_ptr<const TabulatedCov> table_;
};

// A1/A2 characterization of one component at the horizon:
//   sigma(t) = sigma_tilde - A (T-t)^beta + o(.)
//   corr(s,t) = 1 - D |t-s|^alpha + o(.)
//   E (X(t)-X(s))^2 <= holder_const |t-s|^gamma on [delta, T]
struct LocalExpansion {
  double sigma_tilde = 0.0;
  double A = 0.0;
  double beta = 0.0;
  double D = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  double holder_const = 0.0;
  bool degenerate = false;  // line process: D == 0 allowed, nothing else
};

struct ExpansionOptions {
  double delta_fraction = 0.1;  // A2 window starts at delta = fraction * T
  double gamma_override = 0.0;  // >0 replaces the per-family default
};

LocalExpansion local_expansion(const KernelSpec& kernel, double T,
                               const ExpansionOptions& opts = {});

struct ExpansionReport {
  double alpha_fitted = 0.0;
  double beta_fitted = 0.0;
  double a_fitted = 0.0;
  double d_fitted = 0.0;
  bool pass = false;
  std::string detail;
};

// Numerically refits the expansion exponents on the shrinking window
// (T-t) in [1e-4 T, 1e-2 T] and compares against the declared ones (0.05).
ExpansionReport verify_expansion(const KernelSpec& kernel, double T, const LocalExpansion& exp);

// Trend g(t); LINEAR means g(t) = c t with c >= 0.
class Trend {
 public:
  enum class Kind { Linear, Tabulated };

  static Trend linear(double rate);
  static Trend tabulated(std::vector<double> times, std::vector<double> values);

  Kind kind() const { return kind_; }
  double rate() const { return rate_; }
  double at(double t) const;  // tabulated: piecewise linear, error off-range

  std::map<std::string, std::string> to_config() const;
  static Trend from_config(const std::map<std::string, std::string>& kv);

 private:
  Trend() = default;
  Kind kind_ = Kind::Linear;
  double rate_ = 0.0;
  std::vector<double> times_, values_;
};

struct TrendCheck {
  double M = 0.0;
  bool pass = false;
  std::string diagnostic;
};

// Smallest M with |g(T) - g(t)| <= M (T-t)^beta_min on a geometric grid of
// [nu, T); pass=false when the ratio keeps growing under refinement.
TrendCheck check_trend_condition(const Trend& trend, double T, double beta_min, double nu);

}  // namespace ruin
