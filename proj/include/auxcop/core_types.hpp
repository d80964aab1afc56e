#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "auxcop/stats.hpp"

namespace auxcop {

enum class ColumnKind { continuous, count, binary, categorical };
enum class MissingnessMode { modeled, mcar };

const char* to_string(ColumnKind kind) noexcept;
const char* to_string(MissingnessMode mode) noexcept;
ColumnKind column_kind_from_string(const std::string& s);
MissingnessMode missingness_mode_from_string(const std::string& s);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  std::vector<std::string> levels;  // categorical only
  MissingnessMode missingness = MissingnessMode::mcar;

  bool is_numeric() const { return kind == ColumnKind::continuous || kind == ColumnKind::count; }
  bool is_discrete() const { return kind != ColumnKind::continuous; }
  /// Throws ConfigError when the schema is inconsistent.
  void validate() const;
};

/// One point of an auxiliary quantile set. Intermediate points added for the
/// hybrid likelihood have no known level.
struct AuxPoint {
  double value = 0.0;
  std::optional<double> tau;

  bool known() const { return tau.has_value(); }
};

/// Points sorted by value; the first carries tau 0 and the last tau 1.
struct AuxiliaryQuantileSet {
  std::vector<AuxPoint> points;

  std::size_t size() const { return points.size(); }
  double lower() const { return points.front().value; }
  double upper() const { return points.back().value; }
  std::size_t intermediate_count() const;
  /// Only the points with a known level.
  AuxiliaryQuantileSet known_only() const;
};

/// Checks a (tau, value) list read from configuration. Values may coincide
/// across adjacent taus only for discrete kinds; count columns need integer values.
AuxiliaryQuantileSet validate_aux(const ColumnSchema& schema,
                                  std::vector<std::pair<double, double>> entries);

/// Empirical quantiles of the observed values at the given levels (levels must
/// include 0 and 1). Count columns use the inverse ECDF, continuous columns
/// linear interpolation.
AuxiliaryQuantileSet empirical_aux(std::span<const double> observed,
                                   const std::vector<double>& taus, ColumnKind kind);

/// Bin (value_lo, value_hi] and its latent image.
struct BinInterval {
  double value_lo = 0.0;
  double value_hi = 0.0;
  std::optional<double> tau_lo;  // set when the lower edge has a known level
  std::optional<double> tau_hi;
  double known_tau_lo = 0.0;  // nearest known level at or below value_lo
  double known_tau_hi = 1.0;  // nearest known level at or above value_hi

  /// (Phi^{-1}(known_tau_lo), Phi^{-1}(known_tau_hi)].
  TruncationInterval latent() const {
    return {norm_quantile(known_tau_lo), norm_quantile(known_tau_hi)};
  }
  bool upper_is_intermediate() const { return !tau_hi.has_value(); }
};

struct BinnedColumn {
  std::vector<BinInterval> bins;
  std::vector<int> bin_of;  // bin index (0-based) of each value passed to build_bins

  std::size_t bin_count() const { return bins.size(); }
  /// Bin index for y; a value equal to the lower bound joins bin 0.
  /// Throws OutOfSupport outside [lower, upper].
  int bin_for(double y) const;
};

/// Partitions the support at the points of `aux` (duplicate values are merged,
/// keeping the largest known level) and assigns each observed value its bin.
BinnedColumn build_bins(const AuxiliaryQuantileSet& aux, std::span<const double> observed);

/// Adds intermediate points with unknown level: the upper edges of the occupied
/// bins among `candidate_bins` evenly spaced bins over [min, max] of the
/// observed values, skipping values already in `aux`. Count columns use the
/// integer floor of each edge.
AuxiliaryQuantileSet augment_with_intermediate(const AuxiliaryQuantileSet& aux,
                                               std::span<const double> observed, ColumnKind kind,
                                               int candidate_bins = 20);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// n x p mixed-type table. Missing cells hold NaN; categorical cells hold the
/// 0-based level index; binary cells hold 0 or 1.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ColumnSchema> schemas, Eigen::MatrixXd values);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  bool is_missing(Eigen::Index i, Eigen::Index j) const { return std::isnan(values_(i, j)); }
  double value(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
  const Eigen::MatrixXd& values() const { return values_; }
  const std::vector<ColumnSchema>& schemas() const { return schemas_; }
  const ColumnSchema& schema(Eigen::Index j) const { return schemas_[static_cast<std::size_t>(j)]; }
  Eigen::Index column_index(const std::string& name) const;

  /// R: 1 where the cell is missing.
  Eigen::MatrixXi mask() const;
  std::vector<double> observed(Eigen::Index j) const;
  std::vector<Eigen::Index> observed_rows(Eigen::Index j) const;
  double missing_rate(Eigen::Index j) const;
  std::size_t missing_count() const;

 private:
  std::vector<ColumnSchema> schemas_;
  Eigen::MatrixXd values_;
};

}  // namespace auxcop
