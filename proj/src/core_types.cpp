#include "auxcop/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "auxcop/error.hpp"

namespace auxcop {

const char* to_string(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::count: return "count";
    case ColumnKind::binary: return "binary";
    case ColumnKind::categorical: return "categorical";
  }
  return "?";
}

const char* to_string(MissingnessMode mode) noexcept {
  return mode == MissingnessMode::modeled ? "modeled" : "mcar";
}

ColumnKind column_kind_from_string(const std::string& s) {
  if (s == "continuous") return ColumnKind::continuous;
  if (s == "count") return ColumnKind::count;
  if (s == "binary") return ColumnKind::binary;
  if (s == "categorical") return ColumnKind::categorical;
  throw Error(Errc::config_error, "unknown column kind '" + s + "'");
}

MissingnessMode missingness_mode_from_string(const std::string& s) {
  if (s == "modeled") return MissingnessMode::modeled;
  if (s == "mcar") return MissingnessMode::mcar;
  throw Error(Errc::config_error, "unknown missingness_mode '" + s + "'");
}

void ColumnSchema::validate() const {
  if (name.empty()) throw Error(Errc::config_error, "column without a name");
  if (kind == ColumnKind::categorical) {
    if (levels.size() < 2)
      throw Error(Errc::config_error, "categorical column '" + name + "' needs at least 2 levels");
    std::set<std::string> unique(levels.begin(), levels.end());
    if (unique.size() != levels.size())
      throw Error(Errc::config_error, "categorical column '" + name + "' repeats a level");
    if (missingness == MissingnessMode::modeled)
      throw Error(Errc::config_error,
                  "column '" + name + "': modeled missingness is not supported for categoricals");
  } else if (!levels.empty()) {
    throw Error(Errc::config_error, "column '" + name + "' lists levels but is not categorical");
  }
}

std::size_t AuxiliaryQuantileSet::intermediate_count() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const AuxPoint& p) { return !p.known(); }));
}

AuxiliaryQuantileSet AuxiliaryQuantileSet::known_only() const {
  AuxiliaryQuantileSet out;
  for (const auto& p : points)
    if (p.known()) out.points.push_back(p);
  return out;
}

AuxiliaryQuantileSet validate_aux(const ColumnSchema& schema,
                                  std::vector<std::pair<double, double>> entries) {
  const std::string where = "aux for '" + schema.name + "'";
  if (!schema.is_numeric())
    throw Error(Errc::config_error, where + ": only continuous and count columns take quantiles");
  if (entries.size() < 3)
    throw Error(Errc::too_few, where + " has " + std::to_string(entries.size()) +
                                   " entries, need at least 3");
  for (const auto& [tau, value] : entries) {
    if (!(tau >= 0.0 && tau <= 1.0) || !std::isfinite(value))
      throw Error(Errc::config_error, where + ": tau must lie in [0,1] and values be finite");
  }
  const bool has_zero = std::any_of(entries.begin(), entries.end(),
                                    [](const auto& e) { return e.first == 0.0; });
  const bool has_one = std::any_of(entries.begin(), entries.end(),
                                   [](const auto& e) { return e.first == 1.0; });
  if (!has_zero || !has_one)
    throw Error(Errc::missing_bounds, where + " must include tau = 0 and tau = 1");

  for (std::size_t q = 1; q < entries.size(); ++q) {
    const auto& [t0, v0] = entries[q - 1];
    const auto& [t1, v1] = entries[q];
    if (!(t1 > t0)) throw Error(Errc::non_monotone, where + ": taus must strictly increase");
    if (v1 < v0) throw Error(Errc::non_monotone, where + ": values must not decrease");
    if (v1 == v0 && !schema.is_discrete())
      throw Error(Errc::non_monotone,
                  where + ": repeated value " + std::to_string(v0) + " in a continuous column");
  }
  if (entries.front().second == entries.back().second)
    throw Error(Errc::non_monotone, where + ": lower and upper bounds coincide");
  if (schema.kind == ColumnKind::count) {
    for (const auto& e : entries)
      if (e.second != std::floor(e.second))
        throw Error(Errc::config_error, where + ": count values must be integers");
  }

  AuxiliaryQuantileSet out;
  out.points.reserve(entries.size());
  for (const auto& [tau, value] : entries) out.points.push_back({value, tau});
  return out;
}

AuxiliaryQuantileSet empirical_aux(std::span<const double> observed,
                                   const std::vector<double>& taus, ColumnKind kind) {
  if (observed.empty()) throw Error(Errc::too_few, "no observed values for empirical quantiles");
  std::vector<double> sorted(observed.begin(), observed.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();

  AuxiliaryQuantileSet out;
  for (double tau : taus) {
    double v;
    if (tau <= 0.0) {
      v = sorted.front();
    } else if (tau >= 1.0) {
      v = sorted.back();
    } else if (kind == ColumnKind::continuous) {
      const double h = (static_cast<double>(n) - 1.0) * tau;
      const auto lo = static_cast<std::size_t>(std::floor(h));
      const auto hi = std::min(lo + 1, n - 1);
      v = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    } else {
      auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * tau));
      v = sorted[std::clamp<std::size_t>(k, 1, n) - 1];
    }
    out.points.push_back({v, tau});
  }
  return out;
}

namespace {

struct MergedPoint {
  double value;
  std::optional<double> tau;
};

// Collapse equal values; the largest known level wins (right-continuity).
std::vector<MergedPoint> merge_points(const AuxiliaryQuantileSet& aux) {
  std::vector<MergedPoint> out;
  for (const auto& p : aux.points) {
    if (!out.empty() && out.back().value == p.value) {
      if (p.tau && (!out.back().tau || *p.tau > *out.back().tau)) out.back().tau = p.tau;
      continue;
    }
    if (!out.empty() && p.value < out.back().value)
      throw Error(Errc::non_monotone, "auxiliary values must not decrease");
    out.push_back({p.value, p.tau});
  }
  return out;
}

}  // namespace

int BinnedColumn::bin_for(double y) const {
  const double lower = bins.front().value_lo;
  const double upper = bins.back().value_hi;
  if (!(y >= lower && y <= upper))
    throw Error(Errc::out_of_support, "value " + std::to_string(y) + " outside [" +
                                          std::to_string(lower) + ", " + std::to_string(upper) + "]");
  if (y == lower) return 0;
  auto it = std::lower_bound(bins.begin(), bins.end(), y,
                             [](const BinInterval& b, double v) { return b.value_hi < v; });
  return static_cast<int>(it - bins.begin());
}

BinnedColumn build_bins(const AuxiliaryQuantileSet& aux, std::span<const double> observed) {
  if (aux.points.size() < 2) throw Error(Errc::too_few, "need at least two auxiliary points");
  std::vector<MergedPoint> pts = merge_points(aux);
  if (pts.size() < 2) throw Error(Errc::non_monotone, "lower and upper bounds coincide");
  if (!pts.front().tau || !pts.back().tau)
    throw Error(Errc::missing_bounds, "support bounds must carry known levels");
  pts.back().tau = 1.0;

  BinnedColumn out;
  // A lower bound carrying positive mass (discrete column with repeated
  // quantiles at the minimum) gets its own degenerate bin.
  if (*pts.front().tau > 0.0) {
    BinInterval b;
    b.value_lo = b.value_hi = pts.front().value;
    b.tau_lo = 0.0;
    b.tau_hi = *pts.front().tau;
    b.known_tau_lo = 0.0;
    b.known_tau_hi = *pts.front().tau;
    out.bins.push_back(b);
  }
  std::vector<double> known_below(pts.size());
  std::vector<double> known_above(pts.size());
  double last = 0.0;
  for (std::size_t q = 0; q < pts.size(); ++q) {
    if (pts[q].tau) last = *pts[q].tau;
    known_below[q] = last;
  }
  last = 1.0;
  for (std::size_t q = pts.size(); q-- > 0;) {
    if (pts[q].tau) last = *pts[q].tau;
    known_above[q] = last;
  }
  for (std::size_t q = 0; q + 1 < pts.size(); ++q) {
    BinInterval b;
    b.value_lo = pts[q].value;
    b.value_hi = pts[q + 1].value;
    b.tau_lo = pts[q].tau;
    b.tau_hi = pts[q + 1].tau;
    b.known_tau_lo = known_below[q];
    b.known_tau_hi = known_above[q + 1];
    out.bins.push_back(b);
  }

  out.bin_of.reserve(observed.size());
  for (double y : observed) out.bin_of.push_back(out.bin_for(y));
  return out;
}

AuxiliaryQuantileSet augment_with_intermediate(const AuxiliaryQuantileSet& aux,
                                               std::span<const double> observed, ColumnKind kind,
                                               int candidate_bins) {
  if (observed.empty() || candidate_bins < 2) return aux;
  const auto [mn_it, mx_it] = std::minmax_element(observed.begin(), observed.end());
  const double mn = *mn_it;
  const double mx = *mx_it;
  if (!(mx > mn)) return aux;

  const double width = (mx - mn) / candidate_bins;
  std::vector<int> occupied(static_cast<std::size_t>(candidate_bins), 0);
  for (double y : observed) {
    int k = static_cast<int>(std::floor((y - mn) / width));
    k = std::clamp(k, 0, candidate_bins - 1);
    occupied[static_cast<std::size_t>(k)] = 1;
  }

  std::set<double> existing;
  for (const auto& p : aux.points) existing.insert(p.value);
  std::set<double> edges;
  // Upper edges of occupied bins; the last edge is the observed maximum, which
  // carries no ordering information of its own.
  for (int k = 0; k + 1 < candidate_bins; ++k) {
    if (!occupied[static_cast<std::size_t>(k)]) continue;
    double e = mn + (k + 1) * width;
    if (kind == ColumnKind::count) e = std::floor(e);
    if (e <= aux.lower() || e >= aux.upper() || existing.count(e)) continue;
    edges.insert(e);
  }

  AuxiliaryQuantileSet out = aux;
  for (double e : edges) out.points.push_back({e, std::nullopt});
  std::stable_sort(out.points.begin(), out.points.end(),
                   [](const AuxPoint& a, const AuxPoint& b) { return a.value < b.value; });
  return out;
}

Dataset::Dataset(std::vector<ColumnSchema> schemas, Eigen::MatrixXd values)
    : schemas_(std::move(schemas)), values_(std::move(values)) {
  if (static_cast<Eigen::Index>(schemas_.size()) != values_.cols())
    throw Error(Errc::config_error, "schema lists " + std::to_string(schemas_.size()) +
                                        " columns but data has " + std::to_string(values_.cols()));
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    const auto& s = schemas_[static_cast<std::size_t>(j)];
    s.validate();
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      const double v = values_(i, j);
      if (std::isnan(v)) continue;
      bool ok = std::isfinite(v);
      switch (s.kind) {
        case ColumnKind::continuous: break;
        case ColumnKind::count: ok = ok && v == std::floor(v); break;
        case ColumnKind::binary: ok = ok && (v == 0.0 || v == 1.0); break;
        case ColumnKind::categorical:
          ok = ok && v == std::floor(v) && v >= 0.0 &&
               v < static_cast<double>(s.levels.size());
          break;
      }
      if (!ok)
        throw Error(Errc::config_error, "column '" + s.name + "' row " + std::to_string(i) +
                                            ": invalid value " + std::to_string(v));
    }
  }
}

Eigen::Index Dataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < schemas_.size(); ++j)
    if (schemas_[j].name == name) return static_cast<Eigen::Index>(j);
  throw Error(Errc::config_error, "no column named '" + name + "'");
}

Eigen::MatrixXi Dataset::mask() const {
  return values_.array().isNaN().cast<int>();
}

std::vector<double> Dataset::observed(Eigen::Index j) const {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (!is_missing(i, j)) out.push_back(values_(i, j));
  return out;
}

std::vector<Eigen::Index> Dataset::observed_rows(Eigen::Index j) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (!is_missing(i, j)) out.push_back(i);
  return out;
}

double Dataset::missing_rate(Eigen::Index j) const {
  if (rows() == 0) return 0.0;
  return values_.col(j).array().isNaN().cast<double>().mean();
}

std::size_t Dataset::missing_count() const {
  return static_cast<std::size_t>(values_.array().isNaN().count());
}

}  // namespace auxcop
