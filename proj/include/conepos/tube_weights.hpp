#pragma once

#include <optional>
#include <string>
#include <utility>

#include "conepos/cone_geometry.hpp"
#include "conepos/cubature.hpp"
#include "conepos/metric.hpp"

namespace conepos {

/// Volume of the unit sphere in R^d: 2 pi^{d/2} / Gamma(d/2).
double omega(int d);

struct VolumeEstimate {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  bool converged = true;

  VolumeEstimate& operator+=(const VolumeEstimate& other);
};

/// Spherical volume of the normalized image of one stratum chart, integrated
/// over a unit box (polar angles, Duffy-ordered points, compactified free
/// point).
VolumeEstimate integrate_stratum(const Stratum& stratum, const MetricPair& metric,
                                 const CubatureOptions& opts = {});

/// Integrand of integrate_stratum at a point u of the unit box.
double stratum_box_integrand(const Stratum& stratum, const MetricPair& metric, std::span<const double> u);

enum class Representation { Upper, Lower };

/// Vol*(K* cap S*) through one of the two almost-everywhere representations.
VolumeEstimate vol_Kstar_cap(int n, const Domain& domain, const MetricPair& metric,
                             Representation rep = Representation::Upper, const CubatureOptions& opts = {});

/// Vol*(bd K* cap S*): the lower l = n-1 chart plus, off the full line, the
/// upper one.
VolumeEstimate vol_bKstar_cap(int n, const Domain& domain, const MetricPair& metric,
                              const CubatureOptions& opts = {});

/// Vol(K cap S).
VolumeEstimate vol_K_cap(int n, const Domain& domain, const MetricPair& metric, const CubatureOptions& opts = {});

/// Vol(bd K cap S): double-root stratum plus the endpoint strata that exist
/// for the domain.
VolumeEstimate vol_bK_cap(int n, const Domain& domain, const MetricPair& metric,
                          const CubatureOptions& opts = {});

/// w0, w1, wn, w_{n+1} from the four volumes. For n = 1 the boundary
/// volumes are not used and w1 is left at 1/2.
struct ExtremeWeights {
  int n = 0;
  double w0 = 0.0, w1 = 0.0, wn = 0.0, wn1 = 0.0;
  double e0 = 0.0, e1 = 0.0, en = 0.0, en1 = 0.0;
  /// w0 from the lower representation, kept as a cross-check.
  double w0_lower = 0.0;
  double e0_lower = 0.0;
  long evaluations = 0;
  bool converged = true;
};

ExtremeWeights extreme_weights(int n, const Domain& domain, const MetricPair& metric,
                               const CubatureOptions& opts = {});

enum class WeightStatus { Exact, BoundsOnly };

std::string to_string(WeightStatus status);

struct WeightBounds {
  Vector u;
  Vector v;
};

/// Mixture weights (w_0, ..., w_{n+1}). For BoundsOnly vectors the middle
/// entries are NaN and `bounds` holds the u/v vectors.
struct WeightVector {
  Vector weights;
  Vector est_error;
  WeightStatus status = WeightStatus::Exact;
  std::optional<WeightBounds> bounds;
  ExtremeWeights extremes;

  int degree() const { return static_cast<int>(weights.size()) - 2; }
  double total_error() const { return est_error.sum(); }
  static WeightVector from_values(const Vector& w, const Vector& err = Vector());
};

/// All weights for n <= 4 by Gauss-Bonnet completion of the extremes.
WeightVector complete_weights(const ExtremeWeights& ext);
WeightVector complete_weights(int n, const Domain& domain, const MetricPair& metric,
                              const CubatureOptions& opts = {});

/// u/v vectors for n >= 5.
WeightBounds weight_bounds(const ExtremeWeights& ext);
WeightBounds weight_bounds(int n, const Domain& domain, const MetricPair& metric,
                           const CubatureOptions& opts = {});

/// complete_weights for n <= 4, a BoundsOnly vector above.
WeightVector compute_weights(int n, const Domain& domain, const MetricPair& metric,
                             const CubatureOptions& opts = {});

}  // namespace conepos
