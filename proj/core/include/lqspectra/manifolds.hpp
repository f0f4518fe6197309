#ifndef LQSPECTRA_MANIFOLDS_HPP
#define LQSPECTRA_MANIFOLDS_HPP

#include <memory>
#include <span>
#include <vector>

#include "lqspectra/geometry.hpp"
#include "lqspectra/ifs.hpp"
#include "lqspectra/measure.hpp"

namespace lqs {

// Stereographic projection between the open lower hemisphere of S^n
// (viewed from the north pole) and the open unit disk D^n:
//   forward(x) = (x_1, ..., x_n) / (1 - x_{n+1})
//   inverse(u) = (2u_1, ..., 2u_n, |u|^2 - 1) / (|u|^2 + 1).
class StereographicChart final : public ConjugationChart {
public:
  explicit StereographicChart(int sphere_dim);

  int sphere_dim() const { return n_; }

  Vec forward(std::span<const double> sphere_pt) const;  // DomainError off the open lower hemisphere
  Vec inverse(std::span<const double> disk_pt) const;    // DomainError outside the open disk

  // Local conformal scale factors of forward / inverse.
  double forward_scale(std::span<const double> sphere_pt) const;  // 1 / (1 - x_{n+1})
  double inverse_scale(std::span<const double> disk_pt) const;    // 2 / (1 + |u|^2)

  // ConjugationChart interface: manifold = S^n, plane = R^n.
  Vec project(std::span<const double> manifold_pt) const override { return forward(manifold_pt); }
  Vec lift(std::span<const double> plane_pt) const override { return inverse(plane_pt); }
  double project_scale(std::span<const double> p) const override { return forward_scale(p); }
  double lift_scale(std::span<const double> u) const override { return inverse_scale(u); }
  bool project_in_domain(std::span<const double> p) const override;
  bool lift_in_domain(std::span<const double> u) const override;
  Space manifold_space() const override { return Space::sphere_geodesic(n_); }
  Space plane_space() const override { return Space::euclidean(n_); }

private:
  int n_;
};

// PointMap adapters for measure pushforwards.
class StereographicLift final : public PointMap {  // disk -> hemisphere
public:
  explicit StereographicLift(std::shared_ptr<const StereographicChart> chart)
      : chart_(std::move(chart)) {}
  Vec apply(std::span<const double> u) const override { return chart_->inverse(u); }
  bool in_domain(std::span<const double> u) const override { return chart_->lift_in_domain(u); }
  double expansion_bound() const override { return 2.0; }
  Space target_space() const override { return chart_->manifold_space(); }
  std::string name() const override { return "stereographic lift"; }

private:
  std::shared_ptr<const StereographicChart> chart_;
};

class StereographicProjection final : public PointMap {  // hemisphere -> disk
public:
  explicit StereographicProjection(std::shared_ptr<const StereographicChart> chart)
      : chart_(std::move(chart)) {}
  Vec apply(std::span<const double> x) const override { return chart_->forward(x); }
  bool in_domain(std::span<const double> x) const override { return chart_->project_in_domain(x); }
  double expansion_bound() const override { return 1.0; }
  Space target_space() const override { return chart_->plane_space(); }
  std::string name() const override { return "stereographic projection"; }

private:
  std::shared_ptr<const StereographicChart> chart_;
};

// Radii band of chart images of geodesic balls: d1 <= r1/r <= r2/r <= d2,
// with r1 (r2) the largest planar ball inside (smallest containing) the
// image around the projected center.  The sphere-to-plane radius ratio
// band is the reciprocal interval.
struct DistortionBand {
  double d1 = 0.0;
  double d2 = 0.0;
  double sphere_to_plane_lo() const { return 1.0 / d2; }
  double sphere_to_plane_hi() const { return 1.0 / d1; }
};

// Empirical band over the probe balls, from sampled boundary circles.
// Balls must stay below the equator margin (max x_{n+1} <= -margin) or a
// DomainError is raised.
DistortionBand distortion_probe(const StereographicChart& chart, std::span<const Ball> region,
                                int boundary_samples = 64, double margin = 0.1);

// Conjugates a planar CIFS on the disk onto the lower hemisphere:
// S_i = lift o f_i o project, measure transported by the same chart.  The
// planar seed must sit strictly inside the disk and lift below the equator
// margin.
IFSSpec conjugate_ifs(const IFSSpec& planar, std::shared_ptr<const StereographicChart> chart,
                      double margin = 0.1);

struct DoublingTransferReport {
  double c_plane = 1.0;
  double c_sphere = 1.0;
  DistortionBand band;
  int m = 1;           // smallest integer with 2^m >= d2/d1
  double bound = 1.0;  // c_plane^(m+1)
  bool holds = false;  // c_sphere per-scale ratios all within the bound
  std::vector<double> scales;
  std::vector<double> sphere_per_scale;
};

// Lifts the planar measure, measures the doubling ratios on both sides and
// checks the transfer bound c_sphere <= c_plane^(m+1).
DoublingTransferReport doubling_transfer_check(const AtomicMeasure& planar,
                                               std::shared_ptr<const StereographicChart> chart,
                                               std::span<const double> scales, int probes = 256);

}  // namespace lqs

#endif
