#include "lqspectra/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lqs {

namespace {

constexpr double kSphereNormTol = 1e-9;

double sq_dist(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

Space Space::euclidean(int n) {
  if (n < 1) throw DomainError("euclidean dimension must be positive");
  return Space(Kind::Euclidean, n, n);
}

Space Space::sphere_geodesic(int n) {
  if (n < 1) throw DomainError("sphere dimension must be positive");
  return Space(Kind::SphereGeodesic, n + 1, n);
}

Space Space::chart(Space inner, std::shared_ptr<const PointMap> to_inner) {
  if (!to_inner) throw DomainError("chart space needs a coordinate map");
  // Chart points are expressed in the coordinates the map consumes; their
  // arity is not known statically, so validation defers to the map's
  // domain check.
  Space s(Kind::Chart, -1, inner.intrinsic_dim());
  s.inner_ = std::make_shared<Space>(inner);
  s.to_inner_ = std::move(to_inner);
  return s;
}

double Space::distance(std::span<const double> x, std::span<const double> y) const {
  switch (kind_) {
    case Kind::Euclidean:
      return std::sqrt(sq_dist(x, y));
    case Kind::SphereGeodesic: {
      double nx = dot(x, x), ny = dot(y, y);
      if (std::abs(nx - 1.0) > 2.0 * kSphereNormTol || std::abs(ny - 1.0) > 2.0 * kSphereNormTol)
        throw DomainError("sphere point is not unit-norm within tolerance");
      // Half-chord form: well conditioned at zero separation, where acos of
      // the dot product loses eight digits.
      double half_chord = 0.5 * std::sqrt(sq_dist(x, y));
      return 2.0 * std::asin(std::clamp(half_chord, 0.0, 1.0));
    }
    case Kind::Chart: {
      Vec fx = to_inner_->apply(x);
      Vec fy = to_inner_->apply(y);
      return inner_->distance(fx, fy);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void Space::validate_point(std::span<const double> x) const {
  switch (kind_) {
    case Kind::Euclidean:
      if (static_cast<int>(x.size()) != ambient_dim_)
        throw DomainError("point arity does not match euclidean dimension");
      return;
    case Kind::SphereGeodesic: {
      if (static_cast<int>(x.size()) != ambient_dim_)
        throw DomainError("point arity does not match sphere ambient dimension");
      double nx = dot(x, x);
      if (std::abs(nx - 1.0) > 2.0 * kSphereNormTol)
        throw DomainError("sphere point is not unit-norm within tolerance");
      return;
    }
    case Kind::Chart:
      if (!to_inner_->in_domain(x)) throw DomainError("point outside chart domain");
      return;
  }
}

std::string Space::describe() const {
  switch (kind_) {
    case Kind::Euclidean:
      return "euclidean(" + std::to_string(intrinsic_dim_) + ")";
    case Kind::SphereGeodesic:
      return "sphere(" + std::to_string(intrinsic_dim_) + ")";
    case Kind::Chart:
      return "chart[" + to_inner_->name() + "]";
  }
  return "?";
}

Ball make_ball(Vec center, double radius) {
  if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
  return Ball{std::move(center), radius};
}

PointSet::PointSet(std::vector<double> coords, int dim) : coords_(std::move(coords)), dim_(dim) {
  if (dim_ < 1) throw DomainError("point set dimension must be positive");
  if (coords_.size() % static_cast<std::size_t>(dim_) != 0)
    throw DomainError("point buffer size is not a multiple of the dimension");
}

SpatialIndex::SpatialIndex(Space space, const PointSet& points, double cell_width)
    : space_(space),
      coords_(points.raw()),
      dim_(points.dim()),
      count_(static_cast<std::uint32_t>(points.size())),
      cell_width_(cell_width) {
  gridded_ = space_.kind() != Space::Kind::Chart && dim_ <= kMaxGridDim && cell_width_ > 0.0 &&
             std::isfinite(cell_width_);
  if (!gridded_) return;

  std::vector<std::pair<std::array<std::int64_t, kMaxGridDim>, std::uint32_t>> entries(count_);
  for (std::uint32_t i = 0; i < count_; ++i) {
    std::array<std::int64_t, kMaxGridDim> key{};
    auto p = point(i);
    for (int a = 0; a < dim_; ++a) key[a] = cell_coord(p[a]);
    entries[i] = {key, i};
  }
  std::sort(entries.begin(), entries.end());

  cell_ids_.resize(count_);
  for (std::uint32_t i = 0; i < count_; ++i) {
    cell_ids_[i] = entries[i].second;
    if (i == 0 || entries[i].first != entries[i - 1].first) {
      cell_keys_.push_back(entries[i].first);
      cell_offsets_.push_back(i);
    }
  }
  cell_offsets_.push_back(count_);
}

double SpatialIndex::box_radius(double r) const {
  if (space_.kind() == Space::Kind::SphereGeodesic) {
    double half = std::min(r, 3.15) / 2.0;
    return std::min(2.0 * std::sin(half), 2.0) + 1e-15;
  }
  return r;
}

std::int64_t SpatialIndex::cell_coord(double v) const {
  return static_cast<std::int64_t>(std::floor(v / cell_width_));
}

std::pair<std::size_t, std::size_t> SpatialIndex::cell_range(
    const std::array<std::int64_t, kMaxGridDim>& c) const {
  auto it = std::lower_bound(cell_keys_.begin(), cell_keys_.end(), c);
  if (it == cell_keys_.end() || *it != c) return {0, 0};
  std::size_t idx = static_cast<std::size_t>(it - cell_keys_.begin());
  return {cell_offsets_[idx], cell_offsets_[idx + 1]};
}

std::vector<std::uint32_t> SpatialIndex::range_query(std::span<const double> x, double r) const {
  std::vector<std::uint32_t> out;
  for_each_in_range(x, r, [&](std::uint32_t id, double) { out.push_back(id); });
  std::sort(out.begin(), out.end());
  return out;
}

double SpatialIndex::ball_mass_sum(std::span<const double> x, double r,
                                   std::span<const double> weights) const {
  double s = 0.0;
  for_each_in_range(x, r, [&](std::uint32_t id, double) { s += weights[id]; });
  return s;
}

double SpatialIndex::shell_sum(std::span<const double> x, double r, double half_width,
                               std::span<const double> weights) const {
  double s = 0.0;
  double outer = r + half_width;
  for_each_in_range(x, outer, [&](std::uint32_t id, double d) {
    if (d >= r - half_width) s += weights[id];
  });
  return s;
}

namespace {

// Greedy r-net over the ids in `subset`, seeded at the probe center:
// repeatedly take the first uncovered point (ascending id) and cover
// everything within closed r of it.  Seeding at the center keeps the net a
// one-ball cover whenever R <= r.
int greedy_net_count(const Space& space, const PointSet& pts, std::span<const double> center,
                     std::vector<std::uint32_t> subset, double r) {
  std::sort(subset.begin(), subset.end());
  std::vector<bool> covered(subset.size(), false);
  int count = 1;
  for (std::size_t j = 0; j < subset.size(); ++j)
    if (space.distance(center, pts[subset[j]]) <= r) covered[j] = true;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (covered[i]) continue;
    ++count;
    auto ci = pts[subset[i]];
    for (std::size_t j = i; j < subset.size(); ++j) {
      if (!covered[j] && space.distance(ci, pts[subset[j]]) <= r) covered[j] = true;
    }
  }
  return count;
}

}  // namespace

int covering_probe(const Space& space, const PointSet& sample, double R, double r, int max_probes) {
  if (sample.size() == 0) throw DomainError("covering probe needs a nonempty sample");
  if (!(r > 0.0) || R < r) throw DomainError("covering probe requires R >= r > 0");

  std::size_t n = sample.size();
  std::size_t stride = 1;
  if (max_probes > 0 && n > static_cast<std::size_t>(max_probes))
    stride = (n + max_probes - 1) / max_probes;

  int worst = 1;
  for (std::size_t c = 0; c < n; c += stride) {
    auto center = sample[c];
    std::vector<std::uint32_t> inside;
    for (std::uint32_t j = 0; j < n; ++j) {
      if (space.distance(center, sample[j]) <= R) inside.push_back(j);
    }
    worst = std::max(worst, greedy_net_count(space, sample, center, std::move(inside), r));
  }
  return worst;
}

DoublingProbe estimate_doubling(const Space& space, const PointSet& sample,
                                std::span<const double> radii, int max_probes) {
  if (radii.empty()) throw DomainError("doubling probe needs at least one radius");
  DoublingProbe probe;
  probe.scales.assign(radii.begin(), radii.end());
  std::sort(probe.scales.begin(), probe.scales.end(), std::greater<double>());

  double big_R = 2.0 * probe.scales.front();
  std::vector<double> log_ratio, log_count;
  for (double r : probe.scales) {
    int n2r = covering_probe(space, sample, 2.0 * r, r, max_probes);
    probe.counts_2r.push_back(n2r);
    probe.n0_hat = std::max(probe.n0_hat, n2r);

    int nbig = covering_probe(space, sample, big_R, r, max_probes);
    log_ratio.push_back(std::log(big_R / r));
    log_count.push_back(std::log(static_cast<double>(std::max(nbig, 1))));
  }

  // Least squares of log count against log(R/r).
  std::size_t m = log_ratio.size();
  if (m >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) {
      mx += log_ratio[i];
      my += log_count[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      sxx += (log_ratio[i] - mx) * (log_ratio[i] - mx);
      sxy += (log_ratio[i] - mx) * (log_count[i] - my);
    }
    double slope = sxx > 0 ? sxy / sxx : 0.0;
    probe.p_hat = std::max(slope, 1e-9);
    probe.d0_hat = std::max(std::exp(my - probe.p_hat * mx), 1.0);
  } else {
    probe.p_hat = 1e-9;
    probe.d0_hat = std::max(1.0, static_cast<double>(probe.n0_hat));
  }
  return probe;
}

}  // namespace lqs
