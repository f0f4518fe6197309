#include "lqspectra/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lqs {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_double(std::uint64_t& s) { return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53; }

double gaussian(std::uint64_t& s) {
  // Box-Muller; one draw per call is fine here.
  double u1 = std::max(unit_double(s), 1e-300);
  double u2 = unit_double(s);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

void check_orthogonal(const std::vector<double>& rot, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += rot[i * n + k] * rot[j * n + k];
      double want = i == j ? 1.0 : 0.0;
      if (std::abs(s - want) > 1e-9)
        throw DomainError("similarity rotation part is not orthogonal");
    }
  }
}

// Solves A x = b for small dense A by Gaussian elimination with partial
// pivoting.
Vec solve_linear(std::vector<double> a, Vec b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-14) throw DomainError("singular system in fixed point solve");
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / a[col * n + col];
      for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
    x[r] = s / a[r * n + r];
  }
  return x;
}

}  // namespace

ConformalMap ConformalMap::similarity(double ratio, std::vector<double> rotation, Vec shift,
                                      double gamma) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw DomainError("similarity ratio must lie strictly in (0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("holder exponent must lie in (0, 1)");
  int n = static_cast<int>(shift.size());
  if (n < 1) throw DomainError("similarity needs a nonempty translation");
  if (rotation.empty()) {
    rotation.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) rotation[i * n + i] = 1.0;
  }
  if (rotation.size() != static_cast<std::size_t>(n) * n)
    throw DomainError("rotation matrix size does not match translation arity");
  check_orthogonal(rotation, n);

  ConformalMap m;
  m.ratio_ = ratio;
  m.rot_ = std::move(rotation);
  m.shift_ = std::move(shift);
  m.dim_ = n;
  m.gamma_ = gamma;
  return m;
}

ConformalMap ConformalMap::identity(int dim) {
  ConformalMap m;
  m.ratio_ = 1.0;
  m.rot_.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) m.rot_[i * dim + i] = 1.0;
  m.shift_.assign(dim, 0.0);
  m.dim_ = dim;
  return m;
}

ConformalMap ConformalMap::conjugated(ConformalMap planar_base,
                                      std::shared_ptr<const ConjugationChart> chart,
                                      double lift_scale_bound, double project_scale_bound) {
  if (planar_base.is_conjugated()) throw DomainError("conjugation base must be a planar map");
  if (!chart) throw DomainError("conjugated map needs a chart");
  ConformalMap m = planar_base;
  m.chart_ = std::move(chart);
  m.lift_scale_bound_ = lift_scale_bound;
  m.project_scale_bound_ = project_scale_bound;
  return m;
}

int ConformalMap::plane_dim() const { return dim_; }

Vec ConformalMap::apply_affine(std::span<const double> x) const {
  Vec y(dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += rot_[i * dim_ + j] * x[j];
    y[i] = ratio_ * s + shift_[i];
  }
  return y;
}

Vec ConformalMap::apply(std::span<const double> x) const {
  if (chart_) return chart_->lift(apply_affine(chart_->project(x)));
  return apply_affine(x);
}

Vec ConformalMap::apply_inverse(std::span<const double> y) const {
  auto affine_inverse = [this](std::span<const double> v) {
    Vec x(dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
      double s = 0.0;
      // Orthogonal inverse = transpose.
      for (int j = 0; j < dim_; ++j) s += rot_[j * dim_ + i] * (v[j] - shift_[j]);
      x[i] = s / ratio_;
    }
    return x;
  };
  if (chart_) return chart_->lift(affine_inverse(chart_->project(y)));
  return affine_inverse(y);
}

Vec ConformalMap::fixed_point() const {
  // Solve (I - ratio * R) x = shift; conjugation preserves fixed points.
  std::vector<double> a(static_cast<std::size_t>(dim_) * dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      a[i * dim_ + j] = (i == j ? 1.0 : 0.0) - ratio_ * rot_[i * dim_ + j];
  Vec planar = solve_linear(std::move(a), shift_, dim_);
  if (chart_) return chart_->lift(planar);
  return planar;
}

double ConformalMap::lipschitz_bound() const {
  if (chart_) return lift_scale_bound_ * ratio_ * project_scale_bound_;
  return ratio_;
}

double ConformalMap::local_scale(std::span<const double> x) const {
  if (chart_) {
    Vec u = chart_->project(x);
    Vec v = apply_affine(u);
    return chart_->lift_scale(v) * ratio_ * chart_->project_scale(x);
  }
  return ratio_;
}

double ConformalMap::det_abs(std::span<const double> x) const {
  return std::pow(local_scale(x), dim_);
}

double ConformalMap::similarity_ratio() const { return ratio_; }

ConformalMap ConformalMap::planar_base() const {
  if (!chart_) throw DomainError("map is not conjugated");
  ConformalMap flat = *this;
  flat.chart_.reset();
  flat.lift_scale_bound_ = 1.0;
  flat.project_scale_bound_ = 1.0;
  return flat;
}

ConformalMap ConformalMap::compose_with(const ConformalMap& other) const {
  if (static_cast<bool>(chart_) != static_cast<bool>(other.chart_) ||
      (chart_ && chart_ != other.chart_))
    throw DomainError("cannot compose maps over different charts");
  if (dim_ != other.dim_) throw DomainError("cannot compose maps of different dimension");

  // (a o b)(x) = ra Ra (rb Rb x + sb) + sa.
  ConformalMap out = *this;
  out.lift_scale_bound_ = std::max(lift_scale_bound_, other.lift_scale_bound_);
  out.project_scale_bound_ = std::max(project_scale_bound_, other.project_scale_bound_);
  out.ratio_ = ratio_ * other.ratio_;
  out.rot_.assign(static_cast<std::size_t>(dim_) * dim_, 0.0);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += rot_[i * dim_ + k] * other.rot_[k * dim_ + j];
      out.rot_[i * dim_ + j] = s;
    }
  out.shift_ = shift_;
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += rot_[i * dim_ + j] * other.shift_[j];
    out.shift_[i] += ratio_ * s;
  }
  return out;
}

Vec sample_point_in_ball(const Space& space, const Ball& ball, std::uint64_t& rng_state) {
  int d = static_cast<int>(ball.center.size());
  switch (space.kind()) {
    case Space::Kind::Euclidean: {
      Vec dir(d);
      double norm2 = 0.0;
      for (int i = 0; i < d; ++i) {
        dir[i] = gaussian(rng_state);
        norm2 += dir[i] * dir[i];
      }
      double norm = std::sqrt(std::max(norm2, 1e-300));
      double radius = ball.radius * std::pow(unit_double(rng_state), 1.0 / d);
      Vec out(d);
      for (int i = 0; i < d; ++i) out[i] = ball.center[i] + radius * dir[i] / norm;
      return out;
    }
    case Space::Kind::SphereGeodesic: {
      // Tangent direction at the center, then a geodesic step.
      Vec dir(d);
      for (int i = 0; i < d; ++i) dir[i] = gaussian(rng_state);
      double proj = 0.0;
      for (int i = 0; i < d; ++i) proj += dir[i] * ball.center[i];
      double norm2 = 0.0;
      for (int i = 0; i < d; ++i) {
        dir[i] -= proj * ball.center[i];
        norm2 += dir[i] * dir[i];
      }
      double norm = std::sqrt(std::max(norm2, 1e-300));
      double theta = ball.radius * unit_double(rng_state);
      Vec out(d);
      for (int i = 0; i < d; ++i)
        out[i] = std::cos(theta) * ball.center[i] + std::sin(theta) * dir[i] / norm;
      return out;
    }
    case Space::Kind::Chart:
      throw DomainError("ball sampling is not supported on chart spaces");
  }
  throw DomainError("unknown space kind");
}

IFSSpec IFSSpec::create(std::vector<ConformalMap> maps, std::vector<double> probs, Space space,
                        Ball seed, std::uint64_t word_budget) {
  if (maps.size() < 2) throw DomainError("a CIFS needs at least two maps");
  if (probs.size() != maps.size()) throw DomainError("probability vector arity mismatch");
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) throw DomainError("probabilities must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("probabilities must sum to 1");
  space.validate_point(seed.center);

  // Sampled invariance and contraction checks: S_i(W) inside W, |det| in (0,1).
  std::uint64_t rng = 0x5EEDBA5Eu;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    for (int k = 0; k < 64; ++k) {
      Vec x = k == 0 ? seed.center : sample_point_in_ball(space, seed, rng);
      Vec y = maps[i].apply(x);
      double d = space.distance(y, seed.center);
      if (d > seed.radius + 1e-9)
        throw DomainError("map " + std::to_string(i + 1) + " does not keep the seed set invariant");
      double det = maps[i].det_abs(x);
      if (!(det > 0.0 && det < 1.0))
        throw DomainError("map " + std::to_string(i + 1) +
                          " violates the contraction bound 0 < |det S'| < 1");
    }
  }

  IFSSpec spec;
  spec.maps_ = std::move(maps);
  spec.probs_ = std::move(probs);
  spec.space_ = space;
  spec.seed_ = std::move(seed);
  spec.word_budget_ = word_budget;
  spec.anchor_ = spec.maps_[0].fixed_point();

  // Depth-8 orbit cloud of the anchor; the cloud diameter is a slight
  // under-estimate of diam(K), which keeps the stopping rule exact at
  // knife-edge thresholds (see the atomization tests).
  std::vector<Vec> cloud{spec.anchor_};
  for (int gen = 0; gen < 8; ++gen) {
    std::vector<Vec> next;
    next.reserve(cloud.size() * spec.maps_.size());
    for (const Vec& p : cloud)
      for (const ConformalMap& m : spec.maps_) next.push_back(m.apply(p));
    if (next.size() > 4096) {
      std::vector<Vec> thinned;
      std::size_t stride = (next.size() + 4095) / 4096;
      for (std::size_t i = 0; i < next.size(); i += stride) thinned.push_back(std::move(next[i]));
      next = std::move(thinned);
    }
    cloud = std::move(next);
  }
  double diam = 0.0;
  std::size_t stride = cloud.size() > 2048 ? (cloud.size() + 2047) / 2048 : 1;
  for (std::size_t i = 0; i < cloud.size(); i += stride)
    for (std::size_t j = i + stride; j < cloud.size(); j += stride)
      diam = std::max(diam, spec.space_.distance(cloud[i], cloud[j]));
  spec.attractor_diameter_ = diam;
  return spec;
}

IFSSpec IFSSpec::with_budget(std::uint64_t budget) const {
  IFSSpec out = *this;
  out.word_budget_ = budget;
  return out;
}

Word IFSSpec::root_word() const {
  Word w;
  w.prob = 1.0;
  w.diam_bound = attractor_diameter_;
  w.map = maps_[0].is_conjugated()
              ? ConformalMap::conjugated(ConformalMap::identity(maps_[0].plane_dim()),
                                         maps_[0].chart(), 1.0, 1.0)
              : ConformalMap::identity(static_cast<int>(anchor_.size()));
  return w;
}

Word compose(const IFSSpec& spec, const Word& u, int symbol) {
  if (symbol < 1 || symbol > spec.map_count())
    throw DomainError("word symbol " + std::to_string(symbol) + " out of range 1.." +
                      std::to_string(spec.map_count()));
  const ConformalMap& next = spec.map(symbol - 1);
  Word w;
  w.symbols = u.symbols;
  w.symbols.push_back(static_cast<std::uint8_t>(symbol));
  w.prob = u.prob * spec.prob(symbol - 1);
  w.map = u.map.compose_with(next);
  w.diam_bound = w.map.lipschitz_bound() * spec.attractor_diameter();
  return w;
}

namespace {

// Counts the cut words at `threshold`, stopping early once `budget` is hit.
// Returns false on overflow.
bool count_cut_words(const IFSSpec& spec, double threshold, std::uint64_t budget,
                     std::uint64_t& count) {
  count = 0;
  std::vector<Word> stack;
  for (int i = spec.map_count(); i >= 1; --i) stack.push_back(compose(spec, spec.root_word(), i));
  while (!stack.empty()) {
    Word w = std::move(stack.back());
    stack.pop_back();
    if (w.diam_bound <= threshold) {
      if (++count > budget) return false;
      continue;
    }
    for (int i = spec.map_count(); i >= 1; --i) stack.push_back(compose(spec, w, i));
    if (stack.size() + count > budget) return false;
  }
  return true;
}

int deepest_level_within_budget(const IFSSpec& spec, int level_hint) {
  for (int t = level_hint; t >= 0; --t) {
    std::uint64_t n = 0;
    if (count_cut_words(spec, std::pow(2.0, -t), spec.word_budget(), n)) return t;
  }
  return -1;
}

}  // namespace

CutSet cut_set_threshold(const IFSSpec& spec, double threshold) {
  if (!(threshold > 0.0)) throw DomainError("cut threshold must be positive");
  CutSet out;
  out.threshold = threshold;
  std::vector<Word> stack;
  for (int i = spec.map_count(); i >= 1; --i) stack.push_back(compose(spec, spec.root_word(), i));
  while (!stack.empty()) {
    Word w = std::move(stack.back());
    stack.pop_back();
    if (w.diam_bound <= threshold) {
      out.words.push_back(std::move(w));
    } else {
      for (int i = spec.map_count(); i >= 1; --i) stack.push_back(compose(spec, w, i));
    }
    if (out.words.size() + stack.size() > spec.word_budget()) {
      int hint = std::max(0, static_cast<int>(std::floor(-std::log2(threshold))));
      int fits = deepest_level_within_budget(spec, hint);
      throw ResourceError("cut set at threshold " + std::to_string(threshold) +
                              " exceeds the word budget " + std::to_string(spec.word_budget()) +
                              "; deepest dyadic level that fits: " + std::to_string(fits),
                          fits);
    }
  }
  return out;
}

CutSet cut_set(const IFSSpec& spec, int t) {
  if (t < 0) throw DomainError("cut level must be nonnegative");
  return cut_set_threshold(spec, std::pow(2.0, -t));
}

AtomizeResult attractor_atoms_detailed(const IFSSpec& spec, double delta_atom) {
  if (!(delta_atom > 0.0)) throw DomainError("atom resolution must be positive");
  CutSet cut = cut_set_threshold(spec, delta_atom);

  struct Entry {
    Vec pos;
    double mass;
    std::uint32_t word;
  };
  std::vector<Entry> entries;
  entries.reserve(cut.words.size());
  for (std::uint32_t i = 0; i < cut.words.size(); ++i) {
    entries.push_back({cut.words[i].map.apply(spec.anchor()), cut.words[i].prob, i});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.pos != b.pos) return a.pos < b.pos;
    return a.word < b.word;
  });

  int dim = static_cast<int>(entries.front().pos.size());
  std::vector<double> coords;
  std::vector<double> masses;
  std::vector<std::uint32_t> atom_word;
  bool merged = false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!masses.empty() &&
        std::equal(entries[i].pos.begin(), entries[i].pos.end(),
                   coords.end() - dim)) {
      masses.back() += entries[i].mass;
      merged = true;
      continue;
    }
    coords.insert(coords.end(), entries[i].pos.begin(), entries[i].pos.end());
    masses.push_back(entries[i].mass);
    atom_word.push_back(entries[i].word);
  }
  if (merged) atom_word.clear();

  AtomicMeasure mu = AtomicMeasure::create(spec.space(), PointSet(std::move(coords), dim),
                                           std::move(masses), delta_atom);
  return AtomizeResult{std::move(mu), std::move(cut), std::move(atom_word), merged};
}

AtomicMeasure attractor_atoms(const IFSSpec& spec, double delta_atom) {
  return attractor_atoms_detailed(spec, delta_atom).measure;
}

DistortionConstants distortion_constants(const IFSSpec& spec, int probe_count) {
  if (probe_count < 2) throw DomainError("distortion probing needs at least two probes");

  DistortionConstants out;
  std::uint64_t rng = 0xD15707ULL;

  bool pure_similarity = true;
  for (int i = 0; i < spec.map_count(); ++i)
    if (spec.map(i).is_conjugated()) pure_similarity = false;

  // lambda_min over the generators.
  out.lambda_min = 1.0;
  for (int i = 0; i < spec.map_count(); ++i) {
    for (int k = 0; k < std::max(2, probe_count / 8); ++k) {
      Vec x = sample_point_in_ball(spec.space(), spec.seed(), rng);
      out.lambda_min = std::min(out.lambda_min, spec.map(i).det_abs(x));
    }
  }

  if (pure_similarity && spec.space().kind() == Space::Kind::Euclidean) {
    out.d1 = 1.0;
    out.d2 = 1.0;
  } else {
    // Random word pool, random point pairs.
    const int pool = 32;
    const int pairs = std::max(2, probe_count / pool);
    for (int w = 0; w < pool; ++w) {
      int len = 1 + static_cast<int>(splitmix64(rng) % 10);
      Word word = spec.root_word();
      for (int k = 0; k < len; ++k)
        word = compose(spec, word, 1 + static_cast<int>(splitmix64(rng) % spec.map_count()));

      double det_min = 1e300, det_max = 0.0, scale_sup = 0.0;
      std::vector<std::pair<Vec, Vec>> probes;
      for (int k = 0; k < pairs; ++k) {
        Vec x = sample_point_in_ball(spec.space(), spec.seed(), rng);
        Vec y = sample_point_in_ball(spec.space(), spec.seed(), rng);
        double det = word.map.det_abs(x);
        det_min = std::min(det_min, det);
        det_max = std::max(det_max, det);
        scale_sup = std::max(scale_sup, word.map.local_scale(x));
        probes.emplace_back(std::move(x), std::move(y));
      }
      out.d1 = std::max(out.d1, det_max / det_min);
      for (auto& [x, y] : probes) {
        double dxy = spec.space().distance(x, y);
        if (dxy < 1e-12) continue;
        double dim_xy = spec.space().distance(word.map.apply(x), word.map.apply(y));
        double ratio = dim_xy / (scale_sup * dxy);
        out.d2 = std::max({out.d2, ratio, 1.0 / ratio});
      }
    }
    out.d1 = std::max(out.d1, 1.0);
    out.d2 = std::max(out.d2, out.d1);
  }

  double diam = spec.attractor_diameter();
  out.d3 = std::max(out.d2 * diam, out.d2 / diam);
  return out;
}

}  // namespace lqs
