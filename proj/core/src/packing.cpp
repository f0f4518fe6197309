#include "lqspectra/packing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lqs {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_scale(const AtomicMeasure& mu, double delta) {
  if (!(delta > 0.0)) throw DomainError("packing radius must be positive");
  if (delta < mu.scale_floor())
    throw DomainError("packing radius " + std::to_string(delta) +
                      " is below the scale floor " + std::to_string(mu.scale_floor()));
}

Packing heavy_greedy(const AtomicMeasure& mu, double delta, std::span<const double> bm,
                     std::uint64_t* rng) {
  std::size_t n = mu.size();
  std::vector<bool> covered(n, false);

  // Atoms in descending ball-mass order, ids breaking ties; the greedy
  // argmax is the first uncovered entry.  Covered entries are skipped
  // lazily and compacted once they dominate.
  std::vector<std::uint32_t> alive(n);
  for (std::size_t i = 0; i < n; ++i) alive[i] = static_cast<std::uint32_t>(i);
  std::sort(alive.begin(), alive.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (bm[a] != bm[b]) return bm[a] > bm[b];
    return a < b;
  });

  Packing packing;
  packing.radius = delta;
  packing.maximal = true;
  packing.heavy = true;

  std::size_t begin = 0;
  std::vector<std::uint32_t> candidates;
  while (true) {
    while (begin < alive.size() && covered[alive[begin]]) ++begin;
    if (begin == alive.size()) break;

    std::uint32_t pick = alive[begin];
    if (rng != nullptr) {
      // Any pick above half the maximum keeps the factor-2 heaviness
      // certificate.  The candidates form the prefix of the descending
      // order with bm >= threshold; sample it uniformly, falling back to a
      // full scan when rejection sampling keeps hitting covered entries.
      double threshold = 0.5 * bm[pick];
      std::size_t hi = static_cast<std::size_t>(
          std::lower_bound(alive.begin() + begin, alive.end(), threshold,
                           [&](std::uint32_t id, double thr) { return bm[id] >= thr; }) -
          alive.begin());
      bool found = false;
      for (int tries = 0; tries < 32 && !found; ++tries) {
        std::uint32_t id = alive[begin + splitmix64(*rng) % (hi - begin)];
        if (!covered[id]) {
          pick = id;
          found = true;
        }
      }
      if (!found) {
        candidates.clear();
        for (std::size_t i = begin; i < hi; ++i)
          if (!covered[alive[i]]) candidates.push_back(alive[i]);
        pick = candidates[splitmix64(*rng) % candidates.size()];
      }
    }

    packing.center_ids.push_back(pick);
    mu.index().for_each_in_range(mu.position(pick), 2.0 * delta,
                                 [&](std::uint32_t id, double) { covered[id] = true; });

    if (begin > alive.size() / 2) {
      alive.erase(std::remove_if(alive.begin() + begin, alive.end(),
                                 [&](std::uint32_t id) { return covered[id]; }),
                  alive.end());
      begin = 0;
    }
  }
  return packing;
}

double cell_diameter(const AtomicMeasure& mu, const std::vector<std::uint32_t>& cell) {
  double d = 0.0;
  std::size_t stride = cell.size() > 2000 ? (cell.size() + 1999) / 2000 : 1;
  for (std::size_t i = 0; i < cell.size(); i += stride)
    for (std::size_t j = i + stride; j < cell.size(); j += stride)
      d = std::max(d, mu.space().distance(mu.position(cell[i]), mu.position(cell[j])));
  return d;
}

}  // namespace

std::vector<double> atom_ball_masses(const AtomicMeasure& mu, double delta) {
  std::vector<double> bm(mu.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) bm[i] = mu.ball_mass(mu.position(i), delta);
  return bm;
}

Packing heavy_maximal_packing(const AtomicMeasure& mu, double delta) {
  return heavy_maximal_packing(mu, delta, atom_ball_masses(mu, delta));
}

Packing heavy_maximal_packing_randomized(const AtomicMeasure& mu, double delta,
                                         std::uint64_t rng_seed) {
  return heavy_maximal_packing_randomized(mu, delta, atom_ball_masses(mu, delta), rng_seed);
}

Packing heavy_maximal_packing(const AtomicMeasure& mu, double delta,
                              std::span<const double> ball_masses) {
  check_scale(mu, delta);
  return heavy_greedy(mu, delta, ball_masses, nullptr);
}

Packing heavy_maximal_packing_randomized(const AtomicMeasure& mu, double delta,
                                         std::span<const double> ball_masses,
                                         std::uint64_t rng_seed) {
  check_scale(mu, delta);
  std::uint64_t rng = rng_seed;
  return heavy_greedy(mu, delta, ball_masses, &rng);
}

Packing random_maximal_packing(const AtomicMeasure& mu, double delta, std::uint64_t rng_seed) {
  check_scale(mu, delta);
  std::size_t n = mu.size();
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  std::uint64_t rng = rng_seed;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[splitmix64(rng) % i]);

  Packing packing;
  packing.radius = delta;
  packing.maximal = true;
  std::vector<bool> covered(n, false);
  for (std::uint32_t id : order) {
    if (covered[id]) continue;
    packing.center_ids.push_back(id);
    mu.index().for_each_in_range(mu.position(id), 2.0 * delta,
                                 [&](std::uint32_t j, double) { covered[j] = true; });
  }
  return packing;
}

MaximalPartition maximal_partition(const Packing& packing, const AtomicMeasure& mu) {
  if (!packing.maximal) throw DomainError("partition generation needs a maximal packing");
  double delta = packing.radius;
  std::size_t n = mu.size();
  const std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();

  MaximalPartition part;
  part.center_ids = packing.center_ids;
  part.delta = delta;
  part.cell_of_atom.assign(n, unset);
  part.via_core.assign(n, 0);

  // Inner delta-balls first (disjoint, so each atom lands at most once),
  // then the annulus rule in packing order.
  for (std::uint32_t j = 0; j < part.center_ids.size(); ++j) {
    mu.index().for_each_in_range(mu.position(part.center_ids[j]), delta,
                                 [&](std::uint32_t id, double) {
                                   if (part.cell_of_atom[id] == unset) {
                                     part.cell_of_atom[id] = j;
                                     part.via_core[id] = 1;
                                   }
                                 });
  }
  for (std::uint32_t j = 0; j < part.center_ids.size(); ++j) {
    mu.index().for_each_in_range(mu.position(part.center_ids[j]), 2.0 * delta,
                                 [&](std::uint32_t id, double) {
                                   if (part.cell_of_atom[id] == unset) part.cell_of_atom[id] = j;
                                 });
  }

  part.cells.assign(part.center_ids.size(), {});
  for (std::uint32_t a = 0; a < n; ++a) {
    if (part.cell_of_atom[a] == unset)
      throw InvariantViolation("packing is not maximal over the support atoms",
                               "atom " + std::to_string(a) + " farther than 2*delta from all centers");
    part.cells[part.cell_of_atom[a]].push_back(a);
  }
  return part;
}

GridPartition grid_partition(const AtomicMeasure& mu, double lambda, double delta) {
  if (!(lambda > 0.0 && lambda <= 0.5))
    throw DomainError("grid lambda must lie in (0, 1/2]");
  check_scale(mu, delta);

  double r = lambda * delta;
  std::size_t n = mu.size();

  GridPartition grid;
  grid.lambda = lambda;
  grid.delta = delta;

  std::vector<bool> covered(n, false);
  for (std::uint32_t id = 0; id < n; ++id) {
    if (covered[id]) continue;
    grid.center_ids.push_back(id);
    mu.index().for_each_in_range(mu.position(id), 2.0 * r,
                                 [&](std::uint32_t j, double) { covered[j] = true; });
  }

  const std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<double> best_d(n, std::numeric_limits<double>::infinity());
  grid.cell_of_atom.assign(n, unset);
  for (std::uint32_t j = 0; j < grid.center_ids.size(); ++j) {
    mu.index().for_each_in_range(mu.position(grid.center_ids[j]), 2.0 * r,
                                 [&](std::uint32_t id, double d) {
                                   if (d < best_d[id]) {
                                     best_d[id] = d;
                                     grid.cell_of_atom[id] = j;
                                   }
                                 });
  }

  grid.cells.assign(grid.center_ids.size(), {});
  for (std::uint32_t a = 0; a < n; ++a) {
    if (grid.cell_of_atom[a] == unset)
      throw InvariantViolation("grid net is not maximal", "atom " + std::to_string(a));
    grid.cells[grid.cell_of_atom[a]].push_back(a);
  }
  return grid;
}

namespace {

// Cell of an arbitrary point of the space under the partition's assignment
// rule.  Points in the thin shell beyond every 2*delta-ball (possible only
// within the atomization slack) fall to the nearest center.
std::uint32_t assign_point(const MaximalPartition& part, const AtomicMeasure& mu,
                           std::span<const double> y) {
  double delta = part.delta;
  std::uint32_t annulus = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t nearest = 0;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (std::uint32_t j = 0; j < part.center_ids.size(); ++j) {
    double d = mu.space().distance(y, mu.position(part.center_ids[j]));
    if (d <= delta) return j;
    if (d <= 2.0 * delta && annulus == std::numeric_limits<std::uint32_t>::max()) annulus = j;
    if (d < nearest_d) {
      nearest_d = d;
      nearest = j;
    }
  }
  if (annulus != std::numeric_limits<std::uint32_t>::max()) return annulus;
  return nearest;
}

}  // namespace

GoodCover pullback_good_cover(const MaximalPartition& fine, const Word& u,
                              const AtomicMeasure& mu, double delta, double q_cap, int d_cap) {
  std::size_t n = mu.size();
  std::size_t k = fine.center_ids.size();
  std::vector<std::vector<std::uint32_t>> cells(k);
  for (std::uint32_t a = 0; a < n; ++a) {
    Vec y = u.map.apply(mu.position(a));
    cells[assign_point(fine, mu, y)].push_back(a);
  }

  GoodCover cover;
  cover.delta = delta;
  std::vector<std::uint32_t> cell_of_atom(n, 0);
  for (auto& cell : cells) {
    if (cell.empty()) continue;
    for (std::uint32_t a : cell) cell_of_atom[a] = static_cast<std::uint32_t>(cover.cells.size());
    cover.cells.push_back(std::move(cell));
  }

  double max_diam = 0.0;
  std::size_t worst_cell = 0;
  for (std::size_t j = 0; j < cover.cells.size(); ++j) {
    double d = cell_diameter(mu, cover.cells[j]);
    if (d > max_diam) {
      max_diam = d;
      worst_cell = j;
    }
  }
  cover.q_factor = max_diam / delta;

  int worst_touch = 0;
  std::size_t worst_atom = 0;
  std::vector<std::uint32_t> seen;
  for (std::uint32_t a = 0; a < n; ++a) {
    seen.clear();
    mu.index().for_each_in_range(mu.position(a), delta, [&](std::uint32_t id, double) {
      std::uint32_t c = cell_of_atom[id];
      if (std::find(seen.begin(), seen.end(), c) == seen.end()) seen.push_back(c);
    });
    if (static_cast<int>(seen.size()) > worst_touch) {
      worst_touch = static_cast<int>(seen.size());
      worst_atom = a;
    }
  }
  cover.d_bound = worst_touch;

  if (cover.q_factor > q_cap)
    throw InvariantViolation("good cover diameter certification failed",
                             "cell " + std::to_string(worst_cell) + " has diameter factor " +
                                 std::to_string(cover.q_factor) + " > cap " + std::to_string(q_cap));
  if (cover.d_bound > d_cap)
    throw InvariantViolation("good cover overlap certification failed",
                             "ball at atom " + std::to_string(worst_atom) + " meets " +
                                 std::to_string(cover.d_bound) + " cells > cap " +
                                 std::to_string(d_cap));
  return cover;
}

VerifyReport verify(const Packing& packing, const AtomicMeasure& mu) {
  VerifyReport report;
  double delta = packing.radius;

  CheckResult disjoint{"packing.disjoint_closed_balls", true, ""};
  const auto& ids = packing.center_ids;
  for (std::size_t i = 0; i < ids.size() && disjoint.pass; ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      double d = mu.space().distance(mu.position(ids[i]), mu.position(ids[j]));
      if (d <= 2.0 * delta) {
        disjoint.pass = false;
        disjoint.witness = "centers " + std::to_string(ids[i]) + "," + std::to_string(ids[j]) +
                           " at distance " + std::to_string(d) + " <= 2*delta";
        break;
      }
    }
  report.checks.push_back(disjoint);

  if (packing.maximal) {
    CheckResult maximal{"packing.maximal_double_balls_cover", true, ""};
    for (std::uint32_t a = 0; a < mu.size(); ++a) {
      bool hit = false;
      for (std::uint32_t c : ids)
        if (mu.space().distance(mu.position(a), mu.position(c)) <= 2.0 * delta) {
          hit = true;
          break;
        }
      if (!hit) {
        maximal.pass = false;
        maximal.witness = "atom " + std::to_string(a) + " uncovered";
        break;
      }
    }
    report.checks.push_back(maximal);
  }

  if (packing.heavy) {
    CheckResult heavy{"packing.heaviness_certificate", true, ""};
    std::vector<double> bm = atom_ball_masses(mu, delta);
    std::vector<bool> excluded(mu.size(), false);
    for (std::size_t j = 0; j < ids.size() && heavy.pass; ++j) {
      double cap = 2.0 * bm[ids[j]];
      for (std::uint32_t a = 0; a < mu.size(); ++a) {
        if (!excluded[a] && bm[a] > cap * (1.0 + 1e-12)) {
          heavy.pass = false;
          heavy.witness = "step " + std::to_string(j) + ": atom " + std::to_string(a) +
                          " has ball mass " + std::to_string(bm[a]) + " > 2x center mass";
          break;
        }
      }
      mu.index().for_each_in_range(mu.position(ids[j]), 2.0 * delta,
                                   [&](std::uint32_t id, double) { excluded[id] = true; });
    }
    report.checks.push_back(heavy);

    // A heavy maximal packing is in particular a packing, so its power sum
    // never exceeds the supremum over all packings.
    report.checks.push_back(
        {"packing.heavy_sum_below_supremum", disjoint.pass,
         disjoint.pass ? "" : "not a packing, sum is not a lower bound for the supremum"});
  }
  return report;
}

VerifyReport verify(const MaximalPartition& part, const AtomicMeasure& mu) {
  VerifyReport report;
  double delta = part.delta;
  std::size_t n = mu.size();

  CheckResult partition{"partition.disjoint_exhaustive", true, ""};
  std::vector<std::uint32_t> seen(n, 0);
  for (const auto& cell : part.cells)
    for (std::uint32_t a : cell) ++seen[a];
  for (std::uint32_t a = 0; a < n; ++a)
    if (seen[a] != 1) {
      partition.pass = false;
      partition.witness =
          "atom " + std::to_string(a) + " appears " + std::to_string(seen[a]) + " times";
      break;
    }
  report.checks.push_back(partition);

  CheckResult sandwich{"partition.ball_sandwich", true, ""};
  for (std::uint32_t j = 0; j < part.center_ids.size() && sandwich.pass; ++j) {
    auto center = mu.position(part.center_ids[j]);
    for (std::uint32_t a : part.cells[j]) {
      if (mu.space().distance(center, mu.position(a)) > 2.0 * delta + 1e-12) {
        sandwich.pass = false;
        sandwich.witness = "cell " + std::to_string(j) + " atom " + std::to_string(a) +
                           " outside the 2*delta ball";
        break;
      }
    }
    mu.index().for_each_in_range(center, delta, [&](std::uint32_t id, double) {
      if (part.cell_of_atom[id] != j && sandwich.pass) {
        sandwich.pass = false;
        sandwich.witness = "atom " + std::to_string(id) + " inside B_delta of center " +
                           std::to_string(j) + " but assigned elsewhere";
      }
    });
  }
  report.checks.push_back(sandwich);

  CheckResult diam{"partition.cell_diameter_4delta", true, ""};
  for (std::size_t j = 0; j < part.cells.size(); ++j) {
    double d = cell_diameter(mu, part.cells[j]);
    if (d > 4.0 * delta + 1e-12) {
      diam.pass = false;
      diam.witness = "cell " + std::to_string(j) + " has diameter " + std::to_string(d);
      break;
    }
  }
  report.checks.push_back(diam);
  return report;
}

VerifyReport verify(const GridPartition& grid, const AtomicMeasure& mu) {
  VerifyReport report;
  double r = grid.lambda * grid.delta;

  CheckResult partition{"grid.disjoint_exhaustive", true, ""};
  std::vector<std::uint32_t> seen(mu.size(), 0);
  for (const auto& cell : grid.cells)
    for (std::uint32_t a : cell) ++seen[a];
  for (std::uint32_t a = 0; a < mu.size(); ++a)
    if (seen[a] != 1) {
      partition.pass = false;
      partition.witness = "atom " + std::to_string(a);
      break;
    }
  report.checks.push_back(partition);

  CheckResult inner{"grid.contains_inner_ball", true, ""};
  for (std::uint32_t j = 0; j < grid.center_ids.size() && inner.pass; ++j) {
    mu.index().for_each_in_range(mu.position(grid.center_ids[j]), r,
                                 [&](std::uint32_t id, double) {
                                   if (grid.cell_of_atom[id] != j && inner.pass) {
                                     inner.pass = false;
                                     inner.witness = "atom " + std::to_string(id) +
                                                     " in the lambda*delta ball of center " +
                                                     std::to_string(j) + " assigned elsewhere";
                                   }
                                 });
  }
  report.checks.push_back(inner);

  CheckResult outer{"grid.inside_delta_ball", true, ""};
  for (std::uint32_t j = 0; j < grid.center_ids.size() && outer.pass; ++j) {
    auto center = mu.position(grid.center_ids[j]);
    for (std::uint32_t a : grid.cells[j]) {
      if (mu.space().distance(center, mu.position(a)) > grid.delta + 1e-12) {
        outer.pass = false;
        outer.witness = "cell " + std::to_string(j) + " atom " + std::to_string(a);
        break;
      }
    }
  }
  report.checks.push_back(outer);
  return report;
}

VerifyReport verify(const GoodCover& cover, const AtomicMeasure& mu) {
  VerifyReport report;

  CheckResult nonempty{"cover.cells_meet_support", true, ""};
  for (std::size_t j = 0; j < cover.cells.size(); ++j)
    if (cover.cells[j].empty()) {
      nonempty.pass = false;
      nonempty.witness = "cell " + std::to_string(j) + " is empty";
      break;
    }
  report.checks.push_back(nonempty);

  CheckResult covers{"cover.covers_support", true, ""};
  std::vector<bool> seen(mu.size(), false);
  for (const auto& cell : cover.cells)
    for (std::uint32_t a : cell) seen[a] = true;
  for (std::uint32_t a = 0; a < mu.size(); ++a)
    if (!seen[a]) {
      covers.pass = false;
      covers.witness = "atom " + std::to_string(a) + " uncovered";
      break;
    }
  report.checks.push_back(covers);

  CheckResult diam{"cover.diameter_within_Q_delta", true, ""};
  for (std::size_t j = 0; j < cover.cells.size(); ++j) {
    double d = cell_diameter(mu, cover.cells[j]);
    if (d > cover.q_factor * cover.delta + 1e-12) {
      diam.pass = false;
      diam.witness = "cell " + std::to_string(j) + " has diameter " + std::to_string(d);
      break;
    }
  }
  report.checks.push_back(diam);
  return report;
}

}  // namespace lqs
