#include "lqspectra/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lqs {

using nlohmann::json;

namespace {

json must_get(const json& obj, const std::string& field, const std::string& context) {
  if (!obj.contains(field)) throw ParseError("missing field in " + context, field);
  return obj.at(field);
}

Vec to_vec(const json& arr, const std::string& field) {
  if (!arr.is_array() || arr.empty()) throw ParseError("expected a nonempty number array", field);
  Vec out;
  for (const auto& v : arr) {
    if (!v.is_number()) throw ParseError("expected numbers", field);
    out.push_back(v.get<double>());
  }
  return out;
}

Space parse_space(const json& j) {
  std::string kind = must_get(j, "kind", "space").get<std::string>();
  int dim = must_get(j, "dim", "space").get<int>();
  if (kind == "euclidean") return Space::euclidean(dim);
  if (kind == "sphere") return Space::sphere_geodesic(dim);
  throw ParseError("unknown space kind '" + kind + "'", "space.kind");
}

}  // namespace

ParsedInput parse_input_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("invalid JSON in " + origin + ": " + e.what(), "(document)");
  }

  int format = must_get(j, "format", origin).get<int>();
  if (format != 1) throw ParseError("unsupported format version", "format");

  ParsedInput input;
  Space space = parse_space(must_get(j, "space", origin));

  if (j.contains("chart")) {
    const json& c = j.at("chart");
    std::string type = must_get(c, "type", "chart").get<std::string>();
    if (type != "stereographic") throw ParseError("unknown chart type '" + type + "'", "chart.type");
    int n = c.contains("sphere_dim") ? c.at("sphere_dim").get<int>() : space.intrinsic_dim();
    input.chart = std::make_shared<StereographicChart>(n);
  }

  if (j.contains("atoms")) {
    // Direct measure mode: {atoms: {positions: [[..]..], masses: [..]}, resolution}.
    const json& a = j.at("atoms");
    const json& positions = must_get(a, "positions", "atoms");
    const json& masses_j = must_get(a, "masses", "atoms");
    double resolution = must_get(j, "resolution", origin).get<double>();
    if (!positions.is_array() || positions.empty())
      throw ParseError("expected an array of positions", "atoms.positions");
    int dim = space.ambient_dim();
    std::vector<double> coords;
    for (const auto& p : positions) {
      Vec v = to_vec(p, "atoms.positions");
      if (static_cast<int>(v.size()) != dim)
        throw ParseError("position arity does not match the space", "atoms.positions");
      coords.insert(coords.end(), v.begin(), v.end());
    }
    std::vector<double> masses;
    for (const auto& m : masses_j) masses.push_back(m.get<double>());
    if (masses.size() != positions.size())
      throw ParseError("positions and masses have different lengths", "atoms.masses");
    try {
      input.atoms = AtomicMeasure::create(space, PointSet(std::move(coords), dim),
                                          std::move(masses), resolution);
    } catch (const DomainError& e) {
      throw ParseError(e.what(), "atoms");
    }
    return input;
  }

  const json& maps_j = must_get(j, "maps", origin);
  if (!maps_j.is_array() || maps_j.size() < 2)
    throw ParseError("a CIFS needs at least two maps", "maps");
  std::vector<ConformalMap> maps;
  for (std::size_t i = 0; i < maps_j.size(); ++i) {
    const json& m = maps_j[i];
    std::string field = "maps[" + std::to_string(i) + "]";
    std::string type = must_get(m, "type", field).get<std::string>();
    if (type != "similarity")
      throw ParseError("unknown map type '" + type + "'", field + ".type");
    double ratio = must_get(m, "ratio", field).get<double>();
    Vec shift = to_vec(must_get(m, "translation", field), field + ".translation");
    std::vector<double> rot;
    if (m.contains("rotation")) {
      const json& r = m.at("rotation");
      for (const auto& row : r)
        for (const auto& v : row) rot.push_back(v.get<double>());
    }
    double gamma = m.contains("gamma") ? m.at("gamma").get<double>() : 0.5;
    try {
      maps.push_back(ConformalMap::similarity(ratio, std::move(rot), std::move(shift), gamma));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), field);
    }
  }

  Vec probs = to_vec(must_get(j, "probs", origin), "probs");
  double total = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) throw ParseError("probabilities must be positive", "probs");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ParseError("probabilities must sum to 1 (got " + std::to_string(total) + ")", "probs");
  if (probs.size() != maps.size())
    throw ParseError("probs length does not match the map count", "probs");

  const json& seed_j = must_get(j, "seed_ball", origin);
  Vec center = to_vec(must_get(seed_j, "center", "seed_ball"), "seed_ball.center");
  double radius = must_get(seed_j, "radius", "seed_ball").get<double>();
  if (!(radius > 0.0)) throw ParseError("seed radius must be positive", "seed_ball.radius");

  std::uint64_t budget = 2'000'000;
  if (j.contains("word_budget")) budget = j.at("word_budget").get<std::uint64_t>();

  try {
    input.ifs = IFSSpec::create(std::move(maps), std::vector<double>(probs.begin(), probs.end()),
                                space, make_ball(std::move(center), radius), budget);
  } catch (const DomainError& e) {
    throw ParseError(e.what(), "maps/seed_ball");
  }
  return input;
}

ParsedInput read_input_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open spec file '" + path + "'", "(path)");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_input_json(ss.str(), path);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_spectrum_csv(const std::string& path, const SpectrumTable& table) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'", "(path)");
  out << "q,t,S_heavy,S_grid,I_gd,tau_hat,dim_hat,error_bound\r\n";
  for (std::size_t qi = 0; qi < table.q_grid.size(); ++qi) {
    const QFit& fit = table.fits[qi];
    for (std::size_t ti = 0; ti < table.t_grid.size(); ++ti) {
      const SpectrumEntry& e = table.at(qi, ti);
      out << format_double(e.q) << ',' << e.t << ',' << format_double(e.s_heavy) << ','
          << format_double(e.s_grid) << ',' << format_double(e.i_gd) << ','
          << format_double(fit.tau_hat) << ',' << format_double(fit.dim_hat) << ','
          << format_double(e.error_bound) << "\r\n";
    }
  }
}

void write_spectrum_json(const std::string& path, const SpectrumTable& table,
                         const std::vector<std::pair<std::string, std::string>>& meta) {
  json j;
  for (const auto& [k, v] : meta) j["meta"][k] = v;
  j["lambda"] = table.lambda;
  j["t_grid"] = table.t_grid;
  j["q_grid"] = table.q_grid;
  json rows = json::array();
  for (std::size_t qi = 0; qi < table.q_grid.size(); ++qi)
    for (std::size_t ti = 0; ti < table.t_grid.size(); ++ti) {
      const SpectrumEntry& e = table.at(qi, ti);
      json row;
      row["q"] = e.q;
      row["t"] = e.t;
      row["S_heavy"] = e.s_heavy;
      row["S_grid"] = e.s_grid;
      if (!std::isnan(e.i_gd)) row["I_gd"] = e.i_gd;
      row["error_bound"] = e.error_bound;
      rows.push_back(row);
    }
  j["entries"] = rows;
  json fits = json::array();
  for (const QFit& f : table.fits) {
    json row;
    row["q"] = f.q;
    row["tau_hat"] = f.tau_hat;
    row["residual"] = f.residual;
    if (!std::isnan(f.dim_hat)) row["dim_hat"] = f.dim_hat;
    if (!std::isnan(f.gd_dim)) row["gd_dim"] = f.gd_dim;
    fits.push_back(row);
  }
  j["fits"] = fits;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'", "(path)");
  out << j.dump(2) << '\n';
}

void write_entropy_csv(const std::string& path, const EntropyTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'", "(path)");
  out << "t,h_star,ball_log_integral,dim_e_hat\r\n";
  for (std::size_t i = 0; i < trace.t_grid.size(); ++i) {
    out << trace.t_grid[i] << ',' << format_double(trace.h_star[i]) << ','
        << format_double(trace.ball_log[i]) << ',' << format_double(trace.dim_e_hat) << "\r\n";
  }
}

void write_entropy_json(const std::string& path, const EntropyTrace& trace,
                        const std::vector<std::pair<std::string, std::string>>& meta) {
  json j;
  for (const auto& [k, v] : meta) j["meta"][k] = v;
  j["t_grid"] = trace.t_grid;
  j["h_star"] = trace.h_star;
  j["ball_log_integral"] = trace.ball_log;
  j["dim_e_hat"] = trace.dim_e_hat;
  j["doubling_c_hat"] = trace.doubling_c_hat;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'", "(path)");
  out << j.dump(2) << '\n';
}

void write_atoms_csv(const std::string& path, const AtomicMeasure& mu) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'", "(path)");
  int dim = mu.positions().dim();
  out << "atom";
  const char* names[] = {"x", "y", "z", "w"};
  for (int a = 0; a < dim; ++a) {
    std::string col = a < 4 ? names[a] : "c" + std::to_string(a);
    out << ',' << col;
  }
  out << ",mass\r\n";
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out << i;
    for (double c : mu.position(i)) out << ',' << format_double(c);
    out << ',' << format_double(mu.mass(i)) << "\r\n";
  }
}

void write_packing_csv(const std::string& path, const Packing& packing, const AtomicMeasure& mu) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'", "(path)");
  int dim = mu.positions().dim();
  out << "cell,center_atom,radius";
  for (int a = 0; a < dim; ++a) out << ",c" << a;
  out << "\r\n";
  for (std::size_t j = 0; j < packing.center_ids.size(); ++j) {
    out << j << ',' << packing.center_ids[j] << ',' << format_double(packing.radius);
    for (double c : mu.position(packing.center_ids[j])) out << ',' << format_double(c);
    out << "\r\n";
  }
}

void write_cells_csv(const std::string& path, const MaximalPartition& part,
                     const AtomicMeasure& mu) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'", "(path)");
  out << "atom,cell,via_core,mass\r\n";
  for (std::uint32_t a = 0; a < part.cell_of_atom.size(); ++a) {
    out << a << ',' << part.cell_of_atom[a] << ',' << int(part.via_core[a]) << ','
        << format_double(mu.mass(a)) << "\r\n";
  }
}

std::pair<Packing, CheckResult> import_packing_csv(const std::string& path,
                                                   const AtomicMeasure& mu) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open packing file '" + path + "'", "(path)");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty packing file", "(header)");

  Packing packing;
  CheckResult on_support{"packing.centers_on_support", true, ""};
  int dim = mu.positions().dim();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string fieldv;
    std::vector<std::string> fields;
    while (std::getline(ss, fieldv, ',')) fields.push_back(fieldv);
    if (static_cast<int>(fields.size()) != 3 + dim)
      throw ParseError("bad column count on line " + std::to_string(lineno), "(row)");
    double radius = std::stod(fields[2]);
    packing.radius = radius;
    Vec center(dim);
    for (int a = 0; a < dim; ++a) center[a] = std::stod(fields[3 + a]);

    // Re-associate with the nearest support atom.
    double best_d = 1e300;
    std::uint32_t best = 0;
    for (std::uint32_t i = 0; i < mu.size(); ++i) {
      double d = mu.space().distance(center, mu.position(i));
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best_d > 4.0 * mu.resolution() && on_support.pass) {
      on_support.pass = false;
      on_support.witness = "line " + std::to_string(lineno) + ": center at distance " +
                           std::to_string(best_d) + " from the nearest support atom";
    }
    packing.center_ids.push_back(best);
  }
  packing.maximal = true;
  packing.heavy = true;
  return {packing, on_support};
}

void write_verify_json(const std::string& path, const std::vector<NamedReport>& reports,
                       const std::vector<std::pair<std::string, double>>& constants) {
  json j;
  bool all = true;
  json objs = json::array();
  for (const NamedReport& named : reports) {
    json obj;
    obj["object"] = named.object;
    json checks = json::array();
    for (const CheckResult& c : named.report.checks) {
      json cj;
      cj["name"] = c.name;
      cj["pass"] = c.pass;
      if (!c.witness.empty()) cj["witness"] = c.witness;
      checks.push_back(cj);
      all = all && c.pass;
    }
    obj["checks"] = checks;
    objs.push_back(obj);
  }
  j["objects"] = objs;
  j["all_pass"] = all;
  for (const auto& [k, v] : constants) j["constants"][k] = v;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open output file '" + path + "'", "(path)");
  out << j.dump(2) << '\n';
}

}  // namespace lqs
