#include "latgl/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "latgl/errors.hpp"

namespace latgl::io {

namespace {

template <class T>
T get(const json& j, const char* key, const char* ctx) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string(ctx) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(ctx) + ": field '" + key + "': " + e.what());
  }
}

std::vector<double> flat_array(const json& j, const char* key, std::size_t expected) {
  auto v = get<std::vector<double>>(j, key, "potential");
  if (v.size() != expected)
    throw ValidationError("potential: array '" + std::string(key) + "' has " + std::to_string(v.size()) +
                          " entries, expected " + std::to_string(expected));
  return v;
}

std::size_t channel(const GridSpec& g, int s, const char* ctx) {
  if (s < g.m_min || s > g.m_max) throw DomainError(std::string(ctx) + ": channel s = " + std::to_string(s) + " outside the m range");
  return static_cast<std::size_t>(s - g.m_min);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

json grid_to_json(const GridSpec& g) { return {{"n_max", g.n_max}, {"m_min", g.m_min}, {"m_max", g.m_max}}; }

GridSpec grid_from_json(const json& j) {
  GridSpec g{get<int>(j, "n_max", "grid"), get<int>(j, "m_min", "grid"), get<int>(j, "m_max", "grid")};
  g.validate();
  return g;
}

json potential_to_json(const Potential& pot, const std::vector<FlaggedEntry>& flagged) {
  const GridSpec& g = pot.grid();
  std::vector<double> a, b, c;
  for (int n = 0; n <= g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m) {
      if (pot.has_a(n, m)) a.push_back(pot.a(n, m));
      if (pot.has_b(n, m)) b.push_back(pot.b(n, m));
      c.push_back(pot.c(n, m));
    }
  json j{{"grid", grid_to_json(g)}, {"a", a}, {"b", b}, {"c", c}};
  if (!flagged.empty()) {
    json f = json::array();
    for (const auto& e : flagged)
      f.push_back({{"field", std::string(1, e.field)}, {"n", e.n}, {"m", e.m}, {"reason", e.reason}});
    j["flagged"] = f;
  }
  return j;
}

Potential potential_from_json(const json& j, std::vector<FlaggedEntry>* flagged) {
  const GridSpec g = grid_from_json(get<json>(j, "grid", "potential"));
  const auto w = static_cast<std::size_t>(g.width());
  const auto rows = static_cast<std::size_t>(g.rows());
  const auto a = flat_array(j, "a", (rows - 1) * w);
  const auto b = flat_array(j, "b", rows * (w - 1));
  const auto c = flat_array(j, "c", rows * w);
  Potential pot(g);
  std::size_t ia = 0, ib = 0, ic = 0;
  for (int n = 0; n <= g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m) {
      if (pot.has_a(n, m)) pot.set_a(n, m, a[ia++]);
      if (pot.has_b(n, m)) pot.set_b(n, m, b[ib++]);
      pot.set_c(n, m, c[ic++]);
    }
  pot.validate();
  if (flagged && j.contains("flagged"))
    for (const auto& e : j.at("flagged")) {
      const auto field = get<std::string>(e, "field", "flagged");
      flagged->push_back({field.empty() ? '?' : field[0], get<int>(e, "n", "flagged"), get<int>(e, "m", "flagged"),
                          get<std::string>(e, "reason", "flagged")});
    }
  return pot;
}

SpectralModification modification_from_json(const json& j, const SpectralData& ref) {
  if (!j.is_object()) throw ValidationError("modification: expected an object");
  const GridSpec& g = ref.grid;
  const auto w = static_cast<std::size_t>(g.width());
  SpectralModification mod;
  if (j.contains("added_states"))
    for (const auto& e : j.at("added_states"))
      mod.added.push_back({get<double>(e, "lambda", "added state"), get<std::vector<double>>(e, "gamma", "added state")});
  if (j.contains("reweights"))
    for (const auto& e : j.at("reweights")) {
      Reweight r{get<std::size_t>(e, "nu", "reweight"), Matrix(w, w)};
      for (const auto& d : get<json>(e, "delta_c", "reweight")) {
        const auto s = channel(g, get<int>(d, "s", "delta_c"), "delta_c");
        const auto t = channel(g, get<int>(d, "s_prime", "delta_c"), "delta_c");
        const double v = get<double>(d, "value", "delta_c");
        r.delta_c(s, t) = v;
        r.delta_c(t, s) = v;
      }
      mod.reweights.push_back(std::move(r));
    }
  if (j.contains("compensated_pairs"))
    for (const auto& e : j.at("compensated_pairs")) {
      auto pair = compensated_pair(ref, get<std::size_t>(e, "from", "compensated pair"),
                                   get<std::size_t>(e, "to", "compensated pair"), get<double>(e, "weight", "compensated pair"));
      for (auto& r : pair.reweights) mod.reweights.push_back(std::move(r));
    }
  if (j.contains("darboux_reweighting")) {
    auto dr = darboux_reweighting(ref, get<double>(j.at("darboux_reweighting"), "mu", "darboux_reweighting"));
    for (auto& r : dr.reweights) mod.reweights.push_back(std::move(r));
  }
  return mod;
}

json modification_to_json(const SpectralModification& mod, const GridSpec& grid) {
  json added = json::array(), rew = json::array();
  for (const auto& a : mod.added) added.push_back({{"lambda", a.lambda}, {"gamma", a.gamma}});
  for (const auto& r : mod.reweights) {
    json entries = json::array();
    for (std::size_t s = 0; s < r.delta_c.rows(); ++s)
      for (std::size_t t = s; t < r.delta_c.cols(); ++t)
        if (r.delta_c(s, t) != 0.0)
          entries.push_back({{"s", grid.m_min + static_cast<int>(s)},
                             {"s_prime", grid.m_min + static_cast<int>(t)},
                             {"value", r.delta_c(s, t)}});
    rew.push_back({{"nu", r.nu}, {"delta_c", entries}});
  }
  return {{"added_states", added}, {"reweights", rew}};
}

json report_to_json(const VerificationReport& rep, const std::vector<std::string>& warnings) {
  json checks = json::array();
  for (const auto& c : rep.checks) {
    json e{{"name", c.name},   {"deviation", std::isfinite(c.deviation) ? json(c.deviation) : json(format_double(c.deviation))},
           {"tolerance", c.tolerance}, {"pass", c.pass}, {"gating", c.gating}, {"where", c.where}};
    if (!c.note.empty()) e["note"] = c.note;
    checks.push_back(e);
  }
  return {{"pass", rep.all_pass()}, {"checks", checks}, {"warnings", warnings}};
}

VerificationReport report_from_json(const json& j) {
  VerificationReport rep;
  for (const auto& e : get<json>(j, "checks", "report")) {
    CheckResult c;
    c.name = get<std::string>(e, "name", "check");
    const auto& dev = e.at("deviation");
    c.deviation = dev.is_string() ? std::stod(dev.get<std::string>()) : dev.get<double>();
    c.tolerance = get<double>(e, "tolerance", "check");
    c.pass = get<bool>(e, "pass", "check");
    c.gating = e.value("gating", true);
    c.where = e.value("where", "");
    c.note = e.value("note", "");
    rep.add(std::move(c));
  }
  return rep;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  const auto text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

std::string spectral_csv(const SpectralData& sd) {
  std::ostringstream os;
  os << "nu,lambda";
  for (int s = sd.grid.m_min; s <= sd.grid.m_max; ++s) os << ",gamma_" << s;
  os << "\n";
  for (std::size_t nu = 0; nu < sd.size(); ++nu) {
    os << nu << "," << format_double(sd.eigenvalues[nu]);
    for (double v : sd.gamma(nu)) os << "," << format_double(v);
    os << "\n";
  }
  return os.str();
}

std::string polytable_csv(const PolyTable& table) {
  const GridSpec& g = table.grid();
  std::ostringstream os;
  os << "n,m,s,degree,coefficients...\n";
  for (int n = 0; n <= g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m)
      for (int s = g.m_min; s <= g.m_max; ++s) {
        const auto& p = table.at(n, m, s);
        if (p.is_zero()) continue;
        os << n << "," << m << "," << s << "," << p.degree();
        for (double c : p.coeffs) os << "," << format_double(c);
        os << "\n";
      }
  return os.str();
}

std::string kernel_csv(const TransformKernel& k) {
  const GridSpec& g = k.grid;
  std::ostringstream os;
  os << "n,m,n_prime,m_prime,value\n";
  for (std::size_t j = 0; j < g.size(); ++j) {
    const Site sj = g.site(j);
    const std::size_t end = static_cast<std::size_t>(sj.n + 1) * static_cast<std::size_t>(g.width());
    for (std::size_t kk = 0; kk < end; ++kk) {
      const double v = k.values(j, kk);
      if (v == 0.0) continue;
      const Site sk = g.site(kk);
      os << sj.n << "," << sj.m << "," << sk.n << "," << sk.m << "," << format_double(v) << "\n";
    }
  }
  return os.str();
}

std::string degrees_text(const PolyTable& table, int s) {
  const auto deg = degree_map(table, s);
  const GridSpec& g = table.grid();
  std::ostringstream os;
  os << "degrees of phi_{m," << s << "}(n); rows n = 0.." << g.n_max << ", columns m = " << g.m_min << ".." << g.m_max
     << "\n";
  for (int n = 0; n <= g.n_max; ++n) {
    os << "n=" << n << (n < 10 ? " " : "") << " |";
    for (int d : deg[n]) {
      if (d < 0)
        os << "  ·";
      else {
        std::string t = std::to_string(d);
        os << std::string(3 - std::min<std::size_t>(3, t.size()), ' ') << t;
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string formats_help() {
  return R"(Output formats (CSV: comma separated, '.' decimal point, 17 significant digits)

eigenvalues.csv    nu,lambda,gamma_<s>...      one row per eigenpair, lambda ascending;
                                               gamma_<s> = psi_nu(0, s)
polytable.csv      n,m,s,degree,c0,c1,...      one row per nonzero phi_{ms}(n); coefficients
                                               in ascending powers of lambda
degrees.txt        text grid of degree(n, m) for one channel s; '·' marks the zero polynomial
kernel.csv         n,m,n_prime,m_prime,value   nonzero K(n,m;n',m') with n' <= n
transformed.csv    same columns as polytable.csv, for the transformed solutions
potential.json     {"grid": {n_max, m_min, m_max}, "a": [...], "b": [...], "c": [...],
                    "flagged": [{field, n, m, reason}]}
                   arrays are flat, n outer and m inner; a covers n = 1..n_max,
                   b covers m = m_min+1..m_max, c covers every site
report.json        {"pass": bool, "checks": [{name, deviation, tolerance, pass, gating,
                    where, note}], "warnings": [...]}

Modification file (JSON):
  {"added_states": [{"lambda": x, "gamma": [g_mmin, ..., g_mmax]}],
   "reweights": [{"nu": i, "delta_c": [{"s": s, "s_prime": t, "value": v}]}],
   "compensated_pairs": [{"from": i, "to": j, "weight": w}],
   "darboux_reweighting": {"mu": x}}
  s values are absolute m indices; each delta_c entry sets (s,t) and (t,s).

Config file (JSON):
  {"grid": {n_max, m_min, m_max},
   "potential": {"preset": "free"} | {"preset": "constant", "c0": x}
              | {"preset": "seeded_random", "seed": n, "ranges": {a_lo, a_hi, b_lo, b_hi, c_lo, c_hi}}
              | {"file": "potential.json"},
   "modification": "mod.json", "seed": n, "samples": 10, "polytable_s": s, "out": "dir",
   "allow_uncompensated_reweight": false,
   "tolerances": {residual, orthogonality, eigensolver, structure, route, isospectral}}
)";
}

RunConfig config_from_json(const json& j, const fs::path& base) {
  if (!j.is_object()) throw ValidationError("config: expected an object");
  RunConfig cfg;
  if (j.contains("grid")) cfg.grid = grid_from_json(j.at("grid"));
  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    if (p.contains("file")) {
      cfg.potential_file = resolve(base, get<std::string>(p, "file", "potential"));
    } else {
      const auto name = get<std::string>(p, "preset", "potential");
      if (name == "free") {
        cfg.preset = preset::Free{};
      } else if (name == "constant") {
        cfg.preset = preset::Constant{get<double>(p, "c0", "potential")};
      } else if (name == "seeded_random") {
        preset::SeededRandom r{get<std::uint64_t>(p, "seed", "potential"), {}};
        if (p.contains("ranges")) {
          const auto& rg = p.at("ranges");
          r.ranges.a_lo = rg.value("a_lo", r.ranges.a_lo);
          r.ranges.a_hi = rg.value("a_hi", r.ranges.a_hi);
          r.ranges.b_lo = rg.value("b_lo", r.ranges.b_lo);
          r.ranges.b_hi = rg.value("b_hi", r.ranges.b_hi);
          r.ranges.c_lo = rg.value("c_lo", r.ranges.c_lo);
          r.ranges.c_hi = rg.value("c_hi", r.ranges.c_hi);
        }
        cfg.preset = r;
      } else {
        throw ValidationError("config: unknown potential preset '" + name + "'");
      }
    }
  }
  if (j.contains("modification")) cfg.modification_file = resolve(base, get<std::string>(j, "modification", "config"));
  if (j.contains("out")) cfg.out = resolve(base, get<std::string>(j, "out", "config"));
  if (j.contains("seed")) cfg.seed = get<std::uint64_t>(j, "seed", "config");
  if (j.contains("samples")) cfg.samples = get<std::size_t>(j, "samples", "config");
  if (j.contains("polytable_s")) cfg.polytable_s = get<int>(j, "polytable_s", "config");
  if (j.contains("allow_uncompensated_reweight"))
    cfg.allow_uncompensated = get<bool>(j, "allow_uncompensated_reweight", "config");
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    cfg.tol.residual = t.value("residual", cfg.tol.residual);
    cfg.tol.orthogonality = t.value("orthogonality", cfg.tol.orthogonality);
    cfg.tol.eigensolver = t.value("eigensolver", cfg.tol.eigensolver);
    cfg.tol.structure = t.value("structure", cfg.tol.structure);
    cfg.tol.route = t.value("route", cfg.tol.route);
    cfg.tol.isospectral = t.value("isospectral", cfg.tol.isospectral);
  }
  for (double v : {cfg.tol.residual, cfg.tol.orthogonality, cfg.tol.eigensolver, cfg.tol.structure, cfg.tol.route,
                   cfg.tol.isospectral})
    if (!(v > 0.0)) throw ValidationError("config: tolerances must be positive");
  if (!cfg.grid && !cfg.potential_file) throw ValidationError("config: needs a grid or a potential file");
  return cfg;
}

RunConfig load_config(const fs::path& path) { return config_from_json(read_json(path), path.parent_path()); }

Potential load_potential(const RunConfig& cfg) {
  if (cfg.potential_file) {
    Potential pot = potential_from_json(read_json(*cfg.potential_file));
    if (cfg.grid && !(*cfg.grid == pot.grid()))
      throw ValidationError("config grid does not match the grid of " + cfg.potential_file->string());
    return pot;
  }
  return make_potential(cfg.preset, *cfg.grid);
}

}  // namespace latgl::io
