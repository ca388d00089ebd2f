#include "tfa/pipeline.hpp"

#include <boost/crc.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fftw3.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tfa/errors.hpp"
#include "tfa/forms.hpp"
#include "tfa/parallel.hpp"

namespace tfa {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- config parsing

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  try {
    size_t pos = 0;
    double x = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "not a number: '" + s + "'");
  }
}

long long to_int(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  try {
    size_t pos = 0;
    long long x = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "not an integer: '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  try {
    size_t pos = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
    unsigned long long x = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, "not an unsigned integer: '" + s + "'");
  }
}

bool to_bool(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key, "not a boolean: '" + s + "'");
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& s : split(raw)) out.push_back(to_double(key, s));
  return out;
}

std::vector<int> to_schedule(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  std::vector<int> out;
  auto dots = s.find("..");
  if (dots != std::string::npos) {
    long long a = to_int(key, s.substr(0, dots)), b = to_int(key, s.substr(dots + 2));
    if (b < a) throw ConfigError(key, "empty range");
    for (long long m = a; m <= b; ++m) out.push_back(static_cast<int>(m));
    return out;
  }
  for (const auto& item : split(s)) out.push_back(static_cast<int>(to_int(key, item)));
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"grid", {"N", "band", "jq_min", "jq_max", "beta", "quad_eps", "kmax", "modes"}},
      {"constants", {"C0", "K", "Ndecay", "lattice_shift", "allow_overflow"}},
      {"sweep", {"M1", "band", "kmax", "modes", "record_runtime"}},
      {"exponents", {"p", "contrast"}},
      {"selection", {"D", "tol_zero", "max_project_trees"}},
      {"run", {"seed", "threads", "record_timings"}},
  };
  return k;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", std::string("unreadable INI: ") + e.message() + " at line " +
                                    std::to_string(e.line()));
  }
  RunConfig c;
  c.text = text;
  for (const auto& [section, body] : tree) {
    auto ks = known_keys().find(section);
    if (ks == known_keys().end()) {
      if (body.empty()) throw ConfigError(section, "value outside any section");
      throw ConfigError(section, "unknown section");
    }
    if (section == "sweep") c.has_sweep = true;
    for (const auto& [key, node] : body) {
      const std::string path = section + "." + key;
      if (!ks->second.count(key)) throw ConfigError(path, "unknown key");
      const std::string v = node.data();
      if (path == "grid.N") c.N = static_cast<int>(to_int(path, v));
      else if (path == "grid.band") c.band = static_cast<int>(to_int(path, v));
      else if (path == "grid.jq_min") c.jq_min = static_cast<int>(to_int(path, v));
      else if (path == "grid.jq_max") c.jq_max = static_cast<int>(to_int(path, v));
      else if (path == "grid.beta") c.beta = to_doubles(path, v);
      else if (path == "grid.quad_eps") c.quad_eps = to_double(path, v);
      else if (path == "grid.kmax") c.signal_kmax = static_cast<int>(to_int(path, v));
      else if (path == "grid.modes") c.signal_modes = static_cast<int>(to_int(path, v));
      else if (path == "constants.C0") c.gc.C0 = static_cast<int>(to_int(path, v));
      else if (path == "constants.K") c.gc.K = static_cast<int>(to_int(path, v));
      else if (path == "constants.Ndecay") c.gc.Ndecay = static_cast<int>(to_int(path, v));
      else if (path == "constants.lattice_shift") c.gc.lattice_shift = static_cast<int>(to_int(path, v));
      else if (path == "constants.allow_overflow") c.allow_overflow = to_bool(path, v);
      else if (path == "sweep.M1") c.M1 = to_schedule(path, v);
      else if (path == "sweep.band") c.sweep_band = static_cast<int>(to_int(path, v));
      else if (path == "sweep.kmax") c.kmax = static_cast<int>(to_int(path, v));
      else if (path == "sweep.modes") c.modes = static_cast<int>(to_int(path, v));
      else if (path == "sweep.record_runtime") c.record_runtime = to_bool(path, v);
      else if (path == "exponents.p") c.p = to_doubles(path, v);
      else if (path == "exponents.contrast") c.contrast_p = to_doubles(path, v);
      else if (path == "selection.D") c.D = static_cast<int>(to_int(path, v));
      else if (path == "selection.tol_zero") c.tol_zero = to_double(path, v);
      else if (path == "selection.max_project_trees") c.max_project_trees = static_cast<int>(to_int(path, v));
      else if (path == "run.seed") c.seed = to_u64(path, v);
      else if (path == "run.threads") c.threads = static_cast<int>(to_int(path, v));
      else if (path == "run.record_timings") c.record_timings = to_bool(path, v);
    }
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const RunConfig& c) {
  c.gc.validate();
  if (c.N < 64 || (c.N & (c.N - 1))) throw ConfigError("grid.N", "must be a power of two >= 64");
  if (c.band <= 0) throw ConfigError("grid.band", "must be positive");
  if (c.jq_min < 0) throw ConfigError("grid.jq_min", "must be >= 0");
  if (c.jq_max < c.jq_min - 1) throw ConfigError("grid.jq_max", "must be >= jq_min - 1 (jq_min - 1 is the empty range)");
  if (c.jq_max > 2) throw ConfigError("grid.jq_max", "must be <= 2 (spatial grid resolution)");
  if (c.beta.size() != 3) throw ConfigError("grid.beta", "needs three entries");
  for (size_t a = 0; a < 3; ++a) {
    if (c.beta[a] != std::round(c.beta[a])) throw ConfigError("grid.beta", "entries must be integers");
    for (size_t b = a + 1; b < 3; ++b)
      if (c.beta[a] == c.beta[b]) throw ConfigError("grid.beta", "entries must be pairwise distinct");
  }
  if (!(c.quad_eps > 0 && c.quad_eps < 0.25)) throw ConfigError("grid.quad_eps", "must lie in (0, 0.25)");
  if (c.signal_kmax < 0 || 2 * c.signal_kmax >= c.N / 2) throw ConfigError("grid.kmax", "must lie in [0, N/4)");
  if (c.signal_modes < 1) throw ConfigError("grid.modes", "must be positive");
  if (c.M1.empty()) throw ConfigError("sweep.M1", "empty schedule");
  for (int m : c.M1)
    if (m < 0 || m > 20) throw ConfigError("sweep.M1", "entries must lie in [0, 20]");
  if (c.sweep_band <= 0) throw ConfigError("sweep.band", "must be positive");
  if (c.kmax < 0 || 2 * c.kmax >= c.N / 2) throw ConfigError("sweep.kmax", "must lie in [0, N/4)");
  if (c.modes < 1) throw ConfigError("sweep.modes", "must be positive");
  try {
    check_exponents(c.p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("exponents.p", e.what());
  }
  if (c.p.size() != 3) throw ConfigError("exponents.p", "needs three entries");
  try {
    check_exponents(c.contrast_p, false);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("exponents.contrast", e.what());
  }
  if (c.contrast_p.size() != 3) throw ConfigError("exponents.contrast", "needs three entries");
  if (c.D < 1 || c.D > 8) throw ConfigError("selection.D", "must lie in [1, 8]");
  if (!(c.tol_zero > 0 && c.tol_zero < 1)) throw ConfigError("selection.tol_zero", "must lie in (0, 1)");
  if (c.max_project_trees < 0) throw ConfigError("selection.max_project_trees", "must be >= 0");
  if (c.threads < 1 || c.threads > 256) throw ConfigError("run.threads", "must lie in [1, 256]");
}

// ---------------------------------------------------------------- decomposition and dumps

Decomposition configured_decomposition(const RunConfig& cfg) {
  DegeneracyVector v(beta_to_v(cfg.beta), cfg.gc.K);
  Decomposition d = decompose_band(v, cfg.band, cfg.jq_min, cfg.jq_max, cfg.gc);
  if (!cfg.allow_overflow && d.sparse.overflow_families > 0)
    throw StructuralError("adjusted intervals: " + std::to_string(d.sparse.overflow_families) +
                          " cubes could not be adjusted inside their residue family (K = " +
                          std::to_string(cfg.gc.K) + " too small for the 1% budget)");
  return d;
}

std::vector<Signal> configured_signals(const RunConfig& cfg, int N) {
  if (N == 0) N = cfg.N;
  std::vector<Signal> f;
  for (int i = 0; i < 3; ++i) f.push_back(band_limited_signal(N, cfg.signal_kmax, cfg.seed + i, cfg.signal_modes));
  return f;
}

namespace {

json constants_json(const GridConstants& gc) {
  return {{"C0", gc.C0}, {"K", gc.K}, {"Ndecay", gc.Ndecay}, {"lattice_shift", gc.lattice_shift}};
}

json cubes_json(const std::vector<Cube>& cubes) {
  json a = json::array();
  for (const auto& q : cubes) {
    json c{{"jq", q.jq}, {"j", q.j}};
    json ctr = json::array(), adj = json::array();
    for (const auto& x : q.center) ctr.push_back(x.str());
    for (const auto& I : q.adjusted) adj.push_back({I.lo.str(), I.hi.str()});
    c["center"] = ctr;
    c["adjusted"] = adj;
    a.push_back(c);
  }
  return a;
}

json families_json(const SparsifyResult& s) {
  json a = json::array();
  for (const auto& f : s.families) a.push_back(f.cubes);
  return a;
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// |a - b| relative to b, floored at the Hoelder product prod ||f_i||_3 so vanishing forms compare absolutely
double form_residual(cplx a, cplx b, const std::vector<Signal>& f) {
  double scale = 1;
  for (const auto& g : f) scale *= lp_norm(g, 3);
  return std::abs(a - b) / std::max(std::abs(b), scale);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string fmt(cplx z) {
  std::ostringstream os;
  os << std::setprecision(17) << z.real() << (z.imag() < 0 || std::signbit(z.imag()) ? "" : "+") << z.imag() << "i";
  return os.str();
}

}  // namespace

std::string tileset_json(const Decomposition& d) {
  json j;
  j["v"] = d.v.v();
  j["constants"] = constants_json(d.tiles.gc());
  j["cubes"] = cubes_json(d.tiles.cubes());
  j["families"] = families_json(d.sparse);
  json tiles = json::array();
  for (int t = 0; t < d.tiles.size(); ++t) tiles.push_back({d.tiles[t].cube, d.tiles[t].span.jq, d.tiles[t].span.a});
  j["tiles"] = tiles;
  return dump(j);
}

Decomposition tileset_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    GridConstants gc;
    gc.C0 = j.at("constants").at("C0");
    gc.K = j.at("constants").at("K");
    gc.Ndecay = j.at("constants").at("Ndecay");
    gc.lattice_shift = j.at("constants").at("lattice_shift");
    std::vector<Cube> cubes;
    for (const auto& c : j.at("cubes")) {
      Cube q;
      q.jq = c.at("jq");
      q.j = c.at("j");
      for (const auto& x : c.at("center")) q.center.push_back(Dyadic::parse(x.get<std::string>()));
      for (const auto& I : c.at("adjusted"))
        q.adjusted.push_back({Dyadic::parse(I.at(0).get<std::string>()), Dyadic::parse(I.at(1).get<std::string>())});
      cubes.push_back(std::move(q));
    }
    Decomposition d;
    d.v = DegeneracyVector(j.at("v").get<std::vector<double>>(), gc.K);
    for (const auto& f : j.at("families")) {
      SparseFamily fam;
      fam.id = static_cast<int>(d.sparse.families.size());
      fam.cubes = f.get<std::vector<int>>();
      for (int c : fam.cubes)
        if (c < 0 || c >= static_cast<int>(cubes.size())) throw ConfigError("input.families", "cube index out of range");
      d.sparse.families.push_back(fam);
    }
    d.sparse.residue_modulus = residue_modulus(gc);
    d.tiles = TileSet(std::move(cubes), d.v, gc);
    return d;
  } catch (const json::exception& e) {
    throw ConfigError("input", std::string("malformed tile dump: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("input", std::string("malformed tile dump: ") + e.what());
  }
}

// ---------------------------------------------------------------- selection

std::vector<FamilySelection> select_families(const Decomposition& d, const std::vector<Signal>& f,
                                             const SelectionConfig& sc, int threads) {
  const int F = static_cast<int>(d.sparse.families.size());
  std::vector<FamilySelection> out(F);
  threads = std::max(1, std::min(threads, F));
  // one set of contexts per worker; the caches do not change the values
  std::vector<std::vector<SizeContext>> ctx(threads);
  for (auto& c : ctx)
    for (int i = 0; i < d.v.n(); ++i) c.emplace_back(f[d.v.perm()[i]], sc.D);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int k = w; k < F; k += threads) {
          TileSet ts = family_tiles(d.tiles.cubes(), d.sparse.families[k], d.v, d.tiles.gc());
          out[k] = {k, level_partition(ctx[w], ts, sc)};
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<int> multiscale_families(const Decomposition& d) {
  std::vector<int> out;
  for (const auto& f : d.sparse.families) {
    std::set<int> js;
    for (int c : f.cubes) js.insert(d.tiles.cubes()[c].jq);
    if (js.size() > 1) out.push_back(f.id);
  }
  return out;
}

std::vector<ProbeCase> lacunary_probes(const TileSet& ts) {
  std::vector<ProbeCase> out;
  std::vector<char> alive(ts.size(), 1);
  for (const auto& c : enumerate_tops(ts, alive)) {
    Tree T{maximal_tree(ts, alive, c.s, c.I), c.s, c.I};
    for (const auto& [mask, Tc] : split_by_lacunarity(ts, T))
      for (int i = 0; i < ts.n(); ++i)
        if (mask >> i & 1) out.push_back({Tc, i});
  }
  return out;
}

std::optional<ProbeCase> nonlacunary_probe(const TileSet& ts, std::mt19937_64& rng) {
  int coarse = 1 << 30;
  for (int t = 0; t < ts.size(); ++t) coarse = std::min(coarse, ts[t].span.jq);
  int fine = coarse + 1, t1 = -1;
  for (int t = 0; t < ts.size() && t1 < 0; ++t)
    if (ts[t].span.jq == fine) t1 = t;
  if (t1 < 0) return std::nullopt;
  int i = std::uniform_int_distribution<int>(0, ts.n() - 1)(rng);
  Dyadic s = ts.cube_of(t1).center[i] + Dyadic::from_int(std::uniform_int_distribution<int>(-15, 15)(rng));
  std::vector<char> alive(ts.size(), 0);
  for (int t = 0; t < ts.size(); ++t)
    if (ts[t].span.jq == fine && std::bernoulli_distribution(0.4)(rng)) alive[t] = 1;
  alive[t1] = 1;
  DyadicSpan top{coarse, 0};
  Tree T{maximal_tree(ts, alive, s, top), s, top};
  if (T.tiles.empty()) return std::nullopt;
  for (const auto& [mask, Tc] : split_by_lacunarity(ts, T))
    if (!(mask >> i & 1)) return ProbeCase{Tc, i};
  return std::nullopt;
}

// ---------------------------------------------------------------- verification

namespace {

bool in_open_arc(double x, double lo, double hi) {
  double t = x - lo;
  t -= std::floor(t);
  return t > 0 && t < hi - lo;
}

bool same_side_disjoint(const ProjectionResult& r) {
  for (size_t a = 0; a < r.corrections.size(); ++a)
    for (size_t b = a + 1; b < r.corrections.size(); ++b) {
      const auto& x = r.corrections[a];
      const auto& y = r.corrections[b];
      if (x.left != y.left) continue;
      if (in_open_arc(x.lo + 1e-15, y.lo, y.hi) || in_open_arc(y.lo + 1e-15, x.lo, x.hi)) return false;
    }
  return true;
}

struct Suite {
  std::string name;
  std::vector<Verdict> out;
  void add(const std::string& n, bool pass, const std::string& detail) { out.push_back({name, n, pass, detail}); }
};

std::vector<Verdict> verify_geometry_suite(const Decomposition& d) {
  Suite s{"geometry", {}};
  auto rep = verify_geometry(d.tiles.cubes(), d.sparse.families, d.tiles.gc(), 1000);
  std::map<std::string, std::string> first;
  for (const auto& v : rep.violations)
    if (!first.count(v.kind)) first[v.kind] = v.detail;
  auto has = [&](const std::vector<const char*>& kinds) -> std::pair<bool, std::string> {
    for (const char* k : kinds)
      if (first.count(k)) return {false, std::string(k) + ": " + first[k]};
    return {true, ""};
  };
  std::ostringstream os;
  os << rep.cubes << " cubes, " << rep.families << " families, " << rep.pair_checks << " pairs";
  for (auto [name, kinds] : std::vector<std::pair<const char*, std::vector<const char*>>>{
           {"whitney", {"whitney"}},
           {"family-partition", {"partition"}},
           {"enlargement-budget", {"budget", "adjusted"}},
           {"sparse", {"sparse-scale", "sparse-single-scale", "sparse-injectivity"}},
           {"dyadic-lemma", {"dyadic-lemma"}}}) {
    auto [ok, w] = has(kinds);
    s.add(name, ok, ok ? os.str() : w);
  }
  return s.out;
}

std::vector<Verdict> verify_tiles_suite(const Decomposition& d) {
  Suite s{"tiles", {}};
  std::string witness;
  long long checked = 0;
  for (const auto& fam : d.sparse.families) {
    TileSet ts = family_tiles(d.tiles.cubes(), fam, d.v, d.tiles.gc());
    if (ts.size() > 2000) continue;
    ++checked;
    if (auto bad = order_violation(ts)) {
      witness = "family " + std::to_string(fam.id) + ": " + *bad;
      break;
    }
  }
  s.add("order-transitivity", witness.empty(),
        witness.empty() ? std::to_string(checked) + " family tile sets scanned" : witness);

  // random maximal trees: lacunary classes cover the tree, no empty class, distinct scales
  std::mt19937_64 rng(7);
  std::string empty_w, inj_w, valid_w;
  int trees = 0;
  auto fams = multiscale_families(d);
  if (fams.empty())
    for (const auto& f : d.sparse.families) fams.push_back(f.id);
  for (int k = 0; k < static_cast<int>(fams.size()) && trees < 100; ++k) {
    TileSet ts = family_tiles(d.tiles.cubes(), d.sparse.families[fams[(k * 7) % fams.size()]], d.v, d.tiles.gc());
    std::vector<char> alive(ts.size(), 1);
    auto tops = enumerate_tops(ts, alive);
    if (tops.empty()) continue;
    const auto& c = tops[std::uniform_int_distribution<size_t>(0, tops.size() - 1)(rng)];
    Tree T{maximal_tree(ts, alive, c.s, c.I), c.s, c.I};
    ++trees;
    try {
      validate_tree(ts, T);
    } catch (const StructuralError& e) {
      if (valid_w.empty()) valid_w = e.what();
    }
    try {
      size_t total = 0;
      for (const auto& [mask, Tc] : split_by_lacunarity(ts, T)) {
        if (mask == 0 && empty_w.empty()) empty_w = "empty lacunary class populated";
        total += Tc.tiles.size();
      }
      if (total != T.tiles.size() && empty_w.empty()) empty_w = "lacunary classes do not partition the tree";
    } catch (const StructuralError& e) {
      if (empty_w.empty()) empty_w = e.what();
    }
    std::map<int, int> scale_cube;
    for (int t : T.tiles) {
      int cube = ts[t].cube, j = ts.cube_of(t).j;
      auto [it, fresh] = scale_cube.emplace(j, cube);
      if (!fresh && it->second != cube && inj_w.empty())
        inj_w = "two boxes at j = " + std::to_string(j) + " in one tree";
    }
  }
  std::string n = std::to_string(trees) + " trees";
  s.add("tree-validity", valid_w.empty(), valid_w.empty() ? n : valid_w);
  s.add("empty-lacunary-class", empty_w.empty(), empty_w.empty() ? n : empty_w);
  s.add("box-scale-injectivity", inj_w.empty(), inj_w.empty() ? n : inj_w);
  return s.out;
}

std::vector<Verdict> verify_signals_suite(const RunConfig& cfg) {
  Suite s{"signals", {}};
  auto f = configured_signals(cfg);
  auto c = forward(f[0]);
  double e = 0;
  for (auto z : c) e += std::norm(z);
  double l2 = l2_norm(f[0]);
  s.add("parseval", std::fabs(e - l2 * l2) <= 1e-12 * l2 * l2, "|sum |c|^2 - ||f||^2| relative");
  Signal a = indicator({{0.1, 0.3}}, cfg.N), b = indicator({{0.3, 0.65}}, cfg.N), ab = indicator({{0.1, 0.65}}, cfg.N);
  s.add("indicator-additivity", l2_norm(a + b - ab) == 0.0, "half-open arcs add exactly");
  EtaKernel eta(cfg.gc.K);
  Signal sum = make_signal(cfg.N);
  const int parts = 1 << cfg.gc.K;
  for (int k = 0; k < parts; ++k)
    sum = sum + smooth_indicator({{double(k) / parts, double(k + 1) / parts}}, 1, eta, cfg.N);
  double dev = 0;
  for (auto z : sum.x) dev = std::max(dev, std::abs(z - 1.0));
  s.add("smooth-partition-of-unity", dev <= 1e-12, "max |sum_I chi_{I,1} - 1| = " + fmt(dev));
  Signal hp = riesz_projection(f[1], 3.5, RieszSign::plus), hm = riesz_projection(f[1], 3.5, RieszSign::minus);
  double rs = l2_norm(hp + hm - f[1]) / l2_norm(f[1]);
  s.add("riesz-split", rs <= 1e-13, "||H+ f + H- f - f|| / ||f|| = " + fmt(rs));
  return s.out;
}

std::vector<Verdict> verify_selection_suite(const RunConfig& cfg, const Decomposition& d) {
  Suite s{"selection", {}};
  auto f = configured_signals(cfg);
  SelectionConfig sc{cfg.D, cfg.tol_zero};
  auto sel = select_families(d, f, sc, cfg.threads);
  std::string disjoint_w, valid_w, residual_w;
  double bessel = 0;
  long long trees = 0;
  std::vector<SizeContext> ctx;
  for (int i = 0; i < d.v.n(); ++i) ctx.emplace_back(f[d.v.perm()[i]], cfg.D);
  for (const auto& fs : sel) {
    TileSet ts = family_tiles(d.tiles.cubes(), d.sparse.families[fs.family], d.v, d.tiles.gc());
    std::vector<int> used(ts.size(), 0);
    for (const auto& st : fs.partition.trees) {
      ++trees;
      for (int t : st.tree.tiles) ++used[t];
      try {
        validate_tree(ts, st.tree);
      } catch (const StructuralError& e) {
        if (valid_w.empty()) valid_w = "family " + std::to_string(fs.family) + ": " + e.what();
      }
    }
    for (int t = 0; t < ts.size(); ++t)
      if (used[t] > 1 && disjoint_w.empty())
        disjoint_w = "family " + std::to_string(fs.family) + " tile " + std::to_string(t) + " selected twice";
    bessel = std::max(bessel, fs.partition.bessel_max);
    std::vector<char> alive(ts.size(), 0);
    for (int t : fs.partition.residual) alive[t] = 1;
    for (int i = 0; i < ts.n() && residual_w.empty(); ++i)
      for (int sign : {1, -1}) {
        double m = maximal_size(ctx[i], ts, alive, i, sign).value;
        if (m >= cfg.tol_zero * ctx[i].l2())
          residual_w = "family " + std::to_string(fs.family) + " keeps size " + fmt(m);
      }
  }
  std::string n = std::to_string(trees) + " trees over " + std::to_string(sel.size()) + " families";
  s.add("trees-disjoint", disjoint_w.empty(), disjoint_w.empty() ? n : disjoint_w);
  s.add("trees-valid", valid_w.empty(), valid_w.empty() ? n : valid_w);
  s.add("residual-below-threshold", residual_w.empty(), residual_w.empty() ? n : residual_w);
  s.add("bessel-finite", std::isfinite(bessel), "max 2^m sum |I_T| / ||f||^2 = " + fmt(bessel));
  return s.out;
}

std::vector<Verdict> verify_projections_suite(const RunConfig& cfg, const Decomposition& d) {
  Suite s{"projections", {}};
  auto fams = multiscale_families(d);
  EtaKernel eta(cfg.gc.K);
  auto f = configured_signals(cfg);
  double fire2 = 0, moment = 0;
  bool sides = true;
  long long lac = 0, corr = 0;
  std::string err;
  std::mt19937_64 rng(cfg.seed);
  const int take = std::min<int>(static_cast<int>(fams.size()), 24);
  for (int k = 0; k < take; ++k) {
    TileSet ts = family_tiles(d.tiles.cubes(), d.sparse.families[fams[(k * 11) % fams.size()]], d.v, d.tiles.gc());
    auto probes = lacunary_probes(ts);
    for (size_t p = 0; p < probes.size(); p += std::max<size_t>(1, probes.size() / 8)) {
      const auto& c = probes[p];
      auto A = compute_anatomy(ts, c.T);
      auto r = project_lacunary(f[d.v.perm()[c.i]], ts, c.T, A, c.i, eta);
      fire2 = std::max(fire2, r.max_fire2());
      ++lac;
    }
    for (int rep = 0; rep < 3; ++rep) {
      auto c = nonlacunary_probe(ts, rng);
      if (!c) continue;
      auto A = compute_anatomy(ts, c->T);
      try {
        auto r = project_nonlacunary(f[d.v.perm()[c->i]], ts, c->T, A, c->i);
        moment = std::max(moment, r.max_moment());
        sides = sides && same_side_disjoint(r) && boundary_statistics(A).side_disjoint;
        corr += static_cast<long long>(r.corrections.size());
      } catch (const StructuralError& e) {
        if (err.empty()) err = e.what();
      }
    }
  }
  s.add("fire2-reproducing", lac > 0 && fire2 <= 1e-8,
        std::to_string(lac) + " lacunary trees, max residual " + fmt(fire2));
  s.add("moment-property", err.empty() && moment <= 1e-10,
        err.empty() ? std::to_string(corr) + " corrections, max residual " + fmt(moment) : err);
  s.add("side-intervals-disjoint", err.empty() && sides, err.empty() ? "exact interval checks" : err);
  return s.out;
}

std::vector<Verdict> verify_forms_suite(const RunConfig& cfg, const Decomposition& d) {
  Suite s{"forms", {}};
  {
    const int N = 64;
    std::vector<Signal> f;
    for (int i = 0; i < 3; ++i) f.push_back(band_limited_signal(N, 31, cfg.seed + 10 + i, 64));
    auto m = MultiplierSpec::sgn_beta(cfg.beta);
    std::vector<std::vector<cplx>> c;
    for (const auto& g : f) c.push_back(forward(g));
    cplx brute = 0;
    for (int a = -N / 2; a < N / 2; ++a)
      for (int b = -N / 2; b < N / 2; ++b)
        for (int e = -N / 2; e < N / 2; ++e)
          if (a + b + e == 0)
            brute += m.at({a, b, e}, 1.0) * c[0][frequency_bin(a, N)] * c[1][frequency_bin(b, N)] *
                     c[2][frequency_bin(e, N)];
    double r = std::abs(direct_form(m, f) - brute) / std::abs(brute);
    s.add("direct-vs-brute-force", r <= 1e-12, "relative " + fmt(r));
  }
  auto f = configured_signals(cfg);
  auto W = std::make_shared<WhitneySymbol>(d.tiles, cfg.beta);
  EtaKernel eta(cfg.gc.K);
  auto ts = tile_sum(d.tiles, f, eta, W.get());
  double reg = form_residual(ts.value, ts.regrouped, f);
  s.add("tile-regrouping", reg <= 1e-10, "relative " + fmt(reg));
  cplx dw = direct_form(MultiplierSpec::whitney_synthetic(W), f);
  double rec = form_residual(ts.regrouped, dw, f);
  s.add("tile-sum-vs-whitney-multiplier", rec <= 1e-6, "relative " + fmt(rec));
  {
    std::vector<Signal> g;
    for (int i = 0; i < 3; ++i) g.push_back(band_limited_signal(256, 8, cfg.seed + 20 + i));
    cplx spec = cplx(0, -M_PI) * direct_form(MultiplierSpec::sgn_beta(cfg.beta), g);
    cplx q = bht_quadrature(g, cfg.beta, cfg.quad_eps, 0.5);
    double r = std::abs(q - spec) / std::abs(spec);
    s.add("bht-vs-spectral", r <= 1e-4, "relative " + fmt(r));
  }
  return s.out;
}

}  // namespace

std::vector<Verdict> verify_suite(const std::string& suite, const RunConfig& cfg,
                                  const std::optional<Decomposition>& input) {
  static const std::vector<std::string> all{"geometry", "tiles", "signals", "selection", "projections", "forms"};
  if (suite != "all" && std::find(all.begin(), all.end(), suite) == all.end())
    throw ConfigError("suite", "unknown suite '" + suite + "'");
  std::optional<Decomposition> d = input;
  auto decomposition = [&]() -> const Decomposition& {
    if (!d) d = configured_decomposition(cfg);
    return *d;
  };
  std::vector<Verdict> out;
  for (const auto& name : all) {
    if (suite != "all" && suite != name) continue;
    std::vector<Verdict> v;
    if (name == "geometry") v = verify_geometry_suite(decomposition());
    else if (name == "tiles") v = verify_tiles_suite(decomposition());
    else if (name == "signals") v = verify_signals_suite(cfg);
    else if (name == "selection") v = verify_selection_suite(cfg, decomposition());
    else if (name == "projections") v = verify_projections_suite(cfg, decomposition());
    else if (name == "forms") v = verify_forms_suite(cfg, decomposition());
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

// ---------------------------------------------------------------- commands

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
  const RunConfig& cfg;
  const CommandOptions& opt;
  std::ostream& out;
  json stages = json::array();
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& text) {
    write_file(opt.out / name, text);
    files.push_back(name);
  }
  template <class F>
  auto stage(const std::string& name, F&& body) {
    auto t0 = Clock::now();
    auto finish = [&] {
      json s{{"stage", name}};
      if (cfg.record_timings) s["ms"] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      stages.push_back(s);
    };
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      finish();
    } else {
      auto r = body();
      finish();
      return r;
    }
  }
};

json cube_summary(const Decomposition& d) {
  std::map<int, int> per_scale;
  for (const auto& q : d.tiles.cubes()) ++per_scale[q.jq];
  json s = json::object();
  for (auto [jq, n] : per_scale) s[std::to_string(jq)] = n;
  return s;
}

int cmd_decompose(Context& c) {
  auto d = c.stage("decompose", [&] { return configured_decomposition(c.cfg); });
  auto rep = c.stage("verify_geometry", [&] {
    return verify_geometry(d.tiles.cubes(), d.sparse.families, d.tiles.gc(), 50);
  });
  json g;
  g["v"] = d.v.v();
  g["beta"] = c.cfg.beta;
  g["band"] = c.cfg.band;
  g["constants"] = constants_json(d.tiles.gc());
  g["cubes_per_scale"] = cube_summary(d);
  g["cubes"] = cubes_json(d.tiles.cubes());
  g["families"] = families_json(d.sparse);
  g["residue_modulus"] = d.sparse.residue_modulus;
  g["overflow_families"] = d.sparse.overflow_families;
  json violations = json::array();
  for (const auto& v : rep.violations) violations.push_back({{"kind", v.kind}, {"detail", v.detail}});
  g["report"] = {{"pair_checks", rep.pair_checks},
                 {"lemma_hits", rep.lemma_hits},
                 {"enlarged_endpoints", rep.enlarged_endpoints},
                 {"max_enlargement", rep.max_enlargement},
                 {"violations", violations}};
  c.write("geometry.json", dump(g));
  c.write("tiles.json", tileset_json(d));
  c.out << "cubes " << d.tiles.cubes().size() << ", families " << d.sparse.families.size() << ", tiles "
        << d.tiles.size() << "\n";
  if (!rep.ok()) {
    std::ostringstream os;
    os << "geometry predicate failed: " << rep.violations.front().kind << " " << rep.violations.front().detail;
    throw StructuralError(os.str());
  }
  return kExitOk;
}

struct SelectionRun {
  Decomposition d;
  std::vector<Signal> f;
  std::vector<FamilySelection> sel;
};

SelectionRun run_selection(Context& c) {
  SelectionRun r;
  r.d = c.stage("decompose", [&] { return configured_decomposition(c.cfg); });
  r.f = configured_signals(c.cfg);
  SelectionConfig sc{c.cfg.D, c.cfg.tol_zero};
  r.sel = c.stage("select", [&] { return select_families(r.d, r.f, sc, c.cfg.threads); });
  return r;
}

int cmd_select(Context& c) {
  auto r = run_selection(c);
  const auto& v = r.d.v;
  std::vector<double> norm2(v.n());
  for (int i = 0; i < v.n(); ++i) norm2[i] = std::pow(l2_norm(r.f[v.perm()[i]]), 2);
  std::ostringstream csv, jl;
  csv << "phase,i,sign,m,order,xi_scalar,I_top_left,I_top_len,tiles,tree_size,cum_width,bessel_stat\n";
  long long trees = 0;
  double bessel = 0;
  const int K = r.d.tiles.gc().K;
  for (const auto& fs : r.sel) {
    std::map<std::tuple<int, int, int>, double> width;
    for (const auto& st : fs.partition.trees) {
      DInterval top = st.tree.top.interval(K);
      double len = top.length().to_double();
      double& w = width[{st.i, st.sign, st.m}];
      w += len;
      double stat = norm2[st.i] > 0 ? std::ldexp(w, st.m) / norm2[st.i] : 0;
      csv << fs.family << ',' << st.i << ',' << st.sign << ',' << st.m << ',' << st.order << ','
          << fmt(st.tree.s.to_double()) << ',' << fmt(top.lo.to_double()) << ',' << fmt(len) << ','
          << st.tree.tiles.size() << ',' << fmt(st.size) << ',' << fmt(w) << ',' << fmt(stat) << '\n';
      json rec{{"family", fs.family}, {"order", st.order}, {"i", st.i}, {"sign", st.sign}, {"m", st.m},
               {"xi_scalar", st.tree.s.str()}, {"I_top", {top.lo.str(), top.hi.str()}},
               {"tile_count", st.tree.tiles.size()}, {"size", st.size}};
      jl << rec.dump() << '\n';
      ++trees;
    }
    bessel = std::max(bessel, fs.partition.bessel_max);
  }
  c.write("selection.csv", csv.str());
  c.write("selection.jsonl", jl.str());
  c.out << "families " << r.sel.size() << ", trees " << trees << ", bessel max " << fmt(bessel) << "\n";
  return kExitOk;
}

int cmd_project(Context& c) {
  auto r = run_selection(c);
  const auto& v = r.d.v;
  EtaKernel eta(c.cfg.gc.K);
  // multi-scale trees first, then the rest, in selection order
  std::vector<std::pair<int, const SelectedTree*>> picked;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& fs : r.sel) {
      if (static_cast<int>(picked.size()) >= c.cfg.max_project_trees) break;
      TileSet ts = family_tiles(r.d.tiles.cubes(), r.d.sparse.families[fs.family], v, r.d.tiles.gc());
      for (const auto& st : fs.partition.trees) {
        if (static_cast<int>(picked.size()) >= c.cfg.max_project_trees) break;
        std::set<int> scales;
        for (int t : st.tree.tiles) scales.insert(ts[t].span.jq);
        if ((pass == 0) == (scales.size() > 1)) picked.push_back({fs.family, &st});
      }
    }
  std::ostringstream csv;
  csv << "tree_id,i,case,j,c_l,c_r,moment_residual,fire2_residual\n";
  double fire2 = 0, moment = 0;
  c.stage("project", [&] {
    for (size_t id = 0; id < picked.size(); ++id) {
      const auto& [family, st] = picked[id];
      TileSet ts = family_tiles(r.d.tiles.cubes(), r.d.sparse.families[family], v, r.d.tiles.gc());
      auto classes = split_by_lacunarity(ts, st->tree);
      for (int i = 0; i < v.n(); ++i) {
        Tree lac{{}, st->tree.s, st->tree.top}, non{{}, st->tree.s, st->tree.top};
        for (const auto& [mask, Tc] : classes) {
          auto& dst = (mask >> i & 1) ? lac : non;
          dst.tiles.insert(dst.tiles.end(), Tc.tiles.begin(), Tc.tiles.end());
        }
        std::sort(lac.tiles.begin(), lac.tiles.end());
        std::sort(non.tiles.begin(), non.tiles.end());
        const Signal& fi = r.f[v.perm()[i]];
        if (!lac.tiles.empty()) {
          auto A = compute_anatomy(ts, lac);
          auto p = project_lacunary(fi, ts, lac, A, i, eta);
          for (const auto& b : p.blocks)
            csv << id << ',' << i << ",lacunary," << b.j << ",,,," << fmt(b.fire2_residual) << '\n';
          fire2 = std::max(fire2, p.max_fire2());
        }
        if (!non.tiles.empty()) {
          auto A = compute_anatomy(ts, non);
          auto p = project_nonlacunary(fi, ts, non, A, i);
          if (p.corrections.empty()) csv << id << ',' << i << ",nonlacunary,,,,,\n";
          for (const auto& k : p.corrections)
            csv << id << ',' << i << ",nonlacunary," << k.j << ',' << (k.left ? fmt(k.c) : "") << ','
                << (k.left ? "" : fmt(k.c)) << ',' << fmt(k.moment_residual) << ",\n";
          moment = std::max(moment, p.max_moment());
        }
      }
    }
  });
  c.write("projections.csv", csv.str());
  c.out << "trees " << picked.size() << ", max fire2 residual " << fmt(fire2) << ", max moment residual "
        << fmt(moment) << "\n";
  return kExitOk;
}

int cmd_evaluate(Context& c) {
  auto d = c.stage("decompose", [&] { return configured_decomposition(c.cfg); });
  auto f = configured_signals(c.cfg);
  json e;
  e["beta"] = c.cfg.beta;
  e["p"] = c.cfg.p;
  auto cj = [](cplx z) { return json::array({z.real(), z.imag()}); };
  cplx direct = c.stage("direct", [&] { return direct_form(MultiplierSpec::sgn_beta(c.cfg.beta), f); });
  cplx h = hilbert_constant(c.cfg.quad_eps);
  cplx bht = c.stage("bht", [&] { return bht_quadrature(f, c.cfg.beta, c.cfg.quad_eps, 0.5); });
  auto W = std::make_shared<WhitneySymbol>(d.tiles, c.cfg.beta);
  EtaKernel eta(c.cfg.gc.K);
  auto ts = c.stage("tile_sum", [&] { return tile_sum(d.tiles, f, eta, W.get()); });
  cplx dw = c.stage("whitney_direct", [&] { return direct_form(MultiplierSpec::whitney_synthetic(W), f); });
  auto rep = evaluation_report(direct, f, c.cfg.p);
  e["lambda_sgn"] = cj(direct);
  e["hilbert_constant"] = cj(h);
  e["lambda_bht"] = cj(bht);
  e["bht_relative_error"] = form_residual(bht, h * direct, f);
  e["lambda_tiles"] = cj(ts.value);
  e["lambda_regrouped"] = cj(ts.regrouped);
  e["lambda_whitney_direct"] = cj(dw);
  e["regrouping_residual"] = form_residual(ts.value, ts.regrouped, f);
  e["reconstruction_residual"] = form_residual(ts.regrouped, dw, f);
  e["active_cubes"] = ts.active_cubes;
  e["norms"] = rep.norms;
  e["norm_prod"] = rep.norm_prod;
  e["ratio"] = rep.ratio;
  // per-cube contributions of the multi-tile sum
  std::map<int, cplx> per_cube;
  for (int t = 0; t < d.tiles.size(); ++t)
    if (ts.per_tile[t] != cplx(0)) per_cube[d.tiles[t].cube] += ts.per_tile[t];
  json pc = json::array();
  for (auto [cube, z] : per_cube) pc.push_back({cube, z.real(), z.imag()});
  e["per_cube"] = pc;
  c.write("evaluation.json", dump(e));
  c.out << "lambda " << fmt(direct) << ", ratio " << fmt(rep.ratio) << ", tiles vs whitney "
        << fmt(e["reconstruction_residual"].get<double>()) << "\n";
  return kExitOk;
}

int cmd_sweep(Context& c) {
  if (!c.cfg.has_sweep) throw ConfigError("sweep", "section missing");
  SweepConfig sc;
  sc.M1 = c.cfg.M1;
  sc.N = c.cfg.N;
  sc.band = c.cfg.sweep_band;
  sc.kmax = c.cfg.kmax;
  sc.modes = c.cfg.modes;
  sc.seed = c.cfg.seed;
  sc.p = c.cfg.p;
  sc.gc = c.cfg.gc;
  sc.D = c.cfg.D;
  sc.tol_zero = c.cfg.tol_zero;
  sc.record_runtime = c.cfg.record_runtime;
  sc.threads = c.cfg.threads;
  auto rows = c.stage("sweep", [&] { return uniformity_sweep(sc); });
  auto contrast = c.stage("contrast", [&] { return contrast_diagnostic(c.cfg.M1, c.cfg.contrast_p, c.cfg.N); });
  c.write("sweep.csv", sweep_csv(rows));
  c.write("contrast.csv", contrast_csv(contrast));
  double base = rows.front().ratio, mx = 0;
  for (const auto& r : rows) mx = std::max(mx, r.ratio);
  double cb = contrast.front().ratio, cm = 0;
  for (const auto& r : contrast) cm = std::max(cm, r.ratio);
  c.out << "points " << rows.size() << ", max ratio / baseline " << fmt(base > 0 ? mx / base : 0)
        << ", contrast growth " << fmt(cb > 0 ? cm / cb : 0) << "\n";
  return kExitOk;
}

int cmd_verify(Context& c) {
  std::optional<Decomposition> input;
  if (c.opt.input) {
    std::ifstream in(*c.opt.input, std::ios::binary);
    if (!in) throw ConfigError("input", "cannot open " + c.opt.input->string());
    std::stringstream ss;
    ss << in.rdbuf();
    input = tileset_from_json(ss.str());
  }
  auto verdicts = c.stage("verify", [&] { return verify_suite(c.opt.suite, c.cfg, input); });
  json j = json::array();
  bool ok = true;
  for (const auto& v : verdicts) {
    j.push_back({{"suite", v.suite}, {"invariant", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    ok = ok && v.pass;
    c.out << (v.pass ? "PASS " : "FAIL ") << v.suite << "/" << v.name << ": " << v.detail << "\n";
  }
  c.write("verify.json", dump({{"suite", c.opt.suite}, {"pass", ok}, {"invariants", j}}));
  return ok ? kExitOk : kExitVerify;
}

std::string config_hash(const std::string& text) {
  boost::crc_32_type crc;
  crc.process_bytes(text.data(), text.size());
  std::ostringstream os;
  os << std::hex << std::setw(8) << std::setfill('0') << crc.checksum();
  return os.str();
}

void write_manifest(Context& c, int code, const std::string& error) {
  json m;
  m["command"] = c.opt.command;
  m["exit_code"] = code;
  if (!error.empty()) m["error"] = error;
  m["config_crc32"] = config_hash(c.cfg.text);
  m["seed"] = c.cfg.seed;
  m["threads"] = c.cfg.threads;
  m["versions"] = {{"tfa", "1.0.0"}, {"fftw", std::string(fftw_version)}, {"compiler", std::string(__VERSION__)}};
  m["stages"] = c.stages;
  m["outputs"] = c.files;
  write_file(c.opt.out / "run_manifest.json", dump(m));
}

}  // namespace

int run_command(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out, std::ostream& err) {
  Context c{cfg, opt, out, json::array(), {}};
  int code = kExitOk;
  std::string message;
  try {
    std::filesystem::create_directories(opt.out);
    if (opt.command == "decompose") code = cmd_decompose(c);
    else if (opt.command == "select") code = cmd_select(c);
    else if (opt.command == "project") code = cmd_project(c);
    else if (opt.command == "evaluate") code = cmd_evaluate(c);
    else if (opt.command == "sweep") code = cmd_sweep(c);
    else if (opt.command == "verify") code = cmd_verify(c);
    else throw ConfigError("command", "unknown command '" + opt.command + "'");
  } catch (const ConfigError& e) {
    code = kExitConfig;
    message = e.what();
  } catch (const StructuralError& e) {
    code = kExitStructural;
    message = e.what();
  } catch (const std::exception& e) {
    code = kExitStructural;
    message = std::string("internal failure: ") + e.what();
  }
  if (!message.empty()) err << "error: " << message << "\n";
  try {
    if (std::filesystem::is_directory(opt.out)) write_manifest(c, code, message);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return code;
}

}  // namespace tfa
