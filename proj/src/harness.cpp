#include "varhardy/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "varhardy/atoms.hpp"
#include "varhardy/calderon_lp.hpp"
#include "varhardy/exponent.hpp"
#include "varhardy/hardy.hpp"
#include "varhardy/lebesgue.hpp"
#include "varhardy/maximal.hpp"
#include "varhardy/muckenhoupt.hpp"
#include "varhardy/wavelet.hpp"
#include "varhardy/weight.hpp"

namespace varhardy {

namespace {

// Lattice budget at level m + 1; keeps a suite inside a few minutes.
constexpr Index kMaxPoints = Index{1} << 22;

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"suite", "norm", "maximal", "awconst", "atoms", "lp", "wavelet"};
  return c;
}

}  // namespace

std::vector<std::string> suite_ids() { return {"E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8", "E9"}; }

std::string describe(const std::string& id) {
  static const std::map<std::string, std::string> text{
      {"E1", "norm sanity: Luxemburg solvers, unit-sphere modular, modular sandwich, Hoelder"},
      {"E2", "maximal operators: covering by shifted grids, boundedness probes"},
      {"E3", "weights: local Muckenhoupt constants, monotonicity in p, reverse Hoelder"},
      {"E4", "grand maximal function: delta profile, Dirac membership, Hardy versus Lebesgue"},
      {"E5", "Calderon-Zygmund splitting and Whitney geometry"},
      {"E6", "atomic decomposition round trip and norm equivalence"},
      {"E7", "Littlewood-Paley telescoping and norm equivalence"},
      {"E8", "wavelet transform: Parseval, reconstruction, norm equivalence"},
      {"E9", "restricted dyadic maximal operators, averaging operators, the tilde-A constant"},
      {"norm", "Luxemburg and Hardy norms of the bump family"},
      {"maximal", "same as E2"},
      {"awconst", "same as E3"},
      {"atoms", "same as E6"},
      {"lp", "same as E7"},
      {"wavelet", "same as E8"},
  };
  const auto it = text.find(id);
  return it == text.end() ? std::string() : it->second;
}

void validate(const ExperimentConfig& cfg) {
  if (std::find(commands().begin(), commands().end(), cfg.command) == commands().end())
    throw std::invalid_argument("unknown command '" + cfg.command + "'");
  if (cfg.command == "suite") {
    const auto ids = suite_ids();
    if (std::find(ids.begin(), ids.end(), cfg.suite) == ids.end())
      throw std::invalid_argument("unknown suite '" + cfg.suite + "' (expected E1..E9)");
  }
  if (cfg.dim != 1 && cfg.dim != 2) throw std::invalid_argument("n must be 1 or 2");
  if (cfg.level < 5 || cfg.level > 12) throw std::invalid_argument("m must lie in [5, 12]");
  if (cfg.family_size < 1) throw std::invalid_argument("family_size must be positive");
  if (!(cfg.stability > 1.0)) throw std::invalid_argument("stability threshold must exceed 1");
  if (!(cfg.band >= 1.0)) throw std::invalid_argument("band must be >= 1");
  const Domain d(cfg.dim, cfg.half_width, cfg.level);  // validates T
  const Index fine = cfg.dim == 1 ? 2 * d.per_axis() : 4 * d.size();
  if (fine > kMaxPoints)
    throw std::invalid_argument("lattice too large at level m + 1 (" + std::to_string(fine) + " points); reduce T or m");
  // Resolve presets on the coarse lattice; PresetError names the key.
  exponent_preset(cfg.exponent)(d);
  weight_preset(cfg.weight)(d);
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config file '" + path + "' must hold an object");
  static const std::vector<std::string> known{"command", "suite", "n", "T", "m", "p", "w", "seed", "out",
                                              "family_size", "stability", "band"};
  for (const auto& [key, value] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config file '" + path + "': unknown key '" + key + "'");
  try {
    if (doc.contains("command")) base.command = doc["command"].get<std::string>();
    if (doc.contains("suite")) base.suite = doc["suite"].get<std::string>();
    if (doc.contains("n")) base.dim = doc["n"].get<int>();
    if (doc.contains("T")) base.half_width = doc["T"].get<double>();
    if (doc.contains("m")) base.level = doc["m"].get<int>();
    if (doc.contains("p")) base.exponent = doc["p"].get<std::string>();
    if (doc.contains("w")) base.weight = doc["w"].get<std::string>();
    if (doc.contains("seed")) base.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("out")) base.out = doc["out"].get<std::string>();
    if (doc.contains("family_size")) base.family_size = doc["family_size"].get<int>();
    if (doc.contains("stability")) base.stability = doc["stability"].get<double>();
    if (doc.contains("band")) base.band = doc["band"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config file '" + path + "': " + e.what());
  }
  return base;
}

// ---------------------------------------------------------------------------
// Test families

std::vector<std::string> family_kinds() { return {"bump", "haar", "plateau", "spike", "delta"}; }

namespace {

double smooth_cutoff(double t) { return t < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0; }

// Nearest lattice index to coordinate x along one axis.
Index nearest(const Domain& d, double x) {
  return std::clamp<Index>(static_cast<Index>(std::llround((x + d.half_width()) / d.step())), 0, d.per_axis() - 1);
}

}  // namespace

std::vector<TestFunction> test_family(const std::string& kind, int dim, double half_width, int count,
                                      std::uint64_t seed) {
  const auto kinds = family_kinds();
  const auto pos = std::find(kinds.begin(), kinds.end(), kind);
  if (pos == kinds.end()) throw PresetError("function family '" + kind + "' is unknown");
  std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(pos - kinds.begin()));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double reach = half_width / 4.0;  // centres stay in the middle half
  auto centre = [&] {
    Point c(reach * (2.0 * unit(rng) - 1.0), 0.0);
    if (dim > 1) c[1] = reach * (2.0 * unit(rng) - 1.0);
    return c;
  };
  std::vector<TestFunction> out;
  for (int i = 0; i < count; ++i) {
    std::ostringstream label;
    label << kind << i;
    if (kind == "bump") {
      const Point c = centre();
      const double r = std::min(reach, 0.1 + 1.4 * unit(rng));
      const double amp = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.5 + 1.5 * unit(rng));
      out.push_back({label.str(), [=](const Domain& d) {
                       return GridFunction::sample(d, [&](const Point& x) {
                         return amp * smooth_cutoff((x - c).squaredNorm() / (r * r));
                       });
                     }});
    } else if (kind == "haar") {
      const int k = static_cast<int>(unit(rng) * 6.0) - 1;  // side 2^-k, k in -1..4
      const double side = std::ldexp(1.0, -k);
      const auto slots = static_cast<Index>(std::max(1.0, reach / side));
      auto slot = [&] { return side * static_cast<double>(static_cast<Index>(unit(rng) * 2 * slots) - slots); };
      const double a0 = slot();
      const double a1 = dim > 1 ? slot() : 0.0;
      out.push_back({label.str(), [=](const Domain& d) {
                       return GridFunction::sample(d, [&](const Point& x) {
                         if (x[0] < a0 || x[0] >= a0 + side) return 0.0;
                         if (dim > 1 && (x[1] < a1 || x[1] >= a1 + side)) return 0.0;
                         return x[0] < a0 + side / 2 ? 1.0 : -1.0;
                       });
                     }});
    } else if (kind == "plateau") {
      const Point c = centre();
      const double r = std::min(reach, 0.25 + 1.25 * unit(rng));
      const double b0 = 2.0 * unit(rng) - 1.0, b1 = 2.0 * unit(rng) - 1.0, b2 = 2.0 * unit(rng) - 1.0;
      out.push_back({label.str(), [=](const Domain& d) {
                       return GridFunction::sample(d, [&](const Point& x) {
                         const Point y = (x - c) / r;
                         return y.squaredNorm() < 1.0 ? 1.0 + b0 * y[0] + b1 * y[1] + b2 * y.squaredNorm() : 0.0;
                       });
                     }});
    } else if (kind == "spike") {
      // Square integrable: exponent a < n / 2, singularity clamped at h / 2.
      const Point c = centre();
      const double r = std::min(reach, 0.3 + 0.7 * unit(rng));
      const double a = dim * (0.1 + 0.3 * unit(rng));
      out.push_back({label.str(), [=](const Domain& d) {
                       return GridFunction::sample(d, [&](const Point& x) {
                         const double t = (x - c).norm();
                         return std::pow(std::max(t, 0.5 * d.step()), -a) * smooth_cutoff(t * t / (r * r));
                       });
                     }});
    } else {
      // Unit-mass discrete delta at a point of the 2^-4 grid.
      Point c = centre();
      c = (c * 16.0).array().round() / 16.0;
      out.push_back({label.str(), [=](const Domain& d) {
                       GridFunction g = GridFunction::zeros(d);
                       g[d.flat(nearest(d, c[0]), d.dim() > 1 ? nearest(d, c[1]) : 0)] = 1.0 / d.cell_volume();
                       return g;
                     }});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Suite machinery

namespace {

using Quantities = std::vector<std::pair<std::string, double>>;

struct Pair {
  double m = 0.0;
  double m1 = 0.0;
  double ratio = 1.0;
};
using Pairs = std::map<std::string, Pair>;

struct Check {
  std::string quantity;
  std::function<bool(const Pair&, const Pairs&)> pass;
  std::string note;
};

struct Case {
  std::string name;
  std::function<Quantities(const Domain&)> eval;
  std::vector<Check> checks;
};

bool finite(const Pair& v) { return std::isfinite(v.m) && std::isfinite(v.m1); }

Check at_most(const std::string& q, double bound) {
  std::ostringstream note;
  note << "<= " << bound;
  return {q, [=](const Pair& v, const Pairs&) { return finite(v) && v.m <= bound && v.m1 <= bound; }, note.str()};
}

Check at_least(const std::string& q, double bound) {
  std::ostringstream note;
  note << ">= " << bound;
  return {q, [=](const Pair& v, const Pairs&) { return finite(v) && v.m >= bound && v.m1 >= bound; }, note.str()};
}

// Growth between resolutions bounded by `threshold`.
Check stable(const std::string& q, double threshold) {
  std::ostringstream note;
  note << "ratio <= " << threshold;
  return {q, [=](const Pair& v, const Pairs&) { return finite(v) && std::isfinite(v.ratio) && v.ratio <= threshold; },
          note.str()};
}

// Two-sided: the value neither grows nor collapses between resolutions.
Check steady(const std::string& q, double threshold) {
  std::ostringstream note;
  note << "ratio in [1/" << threshold << ", " << threshold << "]";
  return {q,
          [=](const Pair& v, const Pairs&) {
            return finite(v) && std::isfinite(v.ratio) && v.ratio <= threshold && v.ratio * threshold >= 1.0;
          },
          note.str()};
}

struct Context {
  ExperimentConfig cfg;
  ExponentFactory p;
  WeightFactory w;

  std::vector<TestFunction> family(const std::string& kind, int count = -1) const {
    return test_family(kind, cfg.dim, cfg.half_width, count < 0 ? cfg.family_size : count, cfg.seed);
  }
  std::vector<GridFunction> sampled(const std::vector<TestFunction>& fs, const Domain& d) const {
    std::vector<GridFunction> out;
    out.reserve(fs.size());
    for (const auto& f : fs) out.push_back(f.sample(d));
    return out;
  }
  double large_radius() const { return std::min(kLargeRadius, 0.75 * cfg.half_width); }
  // N = 2 + floor(n (q_w / min(1, p_-) - 1)) with q_w = 1.
  TestDictionary dictionary(const Domain& d, const VariableExponent& pe) const {
    return build_dictionary(d, capital_n(d.dim(), 1.0, pe.p_minus()), DictionaryVariant::large, 12, 42,
                            large_radius());
  }
};

double spread(double lo, double hi) { return lo > 0.0 ? hi / lo : INFINITY; }

VariableExponent shifted_exponent(const VariableExponent& p, double delta) {
  GridFunction v = p.values();
  v.values() += delta;
  std::optional<double> inf = p.p_infty();
  if (inf) *inf += delta;
  return VariableExponent(v, inf);
}

// Least-squares slope of log g against log |x| along the positive first axis.
double ray_slope(const GridFunction& g, double lo, double hi) {
  const Domain& d = g.domain();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (Index i = d.half_count(); i < d.per_axis(); ++i) {
    const double r = d.coord(i);
    if (r < lo || r > hi) continue;
    const double lx = std::log(r), ly = std::log(g[d.flat(i, d.dim() > 1 ? d.half_count() : 0)]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count < 2) return NAN;
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

int lp_moment_order(int dim, const VariableExponent& p) {
  return std::max(0, required_wavelet_moment_order(dim, 1.0, p.p_minus()));
}

// --- E1 -------------------------------------------------------------------

std::vector<Case> suite_e1(const Context& ctx) {
  std::vector<Case> cases;
  cases.push_back({"luxemburg_solvers",
                   [&ctx](const Domain& d) {
                     const VariableExponent p = ctx.p(d);
                     const Weight w = ctx.w(d);
                     double worst = 0.0;
                     for (const std::string kind : {"bump", "haar", "spike"})
                       for (const GridFunction& f : ctx.sampled(ctx.family(kind), d)) {
                         ModularEquation eq;
                         for (Index i = 0; i < d.size(); ++i) eq.add(f[i], p[i], w[i] * d.cell_volume());
                         const double b = eq.solve_bisection(), n = eq.solve_newton();
                         const double lux = luxemburg_norm(f, p, w);
                         worst = std::max({worst, std::abs(b - n) / n, std::abs(lux - n) / n});
                       }
                     return Quantities{{"max_relative_gap", worst}};
                   },
                   {at_most("max_relative_gap", 1e-6)}});
  cases.push_back({"unit_sphere_modular",
                   [&ctx](const Domain& d) {
                     const VariableExponent p = ctx.p(d);
                     const Weight w = ctx.w(d);
                     double worst = 0.0;
                     int failures = 0;
                     for (const std::string kind : {"bump", "haar", "plateau", "spike"})
                       for (const GridFunction& f : ctx.sampled(ctx.family(kind), d)) {
                         const double norm = luxemburg_norm(f, p, w);
                         worst = std::max(worst, std::abs(modular((1.0 / norm) * f, p, w) - 1.0));
                         for (double scale : {0.5, 1.0, 2.0})
                           failures += !unit_ball_modular_check((scale / norm) * f, p, w).pass;
                       }
                     return Quantities{{"max_modular_defect", worst}, {"sandwich_failures", double(failures)}};
                   },
                   {at_most("max_modular_defect", 1e-6), at_most("sandwich_failures", 0.0)}});
  cases.push_back({"holder",
                   [&ctx](const Domain& d) {
                     const VariableExponent p = ctx.p(d);
                     if (!(p.p_minus() > 1.0)) return Quantities{{"skipped_p_minus_le_1", 1.0}};
                     const auto fs = ctx.sampled(ctx.family("bump"), d);
                     const auto gs = ctx.sampled(ctx.family("haar"), d);
                     double worst = 0.0, rp = 0.0;
                     for (std::size_t i = 0; i < fs.size(); ++i) {
                       const Report r = holder_check(fs[i], gs[i], p);
                       if (r.get("rhs") > 0.0) worst = std::max(worst, r.get("lhs") / r.get("rhs"));
                       rp = r.get("r_p");
                     }
                     return Quantities{{"max_lhs_over_rhs", worst}, {"r_p", rp}};
                   },
                   {at_most("max_lhs_over_rhs", 1.0 + 1e-9), at_most("r_p", 2.0)}});
  cases.push_back({"norm_profile",
                   [&ctx](const Domain& d) {
                     const VariableExponent p = ctx.p(d);
                     const Weight w = ctx.w(d);
                     double lo = INFINITY, hi = 0.0;
                     for (const GridFunction& f : ctx.sampled(ctx.family("bump"), d)) {
                       const double n = luxemburg_norm(f, p, w);
                       lo = std::min(lo, n);
                       hi = std::max(hi, n);
                     }
                     return Quantities{{"min_norm", lo}, {"max_norm", hi}};
                   },
                   {steady("min_norm", ctx.cfg.stability), steady("max_norm", ctx.cfg.stability)}});
  return cases;
}

// --- E2 -------------------------------------------------------------------

std::vector<Case> suite_e2(const Context& ctx) {
  std::vector<Case> cases;
  cases.push_back({"covering",
                   [&ctx](const Domain& d) {
                     const double factor = std::pow(6.0, d.dim());
                     double worst = 0.0;
                     Index violations = 0;
                     for (const std::string kind : {"bump", "haar", "spike"})
                       for (const GridFunction& f : ctx.sampled(ctx.family(kind), d)) {
                         const GridFunction big = hl_maximal(f);
                         Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(d.size());
                         for (const Shift& a : all_shifts(d.dim())) sum += grid_maximal(f, a).values();
                         sum *= factor;
                         violations += (big.values() > sum * (1.0 + 1e-12)).count();
                         for (Index i = 0; i < d.size(); ++i)
                           if (sum[i] > 0.0) worst = std::max(worst, big[i] / sum[i]);
                       }
                     return Quantities{{"violations", double(violations)}, {"max_ratio", worst}};
                   },
                   {at_most("violations", 0.0), at_most("max_ratio", 1.0 + 1e-12)}});
  auto probe = [&ctx](const std::string& name, Operator op) {
    return Case{name,
                [&ctx, op](const Domain& d) {
                  std::vector<GridFunction> fam;
                  for (const std::string kind : {"bump", "haar", "spike"})
                    for (GridFunction& f : ctx.sampled(ctx.family(kind), d)) fam.push_back(std::move(f));
                  const Report r = boundedness_probe(op, ctx.p(d), ctx.w(d), fam);
                  return Quantities{{"operator_ratio", r.get("ratio")}};
                },
                {stable("operator_ratio", ctx.cfg.stability)}};
  };
  cases.push_back(probe("local_maximal", [](const GridFunction& f) { return local_maximal(f); }));
  cases.push_back(probe("hl_maximal", [](const GridFunction& f) { return hl_maximal(f); }));
  return cases;
}

// --- E3 -------------------------------------------------------------------

std::vector<Case> suite_e3(const Context& ctx) {
  std::vector<Case> cases;
  const double t = ctx.cfg.stability;
  cases.push_back({"a_loc_variable",
                   [&ctx](const Domain& d) {
                     const VariableExponent p = ctx.p(d);
                     if (!(p.p_minus() > 1.0)) return Quantities{{"skipped_p_minus_le_1", 1.0}};
                     const Weight w = ctx.w(d);
                     return Quantities{{"a_p", a_loc_var_constant(w, p).constant},
                                       {"a_p_plus_half", a_loc_var_constant(w, shifted_exponent(p, 0.5)).constant}};
                   },
                   {stable("a_p", t),
                    {"a_p_plus_half",
                     [t](const Pair& v, const Pairs& all) {
                       const Pair& base = all.at("a_p");
                       const bool p_stable = finite(base) && base.ratio <= t;
                       return !p_stable || (finite(v) && v.ratio <= t);
                     },
                     "stable whenever a_p is stable"}}});
  cases.push_back({"a_loc_infinity",
                   [&ctx](const Domain& d) {
                     return Quantities{{"a_infinity", a_loc_infty_constant(ctx.w(d)).constant}};
                   },
                   {stable("a_infinity", t)}});
  cases.push_back({"reverse_holder",
                   [&ctx](const Domain& d) {
                     const Weight w = ctx.w(d);
                     const Report r = reverse_holder_check(w);
                     return Quantities{{"a1", a1_loc_constant(w).constant},
                                       {"violations", r.get("violations")},
                                       {"worst_ratio", r.get("worst_ratio")}};
                   },
                   {{"violations",
                     [t](const Pair& v, const Pairs& all) {
                       const Pair& a1 = all.at("a1");
                       return !(finite(a1) && a1.ratio <= t) || (v.m == 0.0 && v.m1 == 0.0);
                     },
                     "zero when the A1 constant is stable"}}});
  return cases;
}

// --- E4 -------------------------------------------------------------------

std::vector<Case> suite_e4(const Context& ctx) {
  std::vector<Case> cases;
  cases.push_back({"dirac_profile",
                   [](const Domain& d) {
                     const TestDictionary dict = build_dictionary(d, 2, DictionaryVariant::small);
                     const GridFunction m0 = grand_maximal(discrete_delta(d), dict, GrandMode::m0);
                     return Quantities{{"slope_defect", std::abs(ray_slope(m0, 4 * d.step(), 0.25) + d.dim())}};
                   },
                   {at_most("slope_defect", 0.15)}});
  cases.push_back({"dirac_examples",
                   [](const Domain& d) {
                     const std::string n1 = std::to_string(d.dim() + 1);
                     const std::vector<std::pair<std::string, std::string>> members{
                         {"paper91", "const:1"}, {"const:2", "powexp:" + n1}, {"const:2", "ratpow:" + n1 + ",3"}};
                     double matching = 0.0;
                     for (const auto& [p, w] : members)
                       matching += dirac_membership_check(exponent_preset(p), weight_preset(w), d).pass;
                     matching += !dirac_membership_check(exponent_preset("const:2"), weight_preset("const:1"), d).pass;
                     return Quantities{{"matching", matching}};
                   },
                   {at_least("matching", 4.0)}});
  cases.push_back({"dirac_configured",
                   [&ctx](const Domain& d) {
                     const Report r = dirac_membership_check(ctx.p, ctx.w, d);
                     return Quantities{{"integral_ratio", r.get("ratio")}, {"member", double(r.pass)}};
                   },
                   {}});
  cases.push_back({"hardy_over_lebesgue",
                   [&ctx](const Domain& d) {
                     const VariableExponent p = ctx.p(d);
                     const Weight w = ctx.w(d);
                     const TestDictionary dict = ctx.dictionary(d, p);
                     double lo = INFINITY, hi = 0.0;
                     for (const GridFunction& f : ctx.sampled(ctx.family("bump"), d)) {
                       const double r = hardy_norm(f, p, w, dict) / luxemburg_norm(f, p, w);
                       lo = std::min(lo, r);
                       hi = std::max(hi, r);
                     }
                     return Quantities{{"ratio_min", lo}, {"ratio_max", hi}, {"spread", spread(lo, hi)}};
                   },
                   {steady("ratio_min", ctx.cfg.stability), steady("ratio_max", ctx.cfg.stability)}});
  return cases;
}

// --- E5 -------------------------------------------------------------------

std::vector<Case> suite_e5(const Context& ctx) {
  return {{"cz_whitney",
           [&ctx](const Domain& d) {
             const VariableExponent p = ctx.p(d);
             const TestDictionary dict = ctx.dictionary(d, p);
             double identity = 0.0, lower = INFINITY, upper = 0.0, overlap = 0.0, cubes = 0.0;
             for (const GridFunction& f : ctx.sampled(ctx.family("bump"), d)) {
               const GridFunction mf = grand_maximal(f, dict, GrandMode::mn);
               const double lambda = 0.25 * mf.max_abs();
               const CzDecomposition cz = cz_decompose_from_maximal(f, mf, lambda, 1);
               GridFunction sum = cz.good;
               std::vector<Cube> whitney;
               for (const BadPart& b : cz.bad) {
                 b.values.add_to(sum);
                 whitney.push_back(b.cube);
               }
               identity = std::max(identity, (sum - f).max_abs() / f.max_abs());
               GridFunction omega = GridFunction::zeros(d);
               omega.values() = (mf.values() > lambda).cast<double>();
               const Report g = whitney_geometry_check(omega, whitney);
               cubes += static_cast<double>(whitney.size());
               if (whitney.empty()) continue;
               lower = std::min(lower, g.get("lower_margin"));
               upper = std::max(upper, g.get("upper_margin"));
               overlap = std::max(overlap, g.get("max_overlap"));
             }
             return Quantities{{"identity_error", identity},
                               {"min_lower_margin", std::isfinite(lower) ? lower : 1.0},
                               {"max_upper_margin", upper},
                               {"max_overlap", overlap},
                               {"cube_count", cubes}};
           },
           {at_most("identity_error", 1e-10), at_least("min_lower_margin", 1.0 - 1e-12),
            at_most("max_upper_margin", 1.0 + 1e-12), stable("max_overlap", ctx.cfg.stability)}}};
}

// --- E6 -------------------------------------------------------------------

AtomicParams atomic_params(int dim, const VariableExponent& p) {
  AtomicParams prm;
  prm.v = p.p_minus() > 1.0 ? 1.0 : 0.9 * p.p_minus();
  // A finite size index just above max(q_w, p_+) keeps the single part
  // comparable to the norm; with q = inf it tracks sup |f| instead.
  prm.q = std::max(prm.q_w, p.p_plus()) + 0.25;
  prm.moment_order = std::max(0, static_cast<int>(std::floor(dim * (prm.q_w / prm.v - 1.0) + 1e-12)));
  return prm;
}

std::vector<Case> suite_e6(const Context& ctx) {
  return {{"atomic_round_trip",
           [&ctx](const Domain& d) {
             const VariableExponent p = ctx.p(d);
             const Weight w = ctx.w(d);
             const TestDictionary dict = ctx.dictionary(d, p);
             const AtomicParams prm = atomic_params(d.dim(), p);
             double err = 0.0, lo = INFINITY, hi = 0.0, invalid = 0.0, atoms = 0.0;
             for (const GridFunction& f : ctx.sampled(ctx.family("bump"), d)) {
               const AtomicDecomposition dec = atomic_decompose(f, p, w, dict, prm);
               err = std::max(err, luxemburg_norm(synthesize(dec, d) - f, p, w) / luxemburg_norm(f, p, w));
               for (const Atom& a : dec.atoms) invalid += !validate_atom(a, w, p).pass;
               if (dec.single_part) invalid += !validate_atom(dec.single_part->second, w, p).pass;
               atoms += static_cast<double>(dec.atoms.size());
               const double r = decomposition_norm(dec, p, w, prm.v) / hardy_norm(f, p, w, dict);
               lo = std::min(lo, r);
               hi = std::max(hi, r);
             }
             return Quantities{{"max_relative_error", err}, {"invalid_atoms", invalid}, {"atom_count", atoms},
                               {"ratio_min", lo}, {"ratio_max", hi}, {"spread", spread(lo, hi)}};
           },
           {at_most("max_relative_error", 0.05), at_most("invalid_atoms", 0.0), at_most("spread", ctx.cfg.band),
            steady("ratio_min", ctx.cfg.stability), steady("ratio_max", ctx.cfg.stability)}}};
}

// --- E7 -------------------------------------------------------------------

std::vector<Case> suite_e7(const Context& ctx) {
  std::vector<Case> cases;
  cases.push_back({"telescoping",
                   [&ctx](const Domain& d) {
                     const PhiPair pair = make_phi_pair(d.dim(), lp_moment_order(d.dim(), ctx.p(d)));
                     std::mt19937_64 rng(ctx.cfg.seed);
                     std::normal_distribution<double> g;
                     Eigen::ArrayXd v(d.size());
                     for (Index i = 0; i < d.size(); ++i) v[i] = g(rng);
                     const GridFunction noise(d, v);
                     double identity = 0.0;
                     for (int j = 0; j <= max_lp_level(d); ++j)
                       identity = std::max(identity, telescoping_reconstruct(noise, pair, j).identity_error);
                     double moll = 0.0;
                     for (const GridFunction& f : ctx.sampled(ctx.family("bump"), d))
                       moll = std::max(moll, telescoping_reconstruct(f, pair, d.level() - 3).relative_l2_error);
                     return Quantities{{"identity_error", identity}, {"mollification_error", moll}};
                   },
                   {at_most("identity_error", 1e-10), at_most("mollification_error", 0.01)}});
  cases.push_back({"lp_over_hardy",
                   [&ctx](const Domain& d) {
                     const VariableExponent p = ctx.p(d);
                     const Weight w = ctx.w(d);
                     const TestDictionary dict = ctx.dictionary(d, p);
                     const PhiPair pair = make_phi_pair(d.dim(), lp_moment_order(d.dim(), p));
                     double lo = INFINITY, hi = 0.0;
                     for (const GridFunction& f : ctx.sampled(ctx.family("bump"), d)) {
                       const double r = lp_norm(f, p, w, pair, d.level() - 3) / hardy_norm(f, p, w, dict);
                       lo = std::min(lo, r);
                       hi = std::max(hi, r);
                     }
                     return Quantities{{"ratio_min", lo}, {"ratio_max", hi}, {"spread", spread(lo, hi)}};
                   },
                   {at_most("spread", ctx.cfg.band), steady("ratio_min", ctx.cfg.stability),
                    steady("ratio_max", ctx.cfg.stability)}});
  return cases;
}

// --- E8 -------------------------------------------------------------------

WaveletSystem system_for(int dim, const VariableExponent& p) {
  return build_wavelet_system(std::clamp(required_wavelet_moment_order(dim, 1.0, p.p_minus()) + 2, 2, 10));
}

std::vector<Case> suite_e8(const Context& ctx) {
  return {{"wavelet",
           [&ctx](const Domain& d) {
             const VariableExponent p = ctx.p(d);
             const Weight w = ctx.w(d);
             const TestDictionary dict = ctx.dictionary(d, p);
             const WaveletSystem sys = system_for(d.dim(), p);
             const int fine = d.level() - 1;
             double parseval = 0.0, recon = 0.0, lo = INFINITY, hi = 0.0;
             for (const GridFunction& f : ctx.sampled(ctx.family("bump"), d)) {
               const WaveletCoefficients c = analyze(f, sys, 0, fine);
               const double energy = f.values().square().sum() * d.cell_volume();
               const double vw = (v_function(c, d).values().square().sum() + w_function(c, d).values().square().sum()) *
                                 d.cell_volume();
               parseval = std::max(parseval, std::abs(vw - energy));
               recon = std::max(recon, (synthesize(c, sys, d) - f).max_abs() / f.max_abs());
               const double r = wavelet_norm(f, p, w, sys, 0, fine) / hardy_norm(f, p, w, dict);
               lo = std::min(lo, r);
               hi = std::max(hi, r);
             }
             return Quantities{{"parseval_defect", parseval}, {"reconstruction_error", recon}, {"order", double(sys.order)},
                               {"ratio_min", lo}, {"ratio_max", hi}, {"spread", spread(lo, hi)}};
           },
           {at_most("parseval_defect", 1e-7), at_most("reconstruction_error", 1e-10), at_most("spread", ctx.cfg.band),
            steady("ratio_min", ctx.cfg.stability), steady("ratio_max", ctx.cfg.stability)}}};
}

// --- E9 -------------------------------------------------------------------

std::vector<Case> suite_e9(const Context& ctx) {
  std::vector<Case> cases;
  cases.push_back({"restricted_union",
                   [&ctx](const Domain& d) {
                     double gap = 0.0;
                     for (const std::string kind : {"bump", "haar", "spike"})
                       for (const GridFunction& f : ctx.sampled(ctx.family(kind), d)) {
                         const GridFunction full = grid_maximal(f, Shift{0, 0});
                         for (double r0 : {0.25, 1.0}) {
                           const Eigen::ArrayXd joined = restricted_dyadic_maximal(f, r0, ScaleMode::below)
                                                             .values()
                                                             .max(restricted_dyadic_maximal(f, r0, ScaleMode::above).values());
                           gap = std::max(gap, (joined - full.values()).abs().maxCoeff() / full.max_abs());
                         }
                       }
                     return Quantities{{"union_gap", gap}};
                   },
                   {at_most("union_gap", 1e-12)}});
  cases.push_back({"averaging",
                   [&ctx](const Domain& d) {
                     const VariableExponent p = ctx.p(d);
                     const Weight w = ctx.w(d);
                     double worst = 0.0;
                     Index violations = 0;
                     for (const std::string kind : {"bump", "haar", "spike"})
                       for (const GridFunction& f : ctx.sampled(ctx.family(kind), d)) {
                         const GridFunction md = grid_maximal(f, Shift{0, 0});
                         const double base = luxemburg_norm(f, p, w);
                         for (int k = 0; k <= 3; ++k) {
                           const GridFunction e = averaging_e_k(f, k);
                           violations += (e.values().abs() > md.values() * (1.0 + 1e-12) + 1e-300).count();
                           worst = std::max(worst, luxemburg_norm(e, p, w) / base);
                         }
                       }
                     return Quantities{{"dominance_violations", double(violations)}, {"max_norm_ratio", worst}};
                   },
                   {at_most("dominance_violations", 0.0), stable("max_norm_ratio", ctx.cfg.stability)}});
  cases.push_back({"tilde_a",
                   [&ctx](const Domain& d) {
                     return Quantities{{"tilde_a", tilde_a_constant(ctx.w(d), ctx.p(d)).constant}};
                   },
                   {stable("tilde_a", ctx.cfg.stability)}});
  return cases;
}

// --- norm command ---------------------------------------------------------

std::vector<Case> norm_cases(const Context& ctx) {
  std::vector<Case> cases;
  for (const TestFunction& tf : ctx.family("bump")) {
    cases.push_back({tf.label,
                     [&ctx, tf](const Domain& d) {
                       const VariableExponent p = ctx.p(d);
                       const Weight w = ctx.w(d);
                       const GridFunction f = tf.sample(d);
                       return Quantities{{"lebesgue_norm", luxemburg_norm(f, p, w)},
                                         {"hardy_norm", hardy_norm(f, p, w, ctx.dictionary(d, p))}};
                     },
                     {steady("lebesgue_norm", ctx.cfg.stability), steady("hardy_norm", ctx.cfg.stability)}});
  }
  return cases;
}

std::string suite_for(const ExperimentConfig& cfg) {
  static const std::map<std::string, std::string> alias{
      {"maximal", "E2"}, {"awconst", "E3"}, {"atoms", "E6"}, {"lp", "E7"}, {"wavelet", "E8"}, {"norm", "norm"}};
  if (cfg.command == "suite") return cfg.suite;
  return alias.at(cfg.command);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

double ratio_of(double a, double b) {
  if (a == 0.0 && b == 0.0) return 1.0;
  return b / a;
}

}  // namespace

SuiteReport run_suite(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const Context ctx{cfg, exponent_preset(cfg.exponent), weight_preset(cfg.weight)};
  const std::string id = suite_for(cfg);
  std::vector<Case> cases;
  if (id == "E1") cases = suite_e1(ctx);
  if (id == "E2") cases = suite_e2(ctx);
  if (id == "E3") cases = suite_e3(ctx);
  if (id == "E4") cases = suite_e4(ctx);
  if (id == "E5") cases = suite_e5(ctx);
  if (id == "E6") cases = suite_e6(ctx);
  if (id == "E7") cases = suite_e7(ctx);
  if (id == "E8") cases = suite_e8(ctx);
  if (id == "E9") cases = suite_e9(ctx);
  if (id == "norm") cases = norm_cases(ctx);

  SuiteReport rep;
  rep.suite = id;
  rep.config = cfg;
  const Domain coarse(cfg.dim, cfg.half_width, cfg.level);
  for (const Case& c : cases) {
    Quantities qm, qm1;
    try {
      qm = c.eval(coarse);
      qm1 = c.eval(coarse.refined());
    } catch (const std::exception& e) {
      rep.records.push_back({id, c.name, "error", NAN, NAN, NAN, false, e.what()});
      rep.pass = false;
      continue;
    }
    Pairs pairs;
    for (const auto& [name, value] : qm) {
      double other = NAN;
      for (const auto& [n1, v1] : qm1)
        if (n1 == name) other = v1;
      pairs[name] = {value, other, ratio_of(value, other)};
    }
    for (const auto& [name, value] : qm) {
      const Pair& v = pairs[name];
      CaseRecord row{id, c.name, name, v.m, v.m1, v.ratio, true, {}};
      bool checked = false;
      for (const Check& chk : c.checks) {
        if (chk.quantity != name) continue;
        checked = true;
        row.pass = row.pass && chk.pass(v, pairs);
        row.note += (row.note.empty() ? "" : "; ") + chk.note;
      }
      if (!checked) row.note = "informational";
      rep.pass = rep.pass && row.pass;
      rep.records.push_back(std::move(row));
    }
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.timestamp = utc_now();
  return rep;
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string report_json(const SuiteReport& report) {
  using nlohmann::ordered_json;
  const ExperimentConfig& c = report.config;
  ordered_json doc;
  doc["suite"] = report.suite;
  doc["command"] = c.command;
  doc["description"] = describe(c.command == "suite" ? report.suite : c.command);
  doc["pass"] = report.pass;
  doc["environment"] = {{"version", kVersion}, {"n", c.dim},        {"T", c.half_width},
                        {"m", c.level},        {"m1", c.level + 1}, {"h", std::ldexp(1.0, -c.level)},
                        {"seed", c.seed}};
  doc["config"] = {{"p", c.exponent},
                   {"w", c.weight},
                   {"family_size", c.family_size},
                   {"stability", c.stability},
                   {"band", c.band},
                   {"out", c.out}};
  ordered_json rows = ordered_json::array();
  for (const CaseRecord& r : report.records) {
    ordered_json row;
    row["case"] = r.name;
    row["quantity"] = r.quantity;
    row["value_m"] = number(r.value_m);
    row["value_m1"] = number(r.value_m1);
    row["ratio"] = number(r.ratio);
    row["pass"] = r.pass;
    row["note"] = r.note;
    rows.push_back(std::move(row));
  }
  doc["records"] = std::move(rows);
  doc["timestamp"] = {{"utc", report.timestamp}, {"wall_seconds", report.wall_seconds}};
  return doc.dump(2) + "\n";
}

std::string report_csv(const SuiteReport& report) {
  std::ostringstream os;
  os << "suite,case,quantity,value_m,value_m1,ratio,pass\n";
  os << std::setprecision(17);
  for (const CaseRecord& r : report.records)
    os << r.suite << ',' << r.name << ',' << r.quantity << ',' << r.value_m << ',' << r.value_m1 << ',' << r.ratio
       << ',' << (r.pass ? "true" : "false") << '\n';
  return os.str();
}

void write_report(const SuiteReport& report, const std::string& stem) {
  std::ofstream js(stem + ".json");
  if (!js) throw std::runtime_error("cannot write " + stem + ".json");
  js << report_json(report);
  std::ofstream csv(stem + ".csv");
  if (!csv) throw std::runtime_error("cannot write " + stem + ".csv");
  csv << report_csv(report);
}

std::string list_presets() {
  std::ostringstream os;
  os << "exponents:\n"
     << "  const:<v>        constant exponent v > 0\n"
     << "  paper91          max(1/2, min(1, |x|)), p_inf = 1\n"
     << "  lhdecay:<a>      a + 1/log(e + |x|), p_inf = a\n"
     << "  sin2             2 + sin^2 |x|\n"
     << "weights:\n"
     << "  const:<c>        constant weight c > 0\n"
     << "  power:<μ>        (1 + |x|)^μ\n"
     << "  exp:<μ>          exp(μ x_1)\n"
     << "  absp:<alpha>     |x|^alpha, clamped at h/2\n"
     << "  ratpow:<a>,<b>   |x|^a / (1 + |x|^b), clamped at h/2\n"
     << "  powexp:<a>       |x|^a exp(|x|), clamped at h/2\n"
     << "functions:\n"
     << "  bump             smooth bumps, random centre and width\n"
     << "  haar             dyadic Haar oscillations\n"
     << "  plateau          quadratic polynomials on a ball\n"
     << "  spike            |x - c|^-a with a < n/2, clamped at h/2\n"
     << "  delta            unit-mass discrete deltas\n"
     << "suites:\n";
  for (const std::string& id : suite_ids()) os << "  " << id << "               " << describe(id) << "\n";
  return os.str();
}

}  // namespace varhardy
