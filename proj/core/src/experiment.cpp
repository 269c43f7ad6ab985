#include "levelstat/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "levelstat/parallel.hpp"
#include "levelstat/version.hpp"

namespace levelstat {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 9> kNames{{
    {ExperimentKind::kWegner, "wegner"},
    {ExperimentKind::kMinami, "minami"},
    {ExperimentKind::kNLevel, "n-level"},
    {ExperimentKind::kJointIntervals, "joint-intervals"},
    {ExperimentKind::kSpectralAveraging, "spectral-averaging"},
    {ExperimentKind::kProfileEvent, "profile-event"},
    {ExperimentKind::kTwoByTwo, "two-by-two"},
    {ExperimentKind::kMultiplicity, "multiplicity"},
    {ExperimentKind::kSimplicity, "simplicity"},
}};

bool is_estimator(ExperimentKind k) {
  return k != ExperimentKind::kTwoByTwo && k != ExperimentKind::kMultiplicity && k != ExperimentKind::kSimplicity;
}

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid configuration";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

std::string child(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string item(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

// Collects every field-level error instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& message) { errors.push_back(path + ": " + message); }

  void reject_unknown(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(child(path, key), "unknown field");
    }
  }

  const json* get(const json& obj, const std::string& path, const char* key, bool required) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) fail(child(path, key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  const json* object(const json& obj, const std::string& path, const char* key, bool required) {
    const json* v = get(obj, path, key, required);
    if (v && !v->is_object()) {
      fail(child(path, key), "expected an object");
      return nullptr;
    }
    return v;
  }

  std::optional<double> number(const json& v, const std::string& path) {
    if (!v.is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(path, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<double> number(const json& obj, const std::string& path, const char* key, bool required) {
    const json* v = get(obj, path, key, required);
    return v ? number(*v, child(path, key)) : std::nullopt;
  }

  std::optional<std::uint64_t> count(const json& v, const std::string& path) {
    if (!v.is_number_unsigned()) {
      fail(path, "expected a nonnegative integer");
      return std::nullopt;
    }
    return v.get<std::uint64_t>();
  }

  std::optional<std::uint64_t> count(const json& obj, const std::string& path, const char* key, bool required) {
    const json* v = get(obj, path, key, required);
    return v ? count(*v, child(path, key)) : std::nullopt;
  }

  std::optional<bool> boolean(const json& obj, const std::string& path, const char* key) {
    const json* v = get(obj, path, key, false);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      fail(child(path, key), "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::string> string(const json& obj, const std::string& path, const char* key, bool required) {
    const json* v = get(obj, path, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(child(path, key), "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) {
      fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto d = number(v[i], item(path, i));
      ok = ok && d.has_value();
      if (d) out.push_back(*d);
    }
    return ok ? std::optional(out) : std::nullopt;
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& path, const char* key,
                                             bool required) {
    const json* v = get(obj, path, key, required);
    return v ? numbers(*v, child(path, key)) : std::nullopt;
  }

  std::optional<std::vector<std::size_t>> sites(const json& v, const std::string& path, std::size_t n_sites,
                                                bool distinct) {
    if (!v.is_array()) {
      fail(path, "expected an array of site indices");
      return std::nullopt;
    }
    std::vector<std::size_t> out;
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto s = count(v[i], item(path, i));
      if (!s) {
        ok = false;
        continue;
      }
      if (n_sites > 0 && *s >= n_sites) {
        fail(item(path, i), "site " + std::to_string(*s) + " outside 0.." + std::to_string(n_sites - 1));
        ok = false;
      } else if (distinct && std::find(out.begin(), out.end(), *s) != out.end()) {
        fail(item(path, i), "duplicate site " + std::to_string(*s));
        ok = false;
      }
      out.push_back(static_cast<std::size_t>(*s));
    }
    return ok ? std::optional(out) : std::nullopt;
  }
};

std::optional<GraphSpec> parse_graph(Reader& r, const json& g, const std::string& path) {
  const auto type = r.string(g, path, "type", true);
  if (!type) return std::nullopt;
  try {
    if (*type == "chain") {
      r.reject_unknown(g, path, {"type", "n", "hopping", "periodic"});
      const auto n = r.count(g, path, "n", true);
      const double t = r.number(g, path, "hopping", false).value_or(1.0);
      const bool periodic = r.boolean(g, path, "periodic").value_or(false);
      if (!n) return std::nullopt;
      return GraphSpec::chain(static_cast<std::size_t>(*n), t, periodic);
    }
    if (*type == "torus") {
      r.reject_unknown(g, path, {"type", "nx", "ny", "hopping"});
      const auto nx = r.count(g, path, "nx", true);
      const auto ny = r.count(g, path, "ny", true);
      const double t = r.number(g, path, "hopping", false).value_or(1.0);
      if (!nx || !ny) return std::nullopt;
      return GraphSpec::torus(static_cast<std::size_t>(*nx), static_cast<std::size_t>(*ny), t);
    }
    if (*type == "edges") {
      r.reject_unknown(g, path, {"type", "n", "edges"});
      const auto n = r.count(g, path, "n", true);
      const json* list = r.get(g, path, "edges", true);
      if (!n || !list) return std::nullopt;
      if (!list->is_array()) {
        r.fail(child(path, "edges"), "expected an array");
        return std::nullopt;
      }
      std::vector<Edge> edges;
      const std::size_t errors_before = r.errors.size();
      for (std::size_t i = 0; i < list->size(); ++i) {
        const json& e = (*list)[i];
        const std::string p = item(child(path, "edges"), i);
        if (!e.is_object()) {
          r.fail(p, "expected an object");
          continue;
        }
        r.reject_unknown(e, p, {"from", "to", "weight"});
        const auto from = r.count(e, p, "from", true);
        const auto to = r.count(e, p, "to", true);
        Complex w{1.0, 0.0};
        if (const json* wv = r.get(e, p, "weight", false)) {
          if (wv->is_array()) {
            const auto parts = r.numbers(*wv, child(p, "weight"));
            if (parts && parts->size() == 2) {
              w = {(*parts)[0], (*parts)[1]};
            } else if (parts) {
              r.fail(child(p, "weight"), "expected a number or [re, im]");
            }
          } else if (const auto d = r.number(*wv, child(p, "weight"))) {
            w = {*d, 0.0};
          }
        }
        if (from && to) edges.push_back({static_cast<std::size_t>(*from), static_cast<std::size_t>(*to), w});
      }
      if (r.errors.size() != errors_before) return std::nullopt;
      return GraphSpec::from_edges(static_cast<std::size_t>(*n), std::move(edges));
    }
    r.fail(child(path, "type"), "unknown graph type '" + *type + "' (chain, torus, edges)");
  } catch (const InvalidInput& e) {
    r.fail(path, e.what());
  }
  return std::nullopt;
}

std::optional<PotentialDistribution> parse_distribution(Reader& r, const json& d, const std::string& path) {
  const auto type = r.string(d, path, "type", true);
  if (!type) return std::nullopt;
  try {
    if (*type == "uniform" || *type == "triangular") {
      r.reject_unknown(d, path, {"type", "lo", "hi"});
      const auto lo = r.number(d, path, "lo", true);
      const auto hi = r.number(d, path, "hi", true);
      if (!lo || !hi) return std::nullopt;
      return *type == "uniform" ? PotentialDistribution::uniform(*lo, *hi)
                                : PotentialDistribution::triangular(*lo, *hi);
    }
    if (*type == "piecewise") {
      r.reject_unknown(d, path, {"type", "edges", "densities"});
      auto edges = r.numbers(d, path, "edges", true);
      auto dens = r.numbers(d, path, "densities", true);
      if (!edges || !dens) return std::nullopt;
      return PotentialDistribution::piecewise_constant(std::move(*edges), std::move(*dens));
    }
    r.fail(child(path, "type"), "unknown distribution type '" + *type + "' (uniform, triangular, piecewise)");
  } catch (const InvalidInput& e) {
    r.fail(path, e.what());
  }
  return std::nullopt;
}

std::optional<IntervalSet> parse_intervals(Reader& r, const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) {
    r.fail(path, "expected a nonempty array of [lo, hi] pairs");
    return std::nullopt;
  }
  std::vector<Interval> out;
  bool ok = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto pair = r.numbers(v[i], item(path, i));
    if (!pair || pair->size() != 2) {
      if (pair) r.fail(item(path, i), "expected [lo, hi]");
      ok = false;
      continue;
    }
    if (!((*pair)[0] < (*pair)[1])) {
      r.fail(item(path, i), "lo must be below hi");
      ok = false;
      continue;
    }
    out.push_back({(*pair)[0], (*pair)[1]});
  }
  if (!ok) return std::nullopt;
  return IntervalSet(std::move(out));
}

void parse_two_by_two(Reader& r, const json& t, const std::string& path, TwoByTwoParams& p) {
  r.reject_unknown(t, path, {"a", "b", "c", "c_im", "bins", "eps", "widths", "anchor", "shift"});
  p.model.a = r.number(t, path, "a", false).value_or(0.0);
  p.model.b = r.number(t, path, "b", false).value_or(0.0);
  const auto c = r.number(t, path, "c", true);
  const double c_im = r.number(t, path, "c_im", false).value_or(0.0);
  if (c) {
    p.model.c = {*c, c_im};
    if (p.model.abs_c() == 0.0) r.fail(child(path, "c"), "coupling must be nonzero");
  }
  if (const json* bins = r.get(t, path, "bins", false)) {
    const std::string bp = child(path, "bins");
    if (!bins->is_array() || bins->size() != 2) {
      r.fail(bp, "expected [bins_upper, bins_lower]");
    } else {
      const auto bu = r.count((*bins)[0], item(bp, 0));
      const auto bl = r.count((*bins)[1], item(bp, 1));
      if (bu && bl) {
        if (*bu == 0 || *bl == 0) r.fail(bp, "bin counts must be positive");
        p.bins_upper = static_cast<std::size_t>(*bu);
        p.bins_lower = static_cast<std::size_t>(*bl);
      }
    }
  }
  if (auto eps = r.numbers(t, path, "eps", false)) {
    if (eps->empty()) r.fail(child(path, "eps"), "must be nonempty");
    for (std::size_t i = 0; i < eps->size(); ++i) {
      if (!((*eps)[i] > 0.0) || (i > 0 && !((*eps)[i] < (*eps)[i - 1]))) {
        r.fail(child(path, "eps"), "must be positive and strictly decreasing");
        break;
      }
    }
    p.eps_list = std::move(*eps);
  }
  if (auto widths = r.numbers(t, path, "widths", false)) {
    if (widths->empty()) r.fail(child(path, "widths"), "must be nonempty");
    for (const double w : *widths) {
      if (!(w > 0.0)) r.fail(child(path, "widths"), "widths must be positive");
    }
    p.widths = std::move(*widths);
  }
  p.placement.anchor = r.number(t, path, "anchor", false).value_or(0.5);
  p.placement.shift = r.number(t, path, "shift", false);
}

void parse_multiplicity(Reader& r, const json& m, const std::string& path, std::size_t n_sites,
                        MultiplicityParams& p, bool have_distribution) {
  r.reject_unknown(m, path,
                   {"free_sites", "frozen_potential", "targets", "onsite", "n_starts", "box", "newton_tol",
                    "dedup_tol", "residual_tol", "isolation_tol", "max_iterations"});
  if (const json* fs = r.get(m, path, "free_sites", true)) {
    if (auto s = r.sites(*fs, child(path, "free_sites"), n_sites, true)) {
      if (s->empty()) r.fail(child(path, "free_sites"), "must be nonempty");
      p.free_sites = std::move(*s);
    }
  }
  if (auto v = r.numbers(m, path, "frozen_potential", true)) {
    if (n_sites > 0 && v->size() != n_sites) {
      r.fail(child(path, "frozen_potential"), "needs one entry per site (" + std::to_string(n_sites) + ")");
    }
    p.frozen_potential = std::move(*v);
  }
  if (auto v = r.numbers(m, path, "targets", true)) {
    if (!p.free_sites.empty() && v->size() != p.free_sites.size()) {
      r.fail(child(path, "targets"), "needs one target per free site");
    }
    for (std::size_t a = 0; a < v->size(); ++a) {
      for (std::size_t b = a + 1; b < v->size(); ++b) {
        if ((*v)[a] == (*v)[b]) r.fail(item(child(path, "targets"), b), "targets must be distinct");
      }
    }
    p.targets = std::move(*v);
  }
  if (auto v = r.numbers(m, path, "onsite", false)) {
    if (n_sites > 0 && v->size() != n_sites) {
      r.fail(child(path, "onsite"), "needs one entry per site (" + std::to_string(n_sites) + ")");
    }
    p.onsite = std::move(*v);
  }
  if (const auto n = r.count(m, path, "n_starts", false)) p.search.n_starts = static_cast<std::size_t>(*n);
  if (const auto v = r.numbers(m, path, "box", !have_distribution)) {
    if (v->size() != 2 || !((*v)[0] < (*v)[1])) {
      r.fail(child(path, "box"), "expected [lo, hi] with lo < hi");
    } else {
      p.search.box_lo = (*v)[0];
      p.search.box_hi = (*v)[1];
    }
  } else if (have_distribution) {
    p.search.box_lo = std::numeric_limits<double>::quiet_NaN();  // filled from the distribution
  }
  const auto positive = [&](const char* key, double& target) {
    if (const auto v = r.number(m, path, key, false)) {
      if (!(*v > 0.0)) r.fail(child(path, key), "must be positive");
      target = *v;
    }
  };
  positive("newton_tol", p.search.newton_tol);
  positive("dedup_tol", p.search.dedup_tol);
  positive("residual_tol", p.search.residual_tol);
  positive("isolation_tol", p.search.isolation_tol);
  if (const auto v = r.count(m, path, "max_iterations", false)) {
    if (*v == 0) r.fail(child(path, "max_iterations"), "must be positive");
    p.search.max_iterations = static_cast<unsigned>(*v);
  }
}

json distribution_json(const PotentialDistribution& d) {
  switch (d.kind()) {
    case DistributionKind::kUniform:
      return {{"type", "uniform"}, {"lo", d.support().lo}, {"hi", d.support().hi}};
    case DistributionKind::kTriangular:
      return {{"type", "triangular"}, {"lo", d.support().lo}, {"hi", d.support().hi}};
    case DistributionKind::kPiecewiseConstant:
      return {{"type", "piecewise"}, {"edges", d.breakpoints()}, {"densities", d.cell_densities()}};
  }
  return {};
}

json graph_json(const GraphSpec& g) {
  json edges = json::array();
  for (const Edge& e : g.edges) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"weight", {e.weight.real(), e.weight.imag()}}});
  }
  return {{"n", g.n_sites}, {"edges", std::move(edges)}};
}

json intervals_json(const IntervalSet& set) {
  json out = json::array();
  for (const Interval& i : set) out.push_back({i.lo, i.hi});
  return out;
}

}  // namespace

std::string_view experiment_name(ExperimentKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ExperimentKind> experiment_from_name(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<ExperimentKind>& all_experiments() {
  static const std::vector<ExperimentKind> all = [] {
    std::vector<ExperimentKind> v;
    for (const auto& [k, name] : kNames) v.push_back(k);
    return v;
  }();
  return all;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : InvalidInput(join_errors(errors)), errors_(std::move(errors)) {}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("(document): ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"(document): expected a JSON object"});

  Reader r;
  RunConfig cfg;
  r.reject_unknown(root, "",
                   {"experiment", "graph", "distribution", "intervals", "sets", "alpha", "sites", "n", "n_samples",
                    "seed", "confidence_level", "output", "two_by_two", "multiplicity"});

  const auto name = r.string(root, "", "experiment", true);
  if (!name) throw ConfigError(r.errors);
  const auto kind = experiment_from_name(*name);
  if (!kind) {
    std::string known;
    for (const auto& [k, n] : kNames) known += (known.empty() ? "" : ", ") + std::string(n);
    throw ConfigError({"experiment: unknown experiment '" + *name + "' (" + known + ")"});
  }
  cfg.experiment = *kind;
  const ExperimentKind k = *kind;
  const bool estimator = is_estimator(k);
  const bool needs_graph = k != ExperimentKind::kTwoByTwo;
  const bool needs_dist = k != ExperimentKind::kMultiplicity;
  const bool needs_samples = k != ExperimentKind::kMultiplicity;

  if (const json* g = r.object(root, "", "graph", needs_graph)) {
    if (k == ExperimentKind::kTwoByTwo) {
      r.fail("graph", "not used by two-by-two (the model is set under two_by_two)");
    } else if (auto graph = parse_graph(r, *g, "graph")) {
      cfg.spec.graph = std::move(*graph);
    }
  }
  const std::size_t n_sites = cfg.spec.graph.n_sites;

  bool have_dist = false;
  if (const json* d = r.object(root, "", "distribution", needs_dist)) {
    if (auto dist = parse_distribution(r, *d, "distribution")) {
      cfg.spec.dist = std::move(*dist);
      have_dist = true;
    }
  }

  if (const json* iv = r.get(root, "", "intervals", estimator)) {
    if (!estimator) {
      r.fail("intervals", "not used by " + *name);
    } else if (auto set = parse_intervals(r, *iv, "intervals")) {
      cfg.spec.intervals = std::move(*set);
    }
  }
  const std::size_t n_intervals = cfg.spec.intervals.size();
  const bool single_interval =
      k == ExperimentKind::kWegner || k == ExperimentKind::kMinami || k == ExperimentKind::kNLevel;
  if (single_interval && n_intervals > 1) r.fail("intervals", *name + " takes exactly one interval");

  const json* alpha = r.get(root, "", "alpha", k == ExperimentKind::kProfileEvent);
  const json* sets = r.get(root, "", "sets", k == ExperimentKind::kProfileEvent || alpha != nullptr);
  if (sets && !alpha) r.fail("alpha", "missing required field (sets are given)");
  if (alpha) {
    if (const auto a = r.number(*alpha, "alpha")) {
      if (!(*a > 0.0 && *a <= 1.0)) r.fail("alpha", "must lie in (0, 1]");
      cfg.spec.alpha = *a;
    }
  }
  if (sets) {
    if (!sets->is_array()) {
      r.fail("sets", "expected an array of site arrays");
    } else {
      std::vector<SiteSet> out;
      for (std::size_t i = 0; i < sets->size(); ++i) {
        if (auto s = r.sites((*sets)[i], item("sets", i), n_sites, true)) {
          if (s->empty()) r.fail(item("sets", i), "must be nonempty");
          out.push_back(std::move(*s));
        }
      }
      if (n_intervals > 0 && sets->size() != n_intervals) r.fail("sets", "need exactly one set per interval");
      cfg.spec.sets = std::move(out);
    }
  }

  if (const json* s = r.get(root, "", "sites", k == ExperimentKind::kSpectralAveraging)) {
    if (auto sites = r.sites(*s, "sites", n_sites, true)) {
      if (n_intervals > 0 && sites->size() != n_intervals) r.fail("sites", "need exactly one site per interval");
      cfg.spec.sites = std::move(*sites);
    }
  }

  if (const auto n = r.count(root, "", "n", k == ExperimentKind::kNLevel)) {
    if (*n == 0) r.fail("n", "must be >= 1");
    cfg.level = static_cast<std::size_t>(*n);
  }

  if (const auto n = r.count(root, "", "n_samples", needs_samples)) {
    if (*n == 0) r.fail("n_samples", "must be >= 1");
    if (k == ExperimentKind::kTwoByTwo && *n < 10000) r.fail("n_samples", "two-by-two needs at least 10000");
    cfg.spec.n_samples = *n;
  }
  cfg.spec.seed = r.count(root, "", "seed", false).value_or(0);
  if (const auto cl = r.number(root, "", "confidence_level", false)) {
    if (!(*cl > 0.0 && *cl < 1.0)) r.fail("confidence_level", "must lie in (0, 1)");
    cfg.spec.confidence_level = *cl;
  }

  if (const json* t = r.object(root, "", "two_by_two", k == ExperimentKind::kTwoByTwo)) {
    if (k != ExperimentKind::kTwoByTwo) {
      r.fail("two_by_two", "only used by two-by-two");
    } else {
      parse_two_by_two(r, *t, "two_by_two", cfg.two_by_two);
    }
  }
  if (const json* m = r.object(root, "", "multiplicity", k == ExperimentKind::kMultiplicity)) {
    if (k != ExperimentKind::kMultiplicity) {
      r.fail("multiplicity", "only used by multiplicity");
    } else {
      parse_multiplicity(r, *m, "multiplicity", n_sites, cfg.multiplicity, have_dist);
    }
  }

  if (const json* o = r.object(root, "", "output", false)) {
    r.reject_unknown(*o, "output", {"dir", "stem"});
    if (const auto dir = r.string(*o, "output", "dir", false)) cfg.output_dir = *dir;
    if (const auto stem = r.string(*o, "output", "stem", false)) cfg.output_stem = *stem;
  }

  if (!r.errors.empty()) throw ConfigError(r.errors);
  if (estimator) {
    try {
      validate(cfg.spec);
    } catch (const InvalidInput& e) {
      throw ConfigError({e.what()});
    }
  }
  if (k == ExperimentKind::kMultiplicity && std::isnan(cfg.multiplicity.search.box_lo)) {
    const SearchOptions d = default_search(cfg.spec.dist, cfg.multiplicity.free_sites.size());
    cfg.multiplicity.search.box_lo = d.box_lo;
    cfg.multiplicity.search.box_hi = d.box_hi;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string canonical_config(const RunConfig& c) {
  const ExperimentKind k = c.experiment;
  json j;
  j["experiment"] = std::string(experiment_name(k));
  j["seed"] = c.spec.seed;
  if (k != ExperimentKind::kTwoByTwo) j["graph"] = graph_json(c.spec.graph);
  if (k != ExperimentKind::kMultiplicity) {
    j["distribution"] = distribution_json(c.spec.dist);
    j["n_samples"] = c.spec.n_samples;
  }
  if (is_estimator(k)) {
    j["intervals"] = intervals_json(c.spec.intervals);
    j["confidence_level"] = c.spec.confidence_level;
    if (c.spec.alpha) j["alpha"] = *c.spec.alpha;
    if (c.spec.sets) j["sets"] = *c.spec.sets;
    if (c.spec.sites) j["sites"] = *c.spec.sites;
    if (k == ExperimentKind::kNLevel) j["n"] = c.level;
  }
  if (k == ExperimentKind::kTwoByTwo) {
    const TwoByTwoParams& t = c.two_by_two;
    j["two_by_two"] = {{"a", t.model.a},
                       {"b", t.model.b},
                       {"c", t.model.c.real()},
                       {"c_im", t.model.c.imag()},
                       {"bins", {t.bins_upper, t.bins_lower}},
                       {"eps", t.eps_list},
                       {"widths", t.widths},
                       {"anchor", t.placement.anchor}};
    if (t.placement.shift) j["two_by_two"]["shift"] = *t.placement.shift;
  }
  if (k == ExperimentKind::kMultiplicity) {
    const MultiplicityParams& m = c.multiplicity;
    j["multiplicity"] = {{"free_sites", m.free_sites},
                         {"frozen_potential", m.frozen_potential},
                         {"targets", m.targets},
                         {"onsite", m.onsite},
                         {"n_starts", m.search.n_starts},
                         {"box", {m.search.box_lo, m.search.box_hi}},
                         {"newton_tol", m.search.newton_tol},
                         {"dedup_tol", m.search.dedup_tol},
                         {"residual_tol", m.search.residual_tol},
                         {"isolation_tol", m.search.isolation_tol},
                         {"max_iterations", m.search.max_iterations}};
  }
  return j.dump();
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const char* env_value, std::uint64_t config_seed) {
  if (flag) return *flag;
  if (env_value != nullptr && *env_value != '\0') {
    const std::string text(env_value);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      if (text.front() == '-') throw std::invalid_argument("negative");
      v = std::stoull(text, &used, 10);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size()) throw InvalidInput("LEVELSTAT_SEED must be a nonnegative integer, got '" + text + "'");
    return v;
  }
  return config_seed;
}

namespace {

void add_estimator(ResultRecord& rec, const EstimatorReport& r, bool checked = true) {
  rec.reports.push_back(r);
  if (checked && !r.consistent_with_bound()) rec.bound_violation = true;
}

void run_simplicity(const RunConfig& cfg, const RunOptions& opts, ResultRecord& rec) {
  const ExperimentSpec& spec = cfg.spec;
  const Sampler sampler(spec);
  struct Sample {
    double det = 0.0;
    double relative_difference = 0.0;
  };
  std::uint64_t nonpositive = 0;
  double worst = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  ordered_map_fold<Sample>(
      spec.n_samples, opts.threads,
      [&](std::uint64_t i) {
        const DetM d = det_M(sampler.hamiltonian(i));
        return Sample{d.assembled, d.relative_difference};
      },
      [&](std::uint64_t, const Sample& s) {
        if (!(s.det > 0.0)) ++nonpositive;
        worst = std::max(worst, s.relative_difference);
        smallest = std::min(smallest, s.det);
      });

  EstimatorReport r;
  r.quantity = "P{det M <= 0}";
  r.n_samples = spec.n_samples;
  r.seed = spec.seed;
  r.estimate = static_cast<double>(nonpositive) / static_cast<double>(spec.n_samples);
  r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(spec.n_samples));
  std::tie(r.ci_low, r.ci_high) = wilson_interval(nonpositive, spec.n_samples, spec.confidence_level);
  r.bound = 0.0;
  r.bound_satisfied = nonpositive == 0;
  rec.reports.push_back(r);
  rec.metrics = {{"nonpositive_count", static_cast<double>(nonpositive)},
                 {"min_det_M", smallest},
                 {"max_relative_difference", worst}};
  rec.bound_violation = nonpositive > 0;
}

void run_two_by_two(const RunConfig& cfg, const RunOptions& opts, ResultRecord& rec) {
  const TwoByTwoParams& t = cfg.two_by_two;
  DensityGrid grid = mc_vs_analytic(t.model, cfg.spec.dist, t.bins_upper, t.bins_lower, cfg.spec.n_samples,
                                    cfg.spec.seed, opts.threads);
  ScalingProbe scaling = singular_scaling_probe(t.model, cfg.spec.dist, t.eps_list);
  rec.bound_rows = modified_bound_check(t.model, cfg.spec.dist, t.widths, t.placement);
  rec.metrics = {{"l1", grid.l1},
                 {"analytic_total", grid.analytic_total},
                 {"out_of_range", static_cast<double>(grid.out_of_range)},
                 {"gap_violations", static_cast<double>(grid.gap_violations)},
                 {"trace_violations", static_cast<double>(grid.trace_violations)}};
  if (scaling.exponent) rec.metrics.emplace_back("edge_exponent", *scaling.exponent);
  rec.bound_violation = grid.gap_violations > 0 || grid.trace_violations > 0;
  rec.grid = std::move(grid);
  rec.scaling = std::move(scaling);
}

void run_multiplicity(const RunConfig& cfg, const RunOptions& opts, ResultRecord& rec) {
  const MultiplicityParams& m = cfg.multiplicity;
  const MultiplicityProblem problem(cfg.spec.graph, m.free_sites, m.frozen_potential, m.targets, m.onsite);
  SearchOptions search = m.search;
  search.threads = opts.threads;
  const SolutionSet set = solve_multilinear_system(problem, search);

  std::size_t n_fact = 1;
  for (std::size_t i = 2; i <= problem.n(); ++i) n_fact *= i;
  double worst = 0.0;
  rec.free_sites = m.free_sites;
  for (std::size_t i = 0; i < set.solutions.size(); ++i) {
    SolutionRow row;
    row.potential = set.solutions[i];
    try {
      const JacobianCheck check = jacobian_condition(problem, set.solutions[i]);
      row.jacobian_det = check.jacobian_det;
      row.factored = check.factored;
      row.relative_error = check.relative_error;
      row.agrees = check.agrees;
    } catch (const DegenerateSpectrum&) {
      row.jacobian_det = set.jacobian_dets[i];
      row.factored = std::numeric_limits<double>::quiet_NaN();
      row.relative_error = std::numeric_limits<double>::quiet_NaN();
    }
    if (!row.agrees) rec.bound_violation = true;
    worst = std::max(worst, std::isnan(row.relative_error) ? std::numeric_limits<double>::infinity()
                                                           : row.relative_error);
    rec.solutions.push_back(std::move(row));
  }
  rec.metrics = {{"count", static_cast<double>(set.count())},
                 {"n_factorial", static_cast<double>(n_fact)},
                 {"starts_used", static_cast<double>(set.starts_used)},
                 {"converged", static_cast<double>(set.converged)},
                 {"dedup_merges", static_cast<double>(set.dedup_merges)},
                 {"rejected_singular", static_cast<double>(set.rejected_singular)},
                 {"max_relative_error", worst}};
}

std::string timestamp_now() {
  std::time_t t = 0;
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ResultRecord run(const RunConfig& config, const RunOptions& opts) {
  ResultRecord rec;
  rec.experiment = std::string(experiment_name(config.experiment));
  rec.canonical_config = canonical_config(config);
  rec.config_hash = config_hash(config);
  rec.version = std::string(kVersion);
  rec.seed = config.spec.seed;
  rec.timestamp = timestamp_now();

  const EstimatorOptions eo{opts.threads, EstimatorOptions{}.assignment_cap};
  const ExperimentSpec& spec = config.spec;
  try {
    switch (config.experiment) {
      case ExperimentKind::kWegner: {
        const WegnerResult w = estimate_wegner(spec, eo);
        add_estimator(rec, w.occupancy);
        add_estimator(rec, w.trace);
        rec.metrics = {{"chain_violations", static_cast<double>(w.chain_violations)}};
        if (w.chain_violations > 0) rec.bound_violation = true;
        break;
      }
      case ExperimentKind::kMinami: {
        const MinamiResult m = estimate_minami(spec, eo);
        add_estimator(rec, m.factorial_moment);
        add_estimator(rec, m.multiple_occupancy);
        rec.metrics = {{"chain_violations", static_cast<double>(m.chain_violations)}};
        if (m.chain_violations > 0) rec.bound_violation = true;
        break;
      }
      case ExperimentKind::kNLevel:
        add_estimator(rec, estimate_n_level(spec, config.level, eo));
        break;
      case ExperimentKind::kJointIntervals:
        add_estimator(rec, estimate_joint_intervals(spec, eo), false);
        break;
      case ExperimentKind::kSpectralAveraging:
        add_estimator(rec, estimate_spectral_averaging(spec, eo));
        break;
      case ExperimentKind::kProfileEvent:
        add_estimator(rec, estimate_profile_event(spec, eo));
        break;
      case ExperimentKind::kTwoByTwo:
        run_two_by_two(config, opts, rec);
        break;
      case ExperimentKind::kMultiplicity:
        run_multiplicity(config, opts, rec);
        break;
      case ExperimentKind::kSimplicity:
        run_simplicity(config, opts, rec);
        break;
    }
  } catch (const BoundViolation& e) {
    throw BoundViolation(rec.experiment + ": " + e.what());
  } catch (const DegenerateSpectrum& e) {
    throw DegenerateSpectrum(rec.experiment + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput(rec.experiment + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(rec.experiment + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(rec.experiment + ": " + e.what());
  }
  return rec;
}

int exit_code(const ResultRecord& record) { return record.bound_violation ? kExitBoundViolation : 0; }

}  // namespace levelstat
