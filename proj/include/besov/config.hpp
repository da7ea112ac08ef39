#pragma once

// Run configuration and descriptor parsing. Every object is parsed strictly:
// unknown keys are errors. Flags override leaves by dotted path before
// parsing (set_path).

#include "besov/error.hpp"
#include "besov/functions.hpp"
#include "besov/grid.hpp"
#include "besov/io.hpp"
#include "besov/kernels.hpp"
#include "besov/littlewood_paley.hpp"
#include "besov/rate.hpp"
#include "besov/verify.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace besov::config {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Strict reader for one JSON object: every key must be consumed.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InvalidArgument(where_ + " must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw InvalidArgument(where_ + "." + key + " is required");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw InvalidArgument(where_ + "." + key + " must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return touch(key) ? number(key) : fallback; }

  int integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw InvalidArgument(where_ + "." + key + " must be an integer");
    return v.get<int>();
  }
  int integer(const std::string& key, int fallback) { return touch(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw InvalidArgument(where_ + "." + key + " must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return touch(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!touch(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw InvalidArgument(where_ + "." + key + " must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw InvalidArgument(where_ + "." + key + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw InvalidArgument(where_ + "." + key + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  /// "inf" or a number >= 1.
  LpExponent exponent(const std::string& key, LpExponent fallback) {
    if (!touch(key)) return fallback;
    const json& v = raw(key);
    if (v.is_string() && (v == "inf" || v == "infinity")) return LpExponent::infinity();
    if (!v.is_number()) throw InvalidArgument(where_ + "." + key + " must be a number >= 1 or \"inf\"");
    return LpExponent(v.get<double>());
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  /// Throws on keys that were never read.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw InvalidArgument("unknown key '" + where_ + "." + k + "'");
  }

 private:
  bool touch(const std::string& key) {
    used_.insert(key);
    return has(key);
  }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

inline json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("malformed JSON in " + what + ": " + e.what());
  }
}

/// Sets a leaf by dotted path, creating intermediate objects. The value is
/// parsed as JSON when possible and taken as a string otherwise.
inline void set_path(json& root, const std::string& dotted, const std::string& value) {
  if (dotted.empty()) throw InvalidArgument("--set needs a key");
  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    auto dot = dotted.find('.', start);
    std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw InvalidArgument("empty path segment in '" + dotted + "'");
    if (!node->is_object()) {
      if (!node->is_null()) throw InvalidArgument("'" + dotted + "' descends into a non-object value");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

// ---------------------------------------------------------------------------
// Kernel descriptors

namespace detail {

inline AnalyticKernel parse_analytic(Fields& f, const std::string& kind) {
  if (kind == "cube") return CubeKernel{f.numbers("lo"), f.numbers("hi")};
  if (kind == "gaussian") {
    double v = f.number("variance");
    int dim = f.integer("dim", 0);
    std::vector<double> c = f.has("center") ? f.numbers("center") : std::vector<double>(dim > 0 ? dim : 1, 0.0);
    if (dim > 0 && static_cast<int>(c.size()) != dim) throw InvalidArgument(f.path("center") + " length differs from dim");
    return GaussianKernel{v, c};
  }
  if (kind == "bump") return BumpKernel{f.number("radius"), f.integer("dim", 1)};
  throw InvalidArgument("unknown kernel kind '" + kind + "'");
}

}  // namespace detail

/// Parses {"kind": "cube"|"gaussian"|"bump"|"mixture"|"sampled", ...} with
/// optional "id" and "mass" (a multiplier on the normalized kernel). Relative
/// sampled paths resolve against `base`.
inline MollifierSpec parse_kernel(const json& j, const fs::path& base = {}, const std::string& where = "kernel") {
  Fields f(j, where);
  const std::string kind = f.string("kind");
  const std::string id = f.string("id", kind);
  const double mass = f.number("mass", 1.0);
  KernelForm form;
  if (kind == "mixture") {
    const json& comps = f.raw("components");
    if (!comps.is_array() || comps.empty()) throw InvalidArgument(where + ".components must be a non-empty array");
    MixtureKernel mix;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      std::string w = where + ".components[" + std::to_string(i) + "]";
      Fields c(comps[i], w);
      double weight = c.number("weight");
      Fields k(c.raw("kernel"), w + ".kernel");
      AnalyticKernel a = detail::parse_analytic(k, k.string("kind"));
      k.finish();
      c.finish();
      mix.components.push_back({weight, a});
    }
    form = std::move(mix);
  } else if (kind == "sampled") {
    fs::path p = f.string("path");
    if (p.is_relative() && !base.empty()) p = base / p;
    std::string interp = f.string("interpolation", "cubic");
    if (interp != "cubic" && interp != "nearest") throw InvalidArgument(where + ".interpolation must be cubic or nearest");
    form = SampledKernel{io::read_bgf(p), interp == "cubic" ? Interpolation::cubic : Interpolation::nearest};
  } else {
    form = detail::parse_analytic(f, kind);
  }
  f.finish();
  return MollifierSpec(std::move(form), id, mass);
}

/// A kernel given inline or as a path to a descriptor file.
inline MollifierSpec load_kernel(const json& j, const fs::path& base = {}) {
  if (j.is_string()) {
    fs::path p = j.get<std::string>();
    if (p.is_relative() && !base.empty()) p = base / p;
    return parse_kernel(read_json_file(p), p.parent_path());
  }
  return parse_kernel(j, base);
}

// ---------------------------------------------------------------------------
// Function descriptors

struct FunctionSource {
  std::string id;
  std::optional<FunctionGenerator> generator;  ///< generated on the run grid
  std::optional<double> band_limit;
  std::optional<GridFunction> samples;  ///< loaded from a file (defines its own grid)
};

/// Parses a generator descriptor or {"kind": "file", "path", "format", "extent"}.
inline FunctionSource parse_function(const json& j, const fs::path& base = {}, const std::string& where = "function") {
  if (j.is_string()) return parse_function(json{{"kind", "file"}, {"path", j}}, base, where);
  Fields f(j, where);
  const std::string kind = f.string("kind");
  FunctionSource src;
  src.id = f.string("id", kind);
  if (kind == "file") {
    fs::path p = f.string("path");
    if (p.is_relative() && !base.empty()) p = base / p;
    std::string format = f.string("format", p.extension() == ".csv" ? "csv" : "bgf1");
    if (format == "bgf1") {
      src.samples = io::read_bgf(p);
    } else if (format == "csv") {
      if (!f.has("extent")) throw InvalidArgument(where + ".extent is required for CSV input");
      src.samples = io::read_csv(p, f.number("extent"));
    } else {
      throw InvalidArgument(where + ".format must be bgf1 or csv");
    }
    f.finish();
    return src;
  }
  if (kind == "gaussian") {
    double v = f.number("variance", 1.0);
    src.generator = GaussianFunction{v, f.has("center") ? f.numbers("center") : std::vector<double>{}};
  } else if (kind == "power_bump") {
    src.generator = PowerBump{f.number("alpha"), f.number("window", 1.0)};
  } else if (kind == "random_band") {
    int seed = f.integer("seed", 1);
    if (seed < 0) throw InvalidArgument(where + ".seed must be non-negative");
    src.generator = RandomBand{static_cast<std::uint64_t>(seed), f.number("band", 6.0), f.integer("terms", 8),
                               f.number("window", 1.0)};
  } else if (kind == "lacunary") {
    src.generator = Lacunary{f.number("alpha"), f.number("top", 0.0), f.number("window", 1.0)};
  } else if (kind == "gaussian_derivative") {
    src.generator = GaussianDerivative{f.number("variance", 1.0)};
  } else if (kind == "zero") {
    src.generator = ZeroFunction{};
  } else {
    throw InvalidArgument("unknown function kind '" + kind + "'");
  }
  if (f.has("band_limit")) src.band_limit = f.number("band_limit");
  f.finish();
  return src;
}

// ---------------------------------------------------------------------------
// Run configuration

struct GridConfig {
  int dim = 1;
  double extent = 16.0;
  std::size_t points = 4096;
  bool explicit_ = false;  ///< set in the document

  GridSpec spec() const { return GridSpec(dim, extent, points); }
};

struct RunConfig {
  fs::path base;  ///< directory of the config file (relative paths)
  GridConfig grid;
  json kernel = json{{"kind", "gaussian"}, {"variance", 0.25}};
  json function = json{{"kind", "gaussian"}, {"variance", 1.0}};
  json psi = json{{"kind", "gaussian_derivative"}, {"variance", 1.0}};
  BesovParams besov{0.7, 2.0, 2.0};
  EpsilonGrid epsilon_grid{8, 4};
  double delta_in = kDefaultDeltaIn;
  double delta_out = kDefaultDeltaOut;
  std::optional<int> levels;
  FitRange fit{std::exp2(-7.0), std::exp2(-2.0)};
  LpExponent profile_p = 1.0;
  int eta_levels = 16;
  int eta_samples = 4;
  int k_max = kDefaultMaxMomentOrder;
  std::vector<double> fractional_orders = default_fractional_orders();
  MollifyRoute route = MollifyRoute::automatic;
  verify::SuiteOptions verify;
  std::string junit;
  std::string output_dir = "besov_out";
  json document;  ///< effective document after overrides

  MollifierSpec kernel_spec() const { return load_kernel(kernel, base); }

  /// Samples a function descriptor on the run grid (files bring their own grid).
  std::pair<std::string, GridFunction> function_on_grid(const json& descriptor) const {
    FunctionSource src = parse_function(descriptor, base);
    if (src.samples) {
      if (grid.explicit_ && !(src.samples->spec() == grid.spec()))
        throw InvalidArgument("function file grid " + src.samples->spec().describe() + " differs from configured grid " +
                              grid.spec().describe());
      return {src.id, *src.samples};
    }
    return {src.id, synthesize(*src.generator, grid.spec(), src.band_limit)};
  }
};

inline MollifyRoute parse_route(const std::string& s) {
  if (s == "automatic") return MollifyRoute::automatic;
  if (s == "symbol") return MollifyRoute::symbol;
  if (s == "grid") return MollifyRoute::grid;
  throw InvalidArgument("route must be automatic, symbol or grid");
}

/// Validates the whole document before any computation.
inline RunConfig parse_run_config(const json& doc, const fs::path& base = {}) {
  RunConfig c;
  c.base = base;
  c.document = doc;
  Fields top(doc, "config");
  if (top.has("grid")) {
    Fields g(top.raw("grid"), "grid");
    c.grid.dim = g.integer("dim", 1);
    c.grid.extent = g.number("extent", 16.0);
    int n = g.integer("points", 4096);
    if (n <= 0) throw InvalidArgument("grid.points must be positive");
    c.grid.points = static_cast<std::size_t>(n);
    c.grid.explicit_ = true;
    g.finish();
  }
  c.grid.spec();  // validates
  if (top.has("kernel")) c.kernel = top.raw("kernel");
  if (top.has("function")) c.function = top.raw("function");
  if (top.has("psi")) c.psi = top.raw("psi");
  // Descriptors are checked now so malformed input fails before computing.
  c.kernel_spec();
  parse_function(c.function, base, "function");
  parse_function(c.psi, base, "psi");
  if (top.has("besov")) {
    Fields b(top.raw("besov"), "besov");
    c.besov = BesovParams(b.number("s", 0.7), b.exponent("p", 2.0), b.exponent("q", 2.0));
    b.finish();
  }
  if (top.has("epsilon_grid")) {
    Fields e(top.raw("epsilon_grid"), "epsilon_grid");
    c.epsilon_grid = EpsilonGrid(e.integer("j_max", 8), e.integer("m", 4));
    e.finish();
  }
  if (top.has("filter_bank")) {
    Fields f(top.raw("filter_bank"), "filter_bank");
    c.delta_in = f.number("delta_in", kDefaultDeltaIn);
    c.delta_out = f.number("delta_out", kDefaultDeltaOut);
    if (f.has("levels")) c.levels = f.integer("levels");
    f.finish();
  }
  if (top.has("fit")) {
    Fields f(top.raw("fit"), "fit");
    c.fit = {f.number("lo", c.fit.lo), f.number("hi", c.fit.hi)};
    if (!(c.fit.lo > 0.0) || !(c.fit.hi >= c.fit.lo)) throw InvalidArgument("fit needs 0 < lo <= hi");
    f.finish();
  }
  if (top.has("profile")) {
    Fields f(top.raw("profile"), "profile");
    c.profile_p = f.exponent("p", 1.0);
    f.finish();
  }
  if (top.has("eta_test")) {
    Fields f(top.raw("eta_test"), "eta_test");
    c.eta_levels = f.integer("levels", 16);
    c.eta_samples = f.integer("samples", 4);
    if (c.eta_levels < 1 || c.eta_samples < 1) throw InvalidArgument("eta_test.levels and eta_test.samples must be >= 1");
    f.finish();
  }
  if (top.has("moments")) {
    Fields f(top.raw("moments"), "moments");
    c.k_max = f.integer("k_max", kDefaultMaxMomentOrder);
    if (c.k_max < 1) throw InvalidArgument("moments.k_max must be >= 1");
    if (f.has("fractional_orders")) c.fractional_orders = f.numbers("fractional_orders");
    for (double s : c.fractional_orders)
      if (!(s > 0.0)) throw InvalidArgument("moments.fractional_orders must be positive");
    f.finish();
  }
  if (top.has("route")) c.route = parse_route(top.string("route"));
  if (top.has("verify")) {
    Fields v(top.raw("verify"), "verify");
    int n = v.integer("points", static_cast<int>(c.verify.points));
    if (n < 16) throw InvalidArgument("verify.points must be >= 16");
    c.verify.points = static_cast<std::size_t>(n);
    c.verify.extent = v.number("extent", c.verify.extent);
    c.verify.filter = v.string("filter", "");
    c.verify.inject_broken_kernel = v.boolean("inject_broken_kernel", false);
    c.junit = v.string("junit", "");
    GridSpec(1, c.verify.extent, c.verify.points);  // validates
    v.finish();
  }
  if (top.has("output")) {
    Fields o(top.raw("output"), "output");
    c.output_dir = o.string("dir", c.output_dir);
    o.finish();
  }
  // Sections read via raw() above; absent ones just need marking.
  for (const char* k : {"kernel", "function", "psi", "besov", "epsilon_grid", "filter_bank", "fit", "profile",
                        "eta_test", "moments", "route", "verify", "output"})
    if (doc.contains(k)) (void)top.raw(k);
  top.finish();
  return c;
}

}  // namespace besov::config
