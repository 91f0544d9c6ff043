#include "bingham/config.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace bingham {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Channel: return "channel";
    case Experiment::Convective: return "convective";
    case Experiment::Custom: return "custom";
  }
  return "?";
}

Experiment parse_experiment(const std::string& s) {
  if (s == "channel") return Experiment::Channel;
  if (s == "convective") return Experiment::Convective;
  if (s == "custom") return Experiment::Custom;
  throw std::invalid_argument("experiment: unknown value '" + s + "' (accepted: channel, convective, custom)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    throw std::invalid_argument(key + ": expected a finite number, got '" + v + "'");
  return x;
}

long to_long(const std::string& key, const std::string& v) {
  long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long x = to_long(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw std::invalid_argument(key + ": integer out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::invalid_argument(key + ": expected true or false, got '" + v + "'");
}

template <class F>
auto rethrow_with_key(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(key + ": " + e.what());
  }
}

std::string jumps_name(JumpOwnership j) { return j == JumpOwnership::Split ? "split" : "double"; }

JumpOwnership parse_jumps(const std::string& s) {
  if (s == "split") return JumpOwnership::Split;
  if (s == "double") return JumpOwnership::Double;
  throw std::invalid_argument("unknown value '" + s + "' (accepted: split, double)");
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Ordered as in the serialized document.
const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> k = {
      {"experiment",
       {[](RunConfig& c, const std::string& v) { c.experiment = parse_experiment(v); },
        [](const RunConfig& c) { return to_string(c.experiment); }}},
      {"physics.sigma",
       {[](RunConfig& c, const std::string& v) { c.sigma = to_double("physics.sigma", v); },
        [](const RunConfig& c) { return fmt(c.sigma); }}},
      {"physics.nu",
       {[](RunConfig& c, const std::string& v) { c.nu = to_double("physics.nu", v); },
        [](const RunConfig& c) { return fmt(c.nu); }}},
      {"physics.kappa",
       {[](RunConfig& c, const std::string& v) { c.kappa = to_double("physics.kappa", v); },
        [](const RunConfig& c) { return fmt(c.kappa); }}},
      {"physics.m0",
       {[](RunConfig& c, const std::string& v) { c.m0 = to_int("physics.m0", v); },
        [](const RunConfig& c) { return std::to_string(c.m0); }}},
      {"physics.C_B",
       {[](RunConfig& c, const std::string& v) { c.c_b = to_double("physics.C_B", v); },
        [](const RunConfig& c) { return fmt(c.c_b); }}},
      {"physics.C_P",
       {[](RunConfig& c, const std::string& v) { c.c_p = to_double("physics.C_P", v); },
        [](const RunConfig& c) { return fmt(c.c_p); }}},
      {"problem.force_x",
       {[](RunConfig& c, const std::string& v) { c.force_x = to_double("problem.force_x", v); },
        [](const RunConfig& c) { return fmt(c.force_x); }}},
      {"problem.force_y",
       {[](RunConfig& c, const std::string& v) { c.force_y = to_double("problem.force_y", v); },
        [](const RunConfig& c) { return fmt(c.force_y); }}},
      {"problem.convection",
       {[](RunConfig& c, const std::string& v) { c.convection = to_bool("problem.convection", v); },
        [](const RunConfig& c) { return std::string(c.convection ? "true" : "false"); }}},
      {"mesh.divisions",
       {[](RunConfig& c, const std::string& v) { c.divisions = to_int("mesh.divisions", v); },
        [](const RunConfig& c) { return std::to_string(c.divisions); }}},
      {"solver.method",
       {[](RunConfig& c, const std::string& v) { c.method = v; },
        [](const RunConfig& c) { return c.method; }}},
      {"solver.delta_rule",
       {[](RunConfig& c, const std::string& v) {
          c.delta_rule = rethrow_with_key("solver.delta_rule", [&] { return parse_delta_rule(v); });
        },
        [](const RunConfig& c) { return to_string(c.delta_rule); }}},
      {"solver.delta",
       {[](RunConfig& c, const std::string& v) { c.delta = to_double("solver.delta", v); },
        [](const RunConfig& c) { return fmt(c.delta); }}},
      {"solver.max_inner",
       {[](RunConfig& c, const std::string& v) { c.max_inner = to_int("solver.max_inner", v); },
        [](const RunConfig& c) { return std::to_string(c.max_inner); }}},
      {"solver.force_min_one_step",
       {[](RunConfig& c, const std::string& v) {
          c.force_min_one_step = to_bool("solver.force_min_one_step", v);
        },
        [](const RunConfig& c) { return std::string(c.force_min_one_step ? "true" : "false"); }}},
      {"adapt.theta",
       {[](RunConfig& c, const std::string& v) { c.theta = to_double("adapt.theta", v); },
        [](const RunConfig& c) { return fmt(c.theta); }}},
      {"adapt.marking",
       {[](RunConfig& c, const std::string& v) {
          c.marking = rethrow_with_key("adapt.marking", [&] { return parse_marking(v); });
        },
        [](const RunConfig& c) { return to_string(c.marking); }}},
      {"adapt.C_graph",
       {[](RunConfig& c, const std::string& v) { c.c_graph = to_double("adapt.C_graph", v); },
        [](const RunConfig& c) { return fmt(c.c_graph); }}},
      {"adapt.criterion_exponent",
       {[](RunConfig& c, const std::string& v) {
          c.criterion_exponent = to_double("adapt.criterion_exponent", v);
        },
        [](const RunConfig& c) { return fmt(c.criterion_exponent); }}},
      {"adapt.zeta_variant",
       {[](RunConfig& c, const std::string& v) {
          c.zeta_variant = rethrow_with_key("adapt.zeta_variant", [&] { return parse_zeta_variant(v); });
        },
        [](const RunConfig& c) { return to_string(c.zeta_variant); }}},
      {"adapt.jumps",
       {[](RunConfig& c, const std::string& v) {
          c.jumps = rethrow_with_key("adapt.jumps", [&] { return parse_jumps(v); });
        },
        [](const RunConfig& c) { return jumps_name(c.jumps); }}},
      {"adapt.projection_degree",
       {[](RunConfig& c, const std::string& v) { c.projection_degree = to_int("adapt.projection_degree", v); },
        [](const RunConfig& c) { return std::to_string(c.projection_degree); }}},
      {"adapt.estimator_convection",
       {[](RunConfig& c, const std::string& v) {
          if (v == "model") c.estimator_convection.reset();
          else if (v == "true" || v == "false") c.estimator_convection = v == "true";
          else
            throw std::invalid_argument("adapt.estimator_convection: unknown value '" + v +
                                        "' (accepted: model, true, false)");
        },
        [](const RunConfig& c) {
          if (!c.estimator_convection) return std::string("model");
          return std::string(*c.estimator_convection ? "true" : "false");
        }}},
      {"budget.max_elements",
       {[](RunConfig& c, const std::string& v) { c.max_elements = to_long("budget.max_elements", v); },
        [](const RunConfig& c) { return std::to_string(c.max_elements); }}},
      {"budget.max_outer",
       {[](RunConfig& c, const std::string& v) { c.max_outer = to_int("budget.max_outer", v); },
        [](const RunConfig& c) { return std::to_string(c.max_outer); }}},
      {"output.directory",
       {[](RunConfig& c, const std::string& v) { c.directory = v; },
        [](const RunConfig& c) { return c.directory; }}},
      {"output.vtk_stride",
       {[](RunConfig& c, const std::string& v) { c.vtk_stride = to_int("output.vtk_stride", v); },
        [](const RunConfig& c) { return std::to_string(c.vtk_stride); }}},
      {"output.wall_time",
       {[](RunConfig& c, const std::string& v) { c.wall_time = to_bool("output.wall_time", v); },
        [](const RunConfig& c) { return std::string(c.wall_time ? "true" : "false"); }}},
  };
  return k;
}

std::string accepted_keys() {
  std::string s;
  for (const auto& [name, key] : keys()) s += (s.empty() ? "" : ", ") + name;
  return s;
}

std::vector<std::string> methods_for(const RunConfig& c) {
  if (c.method == "both") return {"zarantonello", "kacanov_convective"};
  return {c.method};
}

}  // namespace

RunConfig default_config(Experiment e) {
  RunConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::Channel:
      c.kappa = std::numbers::sqrt2;
      c.method = "kacanov";
      break;
    case Experiment::Convective:
      c.kappa = 1.0;
      c.method = "both";
      break;
    case Experiment::Custom:
      c.kappa = 1.0;
      c.method = "kacanov";
      break;
  }
  return c;
}

void RunConfig::validate() const {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(key) + ": must be > 0");
  };
  if (!(sigma >= 0.0)) throw std::invalid_argument("physics.sigma: must be >= 0");
  positive("physics.nu", nu);
  positive("physics.kappa", kappa);
  if (m0 < 0) throw std::invalid_argument("physics.m0: must be >= 0");
  positive("physics.C_B", c_b);
  positive("physics.C_P", c_p);
  if (divisions < 1) throw std::invalid_argument("mesh.divisions: must be >= 1");
  positive("solver.delta", delta);
  if (max_inner < 1) throw std::invalid_argument("solver.max_inner: must be >= 1");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("adapt.theta: must lie in (0, 1]");
  positive("adapt.C_graph", c_graph);
  if (criterion_exponent != 1.0 && criterion_exponent != 0.5)
    throw std::invalid_argument("adapt.criterion_exponent: accepted values are 1, 0.5");
  if (projection_degree != 0 && projection_degree != 1)
    throw std::invalid_argument("adapt.projection_degree: accepted values are 1, 0");
  if (max_elements < 1) throw std::invalid_argument("budget.max_elements: must be >= 1");
  if (max_outer < 1) throw std::invalid_argument("budget.max_outer: must be >= 1");
  if (vtk_stride < 0) throw std::invalid_argument("output.vtk_stride: must be >= 0");
  if (directory.empty()) throw std::invalid_argument("output.directory: must not be empty");

  const bool conv = experiment == Experiment::Convective || (experiment == Experiment::Custom && convection);
  if (method == "both") {
    if (!conv)
      throw std::invalid_argument("solver.method: 'both' needs a convective model (accepted here: kacanov, zarantonello)");
    return;
  }
  const Method m = rethrow_with_key("solver.method", [&] { return parse_method(method); });
  if (conv && m == Method::Kacanov)
    throw std::invalid_argument(
        "solver.method: the model is convective (accepted: zarantonello, kacanov_convective, both)");
  if (!conv && m == Method::KacanovConvective)
    throw std::invalid_argument("solver.method: the model has no convection (accepted: kacanov, zarantonello)");
}

RunConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    bool known = false;
    for (const auto& kv : keys()) known = known || kv.first == key;
    if (!known)
      throw std::invalid_argument("unknown key '" + key + "' (accepted: " + accepted_keys() + ")");
    if (!seen.insert(key).second) throw std::invalid_argument("duplicate key '" + key + "'");
    if (value.empty()) throw std::invalid_argument(key + ": missing value");
    entries.emplace_back(key, value);
  }

  Experiment e = Experiment::Channel;
  for (const auto& [k, v] : entries)
    if (k == "experiment") e = parse_experiment(v);
  RunConfig c = default_config(e);
  for (const auto& [k, v] : entries)
    for (const auto& [name, key] : keys())
      if (name == k) key.set(c, v);
  c.validate();
  return c;
}

std::string serialize_config(const RunConfig& c) {
  std::string s;
  for (const auto& [name, key] : keys()) s += name + " = " + key.get(c) + "\n";
  return s;
}

std::vector<Problem> make_problems(const RunConfig& c) {
  c.validate();
  std::vector<Problem> out;
  for (const std::string& name : methods_for(c)) {
    const Method method = parse_method(name);
    Problem p;
    switch (c.experiment) {
      case Experiment::Channel:
        p = experiment_channel();
        p.solver.method = method;
        break;
      case Experiment::Convective:
        p = experiment_convective(method);
        break;
      case Experiment::Custom: {
        p.name = "custom";
        const Vec2 f{c.force_x, c.force_y};
        p.f = [f](Point) { return f; };
        p.solver.method = method;
        p.solver.convection = c.convection;
        break;
      }
    }
    p.law.sigma = c.sigma;
    p.law.nu = c.nu;
    p.law.kappa = c.kappa;
    p.law.m = c.m0;
    // The channel's exact profile holds only for the default physics.
    if (c.experiment == Experiment::Channel &&
        !(c.sigma == 0.3 && c.nu == 1.0 && c.kappa == std::numbers::sqrt2))
      p.exact.reset();
    p.initial_divisions = c.divisions;
    p.solver.delta_rule = c.delta_rule;
    p.solver.delta = c.delta;
    p.solver.max_inner_iterations = c.max_inner;
    p.solver.force_min_one_step = c.force_min_one_step;
    p.adapt.theta = c.theta;
    p.adapt.marking = c.marking;
    p.adapt.c_graph = c.c_graph;
    p.adapt.criterion_exponent = c.criterion_exponent;
    p.adapt.zeta_variant = c.zeta_variant;
    p.adapt.jumps = c.jumps;
    p.adapt.projection_degree = c.projection_degree;
    p.adapt.estimator_convection = c.estimator_convection;
    p.adapt.max_elements = static_cast<std::size_t>(c.max_elements);
    p.adapt.max_outer = c.max_outer;
    out.push_back(std::move(p));
  }
  return out;
}

std::filesystem::path resolve_output_directory(const RunConfig& c) {
  std::filesystem::path dir(c.directory);
  if (dir.is_relative()) {
    if (const char* root = std::getenv("BINGHAM_OUTPUT_ROOT"); root && *root)
      dir = std::filesystem::path(root) / dir;
  }
  return dir;
}

void write_run_log_csv(std::ostream& os, const std::vector<AdaptiveRecord>& history, bool wall_time) {
  os << "step,noe,m,nit,E_pde,E_ic,eta,res_pde,res_ic,error_h1,wall_s\n";
  for (const AdaptiveRecord& r : history) {
    os << r.step << ',' << r.noe << ',' << r.m << ',' << r.nit << ',' << fmt(r.e_pde) << ','
       << fmt(r.e_ic) << ',' << fmt(r.eta) << ',' << fmt(r.res_pde) << ',' << fmt(r.res_ic) << ',';
    if (r.error_h1) os << fmt(*r.error_h1);
    os << ',';
    if (wall_time) os << fmt(r.wall_s);
    os << '\n';
  }
}

void write_convergence_csv(std::ostream& os, const std::vector<AdaptiveRecord>& history) {
  os << "noe,error_h1,estimator\n";
  for (const AdaptiveRecord& r : last_per_mesh(history)) {
    os << r.noe << ',';
    if (r.error_h1) os << fmt(*r.error_h1);
    os << ',' << fmt(std::sqrt(r.e_pde + r.e_ic) + r.res_pde) << '\n';
  }
}

void write_iterations_csv(std::ostream& os, const std::vector<IterationRow>& rows) {
  os << "step,inner,energy,res_pde,res_ic,estimator,increment\n";
  for (const IterationRow& r : rows)
    os << r.step << ',' << r.inner.inner << ',' << fmt(r.inner.energy) << ',' << fmt(r.inner.res_pde) << ','
       << fmt(r.inner.res_ic) << ',' << fmt(r.inner.estimator) << ',' << fmt(r.inner.increment) << '\n';
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) : path_(dir / ".bingham.lock") {
  std::filesystem::create_directories(dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST)
      throw std::runtime_error("output directory " + dir.string() + " is locked by another run (" +
                               path_.string() + ")");
    throw std::system_error(errno, std::generic_category(), "cannot create " + path_.string());
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace bingham
