#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "bingham/config.hpp"

using namespace bingham;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const char* base = std::getenv("BINGHAM_TEST_TMP");
  std::filesystem::path p = base ? std::filesystem::path(base) : std::filesystem::temp_directory_path();
  p /= name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const RunConfig c = parse_config("");
  CHECK(c == default_config(Experiment::Channel));
  CHECK(c.sigma == 0.3);
  CHECK(c.nu == 1.0);
  CHECK(c.theta == 0.5);
  CHECK(c.c_graph == 4.0);
  CHECK(c.method == "kacanov");
  CHECK(c.kappa == std::numbers::sqrt2);
  CHECK(parse_config("experiment = channel\n") == c);

  const RunConfig v = parse_config("experiment = convective");
  CHECK(v.method == "both");
  CHECK(v.kappa == 1.0);
  CHECK(v.c_graph == 4.0);
}

TEST_CASE("errors name the key") {
  CHECK(error_of("physics.sigma = -1").find("sigma") != std::string::npos);
  const std::string unknown = error_of("adapt.thetta = 0.4");
  CHECK(unknown.find("adapt.thetta") != std::string::npos);
  CHECK(unknown.find("adapt.theta") != std::string::npos);  // accepted keys listed
  CHECK(error_of("this line has no equals sign").find("key = value") != std::string::npos);
  CHECK(error_of("adapt.theta = abc").find("adapt.theta") != std::string::npos);
  CHECK(error_of("adapt.theta = 0.4\nadapt.theta = 0.5").find("adapt.theta") != std::string::npos);
  CHECK(error_of("solver.method = newton").find("kacanov") != std::string::npos);
  CHECK_FALSE(error_of("experiment = channel\nsolver.method = kacanov_convective").empty());
  CHECK_FALSE(error_of("experiment = convective\nsolver.method = kacanov").empty());
  CHECK_FALSE(error_of("adapt.theta = 1.5").empty());
  CHECK_FALSE(error_of("budget.max_elements = 0").empty());
  CHECK_FALSE(error_of("adapt.criterion_exponent = 0.3").empty());
  CHECK(error_of("# comment only\n\n  adapt.theta = 0.25   # trailing\n").empty());
  CHECK(parse_config("adapt.theta = 0.25 # x").theta == 0.25);
}

TEST_CASE("property: serialize/parse round trip") {
  CHECK(parse_config(serialize_config(RunConfig{})) == RunConfig{});
  oracle::Gen g(42);
  for (int i = 0; i < 200; ++i) {
    RunConfig c = default_config(static_cast<Experiment>(g.integer(0, 2)));
    c.sigma = g.uniform(0.0, 2.0);
    c.nu = g.uniform(0.01, 5.0);
    c.kappa = g.coin() ? std::numbers::sqrt2 : g.uniform(0.5, 2.0);
    c.m0 = g.integer(0, 10);
    c.c_b = g.uniform(0.1, 3.0);
    c.c_p = g.uniform(0.1, 3.0);
    c.delta_rule = g.coin() ? DeltaRule::Fixed : DeltaRule::AdaptiveN;
    c.delta = g.uniform(1e-3, 1.0);
    c.max_inner = g.integer(1, 500);
    c.force_min_one_step = g.coin();
    c.theta = g.uniform(0.01, 1.0);
    c.marking = g.coin() ? Marking::Doerfler : Marking::Maximum;
    c.c_graph = g.uniform(0.1, 10.0);
    c.criterion_exponent = g.coin() ? 1.0 : 0.5;
    c.zeta_variant = g.coin() ? ZetaVariant::InverseN : ZetaVariant::InverseNPlusOne;
    c.jumps = g.coin() ? JumpOwnership::Split : JumpOwnership::Double;
    c.projection_degree = g.integer(0, 1);
    const int ec = g.integer(0, 2);
    c.estimator_convection = ec == 0 ? std::nullopt : std::optional<bool>(ec == 2);
    c.divisions = g.integer(1, 16);
    c.max_elements = g.integer(1, 100000);
    c.max_outer = g.integer(1, 5000);
    c.force_x = g.normal();
    c.force_y = g.normal();
    if (c.experiment == Experiment::Custom) {
      c.convection = g.coin();
      c.method = c.convection ? (g.coin() ? "zarantonello" : "kacanov_convective") : (g.coin() ? "kacanov" : "zarantonello");
    }
    c.directory = "out_" + std::to_string(i);
    c.vtk_stride = g.integer(0, 5);
    c.wall_time = g.coin();
    REQUIRE_NOTHROW(c.validate());
    CHECK(parse_config(serialize_config(c)) == c);
  }
}

TEST_CASE("problems from configs") {
  const auto ch = make_problems(parse_config(""));
  REQUIRE(ch.size() == 1u);
  CHECK(ch[0].exact.has_value());
  CHECK(ch[0].adapt.max_elements == 2000u);
  const auto other = make_problems(parse_config("physics.sigma = 0.2"));
  CHECK_FALSE(other[0].exact.has_value());
  const auto both = make_problems(parse_config("experiment = convective"));
  REQUIRE(both.size() == 2u);
  CHECK(both[0].solver.method == Method::Zarantonello);
  CHECK(both[1].solver.method == Method::KacanovConvective);
  const auto custom = make_problems(parse_config("experiment = custom\nproblem.force_y = 2\nmesh.divisions = 3"));
  CHECK(custom[0].f({0.1, 0.2})[1] == 2.0);
  CHECK(custom[0].initial_divisions == 3);
}

TEST_CASE("csv writers") {
  std::ostringstream empty;
  write_run_log_csv(empty, {});
  CHECK(empty.str() == "step,noe,m,nit,E_pde,E_ic,eta,res_pde,res_ic,error_h1,wall_s\n");

  Problem p = experiment_channel();
  p.adapt.max_outer = 2;
  const AdaptiveState st = ailfem_run(p);
  std::ostringstream log;
  write_run_log_csv(log, st.history);
  std::istringstream in(log.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  // error_h1 is the tenth column
  std::vector<std::string> cells;
  std::stringstream rs(row);
  for (std::string cell; std::getline(rs, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() == 11u);
  CHECK_FALSE(cells[9].empty());

  Problem q = experiment_convective(Method::KacanovConvective);
  q.adapt.max_outer = 1;
  std::ostringstream conv;
  write_run_log_csv(conv, ailfem_run(q).history, false);
  std::istringstream cin(conv.str());
  std::getline(cin, header);
  std::getline(cin, row);
  CHECK(row.find(",,") != std::string::npos);  // empty error_h1
  CHECK(row.back() == ',');                    // wall time suppressed

  std::ostringstream cv, it;
  write_convergence_csv(cv, st.history);
  CHECK(cv.str().rfind("noe,error_h1,estimator\n", 0) == 0);
  write_iterations_csv(it, st.iterations);
  CHECK(it.str().rfind("step,inner,energy,res_pde,res_ic,estimator,increment\n", 0) == 0);
}

TEST_CASE("determinism") {
  Problem p = experiment_channel();
  p.adapt.max_elements = 120;
  std::ostringstream a, b;
  write_run_log_csv(a, ailfem_run(p).history, false);
  write_run_log_csv(b, ailfem_run(p).history, false);
  CHECK(a.str() == b.str());
}

TEST_CASE("directory lock") {
  const auto dir = scratch("lock");
  {
    DirectoryLock first(dir);
    CHECK(std::filesystem::exists(dir / ".bingham.lock"));
    CHECK_THROWS_WITH_AS(DirectoryLock{dir}, doctest::Contains("locked"), std::runtime_error);
  }
  CHECK_FALSE(std::filesystem::exists(dir / ".bingham.lock"));
  CHECK_NOTHROW(DirectoryLock{dir});
}

TEST_CASE("output root override") {
  RunConfig c;
  c.directory = "runs/a";
  ::unsetenv("BINGHAM_OUTPUT_ROOT");
  CHECK(resolve_output_directory(c) == std::filesystem::path("runs/a"));
  ::setenv("BINGHAM_OUTPUT_ROOT", "/tmp/root", 1);
  CHECK(resolve_output_directory(c) == std::filesystem::path("/tmp/root/runs/a"));
  c.directory = "/abs/dir";
  CHECK(resolve_output_directory(c) == std::filesystem::path("/abs/dir"));
  ::unsetenv("BINGHAM_OUTPUT_ROOT");
}

}  // TEST_SUITE
