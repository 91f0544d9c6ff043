// bingham: run the adaptive Bingham solver from a flat key = value config.

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bingham/ailfem.hpp"
#include "bingham/config.hpp"
#include "bingham/forms.hpp"

namespace fs = std::filesystem;
using namespace bingham;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void close_checked(std::ofstream& out, const fs::path& p) {
  out.close();
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::string text = read_file(path);
  for (const std::string& o : overrides) text += "\n" + o;
  return parse_config(text);
}

// ||f||_* bounded by C_P ||f||_2; only feeds the diagnostics file.
void write_zarantonello_diagnostics(const fs::path& file, const RunConfig& c, const Problem& p,
                                    const AdaptiveState& state) {
  auto out = open_out(file);
  double f2 = 0.0;
  const auto samples = sample_at_quadrature(*state.space, p.f);
  for (std::size_t cell = 0; cell < state.mesh->num_cells(); ++cell) {
    const ElementData e = state.space->element(cell);
    for (int q = 0; q < kNumQuad; ++q) {
      const Vec2& v = samples[cell * kNumQuad + q];
      f2 += e.jw[q] * (v[0] * v[0] + v[1] * v[1]);
    }
  }
  const double f_dual = c.c_p * std::sqrt(f2);
  out << "C_B = " << c.c_b << "\nC_P = " << c.c_p << "\nf_dual_bound = " << f_dual << '\n';
  try {
    RegularisedLaw law = p.law;
    law.m = state.m;
    const ZarantonelloConstants z = zarantonello_constants(law, c.c_b, f_dual);
    out << "radius_min = " << z.radius_min << "\nradius_max = " << z.radius_max << "\nnu_F = " << z.nu_f
        << "\nL_F = " << z.l_f << "\ndelta_max = " << z.delta_max << "\ndelta_used = "
        << p.solver.delta_for(state.m) << '\n';
  } catch (const SmallDataError& e) {
    out << "small_data = violated (" << e.what() << ")\n";
  }
  close_checked(out, file);
}

enum class Outputs { All, Csv, Vtk };

int execute(const RunConfig& config, Outputs what) {
  const fs::path root = resolve_output_directory(config);
  DirectoryLock lock(root);
  {
    const fs::path used = root / "config.used";
    auto out = open_out(used);
    out << serialize_config(config);
    close_checked(out, used);
  }
  const auto problems = make_problems(config);
  for (const Problem& problem : problems) {
    const fs::path dir = problems.size() > 1 ? root / to_string(problem.solver.method) : root;
    fs::create_directories(dir);
    const bool vtk = what != Outputs::Csv;
    const bool csv = what != Outputs::Vtk;

    auto on_record = [&](const AdaptiveState& s, const AdaptiveRecord& r) {
      std::cerr << problem.name << '/' << to_string(problem.solver.method) << " step " << r.step
                << " noe " << r.noe << " m " << r.m << " nit " << r.nit << " E " << (r.e_pde + r.e_ic)
                << (r.refined ? " refine" : " escalate") << '\n';
      if (vtk && config.vtk_stride > 0 && r.step % config.vtk_stride == 0) {
        const fs::path f = dir / ("state_" + std::to_string(r.step) + ".vtk");
        auto out = open_out(f);
        write_vtk_fields(out, *s.space, s.fields);
        close_checked(out, f);
      }
    };
    const AdaptiveState state = ailfem_run(problem, on_record);

    if (csv) {
      const fs::path log = dir / "run_log.csv";
      auto out = open_out(log);
      write_run_log_csv(out, state.history, config.wall_time);
      close_checked(out, log);
      const fs::path conv = dir / "convergence.csv";
      auto cout = open_out(conv);
      write_convergence_csv(cout, state.history);
      close_checked(cout, conv);
      const fs::path it = dir / "iterations.csv";
      auto iout = open_out(it);
      write_iterations_csv(iout, state.iterations);
      close_checked(iout, it);
      if (problem.solver.method == Method::Zarantonello)
        write_zarantonello_diagnostics(dir / "zarantonello.txt", config, problem, state);
    }
    if (vtk) {
      const fs::path f = dir / "final.vtk";
      auto out = open_out(f);
      write_vtk_fields(out, *state.space, state.fields);
      close_checked(out, f);
    }
  }
  std::cout << root.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive iteratively linearised finite elements for steady Bingham flow"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "run an experiment; writes run_log.csv, convergence.csv, iterations.csv, VTK");
  run->add_option("config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "extra 'key = value' lines, applied after the file");

  std::string experiment = "channel";
  auto* defaults = app.add_subcommand("describe-defaults", "print the default config for an experiment");
  defaults->add_option("--experiment", experiment, "channel, convective or custom");

  std::string format;
  auto* exp = app.add_subcommand("export", "run an experiment and write only one output format");
  exp->add_option("config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  exp->add_option("--format", format, "csv or vtk")->required()->check(CLI::IsMember({"csv", "vtk"}));
  exp->add_option("--set", overrides, "extra 'key = value' lines, applied after the file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*defaults) {
      std::cout << serialize_config(default_config(parse_experiment(experiment)));
      return 0;
    }
    const RunConfig config = load_config(config_path, overrides);
    if (*run) return execute(config, Outputs::All);
    return execute(config, format == "csv" ? Outputs::Csv : Outputs::Vtk);
  } catch (const std::exception& e) {
    std::cerr << "bingham: " << e.what() << '\n';
    return 1;
  }
}
