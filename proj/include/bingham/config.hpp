#pragma once

#include <filesystem>
#include <numbers>
#include <optional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bingham/ailfem.hpp"

namespace bingham {

enum class Experiment { Channel, Convective, Custom };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& s);

/// Flat dotted-key run configuration (`adapt.theta = 0.5`).
struct RunConfig {
  Experiment experiment = Experiment::Channel;

  double sigma = 0.3;
  double nu = 1.0;
  double kappa = std::numbers::sqrt2;  // channel default; 1 otherwise
  int m0 = 0;
  double c_b = 1.0;  // trilinear bound, Zarantonello diagnostics only
  double c_p = 1.0;  // Poincare constant, bounds ||f||_* by c_p ||f||_2

  // "both" runs zarantonello and kacanov_convective one after the other
  // (convective experiment only).
  std::string method = "kacanov";
  DeltaRule delta_rule = DeltaRule::AdaptiveN;
  double delta = 0.5;
  int max_inner = 200;
  bool force_min_one_step = true;

  double theta = 0.5;
  Marking marking = Marking::Doerfler;
  double c_graph = 4.0;
  double criterion_exponent = 1.0;
  ZetaVariant zeta_variant = ZetaVariant::InverseN;
  JumpOwnership jumps = JumpOwnership::Split;
  int projection_degree = 1;
  std::optional<bool> estimator_convection;  // "model" when unset
  int divisions = 4;

  long max_elements = 2000;
  int max_outer = 1000;

  // custom experiment: constant body force, homogeneous boundary data
  double force_x = 1.0;
  double force_y = 0.0;
  bool convection = false;

  std::string directory = "results";
  int vtk_stride = 0;  // 0: final state only
  bool wall_time = true;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Defaults for an experiment (method, kappa).
RunConfig default_config(Experiment e);

/// Parses `key = value` lines; '#' starts a comment.  `experiment` is read
/// first so the other defaults follow it.  Unknown keys and bad values throw
/// std::invalid_argument naming the key and the accepted values.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& c);

/// One Problem per method (two for method = both).
std::vector<Problem> make_problems(const RunConfig& c);

/// Output directory with the BINGHAM_OUTPUT_ROOT override applied to relative paths.
std::filesystem::path resolve_output_directory(const RunConfig& c);

/// Columns: step,noe,m,nit,E_pde,E_ic,eta,res_pde,res_ic,error_h1,wall_s
void write_run_log_csv(std::ostream& os, const std::vector<AdaptiveRecord>& history,
                       bool wall_time = true);
/// Columns: noe,error_h1,estimator (last record per mesh)
void write_convergence_csv(std::ostream& os, const std::vector<AdaptiveRecord>& history);
/// Columns: step,inner,energy,res_pde,res_ic,estimator,increment
void write_iterations_csv(std::ostream& os, const std::vector<IterationRow>& rows);

/// Exclusive lock file in a directory; released on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace bingham
