#pragma once

/** @file model.hpp
    @brief Problem definitions: coefficient fields, pressure nonlinearities,
           inter-continuum transfer laws, sources, and run configuration.
*/

#include <string>
#include <vector>

#include "cemrich/mesh.hpp"

namespace cemrich {

/// Per-fine-cell conductivity scale kappa_i, row-major from the lower-left cell.
struct CoefficientField {
  int nx = 0, ny = 0;
  std::vector<double> values;

  double at(int cell) const { return values[cell]; }
};

/// Reads the plain-text raster format: first line "nx ny", then nx*ny positive
/// decimals row-major from the lower-left. Dimensions must match the grid cells.
CoefficientField load_field_raster(const std::string& path, const StructuredGrid& grid);

/// Uniform field, mostly for tests and manufactured problems.
CoefficientField uniform_field(const StructuredGrid& grid, double value);

enum class NonlinTag { Constant, Exponential, InverseShift, Gardner };

/// Pressure factor mu(p) of the conductivity kappa(x) mu(p).
struct Nonlinearity {
  NonlinTag tag = NonlinTag::Constant;
  double alpha = 0.0; ///< Gardner exponent

  double operator()(double p) const;
};

double eval_conductivity(const Nonlinearity& nl, double kappa_cell, double p);

enum class TransferTag { Zero, Constant, ScaledInverseShift };

/// Coefficient Q_il(p_i, p_l) of the exchange term Q_il (p_i - p_l).
struct TransferLaw {
  TransferTag tag = TransferTag::Zero;
  double beta = 0.0;

  double operator()(double p_i, double p_l) const;
};

double eval_transfer(const TransferLaw& law, double p_i, double p_l);

/// Ordered-pair table of transfer laws for N continua; the diagonal is unused.
struct TransferTable {
  int n_continua = 1;
  std::vector<TransferLaw> laws; ///< row-major (i, l)

  static TransferTable zero(int n_continua);
  const TransferLaw& at(int i, int l) const { return laws[i * n_continua + l]; }
  TransferLaw& at(int i, int l) { return laws[i * n_continua + l]; }
  bool all_zero() const;
  /// True when the assembled coupling operator is symmetric for every state.
  bool symmetric() const;
};

enum class SourceTag { Constant, SeparableSine, ExpSum };

struct SourceFn {
  SourceTag tag = SourceTag::Constant;
  double scale = 0.0;

  double operator()(double t, double x, double y) const;
};

/// One fully-specified problem: N coupled Richards equations on [0,1]^2 with
/// zero Dirichlet data and zero initial state.
struct ProblemSpec {
  std::string name;
  int n_continua = 1;
  std::vector<CoefficientField> fields;
  std::vector<Nonlinearity> nonlinearities;
  TransferTable transfer;
  std::vector<SourceFn> sources;
  bool transient = false;
  double final_time = 0.0;
  int steps = 0;

  double tau() const { return final_time / steps; }
};

/// Parsed run configuration (mirrors the JSON config schema).
struct RunConfig {
  std::string experiment; ///< "E1".."E4", empty for custom runs
  int n = 128;
  int Hdiv = 8;
  int m = -1; ///< -1 = auto (default_layers)
  int n_basis = 4;
  double delta0 = 1e-5;
  int max_picard = 50;

  // custom-problem description (used when experiment is empty)
  struct Custom {
    std::vector<std::string> field_paths;
    std::vector<Nonlinearity> nonlinearities;
    struct TransferEntry {
      int i = 0, l = 0;
      TransferLaw law;
    };
    std::vector<TransferEntry> transfer;
    std::vector<SourceFn> sources;
    bool transient = false;
    double final_time = 0.0;
    int steps = 0;
  } custom;

  int layers() const { return m >= 0 ? m : default_layers(Hdiv); }
};

/// Parses a JSON config document; unknown keys are errors.
RunConfig parse_config(const std::string& json_text);
std::string serialize_config(const RunConfig& config);

/// Names of the built-in experiments, in order.
const std::vector<std::string>& builtin_experiment_names();

/// Builds the ProblemSpec of a run configuration, loading rasters from data_dir
/// for built-in experiments (or from the custom field paths).
ProblemSpec make_problem(const RunConfig& config, const StructuredGrid& grid,
                         const std::string& data_dir);

/// All four built-in experiment specs at grid size n.
std::vector<ProblemSpec> builtin_experiments(const StructuredGrid& grid,
                                             const std::string& data_dir);

} // namespace cemrich
