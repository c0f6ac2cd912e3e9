#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvlab/errors.hpp"
#include "curvlab/numerics.hpp"

namespace curvlab::cli {

using json = nlohmann::json;

/// Schema violation; the message starts with the offending key path.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : InvalidArgument(key + ": " + message), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct Sampling {
  unsigned long long seed = 0;
  int count = 0;
};

struct WeightExpect {
  std::optional<double> nakano_delta;
  double nakano_rel_tol = 0.02;
  double nakano_abs_tol = 0.0;
  std::optional<double> griffiths_delta;
  double griffiths_abs_tol = 1e-6;
  std::optional<double> max_block_norm;   ///< relative to |M|, both routes
  std::optional<double> hormander_gap;    ///< max |lhs - rhs| / scale
  std::optional<double> lower_bound_gap;
  std::optional<double> schur_constant;   ///< D = c I at every probe
  double schur_tol = 1e-8;
};

struct WeightEntry {
  std::string name;
  std::vector<double> params;
  int base_dim = 1;
  int fiber_dim = 1;
  WeightExpect expect;
  /// kernel-psh only: complex line t = center + s * direction
  CVector slice_center;
  CVector slice_direction;

  std::string label() const;
};

struct DomainConfig {
  numerics::DomainKind kind = numerics::DomainKind::disc;
  double radius = 0.0;
  bool gaussian_decay = false;

  numerics::DomainSpec spec(int fiber_dim, int quad_order) const;
};

struct CurvatureConfig {
  std::vector<WeightEntry> weights;
  DomainConfig domain;
  std::vector<int> max_degrees;
  int quad_order = 0;
  std::vector<std::vector<CVector>> base_points;  ///< per weight
  bool both_routes = true;
  bool hormander = false;
  bool lower_bound = false;
  bool dual = false;
  std::optional<Sampling> samples;
  int dual_samples = 50;
  double hormander_tol = 1e-8;
  double lower_bound_tol = 1e-6;
  double dual_tol = 1e-10;
  double route_noise = 1e-9;
  bool export_blocks = false;
  std::optional<double> expect_route_deviation;
  bool expect_route_monotone = false;
  bool expect_strict_positive = false;
};

struct MapEntry {
  std::string name;
  CVector constant;
  CMatrix linear;               ///< n x m
  std::vector<CMatrix> quadratic;  ///< per output, m x m
};

struct PairExpect {
  std::size_t weight = 0;
  std::string map;
  std::optional<double> kernel_fock_shift;  ///< epsilon of the Fock oracle
  double kernel_tol = 1e-4;
  std::optional<double> log_hessian;
  double log_hessian_tol = 1e-3;
};

struct KernelPshConfig {
  std::vector<WeightEntry> weights;
  std::vector<MapEntry> maps;
  DomainConfig domain;
  int max_degree = 0;
  int quad_order = 0;
  double half_width = 0.5;
  int points = 21;
  bool log = true;
  bool negative_control = false;
  bool expect_negative_flagged = false;
  std::vector<PairExpect> expect;
};

struct FibrationConfig {
  int twist = 3;
  std::string potential;
  std::vector<double> potential_params;
  double conformal = 0.0;  ///< l psi gains conformal * |t|^2
  cplx harmonic_linear = 0.0;
  cplx harmonic_quadratic = 0.0;
  int quad_order = 40;
  std::vector<CVector> base_points;
  bool gram = false;
  bool chart_independence = false;
  bool det_transform = false;
  bool rank = false;
  bool nakano = false;
  bool pluriharmonic_invariance = false;
  cplx probe_linear{0.3, -0.2};
  cplx probe_quadratic{0.1, 0.05};
  std::optional<Sampling> det_samples;
  std::vector<int> rank_levels;
  std::optional<double> expect_gram_scale;
  double gram_tol = 1e-6;
  double chart_tol = 1e-8;
  double det_tol = 1e-10;
  double invariance_tol = 1e-8;
  std::optional<double> expect_nakano_delta;
  double nakano_tol = 1e-3;
  bool expect_nakano_positive = false;
  std::optional<double> expect_route_deviation;
};

struct ValidateConfig {
  std::vector<WeightEntry> weights;
  Sampling probes;
  double t_radius = 1.0;
  double z_radius = 1.5;
  double derivative_tol = 1e-4;
  double schur_fd_tol = 1e-8;
};

struct DeterminismConfig {
  std::vector<std::filesystem::path> configs;
  std::vector<int> threads;
  int repeats = 2;
};

struct Config {
  std::string command;
  std::string name = "run";
  std::optional<std::string> output;
  std::filesystem::path source_dir;

  std::optional<CurvatureConfig> curvature;
  std::optional<KernelPshConfig> kernel_psh;
  std::optional<FibrationConfig> fibration;
  std::optional<ValidateConfig> validate;
  std::optional<DeterminismConfig> determinism;

  /// The config as read, with every defaulted key filled in.
  json echo;
};

/// Parses and validates. Throws ConfigError naming the key.
Config parse_config(const json& doc, const std::filesystem::path& source_dir = {});
Config load_config(const std::filesystem::path& path);

}  // namespace curvlab::cli
