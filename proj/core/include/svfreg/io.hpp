#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svfreg/grid.hpp"
#include "svfreg/optim.hpp"
#include "svfreg/pdm.hpp"

namespace svfreg {

/// Grid-field file: magic "SVF1", little-endian u32 V, u32 d(=3), then
/// 3*V^3 little-endian IEEE f32 in storage order (node-major, z fastest,
/// xyz contiguous per node). Values are computed in f64 and truncated to
/// f32 on save, so save -> load -> save round-trips bit-exactly.
void save_grid_field(const std::string& path, const GridField& field);
GridField load_grid_field(const std::string& path);

/// Model file: magic "PDM1", u32 V, u32 K, u64 n_samples, then mean,
/// eigenvalues, components as little-endian f64.
void save_pdm_model(const std::string& path, const PdmModel& model);
PdmModel load_pdm_model(const std::string& path);

/// Shortest round-trip decimal formatting (std::to_chars); all text output
/// funnels through this so files are byte-deterministic.
std::string format_double(double value);

/// Run configuration: flat JSON with exactly these keys (all optional,
/// unknown keys rejected). lambda1 defaults per loss when absent.
struct RunConfig {
  LossKind loss = LossKind::MSE;
  std::optional<double> lambda1;
  double lambda2 = 10.0;
  double lambda3 = 100.0;
  double sinkhorn_epsilon = 1e-4;
  double sinkhorn_p = 1.0;
  int sinkhorn_max_iterations = 1000;
  double sinkhorn_tolerance = 1e-6;
  std::string sinkhorn_cost = "powered-euclidean";  // or "p-norm"
  int grid_size = 64;
  int squaring_steps = 7;
  int kernel_size = 15;
  double kernel_sigma = 4.0;
  double adam_learning_rate = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps_hat = 1e-8;
  int adam_max_iterations = 500;
  double adam_stop_tolerance = 1e-6;
  int sample_count = 5000;
  std::uint64_t seed = 0;

  double resolved_lambda1() const {
    return lambda1 ? *lambda1 : default_lambda1(loss);
  }
  RegistrationConfig to_registration_config() const;
};

RunConfig load_run_config(const std::string& path);

/// CSV writer: header row then data rows, values via format_double.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace svfreg
