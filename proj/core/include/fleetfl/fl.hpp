#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fleetfl/rng.hpp"
#include "fleetfl/trace.hpp"

namespace fleetfl::fl {

struct Shape {
  std::size_t input_dim = 1;
  std::size_t hidden_dim = 16;
  std::size_t output_dim = 1;

  /// 3(H*I + H*H + 2H) + O*H + O
  std::size_t parameter_count() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Flat GRU weights in canonical order:
///   W_i (3H x I), W_h (3H x H), b_i (3H), b_h (3H), W_o (O x H), b_o (O).
/// Matrices are row-major; gate blocks are stacked reset, update, candidate.
struct ModelParams {
  Shape shape;
  Eigen::VectorXd w;
};

struct HyperParams {
  double mu = 0.1;
  double lr = 1e-3;
  double momentum = 0.95;
  std::size_t batch_size = 32;
};

struct AgentProfile {
  double rho = 0.5e9;  // cycles/s
  double eta = 2.5e4;  // cycles/sample
};

struct LocalUpdate {
  std::size_t agent = 0;
  ModelParams w;
  std::int64_t iterations = 0;
  double gamma = 0.0;
  std::size_t sample_count = 0;
  double sample_fraction = 0.0;
  double loss = 0.0;  // mean mini-batch MSE over the local steps
};

/// Weights U(-1/sqrt(H), 1/sqrt(H)), biases zero. Throws InvalidArgument on a zero dim.
ModelParams init_model(const Shape& shape, std::uint64_t seed);

/// Runs the GRU over `x` (lag steps of input_dim values, oldest first) from a
/// zero state and applies the head. Requires output_dim == 1.
double predict(const ModelParams& m, std::span<const double> x);

/// Mean squared error over the samples.
double mse(const ModelParams& m, std::span<const trace::Sample> batch);

/// MSE + (mu/2)||w - w_k||^2. The proximal term is skipped when mu == 0.
double local_objective(const ModelParams& m, std::span<const trace::Sample> batch,
                       const ModelParams& anchor, double mu);

/// Gradient of the MSE term by backpropagation through time.
Eigen::VectorXd mse_gradient(const ModelParams& m, std::span<const trace::Sample> batch);

/// Gradient of local_objective. With mu == 0 this is exactly mse_gradient.
Eigen::VectorXd gradient(const ModelParams& m, std::span<const trace::Sample> batch,
                         const ModelParams& anchor, double mu);

/// Mini-batches drawn without replacement within an epoch; each epoch is a
/// fresh shuffle. A tail shorter than the batch starts the next epoch.
class MiniBatchSampler {
 public:
  MiniBatchSampler(std::size_t n, std::size_t batch_size, Rng rng);
  std::span<const std::size_t> next();

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t pos_;
  Rng rng_;
};

/// `iterations` momentum-SGD steps on local_objective anchored at `global`.
/// Throws InvalidArgument on an empty dataset or iterations < 1.
LocalUpdate train_local(const ModelParams& global, std::span<const trace::Sample> data,
                        std::int64_t iterations, const HyperParams& hp, Rng rng);

/// ||grad(w_v)|| / ||grad(w_k)|| over the full dataset; 0 when the denominator is 0.
double inexactness(const ModelParams& local, const ModelParams& global,
                   std::span<const trace::Sample> data, double mu);

/// Coordinate-wise mean: summed in ascending agent order, then divided by the count.
ModelParams aggregate(std::span<const LocalUpdate> updates);

struct IterationBudget {
  std::int64_t iterations = 1;
  bool deadline_risk = false;  // the budget does not cover a single step
};

IterationBudget compute_iterations(double d_cmp, double d_cmp_per_iter);

/// eta * |batch| / rho, seconds.
double per_iter_compute_delay(double eta, std::size_t batch_samples, double rho);

double payload_bits(const ModelParams& m, double fpp);

/// FNV-1a over the raw little-endian bytes of the weights.
std::uint64_t checksum(const ModelParams& m);

/// Layout: "FFLW", u32 version (1), u32 input_dim, u32 hidden_dim,
/// u32 output_dim, u64 count, then count little-endian float64 values.
void write_checkpoint(std::ostream& out, const ModelParams& m);
ModelParams read_checkpoint(std::istream& in);

}  // namespace fleetfl::fl
