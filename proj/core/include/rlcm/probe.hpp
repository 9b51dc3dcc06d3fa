#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rlcm::probe {

// 2-layer tanh MLP mapping budget features to a confidence in (0,1):
// sigmoid(w2 . tanh(W1*phi + b1) + b2).
struct ProbeParams {
  int hidden = 0;
  int feature_dim = 0;
  std::vector<double> w1;  // hidden x feature_dim, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  ProbeParams() = default;
  ProbeParams(int h, int dim)
      : hidden(h), feature_dim(dim),
        w1(static_cast<std::size_t>(h) * dim, 0.0), b1(h, 0.0), w2(h, 0.0) {}

  std::size_t size() const { return w1.size() + b1.size() + w2.size() + 1; }
};

// Small random init (zero output bias, so initial confidence ~0.5).
ProbeParams init_probe(int hidden, int feature_dim, std::uint64_t seed,
                       double scale = 0.1);

double probe_forward(const ProbeParams& params, std::span<const double> features);

struct ProbeSample {
  std::vector<double> features;
  double target = 0.0;  // soft label in [0,1]
};

// Binary cross-entropy with soft targets, summed over samples:
// sum_i -[y_i log c_i + (1-y_i) log(1-c_i)].
// Confidences exactly 0 or 1 are rejected (sigmoid output cannot produce
// them).
double probe_loss(std::span<const double> confs, std::span<const double> targets);

// Summed BCE loss of the probe on a batch, and its exact gradient in the
// same layout as ProbeParams.
struct ProbeGradient {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};
double probe_loss_and_grad(const ProbeParams& params,
                           std::span<const ProbeSample> batch,
                           ProbeGradient* grad);

// One descent step on the mean per-sample BCE loss (lr is batch-size
// independent). `velocity` carries momentum state across calls; pass
// nullptr (or momentum 0) for plain SGD. Throws on an empty batch.
// Policy parameters are untouched by construction: probe gradients never
// reach them.
void probe_update(ProbeParams& params, std::span<const ProbeSample> batch,
                  double lr, ProbeGradient* velocity = nullptr,
                  double momentum = 0.0);

void save_probe(const ProbeParams& params, const std::string& path);
ProbeParams load_probe(const std::string& path);

}  // namespace rlcm::probe
