#include "rlcm/probe.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rlcm/errors.hpp"
#include "rlcm/rng.hpp"

namespace rlcm::probe {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

void check_dims(const ProbeParams& params, std::span<const double> features) {
  if (static_cast<int>(features.size()) != params.feature_dim)
    throw ValidationError("features", "dimension mismatch with probe");
}

}  // namespace

ProbeParams init_probe(int hidden, int feature_dim, std::uint64_t seed, double scale) {
  ProbeParams p(hidden, feature_dim);
  rng::Stream s(rng::derive_seed(seed, "probe-init"));
  for (double& w : p.w1) w = scale * s.normal();
  for (double& b : p.b1) b = scale * s.normal();
  for (double& w : p.w2) w = scale * s.normal();
  p.b2 = 0.0;
  return p;
}

double probe_forward(const ProbeParams& params, std::span<const double> features) {
  check_dims(params, features);
  double z2 = params.b2;
  for (int h = 0; h < params.hidden; ++h) {
    double z1 = params.b1[h];
    const double* row = &params.w1[static_cast<std::size_t>(h) * params.feature_dim];
    for (int j = 0; j < params.feature_dim; ++j) z1 += row[j] * features[j];
    z2 += params.w2[h] * std::tanh(z1);
  }
  return sigmoid(z2);
}

double probe_loss(std::span<const double> confs, std::span<const double> targets) {
  if (confs.size() != targets.size())
    throw ValidationError("probe_loss", "confs and targets length mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < confs.size(); ++i) {
    const double c = confs[i];
    const double y = targets[i];
    if (!(c > 0.0 && c < 1.0))
      throw ValidationError("probe_conf", "out of (0,1)");
    if (!(y >= 0.0 && y <= 1.0))
      throw ValidationError("mc_target", "out of [0,1]");
    loss -= y * std::log(c) + (1.0 - y) * std::log(1.0 - c);
  }
  return loss;
}

double probe_loss_and_grad(const ProbeParams& params,
                           std::span<const ProbeSample> batch, ProbeGradient* grad) {
  if (batch.empty()) throw ValidationError("batch", "empty probe batch");
  if (grad) {
    grad->w1.assign(params.w1.size(), 0.0);
    grad->b1.assign(params.b1.size(), 0.0);
    grad->w2.assign(params.w2.size(), 0.0);
    grad->b2 = 0.0;
  }
  const int H = params.hidden;
  const int D = params.feature_dim;
  std::vector<double> a1(H);
  double loss = 0.0;
  for (const ProbeSample& sample : batch) {
    check_dims(params, sample.features);
    double z2 = params.b2;
    for (int h = 0; h < H; ++h) {
      double z1 = params.b1[h];
      const double* row = &params.w1[static_cast<std::size_t>(h) * D];
      for (int j = 0; j < D; ++j) z1 += row[j] * sample.features[j];
      a1[h] = std::tanh(z1);
      z2 += params.w2[h] * a1[h];
    }
    const double c = sigmoid(z2);
    const double y = sample.target;
    // BCE with the sigmoid folded in: d loss / d z2 = c - y
    loss -= y * std::log(c) + (1.0 - y) * std::log(1.0 - c);
    if (!grad) continue;
    const double dz2 = c - y;
    grad->b2 += dz2;
    for (int h = 0; h < H; ++h) {
      grad->w2[h] += dz2 * a1[h];
      const double dz1 = dz2 * params.w2[h] * (1.0 - a1[h] * a1[h]);
      grad->b1[h] += dz1;
      double* row = &grad->w1[static_cast<std::size_t>(h) * D];
      for (int j = 0; j < D; ++j) row[j] += dz1 * sample.features[j];
    }
  }
  return loss;
}

void probe_update(ProbeParams& params, std::span<const ProbeSample> batch, double lr,
                  ProbeGradient* velocity, double momentum) {
  if (batch.empty()) throw ValidationError("batch", "empty probe batch");
  if (lr < 0.0) throw ValidationError("lr", "must be >= 0");
  ProbeGradient grad;
  probe_loss_and_grad(params, batch, &grad);
  // step on the mean per-sample gradient so lr is batch-size independent
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad.w1) g *= inv_n;
  for (double& g : grad.b1) g *= inv_n;
  for (double& g : grad.w2) g *= inv_n;
  grad.b2 *= inv_n;

  if (velocity && momentum > 0.0) {
    if (velocity->w1.size() != params.w1.size()) {
      velocity->w1.assign(params.w1.size(), 0.0);
      velocity->b1.assign(params.b1.size(), 0.0);
      velocity->w2.assign(params.w2.size(), 0.0);
      velocity->b2 = 0.0;
    }
    for (std::size_t i = 0; i < grad.w1.size(); ++i)
      velocity->w1[i] = momentum * velocity->w1[i] + grad.w1[i];
    for (std::size_t i = 0; i < grad.b1.size(); ++i)
      velocity->b1[i] = momentum * velocity->b1[i] + grad.b1[i];
    for (std::size_t i = 0; i < grad.w2.size(); ++i)
      velocity->w2[i] = momentum * velocity->w2[i] + grad.w2[i];
    velocity->b2 = momentum * velocity->b2 + grad.b2;
    for (std::size_t i = 0; i < params.w1.size(); ++i) params.w1[i] -= lr * velocity->w1[i];
    for (std::size_t i = 0; i < params.b1.size(); ++i) params.b1[i] -= lr * velocity->b1[i];
    for (std::size_t i = 0; i < params.w2.size(); ++i) params.w2[i] -= lr * velocity->w2[i];
    params.b2 -= lr * velocity->b2;
  } else {
    for (std::size_t i = 0; i < params.w1.size(); ++i) params.w1[i] -= lr * grad.w1[i];
    for (std::size_t i = 0; i < params.b1.size(); ++i) params.b1[i] -= lr * grad.b1[i];
    for (std::size_t i = 0; i < params.w2.size(); ++i) params.w2[i] -= lr * grad.w2[i];
    params.b2 -= lr * grad.b2;
  }
}

void save_probe(const ProbeParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << "rlcm-probe 1 " << params.hidden << ' ' << params.feature_dim << '\n';
  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << '\n';
  };
  for (double v : params.w1) emit(v);
  for (double v : params.b1) emit(v);
  for (double v : params.w2) emit(v);
  emit(params.b2);
}

ProbeParams load_probe(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0, hidden = 0, dim = 0;
  in >> magic >> version >> hidden >> dim;
  if (!in || magic != "rlcm-probe" || version != 1)
    throw ParseError("bad probe checkpoint header: " + path);
  ProbeParams params(hidden, dim);
  auto read = [&](double& v) {
    if (!(in >> v)) throw ParseError("truncated probe checkpoint: " + path);
  };
  for (double& v : params.w1) read(v);
  for (double& v : params.b1) read(v);
  for (double& v : params.w2) read(v);
  read(params.b2);
  return params;
}

}  // namespace rlcm::probe
