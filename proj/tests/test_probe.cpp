#include "rlcm/probe.hpp"

#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "rlcm/errors.hpp"
#include "rlcm/policy.hpp"
#include "rlcm/rng.hpp"

using namespace rlcm;
using namespace rlcm::probe;

namespace {

ProbeParams random_probe(rng::Stream& s, int hidden, int dim, double scale = 0.5) {
  ProbeParams p(hidden, dim);
  for (double& w : p.w1) w = scale * s.normal();
  for (double& b : p.b1) b = scale * s.normal();
  for (double& w : p.w2) w = scale * s.normal();
  p.b2 = scale * s.normal();
  return p;
}

}  // namespace

TEST_CASE("all-zero probe outputs 0.5 for any input") {
  ProbeParams p(32, 16);
  rng::Stream s(1);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> phi(16);
    for (double& x : phi) x = s.normal();
    CHECK(probe_forward(p, phi) == 0.5);
  }
}

TEST_CASE("zero weights with output bias ln 3 give 0.75") {
  ProbeParams p(8, 4);
  p.b2 = std::log(3.0);
  std::vector<double> phi{1.0, -2.0, 0.5, 3.0};
  CHECK(probe_forward(p, phi) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("probe output is strictly inside (0,1)") {
  rng::Stream s(2);
  for (int i = 0; i < 50; ++i) {
    ProbeParams p = random_probe(s, 16, 8, 2.0);
    std::vector<double> phi(8);
    for (double& x : phi) x = 3.0 * s.normal();
    const double c = probe_forward(p, phi);
    CHECK(c > 0.0);
    CHECK(c < 1.0);
  }
}

TEST_CASE("probe_loss hand values") {
  CHECK(probe_loss(std::vector<double>{1.0 - 1e-12}, std::vector<double>{1.0}) < 1e-11);
  CHECK(probe_loss(std::vector<double>{0.5}, std::vector<double>{0.5}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(probe_loss(std::vector<double>{0.5}, std::vector<double>{0.75}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // summed over samples
  CHECK(probe_loss(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.75}) ==
        doctest::Approx(2.0 * std::log(2.0)));
  CHECK_THROWS_AS(probe_loss(std::vector<double>{0.0}, std::vector<double>{0.5}),
                  ValidationError);
  CHECK_THROWS_AS(probe_loss(std::vector<double>{1.0}, std::vector<double>{0.5}),
                  ValidationError);
}

TEST_CASE("BCE is minimized at C = Y") {
  for (double y : {0.25, 0.5, 0.9}) {
    const double at_y = probe_loss(std::vector<double>{y}, std::vector<double>{y});
    for (double delta : {-0.1, 0.1}) {
      const double c = y + delta;
      if (c <= 0.0 || c >= 1.0) continue;
      CHECK(probe_loss(std::vector<double>{c}, std::vector<double>{y}) > at_y);
    }
  }
}

TEST_CASE("full probe gradient matches central finite differences") {
  rng::Stream s(3);
  const double h = 1e-5;
  double max_rel = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    ProbeParams p = random_probe(s, 6, 5);
    std::vector<ProbeSample> batch(4);
    for (ProbeSample& sample : batch) {
      sample.features.resize(5);
      for (double& x : sample.features) x = s.normal();
      sample.target = s.uniform();
    }
    ProbeGradient g;
    probe_loss_and_grad(p, batch, &g);

    auto loss_at = [&](const ProbeParams& q) { return probe_loss_and_grad(q, batch, nullptr); };
    auto check_component = [&](double analytic, double* slot, ProbeParams& q) {
      const double orig = *slot;
      *slot = orig + h;
      const double up = loss_at(q);
      *slot = orig - h;
      const double dn = loss_at(q);
      *slot = orig;
      const double fd = (up - dn) / (2.0 * h);
      const double rel = std::abs(analytic - fd) / std::max({1e-4, std::abs(analytic), std::abs(fd)});
      max_rel = std::max(max_rel, rel);
    };
    for (std::size_t i = 0; i < p.w1.size(); ++i) check_component(g.w1[i], &p.w1[i], p);
    for (std::size_t i = 0; i < p.b1.size(); ++i) check_component(g.b1[i], &p.b1[i], p);
    for (std::size_t i = 0; i < p.w2.size(); ++i) check_component(g.w2[i], &p.w2[i], p);
    check_component(g.b2, &p.b2, p);
  }
  CHECK(max_rel <= 1e-4);
}

TEST_CASE("repeated updates on one positive sample drive C above 0.99") {
  ProbeParams p = init_probe(32, 16, 7);
  rng::Stream s(4);
  std::vector<ProbeSample> batch(1);
  batch[0].features.resize(16);
  for (double& x : batch[0].features) x = s.normal();
  batch[0].target = 1.0;
  for (int step = 0; step < 2000; ++step) probe_update(p, batch, 0.05);
  CHECK(probe_forward(p, batch[0].features) > 0.99);
}

TEST_CASE("lr = 0 leaves parameters unchanged") {
  rng::Stream s(5);
  ProbeParams p = random_probe(s, 8, 4);
  ProbeParams before = p;
  std::vector<ProbeSample> batch{{{0.1, 0.2, 0.3, 0.4}, 0.5}};
  probe_update(p, batch, 0.0);
  CHECK(p.w1 == before.w1);
  CHECK(p.b1 == before.b1);
  CHECK(p.w2 == before.w2);
  CHECK(p.b2 == before.b2);
}

TEST_CASE("empty batches are rejected") {
  ProbeParams p(4, 4);
  std::vector<ProbeSample> empty;
  CHECK_THROWS_AS(probe_update(p, empty, 0.1), ValidationError);
  CHECK_THROWS_AS(probe_loss_and_grad(p, empty, nullptr), ValidationError);
}

TEST_CASE("probe updates never touch policy parameters") {
  rng::Stream s(6);
  policy::PolicyParams pol(4, 16, 0.8);
  for (double& w : pol.weights) w = s.normal();
  const policy::PolicyParams before = pol;

  ProbeParams p = init_probe(32, 16, 8);
  std::vector<ProbeSample> batch(3);
  for (ProbeSample& sample : batch) {
    sample.features.resize(16);
    for (double& x : sample.features) x = s.normal();
    sample.target = s.uniform();
  }
  probe_update(p, batch, 0.05);
  CHECK(pol.weights == before.weights);
  CHECK(pol.temperature == before.temperature);
}

TEST_CASE("probe checkpoints round-trip exactly") {
  rng::Stream s(7);
  ProbeParams p = random_probe(s, 32, 16);
  const std::string path = "test_probe.ckpt";
  save_probe(p, path);
  ProbeParams back = load_probe(path);
  CHECK(back.hidden == p.hidden);
  CHECK(back.feature_dim == p.feature_dim);
  CHECK(back.w1 == p.w1);
  CHECK(back.b1 == p.b1);
  CHECK(back.w2 == p.w2);
  CHECK(back.b2 == p.b2);
  std::remove(path.c_str());
}
