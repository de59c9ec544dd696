#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hyperinject/elite.hpp"
#include "hyperinject/error.hpp"
#include "hyperinject/generator.hpp"
#include "hyperinject/hgnn.hpp"

using namespace hyperinject;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

HgnnModel frozen(Matrix w1, Matrix w2) {
  HgnnModel m(std::move(w1), std::move(w2));
  m.freeze();
  return m;
}

}  // namespace

TEST(Kde, ConstantSampleFallsBackToPointOne) {
  const KdeModel k = fit_kde(Vector::Constant(20, 0.7), Kernel::Gaussian);
  EXPECT_EQ(k.bandwidth, 0.1);
  EXPECT_GT(k.pdf(0.7), k.pdf(0.75));
  EXPECT_GT(k.pdf(0.7), k.pdf(0.65));
}

TEST(Kde, ScottBandwidth) {
  const Vector z = vec({0, 1, 0, 0, 1, 0, 0, 0});
  double mean = z.mean(), ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 7.0);
  EXPECT_NEAR(fit_kde(z, Kernel::Gaussian).bandwidth, sd * std::pow(8.0, -0.2), 1e-15);
  EXPECT_EQ(fit_kde(z, Kernel::Gaussian, {0.3}).bandwidth, 0.3);
}

TEST(Kde, GaussianPeak) {
  const KdeModel k = fit_kde(vec({0}), Kernel::Gaussian, {1.0});
  EXPECT_NEAR(k.pdf(0.0), 0.3989, 1e-4);
  EXPECT_NEAR(k.pdf(0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
}

TEST(Kde, TophatValue) {
  const KdeModel k = fit_kde(vec({0, 1}), Kernel::Tophat, {0.5});
  EXPECT_DOUBLE_EQ(k.pdf(0.25), 0.5);
  EXPECT_DOUBLE_EQ(k.pdf(2.0), 0.0);
}

TEST(Kde, EpanechnikovValue) {
  const KdeModel k = fit_kde(vec({0}), Kernel::Epanechnikov, {2.0});
  // 0.75 * (1 - 0.25) / 2
  EXPECT_DOUBLE_EQ(k.pdf(1.0), 0.28125);
  EXPECT_DOUBLE_EQ(k.cdf(2.0), 1.0);
  EXPECT_DOUBLE_EQ(k.cdf(-2.0), 0.0);
  EXPECT_DOUBLE_EQ(k.cdf(0.0), 0.5);
}

TEST(Kde, CdfIsIntegralOfPdf) {
  for (auto kernel : {Kernel::Gaussian, Kernel::Tophat, Kernel::Epanechnikov}) {
    const KdeModel k = fit_kde(vec({0, 0.3, 1.2, 1.2}), kernel, {0.4});
    double integral = 0.0;
    const double a = -3.0, b = 0.9, step = 1e-4;
    for (double x = a + step / 2; x < b; x += step) integral += k.pdf(x) * step;
    EXPECT_NEAR(integral, k.cdf(b) - k.cdf(a), 1e-4) << to_string(kernel);
  }
}

TEST(Sampling, GaussianMoments) {
  KdeModel k;
  k.kernel = Kernel::Gaussian;
  k.bandwidth = 1.0;
  k.points.assign(100000, 0.0);
  Rng rng(2024);
  const Vector s = sample_preliminary(k, rng);
  const double mean = s.mean();
  const double var = (s.array() - mean).square().sum() / static_cast<double>(s.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Sampling, TinyBandwidthReturnsPoints) {
  KdeModel k;
  k.kernel = Kernel::Epanechnikov;
  k.bandwidth = 1e-300;
  k.points.assign(50, 0.25);
  Rng rng(1);
  EXPECT_EQ(sample_preliminary(k, rng), Vector::Constant(50, 0.25));
}

TEST(Sampling, SeedDeterminism) {
  const KdeModel k = fit_kde(vec({0, 1, 0, 1, 1}), Kernel::Tophat);
  Rng a(5), b(5);
  EXPECT_EQ(sample_preliminary(k, a), sample_preliminary(k, b));
}

namespace {

struct RefineFixture {
  Hypergraph h{3, {{0, 1}, {0, 1, 2}}};
  EliteSelection sel;
  Matrix hidden;

  RefineFixture() {
    sel.elite_node = 0;
    sel.elite_hyperedges = {0};
    hidden.resize(3, 2);
    hidden << 1, 2, 3, 4, 5, 6;
  }
};

}  // namespace

TEST(Refine, PairHyperedgeMean) {
  RefineFixture f;
  const HgnnModel m = frozen(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  Rng rng(1);
  const auto ctx = refine(vec({0.5, 0.25}), m, f.hidden, f.h, f.sel, rng);
  EXPECT_EQ(ctx.elite_edge, 0);
  EXPECT_EQ(ctx.edge_size, 2);
  EXPECT_EQ(ctx.r_elite, vec({1, 2}));
  EXPECT_EQ(ctx.r_mean, vec({3, 4}));
}

TEST(Refine, TripleMeanExcludesElite) {
  RefineFixture f;
  f.sel.elite_hyperedges = {1};
  const HgnnModel m = frozen(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  Rng rng(1);
  const auto ctx = refine(vec({0, 0}), m, f.hidden, f.h, f.sel, rng);
  EXPECT_EQ(ctx.r_mean, vec({4, 5}));
  EXPECT_EQ(ctx.z_ms, Vector::Zero(2));
  EXPECT_EQ(ctx.z_msd, vec({1, 2, 4, 5, 0, 0}));
}

TEST(Refine, HandSetWeights) {
  RefineFixture f;
  Matrix w1(2, 2);
  w1 << 2, -1, 0.5, 3;
  const HgnnModel m = frozen(w1, Matrix::Identity(2, 2));
  Rng rng(1);
  const auto ctx = refine(vec({1, -1}), m, f.hidden, f.h, f.sel, rng);
  // W1^T z = [2 - 0.5, -1 - 3] = [1.5, -4] -> relu [1.5, 0].
  EXPECT_EQ(ctx.z_ms, vec({1.5, 0}));
  EXPECT_EQ(ctx.z_msd.size(), 6);
}

TEST(Refine, DrawIsUniformOverEliteSet) {
  RefineFixture f;
  f.sel.elite_hyperedges = {0, 1};
  const HgnnModel m = frozen(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  int first = 0;
  Rng rng(9);
  for (int i = 0; i < 4000; ++i) first += refine(vec({0, 0}), m, f.hidden, f.h, f.sel, rng).elite_edge == 0;
  EXPECT_NEAR(first, 2000, 150);
}

TEST(Refine, Errors) {
  RefineFixture f;
  HgnnModel open(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  Rng rng(1);
  try {
    refine(vec({0, 0}), open, f.hidden, f.h, f.sel, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Protocol);
  }
  const HgnnModel m = frozen(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  f.sel.elite_hyperedges.clear();
  try {
    refine(vec({0, 0}), m, f.hidden, f.h, f.sel, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Refinement);
  }
}

TEST(Generator, ZeroNetZeroOutput) {
  RefinementContext ctx;
  ctx.z_msd = vec({1, 2, 3});
  GeneratorNet net{Matrix::Zero(3, 4), Vector::Zero(4)};
  const FeatureBounds b{Vector::Zero(4), Vector::Ones(4)};
  EXPECT_EQ(generate(net, ctx, b), Vector::Zero(4));
}

TEST(Generator, BiasClampedToColumnMax) {
  RefinementContext ctx;
  ctx.z_msd = vec({1, 2, 3});
  GeneratorNet net{Matrix::Zero(3, 2), vec({5, -5})};
  Matrix x(2, 2);
  x << 0, 2, 1, 0.5;
  const FeatureBounds b = feature_bounds(x);
  EXPECT_EQ(b.upper, vec({1, 2}));
  EXPECT_EQ(generate(net, ctx, b), vec({1, 0}));
}

TEST(Generator, AffineMatchesLoopOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(4));
    const int f = 1 + static_cast<int>(rng.below(7));
    GeneratorNet net = GeneratorNet::init(d, f, rng);
    for (int j = 0; j < f; ++j) net.bias[j] = rng.normal();
    RefinementContext ctx;
    ctx.z_msd.resize(3 * d);
    for (int i = 0; i < 3 * d; ++i) ctx.z_msd[i] = rng.normal();
    const Vector out = generate_affine(net, ctx);
    for (int j = 0; j < f; ++j) {
      double s = net.bias[j];
      for (int i = 0; i < 3 * d; ++i) s += net.weight(i, j) * ctx.z_msd[i];
      EXPECT_NEAR(out[j], s, 1e-13);
    }
  }
}

TEST(Generator, InitRange) {
  Rng rng(4);
  const GeneratorNet net = GeneratorNet::init(16, 50, rng);
  EXPECT_EQ(net.weight.rows(), 48);
  EXPECT_LE(net.weight.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(48.0));
  EXPECT_EQ(net.bias, Vector::Zero(50));
}

TEST(Generator, BackwardMatchesFiniteDifferences) {
  Rng rng(6);
  const int d = 2, f = 5;
  GeneratorNet net = GeneratorNet::init(d, f, rng);
  RefinementContext ctx;
  ctx.z_msd = Vector::Zero(3 * d);
  for (int i = 0; i < 3 * d; ++i) ctx.z_msd[i] = rng.uniform();
  for (int j = 0; j < f; ++j) net.bias[j] = 0.5;
  const FeatureBounds b{Vector::Zero(f), Vector::Ones(f)};
  const Vector c = vec({0.3, -1.0, 2.0, 0.5, -0.2});
  auto loss = [&](const GeneratorNet& n) { return c.dot(generate(n, ctx, b)); };
  const GeneratorGrad g = generator_backward(net, ctx, b, c);
  const double step = 1e-6;
  for (int i = 0; i < 3 * d; ++i) {
    for (int j = 0; j < f; ++j) {
      GeneratorNet p = net, m = net;
      p.weight(i, j) += step;
      m.weight(i, j) -= step;
      EXPECT_NEAR((loss(p) - loss(m)) / (2 * step), g.weight(i, j), 1e-7);
    }
  }
  for (int j = 0; j < f; ++j) {
    GeneratorNet p = net, m = net;
    p.bias[j] += step;
    m.bias[j] -= step;
    EXPECT_NEAR((loss(p) - loss(m)) / (2 * step), g.bias[j], 1e-7);
  }
}

TEST(Generator, ClampedEntriesPassNoGradient) {
  RefinementContext ctx;
  ctx.z_msd = vec({1, 1, 1});
  GeneratorNet net{Matrix::Zero(3, 2), vec({5, 0.5})};
  const FeatureBounds b{Vector::Zero(2), Vector::Ones(2)};
  const GeneratorGrad g = generator_backward(net, ctx, b, vec({1, 1}));
  EXPECT_EQ(g.bias, vec({0, 1}));
  EXPECT_EQ(g.weight.col(0), Vector::Zero(3));
}

TEST(KernelNames, RoundTrip) {
  for (auto k : {Kernel::Gaussian, Kernel::Tophat, Kernel::Epanechnikov}) {
    EXPECT_EQ(parse_kernel(to_string(k)), k);
  }
  EXPECT_THROW(parse_kernel("cosine"), Error);
}
