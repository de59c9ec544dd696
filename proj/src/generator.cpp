#include "hyperinject/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hyperinject/error.hpp"

namespace hyperinject {
namespace {

double kernel_density(Kernel kernel, double u) {
  switch (kernel) {
    case Kernel::Gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case Kernel::Tophat:
      return std::abs(u) <= 1.0 ? 0.5 : 0.0;
    case Kernel::Epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

double kernel_cdf(Kernel kernel, double u) {
  switch (kernel) {
    case Kernel::Gaussian:
      return 0.5 * std::erfc(-u / std::numbers::sqrt2);
    case Kernel::Tophat:
      return std::clamp(0.5 * (u + 1.0), 0.0, 1.0);
    case Kernel::Epanechnikov: {
      if (u <= -1.0) return 0.0;
      if (u >= 1.0) return 1.0;
      return 0.25 * (2.0 + 3.0 * u - u * u * u);
    }
  }
  return 0.0;
}

double kernel_noise(Kernel kernel, Rng& rng) {
  switch (kernel) {
    case Kernel::Gaussian:
      return rng.normal();
    case Kernel::Tophat:
      return rng.uniform(-1.0, 1.0);
    case Kernel::Epanechnikov:
      // Inverse of F(u) = (2 + 3u - u^3) / 4 on [-1, 1].
      return 2.0 * std::sin(std::asin(2.0 * rng.uniform() - 1.0) / 3.0);
  }
  return 0.0;
}

}  // namespace

const char* to_string(Kernel kernel) {
  switch (kernel) {
    case Kernel::Gaussian: return "gaussian";
    case Kernel::Tophat: return "tophat";
    case Kernel::Epanechnikov: return "epanechnikov";
  }
  return "?";
}

Kernel parse_kernel(const std::string& name) {
  for (auto k : {Kernel::Gaussian, Kernel::Tophat, Kernel::Epanechnikov}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::Config, "unknown kernel '" + name + "'");
}

double KdeModel::pdf(double x) const {
  double s = 0.0;
  for (double p : points) s += kernel_density(kernel, (x - p) / bandwidth);
  return s / (static_cast<double>(points.size()) * bandwidth);
}

double KdeModel::cdf(double x) const {
  double s = 0.0;
  for (double p : points) s += kernel_cdf(kernel, (x - p) / bandwidth);
  return s / static_cast<double>(points.size());
}

KdeModel fit_kde(const Vector& z_elite, Kernel kernel, const BandwidthRule& rule) {
  const auto f = z_elite.size();
  if (f < 1) throw Error(ErrorKind::Dimension, "KDE needs at least one point");
  KdeModel kde;
  kde.kernel = kernel;
  kde.points.assign(z_elite.data(), z_elite.data() + f);
  if (rule.fixed) {
    if (!(*rule.fixed > 0.0)) throw Error(ErrorKind::Config, "bandwidth must be positive");
    kde.bandwidth = *rule.fixed;
    return kde;
  }
  double sd = 0.0;
  if (f > 1) {
    const double mean = z_elite.mean();
    sd = std::sqrt((z_elite.array() - mean).square().sum() / static_cast<double>(f - 1));
  }
  kde.bandwidth = sd > 0.0 ? sd * std::pow(static_cast<double>(f), -0.2) : 0.1;
  return kde;
}

Vector sample_preliminary(const KdeModel& kde, Rng& rng) {
  const auto f = static_cast<Eigen::Index>(kde.points.size());
  Vector out(f);
  for (Eigen::Index i = 0; i < f; ++i) {
    const double centre = kde.points[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(f)))];
    out[i] = centre + kde.bandwidth * kernel_noise(kde.kernel, rng);
  }
  return out;
}

RefinementContext refine(const Vector& z_m, const HgnnModel& surrogate, const Matrix& hidden,
                         const Hypergraph& h, const EliteSelection& sel, Rng& rng) {
  if (!surrogate.frozen()) throw Error(ErrorKind::Protocol, "refinement needs a frozen surrogate");
  if (sel.elite_hyperedges.empty()) throw Error(ErrorKind::Refinement, "no elite hyperedges");
  if (z_m.size() != surrogate.num_features()) {
    throw Error(ErrorKind::Dimension, "preliminary features have the wrong length");
  }
  RefinementContext ctx;
  ctx.z_m = z_m;
  ctx.elite_edge = sel.elite_hyperedges[static_cast<std::size_t>(
      rng.below(static_cast<std::uint64_t>(sel.elite_hyperedges.size())))];
  const auto& members = h.edge(ctx.elite_edge);
  ctx.edge_size = static_cast<int>(members.size());
  if (ctx.edge_size < 2) {
    throw Error(ErrorKind::Refinement, "elite hyperedge has a single member");
  }
  ctx.r_elite = hidden.row(sel.elite_node).transpose();
  ctx.r_mean = Vector::Zero(hidden.cols());
  for (int v : members) {
    if (v != sel.elite_node) ctx.r_mean += hidden.row(v).transpose();
  }
  ctx.r_mean /= static_cast<double>(ctx.edge_size - 1);
  ctx.z_ms = (surrogate.w1().transpose() * z_m).cwiseMax(0.0);
  const auto d = hidden.cols();
  ctx.z_msd.resize(3 * d);
  ctx.z_msd << ctx.r_elite, ctx.r_mean, ctx.z_ms;
  return ctx;
}

RefinementContext refine(const Vector& z_m, const HgnnModel& surrogate,
                         const NormalizedAggregator& agg, const Matrix& x, const Hypergraph& h,
                         const EliteSelection& sel, Rng& rng) {
  return refine(z_m, surrogate, forward(surrogate, agg, x).hidden, h, sel, rng);
}

FeatureBounds feature_bounds(const Matrix& x) {
  FeatureBounds b;
  b.lower = Vector::Zero(x.cols());
  b.upper = x.colwise().maxCoeff().transpose().cwiseMax(0.0);
  return b;
}

Vector clamp(const Vector& v, const FeatureBounds& bounds) {
  return v.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
}

GeneratorNet GeneratorNet::init(int hidden, int num_features, Rng& rng) {
  GeneratorNet net;
  const int in = 3 * hidden;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  net.weight.resize(in, num_features);
  for (int i = 0; i < in; ++i) {
    for (int j = 0; j < num_features; ++j) net.weight(i, j) = rng.uniform(-bound, bound);
  }
  net.bias = Vector::Zero(num_features);
  return net;
}

Vector generate_affine(const GeneratorNet& net, const RefinementContext& ctx) {
  if (net.weight.rows() != ctx.z_msd.size() || net.weight.cols() != net.bias.size()) {
    throw Error(ErrorKind::Dimension, "generator shapes do not match the refinement vector");
  }
  return net.weight.transpose() * ctx.z_msd + net.bias;
}

Vector generate(const GeneratorNet& net, const RefinementContext& ctx, const FeatureBounds& bounds) {
  return clamp(generate_affine(net, ctx), bounds);
}

GeneratorGrad generator_backward(const GeneratorNet& net, const RefinementContext& ctx,
                                 const FeatureBounds& bounds, const Vector& grad_z_mal) {
  const Vector y = generate_affine(net, ctx);
  const Vector active =
      ((y.array() > bounds.lower.array()) && (y.array() < bounds.upper.array())).cast<double>();
  GeneratorGrad g;
  g.bias = grad_z_mal.cwiseProduct(active);
  g.weight = ctx.z_msd * g.bias.transpose();
  return g;
}

}  // namespace hyperinject
