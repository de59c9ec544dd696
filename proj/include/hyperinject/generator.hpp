#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hyperinject/elite.hpp"
#include "hyperinject/hgnn.hpp"
#include "hyperinject/rng.hpp"
#include "hyperinject/types.hpp"

namespace hyperinject {

enum class Kernel { Gaussian, Tophat, Epanechnikov };

const char* to_string(Kernel kernel);
Kernel parse_kernel(const std::string& name);

// Univariate KDE over the scalar entries of one feature vector.
struct KdeModel {
  Kernel kernel = Kernel::Gaussian;
  double bandwidth = 1.0;
  std::vector<double> points;

  double pdf(double x) const;
  // CDF of the kernel mixture; used by the sampling tests.
  double cdf(double x) const;
};

// Scott's rule: h = sample_std * F^(-1/5), or 0.1 when the sample has no
// spread. A fixed bandwidth replaces the rule when given.
struct BandwidthRule {
  std::optional<double> fixed;
};

KdeModel fit_kde(const Vector& z_elite, Kernel kernel, const BandwidthRule& rule = {});

// F draws: a uniformly chosen point plus h * kernel noise.
Vector sample_preliminary(const KdeModel& kde, Rng& rng);

struct RefinementContext {
  Vector z_m;                // sampled preliminary features, length F
  int elite_edge = -1;       // hyperedge drawn from the elite set
  int edge_size = 0;         // t
  Vector r_elite;            // length d
  Vector r_mean;             // mean hidden embedding of the other t-1 members
  Vector z_ms;               // relu(z_m W1), length d
  Vector z_msd;              // r_elite ++ r_mean ++ z_ms, length 3d
};

// `hidden` are the surrogate's clean hidden embeddings (n x d).
RefinementContext refine(const Vector& z_m, const HgnnModel& surrogate, const Matrix& hidden,
                         const Hypergraph& h, const EliteSelection& sel, Rng& rng);

RefinementContext refine(const Vector& z_m, const HgnnModel& surrogate,
                         const NormalizedAggregator& agg, const Matrix& x, const Hypergraph& h,
                         const EliteSelection& sel, Rng& rng);

struct FeatureBounds {
  Vector lower;
  Vector upper;
};

// [0, column max of X].
FeatureBounds feature_bounds(const Matrix& x);

Vector clamp(const Vector& v, const FeatureBounds& bounds);

// Linear head: z_mal = clamp(W^T z_msd + b).
struct GeneratorNet {
  Matrix weight;  // 3d x F
  Vector bias;    // F

  // W uniform in +-1/sqrt(3d), b = 0.
  static GeneratorNet init(int hidden, int num_features, Rng& rng);
};

struct GeneratorGrad {
  Matrix weight;
  Vector bias;
};

Vector generate_affine(const GeneratorNet& net, const RefinementContext& ctx);
Vector generate(const GeneratorNet& net, const RefinementContext& ctx, const FeatureBounds& bounds);

// Pulls d loss / d z_mal back to (W, b). Entries pinned at a bound pass no
// gradient.
GeneratorGrad generator_backward(const GeneratorNet& net, const RefinementContext& ctx,
                                 const FeatureBounds& bounds, const Vector& grad_z_mal);

}  // namespace hyperinject
