#include "hyperinject/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "hyperinject/error.hpp"

namespace hyperinject {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::EmptyInput: return "empty input";
    case ErrorKind::Stratification: return "stratification error";
    case ErrorKind::Budget: return "budget error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Divergence: return "divergence error";
    case ErrorKind::Index: return "index error";
    case ErrorKind::NoElite: return "no elite node";
    case ErrorKind::Refinement: return "refinement error";
    case ErrorKind::Injection: return "injection error";
    case ErrorKind::Protocol: return "protocol error";
    case ErrorKind::EmptyTestSet: return "empty test set";
    case ErrorKind::Rank: return "rank error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(seed ^ splitmix64(stream)));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Largest multiple of n representable; reject draws above it.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  // u1 in (0, 1] so the log is finite.
  u1 = 1.0 - u1;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  if (k > n) k = n;
  for (int i = 0; i < k; ++i) {
    auto j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace hyperinject
