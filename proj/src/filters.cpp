#include "wavobs/filters.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace wavobs::filters {

Filter Filter::vandeven(int p) {
  if (p < 1) throw std::invalid_argument("vandeven: p >= 1 required");
  return {FilterKind::Vandeven, p, kDefaultAlpha};
}

Filter Filter::exponential(int p, double alpha) {
  if (p < 1) throw std::invalid_argument("exponential: p >= 1 required");
  if (!(alpha > 0.0)) throw std::invalid_argument("exponential: alpha > 0 required");
  return {FilterKind::Exponential, p, alpha};
}

std::string Filter::name() const {
  switch (kind) {
    case FilterKind::Cesaro: return "cesaro";
    case FilterKind::Lanczos: return "lanczos";
    case FilterKind::RaisedCosine: return "raised-cosine";
    case FilterKind::SharpenedRaisedCosine: return "sharpened-raised-cosine";
    case FilterKind::Vandeven: return "vandeven";
    case FilterKind::Exponential: return "exponential";
  }
  return "?";
}

Filter Filter::from_name(const std::string& name, int p, double alpha) {
  if (name == "cesaro") return cesaro();
  if (name == "lanczos") return lanczos();
  if (name == "raised-cosine") return raised_cosine();
  if (name == "sharpened-raised-cosine") return sharpened_raised_cosine();
  if (name == "vandeven") return vandeven(p);
  if (name == "exponential") return exponential(p, alpha);
  throw std::invalid_argument("unknown filter name: " + name);
}

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r *= static_cast<double>(n - k + j) / j;
  return r;
}

// (2p-1)! / ((p-1)!)^2 = p * C(2p-1, p); exact 64-bit integers up to p = 12
double vandeven_constant(int p) {
  if (p <= 12) {
    std::uint64_t num = 1, den = 1;
    for (int j = 1; j <= p; ++j) {
      num *= static_cast<std::uint64_t>(p - 1 + j);
      den *= static_cast<std::uint64_t>(j);
    }
    return static_cast<double>(p) * (static_cast<double>(num) / static_cast<double>(den));
  }
  return std::exp(std::lgamma(2.0 * p) - 2.0 * std::lgamma(static_cast<double>(p)));
}

}  // namespace

double sigma(const Filter& f, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::domain_error("sigma: eta outside [0,1]");
  const double pi = std::acos(-1.0);
  switch (f.kind) {
    case FilterKind::Cesaro:
      return 1.0 - eta;
    case FilterKind::Lanczos:
      return eta == 0.0 ? 1.0 : std::sin(pi * eta) / (pi * eta);
    case FilterKind::RaisedCosine:
      return 0.5 * (1.0 + std::cos(pi * eta));
    case FilterKind::SharpenedRaisedCosine: {
      const double s = 0.5 * (1.0 + std::cos(pi * eta));
      return s * s * s * s * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
    }
    case FilterKind::Vandeven: {
      if (f.p < 1) throw std::invalid_argument("sigma: vandeven p >= 1 required");
      // 1 - C_p ∫_0^eta (t(1-t))^{p-1} dt with the integral expanded as a
      // polynomial: S(x) = C_p sum_j C(p-1,j) (-1)^j x^{p+j} / (p+j). The
      // expansion cancels badly near x=1, so the symmetry of the integrand
      // about 1/2 is used to keep the argument small: sigma = S(1-eta) there.
      const int p = f.p;
      const double x = (eta <= 0.5) ? eta : 1.0 - eta;
      double sum = 0.0;
      double sign = 1.0;
      for (int j = 0; j <= p - 1; ++j) {
        sum += sign * binom(p - 1, j) * std::pow(x, p + j) / (p + j);
        sign = -sign;
      }
      const double s = vandeven_constant(p) * sum;
      return (eta <= 0.5) ? 1.0 - s : s;
    }
    case FilterKind::Exponential: {
      if (f.p < 1 || !(f.alpha > 0.0))
        throw std::invalid_argument("sigma: bad exponential parameters");
      return std::exp(-f.alpha * std::pow(eta, f.p));
    }
  }
  throw std::invalid_argument("sigma: unknown filter");
}

kernels::Vector filtered_observation_row(const assembly::SemiDiscreteSystem& sys,
                                         const Filter& f) {
  if (sys.formulation.kind != assembly::FormulationKind::Classical)
    throw assembly::UnsupportedFormulationError(
        "filtered_observation_row: spectral filtering applies to the classical "
        "formulation only");
  kernels::Vector row = sys.observation_row;
  const int n = sys.dof;  // N-1 position modes, k = 1..n
  for (int k = 1; k <= n; ++k)
    row[k - 1] *= sigma(f, static_cast<double>(k - 1) / (sys.n_poly - 1));
  return row;
}

}  // namespace wavobs::filters
