#pragma once
// Spectral filter functions sigma: [0,1] -> [0,1] and the filtered boundary
// observation row for the classical formulation. Mode k of an N-degree
// expansion is damped by sigma((k-1)/(N-1)), so the lowest mode always passes
// unfiltered.

#include <string>

#include "wavobs/assembly.hpp"
#include "wavobs/kernels.hpp"

namespace wavobs::filters {

// alpha for which the exponential filter reaches machine epsilon at eta = 1:
// -ln(2^-52) = 52 ln 2
inline constexpr double kDefaultAlpha = 36.04365338911715;

enum class FilterKind {
  Cesaro,
  Lanczos,
  RaisedCosine,
  SharpenedRaisedCosine,
  Vandeven,
  Exponential,
};

struct Filter {
  FilterKind kind = FilterKind::Cesaro;
  int p = 4;                      // order for Vandeven / Exponential
  double alpha = kDefaultAlpha;   // Exponential decay rate

  static Filter cesaro() { return {FilterKind::Cesaro}; }
  static Filter lanczos() { return {FilterKind::Lanczos}; }
  static Filter raised_cosine() { return {FilterKind::RaisedCosine}; }
  static Filter sharpened_raised_cosine() {
    return {FilterKind::SharpenedRaisedCosine};
  }
  static Filter vandeven(int p);
  static Filter exponential(int p, double alpha = kDefaultAlpha);

  // canonical lowercase names: cesaro, lanczos, raised-cosine,
  // sharpened-raised-cosine, vandeven, exponential
  std::string name() const;
  static Filter from_name(const std::string& name, int p = 4,
                          double alpha = kDefaultAlpha);
};

// Filter value at eta in [0,1]. Throws std::domain_error outside the interval
// and std::invalid_argument for bad filter parameters.
double sigma(const Filter& f, double eta);

// Observation row of the classical system with each position entry scaled by
// the filter value of its mode. Throws UnsupportedFormulationError for any
// other formulation.
kernels::Vector filtered_observation_row(const assembly::SemiDiscreteSystem& sys,
                                         const Filter& f);

}  // namespace wavobs::filters
