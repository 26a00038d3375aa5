#pragma once
// The four semi-discrete formulations of the 1-D wave equation on (-1,1) with
// boundary observation at x = +1, assembled as explicit dense matrices.
//
//  - Classical:          Dirichlet Galerkin in the integrated-Legendre basis
//  - Mixed:              first-order (position, velocity-moment) system
//  - NitscheSymmetric:   weak Dirichlet at x = +1, symmetric penalty form
//  - NitscheNonSymmetric: weak Dirichlet at x = +1, skew variant
//
// State convention everywhere: x = (position coefficients, velocity
// coefficients), each block of length `dof`, so the first-order evolution is
// x' = A x with A of size 2*dof. Formulas below are 1-based in the mode index
// k; storage is 0-based with slot k-1 holding mode k (slot k holding plain
// Legendre degree k for velocity blocks that use it).

#include <stdexcept>
#include <string>

#include "wavobs/kernels.hpp"

namespace wavobs::assembly {

enum class FormulationKind {
  Classical,
  Mixed,
  NitscheSymmetric,
  NitscheNonSymmetric,
};

struct Formulation {
  FormulationKind kind = FormulationKind::Classical;
  double gamma = 0.0;  // Nitsche penalty scale; unused by the other two

  static Formulation classical() { return {FormulationKind::Classical, 0.0}; }
  static Formulation mixed() { return {FormulationKind::Mixed, 0.0}; }
  static Formulation nitsche_symmetric(double gamma);
  static Formulation nitsche_nonsymmetric(double gamma);

  bool is_nitsche() const {
    return kind == FormulationKind::NitscheSymmetric ||
           kind == FormulationKind::NitscheNonSymmetric;
  }
  // short stable identifier used in CSV output and configs
  std::string name() const;
};

struct SemiDiscreteSystem {
  Formulation formulation;
  int n_poly = 0;  // polynomial degree N
  int dof = 0;     // size of one state block (N-1, or N for Nitsche)
  kernels::Matrix state_matrix;      // 2*dof x 2*dof
  kernels::Matrix energy_position;   // Ke, quadratic form on the position block
  kernels::Matrix energy_velocity;   // Me, SPD form on the velocity block
  kernels::Vector observation_row;   // length 2*dof, supported on positions
};

struct UnsupportedFormulationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Build the system for polynomial degree N >= 4. All entries come from closed
// forms; no quadrature is involved. Throws std::invalid_argument for N < 4 or
// a non-finite/non-positive Nitsche gamma.
SemiDiscreteSystem assemble(const Formulation& f, int N);

// (1/2)(pos^T Ke pos + vel^T Me vel). For the symmetric Nitsche system Ke
// already folds the boundary penalty, so this is the modified energy whose
// conservation the scheme guarantees.
double energy(const SemiDiscreteSystem& sys, const kernels::Vector& state);

// Propagate a random unit-energy state with the matrix exponential and return
// max_j |E(t_j) - E(0)|/E(0) over n_check equally spaced times in (0, T].
// Throws UnsupportedFormulationError for NitscheNonSymmetric, whose flow does
// not preserve this energy.
double verify_energy_conservation(const SemiDiscreteSystem& sys, double T,
                                  int n_check);

// Debug serialization (row-major matrices + metadata); not a stable format.
std::string to_json(const SemiDiscreteSystem& sys);

}  // namespace wavobs::assembly
