#include "wavobs/assembly.hpp"

#include <cmath>
#include <random>

#include "json.hpp"

namespace wavobs::assembly {

using kernels::Matrix;
using kernels::Vector;

Formulation Formulation::nitsche_symmetric(double gamma) {
  return {FormulationKind::NitscheSymmetric, gamma};
}

Formulation Formulation::nitsche_nonsymmetric(double gamma) {
  return {FormulationKind::NitscheNonSymmetric, gamma};
}

std::string Formulation::name() const {
  switch (kind) {
    case FormulationKind::Classical: return "classical";
    case FormulationKind::Mixed: return "mixed";
    case FormulationKind::NitscheSymmetric: return "nitsche_sym";
    case FormulationKind::NitscheNonSymmetric: return "nitsche_nonsym";
  }
  return "?";
}

namespace {

// mass matrix of the integrated-Legendre Dirichlet basis, modes 1..n
Matrix dirichlet_mass(int n) {
  Matrix M(n, n);
  for (int r = 1; r <= n; ++r) {
    M(r - 1, r - 1) = 2.0 / ((2.0 * r - 1.0) * (2.0 * r + 3.0));
    if (r + 2 <= n) {
      const double v = -1.0 / ((2.0 * r + 3.0) *
                               std::sqrt((2.0 * r + 1.0) * (2.0 * r + 5.0)));
      M(r - 1, r + 1) = v;
      M(r + 1, r - 1) = v;
    }
  }
  return M;
}

// A = [[0, I], [-M^{-1} K, 0]]
Matrix second_order_state_matrix(const Matrix& K, const Matrix& M) {
  const int n = K.rows;
  Matrix MinvK = kernels::solve_matrix(M, K, /*spd_hint=*/true);
  Matrix A(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    A(i, n + i) = 1.0;
    for (int j = 0; j < n; ++j) A(n + i, j) = -MinvK(i, j);
  }
  return A;
}

SemiDiscreteSystem assemble_classical(int N) {
  const int n = N - 1;
  SemiDiscreteSystem sys;
  sys.dof = n;
  sys.energy_position = Matrix::identity(n);
  sys.energy_velocity = dirichlet_mass(n);
  sys.state_matrix =
      second_order_state_matrix(sys.energy_position, sys.energy_velocity);
  sys.observation_row.assign(2 * n, 0.0);
  for (int k = 1; k <= n; ++k)
    sys.observation_row[k - 1] = -std::sqrt(k + 0.5);
  return sys;
}

SemiDiscreteSystem assemble_mixed(int N) {
  const int n = N - 1;
  // D lower two-band; column j holds the moments of the j-th position basis
  // function against the plain Legendre velocity test functions
  Matrix D(n, n);
  for (int i = 1; i <= n; ++i) {
    D(i - 1, i - 1) = std::sqrt(2.0) / (std::sqrt(2.0 * i + 1.0) * (2.0 * i - 1.0));
    if (i - 2 >= 1) {
      const int j = i - 2;
      D(i - 1, j - 1) =
          -std::sqrt(2.0) / (std::sqrt(2.0 * j + 1.0) * (2.0 * j + 3.0));
    }
  }
  Matrix Mdiag(n, n);
  for (int i = 1; i <= n; ++i) Mdiag(i - 1, i - 1) = 2.0 / (2.0 * i - 1.0);

  // blockdiag(D, D^T) x' = [[0, M], [-I, 0]] x
  Matrix A(2 * n, 2 * n);
  Matrix top = kernels::solve_matrix(D, Mdiag);  // D a' = M b
  {
    Matrix rhs(n, n);
    for (int i = 0; i < n; ++i) rhs(i, i) = -1.0;
    Matrix bottom = kernels::solve_matrix(transpose(D), std::move(rhs));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        A(i, n + j) = top(i, j);
        A(n + i, j) = bottom(i, j);
      }
  }

  SemiDiscreteSystem sys;
  sys.dof = n;
  sys.state_matrix = std::move(A);
  sys.energy_position = Matrix::identity(n);
  sys.energy_velocity = std::move(Mdiag);
  sys.observation_row.assign(2 * n, 0.0);
  for (int k = 1; k <= n; ++k)
    sys.observation_row[k - 1] = -std::sqrt(k + 0.5);
  return sys;
}

SemiDiscreteSystem assemble_nitsche(int N, double gamma, bool symmetric) {
  const int n = N;
  const double gN2 = gamma * static_cast<double>(N) * static_cast<double>(N);
  Matrix M(n, n), K(n, n), P(n, n);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      // mass: ∫ (L_i - (-1)^i)(L_j - (-1)^j)
      double m = 2.0 * (((i + j) % 2 == 0) ? 1.0 : -1.0);
      if (i == j) m += 2.0 / (2.0 * i + 1.0);
      M(i - 1, j - 1) = m;
      // volume stiffness: ∫ L_i' L_j'
      const int r = std::min(i, j);
      const double p = ((i + j) % 2 == 0) ? r * (r + 1.0) : 0.0;
      P(i - 1, j - 1) = p;
      // boundary coupling: value(i) * slope(j) at x = +1
      const double qij = (i % 2 == 1) ? j * (j + 1.0) : 0.0;
      const double qji = (j % 2 == 1) ? i * (i + 1.0) : 0.0;
      // penalty: value(i) * value(j) at x = +1
      const double rij = (i % 2 == 1 && j % 2 == 1) ? 4.0 : 0.0;
      K(i - 1, j - 1) = symmetric ? p - qij - qji + gN2 * rij
                                  : p - qij + qji + gN2 * rij;
    }

  SemiDiscreteSystem sys;
  sys.dof = n;
  sys.state_matrix = second_order_state_matrix(K, M);
  sys.energy_position = symmetric ? K : std::move(P);
  sys.energy_velocity = std::move(M);
  sys.observation_row.assign(2 * n, 0.0);
  for (int j = 1; j <= n; ++j) {
    const double value = (j % 2 == 1) ? 2.0 : 0.0;  // basis value at x = +1
    const double slope = 0.5 * j * (j + 1.0);       // basis slope at x = +1
    sys.observation_row[j - 1] =
        symmetric ? slope - gN2 * value : slope + gN2 * value;
  }
  return sys;
}

}  // namespace

SemiDiscreteSystem assemble(const Formulation& f, int N) {
  if (N < 4) throw std::invalid_argument("assemble: N >= 4 required");
  if (f.is_nitsche() && (!std::isfinite(f.gamma) || f.gamma <= 0.0))
    throw std::invalid_argument("assemble: nitsche gamma must be finite and > 0");
  SemiDiscreteSystem sys;
  switch (f.kind) {
    case FormulationKind::Classical: sys = assemble_classical(N); break;
    case FormulationKind::Mixed: sys = assemble_mixed(N); break;
    case FormulationKind::NitscheSymmetric:
      sys = assemble_nitsche(N, f.gamma, true);
      break;
    case FormulationKind::NitscheNonSymmetric:
      sys = assemble_nitsche(N, f.gamma, false);
      break;
  }
  sys.formulation = f;
  sys.n_poly = N;
  return sys;
}

double energy(const SemiDiscreteSystem& sys, const Vector& state) {
  const int n = sys.dof;
  if (static_cast<int>(state.size()) != 2 * n)
    throw std::invalid_argument("energy: state length != 2*dof");
  Vector pos(state.begin(), state.begin() + n);
  Vector vel(state.begin() + n, state.end());
  const double ep = kernels::dot(pos, kernels::matvec(sys.energy_position, pos));
  const double ev = kernels::dot(vel, kernels::matvec(sys.energy_velocity, vel));
  return 0.5 * (ep + ev);
}

double verify_energy_conservation(const SemiDiscreteSystem& sys, double T,
                                  int n_check) {
  if (sys.formulation.kind == FormulationKind::NitscheNonSymmetric)
    throw UnsupportedFormulationError(
        "verify_energy_conservation: the non-symmetric Nitsche flow does not "
        "preserve the discrete energy");
  if (n_check < 1 || !(T > 0.0))
    throw std::invalid_argument("verify_energy_conservation: bad T/n_check");

  std::mt19937 gen(0x5eedu + 1000u * static_cast<unsigned>(sys.n_poly) +
                   static_cast<unsigned>(sys.formulation.kind));
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector state(2 * sys.dof);
  for (double& v : state) v = u(gen);
  const double e0 = energy(sys, state);
  const double scale = 1.0 / std::sqrt(e0);
  for (double& v : state) v *= scale;

  const Matrix step = kernels::expm(sys.state_matrix, T / n_check);
  double drift = 0.0;
  for (int j = 1; j <= n_check; ++j) {
    state = kernels::matvec(step, state);
    drift = std::max(drift, std::fabs(energy(sys, state) - 1.0));
  }
  return drift;
}

std::string to_json(const SemiDiscreteSystem& sys) {
  nlohmann::json j;
  j["formulation"] = sys.formulation.name();
  if (sys.formulation.is_nitsche()) j["gamma"] = sys.formulation.gamma;
  j["n_poly"] = sys.n_poly;
  j["dof"] = sys.dof;
  j["state_matrix"] = sys.state_matrix.a;
  j["energy_position"] = sys.energy_position.a;
  j["energy_velocity"] = sys.energy_velocity.a;
  j["observation_row"] = sys.observation_row;
  return j.dump();
}

}  // namespace wavobs::assembly
