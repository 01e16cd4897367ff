#include "dms/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dms/diagnostics.hpp"
#include "dms/parallel.hpp"
#include "dms/summation.hpp"

namespace dms {

void Problem::validate() const {
  if (!(d_av >= 0.0) || !std::isfinite(d_av)) throw std::invalid_argument("d_av must be >= 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
  nonlinearity.validate();
  method.validate();
}

EnergyFunctional::EnergyFunctional(const Problem& problem, int box_radius)
    : problem_(problem), radius_(box_radius) {
  problem_.validate();
  if (box_radius < 0) throw std::invalid_argument("negative box radius");
  const auto atoms = problem_.measure.atoms();
  propagators_.reserve(atoms.size());
  for (const auto& a : atoms) {
    const int margin =
        problem_.method.margin.value_or(required_margin(a.node, problem_.method.leak_tolerance));
    propagators_.emplace_back(a.node, box_radius, box_radius + margin, problem_.method);
  }
}

void EnergyFunctional::check(const LatticeField& f) const {
  if (f.radius() != radius_) {
    throw std::invalid_argument("field radius " + std::to_string(f.radius()) +
                                " does not match functional radius " + std::to_string(radius_));
  }
  if (!f.all_finite()) throw NumericError("non-finite field passed to the energy");
}

LatticeField EnergyFunctional::evolved(std::size_t atom, const LatticeField& f) const {
  check(f);
  return propagators_.at(atom).apply(f);
}

void EnergyFunctional::atom_terms(const LatticeField& f, bool with_gradient,
                                  std::vector<double>& n,
                                  std::vector<LatticeField>* grads) const {
  const auto& nl = problem_.nonlinearity;
  n.assign(propagators_.size(), 0.0);
  if (grads) grads->assign(propagators_.size(), LatticeField(radius_));
  parallel_for(propagators_.size(), [&](std::size_t j) {
    const auto& prop = propagators_[j];
    LatticeField u(prop.out_radius());
    prop.apply(f.values(), u.values());
    CompensatedSum s;
    for (auto& z : u.values()) {
      s += nl.V(std::abs(z));
      if (with_gradient) z = nl.P(z);
    }
    n[j] = s.value();
    if (with_gradient) prop.adjoint(u.values(), (*grads)[j].values());
  });
}

EnergyFunctional::Evaluation EnergyFunctional::evaluate(const LatticeField& f,
                                                        bool with_gradient) const {
  check(f);
  std::vector<double> n;
  std::vector<LatticeField> grads;
  atom_terms(f, with_gradient, n, with_gradient ? &grads : nullptr);
  const auto atoms = problem_.measure.atoms();

  Evaluation ev;
  CompensatedSum pot;
  for (std::size_t j = 0; j < atoms.size(); ++j) pot += atoms[j].weight * n[j];
  ev.potential = pot.value();
  ev.kinetic = 0.5 * problem_.d_av * dirichlet_energy(f);
  ev.energy = ev.kinetic - ev.potential;
  if (with_gradient) {
    const std::size_t sz = f.size();
    std::vector<CompensatedComplexSum> acc(sz);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      const auto v = grads[j].values();
      for (std::size_t i = 0; i < sz; ++i) acc[i] += atoms[j].weight * v[i];
    }
    LatticeField gn(radius_);
    for (std::size_t i = 0; i < sz; ++i) gn.values()[i] = acc[i].value();
    ev.potential_pairing = inner(gn, f).real();

    LatticeField lap(radius_);
    dirichlet_laplacian(f.values(), lap.values());
    ev.gradient = LatticeField(radius_);
    for (std::size_t i = 0; i < sz; ++i) {
      ev.gradient.values()[i] = -problem_.d_av * lap.values()[i] - gn.values()[i];
    }
  }
  return ev;
}

double EnergyFunctional::potential(const LatticeField& f) const {
  return evaluate(f, false).potential;
}

double EnergyFunctional::hamiltonian(const LatticeField& f) const {
  return evaluate(f, false).energy;
}

LatticeField EnergyFunctional::gradient(const LatticeField& f) const {
  return evaluate(f, true).gradient;
}

LatticeField EnergyFunctional::potential_gradient(const LatticeField& f) const {
  auto ev = evaluate(f, true);
  LatticeField lap(radius_);
  dirichlet_laplacian(f.values(), lap.values());
  LatticeField gn(radius_);
  for (std::size_t i = 0; i < f.size(); ++i) {
    gn.values()[i] = -ev.gradient.values()[i] - problem_.d_av * lap.values()[i];
  }
  return gn;
}

double nonlocal_potential(const Problem& problem, const LatticeField& f) {
  return EnergyFunctional(problem, f.radius()).potential(f);
}

double hamiltonian(const Problem& problem, const LatticeField& f) {
  return EnergyFunctional(problem, f.radius()).hamiltonian(f);
}

LatticeField gradient(const Problem& problem, const LatticeField& f) {
  return EnergyFunctional(problem, f.radius()).gradient(f);
}

double lagrange_multiplier(const Problem& problem, const LatticeField& f) {
  const double n2 = power_sum(f, 2.0);
  if (!(n2 > 0.0)) throw std::invalid_argument("Lagrange multiplier of the zero field");
  return inner(gradient(problem, f), f).real() / n2;
}

double el_residual(const Problem& problem, const LatticeField& f, double omega) {
  const double n = l2_norm(f);
  if (!(n > 0.0)) throw std::invalid_argument("residual of the zero field");
  auto r = gradient(problem, f);
  r -= Complex(omega) * f;
  return l2_norm(r) / n;
}

}  // namespace dms
