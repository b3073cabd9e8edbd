#include "qplas/constants.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qplas {

UnitMode parse_unit_mode(std::string_view tag) {
  if (tag == "SI" || tag == "si") return UnitMode::SI;
  if (tag == "natural") return UnitMode::Natural;
  throw std::invalid_argument("unknown unit tag '" + std::string(tag) +
                              "' (expected \"SI\" or \"natural\")");
}

std::string_view to_string(UnitMode mode) {
  return mode == UnitMode::SI ? "SI" : "natural";
}

Quantity parse_quantity(std::string_view tag) {
  if (tag == "length") return Quantity::Length;
  if (tag == "volume") return Quantity::Volume;
  if (tag == "frequency") return Quantity::Frequency;
  if (tag == "time") return Quantity::Time;
  if (tag == "rate") return Quantity::Rate;
  if (tag == "dipole") return Quantity::Dipole;
  if (tag == "green") return Quantity::Green;
  throw std::invalid_argument("unknown quantity tag '" + std::string(tag) + "'");
}

UnitSystem::UnitSystem(UnitMode mode, double reference_length)
    : mode_(mode), l0_(reference_length) {
  if (!(reference_length > 0.0) || !std::isfinite(reference_length))
    throw std::invalid_argument("reference length L0 must be positive and finite");
}

double UnitSystem::scale(Quantity q) const {
  if (mode_ == UnitMode::Natural) return 1.0;
  const auto si = Constants::si();
  switch (q) {
    case Quantity::Length: return 1.0 / l0_;
    case Quantity::Volume: return 1.0 / (l0_ * l0_ * l0_);
    case Quantity::Frequency: return l0_ / si.c;
    case Quantity::Rate: return l0_ / si.c;
    case Quantity::Time: return si.c / l0_;
    case Quantity::Dipole: return 1.0 / (std::sqrt(si.eps0 * si.hbar * si.c) * l0_);
    case Quantity::Green: return l0_;
  }
  throw std::invalid_argument("unknown quantity");
}

double UnitSystem::to_internal(double value, Quantity q) const {
  if (!std::isfinite(value)) throw std::invalid_argument("value must be finite");
  return value * scale(q);
}

double UnitSystem::from_internal(double value, Quantity q) const {
  if (!std::isfinite(value)) throw std::invalid_argument("value must be finite");
  return value / scale(q);
}

double vacuum_decay_rate(double omega, double dipole_norm_sq, const Constants& k) {
  return omega * omega * omega * dipole_norm_sq /
         (3.0 * std::numbers::pi * k.eps0 * k.hbar * k.c * k.c * k.c);
}

}  // namespace qplas
