#pragma once

#include <string>
#include <string_view>

namespace qplas {

/// Physical constants of a unit system. Internal numerics always run with
/// c = eps0 = hbar = 1; the SI set is only used at the I/O boundary.
struct Constants {
  double c;
  double eps0;
  double hbar;

  static constexpr Constants si() { return {299792458.0, 8.8541878128e-12, 1.054571817e-34}; }
  static constexpr Constants natural() { return {1.0, 1.0, 1.0}; }
};

enum class UnitMode { SI, Natural };

/// Kinds of physical quantity that cross the I/O boundary.
enum class Quantity {
  Length,
  Volume,
  Frequency,  // angular frequency, rad/time
  Time,
  Rate,       // decay rate, 1/time
  Dipole,     // charge * length
  Green,      // dyadic Green tensor entries, 1/length
};

UnitMode parse_unit_mode(std::string_view tag);
std::string_view to_string(UnitMode mode);
Quantity parse_quantity(std::string_view tag);

/// Scaling between user-facing values and the dimensionless internal values.
///
/// In natural mode the user already supplies internal values (lengths in
/// units of L0, frequencies in c/L0) and the conversion is the identity.
/// In SI mode lengths are divided by L0, frequencies multiplied by L0/c, and
/// dipoles divided by sqrt(eps0 hbar c) L0.
class UnitSystem {
 public:
  UnitSystem() = default;
  UnitSystem(UnitMode mode, double reference_length);

  UnitMode mode() const { return mode_; }
  double reference_length() const { return l0_; }

  double to_internal(double value, Quantity q) const;
  double from_internal(double value, Quantity q) const;

 private:
  double scale(Quantity q) const;  // internal = value * scale

  UnitMode mode_ = UnitMode::Natural;
  double l0_ = 1.0;
};

/// Free-space spontaneous emission rate w^3 |d|^2 / (3 pi eps0 hbar c^3).
double vacuum_decay_rate(double omega, double dipole_norm_sq,
                         const Constants& k = Constants::natural());

}  // namespace qplas
