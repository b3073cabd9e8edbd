#pragma once

#include <array>
#include <functional>

#include "qplas/shell_quadrature.hpp"
#include "qplas/types.hpp"

// Free-space dyadic Green tensor G0+ and its plane-wave representation.
// Internal units throughout: c = 1, so the wavenumber equals omega.

namespace qplas {

cplx scalar_green(const Vec3& r, const Vec3& rp, double omega);

/// Off-source closed form of G0+(r, rp, omega); the -(1/3k^2) delta term is
/// carried by self_term instead.
Dyadic g0_closed(const Vec3& r, const Vec3& rp, double omega);

/// Off-source longitudinal part (1/k^2)(3 RR - I)/(4 pi R^3).
RealDyadic g0_longitudinal(const Vec3& r, const Vec3& rp, double omega);

/// Integral of the full G0+ distribution over the volume-equivalent sphere
/// of a voxel, a = (3 dV / 4 pi)^{1/3}: the delta term -1/(3k^2) plus the
/// principal-value part (2/3k^2)[(1 - i k a) e^{ika} - 1].
cplx self_term_coefficient(double voxel_volume, double omega);
Dyadic self_term(double voxel_volume, double omega);

enum class Polarization { Plus, Minus };
enum class Parity { Cos, Sin };

/// Plane-wave transverse mode kappa = (k, sigma, zeta); k_z >= 0.
struct PlaneWaveMode {
  Vec3 k;
  Polarization sigma = Polarization::Plus;
  Parity zeta = Parity::Cos;

  double omega() const { return k.norm(); }
};

/// Real orthonormal pair transverse to `k`. The reference axis is the one
/// along which k has its smallest component.
std::array<Vec3, 2> polarization_basis(const Vec3& k);

/// sqrt(2) (2 pi)^{-3/2} eps_sigma {cos | sin}(k.r).
Vec3 phi_plane_wave(const PlaneWaveMode& mode, const Vec3& r);

/// Im G0(x, y, omega) = (pi/2 omega) int dkappa Phi(x) (x) Phi(y) delta(omega_k - omega),
/// evaluated on the shell |k| = omega with the given direction rule.
RealDyadic im_g0_spectral(const Vec3& x, const Vec3& y, double omega, const SphereQuadrature& quad);

// Finite-difference helpers for differential checks.

using DyadicField = std::function<Dyadic(const Vec3&)>;
using VectorField = std::function<CVec3(const Vec3&)>;

/// Central-difference curl of a vector field.
CVec3 curl_fd(const VectorField& f, const Vec3& r, double h);
/// curl curl F = grad(div F) - laplacian F with second-order central stencils.
CVec3 curl_curl_fd(const VectorField& f, const Vec3& r, double h);
/// Column-wise curl of a dyadic field.
Dyadic curl_fd(const DyadicField& g, const Vec3& r, double h);
Dyadic curl_curl_fd(const DyadicField& g, const Vec3& r, double h);

/// Default FD step 1e-3 c/omega.
double default_fd_step(double omega);

/// |r| || (curl - i k rhat x) G(r, src) ||_F with the curl by central
/// differences. Throws if h >= 0.05 c/omega.
double sommerfeld_residual(const DyadicField& green, const Vec3& far_point, double omega, double h);
double sommerfeld_residual(const Vec3& far_point, const Vec3& src, double omega, double h);

}  // namespace qplas
