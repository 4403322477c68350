#pragma once

// Sign conventions of the decoupled pipelines, kept in one place.
//
// Biharmonic:    Delta^2 u = f,                     u in H^2_0
// Perturbed:     eps^2 Delta^2 u - Delta u = f
// HHJ:           Delta^2 u = f, with w = -Delta u and sigma = -grad^2 u
// Triharmonic:   -Delta^3 u = f,                    u in H^3_0
//
// curl v = (d2 v, -d1 v), rot v = d1 v2 - d2 v1, bold curl acts row-wise.

namespace decouple::conventions {

/// Stokes -Delta phi + grad p = f. The saddle block B is (div v, q), so the
/// multiplier carries -p; the returned pressure is multiplier * this sign.
inline constexpr double stokes_pressure_sign = -1.0;

/// (grad w, grad v) = hhj_poisson_load_sign (f, v). The plate form with load
/// g = -f reads (grad w, grad v) = -(g, v), so w = -Delta u.
inline constexpr double hhj_poisson_load_sign = 1.0;

/// (sym curl p, sym curl q) = hhj_symcurl_load_sign (pi w, sym curl q).
inline constexpr double hhj_symcurl_load_sign = -1.0;

/// sigma = sym curl p + hhj_sigma_pi_sign pi w.
inline constexpr double hhj_sigma_pi_sign = 1.0;

/// (grad u, grad chi) = (sigma, pi chi) = (tr sigma, chi).
inline constexpr double hhj_final_load_sign = 1.0;

/// Triharmonic: the inner biharmonic solve takes the load f unchanged.
inline constexpr double triharmonic_inner_load_sign = 1.0;

}  // namespace decouple::conventions
