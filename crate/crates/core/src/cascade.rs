//! Two-photon cascade emission `c → b → 0`.
//!
//! The biexciton decays through the bright state, emitting a photon pair
//! with frequencies `(ω₁, ω₂)`. Long after both intermediate states have
//! decayed only the ground-state pole of the resolvent product survives,
//! which leaves a closed-form amplitude. The global phase
//! `e^{i(E₀ + ω₁ + ω₂)τ}` has unit modulus and is dropped everywhere.
//!
//! With `Γ_c = 2Γ_b = 2Γ` the two emission orderings combine into
//!
//! ```text
//!            μ_0b μ_bc         ω₁ + ω₂ - 2ω_b + iΓ
//! A = ------------------- · -----------------------------------
//!      ω₁ + ω₂ - ω_c + iΓ    (ω₁ - ω_b + iΓ/2)(ω₂ - ω_b + iΓ/2)
//! ```
//!
//! and the pair intensity is `|A|²`.

use num_complex::Complex64;

use crate::dimer::{separable_detuning_ok, Dipoles, EnergyLevels};
use crate::error::ModelError;
use crate::grid::{FrequencyGrid, IntensityGrid, Normalization};

/// Relative tolerance on `2ω_b = ω_c` accepted by the separable form.
pub const SEPARABILITY_TOL: f64 = 1e-9;

/// Amplitude for a single emission ordering, with `ω₁` the photon that
/// leaves the bright state.
pub fn cascade_amplitude_ordered(
    levels: &EnergyLevels,
    mu: Dipoles,
    w1: f64,
    w2: f64,
) -> Complex64 {
    let bright = Complex64::new(w1 - levels.omega_b, levels.gamma_b / 2.0);
    let pair = Complex64::new(w1 + w2 - levels.omega_c, levels.gamma_c / 2.0);
    Complex64::new(mu.product(), 0.0) / (bright * pair)
}

/// Amplitude summed over both emission orderings, in the combined form.
///
/// Assumes `Γ_c = 2Γ_b` and uses `Γ = Γ_b` in every factor.
pub fn cascade_amplitude(levels: &EnergyLevels, mu: Dipoles, w1: f64, w2: f64) -> Complex64 {
    let g = levels.gamma_b;
    let sum = w1 + w2;
    let pair = Complex64::new(sum - levels.omega_c, g);
    let numer = Complex64::new(sum - 2.0 * levels.omega_b, g);
    let b1 = Complex64::new(w1 - levels.omega_b, g / 2.0);
    let b2 = Complex64::new(w2 - levels.omega_b, g / 2.0);
    Complex64::new(mu.product(), 0.0) * numer / (pair * (b1 * b2))
}

/// Factored amplitude valid when the bright state lies halfway to the
/// biexciton.
pub fn cascade_amplitude_separable(
    levels: &EnergyLevels,
    mu: Dipoles,
    w1: f64,
    w2: f64,
) -> Result<Complex64, ModelError> {
    let detuning = levels.detuning();
    let scale = (levels.e_c - levels.e_b - levels.e_d)
        .abs()
        .max(0.5 * (levels.e_b - levels.e_d).abs())
        .max(levels.ex());
    if !separable_detuning_ok(detuning, scale, SEPARABILITY_TOL) {
        return Err(ModelError::NotSeparable { detuning });
    }
    let g = levels.gamma_b;
    let b1 = Complex64::new(w1 - levels.omega_b, g / 2.0);
    let b2 = Complex64::new(w2 - levels.omega_b, g / 2.0);
    Ok(Complex64::new(mu.product(), 0.0) / (b1 * b2))
}

pub fn cascade_intensity(levels: &EnergyLevels, mu: Dipoles, w1: f64, w2: f64) -> f64 {
    cascade_amplitude(levels, mu, w1, w2).norm_sqr()
}

/// Product of two bright-state Lorentzians, the separable intensity.
pub fn separable_intensity(levels: &EnergyLevels, mu: Dipoles, w1: f64, w2: f64) -> f64 {
    let hw2 = levels.gamma_b * levels.gamma_b / 4.0;
    let l1 = 1.0 / ((w1 - levels.omega_b).powi(2) + hw2);
    let l2 = 1.0 / ((w2 - levels.omega_b).powi(2) + hw2);
    (mu.mu_0b * mu.mu_0b) * (mu.mu_bc * mu.mu_bc) * l1 * l2
}

/// Cascade intensity over a frequency window.
pub fn cascade_grid(
    levels: &EnergyLevels,
    mu: Dipoles,
    grid: &FrequencyGrid,
    normalization: Normalization,
) -> Result<IntensityGrid, ModelError> {
    grid.validate()?;
    let values = grid.evaluate(|w1, w2| cascade_intensity(levels, mu, w1, w2));
    IntensityGrid::new(*grid, values, normalization)
}

/// Complex cascade amplitude over a frequency window, for amplitude-level
/// Schmidt analysis.
pub fn cascade_amplitude_grid(
    levels: &EnergyLevels,
    mu: Dipoles,
    grid: &FrequencyGrid,
) -> Result<nalgebra::DMatrix<Complex64>, ModelError> {
    grid.validate()?;
    Ok(grid.evaluate(|w1, w2| cascade_amplitude(levels, mu, w1, w2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimer::{energy_levels, DimerParams};

    fn levels(j: f64, u: f64, gamma: f64) -> EnergyLevels {
        energy_levels(&DimerParams::new(1.0, j, u, gamma).unwrap()).unwrap()
    }

    #[test]
    fn ordered_amplitude_at_double_resonance() {
        let l = levels(-0.5, 1.0, 0.6);
        let a = cascade_amplitude_ordered(&l, Dipoles::default(), l.omega_b, l.omega_c - l.omega_b);
        assert!((a.norm() - 1.0 / (0.3 * 0.6)).abs() < 1e-12);
    }

    #[test]
    fn dark_transition_gives_zero() {
        let l = levels(-0.5, 1.0, 0.6);
        let mu = Dipoles {
            mu_0b: 0.0,
            mu_bc: 1.0,
        };
        for &(w1, w2) in &[(0.3, 0.9), (1.5, 2.5), (l.omega_b, 1.0)] {
            assert_eq!(cascade_amplitude_ordered(&l, mu, w1, w2).norm(), 0.0);
            assert_eq!(cascade_intensity(&l, mu, w1, w2), 0.0);
        }
    }

    #[test]
    fn ordered_amplitude_decays_beyond_poles() {
        let l = levels(-0.5, 1.0, 0.6);
        let mu = Dipoles::default();
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let w1 = 3.0 + 0.25 * k as f64;
            let m = cascade_amplitude_ordered(&l, mu, w1, 1.0).norm();
            assert!(m < prev);
            prev = m;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn combined_amplitude_is_exactly_symmetric() {
        let l = levels(-0.5, 1.0, 0.6);
        let mu = Dipoles::default();
        let a = cascade_amplitude(&l, mu, 1.2, 0.9);
        let b = cascade_amplitude(&l, mu, 0.9, 1.2);
        assert_eq!(a, b);
        assert_eq!(
            cascade_intensity(&l, mu, 1.2, 0.9),
            cascade_intensity(&l, mu, 0.9, 1.2)
        );
    }

    #[test]
    fn separable_resonance_values() {
        let l = levels(0.25, 0.5, 0.6);
        let mu = Dipoles::default();
        let a = cascade_amplitude(&l, mu, l.omega_b, l.omega_b);
        assert!((a.norm() - 1.0 / 0.09).abs() < 1e-10);
        let i = cascade_intensity(&l, mu, l.omega_b, l.omega_b);
        let expected = (1.0f64 / 0.09).powi(2);
        assert!((i - expected).abs() / expected < 1e-12);
        assert!(
            (separable_intensity(&l, mu, l.omega_b, l.omega_b) - expected).abs() / expected < 1e-12
        );
        let s = cascade_amplitude_separable(&l, mu, l.omega_b, l.omega_b).unwrap();
        assert!((s.norm_sqr() - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn separable_form_matches_uncoupled_everywhere() {
        let l = levels(0.0, 0.0, 0.6);
        let mu = Dipoles::default();
        for i in 0..40 {
            for k in 0..40 {
                let (w1, w2) = (0.1 * i as f64, 0.075 * k as f64);
                let full = cascade_amplitude(&l, mu, w1, w2);
                let sep = cascade_amplitude_separable(&l, mu, w1, w2).unwrap();
                assert!((full - sep).norm() <= 1e-12 * sep.norm());
            }
        }
    }

    #[test]
    fn separable_form_refuses_j_aggregate() {
        let l = levels(-0.25, 0.5, 0.6);
        assert!(matches!(
            cascade_amplitude_separable(&l, Dipoles::default(), 1.0, 1.0),
            Err(ModelError::NotSeparable { .. })
        ));
    }

    #[test]
    fn noninteracting_grid_peaks_at_uncoupled_resonance() {
        let l = levels(0.0, 0.0, 0.6);
        let grid = FrequencyGrid::square(0.0, 3.0, 201).unwrap();
        let g = cascade_grid(&l, Dipoles::default(), &grid, Normalization::Raw).unwrap();
        let (i, j) = g.argmax();
        assert_eq!((i, j), (grid.omega1.nearest(1.0), grid.omega2.nearest(1.0)));
        assert_eq!(g.values, g.values.transpose());
    }

    #[test]
    fn j_aggregate_grid_has_off_diagonal_lobes() {
        let l = levels(-0.5, 1.0, 0.6);
        let grid = FrequencyGrid::square(0.0, 3.0, 201).unwrap();
        let g = cascade_grid(&l, Dipoles::default(), &grid, Normalization::Raw).unwrap();
        let (i, j) = g.argmax();
        let (w1, w2) = (grid.omega1.value(i), grid.omega2.value(j));
        // the two orderings interfere, pulling the peak inward by a fraction of Γ
        let tol = 0.25 * l.gamma_b;
        let (lo, hi) = (w1.min(w2), w1.max(w2));
        assert!((lo - l.omega_b).abs() <= tol, "low lobe at {lo}");
        assert!(
            (hi - (l.omega_c - l.omega_b)).abs() <= tol,
            "high lobe at {hi}"
        );
        assert!(
            (lo - 0.546).abs() <= grid.omega1.step() && (hi - 2.439).abs() <= grid.omega1.step()
        );
        // the mirror lobe carries the same value
        assert_eq!(g.values[(i, j)], g.values[(j, i)]);
    }

    #[test]
    fn unit_sum_grid_integrates_to_one() {
        let l = levels(-0.5, 1.0, 0.6);
        let grid = FrequencyGrid::square(0.0, 3.0, 101).unwrap();
        let g = cascade_grid(&l, Dipoles::default(), &grid, Normalization::UnitSum).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pole_residue_scales_inversely_with_width() {
        // At the double resonance (ω₁ - ω_b)·A stays bounded as ω₁ → ω_b but
        // grows like 1/Γ as the lines narrow.
        let mu = Dipoles::default();
        let residue = |gamma: f64| {
            let l = levels(-0.5, 1.0, gamma);
            let w1 = l.omega_b + 1e-3 * gamma;
            ((w1 - l.omega_b) * cascade_amplitude_ordered(&l, mu, w1, l.omega_c - l.omega_b)).norm()
        };
        let a = residue(1e-2);
        let b = residue(1e-3);
        assert!(a.is_finite() && b.is_finite());
        assert!((b / a - 10.0).abs() < 1e-3, "ratio {}", b / a);
    }
}
