//! Two-photon resonant scattering through the biexciton, `a → b → c → b' → a`.
//!
//! The closed-form matrix element for input photons `(ω₁, ω₂)` and output
//! photons `(ω₁', ω₂')` on the energy shell `ω₁ + ω₂ = ω₁' + ω₂'` is
//!
//! ```text
//!           (s - 2ω_b)² + Γ²                  1                                 1
//! S = M · ----------------- · ----------------------------------- · -------------------------------------
//!           (s - ω_c)² + Γ²    (ω₁ - ω_b - iΓ/2)(ω₂ - ω_b - iΓ/2)   (ω₁' - ω_b + iΓ/2)(ω₂' - ω_b + iΓ/2)
//! ```
//!
//! with `s = ω₁ + ω₂` and `M = |μ_0b|² |μ_bc|²`. The input and output
//! denominators carry opposite signs of the width.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dimer::{Dipoles, EnergyLevels};
use crate::error::ModelError;
use crate::grid::{argmax, FrequencyGrid, IntensityGrid, Normalization};

/// Energy-conservation tolerance of [`s2_element`], in units of `E_x`.
pub const CONSERVATION_TOL: f64 = 1e-9;

/// How the fixed input photon is chosen when the other one is scanned.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ScatterInput {
    /// `ω₂ = ω_b`.
    Resonant,
    /// `ω₂ = ω_b / 2`.
    OffResonant,
    Free {
        omega2_in: f64,
    },
}

impl ScatterInput {
    /// The fixed input frequency `ω₂`.
    pub fn omega2(&self, levels: &EnergyLevels) -> Result<f64, ModelError> {
        let w2 = match *self {
            ScatterInput::Resonant => levels.omega_b,
            ScatterInput::OffResonant => levels.omega_b / 2.0,
            ScatterInput::Free { omega2_in } => omega2_in,
        };
        if !(w2 > 0.0 && w2.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "input photon frequency must be > 0, got {w2}"
            )));
        }
        Ok(w2)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScatterInput::Resonant => "resonant",
            ScatterInput::OffResonant => "off_resonant",
            ScatterInput::Free { .. } => "free",
        }
    }
}

/// Which quantity a scatter map holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterQuantity {
    /// `|S|²`
    #[default]
    Intensity,
    /// `|S|`
    Modulus,
}

impl std::str::FromStr for ScatterQuantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "intensity" => Ok(ScatterQuantity::Intensity),
            "modulus" => Ok(ScatterQuantity::Modulus),
            other => Err(format!(
                "unknown quantity '{other}' (expected intensity or modulus)"
            )),
        }
    }
}

impl ScatterQuantity {
    fn apply(self, s: Complex64) -> f64 {
        match self {
            ScatterQuantity::Intensity => s.norm_sqr(),
            ScatterQuantity::Modulus => s.norm(),
        }
    }
}

impl std::fmt::Display for ScatterQuantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScatterQuantity::Intensity => "intensity",
            ScatterQuantity::Modulus => "modulus",
        })
    }
}

/// Axis assignment of a [`ScatterGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterLayout {
    /// Rows scan the free input `ω₁`, columns the output `ω₁'`;
    /// `ω₂'` follows from energy conservation.
    InputOutput,
    /// Rows `ω₁'`, columns `ω₂'` at a fixed input pair, with the
    /// conservation delta stripped from the kernel.
    OutputPair,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterGrid {
    pub grid: FrequencyGrid,
    pub layout: ScatterLayout,
    pub input: ScatterInput,
    /// The fixed input `ω₂`.
    pub omega2_in: f64,
    pub quantity: ScatterQuantity,
    pub values: DMatrix<f64>,
    /// `max |ω₁ + ω₂ - ω₁' - ω₂'|` over the map. `None` for the
    /// delta-stripped output kernel, where it does not apply.
    pub conservation_residual: Option<f64>,
}

impl ScatterGrid {
    pub fn argmax(&self) -> (usize, usize) {
        argmax(&self.values)
    }

    /// View as an intensity grid, for Schmidt analysis.
    pub fn to_intensity(&self) -> Result<IntensityGrid, ModelError> {
        IntensityGrid::new(self.grid, self.values.clone(), Normalization::Raw)
    }
}

fn matrix_element(
    levels: &EnergyLevels,
    mu: Dipoles,
    w1: f64,
    w2: f64,
    w1p: f64,
    w2p: f64,
) -> Complex64 {
    let g = levels.gamma_b;
    let s = w1 + w2;
    let strength = (mu.mu_0b * mu.mu_0b) * (mu.mu_bc * mu.mu_bc);
    let ratio =
        ((s - 2.0 * levels.omega_b).powi(2) + g * g) / ((s - levels.omega_c).powi(2) + g * g);
    let input = Complex64::new(w1 - levels.omega_b, -g / 2.0)
        * Complex64::new(w2 - levels.omega_b, -g / 2.0);
    let output = Complex64::new(w1p - levels.omega_b, g / 2.0)
        * Complex64::new(w2p - levels.omega_b, g / 2.0);
    Complex64::new(strength * ratio, 0.0) / (input * output)
}

/// Two-photon scattering matrix element on the energy shell.
pub fn s2_element(
    levels: &EnergyLevels,
    mu: Dipoles,
    w1: f64,
    w2: f64,
    w1p: f64,
    w2p: f64,
) -> Result<Complex64, ModelError> {
    let input = w1 + w2;
    let output = w1p + w2p;
    if (input - output).abs() > CONSERVATION_TOL * levels.ex() {
        return Err(ModelError::ConservationViolation { input, output });
    }
    Ok(matrix_element(levels, mu, w1, w2, w1p, w2p))
}

/// Scatter map over (scanned input `ω₁`) × (output `ω₁'`) for a fixed second
/// input photon. The grid's first axis is the input, the second the output.
pub fn scatter_output_grid(
    levels: &EnergyLevels,
    mu: Dipoles,
    input: ScatterInput,
    grid: &FrequencyGrid,
    quantity: ScatterQuantity,
) -> Result<ScatterGrid, ModelError> {
    grid.validate()?;
    let w2 = input.omega2(levels)?;
    let cells = grid.evaluate(|w1, w1p| {
        let s = w1 + w2;
        let w2p = s - w1p;
        let residual = ((s - w1p) - w2p).abs();
        (
            quantity.apply(matrix_element(levels, mu, w1, w2, w1p, w2p)),
            residual,
        )
    });
    let values = cells.map(|(v, _)| v);
    let residual = cells.iter().map(|&(_, r)| r).fold(0.0, f64::max);
    Ok(ScatterGrid {
        grid: *grid,
        layout: ScatterLayout::InputOutput,
        input,
        omega2_in: w2,
        quantity,
        values,
        conservation_residual: Some(residual),
    })
}

/// Output-photon kernel of the matrix element at a fixed input pair
/// `(ω₁, ω₂)`, sampled over `(ω₁', ω₂')` with the conservation delta
/// factored out.
pub fn scatter_output_pair_grid(
    levels: &EnergyLevels,
    mu: Dipoles,
    omega1_in: f64,
    input: ScatterInput,
    grid: &FrequencyGrid,
    quantity: ScatterQuantity,
) -> Result<ScatterGrid, ModelError> {
    grid.validate()?;
    let w2 = input.omega2(levels)?;
    let values = grid
        .evaluate(|w1p, w2p| quantity.apply(matrix_element(levels, mu, omega1_in, w2, w1p, w2p)));
    Ok(ScatterGrid {
        grid: *grid,
        layout: ScatterLayout::OutputPair,
        input,
        omega2_in: w2,
        quantity,
        values,
        conservation_residual: None,
    })
}

/// Single-photon Raman lineshape through the bright state,
/// `|μ_0b|² / ((ω - ω_b)² + Γ²/4)`.
pub fn raman_lineshape(levels: &EnergyLevels, mu: Dipoles, w: f64) -> f64 {
    let g = levels.gamma_b;
    mu.mu_0b * mu.mu_0b / ((w - levels.omega_b).powi(2) + g * g / 4.0)
}

/// Two uncorrelated Raman events: the product of their lineshapes.
pub fn raman_product_intensity(levels: &EnergyLevels, mu: Dipoles, w1: f64, w2: f64) -> f64 {
    raman_lineshape(levels, mu, w1) * raman_lineshape(levels, mu, w2)
}

pub fn raman_grid(
    levels: &EnergyLevels,
    mu: Dipoles,
    grid: &FrequencyGrid,
    normalization: Normalization,
) -> Result<IntensityGrid, ModelError> {
    grid.validate()?;
    let values = grid.evaluate(|w1, w2| raman_product_intensity(levels, mu, w1, w2));
    IntensityGrid::new(*grid, values, normalization)
}
