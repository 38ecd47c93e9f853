//! Two-qubit excitonic dimer: spectrum, dressed energies, resolvents and
//! aggregate classification.
//!
//! Units are reduced throughout: `ħ = 1` and energies are expressed in units
//! of the site excitation energy `E_x` (default `1`). Radiative level shifts
//! are taken to be zero, so a dressed level is its bare energy plus a decay
//! half-width on the imaginary axis.
//!
//! The single-excitation manifold splits into a bright state `b` at
//! `E_x + J` and a dark state `d` at `E_x - J`. The doubly excited state `c`
//! sits at `2E_x + U`. Only `b` couples to the field, so `d` is carried for
//! bookkeeping but never enters an amplitude.

use num_complex::Complex64;

use crate::error::ModelError;

/// Physical parameters of the dimer in reduced units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimerParams {
    /// Site excitation energy `E_x`.
    pub ex: f64,
    /// Exchange coupling `J` (signed).
    pub j: f64,
    /// Biexciton interaction `U` (signed).
    pub u: f64,
    /// Linewidth `Γ`: the bright state decays at `Γ`, the biexciton at `2Γ`.
    pub gamma: f64,
    /// Transition dipole magnitude `|μ_0b|`.
    pub mu_0b: f64,
    /// Transition dipole magnitude `|μ_bc|`.
    pub mu_bc: f64,
}

impl Default for DimerParams {
    fn default() -> Self {
        Self {
            ex: 1.0,
            j: 0.0,
            u: 0.0,
            gamma: 0.6,
            mu_0b: 1.0,
            mu_bc: 1.0,
        }
    }
}

impl DimerParams {
    /// Parameters with unit transition dipoles.
    pub fn new(ex: f64, j: f64, u: f64, gamma: f64) -> Result<Self, ModelError> {
        let p = Self {
            ex,
            j,
            u,
            gamma,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_dipoles(mut self, mu_0b: f64, mu_bc: f64) -> Result<Self, ModelError> {
        self.mu_0b = mu_0b;
        self.mu_bc = mu_bc;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = [self.ex, self.j, self.u, self.gamma, self.mu_0b, self.mu_bc]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ModelError::InvalidParameter(
                "all parameters must be finite".into(),
            ));
        }
        if self.ex <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "ex must be > 0, got {}",
                self.ex
            )));
        }
        if self.gamma <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if self.mu_0b < 0.0 || self.mu_bc < 0.0 {
            return Err(ModelError::InvalidParameter(
                "dipole magnitudes must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn dipoles(&self) -> Dipoles {
        Dipoles {
            mu_0b: self.mu_0b,
            mu_bc: self.mu_bc,
        }
    }
}

/// Transition dipole magnitudes of the two radiative steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dipoles {
    pub mu_0b: f64,
    pub mu_bc: f64,
}

impl Default for Dipoles {
    fn default() -> Self {
        Self {
            mu_0b: 1.0,
            mu_bc: 1.0,
        }
    }
}

impl Dipoles {
    /// `μ_0b μ_bc`, the numerator shared by every cascade amplitude.
    pub fn product(&self) -> f64 {
        self.mu_0b * self.mu_bc
    }
}

/// A dressed level `E_n + iħΓ_n/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexEnergy {
    pub re: f64,
    /// `ħΓ_n / 2`, never negative.
    pub im_halfwidth: f64,
}

impl ComplexEnergy {
    pub fn new(re: f64, im_halfwidth: f64) -> Result<Self, ModelError> {
        if im_halfwidth.is_nan() || im_halfwidth < 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "half-width must be >= 0, got {im_halfwidth}"
            )));
        }
        Ok(Self { re, im_halfwidth })
    }
}

/// The four dimer levels with decay rates of the two radiative ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLevels {
    pub e_a: f64,
    pub e_b: f64,
    pub e_d: f64,
    pub e_c: f64,
    pub gamma_b: f64,
    pub gamma_c: f64,
    pub omega_b: f64,
    pub omega_c: f64,
}

impl EnergyLevels {
    pub fn ground(&self) -> ComplexEnergy {
        ComplexEnergy {
            re: self.e_a,
            im_halfwidth: 0.0,
        }
    }

    pub fn bright(&self) -> ComplexEnergy {
        ComplexEnergy {
            re: self.e_b,
            im_halfwidth: self.gamma_b / 2.0,
        }
    }

    /// The dark state is radiatively stable within the rotating-wave picture.
    pub fn dark(&self) -> ComplexEnergy {
        ComplexEnergy {
            re: self.e_d,
            im_halfwidth: 0.0,
        }
    }

    pub fn biexciton(&self) -> ComplexEnergy {
        ComplexEnergy {
            re: self.e_c,
            im_halfwidth: self.gamma_c / 2.0,
        }
    }

    /// Site energy recovered from the exchange-split pair.
    pub fn ex(&self) -> f64 {
        0.5 * (self.e_b + self.e_d)
    }

    /// `2ω_b - ω_c`, which equals `2J - U`.
    pub fn detuning(&self) -> f64 {
        2.0 * self.omega_b - self.omega_c
    }

    /// Overrides the biexciton width, breaking `Γ_c = 2Γ_b`.
    ///
    /// Only meaningful for validating the closed-form cascade amplitude,
    /// which assumes the width relation.
    pub fn with_biexciton_width(mut self, gamma_c: f64) -> Self {
        self.gamma_c = gamma_c;
        self
    }
}

pub fn energy_levels(p: &DimerParams) -> Result<EnergyLevels, ModelError> {
    p.validate()?;
    let e_a = 0.0;
    let e_b = p.ex + p.j;
    let e_d = p.ex - p.j;
    let e_c = 2.0 * p.ex + p.u;
    Ok(EnergyLevels {
        e_a,
        e_b,
        e_d,
        e_c,
        gamma_b: p.gamma,
        gamma_c: 2.0 * p.gamma,
        omega_b: e_b - e_a,
        omega_c: e_c - e_a,
    })
}

/// Diagonal resolvent element `1 / (z - E_n + iħΓ_n/2)`.
pub fn resolvent(level: ComplexEnergy, z: Complex64) -> Result<Complex64, ModelError> {
    let denom = z - Complex64::new(level.re, -level.im_halfwidth);
    if denom.re == 0.0 && denom.im == 0.0 {
        return Err(ModelError::DivideByZero { re: z.re, im: z.im });
    }
    Ok(denom.inv())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Noninteracting,
    JAggregate,
    /// Also returned on the `J = 0, U != 0` boundary.
    HAggregate,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Noninteracting => "noninteracting",
            Regime::JAggregate => "j_aggregate",
            Regime::HAggregate => "h_aggregate",
        })
    }
}

pub fn classify(p: &DimerParams) -> Regime {
    if p.j == 0.0 && p.u == 0.0 {
        Regime::Noninteracting
    } else if p.j < 0.0 {
        Regime::JAggregate
    } else {
        Regime::HAggregate
    }
}

/// True when `2ω_b = ω_c` within `tol` relative to `max(|U|, |J|, E_x)`.
///
/// At such points the cascade emission spectrum factorizes.
pub fn is_separable_point(p: &DimerParams, tol: f64) -> bool {
    separable_detuning_ok(2.0 * p.j - p.u, p.u.abs().max(p.j.abs()).max(p.ex), tol)
}

pub(crate) fn separable_detuning_ok(detuning: f64, scale: f64, tol: f64) -> bool {
    detuning.abs() <= tol * scale
}
