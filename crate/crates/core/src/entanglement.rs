//! Schmidt analysis of two-photon spectra.
//!
//! A sampled intensity `I(ω₁, ω₂)` is expanded by singular value
//! decomposition as `Σ σₙ fₙ(ω₁) gₙ(ω₂)`. The weights are the singular
//! values normalized to unit sum, `rₙ = σₙ / Σσₘ`, and the entanglement
//! entropy is `S = -Σ rₙ ln rₙ` in nats. A separable spectrum has a single
//! non-zero weight and zero entropy.
//!
//! Weighting by `σₙ²` (the usual convention for a normalized amplitude) is
//! available through [`Weighting::Squared`] and is what
//! [`schmidt_decompose_amplitude`] uses; the intensity analysis always uses
//! the linear weighting.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::cascade_grid;
use crate::dimer::{energy_levels, DimerParams};
use crate::error::ModelError;
use crate::grid::{check_values, FrequencyGrid, IntensityGrid, Normalization};
use crate::scattering::{scatter_output_grid, ScatterInput, ScatterQuantity};

/// Weights at or below this value do not count toward the effective rank.
pub const EFFECTIVE_RANK_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Weighting {
    /// `rₙ ∝ σₙ`
    #[default]
    Linear,
    /// `rₙ ∝ σₙ²`
    Squared,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtSpectrum {
    /// Descending, summing to one.
    pub weights: Vec<f64>,
    /// Nats.
    pub entropy: f64,
    pub effective_rank: usize,
}

impl SchmidtSpectrum {
    /// Builds the spectrum from singular values in any order.
    pub fn from_singular_values(
        mut sigma: Vec<f64>,
        weighting: Weighting,
    ) -> Result<Self, ModelError> {
        if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(ModelError::InvalidParameter(
                "singular values must be finite and >= 0".into(),
            ));
        }
        sigma.sort_by(|a, b| b.total_cmp(a));
        if weighting == Weighting::Squared {
            sigma.iter_mut().for_each(|s| *s *= *s);
        }
        let total: f64 = sigma.iter().sum();
        if total <= 0.0 {
            return Err(ModelError::ZeroGrid);
        }
        let weights: Vec<f64> = sigma.iter().map(|s| s / total).collect();
        let entropy = entropy(&weights);
        let effective_rank = weights
            .iter()
            .filter(|&&r| r > EFFECTIVE_RANK_CUTOFF)
            .count();
        Ok(Self {
            weights,
            entropy,
            effective_rank,
        })
    }

    /// `σ₂ / σ₁`, zero for a single mode.
    pub fn second_ratio(&self) -> f64 {
        match self.weights.as_slice() {
            [first, second, ..] => second / first,
            _ => 0.0,
        }
    }
}

/// `-Σ r ln r` with `0 ln 0 = 0`.
pub fn entropy(weights: &[f64]) -> f64 {
    let s: f64 = weights
        .iter()
        .filter(|&&r| r > 0.0)
        .map(|&r| -r * r.ln())
        .sum();
    // roundoff can leave -0.0 or a tiny negative for a pure state
    s.max(0.0)
}

fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    m.singular_values().iter().copied().collect()
}

pub fn schmidt_decompose(grid: &IntensityGrid) -> Result<SchmidtSpectrum, ModelError> {
    schmidt_decompose_matrix(&grid.values)
}

/// Schmidt spectrum of a raw non-negative matrix.
pub fn schmidt_decompose_matrix(values: &DMatrix<f64>) -> Result<SchmidtSpectrum, ModelError> {
    check_values(values)?;
    if values.iter().all(|&v| v == 0.0) {
        return Err(ModelError::ZeroGrid);
    }
    SchmidtSpectrum::from_singular_values(singular_values(values), Weighting::Linear)
}

/// Schmidt spectrum of a complex amplitude, weighted by `σₙ²`.
pub fn schmidt_decompose_amplitude(
    amplitude: &DMatrix<Complex64>,
) -> Result<SchmidtSpectrum, ModelError> {
    if amplitude
        .iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(ModelError::InvalidParameter(
            "amplitude must be finite".into(),
        ));
    }
    if amplitude.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(ModelError::ZeroGrid);
    }
    SchmidtSpectrum::from_singular_values(singular_values(amplitude), Weighting::Squared)
}

/// Which two-photon distribution an entropy is computed from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum EntropySource {
    Cascade,
    /// The (input `ω₁`) × (output `ω₁'`) scatter map for a fixed second input.
    Scatter {
        input: ScatterInput,
    },
}

impl EntropySource {
    pub fn name(&self) -> &'static str {
        match self {
            EntropySource::Cascade => "cascade",
            EntropySource::Scatter { .. } => "scatter",
        }
    }
}

/// Schmidt spectrum of the chosen distribution for one parameter set.
pub fn spectrum_of_params(
    p: &DimerParams,
    grid: &FrequencyGrid,
    source: EntropySource,
) -> Result<SchmidtSpectrum, ModelError> {
    let levels = energy_levels(p)?;
    let intensity = match source {
        EntropySource::Cascade => cascade_grid(&levels, p.dipoles(), grid, Normalization::Raw)?,
        EntropySource::Scatter { input } => scatter_output_grid(
            &levels,
            p.dipoles(),
            input,
            grid,
            ScatterQuantity::Intensity,
        )?
        .to_intensity()?,
    };
    schmidt_decompose(&intensity)
}

pub fn entropy_of_params(
    p: &DimerParams,
    grid: &FrequencyGrid,
    source: EntropySource,
) -> Result<f64, ModelError> {
    spectrum_of_params(p, grid, source).map(|s| s.entropy)
}

/// Samples of one sweep axis, endpoints inclusive. A single sample sits at `min`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self, ModelError> {
        if !(min.is_finite() && max.is_finite()) || count == 0 || (count > 1 && max < min) {
            return Err(ModelError::InvalidGrid(format!(
                "sweep axis {min}:{max}:{count} needs finite bounds, max >= min and count >= 1"
            )));
        }
        Ok(Self { min, max, count })
    }

    pub fn step(&self) -> f64 {
        if self.count > 1 {
            (self.max - self.min) / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count > 1 && i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.step()
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Entropy over a rectangle of `(J, U)` values.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub j_values: Vec<f64>,
    pub u_values: Vec<f64>,
    /// Rows follow `J`, columns `U`. Failed points hold `NaN`.
    pub entropy: DMatrix<f64>,
    /// Parameters shared by every point; `j` and `u` are overwritten per point.
    pub base: DimerParams,
    pub grid: FrequencyGrid,
    pub source: EntropySource,
    /// `(J, U)` pairs on `2J = U` for each `U` sample whose `J = U/2` lies
    /// inside the `J` range.
    pub separable_locus: Vec<(f64, f64)>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.entropy.iter().filter(|v| v.is_nan()).count()
    }
}

/// Entropy at every `(J, U)` of the two axes.
///
/// Points are evaluated in parallel on the current rayon pool; each point is
/// independent, so the result does not depend on the worker count. A failing
/// point is recorded as `NaN` instead of aborting the sweep.
pub fn entropy_sweep(
    j_axis: SweepAxis,
    u_axis: SweepAxis,
    grid: &FrequencyGrid,
    base: &DimerParams,
    source: EntropySource,
) -> Result<SweepResult, ModelError> {
    grid.validate()?;
    base.validate()?;
    let j_values = j_axis.values();
    let u_values = u_axis.values();
    let points: Vec<(usize, usize)> = (0..j_values.len())
        .flat_map(|a| (0..u_values.len()).map(move |b| (a, b)))
        .collect();
    let entropies: Vec<f64> = points
        .par_iter()
        .map(|&(a, b)| {
            let p = DimerParams {
                j: j_values[a],
                u: u_values[b],
                ..*base
            };
            entropy_of_params(&p, grid, source).unwrap_or(f64::NAN)
        })
        .collect();
    let entropy = DMatrix::from_row_slice(j_values.len(), u_values.len(), &entropies);
    let (j_lo, j_hi) = (j_axis.min.min(j_axis.max), j_axis.min.max(j_axis.max));
    let separable_locus = u_values
        .iter()
        .map(|&u| (u / 2.0, u))
        .filter(|&(j, _)| j >= j_lo && j <= j_hi)
        .collect();
    Ok(SweepResult {
        j_values,
        u_values,
        entropy,
        base: *base,
        grid: *grid,
        source,
        separable_locus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::separable_intensity;
    use crate::dimer::energy_levels;

    fn params(j: f64, u: f64) -> DimerParams {
        DimerParams::new(1.0, j, u, 0.6).unwrap()
    }

    #[test]
    fn rank_one_grid_has_zero_entropy() {
        let l = energy_levels(&params(0.0, 0.0)).unwrap();
        let grid = FrequencyGrid::square(0.0, 3.0, 81).unwrap();
        let values = grid.evaluate(|a, b| separable_intensity(&l, Default::default(), a, b));
        let s = schmidt_decompose_matrix(&values).unwrap();
        assert!(s.entropy < 1e-10);
        assert!((s.weights[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.effective_rank, 1);
    }

    #[test]
    fn identity_has_maximal_entropy() {
        for n in [1usize, 2, 5, 16] {
            let s = schmidt_decompose_matrix(&DMatrix::identity(n, n)).unwrap();
            assert!((s.entropy - (n as f64).ln()).abs() < 1e-12);
            assert!(s.weights.iter().all(|w| (w - 1.0 / n as f64).abs() < 1e-14));
            assert_eq!(s.effective_rank, n);
        }
    }

    #[test]
    fn zero_and_negative_grids_are_rejected() {
        assert_eq!(
            schmidt_decompose_matrix(&DMatrix::zeros(3, 3)),
            Err(ModelError::ZeroGrid)
        );
        let mut m = DMatrix::identity(3, 3);
        m[(1, 2)] = -0.5;
        assert!(matches!(
            schmidt_decompose_matrix(&m),
            Err(ModelError::InvalidGridValue { row: 1, col: 2 })
        ));
        m[(1, 2)] = f64::NAN;
        assert!(schmidt_decompose_matrix(&m).is_err());
    }

    #[test]
    fn squared_weighting_differs_from_linear() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0]));
        let lin = SchmidtSpectrum::from_singular_values(vec![1.0, 3.0], Weighting::Linear).unwrap();
        let sq = SchmidtSpectrum::from_singular_values(vec![3.0, 1.0], Weighting::Squared).unwrap();
        assert_eq!(lin.weights, vec![0.75, 0.25]);
        assert_eq!(sq.weights, vec![0.9, 0.1]);
        assert_eq!(schmidt_decompose_matrix(&m).unwrap().weights, lin.weights);
    }

    #[test]
    fn separable_amplitude_is_pure() {
        let l = energy_levels(&params(0.25, 0.5)).unwrap();
        let grid = FrequencyGrid::square(0.0, 3.0, 61).unwrap();
        let amp = crate::cascade::cascade_amplitude_grid(&l, Default::default(), &grid).unwrap();
        let s = schmidt_decompose_amplitude(&amp).unwrap();
        assert!(s.entropy < 1e-10);
        let entangled = energy_levels(&params(-0.5, 1.0)).unwrap();
        let amp =
            crate::cascade::cascade_amplitude_grid(&entangled, Default::default(), &grid).unwrap();
        assert!(schmidt_decompose_amplitude(&amp).unwrap().entropy > 1e-3);
    }

    #[test]
    fn entropy_of_special_points() {
        let grid = FrequencyGrid::square(0.0, 3.0, 101).unwrap();
        assert!(
            entropy_of_params(&params(0.0, 0.0), &grid, EntropySource::Cascade).unwrap() <= 1e-8
        );
        assert!(
            entropy_of_params(&params(0.3, 0.6), &grid, EntropySource::Cascade).unwrap() <= 1e-8
        );
        let j_agg = entropy_of_params(&params(-0.3, 0.6), &grid, EntropySource::Cascade).unwrap();
        let h_agg = entropy_of_params(&params(0.3, 0.6), &grid, EntropySource::Cascade).unwrap();
        assert!(j_agg > h_agg);
    }

    #[test]
    fn single_point_sweep_matches_direct_entropy() {
        let grid = FrequencyGrid::square(0.0, 3.0, 61).unwrap();
        let base = params(0.0, 0.0);
        let sweep = entropy_sweep(
            SweepAxis::new(-0.4, -0.4, 1).unwrap(),
            SweepAxis::new(0.7, 0.7, 1).unwrap(),
            &grid,
            &base,
            EntropySource::Cascade,
        )
        .unwrap();
        let direct = entropy_of_params(&params(-0.4, 0.7), &grid, EntropySource::Cascade).unwrap();
        assert_eq!(sweep.entropy[(0, 0)], direct);
        assert!(sweep.separable_locus.is_empty());
    }

    #[test]
    fn failing_points_become_nan() {
        // J = -1 puts the bright state at zero frequency, where the
        // off-resonant input ω_b/2 is undefined
        let grid = FrequencyGrid::square(0.0, 3.0, 21).unwrap();
        let sweep = entropy_sweep(
            SweepAxis::new(-1.0, 0.0, 3).unwrap(),
            SweepAxis::new(0.5, 0.5, 1).unwrap(),
            &grid,
            &params(0.0, 0.0),
            EntropySource::Scatter {
                input: ScatterInput::OffResonant,
            },
        )
        .unwrap();
        assert!(sweep.entropy[(0, 0)].is_nan());
        assert!(sweep.entropy[(1, 0)].is_finite());
        assert_eq!(sweep.failures(), 1);
    }

    #[test]
    fn sweep_axis_values() {
        let a = SweepAxis::new(-1.0, 1.0, 81).unwrap();
        assert_eq!(a.value(0), -1.0);
        assert_eq!(a.value(80), 1.0);
        assert!((a.value(40)).abs() < 1e-15);
        assert!(SweepAxis::new(1.0, -1.0, 3).is_err());
        assert!(SweepAxis::new(0.0, 1.0, 0).is_err());
    }
}
