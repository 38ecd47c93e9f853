//! Independent validators for the closed forms used elsewhere in the crate.
//!
//! Nothing here is used by the computational paths; these routines exist so
//! the closed forms can be checked against a route that shares none of
//! their algebra:
//!
//! * [`amplitude_by_quadrature`] inverts the resolvent product numerically
//!   instead of taking the ground-state pole residue by hand.
//! * [`two_pole_amplitude`] sums the two emission orderings explicitly
//!   instead of using the combined fraction.
//! * [`gram_entropy`] gets singular values from the eigenvalues of the Gram
//!   matrix `I Iᵀ`, computed in double-double arithmetic so that squaring
//!   the spectrum does not wipe out the small singular values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use twofloat::TwoFloat;

use crate::cascade::{cascade_amplitude, cascade_amplitude_ordered};
use crate::dimer::{Dipoles, EnergyLevels};
use crate::entanglement::{SchmidtSpectrum, Weighting};
use crate::error::ModelError;
use crate::grid::{check_values, IntensityGrid};

/// Minimum distance, in units of `Γ_b`, between any pole and the edge of the
/// quadrature window.
pub const MIN_POLE_MARGIN: f64 = 20.0;
/// Minimum number of quadrature nodes.
pub const MIN_POINTS: usize = 10_000;
/// Largest spread tolerated between the two first-order Richardson estimates.
pub const RICHARDSON_TOL: f64 = 0.01;

/// Integration window, node count and contour offset for the numerical
/// inversion of the resolvent product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub e_min: f64,
    pub e_max: f64,
    pub n_points: usize,
    /// Largest contour offset `η`; the extrapolation also uses `η/2` and `η/4`.
    pub eta: f64,
}

impl QuadratureSpec {
    pub fn new(e_min: f64, e_max: f64, n_points: usize, eta: f64) -> Result<Self, ModelError> {
        if e_max.is_nan()
            || e_min.is_nan()
            || e_max <= e_min
            || n_points < MIN_POINTS
            || eta.is_nan()
            || eta <= 0.0
        {
            return Err(ModelError::InvalidParameter(format!(
                "quadrature needs e_max > e_min, n_points >= {MIN_POINTS} and eta > 0, \
                 got [{e_min}, {e_max}], {n_points}, {eta}"
            )));
        }
        Ok(Self {
            e_min,
            e_max,
            n_points,
            eta,
        })
    }

    /// A window `30Γ` beyond the extreme poles, `η` small enough that the
    /// `e^{-ητ}` damping is in its linear regime, and nodes spaced at a
    /// twelfth of the smallest offset.
    pub fn auto(levels: &EnergyLevels, w1: f64, w2: f64, tau: f64) -> Self {
        let g = levels.gamma_b;
        let (lo, hi) = pole_span(levels, w1, w2);
        let e_min = lo - 30.0 * g;
        let e_max = hi + 30.0 * g;
        let eta = (g / 10.0).min(0.05 / tau);
        let h = eta / 4.0 / 12.0;
        let n_points = (((e_max - e_min) / h).ceil() as usize).max(MIN_POINTS);
        Self {
            e_min,
            e_max,
            n_points,
            eta,
        }
    }

    fn check_against(&self, levels: &EnergyLevels, w1: f64, w2: f64) -> Result<(), ModelError> {
        let g = levels.gamma_b;
        let (lo, hi) = pole_span(levels, w1, w2);
        if lo - self.e_min < MIN_POLE_MARGIN * g || self.e_max - hi < MIN_POLE_MARGIN * g {
            return Err(ModelError::InvalidParameter(format!(
                "quadrature window [{}, {}] must clear the poles [{lo}, {hi}] by {MIN_POLE_MARGIN}Γ",
                self.e_min, self.e_max
            )));
        }
        if self.eta > g / 10.0 {
            return Err(ModelError::InvalidParameter(format!(
                "eta = {} exceeds Γ/10 = {}",
                self.eta,
                g / 10.0
            )));
        }
        Ok(())
    }
}

/// Real parts of the three poles of the ordered resolvent product.
fn pole_span(levels: &EnergyLevels, w1: f64, w2: f64) -> (f64, f64) {
    let poles = [w1 + w2 + levels.e_a, w2 + levels.e_b, levels.e_c];
    let lo = poles.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = poles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Resolvent product for the ordering in which `ω₂` is emitted first and
/// `ω₁` carries the system from `b` to the ground state.
fn resolvent_product(
    levels: &EnergyLevels,
    mu: Dipoles,
    w1: f64,
    w2: f64,
    z: Complex64,
) -> Complex64 {
    let ground = z - (w1 + w2 + levels.e_a);
    let bright = z - w2 - Complex64::new(levels.e_b, -levels.gamma_b / 2.0);
    let biexciton = z - Complex64::new(levels.e_c, -levels.gamma_c / 2.0);
    Complex64::new(mu.product(), 0.0) / (ground * bright * biexciton)
}

/// `-(1/2πi) ∫ e^{-iEτ} G(E + iη) dE` by the composite midpoint rule.
fn time_amplitude(
    levels: &EnergyLevels,
    mu: Dipoles,
    w1: f64,
    w2: f64,
    tau: f64,
    spec: &QuadratureSpec,
    eta: f64,
) -> Complex64 {
    let h = (spec.e_max - spec.e_min) / spec.n_points as f64;
    let node = |k: usize| {
        let e = spec.e_min + (k as f64 + 0.5) * h;
        let (sin, cos) = (e * tau).sin_cos();
        Complex64::new(cos, -sin) * resolvent_product(levels, mu, w1, w2, Complex64::new(e, eta))
    };
    let total = pairwise_sum(0, spec.n_points, &node);
    // -(1/2πi) = i/2π
    total * Complex64::new(0.0, h / (2.0 * std::f64::consts::PI))
}

/// Fixed-shape pairwise summation, so the result is independent of how
/// the caller schedules evaluation.
fn pairwise_sum(start: usize, end: usize, f: &impl Fn(usize) -> Complex64) -> Complex64 {
    const LEAF: usize = 256;
    if end - start <= LEAF {
        (start..end)
            .map(f)
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    } else {
        let mid = start + (end - start) / 2;
        pairwise_sum(start, mid, f) + pairwise_sum(mid, end, f)
    }
}

/// Long-time cascade amplitude from numerical inversion of the resolvent
/// product, extrapolated to `η → 0⁺` from `η, η/2, η/4`.
///
/// The global phase `e^{-i(ω₁ + ω₂)τ}` is removed, so for `τΓ ≫ 1` the result
/// approaches [`cascade_amplitude_ordered`] as a complex number.
pub fn amplitude_by_quadrature(
    levels: &EnergyLevels,
    mu: Dipoles,
    w1: f64,
    w2: f64,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64, ModelError> {
    spec.check_against(levels, w1, w2)?;
    if tau.is_nan() || tau <= 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "tau must be > 0, got {tau}"
        )));
    }
    let f = |eta: f64| time_amplitude(levels, mu, w1, w2, tau, spec, eta);
    let (f1, f2, f3) = (f(spec.eta), f(spec.eta / 2.0), f(spec.eta / 4.0));
    let r12 = 2.0 * f2 - f1;
    let r23 = 2.0 * f3 - f2;
    let extrapolated = (4.0 * r23 - r12) / 3.0;
    if (r23 - r12).norm() > RICHARDSON_TOL * extrapolated.norm() {
        return Err(ModelError::NonConvergence(format!(
            "Richardson estimates {r12} and {r23} differ by more than {}%",
            RICHARDSON_TOL * 100.0
        )));
    }
    let (sin, cos) = ((w1 + w2 + levels.e_a) * tau).sin_cos();
    Ok(extrapolated * Complex64::new(cos, sin))
}

/// Sum of the two emission orderings, each with its own `Γ_b` and `Γ_c`.
pub fn two_pole_amplitude(levels: &EnergyLevels, mu: Dipoles, w1: f64, w2: f64) -> Complex64 {
    cascade_amplitude_ordered(levels, mu, w1, w2) + cascade_amplitude_ordered(levels, mu, w2, w1)
}

/// Largest relative gap between the explicit two-ordering sum and the
/// combined closed form over `samples` random frequency pairs.
///
/// The pairs are drawn from a fixed seed covering `[0, 1.5 ω_c]²`.
pub fn pole_identity_check(levels: &EnergyLevels, samples: usize) -> f64 {
    let mut rng = StdRng::seed_from_u64(0x5eed_b1b4);
    let top = 1.5 * levels.omega_c.abs().max(1.0);
    let mu = Dipoles::default();
    (0..samples)
        .map(|_| {
            let w1 = rng.random_range(0.0..top);
            let w2 = rng.random_range(0.0..top);
            let closed = cascade_amplitude(levels, mu, w1, w2);
            (two_pole_amplitude(levels, mu, w1, w2) - closed).norm() / closed.norm()
        })
        .fold(0.0, f64::max)
}

pub fn gram_entropy(grid: &IntensityGrid) -> Result<SchmidtSpectrum, ModelError> {
    gram_entropy_matrix(&grid.values)
}

/// Schmidt spectrum with `σₙ = sqrt(λₙ(I Iᵀ))`.
///
/// For a wide matrix the smaller Gram matrix `Iᵀ I` is used instead; the
/// non-zero spectra coincide.
pub fn gram_entropy_matrix(values: &DMatrix<f64>) -> Result<SchmidtSpectrum, ModelError> {
    check_values(values)?;
    if values.iter().all(|&v| v == 0.0) {
        return Err(ModelError::ZeroGrid);
    }
    let sigma = gram_singular_values(values);
    SchmidtSpectrum::from_singular_values(sigma, Weighting::Linear)
}

/// Singular values from the Gram eigenvalues, descending.
pub fn gram_singular_values(values: &DMatrix<f64>) -> Vec<f64> {
    let gram = if values.nrows() <= values.ncols() {
        gram_dd(values)
    } else {
        gram_dd(&values.transpose())
    };
    let (diag, off) = tridiagonalize(gram);
    let mut sigma: Vec<f64> = tridiagonal_eigenvalues(&diag, &off)
        .into_iter()
        .map(|l| f64::from(l).max(0.0).sqrt())
        .collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    sigma
}

/// Dense symmetric matrix in double-double precision, row-major.
struct SymDd {
    n: usize,
    a: Vec<TwoFloat>,
}

impl SymDd {
    fn at(&self, i: usize, j: usize) -> TwoFloat {
        self.a[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: TwoFloat) {
        self.a[i * self.n + j] = v;
    }
}

/// Double-double quotient. `TwoFloat`'s own division is only accurate to
/// f64 precision, so the quotient is refined with two residual steps.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::from(q1) + q2 + q3
}

/// `M Mᵀ` with exact products and double-double accumulation.
fn gram_dd(m: &DMatrix<f64>) -> SymDd {
    let n = m.nrows();
    let k = m.ncols();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..k).map(|c| m[(i, c)]).collect())
        .collect();
    let mut g = SymDd {
        n,
        a: vec![TwoFloat::from(0.0); n * n],
    };
    for i in 0..n {
        for j in 0..=i {
            let mut acc = TwoFloat::from(0.0);
            for (&x, &y) in rows[i].iter().zip(&rows[j]) {
                acc += TwoFloat::new_mul(x, y);
            }
            g.set(i, j, acc);
            g.set(j, i, acc);
        }
    }
    g
}

/// Householder reduction to tridiagonal form, eigenvalues only.
#[allow(clippy::needless_range_loop)]
fn tridiagonalize(mut a: SymDd) -> (Vec<TwoFloat>, Vec<TwoFloat>) {
    let n = a.n;
    let zero = TwoFloat::from(0.0);
    let mut off = vec![zero; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<TwoFloat> = (0..m).map(|r| a.at(k + 1 + r, k)).collect();
        let norm2 = x.iter().fold(zero, |s, &v| s + v * v);
        if norm2 == zero {
            off[k] = zero;
            continue;
        }
        let norm = norm2.sqrt();
        let alpha = if x[0] >= zero { -norm } else { norm };
        let mut v = x;
        v[0] -= alpha;
        let vtv = v.iter().fold(zero, |s, &t| s + t * t);
        if vtv == zero {
            off[k] = alpha;
            continue;
        }
        let beta = dd_div(TwoFloat::from(2.0), vtv);
        // p = β A v over the trailing block
        let p: Vec<TwoFloat> = (0..m)
            .map(|r| {
                let mut s = zero;
                for (c, &vc) in v.iter().enumerate() {
                    s += a.at(k + 1 + r, k + 1 + c) * vc;
                }
                beta * s
            })
            .collect();
        let vp = v.iter().zip(&p).fold(zero, |s, (&vi, &pi)| s + vi * pi);
        let half = beta * vp * 0.5;
        let q: Vec<TwoFloat> = p.iter().zip(&v).map(|(&pi, &vi)| pi - half * vi).collect();
        for r in 0..m {
            for c in 0..=r {
                let upd = a.at(k + 1 + r, k + 1 + c) - v[r] * q[c] - q[r] * v[c];
                a.set(k + 1 + r, k + 1 + c, upd);
                a.set(k + 1 + c, k + 1 + r, upd);
            }
        }
        off[k] = alpha;
    }
    if n >= 2 {
        off[n - 2] = a.at(n - 1, n - 2);
    }
    let diag = (0..n).map(|i| a.at(i, i)).collect();
    (diag, off)
}

/// Number of eigenvalues strictly below `x` (Sturm sequence).
fn sturm_count(diag: &[TwoFloat], off2: &[TwoFloat], x: TwoFloat, tiny: TwoFloat) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    for i in 0..diag.len() {
        if i > 0 {
            q = diag[i] - x - dd_div(off2[i - 1], q);
        }
        if q.abs() < tiny {
            q = if q < TwoFloat::from(0.0) { -tiny } else { tiny };
        }
        if q < TwoFloat::from(0.0) {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of a symmetric tridiagonal matrix by bisection,
/// ascending, to double-double absolute accuracy.
fn tridiagonal_eigenvalues(diag: &[TwoFloat], off: &[TwoFloat]) -> Vec<TwoFloat> {
    let n = diag.len();
    let off2: Vec<TwoFloat> = off.iter().map(|&e| e * e).collect();
    if n == 0 {
        return Vec::new();
    }
    let (mut lo, mut hi) = (diag[0], diag[0]);
    for i in 0..n {
        let mut r = TwoFloat::from(0.0);
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = lo
        .abs()
        .max(hi.abs())
        .max(TwoFloat::from(f64::MIN_POSITIVE));
    let tol = scale * TwoFloat::from(1e-31);
    let tiny = scale * TwoFloat::from(1e-60);
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..400 {
                if b - a <= tol {
                    break;
                }
                let mid = (a + b) * 0.5;
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(diag, &off2, mid, tiny) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            (a + b) * 0.5
        })
        .collect()
}
