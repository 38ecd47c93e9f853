//! Two-photon emission and scattering from a coupled excitonic dimer.
//!
//! The dimer has a ground state, a bright and a dark single-exciton state
//! split by the coupling `J`, and a biexciton shifted by the binding
//! energy `U`. The crate computes the joint spectral amplitude of the
//! biexciton cascade, the two-photon scattering matrix element, their
//! Schmidt spectra, and independent numerical cross-checks of each.
//!
//! Units are reduced: `ħ = 1` and energies are usually quoted relative to
//! the monomer exciton energy `ex`.
//!
//! ```
//! use bds::{cascade_grid, energy_levels, schmidt_decompose, DimerParams, FrequencyGrid, Normalization};
//!
//! let p = DimerParams::new(1.0, -0.5, 1.0, 0.6)?;
//! let levels = energy_levels(&p)?;
//! let grid = FrequencyGrid::square(0.0, 3.0, 101)?;
//! let intensity = cascade_grid(&levels, p.dipoles(), &grid, Normalization::UnitSum)?;
//! let spectrum = schmidt_decompose(&intensity)?;
//! assert!(spectrum.entropy > 0.1);
//! # Ok::<(), bds::ModelError>(())
//! ```

pub mod cascade;
pub mod cli;
pub mod dimer;
pub mod entanglement;
pub mod error;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod scattering;

pub use cascade::{
    cascade_amplitude, cascade_amplitude_grid, cascade_amplitude_ordered,
    cascade_amplitude_separable, cascade_grid, cascade_intensity, separable_intensity,
};
pub use dimer::{
    classify, energy_levels, is_separable_point, resolvent, ComplexEnergy, DimerParams, Dipoles,
    EnergyLevels, Regime,
};
pub use entanglement::{
    entropy, entropy_of_params, entropy_sweep, schmidt_decompose, schmidt_decompose_amplitude,
    schmidt_decompose_matrix, spectrum_of_params, EntropySource, SchmidtSpectrum, SweepAxis,
    SweepResult, Weighting,
};
pub use error::{IoError, ModelError};
pub use grid::{Axis, FrequencyGrid, IntensityGrid, Normalization};
pub use io::{read_grid, write_grid, OutputFormat, Table};
pub use oracle::{
    amplitude_by_quadrature, gram_entropy, pole_identity_check, two_pole_amplitude, QuadratureSpec,
};
pub use scattering::{
    raman_grid, raman_lineshape, raman_product_intensity, s2_element, scatter_output_grid,
    scatter_output_pair_grid, ScatterGrid, ScatterInput, ScatterLayout, ScatterQuantity,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/dimer.md")]
    mod dimer {}
    #[doc = include_str!("../../../book/src/cascade.md")]
    mod cascade {}
    #[doc = include_str!("../../../book/src/scattering.md")]
    mod scattering {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
