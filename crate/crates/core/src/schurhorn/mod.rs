//! Feasibility and synthesis for prescribed diagonals of normal operators:
//! an exact-rational LP with Farkas certificates, the hull necessity test,
//! and unitary synthesis in the tracial and discrete truncation models.

mod feasibility;
mod necessity;
mod simplex;
mod spectral;
mod synth;

pub use feasibility::{
    feasibility_partition, rational, solve_system, three_point_witness, FarkasCertificate, FeasibilitySystem,
    FeasibilityWitness, RATIONALIZE_TOL,
};
pub use necessity::{check_necessity, HullViolation, NecessityReport};
pub use simplex::{is_farkas_certificate, solve_feasibility, LpOutcome, LpScalar};
pub use spectral::{DiscreteSpectrum, SpectralData, TargetBlock, TracialSpectrum};
pub use synth::{
    synth_diagonal_discrete, synth_diagonal_tracial, synth_diagonal_tracial_capped, AbsorptionBlock, DiscreteSynthesis,
    SnapReport, SynthesizedUnitary, TracialSynthesis, UnitaryBlock,
};
