use diagforge::carpenter::{
    carpenter_block, carpenter_discrete, carpenter_tracial_capped, carpenter_uhf_capped, JointPartitionSpec,
    ProjectionFamily, TracialPartition, DEFAULT_MAX_DIM,
};
use diagforge::numkit::{diagonalize_normal, dft_unitary, FamilyReport};
use diagforge::obstructions::{arveson_search, contrast_demo, square_infeasibility_certificate, SearchConfig};
use diagforge::schurhorn::{
    check_necessity, feasibility_partition, synth_diagonal_discrete, synth_diagonal_tracial_capped, DiscreteSpectrum,
    SynthesizedUnitary, TargetBlock, TracialSpectrum,
};
use diagforge::{Complex64, ComplexMatrix, Error};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::output::{parse, read_input, write_report};
use crate::{CarpenterCmd, Failure, Global, ObstructCmd, SynthCmd, VerifyCmd};

const DEFAULT_EPS: f64 = 0.05;
const NORMALITY_TOL: f64 = 1e-9;
const FAMILY_TOL: f64 = 1e-9;
const NECESSITY_TOL: f64 = 1e-8;
/// Eigenvalues closer than this (relative to the spectral radius) are one
/// spectral projection.
const CLUSTER_TOL: f64 = 1e-8;

type Outcome = Result<(), Failure>;

impl Global {
    fn eps(&self) -> Result<f64, Failure> {
        let eps = self.eps.unwrap_or(DEFAULT_EPS);
        if eps > 0.0 && eps.is_finite() {
            Ok(eps)
        } else {
            Err(Failure::Input(format!("--eps must be positive and finite, got {eps}")))
        }
    }

    /// `--max-dim`, else `DIAGFORGE_MAX_DIM`, else the library default.
    fn max_dim(&self) -> Result<usize, Failure> {
        if let Some(m) = self.max_dim {
            return Ok(m);
        }
        match std::env::var("DIAGFORGE_MAX_DIM") {
            Ok(v) => v.trim().parse().map_err(|_| Failure::Input(format!("DIAGFORGE_MAX_DIM is not a dimension: {v:?}"))),
            Err(_) => Ok(DEFAULT_MAX_DIM),
        }
    }

    fn read<T: serde::de::DeserializeOwned>(&self) -> Result<T, Failure> {
        Ok(parse(&read_input(self.input.as_deref())?)?)
    }

    fn emit<T: Serialize>(&self, report: &T) -> Outcome {
        Ok(write_report(report, self.output.as_deref())?)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NormalInput {
    Matrix { matrix: ComplexMatrix },
    Diagonal { diagonal: Vec<Complex64> },
    Bare(ComplexMatrix),
}

#[derive(Serialize)]
struct SpectralProjectionCheck {
    eigenvalue: Complex64,
    multiplicity: usize,
    trace: f64,
    /// max_i |diag(U* B U)_i - τ(B)|.
    max_deviation: f64,
}

pub fn flatten(g: &Global) -> Outcome {
    let n_mat = match g.read::<NormalInput>()? {
        NormalInput::Matrix { matrix } | NormalInput::Bare(matrix) => matrix,
        NormalInput::Diagonal { diagonal } => ComplexMatrix::from_diag(&diagonal),
    };
    let n = n_mat.dim();
    if n == 0 {
        return Err(Failure::Input("matrix must be nonempty".into()));
    }
    let dec = diagonalize_normal(&n_mat, g.tol.unwrap_or(NORMALITY_TOL))?;
    let u = dec.w.matmul(&dft_unitary(n));
    let trace = n_mat.trace() / n as f64;
    let diagonal = n_mat.conjugate_by(&u).diag();

    let radius = dec.eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut clusters: Vec<(Complex64, Vec<usize>)> = Vec::new();
    for (i, &z) in dec.eigenvalues.iter().enumerate() {
        match clusters.iter_mut().find(|(c, _)| (c - z).norm() <= CLUSTER_TOL * radius) {
            Some((_, members)) => members.push(i),
            None => clusters.push((z, vec![i])),
        }
    }
    let mut projections = Vec::with_capacity(clusters.len());
    for (eigenvalue, members) in clusters {
        let mut ind = vec![Complex64::new(0.0, 0.0); n];
        for &i in &members {
            ind[i] = Complex64::new(1.0, 0.0);
        }
        let b = ComplexMatrix::from_diag(&ind).conjugate_by(&dec.w.adjoint());
        let t = members.len() as f64 / n as f64;
        let max_deviation = b.conjugate_by(&u).diag().iter().map(|d| (d - t).norm()).fold(0.0, f64::max);
        projections.push(SpectralProjectionCheck { eigenvalue, multiplicity: members.len(), trace: t, max_deviation });
    }
    let max_deviation = projections.iter().map(|p| p.max_deviation).fold(0.0, f64::max);
    g.emit(&json!({
        "dim": n,
        "trace": trace,
        "diagonal": diagonal,
        "unitary": u,
        "unitarity_residual": u.unitarity_residual(),
        "projections": projections,
        "max_deviation": max_deviation,
    }))
}

#[derive(Deserialize)]
struct BlockInput {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TracialInput {
    Full(TracialPartition),
    Columns { columns: Vec<Vec<f64>> },
}

#[derive(Deserialize)]
struct UhfInput {
    columns: Vec<Vec<f64>>,
}

pub fn carpenter(g: &Global, cmd: &CarpenterCmd) -> Outcome {
    let eps = g.eps()?;
    match cmd {
        CarpenterCmd::Block { alpha, beta } => {
            let (alpha, beta) = match (alpha, beta) {
                (Some(a), Some(b)) => (a.clone(), b.clone()),
                (None, None) => {
                    let input: BlockInput = g.read()?;
                    (input.alpha, input.beta)
                }
                _ => return Err(Failure::Input("give both --alpha and --beta or neither".into())),
            };
            g.emit(&carpenter_block(&alpha, &beta, eps)?)
        }
        CarpenterCmd::Discrete => {
            let joint: JointPartitionSpec = g.read()?;
            let joint = JointPartitionSpec::new(joint.specs)?;
            g.emit(&carpenter_discrete(&joint, eps)?)
        }
        CarpenterCmd::Tracial => {
            let part = match g.read::<TracialInput>()? {
                TracialInput::Full(p) => p,
                TracialInput::Columns { columns } => TracialPartition::from_columns(columns)?,
            };
            g.emit(&carpenter_tracial_capped(&part, eps, g.max_dim()?)?)
        }
        CarpenterCmd::Uhf => {
            let input: UhfInput = g.read()?;
            g.emit(&carpenter_uhf_capped(&input.columns, eps, g.max_dim()?)?)
        }
    }
}

#[derive(Deserialize)]
struct DiscreteSynthInput {
    spectrum: DiscreteSpectrum,
    target: diagforge::carpenter::DiagonalSpec,
}

#[derive(Deserialize)]
struct TracialSynthInput {
    spectrum: TracialSpectrum,
    blocks: Vec<TargetBlock>,
}

impl TracialSynthInput {
    fn validate(&self) -> Result<(), Error> {
        self.spectrum.validate()
    }
}

pub fn synth(g: &Global, cmd: &SynthCmd) -> Outcome {
    let eps = g.eps()?;
    match cmd {
        SynthCmd::Discrete => {
            let input: DiscreteSynthInput = g.read()?;
            g.emit(&synth_diagonal_discrete(&input.spectrum, &input.target, eps)?)
        }
        SynthCmd::Tracial => {
            let input: TracialSynthInput = g.read()?;
            input.validate()?;
            g.emit(&synth_diagonal_tracial_capped(&input.spectrum, &input.blocks, eps, g.max_dim()?)?)
        }
    }
}

pub fn feasibility(g: &Global) -> Outcome {
    let input: TracialSynthInput = g.read()?;
    input.validate()?;
    match feasibility_partition(&input.spectrum, &input.blocks) {
        Ok(witness) => g.emit(&json!({ "feasible": true, "witness": witness })),
        Err(Error::Infeasible(cert)) => {
            g.emit(&json!({ "feasible": false, "certificate": cert }))?;
            Err(Failure::Negative)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn obstruct(g: &Global, cmd: &ObstructCmd) -> Outcome {
    match *cmd {
        ObstructCmd::Arveson { restarts, iters } => {
            let report = arveson_search(restarts, iters, g.seed)?;
            g.emit(&json!({
                "floor": report.min_residual,
                "seed": g.seed,
                "restarts": restarts,
                "iters": iters,
                "evidence": "empirical minimum of a numerical search; consistent with, not a proof of, nonexistence",
                "search": report,
            }))
        }
        ObstructCmd::Square => {
            let s = square_infeasibility_certificate()?;
            let valid = s.certificate_valid;
            g.emit(&json!({
                "feasible": false,
                "certificate": s.certificate,
                "certificate_valid": valid,
                "extreme_points": s.extreme_points,
            }))?;
            if valid {
                Err(Failure::Negative)
            } else {
                Err(Failure::Check("certificate failed exact re-verification".into()))
            }
        }
        ObstructCmd::Contrast { restarts, iters } => {
            let report = contrast_demo(g.eps()?, SearchConfig { restarts, iters, seed: g.seed })?;
            g.emit(&report)
        }
    }
}

#[derive(Serialize)]
struct FamilyCheck {
    source: &'static str,
    report: FamilyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    unitarity_residual: Option<f64>,
}

pub fn verify(g: &Global, cmd: &VerifyCmd) -> Outcome {
    let value: Value = g.read()?;
    match cmd {
        VerifyCmd::Family => {
            let tol = g.tol.unwrap_or(FAMILY_TOL);
            let check = if let Some(u) = value.get("unitary").filter(|u| u.get("blocks").is_some()) {
                let u: SynthesizedUnitary = serde_json::from_value(u.clone())?;
                u.validate()?;
                let (_, family) = u.spectral_family()?;
                let residual = u.unitarity_residual();
                let mut report = family.verify(tol);
                report.pass &= residual <= tol;
                FamilyCheck { source: "synthesized unitary", report, unitarity_residual: Some(residual) }
            } else {
                let family: ProjectionFamily = serde_json::from_value(value.get("family").cloned().unwrap_or(value))?;
                let family = ProjectionFamily::new(family.dim, family.count, family.blocks)?;
                FamilyCheck { source: "projection family", report: family.verify(tol), unitarity_residual: None }
            };
            let pass = check.report.pass;
            g.emit(&check)?;
            if pass {
                Ok(())
            } else {
                Err(Failure::Check(format!("family verification failed at tolerance {tol:e}")))
            }
        }
        VerifyCmd::Necessity => {
            let tol = g.tol.unwrap_or(NECESSITY_TOL) + g.eps.unwrap_or(0.0);
            let (diagonal, spectrum): (Vec<Complex64>, Vec<Complex64>) =
                if let Some(u) = value.get("unitary").filter(|u| u.get("blocks").is_some()) {
                    let u: SynthesizedUnitary = serde_json::from_value(u.clone())?;
                    u.validate()?;
                    (u.diagonal(), u.eigenvalues)
                } else {
                    #[derive(Deserialize)]
                    struct Raw {
                        diagonal: Vec<Complex64>,
                        spectrum: Vec<Complex64>,
                    }
                    let raw: Raw = serde_json::from_value(value)?;
                    (raw.diagonal, raw.spectrum)
                };
            if spectrum.is_empty() {
                return Err(Failure::Input("spectrum must be nonempty".into()));
            }
            let report = check_necessity(&diagonal, &spectrum, tol);
            let holds = report.holds;
            g.emit(&report)?;
            if holds {
                Ok(())
            } else {
                Err(Failure::Check(format!("diagonal leaves the hull by {:e}", report.max_distance)))
            }
        }
    }
}
