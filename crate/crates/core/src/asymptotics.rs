//! Comparison of computed spectra with the model spectra of their boundary
//! data, the Neumann/Dirichlet index shift, and multiplicity bounds.

use std::f64::consts::FRAC_PI_2;
use std::ops::RangeInclusive;

use serde::Serialize;
use thiserror::Error;

use crate::dtn::{solve_with_error_estimate, MixedProblem, SolverError, SolverParams};
use crate::geometry::{boundary_data, ArcKind, BoundaryData, GeometryError};
use crate::model_spectra::{model_spectrum, ModelError, ProblemKind, Spectrum};

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("junction hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("index {k} is not resolved by {steklov_nodes} Steklov nodes")]
    UnresolvedRange { k: usize, steklov_nodes: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid index range: {0}")]
    InvalidRange(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(SolverError),
}

impl From<SolverError> for AsymptoticsError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::TooFewNodes { steklov_nodes, k } => AsymptoticsError::UnresolvedRange { k, steklov_nodes },
            e => AsymptoticsError::Solver(e),
        }
    }
}

/// Highest index considered resolved per Steklov node.
const NODES_PER_INDEX: usize = 6;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub k: usize,
    pub computed: f64,
    pub model: f64,
    pub residual: f64,
    /// Discretization error estimate of `computed`.
    pub error_estimate: f64,
}

/// Decay of a residual sequence over an index window.
#[derive(Debug, Clone, Serialize)]
pub struct DecayVerdict {
    /// Largest residual over the lower half of the window.
    pub lower_max: f64,
    /// Largest residual over the upper half.
    pub upper_max: f64,
    /// Residuals in the upper half indistinguishable from discretization error.
    pub noise_floor: f64,
    /// Least-squares slope of `ln residual` against `ln k`.
    pub log_slope: f64,
    /// `upper_max < lower_max`, or the upper half is at the noise floor.
    pub decreasing: bool,
}

fn decay(ks: &[usize], residuals: &[f64], errors: &[f64]) -> DecayVerdict {
    let half = ks.len() / 2;
    let lower_max = residuals[..half.max(1)].iter().copied().fold(0.0, f64::max);
    let upper_max = residuals[half..].iter().copied().fold(0.0, f64::max);
    let noise_floor = 10.0 * errors[half..].iter().copied().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(residuals)
        .filter(|(&k, &r)| k > 0 && r > 0.0)
        .map(|(&k, &r)| ((k as f64).ln(), r.ln()))
        .collect();
    let log_slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx > 0.0 { sxy / sxx } else { 0.0 }
    } else {
        0.0
    };
    DecayVerdict { lower_max, upper_max, noise_floor, log_slope, decreasing: upper_max < lower_max || upper_max <= noise_floor }
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub kind: ProblemKind,
    pub data: BoundaryData,
    pub rows: Vec<ResidualRow>,
    pub verdict: DecayVerdict,
}

impl AsymptoticsReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,computed,model,residual,error_estimate\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:.14e},{:.14e},{:.6e},{:.3e}\n", r.k, r.computed, r.model, r.residual, r.error_estimate));
        }
        s
    }
}

/// Non-Steklov arcs meeting a Steklov arc must be straight and meet it at a
/// right angle.
pub fn check_junctions(problem: &MixedProblem) -> Result<(), AsymptoticsError> {
    for l in &problem.effective_domain().loops {
        let n = l.arcs.len();
        for i in 0..n {
            let (a, b) = (&l.arcs[i], &l.arcs[(i + 1) % n]);
            if a.condition.is_steklov() == b.condition.is_steklov() {
                continue;
            }
            let star = if a.condition.is_steklov() { b } else { a };
            if !matches!(star.kind, ArcKind::Segment { .. }) {
                return Err(AsymptoticsError::HypothesisViolated("non-Steklov arc at a junction is curved".into()));
            }
            let (ta, tb) = (a.kind.unit_tangent(1.0), b.kind.unit_tangent(0.0));
            let angle = ta.cross(tb).atan2(ta.dot(tb)).abs();
            if (angle - FRAC_PI_2).abs() > 1e-8 {
                return Err(AsymptoticsError::HypothesisViolated(format!(
                    "junction angle {angle:.6} differs from a right angle"
                )));
            }
        }
    }
    Ok(())
}

fn check_range(range: &RangeInclusive<usize>) -> Result<(), AsymptoticsError> {
    if range.is_empty() || range.end() - range.start() < 1 {
        return Err(AsymptoticsError::InvalidRange("need at least two indices".into()));
    }
    Ok(())
}

/// Solves with an error estimate for indices up to `kmax`, rejecting indices
/// beyond the resolved part of the spectrum.
fn solve_upto(problem: &MixedProblem, kmax: usize, params: &SolverParams) -> Result<(Vec<f64>, Vec<f64>), AsymptoticsError> {
    let p = SolverParams { k: kmax + 1, ..params.clone() };
    let (r, err) = solve_with_error_estimate(problem, &p)?;
    let ns = r.diagnostics.steklov_nodes;
    if kmax > ns / NODES_PER_INDEX {
        return Err(AsymptoticsError::UnresolvedRange { k: kmax, steklov_nodes: ns });
    }
    Ok((r.spectrum.values, err))
}

/// Residuals between the computed spectrum and the model spectrum of the
/// problem's boundary data over `range`.
pub fn asymptotics_report(
    problem: &MixedProblem,
    range: RangeInclusive<usize>,
    params: &SolverParams,
) -> Result<AsymptoticsReport, AsymptoticsError> {
    check_range(&range)?;
    check_junctions(problem)?;
    let data = boundary_data(&problem.effective_domain())?;
    let (values, err) = solve_upto(problem, *range.end(), params)?;
    let model = model_spectrum(&data, range.end() + 1)?;
    let rows: Vec<ResidualRow> = range
        .clone()
        .map(|k| ResidualRow {
            k,
            computed: values[k],
            model: model.values[k],
            residual: (values[k] - model.values[k]).abs(),
            error_estimate: err[k],
        })
        .collect();
    let ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    let res: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error_estimate).collect();
    Ok(AsymptoticsReport { kind: problem.kind, data, rows, verdict: decay(&ks, &res, &errs) })
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftRow {
    pub k: usize,
    /// `sigma_{k+m}` with Neumann conditions.
    pub neumann: f64,
    /// `sigma_k` with Dirichlet conditions.
    pub dirichlet: f64,
    pub residual: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftReport {
    pub m: usize,
    pub rows: Vec<ShiftRow>,
    pub verdict: DecayVerdict,
}

/// `|sigma_{k+m}^N - sigma_k^D|` over `range`, where `m` is the number of
/// Steklov components that are intervals.
pub fn sn_sd_shift(
    problem: &MixedProblem,
    m: usize,
    range: RangeInclusive<usize>,
    params: &SolverParams,
) -> Result<ShiftReport, AsymptoticsError> {
    check_range(&range)?;
    if m == 0 || problem.domain.is_full_steklov() {
        return Err(AsymptoticsError::NotApplicable("the shift needs a nonempty non-Steklov boundary".into()));
    }
    let sn = MixedProblem::new(problem.domain.clone(), ProblemKind::Sn).map_err(AsymptoticsError::from)?;
    let sd = MixedProblem::new(problem.domain.clone(), ProblemKind::Sd).map_err(AsymptoticsError::from)?;
    let kmax = *range.end();
    let (rn, rd) = rayon::join(|| solve_upto(&sn, kmax + m, params), || solve_upto(&sd, kmax, params));
    let ((vn, en), (vd, ed)) = (rn?, rd?);
    let rows: Vec<ShiftRow> = range
        .map(|k| ShiftRow {
            k,
            neumann: vn[k + m],
            dirichlet: vd[k],
            residual: (vn[k + m] - vd[k]).abs(),
            error_estimate: en[k + m] + ed[k],
        })
        .collect();
    let ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    let res: Vec<f64> = rows.iter().map(|r| r.residual).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error_estimate).collect();
    Ok(ShiftReport { m, verdict: decay(&ks, &res, &errs), rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct Cluster {
    /// Index of the first eigenvalue in the cluster.
    pub start: usize,
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplicityReport {
    pub clusters: Vec<Cluster>,
    /// `2n + m`.
    pub bound: usize,
    pub burn_in: usize,
    /// No cluster starting at or after `burn_in` exceeds the bound.
    pub pass: bool,
}

/// Groups eigenvalues whose consecutive gaps are below `tol` times the mean
/// spacing of the spectrum, and checks cluster sizes beyond `burn_in`
/// against `2n + m` for `n` Steklov circles and `m` Steklov intervals.
pub fn multiplicity_report(spectrum: &Spectrum, tol: f64, data: &BoundaryData, burn_in: usize) -> MultiplicityReport {
    let v = &spectrum.values;
    let n = data.l_s.len();
    let m = data.l_n.len() + data.l_d.len() + data.l_dn.len();
    let bound = 2 * n + m;
    let spacing = if v.len() > 1 { (v[v.len() - 1] - v[0]).abs() / (v.len() - 1) as f64 } else { 1.0 };
    let gap = tol * spacing.max(f64::MIN_POSITIVE);
    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (x - v[i - 1]).abs() <= gap => c.multiplicity += 1,
            _ => clusters.push(Cluster { start: i, value: x, multiplicity: 1 }),
        }
    }
    let pass = clusters.iter().filter(|c| c.start >= burn_in).all(|c| c.multiplicity <= bound);
    MultiplicityReport { clusters, bound, burn_in, pass }
}

/// Default relative cluster tolerance.
pub const CLUSTER_TOL: f64 = 1e-6;
