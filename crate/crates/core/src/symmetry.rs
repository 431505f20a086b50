//! Reflection and rotation symmetries: quotient problems, the doubling
//! identity and the dihedral eigenvalue chain.

use serde::Serialize;
use thiserror::Error;

pub use crate::geometry::{ReflectionAxis, SymmetryDescriptor};
use crate::dtn::{solve_mixed_steklov, solve_with_error_estimate, MixedProblem, SolverError, SolverParams};
use crate::geometry::{clip_half, Condition, GeometryError, PlanarDomain, Similarity, Vec2};
use crate::model_spectra::{merge, ProblemKind, Spectrum};

/// Relative tolerance (in units of the diameter) for matching image arcs.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Relative error estimates are not trusted below this level.
const ESTIMATE_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("domain is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error(transparent)]
    Geometry(GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl From<GeometryError> for SymmetryError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::NotSymmetric(m) => SymmetryError::NotSymmetric(m),
            e => SymmetryError::Geometry(e),
        }
    }
}

/// Largest distance from the image of a boundary sample to the boundary, or
/// `None` if some image lands on an arc with a different condition.
fn image_defect(domain: &PlanarDomain, m: &Similarity) -> Option<f64> {
    let arcs: Vec<_> = domain.arcs().collect();
    let mut worst = 0.0f64;
    for arc in &arcs {
        for i in 0..=24 {
            let t = (i as f64 + 0.5) / 25.0;
            let q = m.apply(arc.kind.point(t));
            let (best, dist) = arcs
                .iter()
                .map(|b| (b, b.kind.closest(q).1))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("domain has arcs");
            if !best.condition.same_kind(&arc.condition) {
                return None;
            }
            if let (Condition::Steklov(wa), Condition::Steklov(wb)) = (&arc.condition, &best.condition) {
                let (tb, _) = best.kind.closest(q);
                let (ra, rb) = (wa.eval(t), wb.eval(tb));
                if (ra - rb).abs() > 1e-9 * ra.abs().max(1.0) {
                    return None;
                }
            }
            worst = worst.max(dist);
        }
    }
    Some(worst)
}

/// Whether `m` maps the boundary onto itself, conditions included.
pub fn is_invariant(domain: &PlanarDomain, m: &Similarity) -> bool {
    let tol = SYMMETRY_TOL * domain.diameter();
    image_defect(domain, m).is_some_and(|d| d <= tol)
}

/// Checks every declared symmetry of the domain against its arcs.
pub fn verify_symmetry(domain: &PlanarDomain) -> Result<(), SymmetryError> {
    for (i, axis) in domain.symmetry.reflections.iter().enumerate() {
        if !is_invariant(domain, &axis.reflection()) {
            return Err(SymmetryError::NotSymmetric(format!("declared reflection {i} does not map the boundary to itself")));
        }
    }
    if let Some((c, p)) = domain.symmetry.rotation {
        if p > 1 && !is_invariant(domain, &rotation_about(c, std::f64::consts::TAU / p as f64)) {
            return Err(SymmetryError::NotSymmetric(format!("declared rotation of order {p} does not map the boundary to itself")));
        }
    }
    Ok(())
}

fn rotation_about(c: Vec2, angle: f64) -> Similarity {
    let r = Similarity::rotation(angle);
    Similarity { shift: c - r.apply(c), ..r }
}

/// The half of a reflection-symmetric domain on the positive side of `axis`,
/// with the axis chords carrying `chord` (Neumann or Dirichlet).
pub fn quotient(domain: &PlanarDomain, axis: &ReflectionAxis, chord: Condition) -> Result<MixedProblem, SymmetryError> {
    if chord.is_steklov() {
        return Err(SymmetryError::NotApplicable("quotient chords must be Neumann or Dirichlet".into()));
    }
    if !is_invariant(domain, &axis.reflection()) {
        return Err(SymmetryError::NotSymmetric("reflection does not map the boundary to itself".into()));
    }
    let mut half = clip_half(domain, axis, chord)?;
    half.family = domain.family.as_ref().map(|f| format!("{f}/tau"));
    let others: Vec<&Condition> = half.arcs().map(|a| &a.condition).filter(|c| !c.is_steklov()).collect();
    let kind = if others.iter().all(|c| matches!(c, Condition::Neumann)) {
        ProblemKind::Sn
    } else if others.iter().all(|c| matches!(c, Condition::Dirichlet)) {
        ProblemKind::Sd
    } else {
        ProblemKind::Mixed
    };
    Ok(MixedProblem::new(half, kind)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub k: usize,
    /// Steklov spectrum of the whole domain.
    pub direct: Vec<f64>,
    pub neumann: Vec<f64>,
    pub dirichlet: Vec<f64>,
    /// Sorted merge of the two quotient spectra.
    pub merged: Vec<f64>,
    /// Relative mismatch per index.
    pub mismatch: Vec<f64>,
    pub max_mismatch: f64,
    /// Relative single-solve error estimate per index, when requested.
    pub error_estimate: Option<Vec<f64>>,
}

impl SplitReport {
    /// Whether every mismatch is within `factor` times its error estimate.
    pub fn within_estimate(&self, factor: f64) -> Option<bool> {
        let est = self.error_estimate.as_ref()?;
        Some(self.mismatch.iter().zip(est).all(|(m, e)| *m <= factor * e))
    }
}

/// Relative differences `|a_i - b_i| / max(|b_i|, b_first_positive)`.
fn relative_mismatch(a: &[f64], b: &[f64]) -> Vec<f64> {
    let floor = relative_floor(b);
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(floor)).collect()
}

/// Steklov spectrum of a symmetric domain computed directly and from the two
/// quotient problems; the first `k` eigenvalues are compared.
pub fn reflection_split_check(
    domain: &PlanarDomain,
    axis: &ReflectionAxis,
    k: usize,
    params: &SolverParams,
) -> Result<SplitReport, SymmetryError> {
    split_check(domain, axis, k, params, false)
}

/// As [`reflection_split_check`], also estimating the discretization error of
/// both sides from a coarser solve.
pub fn reflection_split_check_with_estimate(
    domain: &PlanarDomain,
    axis: &ReflectionAxis,
    k: usize,
    params: &SolverParams,
) -> Result<SplitReport, SymmetryError> {
    split_check(domain, axis, k, params, true)
}

type Solved = Result<(Spectrum, Option<Vec<f64>>), SolverError>;

fn solve_one(problem: &MixedProblem, params: &SolverParams, estimate: bool) -> Solved {
    if estimate {
        let (r, err) = solve_with_error_estimate(problem, params)?;
        Ok((r.spectrum, Some(err)))
    } else {
        Ok((solve_mixed_steklov(problem, params)?.spectrum, None))
    }
}

fn split_check(
    domain: &PlanarDomain,
    axis: &ReflectionAxis,
    k: usize,
    params: &SolverParams,
    estimate: bool,
) -> Result<SplitReport, SymmetryError> {
    if !domain.is_full_steklov() {
        return Err(SymmetryError::NotApplicable("split check needs a full Steklov boundary".into()));
    }
    let full = MixedProblem::new(domain.clone(), ProblemKind::Steklov)?;
    let qn = quotient(domain, axis, Condition::Neumann)?;
    let qd = quotient(domain, axis, Condition::Dirichlet)?;
    let params = SolverParams { k, ..params.clone() };
    let (direct, (neu, dir)) = rayon::join(
        || solve_one(&full, &params, estimate),
        || rayon::join(|| solve_one(&qn, &params, estimate), || solve_one(&qd, &params, estimate)),
    );
    let (direct, direct_err) = direct?;
    let (neu, neu_err) = neu?;
    let (dir, dir_err) = dir?;
    let merged = merge(&[neu.clone(), dir.clone()], k);
    let n = k.min(direct.len()).min(merged.len());
    let mismatch = relative_mismatch(&merged.values[..n], &direct.values[..n]);
    let error_estimate = match (direct_err, neu_err, dir_err) {
        (Some(de), Some(ne), Some(dr)) => {
            // merged error from the perturbed half spectra
            let lo_n: Vec<f64> = neu.values.iter().zip(&ne).map(|(v, e)| v - e).collect();
            let lo_d: Vec<f64> = dir.values.iter().zip(&dr).map(|(v, e)| v - e).collect();
            let hi_n: Vec<f64> = neu.values.iter().zip(&ne).map(|(v, e)| v + e).collect();
            let hi_d: Vec<f64> = dir.values.iter().zip(&dr).map(|(v, e)| v + e).collect();
            let lo = merge(&[Spectrum::new(lo_n, ProblemKind::Sn, ""), Spectrum::new(lo_d, ProblemKind::Sd, "")], k);
            let hi = merge(&[Spectrum::new(hi_n, ProblemKind::Sn, ""), Spectrum::new(hi_d, ProblemKind::Sd, "")], k);
            let abs: Vec<f64> = (0..n)
                .map(|i| de[i] + (merged.values[i] - lo.values[i]).abs().max((hi.values[i] - merged.values[i]).abs()))
                .collect();
            let floor = relative_floor(&direct.values[..n]);
            Some(
                abs.iter()
                    .zip(&direct.values[..n])
                    .map(|(a, d)| (a / d.abs().max(floor)).max(ESTIMATE_FLOOR))
                    .collect(),
            )
        }
        _ => None,
    };
    Ok(SplitReport {
        k: n,
        max_mismatch: mismatch.iter().copied().fold(0.0, f64::max),
        direct: direct.values[..n].to_vec(),
        neumann: neu.values,
        dirichlet: dir.values,
        merged: merged.values[..n].to_vec(),
        mismatch,
        error_estimate,
    })
}

fn relative_floor(values: &[f64]) -> f64 {
    let top = values.last().copied().unwrap_or(1.0);
    values.iter().copied().find(|v| *v > 1e-6 * top).unwrap_or(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct DihedralReport {
    /// First nonzero Steklov eigenvalue of the domain.
    pub sigma1: f64,
    /// `sigma_1` of the Neumann quotient.
    pub sigma1_neumann: f64,
    /// `sigma_0` of the Dirichlet quotient.
    pub sigma0_dirichlet: f64,
    /// Largest pairwise relative difference of the three values.
    pub mismatch: f64,
}

/// Compares the first nonzero Steklov eigenvalue of a domain with square
/// symmetry against the two lowest relevant eigenvalues of its quotient by
/// one reflection.
pub fn dihedral_check(domain: &PlanarDomain, params: &SolverParams) -> Result<DihedralReport, SymmetryError> {
    if !domain.is_full_steklov() || !domain.is_simply_connected() {
        return Err(SymmetryError::NotApplicable("dihedral check needs a simply connected full Steklov domain".into()));
    }
    let sym = &domain.symmetry;
    let (center, order) = sym
        .rotation
        .ok_or_else(|| SymmetryError::NotSymmetric("no rotation symmetry declared".into()))?;
    if order % 4 != 0 {
        return Err(SymmetryError::NotSymmetric(format!("rotation order {order} is not a multiple of 4")));
    }
    let axis = sym
        .reflections
        .iter()
        .enumerate()
        .find_map(|(i, a)| {
            sym.reflections[i + 1..]
                .iter()
                .any(|b| a.dir.dot(b.dir).abs() <= 1e-12 * a.dir.norm() * b.dir.norm())
                .then_some(a)
        })
        .ok_or_else(|| SymmetryError::NotSymmetric("no pair of orthogonal reflection axes".into()))?;
    verify_symmetry(domain)?;
    if !is_invariant(domain, &rotation_about(center, std::f64::consts::FRAC_PI_2)) {
        return Err(SymmetryError::NotSymmetric("quarter turn does not map the boundary to itself".into()));
    }
    let full = MixedProblem::new(domain.clone(), ProblemKind::Steklov)?;
    let qn = quotient(domain, axis, Condition::Neumann)?;
    let qd = quotient(domain, axis, Condition::Dirichlet)?;
    let p2 = SolverParams { k: params.k.clamp(2, 4), ..params.clone() };
    let p1 = SolverParams { k: params.k.clamp(1, 4), ..params.clone() };
    let (full_r, (n_r, d_r)) = rayon::join(
        || solve_mixed_steklov(&full, &p2),
        || rayon::join(|| solve_mixed_steklov(&qn, &p2), || solve_mixed_steklov(&qd, &p1)),
    );
    let sigma1 = full_r?.spectrum.values[1];
    let sigma1_neumann = n_r?.spectrum.values[1];
    let sigma0_dirichlet = d_r?.spectrum.values[0];
    let vals = [sigma1, sigma1_neumann, sigma0_dirichlet];
    let hi = vals.iter().copied().fold(f64::MIN, f64::max);
    let lo = vals.iter().copied().fold(f64::MAX, f64::min);
    Ok(DihedralReport { sigma1, sigma1_neumann, sigma0_dirichlet, mismatch: (hi - lo) / hi.abs() })
}
