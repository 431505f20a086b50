//! Boundary-integral Dirichlet-to-Neumann solver for mixed Steklov problems.
//!
//! Every boundary node carries the trace `u` and the outward normal derivative
//! `q` of a harmonic function, tied together by Green's identity
//! `u/2 + D u - S q = 0`. Eliminating the unknown traces (`q` on Dirichlet
//! arcs, `u` on Neumann arcs) leaves the Dirichlet-to-Neumann map `q = Λ u` on
//! the Steklov nodes, whose weighted symmetrization gives a generalized
//! symmetric eigenproblem.

mod assemble;
mod mesh;

pub use assemble::layer_matrices;
pub use mesh::{discretize, Mesh, Node, NodeKind, Panel, PeriodicBlock, PANEL_ORDER};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::linalg::{symmetric_eigen_lowest, Hessenberg, Lu};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Arc, Condition, GeometryError, PlanarDomain, Similarity, Vec2};
use crate::model_spectra::{ProblemKind, Spectrum};

/// Domains are rescaled to this diameter before assembly so that the
/// logarithmic capacity stays well below one.
const WORKING_DIAMETER: f64 = 1.7;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error("linear system is ill-conditioned (estimated condition number {0:e})")]
    IllConditioned(f64),
    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),
    #[error("eigensolver failed: {0}")]
    EigensolveFailed(String),
    #[error("only {steklov_nodes} Steklov nodes for {k} eigenvalues")]
    TooFewNodes { steklov_nodes: usize, k: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A domain together with the interpretation of its non-Steklov arcs.
#[derive(Debug, Clone)]
pub struct MixedProblem {
    pub domain: PlanarDomain,
    pub kind: ProblemKind,
}

impl MixedProblem {
    /// `Sn` and `Sd` replace the condition on every non-Steklov arc; `Mixed`
    /// keeps the conditions stored on the domain; `Steklov` requires a fully
    /// Steklov boundary.
    pub fn new(domain: PlanarDomain, kind: ProblemKind) -> Result<Self, SolverError> {
        if !domain.has_condition(|c| c.is_steklov()) {
            return Err(SolverError::InvalidProblem("no Steklov boundary".into()));
        }
        if kind == ProblemKind::Steklov && !domain.is_full_steklov() {
            return Err(SolverError::InvalidProblem("steklov problem on a domain with non-Steklov arcs".into()));
        }
        Ok(Self { domain, kind })
    }

    /// All arcs, loop by loop, with the conditions the solver will use.
    pub fn effective_arcs(&self) -> Vec<Arc> {
        let replace = match self.kind {
            ProblemKind::Sn => Some(Condition::Neumann),
            ProblemKind::Sd => Some(Condition::Dirichlet),
            _ => None,
        };
        self.domain
            .arcs()
            .map(|a| match (&replace, a.condition.is_steklov()) {
                (Some(c), false) => Arc::new(a.kind.clone(), c.clone()),
                _ => a.clone(),
            })
            .collect()
    }

    /// Effective domain with the conditions written onto its arcs.
    pub fn effective_domain(&self) -> PlanarDomain {
        match self.kind {
            ProblemKind::Sn => self.domain.with_star_condition(Condition::Neumann),
            ProblemKind::Sd => self.domain.with_star_condition(Condition::Dirichlet),
            _ => self.domain.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Nodes per unit length, measured after scaling the domain to diameter 2.
    pub nodes_per_unit_length: f64,
    /// Exponent of the sigmoidal grading towards arc endpoints.
    pub grading: f64,
    /// End panels within this multiple of the base panel length of a
    /// junction are dropped.
    pub corner_cutoff: f64,
    /// Extra dyadic subdivisions of the end panels at singular corners.
    pub refine_levels: usize,
    /// Tolerance on the eigenpair residuals.
    pub tol: f64,
    /// Number of eigenvalues to return.
    pub k: usize,
    /// Condition number above which the solve is rejected.
    pub max_condition: f64,
    /// Allow domains with holes.
    pub multiply_connected: bool,
    /// Refine the symmetric-pencil eigenpairs by inverse iteration on the
    /// unsymmetrized map.
    pub refine: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            nodes_per_unit_length: 40.0,
            grading: 3.0,
            corner_cutoff: 0.0,
            refine_levels: 8,
            tol: 1e-8,
            k: 20,
            max_condition: 1e13,
            multiply_connected: false,
            refine: true,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidParams(m.into()));
        if !(self.nodes_per_unit_length > 0.0) || !self.nodes_per_unit_length.is_finite() {
            return bad("nodes_per_unit_length must be positive");
        }
        if !(self.grading >= 1.0) {
            return bad("grading exponent must be at least 1");
        }
        if !(self.corner_cutoff >= 0.0) {
            return bad("corner_cutoff must be non-negative");
        }
        if self.k == 0 {
            return bad("k must be positive");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub nodes: usize,
    pub steklov_nodes: usize,
    /// Estimated 1-norm condition number of the boundary system.
    pub condition: f64,
    /// `||W Λ - (W Λ)^T|| / ||W Λ||` in the Frobenius norm.
    pub asymmetry: f64,
    /// `||Λ 1|| / ||Λ||`; vanishes up to discretization error on a fully
    /// Steklov boundary.
    pub constant_defect: f64,
    /// Relative residual of each returned eigenpair.
    pub residuals: Vec<f64>,
}

/// Discrete Dirichlet-to-Neumann data on the Steklov nodes, in the original
/// (unscaled) coordinates.
#[derive(Debug, Clone)]
pub struct DtnMatrices {
    /// Pointwise map from Steklov traces to normal derivatives.
    pub lambda: DMatrix<f64>,
    /// Quadrature weights of the Steklov nodes.
    pub weights: Vec<f64>,
    /// Steklov weight at the Steklov nodes.
    pub rho: Vec<f64>,
    pub positions: Vec<Vec2>,
    pub nodes: usize,
    pub condition: f64,
}

impl DtnMatrices {
    /// Symmetric stiffness `(W Λ + (W Λ)^T) / 2`.
    pub fn stiffness(&self) -> DMatrix<f64> {
        let n = self.weights.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] = 0.5 * (self.weights[i] * self.lambda[(i, j)] + self.weights[j] * self.lambda[(j, i)]);
            }
        }
        k
    }

    /// Diagonal of the mass matrix `W ρ`.
    pub fn mass(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.rho).map(|(w, r)| w * r).collect()
    }

    pub fn asymmetry(&self) -> f64 {
        let n = self.weights.len();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let a = self.weights[i] * self.lambda[(i, j)];
                let b = self.weights[j] * self.lambda[(j, i)];
                num += (a - b) * (a - b);
                den += a * a;
            }
        }
        (num / den).sqrt()
    }

    pub fn constant_defect(&self) -> f64 {
        let ones = DVector::from_element(self.weights.len(), 1.0);
        (&self.lambda * ones).norm() / self.lambda.norm()
    }
}

fn check_topology(domain: &PlanarDomain, params: &SolverParams) -> Result<(), SolverError> {
    if !domain.is_simply_connected() && !params.multiply_connected {
        return Err(SolverError::UnsupportedTopology(format!(
            "{} boundary components; enable multiply_connected to allow holes",
            domain.boundary_components()
        )));
    }
    Ok(())
}

/// Assembles the discrete Dirichlet-to-Neumann map of `problem`.
pub fn assemble_dtn(problem: &MixedProblem, params: &SolverParams) -> Result<DtnMatrices, SolverError> {
    params.validate()?;
    check_topology(&problem.domain, params)?;
    let diam = problem.domain.diameter();
    let scale = WORKING_DIAMETER / diam;
    let scaled = MixedProblem { domain: problem.domain.transformed(&Similarity::dilation(scale)), kind: problem.kind };
    let arcs = scaled.effective_arcs();
    let mesh = mesh::build_mesh(&scaled.domain, &arcs, params, 2.0 / WORKING_DIAMETER);
    let stek = mesh.steklov_indices();
    if stek.len() < 4 * params.k {
        return Err(SolverError::TooFewNodes { steklov_nodes: stek.len(), k: params.k });
    }
    let n = mesh.len();
    let (s, d) = layer_matrices(&mesh);

    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        match mesh.nodes[j].kind {
            NodeKind::Neumann => {
                for i in 0..n {
                    a[(i, j)] = d[(i, j)];
                }
                a[(j, j)] += 0.5;
            }
            _ => {
                // unknown is q_j times the node weight, which keeps columns
                // of tiny graded panels from degrading the conditioning
                let wj = mesh.nodes[j].weight;
                for i in 0..n {
                    a[(i, j)] = -s[(i, j)] / wj;
                }
            }
        }
    }
    let mut rhs = DMatrix::zeros(n, stek.len());
    for (c, &j) in stek.iter().enumerate() {
        for i in 0..n {
            rhs[(i, c)] = -d[(i, j)];
        }
        rhs[(j, c)] -= 0.5;
    }
    let lu = Lu::new(a).ok_or(SolverError::IllConditioned(f64::INFINITY))?;
    let condition = lu.condition();
    if !condition.is_finite() || condition > params.max_condition {
        return Err(SolverError::IllConditioned(condition));
    }
    let mut z = rhs;
    lu.solve_in_place(&mut z);
    let ns = stek.len();
    let mut lambda = DMatrix::zeros(ns, ns);
    for (r, &i) in stek.iter().enumerate() {
        for c in 0..ns {
            // q scales like 1/length
            lambda[(r, c)] = z[(i, c)] / mesh.nodes[i].weight * scale;
        }
    }
    Ok(DtnMatrices {
        lambda,
        weights: stek.iter().map(|&i| mesh.nodes[i].weight / scale).collect(),
        rho: stek.iter().map(|&i| mesh.nodes[i].rho).collect(),
        positions: stek.iter().map(|&i| mesh.nodes[i].pos * (1.0 / scale)).collect(),
        nodes: n,
        condition,
    })
}

/// Asymmetry of `W Λ` below which the symmetric pencil is used as is.
const REFINE_THRESHOLD: f64 = 1e-10;
/// Relative gap below which neighbouring eigenvalues are refined together.
const CLUSTER_GAP: f64 = 1e-4;

/// Improves eigenpairs of the symmetrized pencil by shifted block inverse
/// iteration on `ρ^{-1} Λ`, one cluster of close eigenvalues at a time.
///
/// Symmetrization averages in the poorly resolved action of `Λ` on data that
/// is rough near junctions; the unsymmetrized map keeps spectral accuracy on
/// smooth eigenfunctions.
fn refine_pairs(
    dtn: &DtnMatrices,
    all: &[f64],
    values: &mut [f64],
    densities: &mut [Vec<f64>],
) -> Result<(), SolverError> {
    let k = values.len();
    let ns = dtn.rho.len();
    let top = all[..k].iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < k {
        let mut j = i + 1;
        while j < k && (all[j] - all[j - 1]).abs() <= CLUSTER_GAP * all[j].abs().max(1e-3 * top) {
            j += 1;
        }
        clusters.push((i, j));
        i = j;
    }
    let a_mat = DMatrix::from_fn(ns, ns, |i, j| dtn.lambda[(i, j)] / dtn.rho[i]);
    let hess = Hessenberg::new(a_mat).ok_or_else(|| SolverError::EigensolveFailed("Hessenberg reduction failed".into()))?;
    let refined: Vec<Result<(Vec<f64>, Vec<Vec<f64>>), SolverError>> = clusters
        .iter()
        .map(|&(a, b)| {
            let c = b - a;
            let mean = all[a..b].iter().sum::<f64>() / c as f64;
            let shift = mean + 1e-9 * top;
            let mut x = DMatrix::from_fn(ns, c, |i, j| densities[a + j][i]);
            hess.apply_q(&mut x, true);
            x = x.qr().q();
            for _ in 0..3 {
                if !hess.shifted_solve(shift, &mut x) {
                    return Err(SolverError::EigensolveFailed("singular shifted system".into()));
                }
                x = x.qr().q();
            }
            let small = x.transpose() * hess.mul_h(&x);
            let mut vals: Vec<f64> = if c == 1 {
                vec![small[(0, 0)]]
            } else {
                small.complex_eigenvalues().iter().map(|z| z.re).collect()
            };
            vals.sort_by(|p, q| p.total_cmp(q));
            let sym = (&small + small.transpose()) * 0.5;
            let se = SymmetricEigen::new(sym);
            let mut ord: Vec<usize> = (0..c).collect();
            ord.sort_by(|&p, &q| se.eigenvalues[p].total_cmp(&se.eigenvalues[q]));
            let mut rotated = &x * &se.eigenvectors;
            hess.apply_q(&mut rotated, false);
            let vecs = ord.iter().map(|&j| rotated.column(j).iter().copied().collect()).collect();
            Ok((vals, vecs))
        })
        .collect();
    for ((a, _), r) in clusters.iter().zip(refined) {
        let (vals, vecs) = r?;
        for (off, (v, d)) in vals.into_iter().zip(vecs).enumerate() {
            values[a + off] = v;
            densities[a + off] = d;
        }
    }
    // normalize in the weighted inner product
    let mass = dtn.mass();
    for d in densities.iter_mut() {
        let nrm = d.iter().zip(&mass).map(|(x, m)| x * x * m).sum::<f64>().sqrt();
        d.iter_mut().for_each(|x| *x /= nrm);
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub spectrum: Spectrum,
    /// Eigenfunction traces on the Steklov nodes, normalized in the weighted
    /// discrete `L^2` inner product.
    pub densities: Vec<Vec<f64>>,
    pub positions: Vec<Vec2>,
    pub diagnostics: Diagnostics,
}

/// The `params.k` smallest eigenvalues of the discrete mixed Steklov problem.
pub fn solve_mixed_steklov(problem: &MixedProblem, params: &SolverParams) -> Result<EigenResult, SolverError> {
    let dtn = assemble_dtn(problem, params)?;
    let stiff = dtn.stiffness();
    let mass = dtn.mass();
    let ns = mass.len();
    if mass.iter().any(|m| !(*m > 0.0)) {
        return Err(SolverError::InvalidProblem("Steklov weight must be positive".into()));
    }
    let isq: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let reduced = DMatrix::from_fn(ns, ns, |i, j| isq[i] * stiff[(i, j)] * isq[j]);
    let scale = reduced.amax().max(f64::MIN_POSITIVE);
    let (eigenvalues, eigenvectors) = symmetric_eigen_lowest(reduced.clone(), params.k.min(ns))
        .ok_or_else(|| SolverError::EigensolveFailed("symmetric eigensolver did not converge".into()))?;
    let k = params.k.min(ns);
    let mut values = Vec::with_capacity(k);
    let mut densities: Vec<Vec<f64>> = Vec::with_capacity(k);
    for idx in 0..k {
        let lam = eigenvalues[idx];
        let v = eigenvectors.column(idx).into_owned();
        let res = (&reduced * &v - &v * lam).norm() / (scale * v.norm());
        if !res.is_finite() || res > params.tol {
            return Err(SolverError::EigensolveFailed(format!("eigenpair residual {res:e} exceeds {:e}", params.tol)));
        }
        values.push(lam);
        densities.push(v.iter().zip(&isq).map(|(x, s)| x * s).collect());
    }
    let asymmetry = dtn.asymmetry();
    if params.refine && asymmetry > REFINE_THRESHOLD {
        refine_pairs(&dtn, &eigenvalues, &mut values, &mut densities)?;
    }
    let top = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let residuals: Vec<f64> = values
        .iter()
        .zip(&densities)
        .map(|(&sigma, x)| {
            let xv = DVector::from_column_slice(x);
            let r = &dtn.lambda * &xv - DVector::from_fn(ns, |i, _| sigma * dtn.rho[i] * xv[i]);
            let r = DVector::from_fn(ns, |i, _| r[i] / dtn.rho[i]);
            r.norm() / (top * xv.norm())
        })
        .collect();
    let source = format!("dtn:{}", problem.domain.family.as_deref().unwrap_or("domain"));
    Ok(EigenResult {
        spectrum: Spectrum::new(values, problem.kind, source),
        densities,
        positions: dtn.positions.clone(),
        diagnostics: Diagnostics {
            nodes: dtn.nodes,
            steklov_nodes: ns,
            condition: dtn.condition,
            asymmetry,
            constant_defect: dtn.constant_defect(),
            residuals,
        },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    /// Requested total node counts.
    pub schedule: Vec<usize>,
    /// Node counts actually used.
    pub nodes: Vec<usize>,
    /// Eigenvalues per schedule entry.
    pub values: Vec<Vec<f64>>,
    /// Max relative change of the first `k` eigenvalues between consecutive
    /// entries.
    pub successive_change: Vec<f64>,
}

/// Solves on each node count of `schedule`, spread over the boundary at
/// uniform reference density.
pub fn convergence_study(
    problem: &MixedProblem,
    schedule: &[usize],
    params: &SolverParams,
) -> Result<ConvergenceStudy, SolverError> {
    if schedule.is_empty() {
        return Err(SolverError::InvalidParams("empty node schedule".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::InvalidParams("node schedule must be strictly increasing".into()));
    }
    let ref_len = problem.domain.perimeter() * 2.0 / problem.domain.diameter();
    let mut out = ConvergenceStudy { schedule: schedule.to_vec(), nodes: vec![], values: vec![], successive_change: vec![] };
    for &n in schedule {
        let p = SolverParams { nodes_per_unit_length: n as f64 / ref_len, ..params.clone() };
        let r = solve_mixed_steklov(problem, &p)?;
        if let Some(prev) = out.values.last() {
            let change = prev
                .iter()
                .zip(&r.spectrum.values)
                .map(|(a, b): (&f64, &f64)| (a - b).abs() / b.abs().max(1e-300))
                .filter(|c| c.is_finite())
                .fold(0.0, f64::max);
            out.successive_change.push(change);
        }
        out.nodes.push(r.diagnostics.nodes);
        out.values.push(r.spectrum.values);
    }
    Ok(out)
}

/// Eigenvalues together with an error estimate taken from a second solve at
/// `0.7` times the node density and corner refinement depth.
pub fn solve_with_error_estimate(
    problem: &MixedProblem,
    params: &SolverParams,
) -> Result<(EigenResult, Vec<f64>), SolverError> {
    let fine = solve_mixed_steklov(problem, params)?;
    let coarse_params = SolverParams {
        nodes_per_unit_length: 0.7 * params.nodes_per_unit_length,
        refine_levels: (0.7 * params.refine_levels as f64).round() as usize,
        ..params.clone()
    };
    let coarse = solve_mixed_steklov(problem, &coarse_params)?;
    let err = fine.spectrum.values.iter().zip(&coarse.spectrum.values).map(|(a, b)| (a - b).abs()).collect();
    Ok((fine, err))
}
