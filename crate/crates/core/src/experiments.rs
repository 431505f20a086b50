//! Eigenvalue inequalities: evaluation of the bound catalog, parameter sweeps
//! over constructor families and domain monotonicity checks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dtn::{solve_with_error_estimate, Diagnostics, MixedProblem, SolverError, SolverParams};
use crate::geometry::{make_family, ArcKind, Condition, FamilySpec, GeometryError, PlanarDomain, ReflectionAxis, Similarity, Vec2};
use crate::model_spectra::ProblemKind;
use crate::symmetry::is_invariant;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("bound not applicable: {0}")]
    NotApplicable(String),
    #[error("Steklov boundaries differ: {0}")]
    SteklovMismatch(String),
    #[error("domains are not properly nested: {0}")]
    NotProper(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    Weinstock,
    Hps,
    Genus0_8pik,
    #[serde(rename = "thmA_sharp")]
    ThmASharp,
    #[serde(rename = "thmA_genus0")]
    ThmAGenus0,
    Bandle,
    BandleLower,
    JohnFriedlander,
    ReflectedBandle,
}

impl BoundId {
    pub const ALL: [BoundId; 9] = [
        BoundId::Weinstock,
        BoundId::Hps,
        BoundId::Genus0_8pik,
        BoundId::ThmASharp,
        BoundId::ThmAGenus0,
        BoundId::Bandle,
        BoundId::BandleLower,
        BoundId::JohnFriedlander,
        BoundId::ReflectedBandle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::Weinstock => "weinstock",
            BoundId::Hps => "hps",
            BoundId::Genus0_8pik => "genus0_8pik",
            BoundId::ThmASharp => "thmA_sharp",
            BoundId::ThmAGenus0 => "thmA_genus0",
            BoundId::Bandle => "bandle",
            BoundId::BandleLower => "bandle_lower",
            BoundId::JohnFriedlander => "john_friedlander",
            BoundId::ReflectedBandle => "reflected_bandle",
        }
    }

    /// Short description of the domains the bound applies to.
    pub fn applicability(self) -> &'static str {
        match self {
            BoundId::Weinstock => "simply connected, full Steklov, k = 1",
            BoundId::Hps => "simply connected, full Steklov",
            BoundId::Genus0_8pik => "planar, full Steklov",
            BoundId::ThmASharp => "simply connected; Steklov part and remaining boundary both connected",
            BoundId::ThmAGenus0 => "planar; non-Steklov pieces all on one boundary component",
            BoundId::Bandle => "simply connected, full Steklov, p-fold rotation symmetry, 1 <= k <= p - 1",
            BoundId::BandleLower => "simply connected, full Steklov, p-fold rotation symmetry, k >= p",
            BoundId::JohnFriedlander => "Steklov part a single segment with the domain below it (John's condition)",
            BoundId::ReflectedBandle => "Neumann part a single segment whose double has p-fold symmetry, k < floor((p+1)/2)",
        }
    }

    /// Whether the bound limits the normalized eigenvalue from above.
    pub fn is_upper(self) -> bool {
        self != BoundId::BandleLower
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown bound {s:?}"))
    }
}

/// A bound of the catalog at index `k`. `p` is the rotation order for the
/// Bandle-type bounds; when absent it is taken from the domain's declared
/// symmetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub id: BoundId,
    pub k: usize,
    #[serde(default)]
    pub p: Option<usize>,
}

impl BoundSpec {
    pub fn new(id: BoundId, k: usize) -> Self {
        Self { id, k, p: None }
    }

    pub fn with_order(mut self, p: usize) -> Self {
        self.p = Some(p);
        self
    }

    /// Value of the bound; `p` is needed only by the Bandle-type bounds.
    pub fn value(&self, p: usize) -> f64 {
        let k = self.k as f64;
        match self.id {
            BoundId::Weinstock => 2.0 * PI,
            BoundId::Hps => 2.0 * PI * k,
            BoundId::Genus0_8pik => 8.0 * PI * k,
            BoundId::ThmASharp | BoundId::JohnFriedlander => (2.0 * k - 1.0) * PI,
            BoundId::ThmAGenus0 => 4.0 * (2.0 * k - 1.0) * PI,
            BoundId::Bandle => {
                if self.k % 2 == 1 {
                    (k + 1.0) * PI
                } else {
                    k * PI
                }
            }
            BoundId::BandleLower => p as f64 * PI,
            BoundId::ReflectedBandle => k * PI,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub bound: BoundSpec,
    /// Normalized eigenvalue `sigma * L`.
    pub value: f64,
    pub bound_value: f64,
    /// `bound - value` for upper bounds, `value - bound` for lower bounds.
    pub margin: f64,
    pub slack: f64,
    pub satisfied: bool,
    /// Estimated discretization error of `value`.
    pub error_estimate: f64,
    pub diagnostics: Vec<Diagnostics>,
}

/// Maximal cyclic runs of arcs satisfying `pred` on each boundary loop.
fn runs(domain: &PlanarDomain, pred: impl Fn(&Condition) -> bool) -> Vec<usize> {
    domain
        .loops
        .iter()
        .map(|l| {
            let n = l.arcs.len();
            let on: Vec<bool> = l.arcs.iter().map(|a| pred(&a.condition)).collect();
            if on.iter().all(|&b| b) {
                1
            } else {
                (0..n).filter(|&i| on[i] && !on[(i + n - 1) % n]).count()
            }
        })
        .collect()
}

fn not_applicable<T>(id: BoundId, why: &str) -> Result<T, ExperimentError> {
    Err(ExperimentError::NotApplicable(format!("{id}: {why}")))
}

/// Rotation order to use for the Bandle-type bounds, verified on the arcs.
fn rotation_order(domain: &PlanarDomain, spec: &BoundSpec) -> Result<usize, ExperimentError> {
    let (center, declared) = domain.symmetry.rotation.unwrap_or((Vec2::ZERO, 1));
    let p = spec.p.unwrap_or(declared as usize);
    if p < 2 {
        return not_applicable(spec.id, "no rotation symmetry");
    }
    let r = Similarity::rotation(std::f64::consts::TAU / p as f64);
    let m = Similarity { shift: center - r.apply(center), ..r };
    if !is_invariant(domain, &m) {
        return not_applicable(spec.id, &format!("domain is not invariant under rotation of order {p}"));
    }
    Ok(p)
}

/// The single straight Steklov segment of a domain lying on one side of it,
/// with the whole domain projecting into the segment.
fn john_condition(domain: &PlanarDomain) -> bool {
    let st: Vec<_> = domain.arcs().filter(|a| a.condition.is_steklov()).collect();
    let [arc] = st.as_slice() else { return false };
    let ArcKind::Segment { p0, p1 } = arc.kind else { return false };
    let d = p1 - p0;
    let len2 = d.norm_sq();
    // interior lies to the left of the traversal direction, i.e. below for
    // a segment traversed right to left
    domain.arcs().all(|a| {
        (0..=32).all(|i| {
            let q = a.kind.point(i as f64 / 32.0) - p0;
            let along = q.dot(d) / len2;
            let normal = d.cross(q) / len2.sqrt();
            (-1e-12..=1.0 + 1e-12).contains(&along) && normal >= -1e-12
        })
    })
}

/// Whether the Steklov part together with its mirror image across `axis` is
/// invariant under a rotation of order `p`. The center is the arc-length
/// centroid of that curve.
fn double_is_rotation_invariant(domain: &PlanarDomain, axis: &ReflectionAxis, p: usize) -> bool {
    let tol = 1e-9 * 2.0 * domain.diameter();
    let tau = axis.reflection();
    let (mut sum, mut len) = (Vec2::ZERO, 0.0);
    let rule = crate::quadrature::GaussLegendre::new(16);
    for arc in domain.arcs().filter(|a| a.condition.is_steklov()) {
        for (t, w) in rule.mapped(0.0, 1.0) {
            let q = arc.kind.point(t);
            let ds = w * arc.kind.derivs(t).0.norm();
            sum = sum + (q + tau.apply(q)) * ds;
            len += 2.0 * ds;
        }
    }
    let center = sum * (1.0 / len);
    let r = Similarity::rotation(std::f64::consts::TAU / p as f64);
    let rot = Similarity { shift: center - r.apply(center), ..r };
    let stek: Vec<_> = domain.arcs().filter(|a| a.condition.is_steklov()).collect();
    let on_double = |q: Vec2| {
        let (a, b) = (q, tau.apply(q));
        stek.iter().any(|arc| arc.kind.closest(a).1 <= tol || arc.kind.closest(b).1 <= tol)
    };
    stek.iter().all(|arc| {
        (0..=24).all(|i| {
            let q = arc.kind.point(i as f64 / 24.0);
            on_double(rot.apply(q)) && on_double(rot.apply(tau.apply(q)))
        })
    })
}

fn kind_domain(domain: &PlanarDomain, kind: ProblemKind) -> Result<MixedProblem, ExperimentError> {
    Ok(MixedProblem::new(domain.clone(), kind)?)
}

/// Solves `problem` for its first `count` eigenvalues with an error estimate.
fn solve(problem: &MixedProblem, count: usize, params: &SolverParams) -> Result<(Vec<f64>, Vec<f64>, Diagnostics), ExperimentError> {
    let p = SolverParams { k: count.max(params.k.min(count)), ..params.clone() };
    let (r, err) = solve_with_error_estimate(problem, &p)?;
    Ok((r.spectrum.values, err, r.diagnostics))
}

/// Evaluates one bound of the catalog on a problem.
pub fn evaluate_bound(problem: &MixedProblem, spec: &BoundSpec, params: &SolverParams) -> Result<BoundReport, ExperimentError> {
    let domain = &problem.domain;
    let id = spec.id;
    let k = spec.k;
    let full = domain.is_full_steklov();
    let simply = domain.is_simply_connected();
    let length = domain.steklov_mass();
    let mut p_used = 0;

    // (eigenvalue, error estimate, diagnostics)
    let (sigma, err, diagnostics) = match id {
        BoundId::Weinstock | BoundId::Hps | BoundId::Genus0_8pik | BoundId::Bandle | BoundId::BandleLower => {
            if !full {
                return not_applicable(id, "needs a full Steklov boundary");
            }
            if id != BoundId::Genus0_8pik && !simply {
                return not_applicable(id, "needs a simply connected domain");
            }
            if id == BoundId::Weinstock && k != 1 {
                return not_applicable(id, "defined for k = 1 only");
            }
            if k == 0 {
                return not_applicable(id, "k must be positive");
            }
            if matches!(id, BoundId::Bandle | BoundId::BandleLower) {
                let p = rotation_order(domain, spec)?;
                if id == BoundId::Bandle && k > p - 1 {
                    return not_applicable(id, &format!("k = {k} exceeds p - 1 = {}", p - 1));
                }
                if id == BoundId::BandleLower && k < p {
                    return not_applicable(id, &format!("k = {k} is below p = {p}"));
                }
                p_used = p;
            }
            let (v, e, d) = solve(&kind_domain(domain, ProblemKind::Steklov)?, k + 1, params)?;
            (v[k], e[k], vec![d])
        }
        BoundId::ThmASharp | BoundId::ThmAGenus0 => {
            if full {
                return not_applicable(id, "needs a nontrivial boundary decomposition");
            }
            if k == 0 {
                return not_applicable(id, "k must be positive");
            }
            let star = runs(domain, |c| !c.is_steklov());
            if id == BoundId::ThmASharp {
                let stek = runs(domain, |c| c.is_steklov());
                if !simply || star[0] != 1 || stek[0] != 1 {
                    return not_applicable(id, "needs a simply connected domain with connected Steklov and non-Steklov parts");
                }
            } else if star.iter().filter(|&&r| r > 0).count() != 1 {
                return not_applicable(id, "non-Steklov pieces lie on several boundary components");
            }
            let sn = kind_domain(domain, ProblemKind::Sn)?;
            let sd = kind_domain(domain, ProblemKind::Sd)?;
            let (rn, rd) = rayon::join(|| solve(&sn, k + 1, params), || solve(&sd, k, params));
            let (vn, en, dn) = rn?;
            let (vd, ed, dd) = rd?;
            let (s, e) = if vn[k] <= vd[k - 1] { (vn[k], en[k]) } else { (vd[k - 1], ed[k - 1]) };
            (s, e, vec![dn, dd])
        }
        BoundId::JohnFriedlander => {
            if k == 0 {
                return not_applicable(id, "k must be positive");
            }
            if !john_condition(domain) {
                return not_applicable(id, "Steklov part is not a single segment above the domain");
            }
            let (v, e, d) = solve(&kind_domain(domain, ProblemKind::Sn)?, k + 1, params)?;
            (v[k], e[k], vec![d])
        }
        BoundId::ReflectedBandle => {
            let Some(p) = spec.p else {
                return not_applicable(id, "rotation order p of the double is required");
            };
            if k >= (p + 1) / 2 {
                return not_applicable(id, &format!("k = {k} must be below floor((p+1)/2) = {}", (p + 1) / 2));
            }
            let star: Vec<_> = domain.arcs().filter(|a| !a.condition.is_steklov()).collect();
            let [arc] = star.as_slice() else {
                return not_applicable(id, "non-Steklov part must be a single segment");
            };
            let ArcKind::Segment { p0, p1 } = arc.kind else {
                return not_applicable(id, "non-Steklov part must be a single segment");
            };
            let axis = crate::geometry::ReflectionAxis::new(p0, p1 - p0);
            if !double_is_rotation_invariant(domain, &axis, p) {
                return not_applicable(id, &format!("double is not invariant under rotation of order {p}"));
            }
            p_used = p;
            let (v, e, d) = solve(&kind_domain(domain, ProblemKind::Sn)?, k + 1, params)?;
            (v[k], e[k], vec![d])
        }
    };
    let value = sigma * length;
    let error_estimate = err * length;
    let bound_value = spec.value(p_used);
    let margin = if id.is_upper() { bound_value - value } else { value - bound_value };
    let slack = (1e-6 * bound_value).max(10.0 * error_estimate);
    Ok(BoundReport {
        bound: BoundSpec { p: if p_used > 0 { Some(p_used) } else { spec.p }, ..spec.clone() },
        value,
        bound_value,
        margin,
        slack,
        satisfied: margin >= -slack,
        error_estimate,
        diagnostics,
    })
}

/// Copy of a family template with its sweep parameter set to `x`: `eps` for
/// the chain families, `p` for flowers, `h` for strips, the radius for disks.
pub fn instantiate(template: &FamilySpec, x: f64) -> Result<FamilySpec, ExperimentError> {
    let int = |x: f64| -> Result<usize, ExperimentError> {
        if x >= 1.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(ExperimentError::InvalidSchedule(format!("{x} is not a positive integer")))
        }
    };
    Ok(match template.clone() {
        FamilySpec::GpChain { k, .. } => FamilySpec::GpChain { k, eps: x },
        FamilySpec::BandleChain { p, m, .. } => FamilySpec::BandleChain { p, m, eps: x },
        FamilySpec::RotCluster { p, m, .. } => FamilySpec::RotCluster { p, m, eps: x },
        FamilySpec::BandleFlower { .. } => FamilySpec::BandleFlower { p: int(x)? },
        FamilySpec::Strip { w, .. } => FamilySpec::Strip { w, h: x },
        FamilySpec::Disk { .. } => FamilySpec::Disk { radius: x },
        FamilySpec::HalfDisk { condition, .. } => FamilySpec::HalfDisk { radius: x, condition },
        FamilySpec::QuarterDisk { .. } => FamilySpec::QuarterDisk { radius: x },
        FamilySpec::SmoothBlob { .. } => {
            return Err(ExperimentError::InvalidSchedule("smooth_blob has no sweep parameter".into()))
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub family: String,
    pub value: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub bound: BoundSpec,
    pub rows: Vec<SweepRow>,
    /// Margins strictly decrease along the schedule.
    pub monotone: bool,
    pub all_satisfied: bool,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("parameter,family,value,margin,satisfied,error_estimate\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:.14e},{:.14e},{},{:.3e}\n",
                r.parameter, r.family, r.value, r.margin, r.satisfied, r.error_estimate
            ));
        }
        s
    }
}

fn problem_for(domain: PlanarDomain) -> Result<MixedProblem, ExperimentError> {
    let kind = if domain.is_full_steklov() { ProblemKind::Steklov } else { ProblemKind::Mixed };
    Ok(MixedProblem::new(domain, kind)?)
}

/// Evaluates `bound` on every member of a family; entries are computed in
/// parallel and reported in schedule order.
pub fn sweep_family(
    template: &FamilySpec,
    schedule: &[f64],
    bound: &BoundSpec,
    params: &SolverParams,
) -> Result<SweepTable, ExperimentError> {
    if schedule.is_empty() {
        return Err(ExperimentError::InvalidSchedule("empty schedule".into()));
    }
    let rows: Vec<SweepRow> = schedule
        .par_iter()
        .map(|&x| {
            let spec = instantiate(template, x)?;
            let problem = problem_for(make_family(&spec)?)?;
            let r = evaluate_bound(&problem, bound, params)?;
            Ok(SweepRow {
                parameter: x,
                family: spec.tag(),
                value: r.value,
                margin: r.margin,
                satisfied: r.satisfied,
                error_estimate: r.error_estimate,
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    let monotone = rows.windows(2).all(|w| w[1].margin < w[0].margin);
    let all_satisfied = rows.iter().all(|r| r.satisfied);
    Ok(SweepTable { bound: bound.clone(), rows, monotone, all_satisfied })
}

/// A named sweep from the schedule manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub name: String,
    pub template: FamilySpec,
    pub schedule: Vec<f64>,
    pub bound: BoundSpec,
    /// Limit approached by the normalized eigenvalue as the parameter shrinks.
    #[serde(default)]
    pub limit: Option<f64>,
}

const MANIFEST: &str = include_str!("../data/schedules.json");

/// The fixed sweep schedules shipped with the crate.
pub fn schedules() -> Vec<ScheduleEntry> {
    serde_json::from_str(MANIFEST).expect("bundled schedule manifest is valid")
}

pub fn schedule(name: &str) -> Option<ScheduleEntry> {
    schedules().into_iter().find(|e| e.name == name)
}

/// Outcome of one index in a monotonicity comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// Expected ordering holds by more than the tolerance.
    Strict,
    /// The two values agree within the tolerance.
    Unresolved,
    /// Expected ordering is violated by more than the tolerance.
    Violated,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityRow {
    pub k: usize,
    pub small: f64,
    pub big: f64,
    /// Difference oriented so that the expected ordering makes it positive,
    /// relative to `big`.
    pub gap: f64,
    pub ordering: Ordering,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub kind: ProblemKind,
    pub tol: f64,
    pub rows: Vec<MonotonicityRow>,
    /// No index violates the expected ordering.
    pub consistent: bool,
}

fn steklov_arcs_match(a: &PlanarDomain, b: &PlanarDomain) -> bool {
    let tol = 1e-12 * a.diameter().max(b.diameter());
    let sa: Vec<_> = a.arcs().filter(|x| x.condition.is_steklov()).collect();
    let sb: Vec<_> = b.arcs().filter(|x| x.condition.is_steklov()).collect();
    sa.len() == sb.len()
        && sa.iter().all(|x| {
            sb.iter().any(|y| {
                x.condition == y.condition
                    && (0..=8).all(|i| {
                        let t = i as f64 / 8.0;
                        x.kind.point(t).dist(y.kind.point(t)) <= tol
                    })
            })
        })
}

/// Compares the first `count` nonzero-index eigenvalues of two nested
/// problems with the same Steklov boundary. With Neumann conditions the
/// smaller domain has smaller eigenvalues; with Dirichlet, larger ones.
pub fn monotonicity_check(
    small: &PlanarDomain,
    big: &PlanarDomain,
    kind: ProblemKind,
    count: usize,
    tol: f64,
    params: &SolverParams,
) -> Result<MonotonicityReport, ExperimentError> {
    if !matches!(kind, ProblemKind::Sn | ProblemKind::Sd) {
        return Err(ExperimentError::NotApplicable("monotonicity compares Neumann or Dirichlet problems".into()));
    }
    if !steklov_arcs_match(small, big) {
        return Err(ExperimentError::SteklovMismatch("Steklov arc lists differ".into()));
    }
    let diam = big.diameter();
    let samples: Vec<Vec2> =
        small.arcs().flat_map(|a| (0..=16).map(move |i| a.kind.point(i as f64 / 16.0))).collect();
    let on_big = |p: Vec2| big.arcs().any(|a| a.kind.closest(p).1 <= 1e-10 * diam);
    if samples.iter().any(|&p| !on_big(p) && !big.contains(p)) {
        return Err(ExperimentError::NotProper("first domain is not contained in the second".into()));
    }
    let differs = samples.iter().any(|&p| !on_big(p))
        || big.arcs().any(|a| {
            (0..=16).any(|i| {
                let p = a.kind.point(i as f64 / 16.0);
                !small.arcs().any(|b| b.kind.closest(p).1 <= 1e-10 * diam)
            })
        });
    if !differs {
        return Err(ExperimentError::NotProper("domains coincide".into()));
    }
    let ps = MixedProblem::new(small.clone(), kind)?;
    let pb = MixedProblem::new(big.clone(), kind)?;
    let p = SolverParams { k: count + 1, ..params.clone() };
    let (rs, rb) = rayon::join(
        || crate::dtn::solve_mixed_steklov(&ps, &p),
        || crate::dtn::solve_mixed_steklov(&pb, &p),
    );
    let (vs, vb) = (rs?.spectrum.values, rb?.spectrum.values);
    let sign = if kind == ProblemKind::Sn { 1.0 } else { -1.0 };
    let rows: Vec<MonotonicityRow> = (1..=count)
        .map(|k| {
            let gap = sign * (vb[k] - vs[k]) / vb[k].abs();
            let ordering = if gap > tol {
                Ordering::Strict
            } else if gap >= -tol {
                Ordering::Unresolved
            } else {
                Ordering::Violated
            };
            MonotonicityRow { k, small: vs[k], big: vb[k], gap, ordering }
        })
        .collect();
    let consistent = rows.iter().all(|r| r.ordering != Ordering::Violated);
    Ok(MonotonicityReport { kind, tol, rows, consistent })
}

#[derive(Debug, Clone, Serialize)]
pub struct FriedlanderRow {
    pub k: usize,
    pub neumann: f64,
    pub dirichlet_shifted: f64,
    pub holds: bool,
}

/// Checks `sigma_k^N <= sigma_{k-1}^D` for `k = 1..=count` up to relative
/// tolerance `tol`.
pub fn friedlander_check(
    domain: &PlanarDomain,
    count: usize,
    tol: f64,
    params: &SolverParams,
) -> Result<Vec<FriedlanderRow>, ExperimentError> {
    let sn = MixedProblem::new(domain.clone(), ProblemKind::Sn)?;
    let sd = MixedProblem::new(domain.clone(), ProblemKind::Sd)?;
    let p = SolverParams { k: count + 1, ..params.clone() };
    let (rn, rd) = rayon::join(|| crate::dtn::solve_mixed_steklov(&sn, &p), || crate::dtn::solve_mixed_steklov(&sd, &p));
    let (vn, vd) = (rn?.spectrum.values, rd?.spectrum.values);
    Ok((1..=count)
        .map(|k| FriedlanderRow {
            k,
            neumann: vn[k],
            dirichlet_shifted: vd[k - 1],
            holds: vn[k] <= vd[k - 1] * (1.0 + tol),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::quotient;

    fn problem(spec: FamilySpec) -> MixedProblem {
        problem_for(make_family(&spec).unwrap()).unwrap()
    }

    fn params() -> SolverParams {
        SolverParams { k: 8, ..SolverParams::default() }
    }

    #[test]
    fn bound_values() {
        let v = |id, k| BoundSpec::new(id, k).value(3);
        assert_eq!(v(BoundId::Weinstock, 1), 2.0 * PI);
        assert_eq!(v(BoundId::Hps, 3), 6.0 * PI);
        assert_eq!(v(BoundId::Genus0_8pik, 2), 16.0 * PI);
        assert_eq!(v(BoundId::ThmASharp, 2), 3.0 * PI);
        assert_eq!(v(BoundId::ThmAGenus0, 2), 12.0 * PI);
        assert_eq!(v(BoundId::Bandle, 1), 2.0 * PI);
        assert_eq!(v(BoundId::Bandle, 2), 2.0 * PI);
        assert_eq!(v(BoundId::Bandle, 3), 4.0 * PI);
        assert_eq!(v(BoundId::BandleLower, 5), 3.0 * PI);
        assert_eq!(v(BoundId::JohnFriedlander, 3), 5.0 * PI);
        assert_eq!(v(BoundId::ReflectedBandle, 2), 2.0 * PI);
        for id in BoundId::ALL {
            assert_eq!(id.name().parse::<BoundId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
    }

    #[test]
    fn disk_attains_weinstock() {
        let r = evaluate_bound(&problem(FamilySpec::Disk { radius: 1.0 }), &BoundSpec::new(BoundId::Weinstock, 1), &params()).unwrap();
        assert!(r.margin.abs() < 1e-8, "{r:?}");
        assert!(r.satisfied);
    }

    #[test]
    fn disk_hps_margin() {
        let r = evaluate_bound(&problem(FamilySpec::Disk { radius: 1.0 }), &BoundSpec::new(BoundId::Hps, 3), &params()).unwrap();
        assert!((r.value - 4.0 * PI).abs() < 1e-8);
        assert!((r.margin - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn half_disk_attains_sharp_mixed_bound() {
        let p = problem(FamilySpec::HalfDisk { radius: 1.0, condition: "neumann".into() });
        let r = evaluate_bound(&p, &BoundSpec::new(BoundId::ThmASharp, 1), &params()).unwrap();
        assert!(r.margin.abs() < 1e-4, "{r:?}");
        assert!(r.satisfied);
    }

    #[test]
    fn applicability_is_enforced() {
        let half = problem(FamilySpec::HalfDisk { radius: 1.0, condition: "neumann".into() });
        let disk = problem(FamilySpec::Disk { radius: 1.0 });
        let na = |p: &MixedProblem, s: BoundSpec| matches!(evaluate_bound(p, &s, &params()), Err(ExperimentError::NotApplicable(_)));
        assert!(na(&half, BoundSpec::new(BoundId::Weinstock, 1)));
        assert!(na(&disk, BoundSpec::new(BoundId::Weinstock, 2)));
        assert!(na(&disk, BoundSpec::new(BoundId::ThmASharp, 1)));
        assert!(na(&disk, BoundSpec::new(BoundId::JohnFriedlander, 1)));
        // half disk: Steklov part is not a segment
        assert!(na(&half, BoundSpec::new(BoundId::JohnFriedlander, 1)));
        let blob = problem(FamilySpec::random_blob(1, 5, 0.2, crate::geometry::BlobSymmetry::None));
        assert!(na(&blob, BoundSpec::new(BoundId::Bandle, 1).with_order(3)));
        let flower = problem(FamilySpec::BandleFlower { p: 3 });
        assert!(na(&flower, BoundSpec::new(BoundId::Bandle, 3)));
        assert!(na(&flower, BoundSpec::new(BoundId::BandleLower, 2)));
    }

    #[test]
    fn strip_satisfies_john_bound() {
        let p = problem(FamilySpec::Strip { w: 1.0, h: 1.0 });
        for k in 1..=3 {
            let r = evaluate_bound(&p, &BoundSpec::new(BoundId::JohnFriedlander, k), &params()).unwrap();
            let exact = k as f64 * PI * (k as f64 * PI).tanh();
            assert!((r.value - exact).abs() < 1e-7, "{r:?}");
            assert!(r.satisfied && r.margin > 0.0);
        }
    }

    #[test]
    fn flower_quotient_satisfies_reflected_bound() {
        let d = make_family(&FamilySpec::BandleFlower { p: 5 }).unwrap();
        let axis = d.symmetry.reflections[0].clone();
        let q = quotient(&d, &axis, Condition::Neumann).unwrap();
        for k in 1..3 {
            let r = evaluate_bound(&q, &BoundSpec::new(BoundId::ReflectedBandle, k).with_order(5), &params()).unwrap();
            assert!(r.satisfied, "{r:?}");
        }
        let r = evaluate_bound(&q, &BoundSpec::new(BoundId::ReflectedBandle, 1).with_order(4), &params());
        assert!(matches!(r, Err(ExperimentError::NotApplicable(_))));
    }

    #[test]
    fn strip_nesting_orders_eigenvalues() {
        let small = make_family(&FamilySpec::Strip { w: 1.0, h: 1.0 }).unwrap();
        let big = make_family(&FamilySpec::Strip { w: 1.0, h: 2.0 }).unwrap();
        let n = monotonicity_check(&small, &big, ProblemKind::Sn, 3, 1e-8, &params()).unwrap();
        assert!(n.consistent);
        assert_eq!(n.rows[0].ordering, Ordering::Strict);
        assert!((n.rows[0].small - PI * PI.tanh()).abs() < 1e-9);
        assert!((n.rows[0].big - PI * (2.0 * PI).tanh()).abs() < 1e-9);
        let d = monotonicity_check(&small, &big, ProblemKind::Sd, 2, 1e-6, &params()).unwrap();
        assert!(d.consistent);
        assert_eq!(d.rows[0].ordering, Ordering::Strict);
        assert!(d.rows[0].small > d.rows[0].big);
    }

    #[test]
    fn identical_domains_are_not_proper() {
        let s = make_family(&FamilySpec::Strip { w: 1.0, h: 1.0 }).unwrap();
        assert!(matches!(
            monotonicity_check(&s, &s, ProblemKind::Sn, 2, 1e-8, &params()),
            Err(ExperimentError::NotProper(_))
        ));
        let other = make_family(&FamilySpec::Strip { w: 2.0, h: 1.0 }).unwrap();
        assert!(matches!(
            monotonicity_check(&s, &other, ProblemKind::Sn, 2, 1e-8, &params()),
            Err(ExperimentError::SteklovMismatch(_))
        ));
    }

    #[test]
    fn friedlander_inequality_on_strip() {
        let s = make_family(&FamilySpec::Strip { w: 1.0, h: 2.0 }).unwrap();
        let rows = friedlander_check(&s, 5, 1e-8, &params()).unwrap();
        assert!(rows.iter().all(|r| r.holds), "{rows:?}");
    }

    #[test]
    fn manifest_parses() {
        let all = schedules();
        assert!(!all.is_empty());
        for e in &all {
            for &x in &e.schedule {
                make_family(&instantiate(&e.template, x).unwrap()).unwrap();
            }
        }
    }

    #[test]
    fn sweep_rejects_empty_schedule() {
        let r = sweep_family(&FamilySpec::GpChain { k: 2, eps: 0.1 }, &[], &BoundSpec::new(BoundId::Hps, 2), &params());
        assert!(matches!(r, Err(ExperimentError::InvalidSchedule(_))));
    }
}
