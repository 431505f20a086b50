use serde::{Deserialize, Serialize};

use crate::geometry::{Arc, Condition, PlanarDomain, Vec2};
use crate::quadrature::GaussLegendre;

use super::{MixedProblem, SolverError, SolverParams};

/// Gauss–Legendre order of every panel.
pub const PANEL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Steklov,
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub pos: Vec2,
    /// Outward unit normal.
    pub normal: Vec2,
    /// Arc-length quadrature weight.
    pub weight: f64,
    pub kind: NodeKind,
    /// Steklov weight (1 off the Steklov boundary).
    pub rho: f64,
    /// Global arc index.
    pub arc: usize,
    /// Arc parameter in `[0, 1]`.
    pub t: f64,
    /// Signed curvature.
    pub curvature: f64,
    /// `|dx/dt|` with respect to the arc parameter.
    pub speed: f64,
}

/// Gauss–Legendre panel over `[t0, t1]` of one arc.
#[derive(Debug, Clone)]
pub struct Panel {
    pub arc: usize,
    pub t0: f64,
    pub t1: f64,
    /// Index of the panel's first node.
    pub start: usize,
    pub length: f64,
}

/// Equispaced periodic nodes on a loop made of one closed smooth arc.
#[derive(Debug, Clone)]
pub struct PeriodicBlock {
    pub arc: usize,
    pub start: usize,
    /// Number of nodes (even).
    pub len: usize,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub arcs: Vec<Arc>,
    pub nodes: Vec<Node>,
    pub panels: Vec<Panel>,
    pub periodic: Vec<PeriodicBlock>,
    /// Arc endpoints where the condition or the tangent changes.
    pub junctions: Vec<Vec2>,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn steklov_indices(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].kind == NodeKind::Steklov).collect()
    }

    /// Sum of quadrature weights per arc.
    pub fn arc_weight_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.arcs.len()];
        for n in &self.nodes {
            s[n.arc] += n.weight;
        }
        s
    }
}

fn node_kind(c: &Condition) -> NodeKind {
    match c {
        Condition::Steklov(_) => NodeKind::Steklov,
        Condition::Neumann => NodeKind::Neumann,
        Condition::Dirichlet => NodeKind::Dirichlet,
    }
}

fn make_node(arc: &Arc, arc_index: usize, t: f64, weight_per_t: f64) -> Node {
    let (d1, _) = arc.kind.derivs(t);
    let speed = d1.norm();
    let tangent = d1 * (1.0 / speed);
    let rho = match &arc.condition {
        Condition::Steklov(w) => w.eval(t),
        _ => 1.0,
    };
    Node {
        pos: arc.kind.point(t),
        normal: -tangent.perp(),
        weight: weight_per_t * speed,
        kind: node_kind(&arc.condition),
        rho,
        arc: arc_index,
        t,
        curvature: arc.kind.curvature(t),
        speed,
    }
}

/// Sigmoidal grading map of `[0, 1]` clustering points at both ends.
fn grade(u: f64, q: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = u.powf(q);
    let b = (1.0 - u).powf(q);
    a / (a + b)
}

/// Panel breakpoints on `[0, 1]`: `base` graded panels, with the first and
/// last panel split dyadically `head` and `tail` times.
fn breakpoints(base: usize, q: f64, head: usize, tail: usize) -> Vec<f64> {
    let pts: Vec<f64> = (0..=base).map(|k| grade(k as f64 / base as f64, q)).collect();
    let first = pts[1];
    let last = pts[base - 1];
    let mut out = vec![0.0];
    out.extend((1..=head).rev().map(|l| first * 0.5f64.powi(l as i32)));
    out.extend_from_slice(&pts[1..base]);
    out.extend((1..=tail).map(|l| 1.0 - (1.0 - last) * 0.5f64.powi(l as i32)));
    out.push(1.0);
    out
}

const ANGLE_TOL: f64 = 1e-6;

/// Turning angle from the end of `a` to the start of `b`, positive to the left.
fn turning_angle(a: &Arc, b: &Arc) -> f64 {
    let ta = a.kind.unit_tangent(1.0);
    let tb = b.kind.unit_tangent(0.0);
    ta.cross(tb).atan2(ta.dot(tb))
}

fn is_junction(a: &Arc, b: &Arc) -> bool {
    !a.condition.same_kind(&b.condition) || turning_angle(a, b).abs() > ANGLE_TOL
}

/// Whether harmonic functions satisfying the two boundary conditions are
/// generically non-smooth at the corner where `a` ends and `b` starts. Local
/// exponents are `j π / α` when both sides are of natural type (Steklov or
/// Neumann) or both Dirichlet, and `(j + 1/2) π / α` otherwise; the corner is
/// regular when they are all integers.
fn is_singular_corner(a: &Arc, b: &Arc) -> bool {
    let alpha = std::f64::consts::PI - turning_angle(a, b);
    let da = matches!(a.condition, Condition::Dirichlet);
    let db = matches!(b.condition, Condition::Dirichlet);
    let ratio = if da == db { std::f64::consts::PI / alpha } else { std::f64::consts::PI / (2.0 * alpha) };
    (ratio - ratio.round()).abs() > ANGLE_TOL || ratio.round() < 1.0
}

/// Builds the quadrature mesh of an already rescaled domain.
///
/// `unit` converts lengths of `domain` into the reference units in which
/// `nodes_per_unit_length` is measured.
pub(crate) fn build_mesh(domain: &PlanarDomain, arcs_cond: &[Arc], params: &SolverParams, unit: f64) -> Mesh {
    let rule = GaussLegendre::new(PANEL_ORDER);
    let mut nodes = Vec::new();
    let mut panels = Vec::new();
    let mut periodic = Vec::new();
    let mut junctions = Vec::new();
    let mut arc_index = 0;
    let mut arcs = Vec::new();
    let mut offset = 0;
    for lp in &domain.loops {
        let n_arcs = lp.arcs.len();
        let loop_arcs = &arcs_cond[offset..offset + n_arcs];
        offset += n_arcs;
        if n_arcs == 1 && loop_arcs[0].kind.is_closed() {
            let arc = &loop_arcs[0];
            let len_ref = arc.length() * unit;
            let mut n = (params.nodes_per_unit_length * len_ref).ceil() as usize;
            n = n.max(8);
            n += n % 2;
            let start = nodes.len();
            for j in 0..n {
                let t = j as f64 / n as f64;
                nodes.push(make_node(arc, arc_index, t, 1.0 / n as f64));
            }
            periodic.push(PeriodicBlock { arc: arc_index, start, len: n });
            arcs.push(arc.clone());
            arc_index += 1;
            continue;
        }
        for (k, arc) in loop_arcs.iter().enumerate() {
            let prev = &loop_arcs[(k + n_arcs - 1) % n_arcs];
            let next = &loop_arcs[(k + 1) % n_arcs];
            if is_junction(prev, arc) {
                junctions.push(arc.kind.start());
            }
            let head = if is_singular_corner(prev, arc) { params.refine_levels } else { 0 };
            let tail = if is_singular_corner(arc, next) { params.refine_levels } else { 0 };
            let len = arc.length();
            let len_ref = len * unit;
            let base = ((params.nodes_per_unit_length * len_ref / PANEL_ORDER as f64).ceil() as usize).max(2);
            let bps = breakpoints(base, params.grading, head, tail);
            let base_len = len / base as f64;
            for w in bps.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                if params.corner_cutoff > 0.0 {
                    let near_start = t1 * len <= params.corner_cutoff * base_len;
                    let near_end = (1.0 - t0) * len <= params.corner_cutoff * base_len;
                    if near_start || near_end {
                        continue;
                    }
                }
                let start = nodes.len();
                let mut plen = 0.0;
                for (t, wt) in rule.mapped(t0, t1) {
                    let node = make_node(arc, arc_index, t, wt);
                    plen += node.weight;
                    nodes.push(node);
                }
                panels.push(Panel { arc: arc_index, t0, t1, start, length: plen });
            }
            arcs.push(arc.clone());
            arc_index += 1;
        }
    }
    Mesh { arcs, nodes, panels, periodic, junctions }
}

/// Public entry point: mesh of the problem in its own (unscaled) coordinates.
pub fn discretize(problem: &MixedProblem, params: &SolverParams) -> Result<Mesh, SolverError> {
    params.validate()?;
    let arcs = problem.effective_arcs();
    let diam = problem.domain.diameter();
    let mesh = build_mesh(&problem.domain, &arcs, params, 2.0 / diam);
    let ns = mesh.steklov_indices().len();
    if ns < 4 * params.k {
        return Err(SolverError::TooFewNodes { steklov_nodes: ns, k: params.k });
    }
    Ok(mesh)
}
