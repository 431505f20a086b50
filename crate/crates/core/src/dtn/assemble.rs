//! Nyström matrices of the single- and double-layer operators
//! `S q(x) = int G(x, y) q(y) ds_y` and `D u(x) = int d_{n_y} G(x, y) u(y) ds_y`
//! with `G(x, y) = -log|x - y| / 2pi`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::geometry::{Arc, Vec2};
use crate::quadrature::{kress_log_weights, log_product_weights, Barycentric, GaussLegendre};

use super::mesh::{Mesh, Panel, PANEL_ORDER};

const INV_2PI: f64 = 1.0 / TAU;
/// A subinterval is integrated directly once the target is this many
/// subinterval lengths away from its midpoint.
const FAR_RATIO: f64 = 1.5;
const MAX_DEPTH: usize = 60;

struct PanelTables {
    rule: GaussLegendre,
    bary: Barycentric,
    /// `self_log[a][b]`: product weight of node `b` for `log|s - s_a|`.
    self_log: Vec<Vec<f64>>,
}

impl PanelTables {
    fn new() -> Self {
        let rule = GaussLegendre::new(PANEL_ORDER);
        let bary = Barycentric::new(&rule.nodes);
        let self_log = rule.nodes.iter().map(|&s| log_product_weights(&rule, s)).collect();
        Self { rule, bary, self_log }
    }
}

#[inline]
fn kernels(x: Vec2, y: Vec2, ny: Vec2) -> (f64, f64) {
    let r = y - x;
    let r2 = r.norm_sq();
    (-INV_2PI * 0.5 * r2.ln(), -INV_2PI * r.dot(ny) / r2)
}

/// Integrals of both kernels against the Lagrange basis of `panel`, by
/// recursive bisection of the parameter interval.
fn near_panel(x: Vec2, arc: &Arc, panel: &Panel, tab: &PanelTables, out_s: &mut [f64], out_d: &mut [f64]) {
    let mut stack = vec![(-1.0f64, 1.0f64, 0usize)];
    let h = 0.5 * (panel.t1 - panel.t0);
    let m = 0.5 * (panel.t0 + panel.t1);
    let mut basis = [0.0; PANEL_ORDER];
    while let Some((a, b, depth)) = stack.pop() {
        let mid = 0.5 * (a + b);
        let sub_len = panel.length * 0.5 * (b - a);
        let ym = arc.kind.point(m + h * mid);
        if depth < MAX_DEPTH && x.dist(ym) < FAR_RATIO * sub_len {
            stack.push((a, mid, depth + 1));
            stack.push((mid, b, depth + 1));
            continue;
        }
        for (s, w) in tab.rule.mapped(a, b) {
            let t = m + h * s;
            let (d1, _) = arc.kind.derivs(t);
            let speed = d1.norm();
            let ny = -(d1 * (1.0 / speed)).perp();
            let y = arc.kind.point(t);
            let (ks, kd) = kernels(x, y, ny);
            let ds = w * h * speed;
            tab.bary.basis(s, &mut basis);
            for j in 0..PANEL_ORDER {
                out_s[j] += ks * basis[j] * ds;
                out_d[j] += kd * basis[j] * ds;
            }
        }
    }
}

fn panel_distance(x: Vec2, mesh: &Mesh, panel: &Panel) -> f64 {
    let arc = &mesh.arcs[panel.arc];
    let mut d = x.dist(arc.kind.point(panel.t0)).min(x.dist(arc.kind.point(panel.t1)));
    for node in &mesh.nodes[panel.start..panel.start + PANEL_ORDER] {
        d = d.min(x.dist(node.pos));
    }
    d
}

/// Index of the panel or periodic block that owns each node.
enum Owner {
    Panel(usize),
    Periodic(usize),
}

fn owners(mesh: &Mesh) -> Vec<Owner> {
    let mut own: Vec<Option<Owner>> = (0..mesh.len()).map(|_| None).collect();
    for (p, panel) in mesh.panels.iter().enumerate() {
        for i in panel.start..panel.start + PANEL_ORDER {
            own[i] = Some(Owner::Panel(p));
        }
    }
    for (b, block) in mesh.periodic.iter().enumerate() {
        for i in block.start..block.start + block.len {
            own[i] = Some(Owner::Periodic(b));
        }
    }
    own.into_iter().map(|o| o.expect("every node has an owner")).collect()
}

/// Dense `S` and `D` matrices on the mesh nodes.
pub fn layer_matrices(mesh: &Mesh) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = mesh.len();
    let tab = PanelTables::new();
    let own = owners(mesh);
    let kress: Vec<Vec<f64>> = mesh.periodic.iter().map(|b| kress_log_weights(b.len / 2)).collect();

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = mesh.nodes[i].pos;
            let mut srow = vec![0.0; n];
            let mut drow = vec![0.0; n];
            // plain rule everywhere, corrected below
            for (j, nj) in mesh.nodes.iter().enumerate() {
                if j != i {
                    let (ks, kd) = kernels(xi, nj.pos, nj.normal);
                    srow[j] = ks * nj.weight;
                    drow[j] = kd * nj.weight;
                }
            }
            match own[i] {
                Owner::Periodic(b) => {
                    let block = &mesh.periodic[b];
                    let half = block.len / 2;
                    let r = &kress[b];
                    let a = i - block.start;
                    let h = PI / half as f64;
                    for c in 0..block.len {
                        let j = block.start + c;
                        let nj = &mesh.nodes[j];
                        let dtau = nj.speed / TAU;
                        let l2 = if c == a {
                            (dtau * dtau).ln()
                        } else {
                            let ds = 0.5 * h * (a as f64 - c as f64);
                            (xi.dist(nj.pos).powi(2) / (4.0 * ds.sin().powi(2))).ln()
                        };
                        let off = (a + block.len - c) % block.len;
                        srow[j] = -0.5 * INV_2PI * (r[off] + h * l2) * dtau;
                    }
                    let ni = &mesh.nodes[i];
                    drow[i] = -ni.curvature / (2.0 * TAU) * ni.weight;
                }
                Owner::Panel(p) => {
                    let panel = &mesh.panels[p];
                    let a = i - panel.start;
                    let h = 0.5 * (panel.t1 - panel.t0);
                    for b in 0..PANEL_ORDER {
                        let j = panel.start + b;
                        let nj = &mesh.nodes[j];
                        let dyds = h * nj.speed;
                        let rem = if b == a {
                            dyds.ln()
                        } else {
                            (xi.dist(nj.pos) / (tab.rule.nodes[a] - tab.rule.nodes[b]).abs()).ln()
                        };
                        srow[j] = -INV_2PI * (tab.self_log[a][b] + tab.rule.weights[b] * rem) * dyds;
                    }
                    let ni = &mesh.nodes[i];
                    drow[i] = -ni.curvature / (2.0 * TAU) * ni.weight;
                }
            }
            let mut bs = [0.0; PANEL_ORDER];
            let mut bd = [0.0; PANEL_ORDER];
            for (p, panel) in mesh.panels.iter().enumerate() {
                if matches!(own[i], Owner::Panel(q) if q == p) {
                    continue;
                }
                if panel_distance(xi, mesh, panel) >= panel.length {
                    continue;
                }
                bs.fill(0.0);
                bd.fill(0.0);
                near_panel(xi, &mesh.arcs[panel.arc], panel, &tab, &mut bs, &mut bd);
                srow[panel.start..panel.start + PANEL_ORDER].copy_from_slice(&bs);
                drow[panel.start..panel.start + PANEL_ORDER].copy_from_slice(&bd);
            }
            (srow, drow)
        })
        .collect();

    let mut s = DMatrix::zeros(n, n);
    let mut d = DMatrix::zeros(n, n);
    for (i, (sr, dr)) in rows.into_iter().enumerate() {
        for j in 0..n {
            s[(i, j)] = sr[j];
            d[(i, j)] = dr[j];
        }
    }
    (s, d)
}
