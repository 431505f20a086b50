//! Pairwise arc intersections, returned as parameter pairs `(t_a, t_b)`.

use super::arc::{angle_param, ArcKind};
use super::vec2::Vec2;

fn circle_params(kind: &ArcKind) -> Option<(Vec2, f64, f64, f64)> {
    match kind {
        ArcKind::Circle { center, radius, theta0, sweep } => Some((*center, *radius, *theta0, *sweep)),
        _ => None,
    }
}

/// Points where the full supporting line/circle of `a` meets `b`, filtered to the arcs.
pub fn intersect(a: &ArcKind, b: &ArcKind, tol: f64) -> Vec<(f64, f64)> {
    match (a, b) {
        (ArcKind::Segment { p0, p1 }, ArcKind::Segment { p0: q0, p1: q1 }) => {
            seg_seg(*p0, *p1, *q0, *q1, tol)
        }
        (ArcKind::Segment { p0, p1 }, ArcKind::Circle { .. }) => seg_circle(*p0, *p1, b, tol),
        (ArcKind::Circle { .. }, ArcKind::Segment { p0, p1 }) => {
            seg_circle(*p0, *p1, a, tol).into_iter().map(|(x, y)| (y, x)).collect()
        }
        (ArcKind::Circle { .. }, ArcKind::Circle { .. }) => circle_circle(a, b, tol),
        _ => sampled(a, b, tol),
    }
}

fn seg_seg(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2, tol: f64) -> Vec<(f64, f64)> {
    let d = p1 - p0;
    let e = q1 - q0;
    let den = d.cross(e);
    let la = d.norm();
    let lb = e.norm();
    if den.abs() < 1e-14 * la * lb {
        // parallel: report overlap endpoints if collinear
        let off = (q0 - p0).cross(d) / la;
        if off.abs() > tol {
            return vec![];
        }
        let mut out = vec![];
        for (t, p) in [(0.0, q0), (1.0, q1)] {
            let s = (p - p0).dot(d) / (la * la);
            if s >= -tol / la && s <= 1.0 + tol / la {
                out.push((s.clamp(0.0, 1.0), t));
            }
        }
        for (s, p) in [(0.0, p0), (1.0, p1)] {
            let t = (p - q0).dot(e) / (lb * lb);
            if t >= -tol / lb && t <= 1.0 + tol / lb {
                out.push((s, t.clamp(0.0, 1.0)));
            }
        }
        return out;
    }
    let w = q0 - p0;
    let s = w.cross(e) / den;
    let t = w.cross(d) / den;
    if s >= -tol / la && s <= 1.0 + tol / la && t >= -tol / lb && t <= 1.0 + tol / lb {
        vec![(s.clamp(0.0, 1.0), t.clamp(0.0, 1.0))]
    } else {
        vec![]
    }
}

fn seg_circle(p0: Vec2, p1: Vec2, circ: &ArcKind, tol: f64) -> Vec<(f64, f64)> {
    let (c, r, theta0, sweep) = circle_params(circ).unwrap();
    let d = p1 - p0;
    let f = p0 - c;
    let a = d.norm_sq();
    let b = 2.0 * f.dot(d);
    let cc = f.norm_sq() - r * r;
    let disc = b * b - 4.0 * a * cc;
    let la = d.norm();
    // disc = 4a(r^2 - dist^2); allow tangency within tol
    if disc < -8.0 * a * r * tol {
        return vec![];
    }
    let sq = disc.max(0.0).sqrt();
    let mut roots = vec![(-b - sq) / (2.0 * a)];
    if sq > 0.0 {
        roots.push((-b + sq) / (2.0 * a));
    }
    let ang_tol = tol / r;
    roots
        .into_iter()
        .filter(|s| *s >= -tol / la && *s <= 1.0 + tol / la)
        .filter_map(|s| {
            let s = s.clamp(0.0, 1.0);
            let p = p0 + d * s;
            angle_param(theta0, sweep, (p - c).angle(), ang_tol).map(|t| (s, t))
        })
        .collect()
}

fn circle_circle(a: &ArcKind, b: &ArcKind, tol: f64) -> Vec<(f64, f64)> {
    let (c1, r1, t1, s1) = circle_params(a).unwrap();
    let (c2, r2, t2, s2) = circle_params(b).unwrap();
    let d = c1.dist(c2);
    if d < tol && (r1 - r2).abs() < tol {
        // same circle: shared endpoints of overlapping pieces
        let mut out = vec![];
        for (ta, p) in [(0.0, a.start()), (1.0, a.end())] {
            if let Some(tb) = angle_param(t2, s2, (p - c2).angle(), tol / r2) {
                out.push((ta, tb));
            }
        }
        for (tb, p) in [(0.0, b.start()), (1.0, b.end())] {
            if let Some(ta) = angle_param(t1, s1, (p - c1).angle(), tol / r1) {
                out.push((ta, tb));
            }
        }
        return out;
    }
    if d > r1 + r2 + tol || d < (r1 - r2).abs() - tol || d == 0.0 {
        return vec![];
    }
    let x = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h = (r1 * r1 - x * x).max(0.0).sqrt();
    let u = (c2 - c1) * (1.0 / d);
    let base = c1 + u * x;
    let mut pts = vec![base + u.perp() * h];
    if h > tol {
        pts.push(base - u.perp() * h);
    }
    pts.into_iter()
        .filter_map(|p| {
            let ta = angle_param(t1, s1, (p - c1).angle(), tol / r1)?;
            let tb = angle_param(t2, s2, (p - c2).angle(), tol / r2)?;
            Some((ta, tb))
        })
        .collect()
}

/// Polyline-based intersections for curves without closed forms.
fn sampled(a: &ArcKind, b: &ArcKind, tol: f64) -> Vec<(f64, f64)> {
    let n = 512;
    let pa: Vec<Vec2> = (0..=n).map(|i| a.point(i as f64 / n as f64)).collect();
    let pb: Vec<Vec2> = (0..=n).map(|i| b.point(i as f64 / n as f64)).collect();
    let mut out = vec![];
    for i in 0..n {
        for j in 0..n {
            for (s, t) in seg_seg(pa[i], pa[i + 1], pb[j], pb[j + 1], tol) {
                let ta = (i as f64 + s) / n as f64;
                let tb = (j as f64 + t) / n as f64;
                if !out.iter().any(|&(x, y): &(f64, f64)| (x - ta).abs() < 2.0 / n as f64 && (y - tb).abs() < 2.0 / n as f64) {
                    out.push((ta, tb));
                }
            }
        }
    }
    out
}
