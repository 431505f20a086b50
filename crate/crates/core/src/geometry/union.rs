//! Boundary of a union of convex shapes (disks, half-disks, convex polygons).
//!
//! Every shape boundary is split at all crossings with the other shapes. A
//! piece survives when a point pushed slightly outward from its midpoint lies
//! outside every shape; survivors are stitched into loops and classified by
//! signed area.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::arc::{Arc, ArcKind};
use super::domain::{Loop, PlanarDomain};
use super::intersect::intersect;
use super::vec2::Vec2;
use super::GeometryError;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Disk { center: Vec2, radius: f64 },
    /// Half of a disk lying on the side `dir` (angle) of its diameter.
    HalfDisk { center: Vec2, radius: f64, dir: f64 },
    /// Convex polygon with counterclockwise vertices.
    Polygon(Vec<Vec2>),
}

impl Shape {
    /// Counterclockwise boundary pieces.
    fn boundary(&self) -> Vec<ArcKind> {
        match self {
            Shape::Disk { center, radius } => vec![ArcKind::full_circle(*center, *radius)],
            Shape::HalfDisk { center, radius, dir } => {
                let a = ArcKind::Circle {
                    center: *center,
                    radius: *radius,
                    theta0: dir - FRAC_PI_2,
                    sweep: PI,
                };
                let b = ArcKind::Segment { p0: a.end(), p1: a.start() };
                vec![a, b]
            }
            Shape::Polygon(v) => (0..v.len())
                .map(|i| ArcKind::Segment { p0: v[i], p1: v[(i + 1) % v.len()] })
                .collect(),
        }
    }

    /// Strict interior membership.
    fn contains(&self, p: Vec2) -> bool {
        match self {
            Shape::Disk { center, radius } => p.dist(*center) < *radius,
            Shape::HalfDisk { center, radius, dir } => {
                p.dist(*center) < *radius && (p - *center).dot(Vec2::polar(1.0, *dir)) > 0.0
            }
            Shape::Polygon(v) => {
                (0..v.len()).all(|i| (v[(i + 1) % v.len()] - v[i]).cross(p - v[i]) > 0.0)
            }
        }
    }

    fn extent(&self) -> f64 {
        match self {
            Shape::Disk { center, radius } | Shape::HalfDisk { center, radius, .. } => {
                center.norm() + radius
            }
            Shape::Polygon(v) => v.iter().map(|p| p.norm()).fold(0.0, f64::max),
        }
    }
}

/// Union of disks; all arcs carry the unit Steklov weight.
pub fn union_of_disks(centers: &[Vec2], radii: &[f64]) -> Result<PlanarDomain, GeometryError> {
    if centers.len() != radii.len() || centers.is_empty() {
        return Err(GeometryError::ParameterOutOfRange("need matching, nonempty centers and radii".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(GeometryError::InvalidArc(format!("radius {r} must be positive")));
    }
    let shapes: Vec<Shape> =
        centers.iter().zip(radii).map(|(&c, &r)| Shape::Disk { center: c, radius: r }).collect();
    union_of_shapes(&shapes)
}

pub fn union_of_shapes(shapes: &[Shape]) -> Result<PlanarDomain, GeometryError> {
    let scale = shapes.iter().map(|s| s.extent()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-11 * scale;
    let delta = 1e-7 * scale;

    let boundaries: Vec<Vec<ArcKind>> = shapes.iter().map(|s| s.boundary()).collect();
    let mut pieces: Vec<ArcKind> = Vec::new();
    for (si, bnd) in boundaries.iter().enumerate() {
        for piece in bnd {
            let mut cuts = vec![0.0, 1.0];
            for (sj, other) in boundaries.iter().enumerate() {
                if si == sj {
                    continue;
                }
                for o in other {
                    for (t, _) in intersect(piece, o, tol) {
                        cuts.push(t);
                    }
                }
            }
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let len = piece.length();
            let mut kept_cuts: Vec<f64> = Vec::new();
            for t in cuts {
                if kept_cuts.last().map_or(true, |&last| (t - last) * len > 1e3 * tol) {
                    kept_cuts.push(t);
                } else if t == 1.0 {
                    *kept_cuts.last_mut().unwrap() = 1.0;
                }
            }
            if kept_cuts.len() == 1 {
                kept_cuts.push(1.0);
            }
            for w in kept_cuts.windows(2) {
                let sub = piece.sub(w[0], w[1]);
                let mid = sub.point(0.5);
                let outward = -sub.unit_tangent(0.5).perp();
                let probe = mid + outward * delta;
                if shapes.iter().all(|s| !s.contains(probe)) {
                    pieces.push(sub);
                }
            }
        }
    }
    if pieces.is_empty() {
        return Err(GeometryError::InvalidLayout("union has no boundary".into()));
    }

    let loops = stitch(pieces, 1e-8 * scale)?;
    let mut outer = Vec::new();
    for l in loops {
        let lp = Loop::outer(l.into_iter().map(Arc::steklov).collect());
        if lp.signed_area() > 0.0 {
            outer.push(lp);
        } else {
            return Err(GeometryError::HoleDetected);
        }
    }
    if outer.len() > 1 {
        return Err(GeometryError::DisconnectedUnion);
    }
    let mut lp = outer.pop().unwrap();
    lp.arcs = merge_arcs(lp.arcs);
    PlanarDomain::new(vec![lp])
}

/// Chains directed pieces end-to-start into closed loops.
fn stitch(mut pieces: Vec<ArcKind>, tol: f64) -> Result<Vec<Vec<ArcKind>>, GeometryError> {
    let mut loops = Vec::new();
    while let Some(first) = pieces.pop() {
        let start = first.start();
        let mut cur = vec![first];
        loop {
            let end = cur.last().unwrap().end();
            if end.dist(start) < tol {
                break;
            }
            let next = pieces
                .iter()
                .enumerate()
                .map(|(i, p)| (i, p.start().dist(end)))
                .filter(|(_, d)| *d < tol)
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            match next {
                Some((i, _)) => cur.push(pieces.swap_remove(i)),
                None => {
                    return Err(GeometryError::InvalidLayout("union boundary does not close".into()))
                }
            }
        }
        loops.push(cur);
    }
    Ok(loops)
}

/// Whether `b` continues `a` on the same circle, line or radial curve.
fn continues(a: &ArcKind, b: &ArcKind) -> bool {
    match (a, b) {
        (
            ArcKind::Circle { center: c1, radius: r1, theta0: t1, sweep: s1 },
            ArcKind::Circle { center: c2, radius: r2, theta0: t2, sweep: s2 },
        ) => {
            let scale = r1.max(*r2);
            c1.dist(*c2) < 1e-10 * scale
                && (r1 - r2).abs() < 1e-10 * scale
                && s1.signum() == s2.signum()
                && super::vec2::wrap_angle(t1 + s1 - t2).abs() < 1e-9
        }
        (ArcKind::Segment { p0, p1 }, ArcKind::Segment { p0: q0, p1: q1 }) => {
            let d = *p1 - *p0;
            let e = *q1 - *q0;
            d.cross(e).abs() < 1e-10 * d.norm() * e.norm() && d.dot(e) > 0.0
        }
        (
            ArcKind::Radial { center: c1, curve: k1, theta0: t1, sweep: s1 },
            ArcKind::Radial { center: c2, curve: k2, theta0: t2, sweep: s2 },
        ) => c1 == c2 && k1 == k2 && s1.signum() == s2.signum() && super::vec2::wrap_angle(t1 + s1 - t2).abs() < 1e-9,
        _ => false,
    }
}

fn join(a: &ArcKind, b: &ArcKind) -> ArcKind {
    match (a, b) {
        (ArcKind::Circle { center, radius, theta0, sweep }, ArcKind::Circle { sweep: s2, .. }) => {
            let mut sw = sweep + s2;
            if (sw.abs() - TAU).abs() < 1e-9 {
                sw = TAU * sw.signum();
            }
            ArcKind::Circle { center: *center, radius: *radius, theta0: *theta0, sweep: sw }
        }
        (ArcKind::Segment { p0, .. }, ArcKind::Segment { p1, .. }) => ArcKind::Segment { p0: *p0, p1: *p1 },
        (ArcKind::Radial { center, curve, theta0, sweep }, ArcKind::Radial { sweep: s2, .. }) => {
            let mut sw = sweep + s2;
            if (sw.abs() - TAU).abs() < 1e-9 {
                sw = TAU * sw.signum();
            }
            ArcKind::Radial { center: *center, curve: curve.clone(), theta0: *theta0, sweep: sw }
        }
        _ => unreachable!("join called on incompatible arcs"),
    }
}

fn mergeable(a: &Arc, b: &Arc) -> bool {
    use super::arc::Condition;
    let same_condition = match (&a.condition, &b.condition) {
        (Condition::Steklov(w1), Condition::Steklov(w2)) => w1.is_constant() && w1 == w2,
        (c1, c2) => c1 == c2,
    };
    same_condition && continues(&a.kind, &b.kind)
}

/// Merges consecutive arcs that continue each other with the same condition,
/// including across the loop's starting point.
pub(crate) fn merge_arcs(arcs: Vec<Arc>) -> Vec<Arc> {
    let mut out: Vec<Arc> = Vec::new();
    for a in arcs {
        match out.last_mut() {
            Some(last) if mergeable(last, &a) => last.kind = join(&last.kind, &a.kind),
            _ => out.push(a),
        }
    }
    while out.len() > 1 && mergeable(out.last().unwrap(), &out[0]) {
        let last = out.pop().unwrap();
        out[0].kind = join(&last.kind, &out[0].kind);
    }
    out
}
