//! Cutting a domain along a line and gluing it to its mirror image.

use super::arc::{angle_param, Arc, ArcKind, Condition};
use super::domain::{PlanarDomain, ReflectionAxis};
use super::union::merge_arcs;
use super::GeometryError;

const ORTHO_TOL: f64 = 1e-9;

/// Parameters in `[0, 1]` where the arc meets the axis line. Empty when the arc
/// lies on the line.
pub fn line_params(kind: &ArcKind, axis: &ReflectionAxis, tol: f64) -> Vec<f64> {
    let f = |t: f64| axis.side(kind.point(t));
    let mut out = Vec::new();
    match kind {
        ArcKind::Segment { p0, p1 } => {
            let (a, b) = (axis.side(*p0), axis.side(*p1));
            if a.abs() <= tol && b.abs() <= tol {
                return out;
            }
            if a.abs() <= tol {
                out.push(0.0);
            } else if b.abs() <= tol {
                out.push(1.0);
            } else if a * b < 0.0 {
                out.push(a / (a - b));
            }
        }
        ArcKind::Circle { center, radius, theta0, sweep } => {
            let h = axis.side(*center);
            if h.abs() > radius + tol {
                return out;
            }
            let foot = *center - axis.dir.perp() * h;
            let half = (radius * radius - h * h).max(0.0).sqrt();
            let mut cands = vec![foot + axis.dir * half];
            if half > tol {
                cands.push(foot - axis.dir * half);
            }
            for p in cands {
                if let Some(t) = angle_param(*theta0, *sweep, (p - *center).angle(), tol / radius) {
                    out.push(t);
                    if kind.is_closed() && t == 0.0 {
                        out.push(1.0);
                    }
                }
            }
        }
        ArcKind::Radial { .. } => {
            let n = 4096;
            let mut prev = f(0.0);
            if prev.abs() <= tol {
                out.push(0.0);
            }
            for i in 1..=n {
                let t1 = i as f64 / n as f64;
                let cur = f(t1);
                if cur.abs() <= tol {
                    out.push(t1);
                } else if prev.abs() > tol && prev * cur < 0.0 {
                    let (mut a, mut b) = ((i - 1) as f64 / n as f64, t1);
                    let fa_sign = prev.signum();
                    for _ in 0..80 {
                        let m = 0.5 * (a + b);
                        if f(m).signum() == fa_sign {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    out.push(0.5 * (a + b));
                }
                prev = cur;
            }
            out.dedup_by(|a, b| (*a - *b).abs() < 2.0 / n as f64);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    out
}

fn on_axis(kind: &ArcKind, axis: &ReflectionAxis, tol: f64) -> bool {
    (0..=8).all(|i| axis.side(kind.point(i as f64 / 8.0)).abs() <= tol)
}

/// Part of a simply connected domain strictly left of the axis, closed by
/// chords along the axis that carry `chord`.
pub fn clip_half(domain: &PlanarDomain, axis: &ReflectionAxis, chord: Condition) -> Result<PlanarDomain, GeometryError> {
    if !domain.is_simply_connected() {
        return Err(GeometryError::InvalidLayout("clipping needs a simply connected domain".into()));
    }
    let diam = domain.diameter();
    let tol = 1e-10 * diam;
    let mut pieces: Vec<Arc> = Vec::new();
    for arc in &domain.outer().arcs {
        if on_axis(&arc.kind, axis, tol) {
            continue;
        }
        let xs = line_params(&arc.kind, axis, tol);
        if arc.kind.is_closed() {
            let mut xs: Vec<f64> = xs.into_iter().map(|t| if t > 1.0 - 1e-12 { 0.0 } else { t }).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            if xs.is_empty() {
                push_if_left(&mut pieces, arc.clone(), axis, tol);
                continue;
            }
            // pieces between consecutive crossings, wrapping once around
            let first = xs[0];
            xs.push(first + 1.0);
            for w in xs.windows(2) {
                push_if_left(&mut pieces, arc.sub(w[0], w[1]), axis, tol);
            }
        } else {
            let mut cuts = vec![0.0];
            cuts.extend(xs.into_iter().filter(|&t| t > 1e-12 && t < 1.0 - 1e-12));
            cuts.push(1.0);
            for w in cuts.windows(2) {
                push_if_left(&mut pieces, arc.sub(w[0], w[1]), axis, tol);
            }
        }
    }
    if pieces.is_empty() {
        return Err(GeometryError::NotSymmetric("nothing left of the axis".into()));
    }
    // order pieces into chains along the original traversal; a gap between
    // consecutive pieces is closed by a chord on the axis
    let n = pieces.len();
    let mut arcs = Vec::new();
    for i in 0..n {
        let a = &pieces[i];
        let b = &pieces[(i + 1) % n];
        arcs.push(a.clone());
        let (e, s) = (a.kind.end(), b.kind.start());
        if e.dist(s) > tol {
            if axis.side(e).abs() > tol || axis.side(s).abs() > tol {
                return Err(GeometryError::NotSymmetric("half domain does not close on the axis".into()));
            }
            if (s - e).dot(axis.dir) < 0.0 {
                return Err(GeometryError::NotSymmetric("axis chords overlap".into()));
            }
            arcs.push(Arc::new(ArcKind::Segment { p0: e, p1: s }, chord.clone()));
        }
    }
    let arcs = merge_arcs(arcs);
    PlanarDomain::from_arcs(arcs)
}

fn push_if_left(out: &mut Vec<Arc>, a: Arc, axis: &ReflectionAxis, tol: f64) {
    if axis.side(a.kind.point(0.5)) > tol {
        out.push(a);
    }
}

/// Glues a domain to its mirror image across the non-Steklov arcs lying on the axis.
pub fn double(domain: &PlanarDomain, axis: &ReflectionAxis) -> Result<PlanarDomain, GeometryError> {
    if !domain.is_simply_connected() {
        return Err(GeometryError::InvalidLayout("doubling needs a simply connected domain".into()));
    }
    let diam = domain.diameter();
    let tol = 1e-10 * diam;
    let arcs = &domain.outer().arcs;
    let n = arcs.len();
    let on: Vec<bool> = arcs
        .iter()
        .map(|a| !a.condition.is_steklov() && on_axis(&a.kind, axis, tol))
        .collect();
    if !on.iter().any(|&b| b) {
        return Err(GeometryError::NotOnAxis("no non-Steklov arc lies on the axis".into()));
    }
    let mut side = 0.0f64;
    for (a, &is_on) in arcs.iter().zip(&on) {
        if is_on {
            continue;
        }
        for s in (0..=16).map(|i| axis.side(a.kind.point(i as f64 / 16.0))) {
            if s.abs() > tol {
                if side != 0.0 && s.signum() != side {
                    return Err(GeometryError::NotOnAxis("domain lies on both sides of the axis".into()));
                }
                side = s.signum();
            }
        }
    }
    // exactly one contiguous run of axis arcs
    let runs = (0..n).filter(|&i| on[i] && !on[(i + n - 1) % n]).count();
    if runs != 1 {
        return Err(GeometryError::MalformedDecomposition(
            "doubling across several axis pieces would enclose holes".into(),
        ));
    }
    let start = (0..n).find(|&i| !on[i] && on[(i + n - 1) % n]).unwrap();
    let chain: Vec<Arc> = (0..n).map(|k| (start + k) % n).filter(|&i| !on[i]).map(|i| arcs[i].clone()).collect();

    for (a, t) in [(chain.first().unwrap(), 0.0), (chain.last().unwrap(), 1.0)] {
        if a.condition.is_steklov() {
            let tan = a.kind.unit_tangent(t);
            let off = tan.dot(axis.dir).abs().min(1.0).asin();
            if off > ORTHO_TOL {
                return Err(GeometryError::NonOrthogonalJunction { angle: off });
            }
        }
    }

    let m = axis.reflection();
    let mut out = chain.clone();
    out.extend(chain.iter().rev().map(|a| a.transformed(&m).reversed()));
    let out = merge_arcs(out);
    let mut d = PlanarDomain::from_arcs(out)?;
    d.symmetry.reflections.push(*axis);
    d.family = domain.family.as_ref().map(|f| format!("double({f})"));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn disk() -> PlanarDomain {
        PlanarDomain::from_arcs(vec![Arc::steklov(ArcKind::full_circle(Vec2::ZERO, 1.0))]).unwrap()
    }

    fn half_disk() -> PlanarDomain {
        PlanarDomain::from_arcs(vec![
            Arc::steklov(ArcKind::Circle { center: Vec2::ZERO, radius: 1.0, theta0: 0.0, sweep: PI }),
            Arc::new(ArcKind::Segment { p0: Vec2::new(-1.0, 0.0), p1: Vec2::new(1.0, 0.0) }, Condition::Neumann),
        ])
        .unwrap()
    }

    #[test]
    fn clip_disk_gives_half_disk() {
        let h = clip_half(&disk(), &ReflectionAxis::horizontal(0.0), Condition::Neumann).unwrap();
        assert_eq!(h.outer().arcs.len(), 2);
        assert!((h.outer().signed_area() - FRAC_PI_2).abs() < 1e-13);
        assert!((h.steklov_length() - PI).abs() < 1e-13);
    }

    #[test]
    fn double_half_disk_gives_disk() {
        let d = double(&half_disk(), &ReflectionAxis::horizontal(0.0)).unwrap();
        assert_eq!(d.outer().arcs.len(), 1);
        assert!(d.outer().arcs[0].kind.is_closed());
        assert!((d.perimeter() - TAU).abs() < 1e-13);
    }

    #[test]
    fn tilted_diameter_is_not_on_axis() {
        let axis = ReflectionAxis::through_origin(10f64.to_radians());
        assert!(matches!(double(&half_disk(), &axis), Err(GeometryError::NotOnAxis(_))));
    }
}
