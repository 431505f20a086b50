use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::vec2::Vec2;
use super::GeometryError;

/// Polynomial weight profile in the normalized arc parameter `t` in `[0, 1]`,
/// coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile(pub Vec<f64>);

impl Default for WeightProfile {
    fn default() -> Self {
        WeightProfile(vec![1.0])
    }
}

impl WeightProfile {
    pub fn constant(c: f64) -> Self {
        WeightProfile(vec![c])
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().skip(1).all(|&c| c == 0.0)
    }

    /// Profile of `t -> self(a + b t)`.
    pub fn compose_linear(&self, a: f64, b: f64) -> WeightProfile {
        // Horner over polynomials: acc = acc * (a + b t) + c
        let mut acc: Vec<f64> = Vec::new();
        for &c in self.0.iter().rev() {
            let mut next = vec![0.0; acc.len() + 1];
            for (i, &v) in acc.iter().enumerate() {
                next[i] += v * a;
                next[i + 1] += v * b;
            }
            next[0] += c;
            acc = next;
        }
        while acc.len() > 1 && *acc.last().unwrap() == 0.0 {
            acc.pop();
        }
        if acc.is_empty() {
            acc.push(0.0);
        }
        WeightProfile(acc)
    }

    pub fn reversed(&self) -> WeightProfile {
        self.compose_linear(1.0, -1.0)
    }

    /// Minimum over a fine sample of `[0, 1]`.
    pub fn sampled_min(&self) -> f64 {
        if self.is_constant() {
            return self.0[0];
        }
        (0..=512)
            .map(|i| self.eval(i as f64 / 512.0))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Boundary condition carried by an arc.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Steklov(WeightProfile),
    Neumann,
    Dirichlet,
}

impl Condition {
    pub fn steklov() -> Self {
        Condition::Steklov(WeightProfile::default())
    }

    pub fn is_steklov(&self) -> bool {
        matches!(self, Condition::Steklov(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Condition::Steklov(_) => "steklov",
            Condition::Neumann => "neumann",
            Condition::Dirichlet => "dirichlet",
        }
    }

    /// Same condition type, ignoring weights.
    pub fn same_kind(&self, other: &Condition) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

/// Truncated Fourier series `r(theta) = a0 + sum_j a_j cos(j theta) + b_j sin(j theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCurve {
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl RadialCurve {
    fn terms(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    fn coef(&self, j: usize) -> (f64, f64) {
        (
            self.cos.get(j - 1).copied().unwrap_or(0.0),
            self.sin.get(j - 1).copied().unwrap_or(0.0),
        )
    }

    /// Returns `(r, r', r'')` at `theta`.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let mut r = self.a0;
        let mut dr = 0.0;
        let mut ddr = 0.0;
        for j in 1..=self.terms() {
            let (a, b) = self.coef(j);
            let jf = j as f64;
            let (s, c) = (jf * theta).sin_cos();
            r += a * c + b * s;
            dr += jf * (-a * s + b * c);
            ddr -= jf * jf * (a * c + b * s);
        }
        (r, dr, ddr)
    }

    pub fn scaled(&self, s: f64) -> RadialCurve {
        RadialCurve {
            a0: self.a0 * s,
            cos: self.cos.iter().map(|c| c * s).collect(),
            sin: self.sin.iter().map(|c| c * s).collect(),
        }
    }

    /// Curve `theta -> r(theta - alpha)`.
    pub fn rotated(&self, alpha: f64) -> RadialCurve {
        let n = self.terms();
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for j in 1..=n {
            let (a, b) = self.coef(j);
            let (sj, cj) = (j as f64 * alpha).sin_cos();
            cos[j - 1] = a * cj - b * sj;
            sin[j - 1] = a * sj + b * cj;
        }
        RadialCurve { a0: self.a0, cos, sin }
    }

    /// Curve `theta -> r(alpha - theta)`.
    pub fn mirrored(&self, alpha: f64) -> RadialCurve {
        let n = self.terms();
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for j in 1..=n {
            let (a, b) = self.coef(j);
            let (sj, cj) = (j as f64 * alpha).sin_cos();
            cos[j - 1] = a * cj + b * sj;
            sin[j - 1] = a * sj - b * cj;
        }
        RadialCurve { a0: self.a0, cos, sin }
    }

    pub fn min_radius(&self) -> f64 {
        (0..2048)
            .map(|i| self.eval(TAU * i as f64 / 2048.0).0)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Geometric shape of a boundary arc. Every kind is parametrized over `t` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum ArcKind {
    /// Circular arc from angle `theta0` sweeping the signed angle `sweep` (positive = ccw).
    Circle { center: Vec2, radius: f64, theta0: f64, sweep: f64 },
    Segment { p0: Vec2, p1: Vec2 },
    /// Piece of the star-shaped curve `center + r(theta) (cos theta, sin theta)`.
    Radial { center: Vec2, curve: RadialCurve, theta0: f64, sweep: f64 },
}

/// Similarity map `x -> shift + scale * R(angle) * (reflect ? conj(x) : x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub angle: f64,
    pub reflect: bool,
    pub shift: Vec2,
}

impl Similarity {
    pub fn identity() -> Self {
        Self { scale: 1.0, angle: 0.0, reflect: false, shift: Vec2::ZERO }
    }

    pub fn dilation(t: f64) -> Self {
        Self { scale: t, ..Self::identity() }
    }

    pub fn rotation(angle: f64) -> Self {
        Self { angle, ..Self::identity() }
    }

    pub fn translation(shift: Vec2) -> Self {
        Self { shift, ..Self::identity() }
    }

    /// Mirror across the line through `point` with direction `dir`.
    pub fn reflection(point: Vec2, dir: Vec2) -> Self {
        let phi = dir.angle();
        let conj = Vec2::new(point.x, -point.y);
        let shift = point - conj.rotated(2.0 * phi);
        Self { scale: 1.0, angle: 2.0 * phi, reflect: true, shift }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        let q = if self.reflect { Vec2::new(p.x, -p.y) } else { p };
        self.shift + q.rotated(self.angle) * self.scale
    }

    /// Image direction angle of a direction angle.
    pub fn map_angle(&self, theta: f64) -> f64 {
        if self.reflect {
            self.angle - theta
        } else {
            self.angle + theta
        }
    }
}

impl ArcKind {
    pub fn full_circle(center: Vec2, radius: f64) -> Self {
        ArcKind::Circle { center, radius, theta0: 0.0, sweep: TAU }
    }

    pub fn point(&self, t: f64) -> Vec2 {
        match self {
            ArcKind::Circle { center, radius, theta0, sweep } => {
                *center + Vec2::polar(*radius, theta0 + sweep * t)
            }
            ArcKind::Segment { p0, p1 } => p0.lerp(*p1, t),
            ArcKind::Radial { center, curve, theta0, sweep } => {
                let th = theta0 + sweep * t;
                *center + Vec2::polar(curve.eval(th).0, th)
            }
        }
    }

    /// First and second derivative with respect to `t`.
    pub fn derivs(&self, t: f64) -> (Vec2, Vec2) {
        match self {
            ArcKind::Circle { radius, theta0, sweep, .. } => {
                let th = theta0 + sweep * t;
                let (s, c) = th.sin_cos();
                let d1 = Vec2::new(-s, c) * (radius * sweep);
                let d2 = Vec2::new(-c, -s) * (radius * sweep * sweep);
                (d1, d2)
            }
            ArcKind::Segment { p0, p1 } => (*p1 - *p0, Vec2::ZERO),
            ArcKind::Radial { curve, theta0, sweep, .. } => {
                let th = theta0 + sweep * t;
                let (r, dr, ddr) = curve.eval(th);
                let (s, c) = th.sin_cos();
                let e = Vec2::new(c, s);
                let ep = Vec2::new(-s, c);
                let d1 = (e * dr + ep * r) * *sweep;
                let d2 = (e * (ddr - r) + ep * (2.0 * dr)) * (sweep * sweep);
                (d1, d2)
            }
        }
    }

    pub fn start(&self) -> Vec2 {
        self.point(0.0)
    }

    pub fn end(&self) -> Vec2 {
        self.point(1.0)
    }

    pub fn unit_tangent(&self, t: f64) -> Vec2 {
        self.derivs(t).0.normalized()
    }

    /// Signed curvature (positive when turning left along the traversal).
    pub fn curvature(&self, t: f64) -> f64 {
        match self {
            ArcKind::Circle { radius, sweep, .. } => sweep.signum() / radius,
            ArcKind::Segment { .. } => 0.0,
            ArcKind::Radial { .. } => {
                let (d1, d2) = self.derivs(t);
                d1.cross(d2) / d1.norm().powi(3)
            }
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            ArcKind::Circle { radius, sweep, .. } => radius * sweep.abs(),
            ArcKind::Segment { p0, p1 } => p0.dist(*p1),
            ArcKind::Radial { .. } => {
                let rule = crate::quadrature::GaussLegendre::new(16);
                let panels = 64;
                let mut total = 0.0;
                for k in 0..panels {
                    let a = k as f64 / panels as f64;
                    let b = (k + 1) as f64 / panels as f64;
                    for (x, w) in rule.mapped(a, b) {
                        total += w * self.derivs(x).0.norm();
                    }
                }
                total
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            ArcKind::Circle { sweep, .. } | ArcKind::Radial { sweep, .. } => {
                (sweep.abs() - TAU).abs() < 1e-12
            }
            ArcKind::Segment { .. } => false,
        }
    }

    pub fn reversed(&self) -> ArcKind {
        match self {
            ArcKind::Circle { center, radius, theta0, sweep } => ArcKind::Circle {
                center: *center,
                radius: *radius,
                theta0: theta0 + sweep,
                sweep: -sweep,
            },
            ArcKind::Segment { p0, p1 } => ArcKind::Segment { p0: *p1, p1: *p0 },
            ArcKind::Radial { center, curve, theta0, sweep } => ArcKind::Radial {
                center: *center,
                curve: curve.clone(),
                theta0: theta0 + sweep,
                sweep: -sweep,
            },
        }
    }

    /// Restriction to the parameter interval `[t0, t1]`, reparametrized over `[0, 1]`.
    pub fn sub(&self, t0: f64, t1: f64) -> ArcKind {
        match self {
            ArcKind::Circle { center, radius, theta0, sweep } => ArcKind::Circle {
                center: *center,
                radius: *radius,
                theta0: theta0 + sweep * t0,
                sweep: sweep * (t1 - t0),
            },
            ArcKind::Segment { .. } => {
                ArcKind::Segment { p0: self.point(t0), p1: self.point(t1) }
            }
            ArcKind::Radial { center, curve, theta0, sweep } => ArcKind::Radial {
                center: *center,
                curve: curve.clone(),
                theta0: theta0 + sweep * t0,
                sweep: sweep * (t1 - t0),
            },
        }
    }

    pub fn transformed(&self, m: &Similarity) -> ArcKind {
        let sweep_sign = if m.reflect { -1.0 } else { 1.0 };
        match self {
            ArcKind::Circle { center, radius, theta0, sweep } => ArcKind::Circle {
                center: m.apply(*center),
                radius: radius * m.scale,
                theta0: m.map_angle(*theta0),
                sweep: sweep * sweep_sign,
            },
            ArcKind::Segment { p0, p1 } => ArcKind::Segment { p0: m.apply(*p0), p1: m.apply(*p1) },
            ArcKind::Radial { center, curve, theta0, sweep } => {
                let curve = if m.reflect {
                    curve.mirrored(m.angle)
                } else {
                    curve.rotated(m.angle)
                }
                .scaled(m.scale);
                ArcKind::Radial {
                    center: m.apply(*center),
                    curve,
                    theta0: m.map_angle(*theta0),
                    sweep: sweep * sweep_sign,
                }
            }
        }
    }

    /// Parameter of the projection of `p` onto the arc (clamped), and its distance.
    pub fn closest(&self, p: Vec2) -> (f64, f64) {
        match self {
            ArcKind::Segment { p0, p1 } => {
                let d = *p1 - *p0;
                let t = ((p - *p0).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
                (t, self.point(t).dist(p))
            }
            ArcKind::Circle { center, theta0, sweep, .. } => {
                let phi = (p - *center).angle();
                let mut best = endpoint_closest(self, p);
                if let Some(t) = angle_param(*theta0, *sweep, phi, 0.0) {
                    let d = self.point(t).dist(p);
                    if d < best.1 {
                        best = (t, d);
                    }
                }
                best
            }
            ArcKind::Radial { .. } => {
                // coarse scan followed by golden-section refinement
                let n = 256;
                let mut best = (0.0, f64::INFINITY);
                for i in 0..=n {
                    let t = i as f64 / n as f64;
                    let d = self.point(t).dist(p);
                    if d < best.1 {
                        best = (t, d);
                    }
                }
                let (mut a, mut b) = ((best.0 - 1.0 / n as f64).max(0.0), (best.0 + 1.0 / n as f64).min(1.0));
                let g = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..80 {
                    let c = b - g * (b - a);
                    let d = a + g * (b - a);
                    if self.point(c).dist(p) < self.point(d).dist(p) {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                let t = 0.5 * (a + b);
                let d = self.point(t).dist(p);
                if d < best.1 {
                    (t, d)
                } else {
                    best
                }
            }
        }
    }

    /// Points used for bounding computations: samples plus axis extremes of circles.
    pub fn extent_samples(&self) -> Vec<Vec2> {
        let mut pts: Vec<Vec2> = (0..=64).map(|i| self.point(i as f64 / 64.0)).collect();
        if let ArcKind::Circle { center, radius, theta0, sweep } = self {
            for k in 0..4 {
                let phi = k as f64 * std::f64::consts::FRAC_PI_2;
                if angle_param(*theta0, *sweep, phi, 1e-14).is_some() {
                    pts.push(*center + Vec2::polar(*radius, phi));
                }
            }
        }
        pts
    }
}

fn endpoint_closest(a: &ArcKind, p: Vec2) -> (f64, f64) {
    let d0 = a.start().dist(p);
    let d1 = a.end().dist(p);
    if d0 <= d1 {
        (0.0, d0)
    } else {
        (1.0, d1)
    }
}

/// Parameter `t` in `[0, 1]` at which an arc starting at `theta0` with signed `sweep`
/// reaches direction `phi`, if it does (with angular slack `tol`).
pub fn angle_param(theta0: f64, sweep: f64, phi: f64, tol: f64) -> Option<f64> {
    let span = sweep.abs();
    let u = if sweep > 0.0 {
        (phi - theta0).rem_euclid(TAU)
    } else {
        (theta0 - phi).rem_euclid(TAU)
    };
    if u <= span + tol {
        Some((u / span).min(1.0))
    } else if TAU - u <= tol {
        Some(0.0)
    } else {
        None
    }
}

/// A boundary arc: geometry plus boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub kind: ArcKind,
    pub condition: Condition,
}

impl Arc {
    pub fn new(kind: ArcKind, condition: Condition) -> Self {
        Self { kind, condition }
    }

    pub fn steklov(kind: ArcKind) -> Self {
        Self::new(kind, Condition::steklov())
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match &self.kind {
            ArcKind::Circle { radius, sweep, .. } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(GeometryError::InvalidArc(format!("radius {radius} must be positive")));
                }
                if !(sweep.abs() > 0.0) || sweep.abs() > TAU + 1e-12 {
                    return Err(GeometryError::InvalidArc(format!("degenerate angle interval {sweep}")));
                }
            }
            ArcKind::Segment { p0, p1 } => {
                if p0 == p1 {
                    return Err(GeometryError::InvalidArc("segment endpoints coincide".into()));
                }
            }
            ArcKind::Radial { curve, sweep, .. } => {
                if !(sweep.abs() > 0.0) || sweep.abs() > TAU + 1e-12 {
                    return Err(GeometryError::InvalidArc(format!("degenerate angle interval {sweep}")));
                }
                if curve.min_radius() <= 0.0 {
                    return Err(GeometryError::InvalidArc("radial curve must stay positive".into()));
                }
            }
        }
        if let Condition::Steklov(w) = &self.condition {
            if !(w.sampled_min() > 0.0) {
                return Err(GeometryError::InvalidArc("Steklov weight must be strictly positive".into()));
            }
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.kind.length()
    }

    /// Weighted length `int rho ds` for Steklov arcs, plain length otherwise.
    pub fn weighted_length(&self) -> f64 {
        match &self.condition {
            Condition::Steklov(w) if !w.is_constant() => {
                let rule = crate::quadrature::GaussLegendre::new(16);
                let mut total = 0.0;
                for k in 0..32 {
                    let a = k as f64 / 32.0;
                    for (x, wq) in rule.mapped(a, a + 1.0 / 32.0) {
                        total += wq * w.eval(x) * self.kind.derivs(x).0.norm();
                    }
                }
                total
            }
            Condition::Steklov(w) => w.0[0] * self.length(),
            _ => self.length(),
        }
    }

    pub fn reversed(&self) -> Arc {
        let condition = match &self.condition {
            Condition::Steklov(w) => Condition::Steklov(w.reversed()),
            c => c.clone(),
        };
        Arc { kind: self.kind.reversed(), condition }
    }

    pub fn sub(&self, t0: f64, t1: f64) -> Arc {
        let condition = match &self.condition {
            Condition::Steklov(w) => Condition::Steklov(w.compose_linear(t0, t1 - t0)),
            c => c.clone(),
        };
        Arc { kind: self.kind.sub(t0, t1), condition }
    }

    pub fn transformed(&self, m: &Similarity) -> Arc {
        Arc { kind: self.kind.transformed(m), condition: self.condition.clone() }
    }
}
