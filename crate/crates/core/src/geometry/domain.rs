use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::arc::{Arc, ArcKind, Condition, Similarity};
use super::intersect::intersect;
use super::vec2::Vec2;
use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopOrientation {
    Outer,
    Inner,
}

/// Cyclically ordered arcs. Outer loops run counterclockwise, inner loops clockwise,
/// so the domain is always on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    pub arcs: Vec<Arc>,
    pub orientation: LoopOrientation,
}

/// Line through `point` with unit direction `dir`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionAxis {
    pub point: Vec2,
    pub dir: Vec2,
}

impl ReflectionAxis {
    pub fn new(point: Vec2, dir: Vec2) -> Self {
        Self { point, dir: dir.normalized() }
    }

    pub fn horizontal(y: f64) -> Self {
        Self::new(Vec2::new(0.0, y), Vec2::new(1.0, 0.0))
    }

    pub fn vertical(x: f64) -> Self {
        Self::new(Vec2::new(x, 0.0), Vec2::new(0.0, 1.0))
    }

    /// Axis through the origin at direction angle `theta`.
    pub fn through_origin(theta: f64) -> Self {
        Self::new(Vec2::ZERO, Vec2::polar(1.0, theta))
    }

    /// Signed distance, positive on the left of `dir`.
    pub fn side(&self, p: Vec2) -> f64 {
        self.dir.cross(p - self.point)
    }

    pub fn reflection(&self) -> Similarity {
        Similarity::reflection(self.point, self.dir)
    }

    pub fn transformed(&self, m: &Similarity) -> ReflectionAxis {
        let p = m.apply(self.point);
        let q = m.apply(self.point + self.dir);
        ReflectionAxis::new(p, q - p)
    }
}

/// Symmetries declared for a domain.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SymmetryDescriptor {
    #[serde(default)]
    pub reflections: Vec<ReflectionAxis>,
    /// Rotation center and order.
    #[serde(default)]
    pub rotation: Option<(Vec2, u32)>,
}

impl SymmetryDescriptor {
    pub fn transformed(&self, m: &Similarity) -> Self {
        Self {
            reflections: self.reflections.iter().map(|a| a.transformed(m)).collect(),
            rotation: self.rotation.map(|(c, p)| (m.apply(c), p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDomain {
    pub loops: Vec<Loop>,
    pub symmetry: SymmetryDescriptor,
    /// Constructor tag such as `gp_chain(2,0.1)`.
    pub family: Option<String>,
}

impl Loop {
    pub fn outer(arcs: Vec<Arc>) -> Self {
        Self { arcs, orientation: LoopOrientation::Outer }
    }

    /// Signed area `1/2 oint (x dy - y dx)`.
    pub fn signed_area(&self) -> f64 {
        self.arcs.iter().map(|a| arc_area_term(&a.kind)).sum()
    }

    pub fn length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length()).sum()
    }

    /// Winding number of the loop around `p`.
    pub fn winding(&self, p: Vec2) -> f64 {
        let mut total = 0.0;
        for a in &self.arcs {
            total += arc_winding(&a.kind, p);
        }
        total / TAU
    }
}

fn arc_area_term(kind: &ArcKind) -> f64 {
    match kind {
        ArcKind::Segment { p0, p1 } => 0.5 * p0.cross(*p1),
        ArcKind::Circle { center, radius, sweep, .. } => {
            let (p0, p1) = (kind.start(), kind.end());
            0.5 * (center.cross(p1 - p0) + radius * radius * sweep)
        }
        ArcKind::Radial { .. } => {
            let rule = crate::quadrature::GaussLegendre::new(16);
            let mut s = 0.0;
            for k in 0..64 {
                let a = k as f64 / 64.0;
                for (t, w) in rule.mapped(a, a + 1.0 / 64.0) {
                    s += w * kind.point(t).cross(kind.derivs(t).0);
                }
            }
            0.5 * s
        }
    }
}

/// Angle swept by the arc as seen from `p`.
fn arc_winding(kind: &ArcKind, p: Vec2) -> f64 {
    match kind {
        ArcKind::Segment { p0, p1 } => {
            let a = *p0 - p;
            let b = *p1 - p;
            a.cross(b).atan2(a.dot(b))
        }
        _ => {
            // chords are accurate once the sampling is finer than the distance to p
            let mut n = 64;
            let d = kind.closest(p).1;
            let len = kind.length();
            if d > 0.0 {
                n = n.max((4.0 * len / d).ceil().min(1e5) as usize);
            }
            let mut total = 0.0;
            let mut prev = kind.start() - p;
            for i in 1..=n {
                let cur = kind.point(i as f64 / n as f64) - p;
                total += prev.cross(cur).atan2(prev.dot(cur));
                prev = cur;
            }
            total
        }
    }
}

impl PlanarDomain {
    pub fn new(loops: Vec<Loop>) -> Result<Self, GeometryError> {
        let d = PlanarDomain { loops, symmetry: SymmetryDescriptor::default(), family: None };
        d.validate()?;
        Ok(d)
    }

    /// Single outer loop, validated.
    pub fn from_arcs(arcs: Vec<Arc>) -> Result<Self, GeometryError> {
        Self::new(vec![Loop::outer(arcs)])
    }

    pub fn with_symmetry(mut self, symmetry: SymmetryDescriptor) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn with_family(mut self, tag: impl Into<String>) -> Self {
        self.family = Some(tag.into());
        self
    }

    pub fn outer(&self) -> &Loop {
        &self.loops[0]
    }

    pub fn arcs(&self) -> impl Iterator<Item = &Arc> {
        self.loops.iter().flat_map(|l| l.arcs.iter())
    }

    /// Number of boundary components.
    pub fn boundary_components(&self) -> usize {
        self.loops.len()
    }

    pub fn is_simply_connected(&self) -> bool {
        self.loops.len() == 1
    }

    pub fn diameter(&self) -> f64 {
        let pts: Vec<Vec2> = self.arcs().flat_map(|a| a.kind.extent_samples()).collect();
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max(pts[i].dist(pts[j]));
            }
        }
        d
    }

    pub fn perimeter(&self) -> f64 {
        self.loops.iter().map(|l| l.length()).sum()
    }

    /// Total length of the Steklov part of the boundary.
    pub fn steklov_length(&self) -> f64 {
        self.arcs().filter(|a| a.condition.is_steklov()).map(|a| a.length()).sum()
    }

    /// Weighted Steklov length `int rho ds`.
    pub fn steklov_mass(&self) -> f64 {
        self.arcs().filter(|a| a.condition.is_steklov()).map(|a| a.weighted_length()).sum()
    }

    pub fn has_condition(&self, pred: impl Fn(&Condition) -> bool) -> bool {
        self.arcs().any(|a| pred(&a.condition))
    }

    pub fn is_full_steklov(&self) -> bool {
        self.arcs().all(|a| a.condition.is_steklov())
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let w: f64 = self.loops.iter().map(|l| l.winding(p)).sum();
        w.round() as i64 == 1
    }

    pub fn transformed(&self, m: &Similarity) -> PlanarDomain {
        let loops = self
            .loops
            .iter()
            .map(|l| {
                let mut arcs: Vec<Arc> = l.arcs.iter().map(|a| a.transformed(m)).collect();
                if m.reflect {
                    // reflection flips orientation; restore it
                    arcs = arcs.into_iter().rev().map(|a| a.reversed()).collect();
                }
                Loop { arcs, orientation: l.orientation }
            })
            .collect();
        PlanarDomain { loops, symmetry: self.symmetry.transformed(m), family: self.family.clone() }
    }

    /// Same geometry with every non-Steklov arc given `cond`.
    pub fn with_star_condition(&self, cond: Condition) -> PlanarDomain {
        let mut d = self.clone();
        for l in &mut d.loops {
            for a in &mut l.arcs {
                if !a.condition.is_steklov() {
                    a.condition = cond.clone();
                }
            }
        }
        d
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.loops.is_empty() {
            return Err(GeometryError::InvalidLayout("no loops".into()));
        }
        for a in self.arcs() {
            a.validate()?;
        }
        let diam = self.diameter();
        let tol = 1e-12 * diam.max(f64::MIN_POSITIVE);
        for (li, l) in self.loops.iter().enumerate() {
            if l.arcs.is_empty() {
                return Err(GeometryError::InvalidLayout(format!("loop {li} is empty")));
            }
            let want = if li == 0 { LoopOrientation::Outer } else { LoopOrientation::Inner };
            if l.orientation != want {
                return Err(GeometryError::InvalidLayout("first loop must be the only outer loop".into()));
            }
            check_closed(l, tol.max(4.0 * f64::EPSILON * diam))?;
            check_simple(l, tol)?;
            let area = l.signed_area();
            match l.orientation {
                LoopOrientation::Outer if area <= 0.0 => {
                    return Err(GeometryError::InvalidLayout("outer loop must run counterclockwise".into()))
                }
                LoopOrientation::Inner if area >= 0.0 => {
                    return Err(GeometryError::InvalidLayout("inner loops must run clockwise".into()))
                }
                _ => {}
            }
        }
        for (i, l) in self.loops.iter().enumerate().skip(1) {
            let p = l.arcs[0].kind.point(0.5);
            if self.loops[0].winding(p).round() as i64 != 1 {
                return Err(GeometryError::InvalidLayout(format!("inner loop {i} is outside the outer loop")));
            }
            for (j, other) in self.loops.iter().enumerate().skip(1) {
                if i == j {
                    continue;
                }
                if other.winding(p).round() as i64 != 0 {
                    return Err(GeometryError::InvalidLayout(format!("inner loops {i} and {j} are nested")));
                }
                for a in &l.arcs {
                    for b in &other.arcs {
                        if !intersect(&a.kind, &b.kind, tol).is_empty() {
                            return Err(GeometryError::InvalidLayout(format!("inner loops {i} and {j} touch")));
                        }
                    }
                }
            }
            for a in &l.arcs {
                for b in &self.loops[0].arcs {
                    if !intersect(&a.kind, &b.kind, tol).is_empty() {
                        return Err(GeometryError::InvalidLayout(format!("inner loop {i} touches the outer loop")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_closed(l: &Loop, tol: f64) -> Result<(), GeometryError> {
    let n = l.arcs.len();
    for i in 0..n {
        let gap = l.arcs[i].kind.end().dist(l.arcs[(i + 1) % n].kind.start());
        if gap > tol {
            return Err(GeometryError::NotClosed { index: i, gap });
        }
    }
    Ok(())
}

fn check_simple(l: &Loop, tol: f64) -> Result<(), GeometryError> {
    let n = l.arcs.len();
    // parameter slack at shared endpoints, relative to each arc's length
    let near = |t: f64, target: f64, len: f64| (t - target).abs() * len <= 1e3 * tol.max(1e-15);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&l.arcs[i], &l.arcs[j]);
            let (la, lb) = (a.length(), b.length());
            for (ta, tb) in intersect(&a.kind, &b.kind, tol) {
                let next = j == i + 1 && near(ta, 1.0, la) && near(tb, 0.0, lb);
                let wrap = i == 0 && j == n - 1 && near(ta, 0.0, la) && near(tb, 1.0, lb);
                if !(next || wrap) {
                    return Err(GeometryError::NotSimple(i, j));
                }
            }
        }
    }
    Ok(())
}
