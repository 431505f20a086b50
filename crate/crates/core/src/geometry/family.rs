use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::arc::{Arc, ArcKind, Condition, RadialCurve};
use super::domain::{PlanarDomain, ReflectionAxis, SymmetryDescriptor};
use super::union::{union_of_shapes, Shape};
use super::vec2::Vec2;
use super::GeometryError;

/// Parametrized domain constructors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// Row of `2k - 1` unit disks with centers `2j(1 - eps)`.
    GpChain { k: usize, eps: f64 },
    /// Regular `p`-gon of side 2 with a unit half-disk on every side.
    BandleFlower { p: usize },
    /// Flower plus a chain of `m - 1` disks of radius `1 + eps` off every side.
    BandleChain { p: usize, m: usize, eps: f64 },
    /// Disk of radius `1 + 2 eps` with `p` chains of `m` disks of radius `1 + eps`.
    RotCluster { p: usize, m: usize, eps: f64 },
    /// Rectangle `[0, w] x [-h, 0]`, Steklov on the top edge, Neumann elsewhere.
    Strip { w: f64, h: f64 },
    /// Star-shaped domain `r(theta)`, full Steklov.
    SmoothBlob { curve: RadialCurve },
    Disk { radius: f64 },
    /// Upper half of a disk; the diameter carries `condition` ("neumann" or "dirichlet").
    HalfDisk { radius: f64, condition: String },
    /// First-quadrant quarter disk: Neumann on the x-leg, Dirichlet on the y-leg.
    QuarterDisk { radius: f64 },
}

/// Symmetry imposed on random blobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlobSymmetry {
    None,
    /// Mirror symmetric about the x-axis.
    Reflect,
    /// Invariant under the symmetries of the square.
    Square,
}

impl FamilySpec {
    /// Random smooth blob with `modes` Fourier modes of decaying amplitude.
    pub fn random_blob(seed: u64, modes: usize, amplitude: f64, symmetry: BlobSymmetry) -> FamilySpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cos = vec![0.0; modes];
        let mut sin = vec![0.0; modes];
        for j in 1..=modes {
            let amp = amplitude / (j * j) as f64;
            let a = amp * rng.gen_range(-1.0..1.0);
            let b = amp * rng.gen_range(-1.0..1.0);
            match symmetry {
                BlobSymmetry::None => {
                    cos[j - 1] = a;
                    sin[j - 1] = b;
                }
                BlobSymmetry::Reflect => cos[j - 1] = a,
                BlobSymmetry::Square => {
                    if j % 4 == 0 {
                        cos[j - 1] = amplitude * rng.gen_range(-1.0..1.0) / (j / 4) as f64;
                    }
                }
            }
        }
        FamilySpec::SmoothBlob { curve: RadialCurve { a0: 1.0, cos, sin } }
    }

    pub fn tag(&self) -> String {
        match self {
            FamilySpec::GpChain { k, eps } => format!("gp_chain({k},{eps})"),
            FamilySpec::BandleFlower { p } => format!("bandle_flower({p})"),
            FamilySpec::BandleChain { p, m, eps } => format!("bandle_chain({p},{m},{eps})"),
            FamilySpec::RotCluster { p, m, eps } => format!("rot_cluster({p},{m},{eps})"),
            FamilySpec::Strip { w, h } => format!("strip({w},{h})"),
            FamilySpec::SmoothBlob { .. } => "smooth_blob".into(),
            FamilySpec::Disk { radius } => format!("disk({radius})"),
            FamilySpec::HalfDisk { radius, condition } => format!("half_disk({radius},{condition})"),
            FamilySpec::QuarterDisk { radius } => format!("quarter_disk({radius})"),
        }
    }
}

impl FamilySpec {
    /// Parses the `tag` syntax, e.g. `gp_chain(2,0.1)` or `disk`. Trailing
    /// arguments may be omitted: `eps` defaults to 0.1, lengths to 1 and the
    /// half-disk condition to Neumann. `smooth_blob(seed,modes,amplitude,symmetry)`
    /// builds a random blob.
    pub fn parse(text: &str) -> Result<FamilySpec, GeometryError> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(i) if text.ends_with(')') => (&text[..i], &text[i + 1..text.len() - 1]),
            Some(_) => return Err(GeometryError::Format(format!("unbalanced parentheses in {text:?}"))),
            None => (text, ""),
        };
        let args: Vec<&str> = args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
        let bad = |what: &str| GeometryError::Format(format!("{name}: bad {what} in {text:?}"));
        let num = |i: usize, default: Option<f64>| -> Result<f64, GeometryError> {
            match args.get(i) {
                Some(a) => a.parse::<f64>().map_err(|_| bad("number")),
                None => default.ok_or_else(|| bad("argument count")),
            }
        };
        let int = |i: usize, default: Option<usize>| -> Result<usize, GeometryError> {
            match args.get(i) {
                Some(a) => a.parse::<usize>().map_err(|_| bad("integer")),
                None => default.ok_or_else(|| bad("argument count")),
            }
        };
        Ok(match name.trim() {
            "gp_chain" => FamilySpec::GpChain { k: int(0, None)?, eps: num(1, Some(0.1))? },
            "bandle_flower" => FamilySpec::BandleFlower { p: int(0, None)? },
            "bandle_chain" => FamilySpec::BandleChain { p: int(0, None)?, m: int(1, None)?, eps: num(2, Some(0.1))? },
            "rot_cluster" => FamilySpec::RotCluster { p: int(0, None)?, m: int(1, None)?, eps: num(2, Some(0.1))? },
            "strip" => FamilySpec::Strip { w: num(0, Some(1.0))?, h: num(1, Some(1.0))? },
            "disk" => FamilySpec::Disk { radius: num(0, Some(1.0))? },
            "half_disk" => {
                let (radius, condition) = match args.as_slice() {
                    [] => (1.0, "neumann"),
                    [a] if a.parse::<f64>().is_err() => (1.0, *a),
                    [_] => (num(0, None)?, "neumann"),
                    [_, c] => (num(0, None)?, *c),
                    _ => return Err(bad("argument count")),
                };
                FamilySpec::HalfDisk { radius, condition: condition.to_string() }
            }
            "quarter_disk" => FamilySpec::QuarterDisk { radius: num(0, Some(1.0))? },
            "smooth_blob" => {
                let symmetry = match args.get(3).copied().unwrap_or("none") {
                    "none" => BlobSymmetry::None,
                    "reflect" => BlobSymmetry::Reflect,
                    "square" => BlobSymmetry::Square,
                    _ => return Err(bad("symmetry")),
                };
                FamilySpec::random_blob(int(0, Some(0))? as u64, int(1, Some(6))?, num(2, Some(0.2))?, symmetry)
            }
            _ => return Err(GeometryError::Format(format!("unknown family {name:?}"))),
        })
    }
}

fn out_of_range(msg: impl Into<String>) -> GeometryError {
    GeometryError::ParameterOutOfRange(msg.into())
}

fn check_eps(eps: f64) -> Result<(), GeometryError> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(out_of_range(format!("eps = {eps} must lie in (0, 0.5)")))
    }
}

/// Lines through the origin at angles `j pi / p`.
fn dihedral_axes(p: usize) -> Vec<ReflectionAxis> {
    (0..p).map(|j| ReflectionAxis::through_origin(PI * j as f64 / p as f64)).collect()
}

fn dihedral(p: usize) -> SymmetryDescriptor {
    SymmetryDescriptor { reflections: dihedral_axes(p), rotation: Some((Vec2::ZERO, p as u32)) }
}

fn flower_shapes(p: usize) -> Vec<Shape> {
    if p == 2 {
        return vec![Shape::Disk { center: Vec2::ZERO, radius: 1.0 }];
    }
    let circ = 1.0 / (PI / p as f64).sin();
    let apothem = 1.0 / (PI / p as f64).tan();
    let mut shapes = vec![Shape::Polygon((0..p).map(|i| Vec2::polar(circ, TAU * i as f64 / p as f64)).collect())];
    for i in 0..p {
        let phi = PI * (2 * i + 1) as f64 / p as f64;
        shapes.push(Shape::HalfDisk { center: Vec2::polar(apothem, phi), radius: 1.0, dir: phi });
    }
    shapes
}

fn disks_overlap(a: (Vec2, f64), b: (Vec2, f64)) -> bool {
    a.0.dist(b.0) < a.1 + b.1
}

/// Fails when disks from different chains intersect.
fn check_chains(chains: &[Vec<(Vec2, f64)>]) -> Result<(), GeometryError> {
    for i in 0..chains.len() {
        for j in i + 1..chains.len() {
            for &a in &chains[i] {
                for &b in &chains[j] {
                    if disks_overlap(a, b) {
                        return Err(GeometryError::OverlapViolation(format!("chains {i} and {j} intersect")));
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn make_family(spec: &FamilySpec) -> Result<PlanarDomain, GeometryError> {
    let domain = match spec {
        FamilySpec::GpChain { k, eps } => {
            if *k < 1 {
                return Err(out_of_range("k must be at least 1"));
            }
            check_eps(*eps)?;
            let kk = *k as i64;
            let centers: Vec<Vec2> =
                (-(kk - 1)..=kk - 1).map(|j| Vec2::new(2.0 * j as f64 * (1.0 - eps), 0.0)).collect();
            let radii = vec![1.0; centers.len()];
            let shapes: Vec<Shape> =
                centers.iter().zip(&radii).map(|(&c, &r)| Shape::Disk { center: c, radius: r }).collect();
            union_of_shapes(&shapes)?.with_symmetry(SymmetryDescriptor {
                reflections: vec![ReflectionAxis::horizontal(0.0), ReflectionAxis::vertical(0.0)],
                rotation: Some((Vec2::ZERO, 2)),
            })
        }
        FamilySpec::BandleFlower { p } => {
            if *p < 2 {
                return Err(out_of_range("p must be at least 2"));
            }
            flower(*p)?.with_symmetry(dihedral(*p))
        }
        FamilySpec::BandleChain { p, m, eps } => {
            if *p < 2 || *m < 1 {
                return Err(out_of_range("need p >= 2 and m >= 1"));
            }
            check_eps(*eps)?;
            let apothem = if *p == 2 { 0.0 } else { 1.0 / (PI / *p as f64).tan() };
            let chains: Vec<Vec<(Vec2, f64)>> = (0..*p)
                .map(|i| {
                    let phi = PI * (2 * i + 1) as f64 / *p as f64;
                    (1..*m).map(|j| (Vec2::polar(apothem + 2.0 * j as f64, phi), 1.0 + eps)).collect()
                })
                .collect();
            check_chains(&chains)?;
            let mut shapes = flower_shapes(*p);
            for c in chains.iter().flatten() {
                shapes.push(Shape::Disk { center: c.0, radius: c.1 });
            }
            let d = if *m == 1 { flower(*p)? } else { union_of_shapes(&shapes)? };
            d.with_symmetry(dihedral(*p))
        }
        FamilySpec::RotCluster { p, m, eps } => {
            if !(3..=6).contains(p) || *m < 1 {
                return Err(out_of_range("need 3 <= p <= 6 and m >= 1"));
            }
            check_eps(*eps)?;
            let chains: Vec<Vec<(Vec2, f64)>> = (0..*p)
                .map(|i| {
                    let phi = TAU * i as f64 / *p as f64;
                    (1..=*m)
                        .map(|j| (Vec2::new(2.0 * j as f64 + eps, 0.0).rotated(phi), 1.0 + eps))
                        .collect()
                })
                .collect();
            check_chains(&chains)?;
            let mut shapes = vec![Shape::Disk { center: Vec2::ZERO, radius: 1.0 + 2.0 * eps }];
            for c in chains.iter().flatten() {
                shapes.push(Shape::Disk { center: c.0, radius: c.1 });
            }
            union_of_shapes(&shapes)?.with_symmetry(dihedral(*p))
        }
        FamilySpec::Strip { w, h } => {
            if !(*w > 0.0 && *h > 0.0) {
                return Err(out_of_range("strip sides must be positive"));
            }
            let p = [Vec2::new(0.0, -h), Vec2::new(*w, -h), Vec2::new(*w, 0.0), Vec2::new(0.0, 0.0)];
            let arcs = (0..4)
                .map(|i| {
                    let cond = if i == 2 { Condition::steklov() } else { Condition::Neumann };
                    Arc::new(ArcKind::Segment { p0: p[i], p1: p[(i + 1) % 4] }, cond)
                })
                .collect();
            PlanarDomain::from_arcs(arcs)?.with_symmetry(SymmetryDescriptor {
                reflections: vec![ReflectionAxis::vertical(0.5 * w)],
                rotation: None,
            })
        }
        FamilySpec::SmoothBlob { curve } => {
            if !(curve.a0 > 0.0) || curve.min_radius() <= 0.0 {
                return Err(out_of_range("radial function must stay positive"));
            }
            let arc = Arc::steklov(ArcKind::Radial { center: Vec2::ZERO, curve: curve.clone(), theta0: 0.0, sweep: TAU });
            PlanarDomain::from_arcs(vec![arc])?.with_symmetry(blob_symmetry(curve))
        }
        FamilySpec::Disk { radius } => {
            if !(*radius > 0.0) {
                return Err(out_of_range("radius must be positive"));
            }
            PlanarDomain::from_arcs(vec![Arc::steklov(ArcKind::full_circle(Vec2::ZERO, *radius))])?
                .with_symmetry(dihedral(4))
        }
        FamilySpec::HalfDisk { radius, condition } => {
            if !(*radius > 0.0) {
                return Err(out_of_range("radius must be positive"));
            }
            let cond = match condition.as_str() {
                "neumann" | "n" => Condition::Neumann,
                "dirichlet" | "d" => Condition::Dirichlet,
                c => return Err(out_of_range(format!("unknown condition {c}"))),
            };
            let r = *radius;
            PlanarDomain::from_arcs(vec![
                Arc::steklov(ArcKind::Circle { center: Vec2::ZERO, radius: r, theta0: 0.0, sweep: PI }),
                Arc::new(ArcKind::Segment { p0: Vec2::new(-r, 0.0), p1: Vec2::new(r, 0.0) }, cond),
            ])?
            .with_symmetry(SymmetryDescriptor { reflections: vec![ReflectionAxis::vertical(0.0)], rotation: None })
        }
        FamilySpec::QuarterDisk { radius } => {
            if !(*radius > 0.0) {
                return Err(out_of_range("radius must be positive"));
            }
            let r = *radius;
            PlanarDomain::from_arcs(vec![
                Arc::steklov(ArcKind::Circle { center: Vec2::ZERO, radius: r, theta0: 0.0, sweep: FRAC_PI_2 }),
                Arc::new(ArcKind::Segment { p0: Vec2::new(0.0, r), p1: Vec2::ZERO }, Condition::Dirichlet),
                Arc::new(ArcKind::Segment { p0: Vec2::ZERO, p1: Vec2::new(r, 0.0) }, Condition::Neumann),
            ])?
        }
    };
    Ok(domain.with_family(spec.tag()))
}

/// The flower boundary built directly from its `p` semicircles.
fn flower(p: usize) -> Result<PlanarDomain, GeometryError> {
    if p == 2 {
        return PlanarDomain::from_arcs(vec![Arc::steklov(ArcKind::full_circle(Vec2::ZERO, 1.0))]);
    }
    let apothem = 1.0 / (PI / p as f64).tan();
    let arcs = (0..p)
        .map(|i| {
            let phi = PI * (2 * i + 1) as f64 / p as f64;
            Arc::steklov(ArcKind::Circle {
                center: Vec2::polar(apothem, phi),
                radius: 1.0,
                theta0: phi - FRAC_PI_2,
                sweep: PI,
            })
        })
        .collect();
    PlanarDomain::from_arcs(arcs)
}

/// Symmetries read off the Fourier coefficients of a radial curve.
fn blob_symmetry(curve: &RadialCurve) -> SymmetryDescriptor {
    let nonzero: Vec<usize> = (1..=curve.cos.len().max(curve.sin.len()))
        .filter(|&j| {
            curve.cos.get(j - 1).copied().unwrap_or(0.0) != 0.0 || curve.sin.get(j - 1).copied().unwrap_or(0.0) != 0.0
        })
        .collect();
    let order = nonzero.iter().fold(0usize, |g, &j| gcd(g, j));
    let mirror = curve.sin.iter().all(|&b| b == 0.0);
    let mut reflections = Vec::new();
    if mirror {
        if order == 0 {
            return dihedral(4);
        }
        for j in 0..order {
            reflections.push(ReflectionAxis::through_origin(PI * j as f64 / order as f64));
        }
    }
    let rotation = if order >= 2 { Some((Vec2::ZERO, order as u32)) } else { None };
    SymmetryDescriptor { reflections, rotation }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
