//! JSON domain files.
//!
//! ```json
//! {"loops":[{"orientation":"outer","arcs":[
//!   {"kind":"circle","center":[0,0],"radius":1,"theta0":0,"theta1":3.14159,"ccw":true,
//!    "condition":"steklov","weight":1.0},
//!   {"kind":"segment","p0":[-1,0],"p1":[1,0],"condition":"neumann"}]}]}
//! ```
//!
//! Radial curves use `{"kind":"radial","center":..,"a0":..,"cos":[..],"sin":[..],"theta0":..,"theta1":..,"ccw":..}`.
//! A Steklov `weight` is either a number or polynomial coefficients in the
//! normalized arc parameter. Optional top-level `symmetry` and `family` keys
//! carry constructor metadata.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::arc::{Arc, ArcKind, Condition, RadialCurve, WeightProfile};
use super::domain::{Loop, LoopOrientation, PlanarDomain, SymmetryDescriptor};
use super::vec2::Vec2;
use super::GeometryError;

#[derive(Debug, Serialize, Deserialize)]
struct DomainFile {
    loops: Vec<LoopFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symmetry: Option<SymmetryDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LoopFile {
    orientation: LoopOrientation,
    arcs: Vec<ArcFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ArcFile {
    #[serde(flatten)]
    geom: Geom,
    condition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<Weight>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Geom {
    Circle { center: Vec2, radius: f64, theta0: f64, theta1: f64, ccw: bool },
    Segment { p0: Vec2, p1: Vec2 },
    Radial {
        center: Vec2,
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
        theta0: f64,
        theta1: f64,
        ccw: bool,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Weight {
    Constant(f64),
    Polynomial(Vec<f64>),
}

fn sweep_of(theta0: f64, theta1: f64, ccw: bool) -> f64 {
    let mut s = theta1 - theta0;
    if ccw && s <= 0.0 {
        s += TAU;
    }
    if !ccw && s >= 0.0 {
        s -= TAU;
    }
    s
}

fn arc_from_file(a: ArcFile) -> Result<Arc, GeometryError> {
    let kind = match a.geom {
        Geom::Circle { center, radius, theta0, theta1, ccw } => {
            ArcKind::Circle { center, radius, theta0, sweep: sweep_of(theta0, theta1, ccw) }
        }
        Geom::Segment { p0, p1 } => ArcKind::Segment { p0, p1 },
        Geom::Radial { center, a0, cos, sin, theta0, theta1, ccw } => ArcKind::Radial {
            center,
            curve: RadialCurve { a0, cos, sin },
            theta0,
            sweep: sweep_of(theta0, theta1, ccw),
        },
    };
    let condition = match a.condition.to_ascii_lowercase().as_str() {
        "steklov" => Condition::Steklov(match a.weight {
            None => WeightProfile::default(),
            Some(Weight::Constant(c)) => WeightProfile::constant(c),
            Some(Weight::Polynomial(p)) if !p.is_empty() => WeightProfile(p),
            Some(Weight::Polynomial(_)) => return Err(GeometryError::Format("empty weight polynomial".into())),
        }),
        "neumann" => Condition::Neumann,
        "dirichlet" => Condition::Dirichlet,
        other => return Err(GeometryError::Format(format!("unknown condition {other:?}"))),
    };
    Ok(Arc::new(kind, condition))
}

fn arc_to_file(a: &Arc) -> ArcFile {
    let geom = match &a.kind {
        ArcKind::Circle { center, radius, theta0, sweep } => Geom::Circle {
            center: *center,
            radius: *radius,
            theta0: *theta0,
            theta1: theta0 + sweep,
            ccw: *sweep > 0.0,
        },
        ArcKind::Segment { p0, p1 } => Geom::Segment { p0: *p0, p1: *p1 },
        ArcKind::Radial { center, curve, theta0, sweep } => Geom::Radial {
            center: *center,
            a0: curve.a0,
            cos: curve.cos.clone(),
            sin: curve.sin.clone(),
            theta0: *theta0,
            theta1: theta0 + sweep,
            ccw: *sweep > 0.0,
        },
    };
    let weight = match &a.condition {
        Condition::Steklov(w) if w.is_constant() => Some(Weight::Constant(w.0[0])),
        Condition::Steklov(w) => Some(Weight::Polynomial(w.0.clone())),
        _ => None,
    };
    ArcFile { geom, condition: a.condition.label().into(), weight }
}

pub fn from_json(text: &str) -> Result<PlanarDomain, GeometryError> {
    let file: DomainFile = serde_json::from_str(text).map_err(|e| GeometryError::Format(e.to_string()))?;
    let mut loops = Vec::new();
    for l in file.loops {
        let arcs = l.arcs.into_iter().map(arc_from_file).collect::<Result<Vec<_>, _>>()?;
        loops.push(Loop { arcs, orientation: l.orientation });
    }
    let mut d = PlanarDomain::new(loops)?;
    d.symmetry = file.symmetry.unwrap_or_default();
    d.family = file.family;
    Ok(d)
}

pub fn to_json(domain: &PlanarDomain) -> String {
    let file = DomainFile {
        loops: domain
            .loops
            .iter()
            .map(|l| LoopFile { orientation: l.orientation, arcs: l.arcs.iter().map(arc_to_file).collect() })
            .collect(),
        symmetry: if domain.symmetry == SymmetryDescriptor::default() { None } else { Some(domain.symmetry.clone()) },
        family: domain.family.clone(),
    };
    serde_json::to_string_pretty(&file).expect("domain serializes")
}

pub fn read_domain(path: &Path) -> Result<PlanarDomain, GeometryError> {
    let text = std::fs::read_to_string(path).map_err(|e| GeometryError::Format(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

pub fn write_domain(path: &Path, domain: &PlanarDomain) -> std::io::Result<()> {
    std::fs::write(path, to_json(domain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_data, make_family, BlobSymmetry, FamilySpec};

    #[test]
    fn parses_documented_example() {
        let text = r#"{"loops":[{"orientation":"outer","arcs":[
            {"kind":"circle","center":[0,0],"radius":1,"theta0":0,"theta1":3.141592653589793,"ccw":true,"condition":"steklov","weight":1.0},
            {"kind":"segment","p0":[-1,0],"p1":[1,0],"condition":"neumann"}]}]}"#;
        let d = from_json(text).unwrap();
        assert!((d.steklov_length() - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn round_trip_preserves_domain() {
        for spec in [
            FamilySpec::GpChain { k: 2, eps: 0.1 },
            FamilySpec::Strip { w: 1.0, h: 2.0 },
            FamilySpec::random_blob(3, 5, 0.2, BlobSymmetry::None),
        ] {
            let d = make_family(&spec).unwrap();
            let back = from_json(&to_json(&d)).unwrap();
            assert_eq!(d.outer().arcs.len(), back.outer().arcs.len());
            assert_eq!(d.symmetry, back.symmetry);
            assert!((d.perimeter() - back.perimeter()).abs() < 1e-13);
            assert!(boundary_data(&d).unwrap().approx_eq(&boundary_data(&back).unwrap(), 1e-14));
        }
    }

    #[test]
    fn unknown_condition_is_rejected() {
        let text = r#"{"loops":[{"orientation":"outer","arcs":[
            {"kind":"circle","center":[0,0],"radius":1,"theta0":0,"theta1":6.283185307179586,"ccw":true,"condition":"robin"}]}]}"#;
        assert!(matches!(from_json(text), Err(GeometryError::Format(_))));
    }

    #[test]
    fn full_circle_sweep_survives() {
        let d = make_family(&FamilySpec::Disk { radius: 1.0 }).unwrap();
        let back = from_json(&to_json(&d)).unwrap();
        assert!(back.outer().arcs[0].kind.is_closed());
    }
}
