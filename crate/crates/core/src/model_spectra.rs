//! Closed-form spectra of disks, half-disks and quarter-disks, multiset merges,
//! the entry-exchange equivalence on boundary data, and recovery of boundary
//! data from a spectrum.
//!
//! Every boundary datum contributes arithmetic progressions `2 pi j / e` to the
//! positive spectrum, where `e` runs over the multiset
//! `E = L_S + L_S + 2 L_*` (circles counted twice, intervals at twice their
//! length). Recovery peels these progressions off a sorted spectrum.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::BoundaryData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Steklov,
    /// Steklov with Neumann on the rest of the boundary.
    Sn,
    /// Steklov with Dirichlet on the rest of the boundary.
    Sd,
    /// Conditions as given by the domain.
    Mixed,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Steklov => "steklov",
            ProblemKind::Sn => "sn",
            ProblemKind::Sd => "sd",
            ProblemKind::Mixed => "mixed",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "steklov" => Ok(ProblemKind::Steklov),
            "sn" => Ok(ProblemKind::Sn),
            "sd" => Ok(ProblemKind::Sd),
            "mixed" | "dn" => Ok(ProblemKind::Mixed),
            _ => Err(format!("unknown problem kind {s:?}")),
        }
    }
}

/// Nondecreasing eigenvalue sequence indexed from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    #[serde(rename = "problem_kind")]
    pub kind: ProblemKind,
    #[serde(default)]
    pub source: String,
}

impl Spectrum {
    pub fn new(values: Vec<f64>, kind: ProblemKind, source: impl Into<String>) -> Self {
        Self { values, kind, source: source.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{i},{v:.14e}\n"));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }

    /// Whether the values are nondecreasing and nonnegative.
    pub fn is_sorted(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1]) && self.values.iter().all(|&v| v >= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("boundary data is empty")]
    EmptySteklovBoundary,
    #[error("recovery failed: {0}")]
    RecoveryFailed(String),
    #[error("ambiguous tail: {0}")]
    AmbiguousTail(String),
}

/// First `k` of `0, 2pi/l, 2pi/l, 4pi/l, 4pi/l, ...`.
pub fn disk_spectrum(l: f64, k: usize) -> Spectrum {
    let values = (0..k).map(|i| 2.0 * PI * i.div_ceil(2) as f64 / l).collect();
    Spectrum::new(values, ProblemKind::Steklov, format!("disk({l})"))
}

/// Boundary condition on the straight part of a half- or quarter-disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Neumann,
    Dirichlet,
}

/// Half-disk with Steklov arc of length `l`: `pi j / l` from `j = 0` (Neumann)
/// or `j = 1` (Dirichlet).
pub fn half_disk_spectrum(l: f64, side: Side, k: usize) -> Spectrum {
    let (start, kind) = match side {
        Side::Neumann => (0, ProblemKind::Sn),
        Side::Dirichlet => (1, ProblemKind::Sd),
    };
    let values = (0..k).map(|i| PI * (i + start) as f64 / l).collect();
    Spectrum::new(values, kind, format!("half_disk({l},{side:?})"))
}

/// Quarter-disk with one Neumann and one Dirichlet leg: `pi (2j + 1) / (2 l)`.
pub fn quarter_disk_spectrum(l: f64, k: usize) -> Spectrum {
    let values = (0..k).map(|i| PI * (2 * i + 1) as f64 / (2.0 * l)).collect();
    Spectrum::new(values, ProblemKind::Mixed, format!("quarter_disk({l})"))
}

/// Sorted multiset union truncated to `k` entries; ties keep source order.
pub fn merge(spectra: &[Spectrum], k: usize) -> Spectrum {
    let mut all: Vec<f64> = spectra.iter().flat_map(|s| s.values.iter().copied()).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.truncate(k);
    let kind = match spectra.first() {
        Some(s) if spectra.iter().all(|t| t.kind == s.kind) => s.kind,
        _ => ProblemKind::Mixed,
    };
    let source = spectra.iter().map(|s| s.source.as_str()).collect::<Vec<_>>().join(" + ");
    Spectrum::new(all, kind, source)
}

/// First `k` entries of the merged model spectra of all boundary components.
pub fn model_spectrum(data: &BoundaryData, k: usize) -> Result<Spectrum, ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptySteklovBoundary);
    }
    let mut parts = Vec::new();
    parts.extend(data.l_s.iter().map(|&l| disk_spectrum(l, k)));
    parts.extend(data.l_n.iter().map(|&l| half_disk_spectrum(l, Side::Neumann, k)));
    parts.extend(data.l_d.iter().map(|&l| half_disk_spectrum(l, Side::Dirichlet, k)));
    parts.extend(data.l_dn.iter().map(|&l| quarter_disk_spectrum(l, k)));
    let mut s = merge(&parts, k);
    s.kind = match (data.l_n.is_empty(), data.l_d.is_empty(), data.l_dn.is_empty()) {
        (true, true, true) => ProblemKind::Steklov,
        (false, true, true) => ProblemKind::Sn,
        (true, false, true) => ProblemKind::Sd,
        _ => ProblemKind::Mixed,
    };
    s.source = "model".into();
    Ok(s)
}

/// Boundary data restricted to circles and one interval type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangePair {
    pub l_s: Vec<f64>,
    pub l_star: Vec<f64>,
}

impl ExchangePair {
    pub fn new(mut l_s: Vec<f64>, mut l_star: Vec<f64>) -> Self {
        sort_desc(&mut l_s);
        sort_desc(&mut l_star);
        Self { l_s, l_star }
    }

    /// The invariant multiset `L_S + L_S + 2 L_*`, sorted descending.
    pub fn generators(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.l_s.iter().flat_map(|&l| [l, l]).chain(self.l_star.iter().map(|&l| 2.0 * l)).collect();
        sort_desc(&mut e);
        e
    }

    pub fn n(&self) -> usize {
        self.l_s.len()
    }

    pub fn m(&self) -> usize {
        self.l_star.len()
    }

    /// All pairs reachable by one exchange.
    pub fn neighbours(&self) -> Vec<ExchangePair> {
        let mut out = Vec::new();
        for (i, &l) in self.l_s.iter().enumerate() {
            for a in 0..self.l_star.len() {
                for b in a + 1..self.l_star.len() {
                    let ls = self.l_star[a];
                    if !same(ls, self.l_star[b]) {
                        continue;
                    }
                    let mut l_s = self.l_s.clone();
                    l_s[i] = 2.0 * ls;
                    let mut l_star: Vec<f64> = self
                        .l_star
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != a && *j != b)
                        .map(|(_, &x)| x)
                        .collect();
                    l_star.extend([0.5 * l, 0.5 * l]);
                    out.push(ExchangePair::new(l_s, l_star));
                }
            }
        }
        out
    }
}

/// Canonical representative of an entry-exchange class: the circles take the
/// `n` largest equal pairs of the generator multiset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceClassRep {
    pub l_s: Vec<f64>,
    pub l_star: Vec<f64>,
}

const SAME_REL: f64 = 1e-9;

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= SAME_REL * a.abs().max(b.abs())
}

fn sort_desc(v: &mut [f64]) {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
}

/// Groups a descending list into runs of equal values.
fn runs(sorted_desc: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &x in sorted_desc {
        match out.last_mut() {
            Some((v, c)) if same(*v, x) => *c += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Representative with `n` circles for the generator multiset `e`, if one exists.
pub fn class_from_generators(n: usize, e: &[f64]) -> Option<EquivalenceClassRep> {
    let mut e = e.to_vec();
    sort_desc(&mut e);
    let mut l_s = Vec::new();
    let mut rest = Vec::new();
    for (v, c) in runs(&e) {
        let pairs = (c / 2).min(n - l_s.len());
        l_s.extend(std::iter::repeat(v).take(pairs));
        rest.extend(std::iter::repeat(v).take(c - 2 * pairs));
    }
    if l_s.len() < n {
        return None;
    }
    let l_star = rest.into_iter().map(|x| 0.5 * x).collect();
    Some(EquivalenceClassRep { l_s, l_star })
}

pub fn canonicalize(pair: &ExchangePair) -> EquivalenceClassRep {
    class_from_generators(pair.n(), &pair.generators()).expect("a pair represents its own class")
}

pub fn entry_exchange_equivalent(a: &ExchangePair, b: &ExchangePair) -> bool {
    let (ca, cb) = (canonicalize(a), canonicalize(b));
    let eq = |x: &Vec<f64>, y: &Vec<f64>| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same(*p, *q));
    eq(&ca.l_s, &cb.l_s) && eq(&ca.l_star, &cb.l_star)
}

/// Outcome of spectral recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovery {
    /// Steklov circles.
    pub n: usize,
    /// Steklov intervals.
    pub m: usize,
    /// Generator multiset `L_S + L_S + 2 L_*`.
    pub generators: Vec<f64>,
    pub class: EquivalenceClassRep,
}

/// Recovers `(n, m)` and the entry-exchange class from an SN or SD spectrum.
///
/// Progressions are peeled smallest generator first; `tol` is relative. The
/// number of zero modes (from the eigenvalue count) separates circles from
/// intervals.
pub fn recover_boundary_data(tail: &Spectrum, kind: ProblemKind, tol: f64) -> Result<Recovery, ModelError> {
    if !matches!(kind, ProblemKind::Sn | ProblemKind::Sd | ProblemKind::Steklov) {
        return Err(ModelError::RecoveryFailed("recovery needs an SN, SD or Steklov spectrum".into()));
    }
    let vals = &tail.values;
    if vals.len() < 4 {
        return Err(ModelError::AmbiguousTail("spectrum too short".into()));
    }
    let top = *vals.last().unwrap();
    let zero_cut = tol * top;
    // copies of the largest listed value may be cut off by the truncation
    let reach = top * (1.0 - 4.0 * tol);
    let mut residual: Vec<f64> = vals.iter().copied().filter(|&v| v > zero_cut && v <= reach).collect();
    let mut steps: Vec<f64> = Vec::new();
    while let Some(&g0) = residual.first() {
        let count = (reach / g0).floor() as usize;
        if count < 3 {
            return Err(ModelError::AmbiguousTail(format!(
                "generator {g0:.6e} has only {count} multiples below the truncation"
            )));
        }
        let mut taken = vec![false; residual.len()];
        let mut g = g0;
        let (mut sjv, mut sjj) = (0.0, 0.0);
        for j in 1..=count {
            let target = g * j as f64;
            let slack = tol * target;
            // residual is sorted: binary search then scan the window
            let lo = residual.partition_point(|&v| v < target - slack);
            let hit = (lo..residual.len())
                .take_while(|&i| residual[i] <= target + slack)
                .filter(|&i| !taken[i])
                .min_by(|&a, &b| (residual[a] - target).abs().partial_cmp(&(residual[b] - target).abs()).unwrap());
            match hit {
                Some(i) => {
                    taken[i] = true;
                    sjv += j as f64 * residual[i];
                    sjj += (j * j) as f64;
                    g = sjv / sjj;
                }
                None => {
                    return Err(ModelError::RecoveryFailed(format!(
                        "multiple {j} of generator {g:.6e} is missing (tolerance {tol:e})"
                    )))
                }
            }
        }
        residual = residual.into_iter().zip(taken).filter(|(_, t)| !t).map(|(v, _)| v).collect();
        steps.push(g);
    }
    let mut generators: Vec<f64> = steps.iter().map(|g| 2.0 * PI / g).collect();
    sort_desc(&mut generators);

    // zero modes: eigenvalue count minus the progression count at mid-gap points
    let mut offsets = Vec::new();
    for w in vals.windows(2) {
        if w[1] - w[0] > 10.0 * tol * w[1] && w[1] <= reach {
            let s = 0.5 * (w[0] + w[1]);
            let below = vals.iter().filter(|&&v| v <= s).count() as i64;
            let prog: i64 = steps.iter().map(|g| (s / g).floor() as i64).sum();
            offsets.push(below - prog);
        }
    }
    let c = match offsets.first() {
        Some(&c) if offsets.iter().all(|&o| o == c) => c,
        Some(_) => return Err(ModelError::RecoveryFailed("inconsistent zero-mode count".into())),
        None => return Err(ModelError::AmbiguousTail("no spectral gaps to count zero modes".into())),
    };
    let total = generators.len() as i64;
    let (n, m) = match kind {
        ProblemKind::Sd => (c, total - 2 * c),
        _ => (total - c, 2 * c - total),
    };
    if n < 0 || m < 0 || (kind == ProblemKind::Steklov && m != 0) {
        return Err(ModelError::RecoveryFailed(format!("inconsistent counts n = {n}, m = {m}")));
    }
    let class = class_from_generators(n as usize, &generators)
        .ok_or_else(|| ModelError::RecoveryFailed("generators admit no circle pairing".into()))?;
    Ok(Recovery { n: n as usize, m: m as usize, generators, class })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    fn approx(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * y.abs().max(1.0))
    }

    #[test]
    fn closed_forms() {
        assert!(approx(&disk_spectrum(2.0 * PI, 7).values, &[0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0], 1e-15));
        let tau = 2.0 * PI;
        assert!(approx(&disk_spectrum(1.0, 5).values, &[0.0, tau, tau, 2.0 * tau, 2.0 * tau], 1e-15));
        assert_eq!(disk_spectrum(3.0, 1).values, vec![0.0]);
        assert!(approx(&half_disk_spectrum(PI, Side::Neumann, 4).values, &[0.0, 1.0, 2.0, 3.0], 1e-15));
        assert!(approx(&half_disk_spectrum(PI, Side::Dirichlet, 3).values, &[1.0, 2.0, 3.0], 1e-15));
        assert!(approx(&half_disk_spectrum(2.0 * PI, Side::Neumann, 3).values, &[0.0, 0.5, 1.0], 1e-15));
        assert!(approx(&quarter_disk_spectrum(PI / 2.0, 3).values, &[1.0, 3.0, 5.0], 1e-15));
        assert!(approx(&quarter_disk_spectrum(PI, 2).values, &[0.5, 1.5], 1e-15));
    }

    #[test]
    fn merge_disk_with_dirichlet_half() {
        // oracle: explicit sort of the two closed forms
        let a = disk_spectrum(2.0 * PI, 7);
        let b = half_disk_spectrum(PI, Side::Dirichlet, 7);
        let mut all: Vec<f64> = a.values.iter().chain(&b.values).copied().collect();
        all.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let m = merge(&[a.clone(), b.clone()], 7);
        assert_eq!(m.values, all[..7].to_vec());
        assert!(approx(&m.values, &[0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0], 1e-15));
        assert_eq!(merge(&[b.clone(), a.clone()], 7).values, m.values);
        assert_eq!(merge(&[a.clone()], 7).values, a.values);
    }

    #[test]
    fn model_spectrum_examples() {
        let s = model_spectrum(&BoundaryData::circles(vec![2.0 * PI]), 5).unwrap();
        assert!(approx(&s.values, &[0.0, 1.0, 1.0, 2.0, 2.0], 1e-15));
        let d = BoundaryData::new(vec![], vec![], vec![PI], vec![]).unwrap();
        assert!(approx(&model_spectrum(&d, 4).unwrap().values, &[0.0, 1.0, 2.0, 3.0], 1e-15));
        let d = BoundaryData::new(vec![2.0 * PI], vec![PI], vec![], vec![]).unwrap();
        assert!(approx(&model_spectrum(&d, 7).unwrap().values, &[0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0], 1e-15));
        assert_eq!(model_spectrum(&BoundaryData::default(), 3), Err(ModelError::EmptySteklovBoundary));
    }

    /// Breadth-first closure under single exchanges.
    fn closure(start: &ExchangePair) -> Vec<ExchangePair> {
        let mut seen = vec![start.clone()];
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(p) = queue.pop_front() {
            for q in p.neighbours() {
                let known = seen.iter().any(|s| {
                    s.l_s.len() == q.l_s.len()
                        && s.l_star.len() == q.l_star.len()
                        && s.l_s.iter().zip(&q.l_s).all(|(a, b)| same(*a, *b))
                        && s.l_star.iter().zip(&q.l_star).all(|(a, b)| same(*a, *b))
                });
                if !known {
                    seen.push(q.clone());
                    queue.push_back(q);
                }
            }
        }
        seen
    }

    #[test]
    fn exchange_examples() {
        let a = ExchangePair::new(vec![4.0], vec![3.0, 3.0]);
        let b = ExchangePair::new(vec![6.0], vec![2.0, 2.0]);
        let c = ExchangePair::new(vec![4.0], vec![3.0, 5.0]);
        assert!(entry_exchange_equivalent(&a, &b));
        assert!(entry_exchange_equivalent(&a, &a));
        assert!(!entry_exchange_equivalent(&c, &b));
    }

    #[test]
    fn canonical_form_agrees_with_search() {
        let start = ExchangePair::new(vec![4.0, 1.0], vec![3.0, 3.0, 0.5, 0.5, 2.0]);
        let class = closure(&start);
        assert!(class.len() > 2);
        let c0 = canonicalize(&start);
        for p in &class {
            assert_eq!(canonicalize(p), c0);
        }
        // the canonical form is a class member
        assert!(class.iter().any(|p| p.l_s == c0.l_s && p.l_star == c0.l_star));
    }

    #[test]
    fn recover_round_trips() {
        let d = BoundaryData::circles(vec![2.0 * PI]);
        let r = recover_boundary_data(&model_spectrum(&d, 200).unwrap(), ProblemKind::Sn, 1e-9).unwrap();
        assert_eq!((r.n, r.m), (1, 0));
        assert!((r.class.l_s[0] - 2.0 * PI).abs() < 1e-9);

        let d = BoundaryData::new(vec![], vec![], vec![PI], vec![]).unwrap();
        let r = recover_boundary_data(&model_spectrum(&d, 200).unwrap(), ProblemKind::Sn, 1e-9).unwrap();
        assert_eq!((r.n, r.m), (0, 1));

        let a = BoundaryData::new(vec![4.0], vec![3.0, 3.0], vec![], vec![]).unwrap();
        let b = BoundaryData::new(vec![6.0], vec![2.0, 2.0], vec![], vec![]).unwrap();
        let ra = recover_boundary_data(&model_spectrum(&a, 200).unwrap(), ProblemKind::Sd, 1e-9).unwrap();
        let rb = recover_boundary_data(&model_spectrum(&b, 200).unwrap(), ProblemKind::Sd, 1e-9).unwrap();
        assert_eq!((ra.n, ra.m), (1, 2));
        assert_eq!(ra.class, rb.class);
    }

    #[test]
    fn short_tail_is_ambiguous() {
        let s = disk_spectrum(2.0 * PI, 3);
        assert!(matches!(recover_boundary_data(&s, ProblemKind::Sn, 1e-9), Err(ModelError::AmbiguousTail(_))));
    }
}
