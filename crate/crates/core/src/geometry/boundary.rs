use serde::{Deserialize, Serialize};

use super::arc::Condition;
use super::domain::PlanarDomain;
use super::GeometryError;

/// Lengths of the Steklov boundary components, sorted descending.
///
/// Circles go to `l_s`; intervals are filed by the conditions at their two
/// ends: both Dirichlet (`l_d`), both Neumann (`l_n`) or one of each (`l_dn`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    #[serde(default)]
    pub l_s: Vec<f64>,
    #[serde(default)]
    pub l_d: Vec<f64>,
    #[serde(default)]
    pub l_n: Vec<f64>,
    #[serde(default)]
    pub l_dn: Vec<f64>,
}

fn sort_desc(v: &mut [f64]) {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
}

impl BoundaryData {
    pub fn new(l_s: Vec<f64>, l_d: Vec<f64>, l_n: Vec<f64>, l_dn: Vec<f64>) -> Result<Self, GeometryError> {
        let mut d = BoundaryData { l_s, l_d, l_n, l_dn };
        if d.all().any(|l| !(l > 0.0) || !l.is_finite()) {
            return Err(GeometryError::ParameterOutOfRange("boundary lengths must be positive".into()));
        }
        d.normalize();
        Ok(d)
    }

    pub fn circles(l_s: Vec<f64>) -> Self {
        Self::new(l_s, vec![], vec![], vec![]).expect("positive lengths")
    }

    fn normalize(&mut self) {
        sort_desc(&mut self.l_s);
        sort_desc(&mut self.l_d);
        sort_desc(&mut self.l_n);
        sort_desc(&mut self.l_dn);
    }

    fn all(&self) -> impl Iterator<Item = f64> + '_ {
        self.l_s.iter().chain(&self.l_d).chain(&self.l_n).chain(&self.l_dn).copied()
    }

    /// Number of Steklov circles.
    pub fn n(&self) -> usize {
        self.l_s.len()
    }

    /// Number of Steklov intervals.
    pub fn m(&self) -> usize {
        self.l_d.len() + self.l_n.len() + self.l_dn.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n() + self.m() == 0
    }

    pub fn scaled(&self, t: f64) -> Self {
        let f = |v: &Vec<f64>| v.iter().map(|x| x * t).collect();
        BoundaryData { l_s: f(&self.l_s), l_d: f(&self.l_d), l_n: f(&self.l_n), l_dn: f(&self.l_dn) }
    }

    /// Equality of all multisets up to a relative tolerance.
    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        let eq = |a: &Vec<f64>, b: &Vec<f64>| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= rel * x.abs().max(y.abs()))
        };
        eq(&self.l_s, &other.l_s) && eq(&self.l_d, &other.l_d) && eq(&self.l_n, &other.l_n) && eq(&self.l_dn, &other.l_dn)
    }
}

/// Classifies the Steklov components of every loop.
///
/// Lengths are weighted (`int rho ds`), which reduces to arc length for the
/// default unit weight.
pub fn boundary_data(domain: &PlanarDomain) -> Result<BoundaryData, GeometryError> {
    let mut data = BoundaryData::default();
    for lp in &domain.loops {
        let arcs = &lp.arcs;
        let n = arcs.len();
        if arcs.iter().all(|a| a.condition.is_steklov()) {
            data.l_s.push(arcs.iter().map(|a| a.weighted_length()).sum());
            continue;
        }
        if arcs.iter().any(|a| !a.condition.is_steklov() && a.length() <= 0.0) {
            return Err(GeometryError::MalformedDecomposition("zero-length separator arc".into()));
        }
        // start just after a non-Steklov arc so runs never wrap
        let first = (0..n).find(|&i| !arcs[i].condition.is_steklov()).unwrap();
        let mut i = 0;
        while i < n {
            let idx = (first + 1 + i) % n;
            if !arcs[idx].condition.is_steklov() {
                i += 1;
                continue;
            }
            let before = &arcs[(idx + n - 1) % n].condition;
            let mut len = 0.0;
            let mut j = i;
            while j < n && arcs[(first + 1 + j) % n].condition.is_steklov() {
                len += arcs[(first + 1 + j) % n].weighted_length();
                j += 1;
            }
            let after = &arcs[(first + 1 + j) % n].condition;
            match (before, after) {
                (Condition::Dirichlet, Condition::Dirichlet) => data.l_d.push(len),
                (Condition::Neumann, Condition::Neumann) => data.l_n.push(len),
                (Condition::Dirichlet, Condition::Neumann) | (Condition::Neumann, Condition::Dirichlet) => {
                    data.l_dn.push(len)
                }
                _ => {
                    return Err(GeometryError::MalformedDecomposition(
                        "Steklov component abuts another Steklov component".into(),
                    ))
                }
            }
            i = j;
        }
    }
    data.normalize();
    Ok(data)
}
