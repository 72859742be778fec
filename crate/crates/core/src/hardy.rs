//! The Hilbert space of square-summable coefficient tables: norms and inner
//! products in coefficient form, boundary traces on the quadric boundary
//! `S^1 x S^(d-1) / Z_2`, the admissibility pattern a trace must satisfy,
//! reconstruction of the interior function from admissible boundary data,
//! and the interior sup-norm certificate.
//!
//! Inner products are always computed coefficient-wise; the limiting
//! boundary integral they equal is used as a cross-check in tests only,
//! since evaluating it directly is numerically fragile near the boundary.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::almansi::AlmansiTable;
use crate::sphere::{eval_harmonics_up_to, ModeIndex};
use crate::util::pairwise_sum;
use crate::{Error, Result};

/// Fourier table of a boundary function on `S^1 x S^(d-1)`: entry
/// `(j, (k, l))` is the coefficient of `e^(i j phi) Y_{k,l}(theta)`.
///
/// Circle frequencies of either sign can be stored; traces of interior
/// functions only ever populate `j ∈ {k, k+2, k+4, ...}` (see
/// [`check_riesz`]), but the type must be able to represent data violating
/// that pattern, otherwise the check would have nothing to report.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryTable {
    d: usize,
    entries: BTreeMap<(i64, ModeIndex), Complex64>,
}

impl BoundaryTable {
    pub fn new(d: usize) -> Self {
        BoundaryTable {
            d,
            entries: BTreeMap::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &BTreeMap<(i64, ModeIndex), Complex64> {
        &self.entries
    }

    pub fn insert(&mut self, j: i64, mode: ModeIndex, value: Complex64) {
        if value == Complex64::new(0.0, 0.0) {
            self.entries.remove(&(j, mode));
        } else {
            self.entries.insert((j, mode), value);
        }
    }

    pub fn get(&self, j: i64, mode: ModeIndex) -> Complex64 {
        self.entries
            .get(&(j, mode))
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Largest |j| present.
    pub fn max_frequency(&self) -> i64 {
        self.entries.keys().map(|(j, _)| j.abs()).max().unwrap_or(0)
    }

    pub fn max_k(&self) -> usize {
        self.entries.keys().map(|(_, m)| m.k).max().unwrap_or(0)
    }

    /// Value of the boundary function at `(e^(i phi), theta)`.
    pub fn evaluate(&self, phi: f64, theta: &[f64]) -> Result<Complex64> {
        let harmonics = eval_harmonics_up_to(self.d, self.max_k(), theta)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(j, mode), &v) in &self.entries {
            let circle = Complex64::from_polar(1.0, j as f64 * phi);
            acc += v * circle * harmonics[mode.k][mode.ell - 1];
        }
        Ok(acc)
    }

    /// l2 norm of the stored coefficients.
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.entries.values().map(|v| v.norm_sqr()).collect();
        pairwise_sum(&sq).sqrt()
    }
}

#[derive(Serialize, Deserialize)]
struct BoundaryEntryRaw {
    j: i64,
    k: usize,
    l: usize,
    v: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct BoundaryRaw {
    d: usize,
    entries: Vec<BoundaryEntryRaw>,
}

impl Serialize for BoundaryTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = BoundaryRaw {
            d: self.d,
            entries: self
                .entries
                .iter()
                .map(|(&(j, mode), v)| BoundaryEntryRaw {
                    j,
                    k: mode.k,
                    l: mode.ell,
                    v: [v.re, v.im],
                })
                .collect(),
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoundaryTable {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = BoundaryRaw::deserialize(de)?;
        let mut table = BoundaryTable::new(raw.d);
        for e in raw.entries {
            if e.l < 1 {
                return Err(D::Error::custom("mode index l must be >= 1"));
            }
            table.insert(e.j, ModeIndex::new(e.k, e.l), Complex64::new(e.v[0], e.v[1]));
        }
        Ok(table)
    }
}

/// Outcome of the admissibility check: which entries sit at circle
/// frequencies a boundary trace cannot carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RieszReport {
    pub admissible: bool,
    pub violations: Vec<(i64, ModeIndex)>,
}

impl std::fmt::Display for RieszReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.admissible {
            write!(f, "admissible")
        } else {
            write!(f, "{} entries off the ladder j = k, k+2, ...:", self.violations.len())?;
            for (j, mode) in self.violations.iter().take(8) {
                write!(f, " (j={j}, mode {mode})")?;
            }
            if self.violations.len() > 8 {
                write!(f, " ...")?;
            }
            Ok(())
        }
    }
}

/// Norm `sqrt(sum |c_{k,l;j}|^2)` of a coefficient table.
///
/// Infinite for generator-backed tables whose declared tail diverges.
pub fn hardy_norm(t: &AlmansiTable) -> f64 {
    if t.tail_norm().is_infinite() {
        return f64::INFINITY;
    }
    let mut sq = Vec::new();
    for coeffs in t.entries().values() {
        sq.extend(coeffs.iter().map(|c| c.norm_sqr()));
    }
    pairwise_sum(&sq).sqrt()
}

/// Norm at truncation together with the certified tail bound carried by the
/// table (0 for exact tables).
pub fn hardy_norm_certified(t: &AlmansiTable) -> (f64, f64) {
    (hardy_norm(t), t.tail_norm())
}

/// Norm of the table rescaled to the ball of radius `rho`:
/// `sqrt(sum |c|^2 rho^(2(k+2j)))`.
pub fn hardy_norm_scaled(t: &AlmansiTable, rho: f64) -> f64 {
    let mut sq = Vec::new();
    for (mode, coeffs) in t.entries() {
        for (j, c) in coeffs.iter().enumerate() {
            sq.push(c.norm_sqr() * rho.powi(2 * (mode.k + 2 * j) as i32));
        }
    }
    pairwise_sum(&sq).sqrt()
}

/// Coefficient-form inner product `sum c1 * conj(c2)`. Equals the limit of
/// the boundary integral `(1/2pi) int int f gbar` as the radius tends to 1.
pub fn inner_product(a: &AlmansiTable, b: &AlmansiTable) -> Result<Complex64> {
    if a.d() != b.d() {
        return Err(Error::Domain(format!(
            "inner product between d={} and d={} tables",
            a.d(),
            b.d()
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (mode, coeffs) in a.entries() {
        for (j, c) in coeffs.iter().enumerate() {
            let other = b.coefficient(*mode, j);
            acc += c * other.conj();
        }
    }
    Ok(acc)
}

/// Boundary trace: coefficient `c_{k,l;m}` becomes the Fourier coefficient
/// at circle frequency `j = k + 2m` of mode `(k, l)`. Admissible by
/// construction.
pub fn boundary_trace(t: &AlmansiTable) -> BoundaryTable {
    let mut out = BoundaryTable::new(t.d());
    for (mode, coeffs) in t.entries() {
        for (m, &c) in coeffs.iter().enumerate() {
            if c != Complex64::new(0.0, 0.0) {
                out.insert((mode.k + 2 * m) as i64, *mode, c);
            }
        }
    }
    out
}

/// Check that every nonzero boundary entry sits on the ladder
/// `j in {k, k+2, k+4, ...}` of its mode.
pub fn check_riesz(b: &BoundaryTable) -> RieszReport {
    let mut violations = Vec::new();
    for &(j, mode) in b.entries().keys() {
        let on_ladder = j >= mode.k as i64 && (j - mode.k as i64) % 2 == 0;
        if !on_ladder {
            violations.push((j, mode));
        }
    }
    RieszReport {
        admissible: violations.is_empty(),
        violations,
    }
}

/// Reconstruct the interior table with the given boundary trace. Inverse of
/// [`boundary_trace`] on admissible tables; inadmissible input is rejected
/// with the violation report attached.
pub fn solve_dirichlet_l2(b: &BoundaryTable) -> Result<AlmansiTable> {
    let report = check_riesz(b);
    if !report.admissible {
        return Err(Error::Inadmissible(report));
    }
    let mut per_mode: BTreeMap<ModeIndex, Vec<(usize, Complex64)>> = BTreeMap::new();
    for (&(j, mode), &v) in b.entries() {
        let m = ((j - mode.k as i64) / 2) as usize;
        per_mode.entry(mode).or_default().push((m, v));
    }
    let mut out = AlmansiTable::new(b.d());
    for (mode, slots) in per_mode {
        let len = slots.iter().map(|(m, _)| m + 1).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        for (m, v) in slots {
            coeffs[m] = v;
        }
        out.set_mode(mode, coeffs)?;
    }
    Ok(out)
}

/// Certified sup bound on |f| over `|z| <= q`: `(1-q)^(-d) ||f||`, including
/// the table's certified tail mass when present.
pub fn max_principle_bound(t: &AlmansiTable, q: f64) -> Result<f64> {
    if !(0.0 < q && q < 1.0) {
        return Err(Error::Domain(format!("q must lie in (0, 1), got {q}")));
    }
    let (norm, tail) = hardy_norm_certified(t);
    let total = (norm * norm + tail * tail).sqrt();
    Ok((1.0 - q).powi(-(t.d() as i32)) * total)
}
