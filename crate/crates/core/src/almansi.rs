//! Coefficient tables for the per-mode expansion
//! `f(z, theta) = sum_{k,l,j} c_{k,l;j} z^(k+2j) Y_{k,l}(theta)`, and the
//! conversions into them: decomposition of multivariate polynomials and
//! spherical projection of sampled functions.
//!
//! A table is well defined on the quadric (`(z, theta)` and `(-z, -theta)`
//! give the same value) because every term has even total parity.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::sphere::{
    build_sphere_rule, eval_harmonics_up_to, harmonic_dimension, ModeIndex, SphereRule,
};
use crate::util::{cpow, newton_to_monomial, pairwise_sum};
use crate::{Error, Result};

/// Hard cap on the total degree accepted by [`gauss_decompose`].
const MAX_DECOMPOSE_DEGREE: usize = 64;

/// A multivariate polynomial `sum_alpha c_alpha x^alpha` in `d` variables.
#[derive(Debug, Clone)]
pub struct MultiPoly {
    d: usize,
    terms: BTreeMap<Vec<usize>, Complex64>,
}

impl MultiPoly {
    pub fn new(d: usize) -> Self {
        MultiPoly {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Add `c * x^alpha` to the polynomial.
    pub fn add_term(&mut self, alpha: &[usize], c: Complex64) -> Result<()> {
        if alpha.len() != self.d {
            return Err(Error::Domain(format!(
                "exponent vector has {} entries, expected {}",
                alpha.len(),
                self.d
            )));
        }
        let entry = self
            .terms
            .entry(alpha.to_vec())
            .or_insert_with(|| Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(alpha);
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|alpha| alpha.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (alpha, c) in &self.terms {
            let mut mono = 1.0;
            for (&a, &xi) in alpha.iter().zip(x) {
                mono *= xi.powi(a as i32);
            }
            acc += c * mono;
        }
        acc
    }

    /// Largest coefficient magnitude; 0 for the zero polynomial.
    pub fn coefficient_scale(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct PolyTermRaw {
    alpha: Vec<usize>,
    c: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct PolyRaw {
    d: usize,
    terms: Vec<PolyTermRaw>,
}

impl Serialize for MultiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRaw {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(alpha, c)| PolyTermRaw {
                    alpha: alpha.clone(),
                    c: [c.re, c.im],
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyRaw::deserialize(de)?;
        let mut poly = MultiPoly::new(raw.d);
        for term in raw.terms {
            poly.add_term(&term.alpha, Complex64::new(term.c[0], term.c[1]))
                .map_err(D::Error::custom)?;
        }
        Ok(poly)
    }
}

/// Sparse coefficient table: mode `(k, l)` maps to the vector
/// `[c_{k,l;0}, c_{k,l;1}, ...]` of coefficients of `z^(k+2j)`.
///
/// `tail_norm` is a certified bound on the l2 mass of coefficients dropped
/// when the table was truncated from an infinite expansion; it is 0 for
/// tables that are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmansiTable {
    d: usize,
    entries: BTreeMap<ModeIndex, Vec<Complex64>>,
    tail_norm: f64,
}

/// Generator interface for tables with infinitely many coefficients. The
/// implementor supplies the coefficients and a certified bound on what a
/// truncation leaves out.
pub trait CoefficientGenerator {
    fn d(&self) -> usize;
    /// Coefficient `c_{k,l;j}`.
    fn coefficient(&self, mode: ModeIndex, j: usize) -> Complex64;
    /// Upper bound on `sqrt(sum |c|^2)` over all `(k, l, j)` with `k > k_max`
    /// or `j > j_max`. May be infinite when the expansion does not converge.
    fn tail_norm(&self, k_max: usize, j_max: usize) -> f64;
}

impl AlmansiTable {
    pub fn new(d: usize) -> Self {
        AlmansiTable {
            d,
            entries: BTreeMap::new(),
            tail_norm: 0.0,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &BTreeMap<ModeIndex, Vec<Complex64>> {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Certified l2 bound on coefficients lost to truncation (0 when exact).
    pub fn tail_norm(&self) -> f64 {
        self.tail_norm
    }

    /// Replace the coefficient vector of one mode. Trailing exact zeros are
    /// kept as given; an empty vector removes the mode.
    pub fn set_mode(&mut self, mode: ModeIndex, coeffs: Vec<Complex64>) -> Result<()> {
        let a_k = harmonic_dimension(self.d, mode.k)?;
        if mode.ell < 1 || mode.ell > a_k {
            return Err(Error::Domain(format!(
                "mode {mode} out of range for d={}",
                self.d
            )));
        }
        if coeffs.is_empty() {
            self.entries.remove(&mode);
        } else {
            self.entries.insert(mode, coeffs);
        }
        Ok(())
    }

    pub fn coefficient(&self, mode: ModeIndex, j: usize) -> Complex64 {
        self.entries
            .get(&mode)
            .and_then(|v| v.get(j))
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Largest harmonic degree present.
    pub fn max_k(&self) -> usize {
        self.entries.keys().map(|m| m.k).max().unwrap_or(0)
    }

    /// Largest power `k + 2j` carried by any stored coefficient.
    pub fn max_power(&self) -> usize {
        self.entries
            .iter()
            .map(|(m, v)| m.k + 2 * v.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    /// l2 norm of one mode's coefficient vector.
    pub fn mode_norm(&self, mode: ModeIndex) -> f64 {
        match self.entries.get(&mode) {
            None => 0.0,
            Some(v) => {
                let sq: Vec<f64> = v.iter().map(|c| c.norm_sqr()).collect();
                pairwise_sum(&sq).sqrt()
            }
        }
    }

    /// Radial profile `f_{k,l}(r) = sum_j c_j r^(k+2j)` of one mode (the
    /// spherical projection of `f` at radius `r`).
    pub fn mode_radial(&self, mode: ModeIndex, r: Complex64) -> Complex64 {
        self.mode_even_part(mode, r * r) * cpow(r, mode.k)
    }

    /// The even factor `g_{k,l}(s) = sum_j c_j s^j` with `s = z^2`, so that
    /// `f_{k,l}(z) = g_{k,l}(z^2) z^k`.
    pub fn mode_even_part(&self, mode: ModeIndex, s: Complex64) -> Complex64 {
        match self.entries.get(&mode) {
            None => Complex64::new(0.0, 0.0),
            Some(coeffs) => {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut pow = Complex64::new(1.0, 0.0);
                for &c in coeffs {
                    acc += c * pow;
                    pow *= s;
                }
                acc
            }
        }
    }

    /// In-place `self += a * other`. Modes are merged; dimensions must agree.
    pub fn axpy(&mut self, a: Complex64, other: &AlmansiTable) -> Result<()> {
        if self.d != other.d {
            return Err(Error::Domain("dimension mismatch in axpy".to_string()));
        }
        for (mode, coeffs) in &other.entries {
            let slot = self.entries.entry(*mode).or_default();
            if slot.len() < coeffs.len() {
                slot.resize(coeffs.len(), Complex64::new(0.0, 0.0));
            }
            for (dst, &src) in slot.iter_mut().zip(coeffs) {
                *dst += a * src;
            }
        }
        self.tail_norm += a.norm() * other.tail_norm;
        Ok(())
    }

    pub fn scaled(&self, a: Complex64) -> AlmansiTable {
        let mut out = self.clone();
        for coeffs in out.entries.values_mut() {
            for c in coeffs.iter_mut() {
                *c *= a;
            }
        }
        out.tail_norm *= a.norm();
        out
    }

    /// Truncate a generator-backed expansion to `k <= k_max`, `j <= j_max`,
    /// recording the generator's certified tail bound on the result.
    pub fn from_generator(
        gen: &dyn CoefficientGenerator,
        k_max: usize,
        j_max: usize,
    ) -> Result<AlmansiTable> {
        let d = gen.d();
        let mut table = AlmansiTable::new(d);
        for k in 0..=k_max {
            let a_k = harmonic_dimension(d, k)?;
            for ell in 1..=a_k {
                let mode = ModeIndex::new(k, ell);
                let mut coeffs = vec![Complex64::new(0.0, 0.0); j_max + 1];
                let mut any = false;
                for (j, c) in coeffs.iter_mut().enumerate() {
                    *c = gen.coefficient(mode, j);
                    any |= *c != Complex64::new(0.0, 0.0);
                }
                if any {
                    table.entries.insert(mode, coeffs);
                }
            }
        }
        table.tail_norm = gen.tail_norm(k_max, j_max);
        Ok(table)
    }

    /// Value of the series at an interior point of the quadric ball.
    ///
    /// The sum runs over modes in increasing `(k, l)` order and over `j`
    /// ascending inside each mode, so results are reproducible bit for bit.
    pub fn evaluate(&self, z: Complex64, theta: &[f64]) -> Result<Complex64> {
        if z.norm() >= 1.0 {
            return Err(Error::Domain(format!(
                "evaluation needs |z| < 1 (got {}); take the boundary trace for |z| = 1",
                z.norm()
            )));
        }
        let harmonics = eval_harmonics_up_to(self.d, self.max_k(), theta)?;
        let z2 = z * z;
        let mut acc = Complex64::new(0.0, 0.0);
        for (mode, coeffs) in &self.entries {
            let y = harmonics[mode.k][mode.ell - 1];
            let zk = cpow(z, mode.k);
            let mut radial = Complex64::new(0.0, 0.0);
            let mut pow = Complex64::new(1.0, 0.0);
            for &c in coeffs {
                radial += c * pow;
                pow *= z2;
            }
            acc += radial * zk * y;
        }
        Ok(acc)
    }

    /// Like [`evaluate`](Self::evaluate) but also returns a certified sup
    /// bound on the contribution of the truncated tail at this point
    /// (`(1 - |z|)^(-d) * tail_norm`, from the interior sup estimate).
    pub fn evaluate_certified(&self, z: Complex64, theta: &[f64]) -> Result<(Complex64, f64)> {
        let value = self.evaluate(z, theta)?;
        let bound = if self.tail_norm == 0.0 {
            0.0
        } else {
            (1.0 - z.norm()).powi(-(self.d as i32)) * self.tail_norm
        };
        Ok((value, bound))
    }
}

#[derive(Serialize, Deserialize)]
struct TableModeRaw {
    k: usize,
    l: usize,
    coeffs: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct TableRaw {
    d: usize,
    modes: Vec<TableModeRaw>,
}

impl Serialize for AlmansiTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = TableRaw {
            d: self.d,
            modes: self
                .entries
                .iter()
                .map(|(mode, coeffs)| TableModeRaw {
                    k: mode.k,
                    l: mode.ell,
                    coeffs: coeffs.iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect(),
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlmansiTable {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = TableRaw::deserialize(de)?;
        let mut table = AlmansiTable::new(raw.d);
        for m in raw.modes {
            let coeffs = m
                .coeffs
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect();
            table
                .set_mode(ModeIndex::new(m.k, m.l), coeffs)
                .map_err(D::Error::custom)?;
        }
        Ok(table)
    }
}

/// Result of a polynomial decomposition: the coefficient table together
/// with the residual measured on an independent verification grid
/// (max |p - table| / max(1, sup |p|)).
#[derive(Debug, Clone)]
pub struct GaussDecomposition {
    pub table: AlmansiTable,
    pub residual: f64,
}

/// Decompose a multivariate polynomial into a coefficient table, so that
/// evaluating the table at real `z = r` reproduces `p(r theta)`.
///
/// The polynomial is projected onto the harmonic basis on a fixed grid of
/// radii; each mode's even radial factor is then recovered by solving the
/// square interpolation system in `s = r^2`. Larger radii are assigned to
/// higher-degree modes where the `r^-k` rescaling is most sensitive.
pub fn gauss_decompose(p: &MultiPoly) -> Result<GaussDecomposition> {
    let d = p.d();
    if !(d == 2 || d == 3) {
        return Err(Error::Capability(format!(
            "gauss_decompose needs pointwise harmonics (d in {{2, 3}}), got d={d}"
        )));
    }
    if p.is_zero() {
        return Ok(GaussDecomposition {
            table: AlmansiTable::new(d),
            residual: 0.0,
        });
    }
    let deg = p.total_degree();
    if deg > MAX_DECOMPOSE_DEGREE {
        return Err(Error::Resource(format!(
            "degree {deg} exceeds the decomposition limit {MAX_DECOMPOSE_DEGREE}"
        )));
    }
    let rule = build_sphere_rule(d, 2 * deg)?;

    // Chebyshev abscissae in s = r^2, descending so that mode k (which uses
    // the first floor((deg-k)/2)+1 radii) sees the largest ones.
    let m = deg / 2 + 1;
    let (s_lo, s_hi) = (0.25, 0.9);
    let mut s_grid = Vec::with_capacity(m);
    for i in 0..m {
        let t = if m == 1 {
            0.0
        } else {
            (std::f64::consts::PI * i as f64 / (m - 1) as f64).cos()
        };
        s_grid.push(0.5 * (s_lo + s_hi) + 0.5 * (s_hi - s_lo) * t);
    }
    let radii: Vec<f64> = s_grid.iter().map(|s| s.sqrt()).collect();

    // Project p(r theta) onto every harmonic at every radius.
    let harmonics: Vec<Vec<Vec<f64>>> = rule
        .nodes()
        .iter()
        .map(|n| eval_harmonics_up_to(d, deg, n))
        .collect::<Result<_>>()?;
    let mut projections: BTreeMap<ModeIndex, Vec<Complex64>> = BTreeMap::new();
    let mut sample_scale = 0.0f64;
    for &r in &radii {
        let samples: Vec<Complex64> = rule
            .nodes()
            .iter()
            .map(|n| {
                let x: Vec<f64> = n.iter().map(|t| t * r).collect();
                p.eval(&x)
            })
            .collect();
        for v in &samples {
            sample_scale = sample_scale.max(v.norm());
        }
        for k in 0..=deg {
            let a_k = harmonic_dimension(d, k)?;
            for ell in 1..=a_k {
                let mut acc = Complex64::new(0.0, 0.0);
                for ((sample, table), &w) in samples.iter().zip(&harmonics).zip(rule.weights()) {
                    acc += w * sample * table[k][ell - 1];
                }
                projections
                    .entry(ModeIndex::new(k, ell))
                    .or_insert_with(Vec::new)
                    .push(acc);
            }
        }
    }

    // Per mode: divide out r^k and interpolate the even factor in s = r^2.
    let noise_floor = 1e-13 * sample_scale.max(1.0);
    let mut table = AlmansiTable::new(d);
    for (mode, values) in projections {
        let j_count = (deg - mode.k) / 2 + 1;
        let sub_s = &s_grid[..j_count];
        let scaled: Vec<Complex64> = values[..j_count]
            .iter()
            .zip(&radii[..j_count])
            .map(|(v, &r)| v / r.powi(mode.k as i32))
            .collect();
        let coeffs = newton_to_monomial(sub_s, &scaled);
        if coeffs.iter().any(|c| c.norm() > noise_floor) {
            table.set_mode(mode, coeffs)?;
        }
    }

    // Residual on an independent verification grid.
    let mut residual = 0.0f64;
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    for i in 0..32 {
        let r = 0.05 + 0.9 * (i as f64 + 0.5) / 32.0;
        let ang = golden * i as f64;
        let theta: Vec<f64> = match d {
            2 => vec![ang.cos(), ang.sin()],
            _ => {
                let c: f64 = (2.0 * (i as f64 + 0.5) / 32.0 - 1.0).clamp(-1.0, 1.0);
                let s = (1.0 - c * c).sqrt();
                vec![s * ang.cos(), s * ang.sin(), c]
            }
        };
        let x: Vec<f64> = theta.iter().map(|t| t * r).collect();
        let direct = p.eval(&x);
        let via_table = table.evaluate(Complex64::new(r, 0.0), &theta)?;
        residual = residual.max((direct - via_table).norm());
    }
    residual /= sample_scale.max(1.0);

    Ok(GaussDecomposition { table, residual })
}

/// Spherical projections `f_{k,l}(r_i) = int f(r_i theta) Y_{k,l}(theta) dtheta`
/// of a sampled function, for all modes with `k <= k_max`, computed with the
/// given sphere rule at each radius.
pub fn decompose_samples<F>(
    f: F,
    d: usize,
    k_max: usize,
    radii: &[f64],
    rule: &SphereRule,
) -> Result<BTreeMap<ModeIndex, Vec<Complex64>>>
where
    F: Fn(f64, &[f64]) -> Complex64,
{
    if rule.d() != d {
        return Err(Error::Precondition(format!(
            "rule dimension {} does not match d={d}",
            rule.d()
        )));
    }
    if rule.exact_degree() < 2 * k_max {
        return Err(Error::Precondition(format!(
            "rule exact to degree {} cannot resolve modes up to k={k_max} (needs {})",
            rule.exact_degree(),
            2 * k_max
        )));
    }
    for &r in radii {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Precondition(format!(
                "radius {r} outside [0, 1)"
            )));
        }
    }
    let harmonics: Vec<Vec<Vec<f64>>> = rule
        .nodes()
        .iter()
        .map(|n| eval_harmonics_up_to(d, k_max, n))
        .collect::<Result<_>>()?;
    let mut out: BTreeMap<ModeIndex, Vec<Complex64>> = BTreeMap::new();
    for &r in radii {
        let samples: Vec<Complex64> = rule.nodes().iter().map(|n| f(r, n)).collect();
        for k in 0..=k_max {
            let a_k = harmonic_dimension(d, k)?;
            for ell in 1..=a_k {
                let mut acc = Complex64::new(0.0, 0.0);
                for ((sample, table), &w) in samples.iter().zip(&harmonics).zip(rule.weights()) {
                    acc += w * sample * table[k][ell - 1];
                }
                out.entry(ModeIndex::new(k, ell)).or_default().push(acc);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::surface_area;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_direction(d: usize, rng: &mut impl Rng) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n: f64 = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            if n > 0.1 {
                return v.into_iter().map(|t| t / n).collect();
            }
        }
    }

    fn random_poly(d: usize, deg: usize, rng: &mut impl Rng) -> MultiPoly {
        let mut p = MultiPoly::new(d);
        let alphas = all_alphas(d, deg);
        for alpha in alphas {
            if rng.random_bool(0.6) {
                p.add_term(&alpha, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .unwrap();
            }
        }
        p
    }

    fn all_alphas(d: usize, deg: usize) -> Vec<Vec<usize>> {
        fn rec(d: usize, deg: usize) -> Vec<Vec<usize>> {
            if d == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for first in 0..=deg {
                for rest in rec(d - 1, deg - first) {
                    let mut alpha = vec![first];
                    alpha.extend(rest);
                    out.push(alpha);
                }
            }
            out
        }
        rec(d, deg)
    }

    #[test]
    fn constant_polynomial_decomposes_to_constant_mode() {
        let mut p = MultiPoly::new(2);
        p.add_term(&[0, 0], c(1.0, 0.0)).unwrap();
        let dec = gauss_decompose(&p).unwrap();
        assert_eq!(dec.table.entries().len(), 1);
        let coeffs = &dec.table.entries()[&ModeIndex::new(0, 1)];
        assert_eq!(coeffs.len(), 1);
        assert!((coeffs[0] - c((2.0 * PI).sqrt(), 0.0)).norm() < 1e-12);
        assert!(dec.residual < 1e-12);
    }

    #[test]
    fn radius_squared_decomposes_on_the_constant_mode() {
        // |x|^2 in d=2 is sqrt(2 pi) * r^2 * Y_{0,1}
        let mut p = MultiPoly::new(2);
        p.add_term(&[2, 0], c(1.0, 0.0)).unwrap();
        p.add_term(&[0, 2], c(1.0, 0.0)).unwrap();
        let dec = gauss_decompose(&p).unwrap();
        assert_eq!(dec.table.entries().len(), 1);
        let coeffs = &dec.table.entries()[&ModeIndex::new(0, 1)];
        assert!(coeffs[0].norm() < 1e-12);
        assert!((coeffs[1] - c((2.0 * PI).sqrt(), 0.0)).norm() < 1e-11);
    }

    #[test]
    fn cross_term_lands_on_the_sine_mode() {
        // x1 x2 = r^2 sin(2 phi)/2 = (sqrt(pi)/2) r^2 Y_{2,2}
        let mut p = MultiPoly::new(2);
        p.add_term(&[1, 1], c(1.0, 0.0)).unwrap();
        let dec = gauss_decompose(&p).unwrap();
        assert_eq!(dec.table.entries().len(), 1);
        let coeffs = &dec.table.entries()[&ModeIndex::new(2, 2)];
        assert!((coeffs[0] - c(PI.sqrt() / 2.0, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn decomposition_respects_degree_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2usize, 3] {
            let p = random_poly(d, 7, &mut rng);
            let deg = p.total_degree();
            let dec = gauss_decompose(&p).unwrap();
            for (mode, coeffs) in dec.table.entries() {
                assert!(mode.k <= deg);
                assert!(
                    coeffs.len() <= (deg - mode.k) / 2 + 1,
                    "mode {mode} has {} coefficients for degree {deg}",
                    coeffs.len()
                );
            }
        }
    }

    #[test]
    fn roundtrip_reproduces_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 3] {
            for _ in 0..3 {
                let p = random_poly(d, 8, &mut rng);
                let dec = gauss_decompose(&p).unwrap();
                let scale = p.coefficient_scale().max(1.0);
                for _ in 0..100 {
                    let r: f64 = rng.random_range(0.0..0.98);
                    let theta = random_direction(d, &mut rng);
                    let x: Vec<f64> = theta.iter().map(|t| t * r).collect();
                    let direct = p.eval(&x);
                    let via = dec.table.evaluate(c(r, 0.0), &theta).unwrap();
                    assert!(
                        (direct - via).norm() < 1e-10 * scale,
                        "d={d}, r={r}: |diff| = {:e}",
                        (direct - via).norm()
                    );
                }
            }
        }
    }

    #[test]
    fn single_basis_element_evaluates_directly() {
        let mut t = AlmansiTable::new(2);
        t.set_mode(ModeIndex::new(3, 2), vec![c(1.0, 0.0)]).unwrap();
        let z = c(0.3, 0.2);
        let phi = 1.1f64;
        let theta = [phi.cos(), phi.sin()];
        let want = cpow(z, 3) * (3.0 * phi).sin() / PI.sqrt();
        assert!((t.evaluate(z, &theta).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn evaluation_rejects_boundary_points() {
        let mut t = AlmansiTable::new(2);
        t.set_mode(ModeIndex::new(0, 1), vec![c(1.0, 0.0)]).unwrap();
        assert!(t.evaluate(c(1.0, 0.0), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn projection_of_basis_function_is_orthonormal() {
        // f = r^2 Y_{2,1}: its own mode projects to r^2, everything else to 0
        let d = 2;
        let rule = build_sphere_rule(d, 8).unwrap();
        let f = |r: f64, theta: &[f64]| {
            let y = crate::sphere::eval_harmonic(d, ModeIndex::new(2, 1), theta).unwrap();
            c(r * r * y, 0.0)
        };
        let radii = [0.2, 0.5, 0.8];
        let table = decompose_samples(f, d, 4, &radii, &rule).unwrap();
        for (mode, values) in &table {
            for (i, v) in values.iter().enumerate() {
                let want = if *mode == ModeIndex::new(2, 1) {
                    radii[i] * radii[i]
                } else {
                    0.0
                };
                assert!((v - c(want, 0.0)).norm() < 1e-12, "mode {mode}");
            }
        }
    }

    #[test]
    fn projection_of_one_is_sqrt_surface() {
        for d in [2usize, 3] {
            let rule = build_sphere_rule(d, 6).unwrap();
            let table =
                decompose_samples(|_, _| c(1.0, 0.0), d, 3, &[0.4], &rule).unwrap();
            let v = table[&ModeIndex::new(0, 1)][0];
            assert!((v - c(surface_area(d).sqrt(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_is_linear() {
        let d = 2;
        let rule = build_sphere_rule(d, 10).unwrap();
        let f = |r: f64, theta: &[f64]| {
            let y1 = crate::sphere::eval_harmonic(d, ModeIndex::new(1, 1), theta).unwrap();
            let y4 = crate::sphere::eval_harmonic(d, ModeIndex::new(4, 2), theta).unwrap();
            c(2.0 * r * y1 - 0.5 * r.powi(4) * y4, 0.0)
        };
        let table = decompose_samples(f, d, 5, &[0.7], &rule).unwrap();
        let mut nonzero = 0;
        for (mode, values) in &table {
            if values[0].norm() > 1e-12 {
                nonzero += 1;
                assert!(*mode == ModeIndex::new(1, 1) || *mode == ModeIndex::new(4, 2));
            }
        }
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn insufficient_rule_degree_is_rejected() {
        let rule = build_sphere_rule(2, 4).unwrap();
        let res = decompose_samples(|_, _| c(1.0, 0.0), 2, 3, &[0.5], &rule);
        assert!(matches!(res, Err(Error::Precondition(_))));
    }

    /// Applying the five-point Laplacian stencil N times to a table whose
    /// mode degrees are all < N must leave only the O(h^2) truncation term.
    #[test]
    fn iterated_laplacian_residual_shrinks_quadratically() {
        let n = 2usize;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut t = AlmansiTable::new(2);
        // degree must be high enough that the 2(n+1)-th derivatives driving
        // the O(h^2) term do not vanish identically
        for k in 0..=7 {
            for ell in 1..=harmonic_dimension(2, k).unwrap() {
                let coeffs: Vec<Complex64> = (0..n)
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                t.set_mode(ModeIndex::new(k, ell), coeffs).unwrap();
            }
        }
        let center = [0.31, 0.22];
        let eval_at = |x: f64, y: f64| -> f64 {
            let r = (x * x + y * y).sqrt();
            let theta = [x / r, y / r];
            t.evaluate(c(r, 0.0), &theta).unwrap().re
        };
        let residual = |h: f64| -> f64 {
            let span = 2 * n + 1;
            let mut grid = vec![vec![0.0f64; span]; span];
            for (i, row) in grid.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    let x = center[0] + (i as f64 - n as f64) * h;
                    let y = center[1] + (j as f64 - n as f64) * h;
                    *v = eval_at(x, y);
                }
            }
            for _ in 0..n {
                let m = grid.len();
                let mut next = vec![vec![0.0f64; m - 2]; m - 2];
                for i in 1..m - 1 {
                    for j in 1..m - 1 {
                        next[i - 1][j - 1] = (grid[i + 1][j]
                            + grid[i - 1][j]
                            + grid[i][j + 1]
                            + grid[i][j - 1]
                            - 4.0 * grid[i][j])
                            / (h * h);
                    }
                }
                grid = next;
            }
            grid[0][0].abs()
        };
        let r1 = residual(0.02);
        let r2 = residual(0.01);
        assert!(r2 < r1, "no decay: {r1} then {r2}");
        let ratio = r1 / r2;
        assert!((2.5..6.0).contains(&ratio), "O(h^2) ratio was {ratio}");
    }

    struct GeometricGen {
        d: usize,
    }

    impl CoefficientGenerator for GeometricGen {
        fn d(&self) -> usize {
            self.d
        }
        fn coefficient(&self, mode: ModeIndex, j: usize) -> Complex64 {
            if mode.ell != 1 {
                return c(0.0, 0.0);
            }
            c(0.5f64.powi((mode.k + 2 * j) as i32 + 1), 0.0)
        }
        fn tail_norm(&self, k_max: usize, j_max: usize) -> f64 {
            // coefficients are 2^-(k+2j+1) on l=1 modes; crude geometric bound
            let mut sq = 0.0;
            for k in 0..200 {
                for j in 0..200 {
                    if k <= k_max && j <= j_max {
                        continue;
                    }
                    sq += 0.25f64.powi((k + 2 * j) as i32 + 1);
                }
            }
            sq.sqrt()
        }
    }

    #[test]
    fn generator_truncation_certifies_its_tail() {
        let gen = GeometricGen { d: 2 };
        let coarse = AlmansiTable::from_generator(&gen, 3, 3).unwrap();
        let fine = AlmansiTable::from_generator(&gen, 40, 40).unwrap();
        let z = c(0.4, 0.1);
        let theta = [0.8, 0.6];
        let (coarse_val, bound) = coarse.evaluate_certified(z, &theta).unwrap();
        let fine_val = fine.evaluate(z, &theta).unwrap();
        let actual_gap = (fine_val - coarse_val).norm();
        assert!(bound > 0.0);
        assert!(actual_gap <= bound, "gap {actual_gap} exceeds bound {bound}");
    }

    #[test]
    fn table_serde_schema() {
        let mut t = AlmansiTable::new(2);
        t.set_mode(ModeIndex::new(1, 2), vec![c(0.5, -1.0), c(0.0, 0.25)])
            .unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(
            v,
            serde_json::json!({
                "d": 2,
                "modes": [{"k": 1, "l": 2, "coeffs": [[0.5, -1.0], [0.0, 0.25]]}]
            })
        );
        let back: AlmansiTable = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Quadric well-definedness: the series takes equal values at
        /// (z, theta) and (-z, -theta).
        #[test]
        fn z2_invariance(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = if rng.random_bool(0.5) { 2 } else { 3 };
            let mut t = AlmansiTable::new(d);
            for _ in 0..6 {
                let k = rng.random_range(0..6usize);
                let a_k = harmonic_dimension(d, k).unwrap();
                let ell = rng.random_range(1..=a_k);
                let coeffs: Vec<Complex64> = (0..rng.random_range(1..4usize))
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                t.set_mode(ModeIndex::new(k, ell), coeffs).unwrap();
            }
            let z = c(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7));
            let theta = random_direction(d, &mut rng);
            let minus: Vec<f64> = theta.iter().map(|x| -x).collect();
            let a = t.evaluate(z, &theta).unwrap();
            let b = t.evaluate(-z, &minus).unwrap();
            prop_assert!((a - b).norm() < 1e-13);
        }
    }
}
