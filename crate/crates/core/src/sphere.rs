//! Spherical-harmonic bases, zonal and Gegenbauer functions, and quadrature
//! rules on the unit sphere `S^(d-1)`.
//!
//! The basis is fixed once and for all:
//!
//! * `d = 2`: `Y_{0,1} = 1/sqrt(2 pi)`, and for `k >= 1`
//!   `Y_{k,1} = cos(k phi)/sqrt(pi)`, `Y_{k,2} = sin(k phi)/sqrt(pi)`;
//! * `d = 3`: real fully normalized spherical harmonics built from
//!   associated-Legendre recurrences, with `l = m + k + 1` for the order
//!   `m in -k..=k`.
//!
//! Both are orthonormal with respect to the (unnormalized) surface measure.
//! Pointwise evaluation is implemented for `d in {2, 3}` only; dimension
//! counts, Gegenbauer polynomials and zonal functions work for every
//! `d >= 2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::util::{binomial_u128, gauss_legendre};
use crate::{Error, Result};

/// A spherical-harmonic mode `(k, l)`: degree `k >= 0` and position
/// `1 <= l <= harmonic_dimension(d, k)` inside the degree-k eigenspace.
/// This is the addressing scheme for all per-mode data in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub k: usize,
    #[serde(rename = "l")]
    pub ell: usize,
}

impl ModeIndex {
    pub fn new(k: usize, ell: usize) -> Self {
        ModeIndex { k, ell }
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.k, self.ell)
    }
}

/// Surface area of the unit sphere `S^(d-1)`.
///
/// `omega_1 = 2` (counting measure on two points), `omega_2 = 2 pi`,
/// `omega_d = 2 pi omega_{d-2} / (d - 2)`.
pub fn surface_area(d: usize) -> f64 {
    assert!(d >= 1, "surface_area needs d >= 1");
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * surface_area(d - 2) / (d - 2) as f64,
    }
}

/// Dimension `a_k` of the space of harmonic homogeneous polynomials of
/// degree `k` in `d` variables: `C(k+d-1, d-1) - C(k+d-3, d-1)`.
pub fn harmonic_dimension(d: usize, k: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::Domain(format!(
            "harmonic_dimension needs d >= 2, got {d}"
        )));
    }
    let full = binomial_u128((k + d - 1) as u64, (d - 1) as u64);
    let lower = if k >= 2 {
        binomial_u128((k + d - 3) as u64, (d - 1) as u64)
    } else {
        0
    };
    usize::try_from(full - lower)
        .map_err(|_| Error::Resource(format!("harmonic dimension overflows for d={d}, k={k}")))
}

fn check_unit_vector(d: usize, theta: &[f64]) -> Result<()> {
    if theta.len() != d {
        return Err(Error::Domain(format!(
            "direction has {} coordinates, expected {d}",
            theta.len()
        )));
    }
    let norm2: f64 = theta.iter().map(|t| t * t).sum();
    if (norm2.sqrt() - 1.0).abs() > 1e-8 {
        return Err(Error::Domain(format!(
            "direction is not on the unit sphere (|theta| = {})",
            norm2.sqrt()
        )));
    }
    Ok(())
}

/// All basis values `Y_{k,l}(theta)` for `k <= k_max`, indexed `[k][l-1]`.
///
/// One recurrence sweep; prefer this over repeated [`eval_harmonic`] calls
/// when a whole table of modes is needed at the same point.
pub fn eval_harmonics_up_to(d: usize, k_max: usize, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_unit_vector(d, theta)?;
    match d {
        2 => {
            let phi = theta[1].atan2(theta[0]);
            let inv_sqrt_pi = 1.0 / PI.sqrt();
            let mut out = Vec::with_capacity(k_max + 1);
            out.push(vec![1.0 / (2.0 * PI).sqrt()]);
            for k in 1..=k_max {
                let a = k as f64 * phi;
                out.push(vec![a.cos() * inv_sqrt_pi, a.sin() * inv_sqrt_pi]);
            }
            Ok(out)
        }
        3 => {
            let c = theta[2].clamp(-1.0, 1.0);
            let s = (theta[0] * theta[0] + theta[1] * theta[1]).sqrt();
            let phi = theta[1].atan2(theta[0]);
            let pbar = normalized_legendre_table(k_max, c, s);
            let sqrt2 = std::f64::consts::SQRT_2;
            let mut out = Vec::with_capacity(k_max + 1);
            for k in 0..=k_max {
                let mut row = vec![0.0; 2 * k + 1];
                for (ell0, slot) in row.iter_mut().enumerate() {
                    let m = ell0 as isize - k as isize;
                    *slot = if m == 0 {
                        pbar[k][0]
                    } else if m > 0 {
                        sqrt2 * pbar[k][m as usize] * (m as f64 * phi).cos()
                    } else {
                        let ma = (-m) as usize;
                        sqrt2 * pbar[k][ma] * (ma as f64 * phi).sin()
                    };
                }
                out.push(row);
            }
            Ok(out)
        }
        _ => Err(Error::Capability(format!(
            "pointwise harmonics are implemented for d in {{2, 3}}, got d={d}"
        ))),
    }
}

/// Fully normalized associated Legendre values `Pbar_k^m(c)` for
/// `0 <= m <= k <= k_max`, including the `sqrt((2k+1)/(4 pi) (k-m)!/(k+m)!)`
/// factor, with `s = sqrt(1 - c^2)`.
fn normalized_legendre_table(k_max: usize, c: f64, s: f64) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; k_max + 1]; k_max + 1];
    p[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=k_max {
        let mf = m as f64;
        p[m][m] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..k_max {
        p[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * c * p[m][m];
    }
    for m in 0..=k_max {
        for k in m + 2..=k_max {
            let kf = k as f64;
            let mf = m as f64;
            let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
            let b = (((kf - 1.0) * (kf - 1.0) - mf * mf)
                / (4.0 * (kf - 1.0) * (kf - 1.0) - 1.0))
                .sqrt();
            p[k][m] = a * (c * p[k - 1][m] - b * p[k - 2][m]);
        }
    }
    p
}

/// Value of the real orthonormal harmonic `Y_{k,l}(theta)`.
pub fn eval_harmonic(d: usize, mode: ModeIndex, theta: &[f64]) -> Result<f64> {
    let a_k = harmonic_dimension(d, mode.k)?;
    if mode.ell < 1 || mode.ell > a_k {
        return Err(Error::Domain(format!(
            "mode {mode} out of range: l must lie in 1..={a_k} for d={d}"
        )));
    }
    let table = eval_harmonics_up_to(d, mode.k, theta)?;
    Ok(table[mode.k][mode.ell - 1])
}

/// Gegenbauer (ultraspherical) polynomial `P_k^lambda(t)` normalized by the
/// generating function `(1 - 2 t w + w^2)^(-lambda) = sum_k P_k^lambda(t) w^k`.
pub fn eval_gegenbauer(lambda: f64, k: usize, t: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [-1, 1], got {t}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * lambda * t;
    for n in 2..=k {
        let nf = n as f64;
        let next = (2.0 * (nf - 1.0 + lambda) * t * cur - (nf - 2.0 + 2.0 * lambda) * prev) / nf;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Zonal sum `sum_l Y_{k,l}(theta) Y_{k,l}(theta')` as a function of
/// `c = <theta, theta'>`. Works for every `d >= 2`; no pointwise basis is
/// involved.
pub fn eval_zonal(d: usize, k: usize, c: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("eval_zonal needs d >= 2, got {d}")));
    }
    if c.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("cosine {c} outside [-1, 1]")));
    }
    let c = c.clamp(-1.0, 1.0);
    if d == 2 {
        return Ok(if k == 0 {
            1.0 / (2.0 * PI)
        } else {
            (k as f64 * c.acos()).cos() / PI
        });
    }
    let lambda = (d as f64 - 2.0) / 2.0;
    let scale = (2.0 * k as f64 + d as f64 - 2.0) / ((d as f64 - 2.0) * surface_area(d));
    Ok(scale * eval_gegenbauer(lambda, k, c)?)
}

/// Quadrature rule on `S^(d-1)` exact for products of harmonics whose total
/// degree does not exceed `exact_degree`.
#[derive(Debug, Clone, Serialize)]
pub struct SphereRule {
    d: usize,
    exact_degree: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Rebuild from parts (typically deserialized JSON), re-validating the
    /// structural invariants.
    pub fn from_parts(
        d: usize,
        exact_degree: usize,
        nodes: Vec<Vec<f64>>,
        weights: Vec<f64>,
    ) -> Result<SphereRule> {
        let rule = SphereRule {
            d,
            exact_degree,
            nodes,
            weights,
        };
        rule.validate()?;
        Ok(rule)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() {
            return Err(Error::Domain(
                "node and weight counts differ".to_string(),
            ));
        }
        let total: f64 = crate::util::pairwise_sum(&self.weights);
        let omega = surface_area(self.d);
        if ((total - omega) / omega).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "weights sum to {total}, expected the sphere surface {omega}"
            )));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.len() != self.d {
                return Err(Error::Domain(format!("node {i} has wrong dimension")));
            }
            let norm: f64 = node.iter().map(|t| t * t).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-14 {
                return Err(Error::Domain(format!(
                    "node {i} is off the sphere by {:e}",
                    (norm - 1.0).abs()
                )));
            }
            if self.weights[i] <= 0.0 {
                return Err(Error::Domain(format!("weight {i} is not positive")));
            }
        }
        Ok(())
    }

    /// Quadrature of a complex-valued integrand over the sphere.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (node, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(node);
        }
        acc
    }
}

impl<'de> Deserialize<'de> for SphereRule {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            d: usize,
            exact_degree: usize,
            nodes: Vec<Vec<f64>>,
            weights: Vec<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        SphereRule::from_parts(raw.d, raw.exact_degree, raw.nodes, raw.weights)
            .map_err(serde::de::Error::custom)
    }
}

/// Build a quadrature rule on `S^(d-1)` exact to the requested degree.
///
/// `d = 2` uses `exact_degree + 1` equispaced angles with equal weights;
/// `d = 3` uses a Gauss rule in the polar cosine crossed with equispaced
/// azimuths.
pub fn build_sphere_rule(d: usize, exact_degree: usize) -> Result<SphereRule> {
    match d {
        2 => {
            let n = exact_degree + 1;
            let w = 2.0 * PI / n as f64;
            let mut nodes = Vec::with_capacity(n);
            for i in 0..n {
                let phi = 2.0 * PI * i as f64 / n as f64;
                nodes.push(vec![phi.cos(), phi.sin()]);
            }
            SphereRule::from_parts(d, exact_degree, nodes, vec![w; n])
        }
        3 => {
            let n_polar = exact_degree / 2 + 1;
            let n_phi = exact_degree + 1;
            let (xs, ws) = gauss_legendre(n_polar);
            let w_phi = 2.0 * PI / n_phi as f64;
            let mut nodes = Vec::with_capacity(n_polar * n_phi);
            let mut weights = Vec::with_capacity(n_polar * n_phi);
            for (x, wx) in xs.iter().zip(&ws) {
                let sin_polar = (1.0 - x * x).max(0.0).sqrt();
                for i in 0..n_phi {
                    let phi = 2.0 * PI * i as f64 / n_phi as f64;
                    nodes.push(vec![sin_polar * phi.cos(), sin_polar * phi.sin(), *x]);
                    weights.push(wx * w_phi);
                }
            }
            SphereRule::from_parts(d, exact_degree, nodes, weights)
        }
        _ => Err(Error::Capability(format!(
            "sphere rules are implemented for d in {{2, 3}}, got d={d}"
        ))),
    }
}
