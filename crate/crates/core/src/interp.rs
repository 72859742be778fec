//! Per-mode radial interpolation. Each mode's even radial factor
//! `g_{k,l}(s)`, `s = z^2`, is interpolated by a degree-`N` polynomial at
//! the squared radial nodes, and the per-mode interpolants assemble into a
//! coefficient table that is polyharmonic of order `N + 1`.
//!
//! Interpolation runs in the squared variable throughout: the nodes of a
//! [`NodeSet`] are radii `r_j in [0, b]`, the abscissae are `s_j = r_j^2`.
//! Barycentric evaluation is the primary form; monomial coefficients are
//! derived from it afterwards and carry a node-residual report.
//!
//! The error machinery turns the remainder integral
//! `g(s) - p(s) = (1/2pi i) oint omega(s) g(sigma) / (omega(sigma)(sigma - s)) dsigma`
//! (contour `|sigma| = 1`) into fully explicit constants: with
//! `omega_max = prod_j (b^2 + s_j)`, `omega_min = prod_j (1 - s_j)` and
//! `|sigma - s| >= 1 - b^2`, Cauchy-Schwarz on the boundary values of `g`
//! gives `sup_{|s| <= b^2} |g - p| <= R ||g||` with
//! `R = omega_max / (omega_min (1 - b^2))`. Summing modes against
//! `b^k sup|Y_{k,l}|` yields the sup-norm majorant of
//! [`interpolation_error_bound`]; the same per-mode constant feeds the
//! cubature bound. `sup |Y_{k,l}| <= sqrt(a_k / omega_d)` by the addition
//! theorem, with equality in dimensions 2 and 3, so that factor is exact
//! rather than sampled.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::almansi::{decompose_samples, AlmansiTable};
use crate::hardy::hardy_norm;
use crate::sphere::{harmonic_dimension, surface_area, ModeIndex, SphereRule};
use crate::util::{horner, newton_to_monomial, poly_from_roots};
use crate::{Error, Result};

/// Radial interpolation nodes: a shared list of `N + 1` radii inside
/// `[0, b]`, `b < 1`, with optional per-mode overrides of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    b: f64,
    shared: Vec<f64>,
    per_mode: BTreeMap<ModeIndex, Vec<f64>>,
}

fn validate_nodes(b: f64, nodes: &[f64]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::Domain("node list is empty".to_string()));
    }
    for &r in nodes {
        if !(0.0..=b).contains(&r) {
            return Err(Error::Precondition(format!(
                "node {r} outside [0, {b}]"
            )));
        }
    }
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if (nodes[i] * nodes[i] - nodes[j] * nodes[j]).abs() < 1e-14 {
                return Err(Error::Domain(format!(
                    "nodes {} and {} have coincident squares",
                    nodes[i], nodes[j]
                )));
            }
        }
    }
    Ok(())
}

impl NodeSet {
    /// One list of radii used by every mode.
    pub fn shared(b: f64, nodes: Vec<f64>) -> Result<Self> {
        if !(0.0 < b && b < 1.0) {
            return Err(Error::Domain(format!(
                "outer radius must satisfy 0 < b < 1, got {b}"
            )));
        }
        validate_nodes(b, &nodes)?;
        Ok(NodeSet {
            b,
            shared: nodes,
            per_mode: BTreeMap::new(),
        })
    }

    /// Override the nodes of a single mode (same count as the shared list).
    pub fn set_mode_nodes(&mut self, mode: ModeIndex, nodes: Vec<f64>) -> Result<()> {
        if nodes.len() != self.shared.len() {
            return Err(Error::Domain(format!(
                "per-mode list has {} nodes, shared list has {}",
                nodes.len(),
                self.shared.len()
            )));
        }
        validate_nodes(self.b, &nodes)?;
        self.per_mode.insert(mode, nodes);
        Ok(())
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Interpolation degree N (node count minus one).
    pub fn degree(&self) -> usize {
        self.shared.len() - 1
    }

    pub fn nodes_for(&self, mode: ModeIndex) -> &[f64] {
        self.per_mode
            .get(&mode)
            .map(Vec::as_slice)
            .unwrap_or(&self.shared)
    }

    pub fn shared_nodes(&self) -> &[f64] {
        &self.shared
    }

    /// Per-mode remainder constant `omega_max / (omega_min (1 - b_eff^2))`
    /// of the doc-comment chain, with the sup taken over `|s| <= b_eff^2`.
    /// `b_eff` must cover both the node interval and the region where the
    /// bound is applied.
    pub(crate) fn remainder_constant(&self, mode: ModeIndex, b_eff: f64) -> f64 {
        let b2 = b_eff * b_eff;
        let mut omega_max = 1.0;
        let mut omega_min = 1.0;
        for &r in self.nodes_for(mode) {
            let s = r * r;
            omega_max *= b2 + s;
            omega_min *= 1.0 - s;
        }
        omega_max / (omega_min * (1.0 - b2))
    }

    /// Stability constant of the assembled interpolant,
    /// `C = Lambda / sqrt(1 - b^4)` with
    /// `Lambda = max_mode sum_j prod_{i != j} (b^2 + s_i) / |s_j - s_i|`:
    /// the norm of the output on the radius-`b` ball is at most `C` times
    /// the norm of the input.
    pub fn stability_constant(&self) -> f64 {
        let b2 = self.b * self.b;
        let lambda_of = |nodes: &[f64]| -> f64 {
            let s: Vec<f64> = nodes.iter().map(|r| r * r).collect();
            let mut lambda = 0.0;
            for j in 0..s.len() {
                let mut term = 1.0;
                for i in 0..s.len() {
                    if i != j {
                        term *= (b2 + s[i]) / (s[j] - s[i]).abs();
                    }
                }
                lambda += term;
            }
            lambda
        };
        let mut lambda = lambda_of(&self.shared);
        for nodes in self.per_mode.values() {
            lambda = lambda.max(lambda_of(nodes));
        }
        lambda / (1.0 - b2 * b2).sqrt()
    }
}

#[derive(Serialize, Deserialize)]
struct PerModeNodesRaw {
    k: usize,
    l: usize,
    nodes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NodeSetRaw {
    b: f64,
    nodes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    per_mode: Vec<PerModeNodesRaw>,
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NodeSetRaw {
            b: self.b,
            nodes: self.shared.clone(),
            per_mode: self
                .per_mode
                .iter()
                .map(|(mode, nodes)| PerModeNodesRaw {
                    k: mode.k,
                    l: mode.ell,
                    nodes: nodes.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NodeSet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = NodeSetRaw::deserialize(de)?;
        let mut ns = NodeSet::shared(raw.b, raw.nodes).map_err(D::Error::custom)?;
        for pm in raw.per_mode {
            ns.set_mode_nodes(ModeIndex::new(pm.k, pm.l), pm.nodes)
                .map_err(D::Error::custom)?;
        }
        Ok(ns)
    }
}

/// Monic polynomial vanishing exactly at the given abscissae (the squared
/// nodes, when called on a [`NodeSet`] list). Coefficients low to high.
pub fn nodal_polynomial(roots: &[f64]) -> Result<Vec<f64>> {
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).abs() < 1e-14 * (1.0 + roots[i].abs()) {
                return Err(Error::Domain(format!(
                    "duplicate roots {} and {}",
                    roots[i], roots[j]
                )));
            }
        }
    }
    Ok(poly_from_roots(roots))
}

/// One mode's interpolant in the squared variable: barycentric form (the
/// primary representation) plus monomial coefficients derived from it, with
/// the residual of the monomial form at the nodes.
#[derive(Debug, Clone)]
pub struct ModeInterpolant {
    s_nodes: Vec<f64>,
    values: Vec<Complex64>,
    bary_weights: Vec<f64>,
    monomial: Vec<Complex64>,
    residual: f64,
}

impl ModeInterpolant {
    pub fn monomial(&self) -> &[Complex64] {
        &self.monomial
    }

    /// Max |monomial(s_j) - value_j| over the nodes.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Barycentric evaluation at `s`.
    pub fn eval(&self, s: f64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for ((&sj, &vj), &wj) in self.s_nodes.iter().zip(&self.values).zip(&self.bary_weights) {
            let gap = s - sj;
            if gap.abs() < 1e-300 {
                return vj;
            }
            num += vj * (wj / gap);
            den += wj / gap;
        }
        num / den
    }
}

/// Interpolate the values `g(r_j^2)` of one mode's even radial factor at
/// the nodes (radii). Exact on polynomials of degree up to the node count
/// minus one.
pub fn interpolate_mode(values: &[Complex64], nodes: &[f64]) -> Result<ModeInterpolant> {
    if values.len() != nodes.len() {
        return Err(Error::Domain(format!(
            "{} values for {} nodes",
            values.len(),
            nodes.len()
        )));
    }
    let s_nodes: Vec<f64> = nodes.iter().map(|r| r * r).collect();
    for i in 0..s_nodes.len() {
        for j in i + 1..s_nodes.len() {
            if (s_nodes[i] - s_nodes[j]).abs() < 1e-14 {
                return Err(Error::Domain(format!(
                    "squared nodes {} and {} coincide",
                    s_nodes[i], s_nodes[j]
                )));
            }
        }
    }
    let bary_weights: Vec<f64> = (0..s_nodes.len())
        .map(|j| {
            let mut w = 1.0;
            for i in 0..s_nodes.len() {
                if i != j {
                    w /= s_nodes[j] - s_nodes[i];
                }
            }
            w
        })
        .collect();
    let monomial = newton_to_monomial(&s_nodes, values);
    let residual = s_nodes
        .iter()
        .zip(values)
        .map(|(&s, &v)| (horner(&monomial, Complex64::new(s, 0.0)) - v).norm())
        .fold(0.0, f64::max);
    Ok(ModeInterpolant {
        s_nodes,
        values: values.to_vec(),
        bary_weights,
        monomial,
        residual,
    })
}

/// Assembled interpolant with its certificates.
#[derive(Debug, Clone)]
pub struct Interpolant {
    /// Coefficient table of the interpolant; every mode vector has length
    /// at most `N + 1`, so the function is polyharmonic of order `N + 1`.
    pub table: AlmansiTable,
    /// Stability constant `C` of the node set (see
    /// [`NodeSet::stability_constant`]).
    pub stability_constant: f64,
    /// `C` times the input norm: certified bound on the output's norm over
    /// the radius-`b` ball.
    pub norm_bound: f64,
    /// Largest node residual of the monomial forms.
    pub max_node_residual: f64,
}

/// Interpolate every mode of the table with `k <= k_max` at the node set.
pub fn polyharmonic_interpolant(
    f: &AlmansiTable,
    ns: &NodeSet,
    k_max: usize,
) -> Result<Interpolant> {
    let mut table = AlmansiTable::new(f.d());
    let mut max_residual = 0.0f64;
    for (mode, _) in f.entries().iter() {
        if mode.k > k_max {
            continue;
        }
        let nodes = ns.nodes_for(*mode);
        let values: Vec<Complex64> = nodes
            .iter()
            .map(|&r| f.mode_even_part(*mode, Complex64::new(r * r, 0.0)))
            .collect();
        let interp = interpolate_mode(&values, nodes)?;
        max_residual = max_residual.max(interp.residual());
        table.set_mode(*mode, interp.monomial().to_vec())?;
    }
    let stability_constant = ns.stability_constant();
    Ok(Interpolant {
        norm_bound: stability_constant * hardy_norm(f),
        table,
        stability_constant,
        max_node_residual: max_residual,
    })
}

/// Interpolate a sampled function: its spherical projections are taken at
/// the node radii with the given rule, the `r^k` ladder factor is divided
/// out, and each mode is interpolated as in [`polyharmonic_interpolant`].
///
/// A node at `r = 0` cannot determine the even factor of a mode with
/// `k > 0` from samples; such node sets are rejected here.
pub fn polyharmonic_interpolant_sampled<F>(
    f: F,
    d: usize,
    ns: &NodeSet,
    k_max: usize,
    rule: &SphereRule,
) -> Result<Interpolant>
where
    F: Fn(f64, &[f64]) -> Complex64,
{
    if !ns.per_mode.is_empty() {
        return Err(Error::Capability(
            "sampled interpolation supports shared node sets only".to_string(),
        ));
    }
    let nodes = ns.shared_nodes();
    if k_max > 0 && nodes.iter().any(|&r| r == 0.0) {
        return Err(Error::Precondition(
            "a node at r = 0 cannot resolve modes with k > 0 from samples".to_string(),
        ));
    }
    let projections = decompose_samples(&f, d, k_max, nodes, rule)?;
    let mut table = AlmansiTable::new(d);
    let mut max_residual = 0.0f64;
    for (mode, radial_values) in projections {
        let values: Vec<Complex64> = radial_values
            .iter()
            .zip(nodes)
            .map(|(v, &r)| v / r.powi(mode.k as i32))
            .collect();
        if values.iter().all(|v| v.norm() < 1e-14) {
            continue;
        }
        let interp = interpolate_mode(&values, nodes)?;
        max_residual = max_residual.max(interp.residual());
        table.set_mode(mode, interp.monomial().to_vec())?;
    }
    let stability_constant = ns.stability_constant();
    Ok(Interpolant {
        norm_bound: stability_constant * hardy_norm(&table),
        table,
        stability_constant,
        max_node_residual: max_residual,
    })
}

/// Certified sup bound on `|f - P|` over the closed region `|z| <= b`, where
/// `P` interpolates every listed mode of `f` at the node set:
/// `sum_modes R_mode ||f_mode|| b^k sqrt(a_k / omega_d)` with the remainder
/// constant `R` of the module doc-comment.
pub fn interpolation_error_bound(
    mode_norms: &BTreeMap<ModeIndex, f64>,
    ns: &NodeSet,
    d: usize,
) -> Result<f64> {
    if ns.b() >= 1.0 {
        return Err(Error::Domain("outer radius must be below 1".to_string()));
    }
    let omega = surface_area(d);
    let mut bound = 0.0;
    for (mode, &norm) in mode_norms {
        if !norm.is_finite() {
            return Err(Error::Domain(format!("mode {mode} has non-finite norm")));
        }
        let a_k = harmonic_dimension(d, mode.k)? as f64;
        let y_sup = (a_k / omega).sqrt();
        let r = ns.remainder_constant(*mode, ns.b());
        bound += r * norm * ns.b().powi(mode.k as i32) * y_sup;
    }
    Ok(bound)
}
