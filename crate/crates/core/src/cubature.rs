//! Pseudo-positive measures on the ball, their per-mode component measures
//! on the radius interval, moment-matched interpolatory quadrature weights,
//! and the assembled per-mode cubature rule with a certified error
//! majorant.
//!
//! A signed measure is pseudo-positive when every component measure
//! `dmu_{k,l}(r) = int Y_{k,l}(theta) dmu(r theta)` is nonnegative.
//! Measures are handled atomically throughout: continuous radial densities
//! enter through a quadrature discretization chosen by the caller, which
//! makes pseudo-positivity decidable by inspecting atom weights.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::almansi::{decompose_samples, AlmansiTable};
use crate::interp::NodeSet;
use crate::sphere::{
    eval_harmonics_up_to, harmonic_dimension, surface_area, ModeIndex, SphereRule,
};
use crate::util::{gauss_legendre_on, solve_dual_vandermonde};
use crate::{Error, Result};

/// Atom weights this far below zero are treated as roundoff and clamped;
/// anything lower is a genuine pseudo-positivity violation.
pub const POSITIVITY_SLACK: f64 = 1e-14;

/// A nonnegative atomic measure on a radius interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct RadialMeasure {
    atoms: Vec<(f64, f64)>,
}

impl RadialMeasure {
    pub fn zero() -> Self {
        RadialMeasure { atoms: Vec::new() }
    }

    /// Build from `(radius, weight)` atoms; weights must be nonnegative and
    /// radii nonnegative.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(r, w) in &atoms {
            if r < 0.0 {
                return Err(Error::Domain(format!("negative atom radius {r}")));
            }
            if w < 0.0 {
                return Err(Error::Domain(format!(
                    "negative atom weight {w} at radius {r}"
                )));
            }
        }
        Ok(RadialMeasure { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|&(_, w)| w == 0.0)
    }

    /// `int r^pow dm(r)` over the atoms.
    pub fn moment(&self, pow: usize) -> f64 {
        self.atoms
            .iter()
            .map(|&(r, w)| w * r.powi(pow as i32))
            .sum()
    }

    pub fn support_max(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|&&(_, w)| w > 0.0)
            .map(|&(r, _)| r)
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<(f64, f64)>> for RadialMeasure {
    type Error = Error;
    fn try_from(atoms: Vec<(f64, f64)>) -> Result<Self> {
        RadialMeasure::new(atoms)
    }
}

impl From<RadialMeasure> for Vec<(f64, f64)> {
    fn from(m: RadialMeasure) -> Self {
        m.atoms
    }
}

/// Spherical factor of a product measure.
pub enum SphericalDensity<'a> {
    /// The rotation-invariant surface measure.
    Uniform,
    /// A density against the surface measure; integrated with a sphere rule.
    Custom(&'a dyn Fn(&[f64]) -> f64),
}

/// A full measure on the ball, before componentization.
pub enum MeasureSource<'a> {
    /// Point masses `(position, weight)`; positions inside the ball.
    AtomCloud(&'a [(Vec<f64>, f64)]),
    /// `rho(r) dr x sigma(theta) dtheta` with atomic radial part.
    Product {
        radial: &'a [(f64, f64)],
        spherical: SphericalDensity<'a>,
    },
}

/// Raw component atoms of one mode, sign not yet checked. Atom-cloud
/// positions sharing a radius (to 1e-12 relative) merge into one shell.
fn component_atoms_raw(
    src: &MeasureSource,
    d: usize,
    mode: ModeIndex,
    rule: Option<&SphereRule>,
) -> Result<Vec<(f64, f64)>> {
    match src {
        MeasureSource::AtomCloud(atoms) => {
            let mut shells: Vec<(f64, f64)> = Vec::new();
            let mut indexed: Vec<(f64, &Vec<f64>, f64)> = Vec::with_capacity(atoms.len());
            for (x, w) in atoms.iter() {
                if x.len() != d {
                    return Err(Error::Domain(format!(
                        "atom position has {} coordinates, expected {d}",
                        x.len()
                    )));
                }
                let r: f64 = x.iter().map(|t| t * t).sum::<f64>().sqrt();
                if r < 1e-300 {
                    return Err(Error::Domain(
                        "atom at the origin has no direction".to_string(),
                    ));
                }
                indexed.push((r, x, *w));
            }
            indexed.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (r, x, w) in indexed {
                let theta: Vec<f64> = x.iter().map(|t| t / r).collect();
                let y = eval_harmonics_up_to(d, mode.k, &theta)?[mode.k][mode.ell - 1];
                match shells.last_mut() {
                    Some(last) if (last.0 - r).abs() <= 1e-12 * (1.0 + r) => {
                        last.1 += w * y;
                    }
                    _ => shells.push((r, w * y)),
                }
            }
            Ok(shells)
        }
        MeasureSource::Product { radial, spherical } => {
            let scale = match spherical {
                SphericalDensity::Uniform => {
                    // int Y_{k,l} dtheta vanishes except on the constant mode
                    if mode.k == 0 {
                        surface_area(d).sqrt()
                    } else {
                        0.0
                    }
                }
                SphericalDensity::Custom(density) => {
                    let rule = rule.ok_or_else(|| {
                        Error::Precondition(
                            "a sphere rule is required for a custom spherical density"
                                .to_string(),
                        )
                    })?;
                    if rule.d() != d {
                        return Err(Error::Precondition(format!(
                            "rule dimension {} does not match d={d}",
                            rule.d()
                        )));
                    }
                    let mut acc = 0.0;
                    for (node, &w) in rule.nodes().iter().zip(rule.weights()) {
                        let y = eval_harmonics_up_to(d, mode.k, node)?[mode.k][mode.ell - 1];
                        acc += w * density(node) * y;
                    }
                    acc
                }
            };
            if scale == 0.0 {
                return Ok(Vec::new());
            }
            Ok(radial.iter().map(|&(r, w)| (r, w * scale)).collect())
        }
    }
}

/// Component measure `dmu_{k,l}` of a full measure. Errors when a component
/// atom falls below the positivity slack; roundoff-level negatives are
/// clamped to zero.
pub fn component_measure(
    src: &MeasureSource,
    d: usize,
    mode: ModeIndex,
    rule: Option<&SphereRule>,
) -> Result<RadialMeasure> {
    let mut shells = component_atoms_raw(src, d, mode, rule)?;
    for (r, w) in shells.iter_mut() {
        if *w < -POSITIVITY_SLACK {
            return Err(Error::PseudoPositivity {
                k: mode.k,
                ell: mode.ell,
                weight: *w,
            });
        }
        if *w < 0.0 {
            *w = 0.0;
        }
        let _ = r;
    }
    shells.retain(|&(_, w)| w > 0.0);
    RadialMeasure::new(shells)
}

/// Per-mode positivity scan of a full measure, for all `k <= k_max`.
/// Reports rather than fails: violating modes are listed with their most
/// negative atom weight.
pub fn pseudo_positivity_report(
    src: &MeasureSource,
    d: usize,
    k_max: usize,
    rule: Option<&SphereRule>,
) -> Result<PseudoPositivityReport> {
    let mut violations = Vec::new();
    for k in 0..=k_max {
        let a_k = harmonic_dimension(d, k)?;
        for ell in 1..=a_k {
            let mode = ModeIndex::new(k, ell);
            let shells = component_atoms_raw(src, d, mode, rule)?;
            let worst = shells.iter().map(|&(_, w)| w).fold(f64::INFINITY, f64::min);
            if worst < -POSITIVITY_SLACK {
                violations.push((mode, worst));
            }
        }
    }
    Ok(PseudoPositivityReport {
        pass: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPositivityReport {
    pub pass: bool,
    /// `(mode, most negative atom weight)` for each violating mode.
    pub violations: Vec<(ModeIndex, f64)>,
}

#[derive(Debug, Clone)]
enum OwnedSource {
    Atoms(Vec<(Vec<f64>, f64)>),
    ProductUniform(Vec<(f64, f64)>),
}

impl OwnedSource {
    fn as_source(&self) -> MeasureSource<'_> {
        match self {
            OwnedSource::Atoms(atoms) => MeasureSource::AtomCloud(atoms),
            OwnedSource::ProductUniform(radial) => MeasureSource::Product {
                radial,
                spherical: SphericalDensity::Uniform,
            },
        }
    }
}

/// A pseudo-positive measure held as its component measures, mode by mode,
/// together with the full measure it came from (when available) so that
/// further components can be synthesized on demand.
#[derive(Debug, Clone)]
pub struct PseudoPositiveMeasure {
    d: usize,
    b: f64,
    components: BTreeMap<ModeIndex, RadialMeasure>,
    source: Option<OwnedSource>,
}

impl PseudoPositiveMeasure {
    /// Assemble directly from validated components.
    pub fn from_components(
        d: usize,
        b: f64,
        components: BTreeMap<ModeIndex, RadialMeasure>,
    ) -> Result<Self> {
        check_radius_bound(b)?;
        for (mode, m) in &components {
            let a_k = harmonic_dimension(d, mode.k)?;
            if mode.ell < 1 || mode.ell > a_k {
                return Err(Error::Domain(format!("mode {mode} out of range")));
            }
            if m.support_max() > b + 1e-12 {
                return Err(Error::Domain(format!(
                    "component {mode} has atoms beyond the support radius {b}"
                )));
            }
        }
        Ok(PseudoPositiveMeasure {
            d,
            b,
            components,
            source: None,
        })
    }

    /// Componentize a point cloud, materializing all modes with `k <= k_max`
    /// and keeping the cloud for later modes.
    pub fn from_atom_cloud(
        d: usize,
        b: f64,
        atoms: Vec<(Vec<f64>, f64)>,
        k_max: usize,
    ) -> Result<Self> {
        check_radius_bound(b)?;
        for (x, _) in &atoms {
            let r: f64 = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            if r > b + 1e-12 {
                return Err(Error::Domain(format!(
                    "atom at radius {r} outside the support radius {b}"
                )));
            }
        }
        let mut components = BTreeMap::new();
        {
            let src = MeasureSource::AtomCloud(&atoms);
            for k in 0..=k_max {
                let a_k = harmonic_dimension(d, k)?;
                for ell in 1..=a_k {
                    let mode = ModeIndex::new(k, ell);
                    let m = component_measure(&src, d, mode, None)?;
                    if !m.is_zero() {
                        components.insert(mode, m);
                    }
                }
            }
        }
        Ok(PseudoPositiveMeasure {
            d,
            b,
            components,
            source: Some(OwnedSource::Atoms(atoms)),
        })
    }

    /// Product of an atomic radial measure with the uniform spherical
    /// measure; only the constant mode carries mass.
    pub fn from_product_uniform(d: usize, b: f64, radial: Vec<(f64, f64)>) -> Result<Self> {
        check_radius_bound(b)?;
        let src = MeasureSource::Product {
            radial: &radial,
            spherical: SphericalDensity::Uniform,
        };
        let mode = ModeIndex::new(0, 1);
        let mut components = BTreeMap::new();
        let m = component_measure(&src, d, mode, None)?;
        if m.support_max() > b + 1e-12 {
            return Err(Error::Domain(
                "radial atoms beyond the support radius".to_string(),
            ));
        }
        components.insert(mode, m);
        Ok(PseudoPositiveMeasure {
            d,
            b,
            components,
            source: Some(OwnedSource::ProductUniform(radial)),
        })
    }

    /// Lebesgue measure of the radius-`b` ball, radially discretized by an
    /// `n_radial`-point Gauss rule against `r^(d-1) dr` (moments up to
    /// degree `2 n_radial - 1 - (d-1)` are exact).
    pub fn lebesgue_ball(d: usize, b: f64, n_radial: usize) -> Result<Self> {
        let (xs, ws) = gauss_legendre_on(n_radial, 0.0, b);
        let radial: Vec<(f64, f64)> = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| (x, w * x.powi(d as i32 - 1)))
            .collect();
        Self::from_product_uniform(d, b, radial)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Support radius of the measure (its atoms live in `[0, b]`).
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn components(&self) -> &BTreeMap<ModeIndex, RadialMeasure> {
        &self.components
    }

    /// Component measure of a mode: the stored one, a synthesized one when
    /// the full measure is available, or the zero measure.
    pub fn component(&self, mode: ModeIndex) -> Result<RadialMeasure> {
        if let Some(m) = self.components.get(&mode) {
            return Ok(m.clone());
        }
        match &self.source {
            Some(src) => component_measure(&src.as_source(), self.d, mode, None),
            None => Ok(RadialMeasure::zero()),
        }
    }

    /// Union of two pseudo-positive measures (atom lists concatenate).
    pub fn merge(&self, other: &PseudoPositiveMeasure) -> Result<PseudoPositiveMeasure> {
        if self.d != other.d {
            return Err(Error::Domain("dimension mismatch in merge".to_string()));
        }
        let mut components = self.components.clone();
        for (mode, m) in &other.components {
            let slot = components.entry(*mode).or_insert_with(RadialMeasure::zero);
            let mut atoms = slot.atoms().to_vec();
            atoms.extend_from_slice(m.atoms());
            *slot = RadialMeasure::new(atoms)?;
        }
        PseudoPositiveMeasure::from_components(self.d, self.b.max(other.b), components)
    }

    /// Positivity scan over the stored (and, when a source is present,
    /// synthesizable) components with `k <= k_max`.
    pub fn positivity_report(&self, k_max: usize) -> Result<PseudoPositivityReport> {
        if let Some(src) = &self.source {
            return pseudo_positivity_report(&src.as_source(), self.d, k_max, None);
        }
        // components were validated nonnegative at construction
        Ok(PseudoPositivityReport {
            pass: true,
            violations: Vec::new(),
        })
    }
}

fn check_radius_bound(b: f64) -> Result<()> {
    if !(0.0 < b && b <= 1.0) {
        return Err(Error::Domain(format!(
            "support radius must lie in (0, 1], got {b}"
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ComponentRaw {
    k: usize,
    l: usize,
    atoms: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct ProductRaw {
    radial_atoms: Vec<(f64, f64)>,
    spherical: String,
}

#[derive(Serialize, Deserialize)]
struct MeasureRaw {
    d: usize,
    b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    components: Option<Vec<ComponentRaw>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    product: Option<ProductRaw>,
}

impl Serialize for PseudoPositiveMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = match &self.source {
            Some(OwnedSource::ProductUniform(radial)) => MeasureRaw {
                d: self.d,
                b: self.b,
                components: None,
                product: Some(ProductRaw {
                    radial_atoms: radial.clone(),
                    spherical: "uniform".to_string(),
                }),
            },
            _ => MeasureRaw {
                d: self.d,
                b: self.b,
                components: Some(
                    self.components
                        .iter()
                        .map(|(mode, m)| ComponentRaw {
                            k: mode.k,
                            l: mode.ell,
                            atoms: m.atoms().to_vec(),
                        })
                        .collect(),
                ),
                product: None,
            },
        };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PseudoPositiveMeasure {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = MeasureRaw::deserialize(de)?;
        match (raw.components, raw.product) {
            (Some(components), None) => {
                let mut map = BTreeMap::new();
                for c in components {
                    let m = RadialMeasure::new(c.atoms).map_err(D::Error::custom)?;
                    map.insert(ModeIndex::new(c.k, c.l), m);
                }
                PseudoPositiveMeasure::from_components(raw.d, raw.b, map)
                    .map_err(D::Error::custom)
            }
            (None, Some(product)) => {
                if product.spherical != "uniform" {
                    return Err(D::Error::custom(format!(
                        "unsupported spherical factor {:?}",
                        product.spherical
                    )));
                }
                PseudoPositiveMeasure::from_product_uniform(raw.d, raw.b, product.radial_atoms)
                    .map_err(D::Error::custom)
            }
            _ => Err(D::Error::custom(
                "measure needs exactly one of \"components\" or \"product\"",
            )),
        }
    }
}

/// Interpolatory quadrature weights of one mode: `lambda` solving
/// `sum_j lambda_j t_j^(k+2i) = int r^(k+2i) dm(r)` for `i = 0..=n`, via the
/// substitution `u = t^2` (the `t^k` ladder factor divides out, so a plain
/// Vandermonde system in `u` remains).
pub fn quadrature_weights(
    m: &RadialMeasure,
    nodes: &[f64],
    k: usize,
    n: usize,
) -> Result<Vec<f64>> {
    if nodes.len() != n + 1 {
        return Err(Error::Precondition(format!(
            "{} nodes for exactness degree {n} (need {})",
            nodes.len(),
            n + 1
        )));
    }
    if k > 0 {
        if let Some(&bad) = nodes.iter().find(|&&t| t == 0.0) {
            return Err(Error::Domain(format!(
                "node t = {bad} makes the mode-{k} ladder system rank deficient"
            )));
        }
    }
    let u: Vec<f64> = nodes.iter().map(|t| t * t).collect();
    let moments: Vec<f64> = (0..=n).map(|i| m.moment(k + 2 * i)).collect();
    let x = solve_dual_vandermonde(&u, &moments).ok_or_else(|| {
        Error::Domain("coincident squared nodes make the moment system singular".to_string())
    })?;
    Ok(x.iter()
        .zip(nodes)
        .map(|(&xj, &t)| xj / t.powi(k as i32))
        .collect())
}

/// Result of a cubature evaluation.
#[derive(Debug, Clone)]
pub struct CubatureResult {
    pub value: Complex64,
    /// Bound on the mass dropped by the `k <= k_max` truncation,
    /// `sum_{k > k_max} ||f_mode|| int r^k dmu_mode`; `None` when the input
    /// is a sampler and the dropped modes are unknowable.
    pub dropped_bound: Option<f64>,
    /// Modes whose weight vectors contain a negative entry. Negative
    /// weights are legitimate (nodes need not sit inside the measure's
    /// support hull) and are reported, never rejected.
    pub negative_weight_modes: Vec<ModeIndex>,
}

/// The per-mode cubature of a coefficient table:
/// `sum_{k <= k_max} sum_l sum_j lambda_{k,l;j} f_{k,l}(t_{k,l;j})`, with
/// the weights of each mode matched to the component measure's moments on
/// the ladder `{r^(k+2i)}`, `i <= n`.
///
/// Exact for tables whose mode degrees stay within `n` and whose harmonic
/// degrees stay within `k_max`.
pub fn cubature(
    f: &AlmansiTable,
    mu: &PseudoPositiveMeasure,
    ns: &NodeSet,
    k_max: usize,
    n: usize,
) -> Result<CubatureResult> {
    if f.d() != mu.d() {
        return Err(Error::Precondition(format!(
            "table dimension {} does not match the measure (d={})",
            f.d(),
            mu.d()
        )));
    }
    if ns.degree() != n {
        return Err(Error::Precondition(format!(
            "node set has degree {}, requested exactness degree {n}",
            ns.degree()
        )));
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut dropped = 0.0;
    let mut negative_weight_modes = Vec::new();
    for (mode, _) in f.entries() {
        let component = mu.component(*mode)?;
        if component.is_zero() {
            continue;
        }
        if mode.k > k_max {
            dropped += f.mode_norm(*mode) * component.moment(mode.k);
            continue;
        }
        let nodes = ns.nodes_for(*mode);
        let weights = quadrature_weights(&component, nodes, mode.k, n)?;
        if weights.iter().any(|&w| w < 0.0) {
            negative_weight_modes.push(*mode);
        }
        for (&lambda, &t) in weights.iter().zip(nodes) {
            value += lambda * f.mode_radial(*mode, Complex64::new(t, 0.0));
        }
    }
    Ok(CubatureResult {
        value,
        dropped_bound: Some(dropped),
        negative_weight_modes,
    })
}

/// Cubature of a sampled function: the radial profiles `f_{k,l}(t_j)` are
/// obtained by spherical projection at the node radii, then combined with
/// the same moment-matched weights as [`cubature`]. Modes beyond `k_max`
/// are invisible to the sampler, so no dropped-mass bound is reported.
pub fn cubature_sampled<F>(
    f: F,
    d: usize,
    rule: &SphereRule,
    mu: &PseudoPositiveMeasure,
    ns: &NodeSet,
    k_max: usize,
    n: usize,
) -> Result<CubatureResult>
where
    F: Fn(f64, &[f64]) -> Complex64,
{
    if ns.degree() != n {
        return Err(Error::Precondition(format!(
            "node set has degree {}, requested exactness degree {n}",
            ns.degree()
        )));
    }
    let projections = decompose_samples(&f, d, k_max, ns.shared_nodes(), rule)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut negative_weight_modes = Vec::new();
    for (mode, radial_values) in projections {
        let component = mu.component(mode)?;
        if component.is_zero() {
            continue;
        }
        let weights = quadrature_weights(&component, ns.shared_nodes(), mode.k, n)?;
        if weights.iter().any(|&w| w < 0.0) {
            negative_weight_modes.push(mode);
        }
        for (&lambda, v) in weights.iter().zip(&radial_values) {
            value += lambda * v;
        }
    }
    Ok(CubatureResult {
        value,
        dropped_bound: None,
        negative_weight_modes,
    })
}

/// Certified bound on `|int f dmu - C(f)|` for the interpolatory cubature on
/// this node set: `sum_modes R_mode ||f_mode|| int r^k dmu_mode`, with the
/// per-mode remainder constant `R` from the interpolation chain taken over
/// the larger of the node radius and the measure's support radius. Both
/// must stay below 1.
pub fn cubature_error_bound(
    mode_norms: &BTreeMap<ModeIndex, f64>,
    mu: &PseudoPositiveMeasure,
    ns: &NodeSet,
    d: usize,
) -> Result<f64> {
    if mu.d() != d {
        return Err(Error::Precondition(format!(
            "measure dimension {} does not match d={d}",
            mu.d()
        )));
    }
    let b_eff = ns.b().max(mu.b());
    if b_eff >= 1.0 {
        return Err(Error::Domain(format!(
            "error bound needs support and nodes strictly inside the unit ball (got {b_eff})"
        )));
    }
    let mut bound = 0.0;
    for (mode, &norm) in mode_norms {
        if !norm.is_finite() {
            return Err(Error::Domain(format!("mode {mode} has non-finite norm")));
        }
        let component = mu.component(*mode)?;
        if component.is_zero() {
            continue;
        }
        let r = ns.remainder_constant(*mode, b_eff);
        bound += r * norm * component.moment(mode.k);
    }
    Ok(bound)
}
