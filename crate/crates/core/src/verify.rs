//! Self-check suites behind the `verify` CLI command and the acceptance
//! tests. Every check pins its tolerance in code and reports the measured
//! deviation; a check passes when the measurement does not exceed the
//! tolerance. Randomized checks are fully determined by the seed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::almansi::AlmansiTable;
use crate::bvp;
use crate::cubature::{
    cubature, cubature_error_bound, quadrature_weights, PseudoPositiveMeasure, RadialMeasure,
};
use crate::hardy;
use crate::interp::{interpolation_error_bound, polyharmonic_interpolant, NodeSet};
use crate::kernels::{cauchy_kernel, cauchy_kernel_series, hua_aronszajn_kernel, poisson_kernel_c,
    reproduce, KernelPoint};
use crate::sphere::{
    build_sphere_rule, eval_harmonics_up_to, eval_zonal, harmonic_dimension, surface_area,
    ModeIndex,
};

/// One executed check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance,
        }
    }

    pub fn pass(&self) -> bool {
        self.measured.is_finite() && self.measured <= self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Sphere,
    Basis,
    Kernels,
    Reproduce,
    Bvp,
    Interp,
    Cubature,
    Hardy,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Sphere,
        Suite::Basis,
        Suite::Kernels,
        Suite::Reproduce,
        Suite::Bvp,
        Suite::Interp,
        Suite::Cubature,
        Suite::Hardy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Sphere => "sphere",
            Suite::Basis => "basis",
            Suite::Kernels => "kernels",
            Suite::Reproduce => "reproduce",
            Suite::Bvp => "bvp",
            Suite::Interp => "interp",
            Suite::Cubature => "cubature",
            Suite::Hardy => "hardy",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|su| su.name() == s)
    }
}

/// Run one suite with the given seed.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<Check> {
    match suite {
        Suite::Sphere => sphere_suite(seed),
        Suite::Basis => basis_suite(),
        Suite::Kernels => kernels_suite(seed),
        Suite::Reproduce => reproduce_suite(seed),
        Suite::Bvp => bvp_suite(seed),
        Suite::Interp => interp_suite(seed),
        Suite::Cubature => cubature_suite(seed),
        Suite::Hardy => hardy_suite(seed),
    }
}

// ---------------------------------------------------------------------------
// sphere: Gram orthonormality and the addition theorem

fn sphere_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    for d in [2usize, 3] {
        let k_max = 15;
        let rule = build_sphere_rule(d, 2 * k_max).unwrap();
        let tables: Vec<Vec<Vec<f64>>> = rule
            .nodes()
            .iter()
            .map(|n| eval_harmonics_up_to(d, k_max, n).unwrap())
            .collect();
        let modes: Vec<ModeIndex> = all_modes(d, k_max);
        let mut worst = 0.0f64;
        let flat: Vec<Vec<f64>> = modes
            .iter()
            .map(|m| tables.iter().map(|t| t[m.k][m.ell - 1]).collect())
            .collect();
        for (i, row_i) in flat.iter().enumerate() {
            for (j, row_j) in flat.iter().enumerate().skip(i) {
                let dot: f64 = row_i
                    .iter()
                    .zip(row_j)
                    .zip(rule.weights())
                    .map(|((a, b), &w)| w * a * b)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - expect).abs());
            }
        }
        checks.push(Check::new(
            format!("gram-identity-d{d} (k <= {k_max})"),
            worst,
            1e-10,
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5f17);
    for d in [2usize, 3] {
        let mut worst = 0.0f64;
        for _ in 0..40 {
            let theta = random_direction(d, &mut rng);
            let theta_p = random_direction(d, &mut rng);
            let c: f64 = theta.iter().zip(&theta_p).map(|(a, b)| a * b).sum();
            let ya = eval_harmonics_up_to(d, 15, &theta).unwrap();
            let yb = eval_harmonics_up_to(d, 15, &theta_p).unwrap();
            for k in 0..=15 {
                let sum: f64 = ya[k].iter().zip(&yb[k]).map(|(a, b)| a * b).sum();
                worst = worst.max((sum - eval_zonal(d, k, c).unwrap()).abs());
            }
        }
        checks.push(Check::new(format!("addition-theorem-d{d}"), worst, 1e-12));
    }
    checks
}

// ---------------------------------------------------------------------------
// basis: orthonormality of z^(k+2j) Y_{k,l} on the quadric boundary

fn basis_suite() -> Vec<Check> {
    let mut checks = Vec::new();
    for d in [2usize, 3] {
        let (k_max, j_max) = (8usize, 4usize);
        let n_phi = 2 * (k_max + 2 * j_max) + 4;
        let rule = build_sphere_rule(d, 2 * k_max).unwrap();
        let modes = all_modes(d, k_max);
        // sphere Gram of the harmonics, by quadrature
        let tables: Vec<Vec<Vec<f64>>> = rule
            .nodes()
            .iter()
            .map(|n| eval_harmonics_up_to(d, k_max, n).unwrap())
            .collect();
        let mut sphere_gram = vec![vec![0.0f64; modes.len()]; modes.len()];
        for (a, ma) in modes.iter().enumerate() {
            for (b, mb) in modes.iter().enumerate() {
                sphere_gram[a][b] = tables
                    .iter()
                    .zip(rule.weights())
                    .map(|(t, &w)| w * t[ma.k][ma.ell - 1] * t[mb.k][mb.ell - 1])
                    .sum();
            }
        }
        // circle factor (1/n_phi) sum_m e^{i (f1 - f2) phi_m}, by quadrature
        let circle_factor = |df: i64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * m as f64 / n_phi as f64;
                acc += Complex64::from_polar(1.0, df as f64 * phi);
            }
            acc / n_phi as f64
        };
        let mut worst = 0.0f64;
        for (a, ma) in modes.iter().enumerate() {
            for ja in 0..=j_max {
                let fa = (ma.k + 2 * ja) as i64;
                for (b, mb) in modes.iter().enumerate() {
                    for jb in 0..=j_max {
                        let fb = (mb.k + 2 * jb) as i64;
                        let val = circle_factor(fa - fb) * sphere_gram[a][b];
                        let expect = if a == b && ja == jb { 1.0 } else { 0.0 };
                        worst = worst.max((val - Complex64::new(expect, 0.0)).norm());
                    }
                }
            }
        }
        checks.push(Check::new(
            format!("boundary-gram-d{d} (k <= {k_max}, j <= {j_max})"),
            worst,
            1e-9,
        ));
    }
    checks
}

// ---------------------------------------------------------------------------
// kernels: closed forms against truncated series

fn kernels_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b21);
    for d in [2usize, 3, 4] {
        let mut worst_cauchy = 0.0f64;
        let mut worst_poisson = 0.0f64;
        let mut worst_hua = 0.0f64;
        for _ in 0..100 {
            let w = Complex64::from_polar(
                rng.random_range(0.0..0.6),
                rng.random_range(0.0..2.0 * std::f64::consts::PI),
            );
            let z = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * std::f64::consts::PI));
            let theta = random_direction(d, &mut rng);
            let theta_p = random_direction(d, &mut rng);
            let c: f64 = theta.iter().zip(&theta_p).map(|(a, b)| a * b).sum();

            let p = KernelPoint::new(w / z, theta_p.clone(), z, theta.clone());
            let closed = cauchy_kernel(d, &p).unwrap();
            let series = cauchy_kernel_series(d, &p, 60, 60).unwrap();
            worst_cauchy = worst_cauchy.max((closed - series).norm());

            let poisson = poisson_kernel_c(d, w, c).unwrap();
            let mut zonal_sum = Complex64::new(0.0, 0.0);
            let mut pow = Complex64::new(1.0, 0.0);
            for k in 0..=120 {
                zonal_sum += pow * eval_zonal(d, k, c).unwrap();
                pow *= w;
            }
            worst_poisson = worst_poisson.max((poisson - zonal_sum).norm());

            let hp = KernelPoint::new(w * z, theta_p.clone(), z, theta.clone());
            let hua = hua_aronszajn_kernel(d, &hp).unwrap();
            let hua_series = cauchy_kernel_series(
                d,
                &KernelPoint::new(w, theta_p, Complex64::new(1.0, 0.0), theta),
                60,
                60,
            )
            .unwrap()
                / z;
            worst_hua = worst_hua.max((hua - hua_series).norm());
        }
        checks.push(Check::new(format!("cauchy-duality-d{d}"), worst_cauchy, 1e-8));
        checks.push(Check::new(format!("poisson-duality-d{d}"), worst_poisson, 1e-8));
        checks.push(Check::new(format!("hua-duality-d{d}"), worst_hua, 1e-8));
    }
    checks
}

// ---------------------------------------------------------------------------
// reproduce: boundary integral recovers interior values

fn reproduce_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9d43);
    for d in [2usize, 3] {
        let rule = build_sphere_rule(d, 40).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let t = random_degree_bounded_table(d, 6, &mut rng);
            let zeta = Complex64::from_polar(0.5, rng.random_range(0.0..std::f64::consts::TAU));
            let theta_p = random_direction(d, &mut rng);
            let got = reproduce(&t, zeta, &theta_p, &rule, 64).unwrap();
            let want = t.evaluate(zeta, &theta_p).unwrap();
            worst = worst.max((got - want).norm());
        }
        checks.push(Check::new(
            format!("reproduce-polyharmonic-d{d} (degree <= 6, |zeta| = 0.5)"),
            worst,
            1e-7,
        ));
    }
    checks
}

// ---------------------------------------------------------------------------
// bvp: exact gamma identities and the Dirichlet roundtrip

/// Laurent polynomial over the rationals, exponent -> coefficient.
/// Supports exactly what the differentiation oracle needs.
struct Laurent(BTreeMap<i64, BigRational>);

impl Laurent {
    fn monomial(e: i64) -> Self {
        let mut m = BTreeMap::new();
        m.insert(e, BigRational::from(BigInt::from(1)));
        Laurent(m)
    }

    fn d_dr(&self) -> Self {
        let mut out = BTreeMap::new();
        for (&e, c) in &self.0 {
            if e != 0 {
                let v = c * BigRational::from(BigInt::from(e));
                if !v.is_zero() {
                    out.insert(e - 1, v);
                }
            }
        }
        Laurent(out)
    }

    fn shift(&self, p: i64) -> Self {
        Laurent(self.0.iter().map(|(&e, c)| (e + p, c.clone())).collect())
    }

    fn eval_at_one(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.values() {
            acc += c;
        }
        acc
    }
}

/// The ladder operator by its defining expression,
/// `r^-(d+k-1) D [ r^(d+2k-1) D [ r^-k f ] ]`, in exact arithmetic.
/// Independent of the closed-form product used by `bvp::gamma`.
fn ladder_by_differentiation(d: usize, k: usize, f: &Laurent) -> Laurent {
    f.shift(-(k as i64))
        .d_dr()
        .shift((d + 2 * k) as i64 - 1)
        .d_dr()
        .shift(-((d + k) as i64 - 1))
}

fn bvp_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();

    // every gamma(d, k, m, s) for d <= 5, k, m, s <= 8, exactly
    let mut mismatches = 0usize;
    for d in 2..=5 {
        for k in 0..=8 {
            for m in 0..=8usize {
                for s in 0..=8usize {
                    let mut f = Laurent::monomial((k + 2 * s) as i64);
                    for _ in 0..m {
                        f = ladder_by_differentiation(d, k, &f);
                    }
                    if f.eval_at_one() != bvp::gamma_exact(d, k, m, s) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    checks.push(Check::new(
        "gamma-oracle (2916 exact identities)",
        mismatches as f64,
        0.0,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11b7);
    let mut worst = 0.0f64;
    for d in 2..=5 {
        for n in 1..=5usize {
            let mut t = AlmansiTable::new(d);
            for k in 0..=20usize {
                let a_k = harmonic_dimension(d, k).unwrap();
                for ell in [1, a_k] {
                    let coeffs: Vec<Complex64> = (0..n)
                        .map(|_| random_unit_complex(&mut rng))
                        .collect();
                    t.set_mode(ModeIndex::new(k, ell), coeffs).unwrap();
                }
            }
            let b = bvp::forward_boundary(&t, n).unwrap();
            let back = bvp::solve_dirichlet(&b).unwrap();
            let mut gap = t.clone();
            gap.axpy(Complex64::new(-1.0, 0.0), &back).unwrap();
            worst = worst.max(hardy::hardy_norm(&gap) / hardy::hardy_norm(&t));
        }
    }
    checks.push(Check::new(
        "dirichlet-roundtrip (d <= 5, k <= 20, N <= 5)",
        worst,
        1e-11,
    ));
    checks
}

// ---------------------------------------------------------------------------
// interp: reproduction of polyharmonic inputs, bound domination

fn interp_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x71aa);

    let ns = NodeSet::shared(0.8, vec![0.12, 0.34, 0.57, 0.76]).unwrap();
    let mut worst = 0.0f64;
    for d in [2usize, 3] {
        for _ in 0..10 {
            let mut t = AlmansiTable::new(d);
            for k in 0..=5usize {
                let a_k = harmonic_dimension(d, k).unwrap();
                for ell in 1..=a_k.min(3) {
                    let coeffs: Vec<Complex64> = (0..=rng.random_range(0..=3usize))
                        .map(|_| random_unit_complex(&mut rng))
                        .collect();
                    t.set_mode(ModeIndex::new(k, ell), coeffs).unwrap();
                }
            }
            let p = polyharmonic_interpolant(&t, &ns, 10).unwrap();
            for (mode, coeffs) in t.entries() {
                for (j, cc) in coeffs.iter().enumerate() {
                    worst = worst.max((p.table.coefficient(*mode, j) - cc).norm());
                }
            }
        }
    }
    checks.push(Check::new(
        "interpolation-reproduces-polyharmonic-inputs",
        worst,
        1e-11,
    ));

    // 50 analytic single-mode functions; sampled sup error never above the bound
    let b = 0.6;
    let ns = NodeSet::shared(b, vec![0.1, 0.3, 0.5]).unwrap();
    let mut excess = f64::NEG_INFINITY;
    for trial in 0..50 {
        let d = if trial % 2 == 0 { 2 } else { 3 };
        let k = rng.random_range(0..5usize);
        let a_k = harmonic_dimension(d, k).unwrap();
        let mode = ModeIndex::new(k, rng.random_range(1..=a_k));
        let ratio: f64 = rng.random_range(0.3..0.7);
        let amp: f64 = rng.random_range(0.5..2.0);
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let mut t = AlmansiTable::new(d);
        let coeffs: Vec<Complex64> = (0..80)
            .map(|j| Complex64::from_polar(amp * ratio.powi(j), phase * j as f64))
            .collect();
        t.set_mode(mode, coeffs).unwrap();
        let p = polyharmonic_interpolant(&t, &ns, 10).unwrap();
        let mut norms = BTreeMap::new();
        norms.insert(mode, amp / (1.0 - ratio * ratio).sqrt());
        let bound = interpolation_error_bound(&norms, &ns, d).unwrap();
        let mut sampled = 0.0f64;
        for _ in 0..300 {
            let z = Complex64::from_polar(rng.random_range(0.0..b), rng.random_range(0.0..std::f64::consts::TAU));
            let theta = random_direction(d, &mut rng);
            let gap =
                (t.evaluate(z, &theta).unwrap() - p.table.evaluate(z, &theta).unwrap()).norm();
            sampled = sampled.max(gap);
        }
        excess = excess.max(sampled - bound);
    }
    checks.push(Check::new(
        "interpolation-error-bound-domination (50 analytic modes)",
        excess,
        0.0,
    ));
    checks
}

// ---------------------------------------------------------------------------
// cubature: exactness on the ladder span, volume, bound domination

fn cubature_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3c55);
    let (k_max, n) = (10usize, 4usize);
    let nodes = vec![0.12, 0.31, 0.52, 0.71, 0.88];

    // Lebesgue ball, d = 3
    {
        let d = 3;
        let mu = PseudoPositiveMeasure::lebesgue_ball(d, 1.0, 16).unwrap();
        let ns = NodeSet::shared(0.9, nodes.clone()).unwrap();
        let mut worst = 0.0f64;
        for k in 0..=k_max {
            let a_k = harmonic_dimension(d, k).unwrap();
            for ell in 1..=a_k {
                let mode = ModeIndex::new(k, ell);
                for j in 0..=n {
                    let mut f = AlmansiTable::new(d);
                    let mut coeffs = vec![Complex64::new(0.0, 0.0); j + 1];
                    coeffs[j] = Complex64::new(1.0, 0.0);
                    f.set_mode(mode, coeffs).unwrap();
                    let got = cubature(&f, &mu, &ns, k_max, n).unwrap().value;
                    let want = mu.component(mode).unwrap().moment(k + 2 * j);
                    worst = worst.max((got - Complex64::new(want, 0.0)).norm());
                }
            }
        }
        checks.push(Check::new(
            "cubature-exactness-lebesgue-d3 (k <= 10, j <= 4)",
            worst,
            1e-12,
        ));

        let mut one = AlmansiTable::new(d);
        one.set_mode(
            ModeIndex::new(0, 1),
            vec![Complex64::new(surface_area(d).sqrt(), 0.0)],
        )
        .unwrap();
        let volume = cubature(&one, &mu, &ns, k_max, n).unwrap().value;
        let want = 4.0 * std::f64::consts::PI / 3.0;
        checks.push(Check::new(
            "cubature-lebesgue-volume-d3",
            (volume - Complex64::new(want, 0.0)).norm(),
            1e-10,
        ));
    }

    // five random atomic pseudo-positive measures, d = 2
    {
        let d = 2;
        let ns = NodeSet::shared(0.9, nodes).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let mut components = BTreeMap::new();
            for k in 0..=k_max {
                let a_k = harmonic_dimension(d, k).unwrap();
                for ell in 1..=a_k {
                    let atoms: Vec<(f64, f64)> = (0..6)
                        .map(|_| (rng.random_range(0.05..0.9), rng.random_range(0.0..1.5)))
                        .collect();
                    components
                        .insert(ModeIndex::new(k, ell), RadialMeasure::new(atoms).unwrap());
                }
            }
            let mu = PseudoPositiveMeasure::from_components(d, 0.9, components).unwrap();
            for k in 0..=k_max {
                let a_k = harmonic_dimension(d, k).unwrap();
                for ell in 1..=a_k {
                    let mode = ModeIndex::new(k, ell);
                    for j in 0..=n {
                        let mut f = AlmansiTable::new(d);
                        let mut coeffs = vec![Complex64::new(0.0, 0.0); j + 1];
                        coeffs[j] = Complex64::new(1.0, 0.0);
                        f.set_mode(mode, coeffs).unwrap();
                        let got = cubature(&f, &mu, &ns, k_max, n).unwrap().value;
                        let want = mu.component(mode).unwrap().moment(k + 2 * j);
                        worst = worst
                            .max((got - Complex64::new(want, 0.0)).norm() / want.abs().max(1.0));
                    }
                }
            }
        }
        checks.push(Check::new(
            "cubature-exactness-random-measures (5 measures, k <= 10, j <= 4)",
            worst,
            1e-12,
        ));
    }

    // bound domination against dense references
    {
        let mut excess = f64::NEG_INFINITY;
        for trial in 0..10 {
            let d = if trial % 2 == 0 { 3 } else { 2 };
            let b = 0.8;
            let mu = PseudoPositiveMeasure::lebesgue_ball(d, b, 10_000).unwrap();
            let mode = ModeIndex::new(0, 1);
            let ratio: f64 = rng.random_range(0.3..0.6);
            let amp: f64 = rng.random_range(0.5..2.0);
            let mut f = AlmansiTable::new(d);
            let coeffs: Vec<Complex64> = (0..80)
                .map(|j| Complex64::new(amp * ratio.powi(j), 0.0))
                .collect();
            f.set_mode(mode, coeffs).unwrap();
            let ns = NodeSet::shared(b, vec![0.1, 0.32, 0.55, 0.77]).unwrap();
            let approx = cubature(&f, &mu, &ns, 4, 3).unwrap().value;
            let reference: f64 = mu
                .component(mode)
                .unwrap()
                .atoms()
                .iter()
                .map(|&(r, w)| {
                    let s = r * r;
                    w * amp * (0..80).map(|j| ratio.powi(j) * s.powi(j)).sum::<f64>()
                })
                .sum();
            let true_error = (approx - Complex64::new(reference, 0.0)).norm();
            let mut norms = BTreeMap::new();
            norms.insert(mode, amp / (1.0 - ratio * ratio).sqrt());
            let bound = cubature_error_bound(&norms, &mu, &ns, d).unwrap();
            excess = excess.max(true_error - bound);
        }
        checks.push(Check::new(
            "cubature-error-bound-domination (dense radial references)",
            excess,
            0.0,
        ));
    }

    // weights defining residual, random measures and ladders
    {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let atoms: Vec<(f64, f64)> = (0..5)
                .map(|_| (rng.random_range(0.05..0.85), rng.random_range(0.0..2.0)))
                .collect();
            let m = RadialMeasure::new(atoms).unwrap();
            let k = rng.random_range(0..8usize);
            let nodes = [0.15, 0.38, 0.64, 0.83];
            let lambda = quadrature_weights(&m, &nodes, k, 3).unwrap();
            for i in 0..=3usize {
                let lhs: f64 = lambda
                    .iter()
                    .zip(&nodes)
                    .map(|(&l, &t)| l * t.powi((k + 2 * i) as i32))
                    .sum();
                let rhs = m.moment(k + 2 * i);
                worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
            }
        }
        checks.push(Check::new("weights-moment-residual", worst, 1e-12));
    }
    checks
}

// ---------------------------------------------------------------------------
// hardy: sup bound, norm via boundary quadrature, near-boundary Parseval

fn hardy_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe2d9);

    let mut excess = f64::NEG_INFINITY;
    for trial in 0..50 {
        let d = if trial % 2 == 0 { 2 } else { 3 };
        let mut t = random_degree_bounded_table(d, 6, &mut rng);
        let norm = hardy::hardy_norm(&t);
        t = t.scaled(Complex64::new(1.0 / norm, 0.0));
        for &q in &[0.3, 0.5, 0.8] {
            let bound = hardy::max_principle_bound(&t, q).unwrap();
            for _ in 0..60 {
                let z = Complex64::from_polar(rng.random_range(0.0..q), rng.random_range(0.0..std::f64::consts::TAU));
                let theta = random_direction(d, &mut rng);
                let v = t.evaluate(z, &theta).unwrap().norm();
                excess = excess.max(v - bound);
            }
        }
    }
    checks.push(Check::new(
        "max-principle (50 unit tables, q in {0.3, 0.5, 0.8})",
        excess,
        1e-12,
    ));

    // norm via the boundary quadrature of |f*|^2
    let mut worst = 0.0f64;
    for d in [2usize, 3] {
        for _ in 0..4 {
            let mut t = random_degree_bounded_table(d, 6, &mut rng);
            let norm = hardy::hardy_norm(&t);
            t = t.scaled(Complex64::new(1.0 / norm, 0.0));
            let trace = hardy::boundary_trace(&t);
            let rule = build_sphere_rule(d, 2 * t.max_k()).unwrap();
            let n_phi = 2 * t.max_power() + 4;
            let mut quad = 0.0;
            for m in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * m as f64 / n_phi as f64;
                for (node, &w) in rule.nodes().iter().zip(rule.weights()) {
                    quad += w * trace.evaluate(phi, node).unwrap().norm_sqr();
                }
            }
            quad /= n_phi as f64;
            worst = worst.max((quad - 1.0).abs());
        }
    }
    checks.push(Check::new("norm-via-boundary-quadrature", worst, 1e-8));

    // near-boundary Parseval at r = 0.999 on degree <= 4 tables
    let mut worst_rel = 0.0f64;
    for d in [2usize, 3] {
        for _ in 0..3 {
            let t = random_degree_bounded_table(d, 4, &mut rng);
            let norm_sq = hardy::hardy_norm(&t).powi(2);
            let r = 0.999f64;
            let rule = build_sphere_rule(d, 2 * t.max_k()).unwrap();
            let n_phi = 2 * t.max_power() + 4;
            let mut quad = 0.0;
            for m in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * m as f64 / n_phi as f64;
                let z = Complex64::from_polar(r, phi);
                for (node, &w) in rule.nodes().iter().zip(rule.weights()) {
                    quad += w * t.evaluate(z, node).unwrap().norm_sqr();
                }
            }
            quad /= n_phi as f64;
            worst_rel = worst_rel.max((quad - norm_sq).abs() / norm_sq);
        }
    }
    checks.push(Check::new(
        "norm-via-volume-limit (r = 0.999, degree <= 4)",
        worst_rel,
        1e-2,
    ));
    checks
}

// ---------------------------------------------------------------------------
// helpers

fn all_modes(d: usize, k_max: usize) -> Vec<ModeIndex> {
    let mut out = Vec::new();
    for k in 0..=k_max {
        for ell in 1..=harmonic_dimension(d, k).unwrap() {
            out.push(ModeIndex::new(k, ell));
        }
    }
    out
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

fn random_unit_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random table whose powers k + 2j stay within the given total degree.
fn random_degree_bounded_table(d: usize, deg: usize, rng: &mut impl Rng) -> AlmansiTable {
    let mut t = AlmansiTable::new(d);
    for k in 0..=deg {
        let a_k = harmonic_dimension(d, k).unwrap();
        for ell in 1..=a_k {
            if rng.random_bool(0.6) {
                let coeffs: Vec<Complex64> = (0..=(deg - k) / 2)
                    .map(|_| random_unit_complex(rng))
                    .collect();
                t.set_mode(ModeIndex::new(k, ell), coeffs).unwrap();
            }
        }
    }
    if t.is_empty() {
        t.set_mode(ModeIndex::new(0, 1), vec![Complex64::new(1.0, 0.0)])
            .unwrap();
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for suite in Suite::ALL {
            assert_eq!(Suite::parse(suite.name()), Some(suite));
        }
        assert_eq!(Suite::parse("nope"), None);
    }

    #[test]
    fn ladder_oracle_spot_values() {
        // d=2, k=0, s=1, m=1: gamma = 4
        let f = Laurent::monomial(2);
        let lf = ladder_by_differentiation(2, 0, &f);
        assert_eq!(lf.eval_at_one(), BigRational::from(BigInt::from(4)));
        // d=3, k=2, m=1, s=2: gamma = 36
        let f = Laurent::monomial(6);
        let lf = ladder_by_differentiation(3, 2, &f);
        assert_eq!(lf.eval_at_one(), BigRational::from(BigInt::from(36)));
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let a = run_suite(Suite::Kernels, 7);
        let b = run_suite(Suite::Kernels, 7);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.measured, y.measured);
        }
    }
}
