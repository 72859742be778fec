//! Cauchy-type, complexified Poisson and Hua-Aronszajn kernels, in series
//! and closed form, plus the reproducing formula that recovers interior
//! values of a table from its boundary trace.
//!
//! All closed forms carry the `1/omega_d` normalization that the
//! orthonormal series expansions force; with it, reproduction on the basis
//! elements is exact. Powers `(.)^(-d/2)` are taken through the factored
//! form `(1 - e^(i psi) w)(1 - e^(-i psi) w)` with `cos psi = <theta,
//! theta'>`; each factor stays in the right half plane for `|w| < 1`, so the
//! principal logarithm never crosses a branch cut in the admissible region.

use num_complex::Complex64;

use crate::almansi::AlmansiTable;
use crate::hardy::boundary_trace;
use crate::sphere::{eval_harmonics_up_to, eval_zonal, surface_area, SphereRule};
use crate::{Error, Result};

/// An evaluation point for the kernels: an interior argument `(zeta,
/// theta')` and a second argument `(z, theta)` on or off the boundary.
#[derive(Debug, Clone)]
pub struct KernelPoint {
    pub zeta: Complex64,
    pub theta_prime: Vec<f64>,
    pub z: Complex64,
    pub theta: Vec<f64>,
}

impl KernelPoint {
    pub fn new(zeta: Complex64, theta_prime: Vec<f64>, z: Complex64, theta: Vec<f64>) -> Self {
        KernelPoint {
            zeta,
            theta_prime,
            z,
            theta,
        }
    }

    /// Cosine of the angle between the two directions.
    pub fn cos_angle(&self, d: usize) -> Result<f64> {
        if self.theta.len() != d || self.theta_prime.len() != d {
            return Err(Error::Domain(format!(
                "directions have lengths {} and {}, expected {d}",
                self.theta.len(),
                self.theta_prime.len()
            )));
        }
        let c: f64 = self
            .theta
            .iter()
            .zip(&self.theta_prime)
            .map(|(a, b)| a * b)
            .sum();
        if c.abs() > 1.0 + 1e-10 {
            return Err(Error::Domain(format!(
                "directions are not unit vectors (cos = {c})"
            )));
        }
        Ok(c.clamp(-1.0, 1.0))
    }
}

/// `((1 - 2 w c + w^2))^(-d/2)` through the factorization
/// `(1 - e^(i psi) w)(1 - e^(-i psi) w)`, `cos psi = c`, with principal
/// logarithms of the two factors taken separately.
fn factored_inv_power(d: usize, w: Complex64, c: f64) -> Result<Complex64> {
    let s = (1.0 - c * c).max(0.0).sqrt();
    let root = Complex64::new(c, s); // e^{i psi}
    let f1 = Complex64::new(1.0, 0.0) - root * w;
    let f2 = Complex64::new(1.0, 0.0) - root.conj() * w;
    let quad = f1 * f2;
    if quad.norm() < 1e-14 {
        return Err(Error::Singularity(format!(
            "1 - 2wc + w^2 vanishes at w = {w}, c = {c}"
        )));
    }
    let exponent = -(d as f64) / 2.0;
    Ok((exponent * (f1.ln() + f2.ln())).exp())
}

/// Zonal generating sum `sum_{k <= k_max} w^k Z^(k)(c)`.
fn zonal_series(d: usize, w: Complex64, c: f64, k_max: usize) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for k in 0..=k_max {
        acc += pow * eval_zonal(d, k, c)?;
        pow *= w;
    }
    Ok(acc)
}

/// Truncated double series `sum_{j <= j_max} sum_{k <= k_max} (zeta z)^(2j+k)
/// sum_l Y_{k,l}(theta') Y_{k,l}(theta)`, with the l-sum folded through the
/// zonal function.
pub fn cauchy_kernel_series(
    d: usize,
    p: &KernelPoint,
    k_max: usize,
    j_max: usize,
) -> Result<Complex64> {
    let w = p.zeta * p.z;
    if w.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "series diverges for |zeta z| = {} >= 1",
            w.norm()
        )));
    }
    let c = p.cos_angle(d)?;
    let k_sum = zonal_series(d, w, c, k_max)?;
    let w2 = w * w;
    let mut j_sum = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for _ in 0..=j_max {
        j_sum += pow;
        pow *= w2;
    }
    Ok(j_sum * k_sum)
}

/// Closed form of the Cauchy-type kernel:
/// `(1/omega_d) (1 - 2 zeta z c + (zeta z)^2)^(-d/2)`.
pub fn cauchy_kernel(d: usize, p: &KernelPoint) -> Result<Complex64> {
    let w = p.zeta * p.z;
    if w.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "closed form needs |zeta z| < 1, got {}",
            w.norm()
        )));
    }
    let c = p.cos_angle(d)?;
    Ok(factored_inv_power(d, w, c)? / surface_area(d))
}

/// Complexified Poisson kernel
/// `(1/omega_d) (1 - w^2) (1 - 2 w c + w^2)^(-d/2)`; for real `w in [0, 1)`
/// this is the classical Poisson kernel of the ball.
pub fn poisson_kernel_c(d: usize, w: Complex64, c: f64) -> Result<Complex64> {
    if w.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "Poisson kernel needs |w| < 1, got {}",
            w.norm()
        )));
    }
    if c.abs() > 1.0 + 1e-10 {
        return Err(Error::Domain(format!("cosine {c} outside [-1, 1]")));
    }
    let c = c.clamp(-1.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    Ok((one - w * w) * factored_inv_power(d, w, c)? / surface_area(d))
}

/// Hua-Aronszajn kernel
/// `(1/omega_d) z^(d-1) (zeta^2 - 2 zeta z c + z^2)^(-d/2)`, computed as
/// `(1/(omega_d z))` times the factored inverse power in `w = zeta / z`.
pub fn hua_aronszajn_kernel(d: usize, p: &KernelPoint) -> Result<Complex64> {
    if p.z.norm() <= p.zeta.norm() {
        return Err(Error::Domain(format!(
            "Hua-Aronszajn kernel needs |zeta| < |z|, got |zeta| = {}, |z| = {}",
            p.zeta.norm(),
            p.z.norm()
        )));
    }
    let c = p.cos_angle(d)?;
    let w = p.zeta / p.z;
    Ok(factored_inv_power(d, w, c)? / (surface_area(d) * p.z))
}

/// Recover the value of the table at `(zeta, theta')` from its boundary
/// trace, by quadrature of the reproducing integral
/// `(1/2pi) int int K(zeta, theta'; 1/z, theta) f*(z, theta) dphi dtheta`
/// over `z = e^(i phi)`.
///
/// `rule` must resolve products of the table's harmonics with their own
/// degree (`exact_degree >= 2 max k`), and `n_phi` must exceed twice the
/// largest circle frequency carried by the trace. Accuracy improves further
/// with the margin above those minima, since the kernel's own expansion is
/// damped only by powers of `|zeta|`.
pub fn reproduce(
    t: &AlmansiTable,
    zeta: Complex64,
    theta_prime: &[f64],
    rule: &SphereRule,
    n_phi: usize,
) -> Result<Complex64> {
    let d = t.d();
    if zeta.norm() >= 1.0 {
        return Err(Error::Domain(format!(
            "reproduction point needs |zeta| < 1, got {}",
            zeta.norm()
        )));
    }
    if rule.d() != d {
        return Err(Error::Precondition(format!(
            "rule dimension {} does not match the table (d={d})",
            rule.d()
        )));
    }
    if rule.exact_degree() < 2 * t.max_k() {
        return Err(Error::Precondition(format!(
            "rule exact to degree {} cannot integrate harmonics up to k = {}",
            rule.exact_degree(),
            t.max_k()
        )));
    }
    if n_phi <= 2 * t.max_power() {
        return Err(Error::Precondition(format!(
            "n_phi = {n_phi} must exceed twice the top circle frequency {}",
            t.max_power()
        )));
    }

    let trace = boundary_trace(t);
    let omega = surface_area(d);
    let two_pi = 2.0 * std::f64::consts::PI;

    // Per-node harmonic tables and <theta, theta'> once.
    let k_max = t.max_k();
    let mut node_harmonics = Vec::with_capacity(rule.len());
    let mut cosines = Vec::with_capacity(rule.len());
    for node in rule.nodes() {
        node_harmonics.push(eval_harmonics_up_to(d, k_max, node)?);
        let c: f64 = node.iter().zip(theta_prime).map(|(a, b)| a * b).sum();
        cosines.push(c.clamp(-1.0, 1.0));
    }

    let entries: Vec<(i64, usize, usize, Complex64)> = trace
        .entries()
        .iter()
        .map(|(&(j, mode), &v)| (j, mode.k, mode.ell, v))
        .collect();

    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..n_phi {
        let phi = two_pi * m as f64 / n_phi as f64;
        let z = Complex64::from_polar(1.0, phi);
        let w = zeta * z.conj(); // zeta / z on the unit circle
        let circle: Vec<Complex64> = {
            // e^{i j phi} for the frequencies present, computed per entry
            entries
                .iter()
                .map(|&(j, _, _, _)| Complex64::from_polar(1.0, j as f64 * phi))
                .collect()
        };
        for (i, (node_tab, &c)) in node_harmonics.iter().zip(&cosines).enumerate() {
            let kernel = factored_inv_power(d, w, c)? / omega;
            let mut fstar = Complex64::new(0.0, 0.0);
            for (e, &(_, k, ell, v)) in entries.iter().enumerate() {
                fstar += v * circle[e] * node_tab[k][ell - 1];
            }
            acc += rule.weights()[i] * kernel * fstar;
        }
    }
    Ok(acc / n_phi as f64)
}

/// Same reproduction integral written through the modified Poisson-type
/// kernel `P_{r^2}(2 phi - 2 phi') K_P(zeta / z, theta, theta')`, where
/// `P_rho` is the classical two-dimensional Poisson kernel. Kept internal:
/// it recovers exactly the same values as [`reproduce`] and exists as a
/// cross-check of that identity.
#[allow(dead_code)]
pub(crate) fn reproduce_modified_poisson(
    t: &AlmansiTable,
    zeta: Complex64,
    theta_prime: &[f64],
    rule: &SphereRule,
    n_phi: usize,
) -> Result<Complex64> {
    let d = t.d();
    let trace = boundary_trace(t);
    let (r, phi_prime) = zeta.to_polar();
    if r >= 1.0 {
        return Err(Error::Domain("needs |zeta| < 1".to_string()));
    }
    let rho = r * r;
    let two_pi = 2.0 * std::f64::consts::PI;
    let k_max = t.max_k();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..n_phi {
        let phi = two_pi * m as f64 / n_phi as f64;
        let z = Complex64::from_polar(1.0, phi);
        let w = zeta * z.conj();
        let angle = 2.0 * (phi - phi_prime);
        let poisson_circle =
            (1.0 - rho * rho) / (1.0 - 2.0 * rho * angle.cos() + rho * rho);
        for (node, &wt) in rule.nodes().iter().zip(rule.weights()) {
            let c: f64 = node.iter().zip(theta_prime).map(|(a, b)| a * b).sum();
            let kp = poisson_kernel_c(d, w, c.clamp(-1.0, 1.0))?;
            let node_tab = eval_harmonics_up_to(d, k_max, node)?;
            let mut fstar = Complex64::new(0.0, 0.0);
            for (&(j, mode), &v) in trace.entries() {
                let circle = Complex64::from_polar(1.0, j as f64 * phi);
                fstar += v * circle * node_tab[mode.k][mode.ell - 1];
            }
            acc += wt * poisson_circle * kp * fstar;
        }
    }
    Ok(acc / n_phi as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::almansi::AlmansiTable;
    use crate::sphere::{build_sphere_rule, harmonic_dimension, ModeIndex};
    use crate::util::cpow;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_dir(d: usize, rng: &mut impl Rng) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n: f64 = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            if n > 0.1 {
                return v.into_iter().map(|t| t / n).collect();
            }
        }
    }

    fn axis(d: usize) -> Vec<f64> {
        let mut v = vec![0.0; d];
        v[0] = 1.0;
        v
    }

    #[test]
    fn kernel_at_the_origin_is_inverse_surface() {
        for d in 2..=4 {
            let p = KernelPoint::new(c64(0.0, 0.0), axis(d), c64(1.0, 0.0), axis(d));
            let series = cauchy_kernel_series(d, &p, 10, 10).unwrap();
            let closed = cauchy_kernel(d, &p).unwrap();
            let want = 1.0 / surface_area(d);
            assert!((series - c64(want, 0.0)).norm() < 1e-14);
            assert!((closed - c64(want, 0.0)).norm() < 1e-14);
            let poisson = poisson_kernel_c(d, c64(0.0, 0.0), 0.3).unwrap();
            assert!((poisson - c64(want, 0.0)).norm() < 1e-14);
            let hua = hua_aronszajn_kernel(
                d,
                &KernelPoint::new(c64(0.0, 0.0), axis(d), c64(1.0, 0.0), axis(d)),
            )
            .unwrap();
            assert!((hua - c64(want, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn aligned_directions_d2_closed_form() {
        // theta = theta', w real: (1/2pi)(1-w)^-2
        let w = 0.37f64;
        let p = KernelPoint::new(c64(w, 0.0), axis(2), c64(1.0, 0.0), axis(2));
        let got = cauchy_kernel(2, &p).unwrap();
        let want = 1.0 / (2.0 * PI * (1.0 - w) * (1.0 - w));
        assert!((got - c64(want, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn poisson_d2_closed_form() {
        let w = 0.41f64;
        let psi = 1.234f64;
        let got = poisson_kernel_c(2, c64(w, 0.0), psi.cos()).unwrap();
        let want = (1.0 - w * w) / (2.0 * PI * (1.0 - 2.0 * w * psi.cos() + w * w));
        assert!((got - c64(want, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn poisson_matches_zonal_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for d in 2..=4 {
            for _ in 0..20 {
                let w = Complex64::from_polar(0.5, rng.random_range(0.0..2.0 * PI));
                let c = rng.random_range(-1.0..1.0);
                let closed = poisson_kernel_c(d, w, c).unwrap();
                let mut series = c64(0.0, 0.0);
                let mut pow = c64(1.0, 0.0);
                for k in 0..=80 {
                    series += pow * eval_zonal(d, k, c).unwrap();
                    pow *= w;
                }
                assert!(
                    (closed - series).norm() < 1e-9,
                    "d={d}: {closed} vs {series}"
                );
            }
        }
    }

    #[test]
    fn series_truncation_converges_geometrically() {
        let p = KernelPoint::new(c64(0.5, 0.2), axis(3), c64(0.9, 0.1), axis(3));
        let mut prev_gap = f64::INFINITY;
        let reference = cauchy_kernel_series(3, &p, 120, 120).unwrap();
        for n in [10usize, 20, 40, 80] {
            let truncated = cauchy_kernel_series(3, &p, n, n).unwrap();
            let gap = (truncated - reference).norm();
            assert!(gap < prev_gap + 1e-15);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-10);
    }

    #[test]
    fn closed_forms_match_series_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for d in 2..=4 {
            for _ in 0..40 {
                let w = Complex64::from_polar(
                    rng.random_range(0.0..0.6),
                    rng.random_range(0.0..2.0 * PI),
                );
                let z = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
                let zeta = w / z;
                let theta = random_dir(d, &mut rng);
                let theta_p = random_dir(d, &mut rng);
                let p = KernelPoint::new(zeta, theta_p.clone(), z, theta.clone());
                let closed = cauchy_kernel(d, &p).unwrap();
                let series = cauchy_kernel_series(d, &p, 60, 60).unwrap();
                assert!(
                    (closed - series).norm() < 1e-8,
                    "cauchy d={d}: gap {:e}",
                    (closed - series).norm()
                );

                // Hua kernel against its own series (1/(omega z)) sum w^{2j+k} Z
                let hp = KernelPoint::new(zeta * z, theta_p, z, theta);
                let hua = hua_aronszajn_kernel(d, &hp).unwrap();
                // H = (1/z) K(zeta, theta'; 1/z, theta); the zonal-folded
                // series already carries the 1/omega_d normalization
                let hua_series = cauchy_kernel_series(
                    d,
                    &KernelPoint::new(
                        hp.zeta / hp.z,
                        hp.theta_prime.clone(),
                        c64(1.0, 0.0),
                        hp.theta.clone(),
                    ),
                    60,
                    60,
                )
                .unwrap()
                    / hp.z;
                assert!(
                    (hua - hua_series).norm() < 1e-8,
                    "hua d={d}: gap {:e}",
                    (hua - hua_series).norm()
                );
            }
        }
    }

    #[test]
    fn hua_algebraic_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for d in 2..=5 {
            for _ in 0..10 {
                let z = Complex64::from_polar(
                    rng.random_range(0.8..1.2),
                    rng.random_range(0.0..2.0 * PI),
                );
                let zeta = z * Complex64::from_polar(
                    rng.random_range(0.0..0.7),
                    rng.random_range(0.0..2.0 * PI),
                );
                let theta = random_dir(d, &mut rng);
                let theta_p = random_dir(d, &mut rng);
                let p = KernelPoint::new(zeta, theta_p, z, theta);
                let c = p.cos_angle(d).unwrap();
                let hua = hua_aronszajn_kernel(d, &p).unwrap();
                let direct = factored_inv_power(d, zeta / z, c).unwrap();
                assert!((z * surface_area(d) * hua - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..20 {
            let d = 3;
            let zeta = Complex64::from_polar(rng.random_range(0.0..0.7), rng.random_range(0.0..std::f64::consts::TAU));
            let z = Complex64::from_polar(rng.random_range(0.7..1.0), rng.random_range(0.0..std::f64::consts::TAU));
            let theta = random_dir(d, &mut rng);
            let theta_p = random_dir(d, &mut rng);
            let base = cauchy_kernel(
                d,
                &KernelPoint::new(zeta, theta_p.clone(), z, theta.clone()),
            )
            .unwrap();
            // swap the two directions
            let swapped = cauchy_kernel(
                d,
                &KernelPoint::new(zeta, theta.clone(), z, theta_p.clone()),
            )
            .unwrap();
            assert!((base - swapped).norm() < 1e-15);
            // simultaneous antipodal flip of both quadric points
            let neg_theta: Vec<f64> = theta.iter().map(|x| -x).collect();
            let neg_theta_p: Vec<f64> = theta_p.iter().map(|x| -x).collect();
            let flipped =
                cauchy_kernel(d, &KernelPoint::new(-zeta, neg_theta_p, -z, neg_theta)).unwrap();
            assert!((base - flipped).norm() < 1e-15);
        }
    }

    /// Stepwise analytic continuation along a path must agree with direct
    /// evaluation: the factored power has no branch cut in |w| < 1.
    #[test]
    fn branch_continuity_along_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for d in [2usize, 3, 5] {
            for _ in 0..10 {
                let c: f64 = rng.random_range(-0.99..0.99);
                let w0 = Complex64::from_polar(0.1, rng.random_range(0.0..std::f64::consts::TAU));
                let w1 = Complex64::from_polar(0.85, rng.random_range(0.0..std::f64::consts::TAU));
                let quad = |w: Complex64| {
                    let one = c64(1.0, 0.0);
                    one - 2.0 * w * c + w * w
                };
                let mut cont = factored_inv_power(d, w0, c).unwrap();
                let steps = 10;
                for i in 1..=steps {
                    let t0 = (i - 1) as f64 / steps as f64;
                    let t1 = i as f64 / steps as f64;
                    let wa = w0 + (w1 - w0) * t0;
                    let wb = w0 + (w1 - w0) * t1;
                    // continue by the principal log of the ratio (small step)
                    let ratio = quad(wb) / quad(wa);
                    cont *= (-(d as f64) / 2.0 * ratio.ln()).exp();
                    let direct = factored_inv_power(d, wb, c).unwrap();
                    assert!(
                        (cont - direct).norm() < 1e-12 * direct.norm(),
                        "d={d}, step {i}"
                    );
                }
            }
        }
    }

    #[test]
    fn singular_point_is_reported() {
        // w = e^{-i psi} makes the first factor vanish
        let c: f64 = 0.3;
        let psi = c.acos();
        let w = Complex64::from_polar(1.0 - 1e-16, -psi);
        assert!(matches!(
            factored_inv_power(3, w, c),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn reproduces_basis_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for d in [2usize, 3] {
            let rule = build_sphere_rule(d, 24).unwrap();
            for _ in 0..6 {
                let k = rng.random_range(0..5usize);
                let a_k = harmonic_dimension(d, k).unwrap();
                let ell = rng.random_range(1..=a_k);
                let j = rng.random_range(0..3usize);
                let mut t = AlmansiTable::new(d);
                let mut coeffs = vec![c64(0.0, 0.0); j + 1];
                coeffs[j] = c64(1.0, 0.0);
                t.set_mode(ModeIndex::new(k, ell), coeffs).unwrap();
                let zeta = Complex64::from_polar(0.5, rng.random_range(0.0..std::f64::consts::TAU));
                let theta_p = random_dir(d, &mut rng);
                let got = reproduce(&t, zeta, &theta_p, &rule, 48).unwrap();
                let y = crate::sphere::eval_harmonic(d, ModeIndex::new(k, ell), &theta_p).unwrap();
                let want = cpow(zeta, k + 2 * j) * y;
                assert!(
                    (got - want).norm() < 1e-9,
                    "d={d}, k={k}, l={ell}, j={j}: gap {:e}",
                    (got - want).norm()
                );
            }
        }
    }

    #[test]
    fn reproduction_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let d = 2;
        let rule = build_sphere_rule(d, 20).unwrap();
        let mut t1 = AlmansiTable::new(d);
        t1.set_mode(ModeIndex::new(1, 1), vec![c64(1.0, 0.0), c64(0.0, 0.5)])
            .unwrap();
        let mut t2 = AlmansiTable::new(d);
        t2.set_mode(ModeIndex::new(3, 2), vec![c64(0.0, -1.0)])
            .unwrap();
        let (a, b) = (c64(0.7, 0.1), c64(-0.3, 0.8));
        let mut combo = t1.scaled(a);
        combo.axpy(b, &t2).unwrap();
        let zeta = c64(0.3, -0.2);
        let theta_p = random_dir(d, &mut rng);
        let lhs = reproduce(&combo, zeta, &theta_p, &rule, 40).unwrap();
        let rhs = a * reproduce(&t1, zeta, &theta_p, &rule, 40).unwrap()
            + b * reproduce(&t2, zeta, &theta_p, &rule, 40).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn reproduces_random_tables_against_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for d in [2usize, 3] {
            let rule = build_sphere_rule(d, 30).unwrap();
            for _ in 0..3 {
                let mut t = AlmansiTable::new(d);
                for k in 0..=6usize {
                    let a_k = harmonic_dimension(d, k).unwrap();
                    for ell in 1..=a_k {
                        if rng.random_bool(0.5) {
                            let coeffs: Vec<Complex64> = (0..=(6 - k) / 2)
                                .map(|_| {
                                    c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                                })
                                .collect();
                            t.set_mode(ModeIndex::new(k, ell), coeffs).unwrap();
                        }
                    }
                }
                let zeta = Complex64::from_polar(0.5, rng.random_range(0.0..std::f64::consts::TAU));
                let theta_p = random_dir(d, &mut rng);
                let got = reproduce(&t, zeta, &theta_p, &rule, 64).unwrap();
                let want = t.evaluate(zeta, &theta_p).unwrap();
                assert!(
                    (got - want).norm() < 1e-7,
                    "d={d}: gap {:e}",
                    (got - want).norm()
                );
            }
        }
    }

    #[test]
    fn modified_poisson_route_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let d = 2;
        let rule = build_sphere_rule(d, 20).unwrap();
        let mut t = AlmansiTable::new(d);
        for k in 0..=4usize {
            let a_k = harmonic_dimension(d, k).unwrap();
            for ell in 1..=a_k {
                let coeffs: Vec<Complex64> = (0..=(4 - k) / 2)
                    .map(|_| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                t.set_mode(ModeIndex::new(k, ell), coeffs).unwrap();
            }
        }
        let zeta = c64(0.25, 0.35);
        let theta_p = random_dir(d, &mut rng);
        let via_k = reproduce(&t, zeta, &theta_p, &rule, 48).unwrap();
        let via_poisson = reproduce_modified_poisson(&t, zeta, &theta_p, &rule, 48).unwrap();
        assert!(
            (via_k - via_poisson).norm() < 1e-9,
            "gap {:e}",
            (via_k - via_poisson).norm()
        );
    }

    #[test]
    fn reproduce_validates_resolution() {
        let d = 2;
        let mut t = AlmansiTable::new(d);
        t.set_mode(ModeIndex::new(4, 1), vec![c64(1.0, 0.0)]).unwrap();
        let thin_rule = build_sphere_rule(d, 4).unwrap();
        assert!(matches!(
            reproduce(&t, c64(0.1, 0.0), &[1.0, 0.0], &thin_rule, 64),
            Err(Error::Precondition(_))
        ));
        let rule = build_sphere_rule(d, 8).unwrap();
        assert!(matches!(
            reproduce(&t, c64(0.1, 0.0), &[1.0, 0.0], &rule, 8),
            Err(Error::Precondition(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// The inner-product form of reproduction on real-coefficient basis
        /// elements: <K(zeta, theta'; ., .), b>_* = b(zeta, theta').
        #[test]
        fn kernel_pairs_with_basis_elements(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 2;
            let k = rng.random_range(0..4usize);
            let a_k = harmonic_dimension(d, k).unwrap();
            let ell = rng.random_range(1..=a_k);
            let j = rng.random_range(0..3usize);
            let rule = build_sphere_rule(d, 16).unwrap();
            // the first parity-allowed aliasing term enters at |zeta|^n_phi
            let n_phi = 48;
            let zeta = Complex64::from_polar(rng.random_range(0.0..0.6), rng.random_range(0.0..std::f64::consts::TAU));
            let theta_p = random_dir(d, &mut rng);
            // (1/2pi) int int K(zeta, theta'; z, theta) conj(b(z, theta))
            let mut acc = c64(0.0, 0.0);
            for m in 0..n_phi {
                let phi = 2.0 * PI * m as f64 / n_phi as f64;
                let z = Complex64::from_polar(1.0, phi);
                for (node, &w) in rule.nodes().iter().zip(rule.weights()) {
                    let p = KernelPoint::new(zeta, theta_p.clone(), z, node.clone());
                    let kern = cauchy_kernel(d, &p).unwrap();
                    let y = crate::sphere::eval_harmonic(d, ModeIndex::new(k, ell), node).unwrap();
                    let b = cpow(z, k + 2 * j) * y;
                    acc += w * kern * b.conj();
                }
            }
            acc /= n_phi as f64;
            let y_p = crate::sphere::eval_harmonic(d, ModeIndex::new(k, ell), &theta_p).unwrap();
            let want = cpow(zeta, k + 2 * j) * y_p;
            prop_assert!((acc - want).norm() < 1e-9);
        }
    }
}
