//! Small numeric helpers shared across modules.

use num_complex::Complex64;

/// Pairwise (tree) summation with a fixed split point. Deterministic for a
/// given input order and considerably more accurate than a running sum on
/// long inputs.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub(crate) fn binomial_u128(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// z^n by repeated multiplication. Deterministic evaluation order; n stays
/// small (series degrees) so the linear cost is irrelevant.
pub(crate) fn cpow(z: Complex64, n: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        acc *= z;
    }
    acc
}

/// Legendre P_n and its derivative at x, by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for m in 2..=n {
        let mf = m as f64;
        let next = ((2.0 * mf - 1.0) * x * p - (mf - 1.0) * p_prev) / mf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi-style initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..64 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = -p / d;
            x += dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Gauss-Legendre rule transplanted to [a, b].
pub(crate) fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| v * half).collect(),
    )
}

/// Monic polynomial with the given roots; coefficients low to high.
pub(crate) fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; roots.len() + 1];
    coeffs[0] = 1.0;
    let mut deg = 0;
    for &r in roots {
        for i in (0..=deg).rev() {
            coeffs[i + 1] += coeffs[i];
            coeffs[i] *= -r;
        }
        deg += 1;
    }
    coeffs
}

/// Horner evaluation of a complex-coefficient polynomial (low to high).
pub(crate) fn horner(coeffs: &[Complex64], s: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * s + c;
    }
    acc
}

/// Interpolating polynomial through (nodes[i], values[i]) in monomial form,
/// via Newton divided differences. Nodes must be pairwise distinct.
pub(crate) fn newton_to_monomial(nodes: &[f64], values: &[Complex64]) -> Vec<Complex64> {
    let n = nodes.len();
    assert_eq!(n, values.len());
    let mut dd = values.to_vec();
    for order in 1..n {
        for i in (order..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - order]);
        }
    }
    // Expand the Newton form c0 + (s-x0)(c1 + (s-x1)(...)) into monomials.
    let mut mono = vec![Complex64::new(0.0, 0.0); n];
    mono[0] = dd[n - 1];
    let mut len = 1;
    for k in (0..n - 1).rev() {
        // multiply by (s - nodes[k]) then add dd[k]
        for i in (0..len).rev() {
            let v = mono[i];
            mono[i + 1] += v;
            mono[i] = -nodes[k] * v;
        }
        mono[0] += dd[k];
        len += 1;
    }
    mono
}

/// Solve the dual Vandermonde system `sum_j x_j u_j^i = b_i`, i = 0..n,
/// through the Lagrange basis: x_j is the moment functional applied to the
/// j-th cardinal polynomial. Returns None when two abscissae collide.
pub(crate) fn solve_dual_vandermonde(u: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = u.len();
    assert_eq!(n, b.len());
    for i in 0..n {
        for j in i + 1..n {
            if (u[i] - u[j]).abs() < 1e-14 * (1.0 + u[i].abs().max(u[j].abs())) {
                return None;
            }
        }
    }
    let omega = poly_from_roots(u);
    let mut x = vec![0.0; n];
    for j in 0..n {
        // deflate omega by the root u_j: q(s) = omega(s) / (s - u_j)
        let mut q = vec![0.0; n];
        let mut carry = omega[n];
        for i in (0..n).rev() {
            q[i] = carry;
            carry = omega[i] + u[j] * carry;
        }
        let denom: f64 = (0..n)
            .filter(|&i| i != j)
            .map(|i| u[j] - u[i])
            .product();
        let num: f64 = q.iter().zip(b.iter()).map(|(&c, &m)| c * m).sum();
        x[j] = num / denom;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_monomials() {
        let (x, w) = gauss_legendre(8);
        for p in 0..16 {
            let num: f64 = x.iter().zip(&w).map(|(&t, &wt)| wt * t.powi(p)).sum();
            let exact = if p % 2 == 1 {
                0.0
            } else {
                2.0 / (p as f64 + 1.0)
            };
            assert!(
                (num - exact).abs() < 1e-13,
                "degree {p}: {num} vs {exact}"
            );
        }
    }

    #[test]
    fn newton_roundtrip() {
        let nodes = [0.1, 0.4, 0.55, 0.9];
        let coeffs = [
            Complex64::new(1.0, -2.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(-3.0, 1.0),
            Complex64::new(2.0, 2.0),
        ];
        let values: Vec<Complex64> = nodes
            .iter()
            .map(|&s| horner(&coeffs, Complex64::new(s, 0.0)))
            .collect();
        let back = newton_to_monomial(&nodes, &values);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn dual_vandermonde_residual() {
        let u = [0.04, 0.2, 0.5, 0.81];
        let b = [1.0, 0.3, 0.2, 0.15];
        let x = solve_dual_vandermonde(&u, &b).unwrap();
        for (i, &bi) in b.iter().enumerate() {
            let lhs: f64 = x.iter().zip(&u).map(|(&xj, &uj)| xj * uj.powi(i as i32)).sum();
            assert!((lhs - bi).abs() < 1e-12);
        }
    }
}
