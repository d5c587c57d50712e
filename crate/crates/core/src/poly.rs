//! Dense complex polynomials in ascending-power coefficient order.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Value and first derivative in one Horner pass.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Drops trailing (highest-order) exact zeros, keeping at least one coefficient.
pub fn trim(mut coeffs: Vec<Complex64>) -> Vec<Complex64> {
    while coeffs.len() > 1 && coeffs.last() == Some(&ZERO) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        coeffs.push(ZERO);
    }
    coeffs
}

pub fn degree(coeffs: &[Complex64]) -> usize {
    coeffs.iter().rposition(|c| *c != ZERO).unwrap_or(0)
}

pub fn is_zero(coeffs: &[Complex64]) -> bool {
    coeffs.iter().all(|c| *c == ZERO)
}

pub fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

pub fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|&c| c * s).collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return vec![ZERO];
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn pow(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![ONE];
    for _ in 0..n {
        out = mul(&out, a);
    }
    out
}

/// Coefficients of p(z0 + u) as a polynomial in u.
pub fn taylor_shift(coeffs: &[Complex64], z0: Complex64) -> Vec<Complex64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    // repeated synthetic division
    for i in 0..n {
        for k in (i..n - 1).rev() {
            let next = out[k + 1];
            out[k] += z0 * next;
        }
    }
    out
}

/// Truncated power-series helpers: all series carry `len` coefficients.
pub mod series {
    use super::{ONE, ZERO};
    use num_complex::Complex64;

    pub fn mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; len];
        for (i, &x) in a.iter().enumerate().take(len) {
            if x == ZERO {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(len - i) {
                out[i + j] += x * y;
            }
        }
        out
    }

    /// a / b, requires b[0] != 0.
    pub fn div(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; len];
        let b0 = b[0];
        for k in 0..len {
            let mut acc = a.get(k).copied().unwrap_or(ZERO);
            for j in 1..=k {
                if let Some(&bj) = b.get(j) {
                    acc -= bj * out[k - j];
                }
            }
            out[k] = acc / b0;
        }
        out
    }

    /// log(1 + s) for a series with s[0] = 0.
    pub fn log1p(s: &[Complex64], len: usize) -> Vec<Complex64> {
        let ds: Vec<Complex64> = (1..len).map(|k| s.get(k).copied().unwrap_or(ZERO) * k as f64).collect();
        let mut one_plus = vec![ZERO; len];
        one_plus[0] = ONE;
        for k in 1..len {
            one_plus[k] = s.get(k).copied().unwrap_or(ZERO);
        }
        let q = div(&ds, &one_plus, len);
        let mut out = vec![ZERO; len];
        for k in 1..len {
            out[k] = q[k - 1] / k as f64;
        }
        out
    }

    /// exp(l) for a series with l[0] = 0.
    pub fn exp(l: &[Complex64], len: usize) -> Vec<Complex64> {
        // e' = l' e
        let mut out = vec![ZERO; len];
        out[0] = ONE;
        for n in 1..len {
            let mut acc = ZERO;
            for k in 1..=n {
                if let Some(&lk) = l.get(k) {
                    acc += lk * k as f64 * out[n - k];
                }
            }
            out[n] = acc / n as f64;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn shift_matches_direct_evaluation() {
        let p = vec![c(1.0), Complex64::new(0.0, 2.0), c(-3.0), c(0.5)];
        let z0 = Complex64::new(0.3, -0.7);
        let q = taylor_shift(&p, z0);
        for u in [c(0.0), c(0.4), Complex64::new(-0.2, 0.9)] {
            assert!((eval(&q, u) - eval(&p, z0 + u)).norm() < 1e-12);
        }
    }

    #[test]
    fn log_exp_roundtrip() {
        let s = vec![c(0.0), c(0.3), Complex64::new(0.1, 0.2), c(-0.05)];
        let l = series::log1p(&s, 8);
        let e = series::exp(&l, 8);
        assert!((e[0] - c(1.0)).norm() < 1e-14);
        for k in 1..4 {
            assert!((e[k] - s[k]).norm() < 1e-13, "k={k}");
        }
        for k in 4..8 {
            assert!(e[k].norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_pass() {
        let p = vec![c(2.0), c(-1.0), c(0.0), c(4.0)];
        let z = Complex64::new(0.5, 0.25);
        let (v, d) = eval_with_derivative(&p, z);
        assert!((v - eval(&p, z)).norm() < 1e-14);
        assert!((d - eval(&derivative(&p), z)).norm() < 1e-14);
    }
}
