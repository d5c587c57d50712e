//! Dense complex least squares and polynomial roots.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{LabError, Result};

pub(crate) struct LstsqSolution {
    pub x: Vec<Complex64>,
}

/// Minimizes ‖A x − b‖² + ridge·‖x‖². Columns are scaled to unit norm, the
/// system is reduced by QR and solved through the SVD of R.
pub(crate) fn lstsq(a: &DMatrix<Complex64>, b: &DVector<Complex64>, ridge: f64) -> Result<LstsqSolution> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return Ok(LstsqSolution { x: vec![] });
    }
    let scales: Vec<f64> = (0..cols)
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 { n } else { 1.0 }
        })
        .collect();
    let extra = if ridge > 0.0 { cols } else { 0 };
    let mut m = DMatrix::<Complex64>::zeros(rows + extra, cols);
    let mut rhs = DVector::<Complex64>::zeros(rows + extra);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = a[(i, j)] / scales[j];
        }
        if extra > 0 {
            // ridge acts on the unscaled coefficients
            m[(rows + j, j)] = Complex64::new(ridge.sqrt() / scales[j], 0.0);
        }
    }
    rhs.rows_mut(0, rows).copy_from(b);

    let qr = m.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let qtb = q.adjoint() * &rhs;
    let svd = r.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    // σ_max/σ_min of the column-equilibrated matrix; fewer equations than
    // unknowns leaves a null space
    let condition = if smin > 0.0 && rows + extra >= cols { smax / smin } else { f64::INFINITY };
    if ridge == 0.0 && !(condition <= 1e14) {
        return Err(LabError::IllConditioned { condition });
    }
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let cutoff = smax * f64::EPSILON * (cols.max(rows) as f64);
    let mut y = DVector::<Complex64>::zeros(sv.len());
    let utb = u.adjoint() * qtb;
    for k in 0..sv.len() {
        if sv[k] > cutoff {
            y[k] = utb[k] / sv[k];
        }
    }
    let xs = vt.adjoint() * y;
    let x = (0..cols).map(|j| xs[j] / scales[j]).collect();
    Ok(LstsqSolution { x })
}

/// Roots of an ascending-coefficient polynomial via companion eigenvalues.
pub(crate) fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = crate::poly::degree(coeffs);
    if deg == 0 {
        return vec![];
    }
    let lead = coeffs[deg];
    let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    comp.schur().eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn recovers_exact_linear_fit() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let a = DMatrix::from_fn(10, 2, |i, j| if j == 0 { c(1.0, 0.0) } else { c(xs[i], 0.0) });
        let b = DVector::from_fn(10, |i, _| c(2.0 - 3.0 * xs[i], 0.5));
        let s = lstsq(&a, &b, 0.0).unwrap();
        assert!((s.x[0] - c(2.0, 0.5)).norm() < 1e-13);
        assert!((s.x[1] - c(-3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn rank_deficient_flags_conditioning() {
        let a = DMatrix::from_fn(4, 2, |_, _| c(1.0, 0.0));
        let b = DVector::from_element(4, c(1.0, 0.0));
        assert!(matches!(lstsq(&a, &b, 0.0), Err(LabError::IllConditioned { .. })));
        assert!(lstsq(&a, &b, 1e-12).is_ok());
    }

    #[test]
    fn cubic_roots() {
        // (z-1)(z+2)(z-i)
        let p = crate::poly::mul(&crate::poly::mul(&[c(-1.0, 0.0), c(1.0, 0.0)], &[c(2.0, 0.0), c(1.0, 0.0)]), &[c(0.0, -1.0), c(1.0, 0.0)]);
        let mut r = poly_roots(&p);
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (got, want) in r.iter().zip([c(-2.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)]) {
            assert!((got - want).norm() < 1e-12);
        }
    }
}
