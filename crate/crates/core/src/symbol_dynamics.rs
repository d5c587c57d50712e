//! Symbols, their iteration, fixed points and basins.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{CompactGridSet, ComplexPoint, GridSpec};
use crate::poly;

/// Orbits whose modulus exceeds this are reported as escaped.
pub const ESCAPE_RADIUS: f64 = 1e150;
const CLASS_TOL: f64 = 1e-9;

/// Serialized description of a symbol, e.g. `{"kind":"blaschke","alpha":[0.6,0.0]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSpec {
    Polynomial { coeffs: Vec<Complex64> },
    Rational { num: Vec<Complex64>, den: Vec<Complex64> },
    Blaschke { alpha: Complex64 },
}

/// A polynomial or rational map, kept as numerator/denominator pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolSpec", into = "SymbolSpec")]
pub struct HolomorphicMap {
    spec: SymbolSpec,
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

impl TryFrom<SymbolSpec> for HolomorphicMap {
    type Error = LabError;
    fn try_from(spec: SymbolSpec) -> Result<Self> {
        HolomorphicMap::new(spec)
    }
}

impl From<HolomorphicMap> for SymbolSpec {
    fn from(m: HolomorphicMap) -> Self {
        m.spec
    }
}

fn finite(c: &[Complex64]) -> bool {
    c.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl HolomorphicMap {
    pub fn new(spec: SymbolSpec) -> Result<Self> {
        let (num, den) = match &spec {
            SymbolSpec::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(LabError::InvalidInput("polynomial needs at least one coefficient".into()));
                }
                (coeffs.clone(), vec![Complex64::new(1.0, 0.0)])
            }
            SymbolSpec::Rational { num, den } => {
                if num.is_empty() || den.is_empty() || poly::is_zero(den) {
                    return Err(LabError::InvalidInput("rational map needs a nonzero denominator".into()));
                }
                (num.clone(), den.clone())
            }
            SymbolSpec::Blaschke { alpha } => {
                if !(alpha.norm() < 1.0) {
                    return Err(LabError::InvalidInput(format!("Blaschke parameter needs |alpha| < 1, got {alpha}")));
                }
                let one = Complex64::new(1.0, 0.0);
                (vec![Complex64::new(0.0, 0.0), -alpha, one], vec![one, -alpha.conj()])
            }
        };
        if !finite(&num) || !finite(&den) {
            return Err(LabError::InvalidInput("coefficients must be finite".into()));
        }
        Ok(HolomorphicMap { spec, num: poly::trim(num), den: poly::trim(den) })
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(SymbolSpec::Polynomial { coeffs })
    }

    pub fn rational(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        Self::new(SymbolSpec::Rational { num, den })
    }

    /// z(z − α)/(1 − ᾱz).
    pub fn blaschke(alpha: Complex64) -> Result<Self> {
        Self::new(SymbolSpec::Blaschke { alpha })
    }

    /// Polynomial from real ascending coefficients, handy for tests.
    pub fn real_polynomial(coeffs: &[f64]) -> Self {
        Self::polynomial(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect()).expect("finite coefficients")
    }

    pub fn spec(&self) -> &SymbolSpec {
        &self.spec
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.num
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        poly::degree(&self.den) == 0
    }

    /// max(deg num, deg den), without cancelling common factors.
    pub fn degree(&self) -> usize {
        poly::degree(&self.num).max(poly::degree(&self.den))
    }

    /// f(z), or `None` at a pole or when the value is not finite.
    #[inline]
    pub fn eval_opt(&self, z: Complex64) -> Option<Complex64> {
        let n = poly::eval(&self.num, z);
        if self.den.len() == 1 {
            let v = n / self.den[0];
            return (v.re.is_finite() && v.im.is_finite()).then_some(v);
        }
        let d = poly::eval(&self.den, z);
        if d.norm_sqr() == 0.0 {
            return None;
        }
        let v = n / d;
        (v.re.is_finite() && v.im.is_finite()).then_some(v)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_opt(z).ok_or(LabError::PoleHit { step: 1 })
    }

    /// (f(z), f'(z)) via the quotient rule.
    #[inline]
    pub fn eval_with_derivative(&self, z: Complex64) -> Option<(Complex64, Complex64)> {
        let (n, dn) = poly::eval_with_derivative(&self.num, z);
        let (d, dd) = poly::eval_with_derivative(&self.den, z);
        if d.norm_sqr() == 0.0 {
            return None;
        }
        let v = n / d;
        let dv = (dn * d - n * dd) / (d * d);
        let ok = |w: Complex64| w.re.is_finite() && w.im.is_finite();
        (ok(v) && ok(dv)).then_some((v, dv))
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        self.eval_with_derivative(z).map(|x| x.1).ok_or(LabError::PoleHit { step: 1 })
    }

    /// Taylor coefficients a_0..=a_order of f at z0 (a_k = f⁽ᵏ⁾(z0)/k!).
    pub fn taylor_at(&self, z0: Complex64, order: usize) -> Result<Vec<Complex64>> {
        let n = poly::taylor_shift(&self.num, z0);
        let d = poly::taylor_shift(&self.den, z0);
        if d[0].norm_sqr() == 0.0 {
            return Err(LabError::PoleHit { step: 1 });
        }
        Ok(poly::series::div(&n, &d, order + 1))
    }

    /// The map in the local coordinate u = z − z0 around a fixed point,
    /// with the constant term of the numerator pinned to zero.
    pub fn recentered(&self, z0: Complex64) -> Result<LocalMap> {
        let n = poly::taylor_shift(&self.num, z0);
        let d = poly::taylor_shift(&self.den, z0);
        if d[0].norm_sqr() == 0.0 {
            return Err(LabError::PoleHit { step: 1 });
        }
        let mut p = poly::add(&n, &poly::scale(&d, -z0));
        p[0] = Complex64::new(0.0, 0.0);
        Ok(LocalMap { num: poly::trim(p), den: poly::trim(d) })
    }
}

/// g(u) = f(z0 + u) − z0 for a fixed point z0.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalMap {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
}

impl LocalMap {
    #[inline]
    pub fn eval(&self, u: Complex64) -> Option<Complex64> {
        let n = poly::eval(&self.num, u);
        let d = if self.den.len() == 1 { self.den[0] } else { poly::eval(&self.den, u) };
        if d.norm_sqr() == 0.0 {
            return None;
        }
        let v = n / d;
        (v.re.is_finite() && v.im.is_finite()).then_some(v)
    }

    #[inline]
    pub fn eval_with_derivative(&self, u: Complex64) -> Option<(Complex64, Complex64)> {
        let (n, dn) = poly::eval_with_derivative(&self.num, u);
        let (d, dd) = poly::eval_with_derivative(&self.den, u);
        if d.norm_sqr() == 0.0 {
            return None;
        }
        let v = n / d;
        let dv = (dn * d - n * dd) / (d * d);
        (v.re.is_finite() && v.im.is_finite() && dv.re.is_finite() && dv.im.is_finite()).then_some((v, dv))
    }

    pub fn taylor(&self, order: usize) -> Vec<Complex64> {
        poly::series::div(&self.num, &self.den, order + 1)
    }
}

/// Outcome of iterating a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Iterate {
    Point(ComplexPoint),
    /// |fᵏ(z)| passed the overflow guard at iteration `step`.
    Escaped { step: usize },
}

impl Iterate {
    pub fn point(self) -> Option<ComplexPoint> {
        match self {
            Iterate::Point(z) => Some(z),
            Iterate::Escaped { .. } => None,
        }
    }
}

/// fⁿ(z). A pole at iteration k is an error carrying k.
pub fn iterate(f: &HolomorphicMap, z: ComplexPoint, n: usize) -> Result<Iterate> {
    let mut w = z;
    for k in 1..=n {
        w = f.eval_opt(w).ok_or(LabError::PoleHit { step: k })?;
        if w.norm() > ESCAPE_RADIUS {
            return Ok(Iterate::Escaped { step: k });
        }
    }
    Ok(Iterate::Point(w))
}

/// Newton's method on f(z) − z.
pub fn find_fixed_point(f: &HolomorphicMap, guess: ComplexPoint) -> Result<ComplexPoint> {
    const STEPS: usize = 100;
    let mut z = guess;
    let mut converged_at: Option<f64> = None;
    for _ in 0..STEPS {
        let (v, dv) = match f.eval_with_derivative(z) {
            Some(x) => x,
            None => break,
        };
        let g = v - z;
        let gn = g.norm();
        if let Some(prev) = converged_at {
            // keep polishing while it still helps (multiple roots converge slowly)
            if !(gn < prev) {
                break;
            }
        }
        if gn <= 1e-12 {
            converged_at = Some(gn);
            if gn == 0.0 {
                break;
            }
        }
        let dg = dv - Complex64::new(1.0, 0.0);
        if dg.norm_sqr() == 0.0 {
            break;
        }
        let step = g / dg;
        let next = z - step;
        if converged_at.is_some() && step.norm() <= 1e-16 * z.norm().max(1e-300) {
            z = next;
            break;
        }
        z = next;
    }
    match f.eval_opt(z) {
        Some(v) if (v - z).norm() <= 1e-12 => Ok(z),
        _ => Err(LabError::NonConvergence { steps: STEPS }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointClass {
    Superattracting,
    Attracting,
    Neutral,
    IrrationallyIndifferent,
    Repelling,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointInfo {
    pub z0: ComplexPoint,
    pub multiplier: Complex64,
    pub klass: FixedPointClass,
    /// Local degree at a superattracting point.
    pub p: Option<u32>,
    /// Petal count at a neutral point.
    pub m: Option<u32>,
}

const CLASSIFY_ORDER: usize = 24;

fn first_nonzero(coeffs: &[Complex64], from: usize) -> Option<usize> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0f64, f64::max);
    (from..coeffs.len()).find(|&k| coeffs[k].norm() > 1e-12 * scale)
}

pub fn classify_fixed_point(f: &HolomorphicMap, z0: ComplexPoint) -> Result<FixedPointInfo> {
    let fz = f.eval_opt(z0).ok_or(LabError::PoleHit { step: 1 })?;
    let residual = (fz - z0).norm();
    if !(residual <= 1e-10) {
        return Err(LabError::NotAFixedPoint { residual });
    }
    let lambda = f.derivative(z0)?;
    let a = f.taylor_at(z0, CLASSIFY_ORDER)?;
    let modulus = lambda.norm();
    let (klass, p, m) = if modulus <= CLASS_TOL {
        let p = first_nonzero(&a, 2)
            .ok_or_else(|| LabError::InvalidInput("map is locally constant at the fixed point".into()))?;
        (FixedPointClass::Superattracting, Some(p as u32), None)
    } else if modulus < 1.0 - CLASS_TOL {
        (FixedPointClass::Attracting, None, None)
    } else if modulus <= 1.0 + CLASS_TOL {
        if (lambda - 1.0).norm() <= CLASS_TOL {
            let m = first_nonzero(&a, 2)
                .map(|k| (k - 1) as u32)
                .ok_or_else(|| LabError::InvalidInput("map is locally the identity at the fixed point".into()))?;
            (FixedPointClass::Neutral, None, Some(m))
        } else {
            (FixedPointClass::IrrationallyIndifferent, None, None)
        }
    } else {
        (FixedPointClass::Repelling, None, None)
    };
    Ok(FixedPointInfo { z0, multiplier: lambda, klass, p, m })
}

/// Distance to a compact set, zero inside its marked pixels.
struct SetDistance<'a> {
    set: &'a CompactGridSet,
    boundary: Vec<ComplexPoint>,
}

impl<'a> SetDistance<'a> {
    fn new(set: &'a CompactGridSet) -> Self {
        SetDistance { set, boundary: set.boundary_points() }
    }

    fn dist(&self, w: ComplexPoint) -> f64 {
        if self.set.is_raster() && self.set.contains(w) {
            return 0.0;
        }
        self.boundary.iter().map(|b| (w - b).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Smallest N ≤ n_max with fᴺ(K) disjoint from K at raster resolution.
///
/// Pixel centers sit up to one pixel diagonal inside the true set on either
/// side, so the images must clear K's centers by diag·(1 + L) where L bounds
/// |(fᴺ)'| over the samples. For point clouds the margin is zero.
pub fn run_away_index(f: &HolomorphicMap, k: &CompactGridSet, n_max: usize) -> Result<Option<usize>> {
    if k.is_empty() {
        return Err(LabError::EmptySet);
    }
    let diag = k.grid().map(|g| g.pixel_diagonal()).unwrap_or(0.0);
    run_away_with_samples(f, k, k.points(), diag, n_max)
}

pub(crate) fn run_away_with_samples(
    f: &HolomorphicMap,
    k: &CompactGridSet,
    samples: Vec<ComplexPoint>,
    diag: f64,
    n_max: usize,
) -> Result<Option<usize>> {
    let dist = SetDistance::new(k);
    let mut state: Vec<(ComplexPoint, f64)> = samples.into_iter().map(|z| (z, 1.0)).collect();
    for n in 1..=n_max {
        state = state
            .par_iter()
            .map(|&(z, d)| {
                let (w, dw) = f.eval_with_derivative(z).ok_or(LabError::PoleHit { step: n })?;
                if w.norm() > ESCAPE_RADIUS {
                    return Err(LabError::Escaped { step: n });
                }
                Ok((w, d * dw.norm()))
            })
            .collect::<Result<Vec<_>>>()?;
        let lip = state.iter().map(|s| s.1).fold(0.0f64, f64::max);
        let margin = diag * (1.0 + lip);
        if state.par_iter().all(|&(w, _)| dist.dist(w) > margin) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Pixels whose orbit enters |w − z0| < eps within n_max steps.
pub fn basin_raster(f: &HolomorphicMap, z0: ComplexPoint, grid: GridSpec, n_max: usize, eps: f64) -> Result<CompactGridSet> {
    CompactGridSet::from_predicate(grid, |z| enters_disk(f, z, z0, eps, n_max).is_some())
}

/// First k ≤ n_max with |fᵏ(z) − z0| < eps.
pub(crate) fn enters_disk(f: &HolomorphicMap, z: ComplexPoint, z0: ComplexPoint, eps: f64, n_max: usize) -> Option<usize> {
    let mut w = z;
    for k in 0..=n_max {
        if (w - z0).norm() < eps {
            return Some(k);
        }
        if k == n_max {
            break;
        }
        w = f.eval_opt(w)?;
        if w.norm() > ESCAPE_RADIUS {
            return None;
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectivityVerdict {
    InjectiveUpTo(usize),
    Collision { n: usize, i: usize, j: usize },
}

/// First n ≤ n_max at which two orbit points coincide.
///
/// Two points collide when |u − v| < 1e-10·min(1, s) with s the larger of
/// their step lengths |u − f(u)|, |v − f(v)|. Near a superattracting point the
/// orbits shrink below any absolute threshold without merging, so the
/// threshold follows the local scale. Once s drops below 1e-300 both points
/// have numerically merged into the fixed point and the pair is retired.
pub fn finite_injectivity_check(f: &HolomorphicMap, e: &[ComplexPoint], n_max: usize) -> InjectivityVerdict {
    let k = e.len();
    let mut cur: Vec<Option<ComplexPoint>> = e.iter().map(|&z| Some(z)).collect();
    let mut retired = vec![false; k * k];
    for n in 1..=n_max {
        for z in cur.iter_mut() {
            *z = z.and_then(|w| f.eval_opt(w)).filter(|w| w.norm() <= ESCAPE_RADIUS);
        }
        let step: Vec<Option<f64>> = cur
            .iter()
            .map(|z| z.and_then(|w| f.eval_opt(w).map(|fw| (fw - w).norm())))
            .collect();
        for i in 0..k {
            for j in i + 1..k {
                if retired[i * k + j] {
                    continue;
                }
                let (Some(u), Some(v)) = (cur[i], cur[j]) else { continue };
                let s = step[i].unwrap_or(f64::INFINITY).max(step[j].unwrap_or(f64::INFINITY));
                if (u - v).norm() < 1e-10 * s.min(1.0) {
                    return InjectivityVerdict::Collision { n, i, j };
                }
                if s < 1e-300 {
                    retired[i * k + j] = true;
                }
            }
        }
    }
    InjectivityVerdict::InjectiveUpTo(n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn blaschke() -> HolomorphicMap {
        HolomorphicMap::blaschke(c(0.6, 0.0)).unwrap()
    }

    #[test]
    fn iterate_examples() {
        let sq = HolomorphicMap::real_polynomial(&[0.0, 0.0, 1.0]);
        assert_eq!(iterate(&sq, c(2.0, 0.0), 3).unwrap(), Iterate::Point(c(256.0, 0.0)));
        let half = HolomorphicMap::real_polynomial(&[0.0, 0.5, 0.0]);
        assert_eq!(iterate(&half, c(1.0, 0.0), 10).unwrap().point().unwrap(), c(2f64.powi(-10), 0.0));
        let z = iterate(&blaschke(), c(0.3, 0.0), 40).unwrap().point().unwrap();
        assert!(z.norm() < 1e-6);
        assert_eq!(iterate(&sq, c(2.0, 0.0), 0).unwrap(), Iterate::Point(c(2.0, 0.0)));
    }

    #[test]
    fn escape_and_pole() {
        let sq = HolomorphicMap::real_polynomial(&[0.0, 0.0, 1.0]);
        assert!(matches!(iterate(&sq, c(10.0, 0.0), 20).unwrap(), Iterate::Escaped { step: 8 }));
        // 1/z: 0 is a pole hit on the first step, 1/(z-1) hits it from z=2 at step 2
        let inv = HolomorphicMap::rational(vec![c(1.0, 0.0)], vec![c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(iterate(&inv, c(2.0, 0.0), 5), Err(LabError::PoleHit { step: 2 })));
    }

    #[test]
    fn spec_roundtrip_json() {
        let f = blaschke();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"kind":"blaschke","alpha":[0.6,0.0]}"#);
        let back: HolomorphicMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let p: HolomorphicMap = serde_json::from_str(r#"{"kind":"polynomial","coeffs":[[0,0],[0.5,0],[1,0]]}"#).unwrap();
        assert_eq!(p.degree(), 2);
        assert!(serde_json::from_str::<HolomorphicMap>(r#"{"kind":"blaschke","alpha":[1.5,0.0]}"#).is_err());
        assert!(serde_json::from_str::<HolomorphicMap>(r#"{"kind":"blaschke","alpha":[0.5,0.0],"x":1}"#).is_err());
    }

    #[test]
    fn blaschke_expansion() {
        let f = blaschke();
        let z = c(0.2, 0.3);
        let want = z * (z - 0.6) / (1.0 - 0.6 * z);
        assert!((f.eval(z).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn fixed_points() {
        assert!(find_fixed_point(&blaschke(), c(0.1, 0.0)).unwrap().norm() < 1e-12);
        let f = HolomorphicMap::real_polynomial(&[0.0, 0.5, 1.0]);
        assert!(find_fixed_point(&f, c(0.1, 0.0)).unwrap().norm() < 1e-12);
        assert!((find_fixed_point(&f, c(0.6, 0.0)).unwrap() - c(0.5, 0.0)).norm() < 1e-12);
        let g = HolomorphicMap::real_polynomial(&[0.0, 1.0, 1.0]);
        assert!(find_fixed_point(&g, c(0.0, 0.05)).unwrap().norm() < 1e-6);
    }

    #[test]
    fn fixed_point_nonconvergence() {
        // z + 1 has no finite fixed point
        let f = HolomorphicMap::real_polynomial(&[1.0, 1.0]);
        assert!(matches!(find_fixed_point(&f, c(0.0, 0.0)), Err(LabError::NonConvergence { .. })));
    }

    #[test]
    fn classification() {
        let sq = classify_fixed_point(&HolomorphicMap::real_polynomial(&[0.0, 0.0, 1.0]), c(0.0, 0.0)).unwrap();
        assert_eq!((sq.klass, sq.multiplier, sq.p, sq.m), (FixedPointClass::Superattracting, c(0.0, 0.0), Some(2), None));
        let b = classify_fixed_point(&blaschke(), c(0.0, 0.0)).unwrap();
        assert_eq!(b.klass, FixedPointClass::Attracting);
        assert!((b.multiplier - c(-0.6, 0.0)).norm() < 1e-15);
        let n = classify_fixed_point(&HolomorphicMap::real_polynomial(&[0.0, 1.0, 0.0, 1.0]), c(0.0, 0.0)).unwrap();
        assert_eq!((n.klass, n.m, n.p), (FixedPointClass::Neutral, Some(2), None));
        let rot = HolomorphicMap::polynomial(vec![c(0.0, 0.0), Complex64::from_polar(1.0, 1.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(classify_fixed_point(&rot, c(0.0, 0.0)).unwrap().klass, FixedPointClass::IrrationallyIndifferent);
        let rep = HolomorphicMap::real_polynomial(&[0.0, 2.0, 1.0]);
        assert_eq!(classify_fixed_point(&rep, c(0.0, 0.0)).unwrap().klass, FixedPointClass::Repelling);
        assert!(matches!(classify_fixed_point(&rep, c(1.0, 0.0)), Err(LabError::NotAFixedPoint { .. })));
    }

    #[test]
    fn superattracting_away_from_origin() {
        // z² − 2z + 2 has a critical fixed point at 1: (z−1)² + 1
        let f = HolomorphicMap::real_polynomial(&[2.0, -2.0, 1.0]);
        let info = classify_fixed_point(&f, c(1.0, 0.0)).unwrap();
        assert_eq!((info.klass, info.p), (FixedPointClass::Superattracting, Some(2)));
        let g = f.recentered(c(1.0, 0.0)).unwrap();
        assert!((g.eval(c(0.1, 0.0)).unwrap() - c(0.01, 0.0)).norm() < 1e-15);
    }

    fn grid(half: f64, res: usize) -> GridSpec {
        GridSpec::new(c(0.0, 0.0), half, res).unwrap()
    }

    #[test]
    fn run_away_examples() {
        let shift = HolomorphicMap::real_polynomial(&[1.0, 1.0]);
        let disk = CompactGridSet::disk(grid(1.05, 64), c(0.0, 0.0), 1.0).unwrap();
        assert_eq!(run_away_index(&shift, &disk, 10).unwrap(), Some(3));
        let rot = HolomorphicMap::polynomial(vec![c(0.0, 0.0), Complex64::from_polar(1.0, 0.7)]).unwrap();
        let ann = CompactGridSet::annulus(grid(0.6, 96), c(0.0, 0.0), 0.4, 0.5).unwrap();
        assert_eq!(run_away_index(&rot, &ann, 50).unwrap(), None);
        let n = run_away_index(&blaschke(), &ann, 60).unwrap().expect("finite");
        for z in ann.points() {
            assert!(iterate(&blaschke(), z, n).unwrap().point().unwrap().norm() < 0.4);
        }
    }

    #[test]
    fn basin_examples() {
        let sq = HolomorphicMap::real_polynomial(&[0.0, 0.0, 1.0]);
        let b = basin_raster(&sq, c(0.0, 0.0), grid(0.5, 32), 50, 1e-3).unwrap();
        assert_eq!(b.count(), 32 * 32);
        let f = HolomorphicMap::real_polynomial(&[0.0, 0.5, 1.0]);
        let g = grid(0.5, 64);
        let b = basin_raster(&f, c(0.0, 0.0), g, 100, 1e-3).unwrap();
        for (i, &m) in b.mask().unwrap().iter().enumerate() {
            if g.index_center(i).norm() < 0.2 {
                assert!(m);
            }
        }
    }

    #[test]
    fn injectivity_examples() {
        let sq = HolomorphicMap::real_polynomial(&[0.0, 0.0, 1.0]);
        assert_eq!(
            finite_injectivity_check(&sq, &[c(0.3, 0.0), c(-0.3, 0.0)], 10),
            InjectivityVerdict::Collision { n: 1, i: 0, j: 1 }
        );
        assert_eq!(finite_injectivity_check(&sq, &[c(0.3, 0.0), c(0.5, 0.0)], 30), InjectivityVerdict::InjectiveUpTo(30));
    }

    proptest! {
        #[test]
        fn iterate_composes(re in -0.9f64..0.9, im in -0.9f64..0.9, a in 0usize..8, b in 0usize..8) {
            let f = blaschke();
            let z = c(re, im);
            let ab = iterate(&f, z, a + b).unwrap().point().unwrap();
            let mid = iterate(&f, z, a).unwrap().point().unwrap();
            let two = iterate(&f, mid, b).unwrap().point().unwrap();
            prop_assert!((ab - two).norm() <= 1e-9 * ab.norm().max(1e-300) + 1e-300);
        }

        #[test]
        fn multiplier_matches_central_difference(re in -0.5f64..0.5, im in -0.5f64..0.5, s in 0.3f64..0.9) {
            // conjugate z² + c z to move the fixed point off the origin
            let z0 = c(re, im);
            let lam = c(s, 0.2);
            // f(z) = z0 + lam (z − z0) + (z − z0)²
            let coeffs = vec![z0 - lam * z0 + z0 * z0, lam - 2.0 * z0, c(1.0, 0.0)];
            let f = HolomorphicMap::polynomial(coeffs).unwrap();
            let info = classify_fixed_point(&f, z0).unwrap();
            let h = 1e-5;
            let fd = (f.eval(z0 + h).unwrap() - f.eval(z0 - h).unwrap()) / (2.0 * h);
            prop_assert!((info.multiplier - fd).norm() < 1e-6);
        }
    }
}
