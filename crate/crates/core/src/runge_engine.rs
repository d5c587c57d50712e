//! Rational approximation with prescribed poles and the schedules built on it.
//!
//! A Laurent-type rational function is fit by least squares over the basis
//! ((z − c)/s)^k and (s_p/(z − p))^j. Compacts are replaced by boundary and
//! interior samples, and every acceptance is rechecked on a 4× denser
//! validation sampling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::conjugacy::ConjugacyChart;
use crate::error::{LabError, Result};
use crate::geometry::{count_holes, ComplexPoint, CompactGridSet};
use crate::linalg::lstsq;
use crate::poly;
use crate::symbol_dynamics::{finite_injectivity_check, HolomorphicMap, InjectivityVerdict, ESCAPE_RADIUS};

/// Largest basis tried during degree escalation.
pub const MAX_BASIS: usize = 256;
/// Ridge used when the unregularized system is too ill-conditioned.
pub const FALLBACK_RIDGE: f64 = 1e-12;
const DEGREES: [usize; 7] = [2, 4, 8, 16, 32, 64, 128];
const INTERIOR_RINGS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub location: ComplexPoint,
    pub max_order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LaurentRepr {
    center: ComplexPoint,
    scale: f64,
    poles: Vec<PoleSpec>,
    pole_scales: Vec<f64>,
    poly_degree: usize,
    coefficients: Vec<Complex64>,
}

/// R(z) = Σ_k a_k ((z − c)/s)^k + Σ_p Σ_j b_{p,j} (s_p/(z − p))^j.
///
/// Coefficients are stored polynomial part first (ascending), then for each
/// pole its orders from highest down to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LaurentRepr", into = "LaurentRepr")]
pub struct LaurentRational {
    center: ComplexPoint,
    scale: f64,
    poles: Vec<PoleSpec>,
    pole_scales: Vec<f64>,
    poly_degree: usize,
    coefficients: Vec<Complex64>,
}

impl TryFrom<LaurentRepr> for LaurentRational {
    type Error = LabError;

    fn try_from(r: LaurentRepr) -> Result<Self> {
        let expect = r.poly_degree + 1 + r.poles.iter().map(|p| p.max_order).sum::<usize>();
        if r.coefficients.len() != expect {
            return Err(LabError::Format(format!("expected {expect} coefficients, got {}", r.coefficients.len())));
        }
        if r.pole_scales.len() != r.poles.len() {
            return Err(LabError::Format("one scale per pole".into()));
        }
        if !(r.scale > 0.0) || r.pole_scales.iter().any(|s| !(*s > 0.0)) {
            return Err(LabError::Format("scales must be positive".into()));
        }
        Ok(LaurentRational {
            center: r.center,
            scale: r.scale,
            poles: r.poles,
            pole_scales: r.pole_scales,
            poly_degree: r.poly_degree,
            coefficients: r.coefficients,
        })
    }
}

impl From<LaurentRational> for LaurentRepr {
    fn from(r: LaurentRational) -> Self {
        LaurentRepr {
            center: r.center,
            scale: r.scale,
            poles: r.poles,
            pole_scales: r.pole_scales,
            poly_degree: r.poly_degree,
            coefficients: r.coefficients,
        }
    }
}

impl LaurentRational {
    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        LaurentRational {
            center: Complex64::new(0.0, 0.0),
            scale: 1.0,
            poles: vec![],
            pole_scales: vec![],
            poly_degree: 0,
            coefficients: vec![c],
        }
    }

    /// Polynomial with ascending coefficients in z.
    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![Complex64::new(0.0, 0.0)] } else { coeffs };
        LaurentRational {
            center: Complex64::new(0.0, 0.0),
            scale: 1.0,
            poles: vec![],
            pole_scales: vec![],
            poly_degree: coeffs.len() - 1,
            coefficients: coeffs,
        }
    }

    pub fn poles(&self) -> &[PoleSpec] {
        &self.poles
    }

    pub fn poly_degree(&self) -> usize {
        self.poly_degree
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn basis_len(&self) -> usize {
        self.coefficients.len()
    }

    /// Value at z. Infinite or NaN at a pole.
    pub fn eval(&self, z: ComplexPoint) -> Complex64 {
        let t = (z - self.center) / self.scale;
        let mut v = poly::eval(&self.coefficients[..=self.poly_degree], t);
        let mut at = self.poly_degree + 1;
        for (p, s) in self.poles.iter().zip(&self.pole_scales) {
            let q = *s / (z - p.location);
            let mut acc = Complex64::new(0.0, 0.0);
            for c in &self.coefficients[at..at + p.max_order] {
                acc = acc * q + c;
            }
            v += acc * q;
            at += p.max_order;
        }
        v
    }

    pub fn eval_opt(&self, z: ComplexPoint) -> Option<Complex64> {
        Some(self.eval(z)).filter(|v| v.is_finite())
    }
}

/// Basis row at z for the given layout.
fn basis_row(z: ComplexPoint, center: Complex64, scale: f64, poles: &[PoleSpec], pole_scales: &[f64], d: usize) -> Vec<Complex64> {
    let mut row = Vec::with_capacity(d + 1 + poles.iter().map(|p| p.max_order).sum::<usize>());
    let t = (z - center) / scale;
    let mut tk = Complex64::new(1.0, 0.0);
    for _ in 0..=d {
        row.push(tk);
        tk *= t;
    }
    for (p, s) in poles.iter().zip(pole_scales) {
        let q = *s / (z - p.location);
        let start = row.len();
        let mut qk = q;
        for _ in 0..p.max_order {
            row.push(qk);
            qk *= q;
        }
        row[start..].reverse();
    }
    row
}

/// Least-squares fit of Σ|R(z_i) − t_i|² + ridge·‖coeffs‖².
///
/// Samples are affinely rescaled to the unit disk and each pole term is
/// scaled by the distance from the pole to the samples. Returns the fit
/// together with the largest sample residual.
pub fn fit_rational(
    samples: &[(ComplexPoint, Complex64)],
    poles: &[PoleSpec],
    poly_degree: usize,
    ridge: f64,
) -> Result<(LaurentRational, f64)> {
    if samples.is_empty() {
        return Err(LabError::InvalidInput("fit needs at least one sample".into()));
    }
    if !(ridge >= 0.0) {
        return Err(LabError::InvalidInput("ridge must be nonnegative".into()));
    }
    let n = samples.len() as f64;
    let center = samples.iter().map(|s| s.0).sum::<Complex64>() / n;
    let spread = samples.iter().map(|s| (s.0 - center).norm()).fold(0.0, f64::max);
    let scale = if spread > 0.0 { spread } else { 1.0 };
    let mut pole_scales = Vec::with_capacity(poles.len());
    for p in poles {
        let d = samples.iter().map(|s| (s.0 - p.location).norm()).fold(f64::INFINITY, f64::min);
        if !(d > 0.0) {
            return Err(LabError::InvalidInput(format!("sample on the pole {}", p.location)));
        }
        pole_scales.push(d);
    }
    let rows: Vec<Vec<Complex64>> = samples
        .par_iter()
        .map(|s| basis_row(s.0, center, scale, poles, &pole_scales, poly_degree))
        .collect();
    let cols = rows[0].len();
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    let sol = lstsq(&a, &b, ridge)?;
    let r = LaurentRational {
        center,
        scale,
        poles: poles.to_vec(),
        pole_scales,
        poly_degree,
        coefficients: sol.x,
    };
    let err = samples.par_iter().map(|s| (r.eval(s.0) - s.1).norm()).reduce(|| 0.0, f64::max);
    Ok((r, err))
}

/// A compact subset of the plane as used for targets and keep-sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Compact {
    Disk { center: ComplexPoint, radius: f64 },
    /// Just the circle line. It has one hole.
    Circle { center: ComplexPoint, radius: f64 },
    Set { set: CompactGridSet },
}

impl Compact {
    pub fn validate(&self) -> Result<()> {
        match self {
            Compact::Disk { radius, .. } | Compact::Circle { radius, .. } if !(*radius > 0.0) => {
                Err(LabError::InvalidInput("radius must be positive".into()))
            }
            Compact::Set { set } if set.is_empty() => Err(LabError::EmptySet),
            _ => Ok(()),
        }
    }

    pub fn holes(&self) -> Result<usize> {
        match self {
            Compact::Disk { .. } => Ok(0),
            Compact::Circle { .. } => Ok(1),
            Compact::Set { set: CompactGridSet::Points(_) } => Ok(0),
            Compact::Set { set } => count_holes(set),
        }
    }

    pub fn contains(&self, z: ComplexPoint) -> bool {
        match self {
            Compact::Disk { center, radius } => (z - center).norm() <= *radius * (1.0 + 1e-12),
            Compact::Circle { center, radius } => ((z - center).norm() - radius).abs() <= 1e-12 * radius,
            Compact::Set { set } => set.contains(z),
        }
    }

    /// Fit samples for `m` boundary points, or the 4× denser validation set.
    /// Raster and point sets ignore `m`: fits use the boundary plus every
    /// fourth interior pixel, validation uses everything.
    pub fn samples(&self, m: usize, validation: bool) -> Vec<ComplexPoint> {
        let m = m.max(4);
        match self {
            Compact::Circle { center, radius } => ring(*center, *radius, if validation { 4 * m } else { m }, validation),
            Compact::Disk { center, radius } => {
                let m = if validation { 4 * m } else { m };
                let mut out = ring(*center, *radius, m, validation);
                for j in 1..=INTERIOR_RINGS {
                    let f = j as f64 / (INTERIOR_RINGS + 1) as f64;
                    out.extend(ring(*center, radius * f, ((m as f64 * f) as usize).max(8), validation));
                }
                out.push(*center);
                out
            }
            Compact::Set { set } => {
                if validation {
                    return set.points();
                }
                let mut out = set.boundary_points();
                let interior: Vec<_> = set.points().into_iter().filter(|z| !out.contains(z)).collect();
                out.extend(interior.into_iter().step_by(4));
                out
            }
        }
    }

    /// The boundary as a closed, ordered loop when the shape has one.
    fn boundary_loop(&self, m: usize) -> Option<Vec<ComplexPoint>> {
        match self {
            Compact::Disk { center, radius } => Some(ring(*center, *radius, 4 * m.max(4), true)),
            _ => None,
        }
    }

    fn pixel_diagonal(&self) -> f64 {
        match self {
            Compact::Set { set: CompactGridSet::Raster { grid, .. } } => grid.pixel_diagonal(),
            _ => 0.0,
        }
    }
}

fn ring(center: ComplexPoint, radius: f64, m: usize, offset: bool) -> Vec<ComplexPoint> {
    let shift = if offset { 0.5 } else { 0.0 };
    (0..m)
        .map(|k| center + Complex64::from_polar(radius, TAU * (k as f64 + shift) / m as f64))
        .collect()
}

/// Target functions for schedules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Const,
    Identity,
    Poly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFunction {
    #[serde(rename = "target")]
    pub kind: TargetKind,
    #[serde(default)]
    pub coeffs: Vec<Complex64>,
}

impl TargetFunction {
    pub fn constant(c: Complex64) -> Self {
        TargetFunction { kind: TargetKind::Const, coeffs: vec![c] }
    }

    pub fn identity() -> Self {
        TargetFunction { kind: TargetKind::Identity, coeffs: vec![] }
    }

    pub fn poly(coeffs: Vec<Complex64>) -> Self {
        TargetFunction { kind: TargetKind::Poly, coeffs }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            TargetKind::Const if self.coeffs.len() != 1 => {
                Err(LabError::InvalidInput("a constant target takes exactly one coefficient".into()))
            }
            TargetKind::Poly if self.coeffs.is_empty() => Err(LabError::InvalidInput("empty polynomial target".into())),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, z: ComplexPoint) -> Complex64 {
        match self.kind {
            TargetKind::Const => self.coeffs.first().copied().unwrap_or_default(),
            TargetKind::Identity => z,
            TargetKind::Poly => poly::eval(&self.coeffs, z),
        }
    }
}

/// Part of a keep-set: the image fⁿ(set).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeepPart {
    pub set: Compact,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RungeOptions {
    /// Boundary samples per compact at the lowest degree. Higher degrees
    /// sample at least twice the basis size.
    pub samples: usize,
    pub n_max: usize,
}

impl Default for RungeOptions {
    fn default() -> Self {
        RungeOptions { samples: 64, n_max: 200 }
    }
}

/// Image fⁿ(z) with (fⁿ)'(z).
fn push_forward(f: &HolomorphicMap, z: ComplexPoint, n: usize) -> Option<(ComplexPoint, Complex64)> {
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        let (fw, dw) = f.eval_with_derivative(w)?;
        if !(fw.norm() <= ESCAPE_RADIUS) {
            return None;
        }
        w = fw;
        d *= dw;
    }
    Some((w, d))
}

fn push_all(f: &HolomorphicMap, zs: &[ComplexPoint], n: usize) -> Result<Vec<(ComplexPoint, Complex64)>> {
    zs.par_iter()
        .map(|&z| push_forward(f, z, n).ok_or(LabError::Escaped { step: n }))
        .collect()
}

fn winding_number(curve: &[ComplexPoint], p: ComplexPoint) -> i64 {
    let mut total = 0.0;
    for k in 0..curve.len() {
        let a = curve[k] - p;
        let b = curve[(k + 1) % curve.len()] - p;
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

/// Whether a puncture lies in fⁿ(set), which rules it out as a pole.
fn covers(f: &HolomorphicMap, part: &KeepPart, images: &[(ComplexPoint, Complex64)], p: ComplexPoint) -> Result<bool> {
    let near = images.iter().map(|(w, _)| (w - p).norm()).fold(f64::INFINITY, f64::min);
    if let Some(lp) = part.set.boundary_loop(images.len()) {
        let curve: Vec<_> = push_all(f, &lp, part.n)?.into_iter().map(|x| x.0).collect();
        if near == 0.0 || winding_number(&curve, p) != 0 {
            return Ok(true);
        }
        return Ok(false);
    }
    let lip = images.iter().map(|(_, d)| d.norm()).fold(0.0, f64::max);
    Ok(near <= part.set.pixel_diagonal() * lip.max(1.0) || near == 0.0)
}

/// Poles usable for a fit over the given parts.
fn usable_poles(f: &HolomorphicMap, punctures: &[ComplexPoint], parts: &[(&KeepPart, &[(ComplexPoint, Complex64)])]) -> Result<Vec<ComplexPoint>> {
    let mut out = vec![];
    'p: for &p in punctures {
        if !p.is_finite() {
            continue;
        }
        for (part, imgs) in parts {
            if covers(f, part, imgs, p)? {
                continue 'p;
            }
        }
        out.push(p);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub n: usize,
    pub r: LaurentRational,
    /// sup |R − g_current| over the keep-set validation samples.
    pub keep_error: f64,
    /// sup |R∘fᴺ − h| over the target validation samples.
    pub target_error: f64,
}

fn check_target(chart: &ConjugacyChart, l: &Compact, m: usize) -> Result<()> {
    l.validate()?;
    let holes = l.holes()?;
    if holes != 0 {
        return Err(LabError::HoleInTarget { holes });
    }
    if l.samples(m, true).iter().chain(l.samples(m, false).iter()).any(|&z| !chart.in_chart_disk(z)) {
        return Err(LabError::NotInChart);
    }
    Ok(())
}

fn min_distance(a: &[ComplexPoint], b: &[ComplexPoint]) -> f64 {
    a.par_iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

fn diameter(pts: &[ComplexPoint]) -> f64 {
    pts.par_iter()
        .enumerate()
        .map(|(i, a)| pts[i + 1..].iter().map(|b| (a - b).norm()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max)
}

/// One step of the transitivity argument.
///
/// Finds the smallest N in n_min..=n_max for which fᴺ(L) keeps clear of the
/// keep-set by one pixel diagonal plus a tenth of its diameter, then fits R
/// with poles only at the usable punctures so that R ≈ g_current on the
/// keep-set and R∘fᴺ ≈ h on L. The fit data on fᴺ(L) are the pairs
/// (fᴺ(z), h(z)), which is h composed with the local inverse branch.
#[allow(clippy::too_many_arguments)]
pub fn transitivity_step(
    f: &HolomorphicMap,
    chart: &ConjugacyChart,
    omega_punctures: &[ComplexPoint],
    g_current: &LaurentRational,
    keep: &[KeepPart],
    h: &TargetFunction,
    l: &Compact,
    eps: f64,
    n_min: usize,
    opts: &RungeOptions,
) -> Result<StepOutcome> {
    if !(eps > 0.0) {
        return Err(LabError::InvalidInput("eps must be positive".into()));
    }
    h.validate()?;
    for k in keep {
        k.set.validate()?;
    }
    let m = opts.samples.max(8);
    check_target(chart, l, m)?;

    let keep_val: Vec<Vec<(ComplexPoint, Complex64)>> =
        keep.iter().map(|k| push_all(f, &k.set.samples(m, true), k.n)).collect::<Result<_>>()?;
    let keep_pts: Vec<ComplexPoint> = keep_val.iter().flatten().map(|x| x.0).collect();
    let pix = keep.iter().map(|k| k.set.pixel_diagonal()).fold(0.0, f64::max);
    let margin = pix + 0.1 * diameter(&keep_pts);

    let l_val = l.samples(m, true);
    let mut images = l_val.clone();
    let mut n_found = None;
    for n in 0..=opts.n_max {
        if n >= n_min && (keep_pts.is_empty() || min_distance(&images, &keep_pts) > margin) {
            n_found = Some(n);
            break;
        }
        images = images
            .par_iter()
            .map(|&z| f.eval_opt(z).filter(|w| w.norm() <= ESCAPE_RADIUS))
            .collect::<Option<_>>()
            .ok_or(LabError::Escaped { step: n + 1 })?;
    }
    let n = n_found.ok_or(LabError::NoDisjointN { n_max: opts.n_max })?;

    let target_part = KeepPart { set: l.clone(), n };
    let target_imgs = push_all(f, &l_val, n)?;
    let mut parts: Vec<(&KeepPart, &[(ComplexPoint, Complex64)])> =
        keep.iter().zip(&keep_val).map(|(k, v)| (k, v.as_slice())).collect();
    parts.push((&target_part, &target_imgs));
    let poles = usable_poles(f, omega_punctures, &parts)?;

    // validation data
    let mut val_keep: Vec<(ComplexPoint, Complex64)> = Vec::new();
    for v in &keep_val {
        for &(w, _) in v {
            val_keep.push((w, g_current.eval(w)));
        }
    }
    let val_target: Vec<(ComplexPoint, Complex64)> = target_imgs.iter().zip(&l_val).map(|(w, z)| (w.0, h.eval(*z))).collect();

    let mut best = f64::INFINITY;
    for &d in &DEGREES {
        let order = (d / 2).max(1);
        let basis = d + 1 + order * poles.len();
        if basis > MAX_BASIS {
            break;
        }
        let spec: Vec<PoleSpec> = poles.iter().map(|&p| PoleSpec { location: p, max_order: order }).collect();
        let mf = m.max(2 * basis);
        let mut data = Vec::new();
        for k in keep {
            for (w, _) in push_all(f, &k.set.samples(mf, false), k.n)? {
                data.push((w, g_current.eval(w)));
            }
        }
        let lf = l.samples(mf, false);
        for ((w, _), z) in push_all(f, &lf, n)?.into_iter().zip(&lf) {
            data.push((w, h.eval(*z)));
        }
        let fit = match fit_rational(&data, &spec, d, 0.0) {
            Err(LabError::IllConditioned { .. }) => fit_rational(&data, &spec, d, FALLBACK_RIDGE),
            other => other,
        };
        let (r, _) = match fit {
            Ok(x) => x,
            Err(LabError::IllConditioned { .. }) => continue,
            Err(e) => return Err(e),
        };
        let sup = |v: &[(ComplexPoint, Complex64)]| {
            v.par_iter().map(|(w, t)| (r.eval(*w) - t).norm()).reduce(|| 0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
        };
        let keep_error = sup(&val_keep);
        let target_error = sup(&val_target);
        let worst = keep_error.max(target_error);
        if worst < best {
            best = worst;
        }
        if keep_error < eps && target_error < eps {
            return Ok(StepOutcome { n, r, keep_error, target_error });
        }
    }
    Err(LabError::ApproximationFailed { best_error: best })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleTarget {
    pub h: TargetFunction,
    pub l: Compact,
    pub eps: f64,
}

/// A finite universality witness: ‖g∘fⁿʲ − h_j‖_{L_j} ≤ eps_j for every j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalSchedule {
    pub targets: Vec<ScheduleTarget>,
    pub result_g: LaurentRational,
    pub indices: Vec<usize>,
    /// Basis size of g after each step.
    pub degrees: Vec<usize>,
    /// Validated sup errors per target.
    pub report: Vec<f64>,
    pub samples: usize,
}

impl UniversalSchedule {
    /// Recomputes the per-target sup errors on the validation samples.
    pub fn revalidate(&self, f: &HolomorphicMap) -> Result<Vec<f64>> {
        if self.indices.len() != self.targets.len() {
            return Err(LabError::Format("one index per target".into()));
        }
        self.targets
            .iter()
            .zip(&self.indices)
            .map(|(t, &n)| schedule_error(f, &self.result_g, t, n, self.samples))
            .collect()
    }
}

fn schedule_error(f: &HolomorphicMap, g: &LaurentRational, t: &ScheduleTarget, n: usize, m: usize) -> Result<f64> {
    let zs = t.l.samples(m, true);
    let imgs = push_all(f, &zs, n)?;
    Ok(zs
        .iter()
        .zip(&imgs)
        .map(|(z, (w, _))| (g.eval(*w) - t.h.eval(*z)).norm())
        .fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) }))
}

/// Sequential transitivity steps realizing a finite family of targets.
///
/// Step j runs at tolerance min(eps_j/2, half of every earlier target's
/// remaining budget). Its keep error is then charged to all earlier targets.
pub fn build_universal_schedule(
    f: &HolomorphicMap,
    chart: &ConjugacyChart,
    omega_punctures: &[ComplexPoint],
    targets: &[ScheduleTarget],
    opts: &RungeOptions,
) -> Result<UniversalSchedule> {
    let m = opts.samples.max(8);
    for (j, t) in targets.iter().enumerate() {
        let wrap = |e| LabError::Step { index: j, source: Box::new(e) };
        if !(t.eps > 0.0) {
            return Err(wrap(LabError::InvalidInput("eps must be positive".into())));
        }
        t.h.validate().map_err(wrap)?;
        check_target(chart, &t.l, m).map_err(wrap)?;
        if let Compact::Set { set: CompactGridSet::Points(p) } = &t.l {
            if let InjectivityVerdict::Collision { n, i, j: k } = finite_injectivity_check(f, p, opts.n_max) {
                return Err(wrap(LabError::InjectivityViolated { n, i, j: k }));
            }
        }
    }

    let mut g = LaurentRational::zero();
    let mut keep: Vec<KeepPart> = Vec::new();
    let mut remaining: Vec<f64> = Vec::new();
    let mut indices = Vec::new();
    let mut degrees = Vec::new();
    for (j, t) in targets.iter().enumerate() {
        let wrap = |e| LabError::Step { index: j, source: Box::new(e) };
        let step_eps = remaining.iter().fold(t.eps / 2.0, |a, r| a.min(r / 2.0));
        let n_min = indices.last().map_or(0, |n| n + 1);
        let out = transitivity_step(f, chart, omega_punctures, &g, &keep, &t.h, &t.l, step_eps, n_min, opts)
            .map_err(wrap)?;
        for r in remaining.iter_mut() {
            *r -= out.keep_error;
        }
        remaining.push(t.eps - out.target_error);
        keep.push(KeepPart { set: t.l.clone(), n: out.n });
        indices.push(out.n);
        degrees.push(out.r.basis_len());
        g = out.r;
    }

    let mut s = UniversalSchedule {
        targets: targets.to_vec(),
        result_g: g,
        indices,
        degrees,
        report: vec![],
        samples: m,
    };
    let report = s.revalidate(f)?;
    for (j, (&e, t)) in report.iter().zip(targets).enumerate() {
        if !(e <= t.eps) {
            return Err(LabError::Step { index: j, source: Box::new(LabError::ApproximationFailed { best_error: e }) });
        }
    }
    s.report = report;
    Ok(s)
}

/// Interpolating schedule on a finite set E.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSchedule {
    pub points: Vec<ComplexPoint>,
    pub value_targets: Vec<Vec<Complex64>>,
    pub result_g: LaurentRational,
    pub indices: Vec<usize>,
    /// max_i |g(fᴺᵗ(e_i)) − v_{t,i}| per target vector.
    pub report: Vec<f64>,
}

/// g with g(fᴺᵗ(e_i)) ≈ v_{t,i} for every target vector t.
///
/// Each N_t is the first index after N_{t−1} at which the orbit points are
/// pairwise apart, clear of earlier pinned points and of the punctures, all
/// by a relative 1e-6. The pinned values are then interpolated with a square
/// basis, split between polynomial part and a pole at the first usable
/// puncture.
pub fn finite_set_universal(
    f: &HolomorphicMap,
    e: &[ComplexPoint],
    omega_punctures: &[ComplexPoint],
    value_targets: &[Vec<Complex64>],
    eps: f64,
    opts: &RungeOptions,
) -> Result<FiniteSchedule> {
    if e.is_empty() {
        return Err(LabError::EmptySet);
    }
    if !(eps > 0.0) {
        return Err(LabError::InvalidInput("eps must be positive".into()));
    }
    if value_targets.iter().any(|v| v.len() != e.len()) {
        return Err(LabError::InvalidInput("each target vector needs one value per point".into()));
    }
    if let InjectivityVerdict::Collision { n, i, j } = finite_injectivity_check(f, e, opts.n_max) {
        return Err(LabError::InjectivityViolated { n, i, j });
    }

    let mut pinned: Vec<(ComplexPoint, Complex64)> = Vec::new();
    let mut indices = Vec::new();
    let mut cur: Vec<ComplexPoint> = e.to_vec();
    let mut n = 0usize;
    for v in value_targets {
        let mut found = false;
        while n < opts.n_max {
            n += 1;
            cur = cur
                .iter()
                .map(|&z| f.eval_opt(z).filter(|w| w.norm() <= ESCAPE_RADIUS))
                .collect::<Option<_>>()
                .ok_or(LabError::Escaped { step: n })?;
            let scale = cur.iter().chain(pinned.iter().map(|p| &p.0)).map(|z| z.norm()).fold(0.0, f64::max);
            let tol = 1e-6 * scale.max(f64::MIN_POSITIVE);
            let apart = cur.iter().enumerate().all(|(i, a)| {
                cur[i + 1..].iter().all(|b| (a - b).norm() > tol)
                    && pinned.iter().all(|p| (a - p.0).norm() > tol)
                    && omega_punctures.iter().all(|p| (a - p).norm() > tol)
            });
            if apart {
                found = true;
                break;
            }
        }
        if !found {
            return Err(LabError::NoDisjointN { n_max: opts.n_max });
        }
        indices.push(n);
        pinned.extend(cur.iter().copied().zip(v.iter().copied()));
    }

    if pinned.is_empty() {
        return Ok(FiniteSchedule {
            points: e.to_vec(),
            value_targets: vec![],
            result_g: LaurentRational::zero(),
            indices,
            report: vec![],
        });
    }
    let k = pinned.len();
    let pole = omega_punctures.iter().copied().find(|p| p.is_finite());
    let (d, spec) = match pole {
        Some(p) if k >= 2 => {
            let order = k / 2;
            (k - 1 - order, vec![PoleSpec { location: p, max_order: order }])
        }
        _ => (k - 1, vec![]),
    };
    let (g, _) = match fit_rational(&pinned, &spec, d, 0.0) {
        Err(LabError::IllConditioned { .. }) => fit_rational(&pinned, &spec, d, FALLBACK_RIDGE)?,
        other => other?,
    };
    let mut report = Vec::with_capacity(value_targets.len());
    for t in 0..value_targets.len() {
        let err = (0..e.len())
            .map(|i| (g.eval(pinned[t * e.len() + i].0) - pinned[t * e.len() + i].1).norm())
            .fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
        report.push(err);
    }
    let worst = report.iter().fold(0.0, |a: f64, &b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
    if !(worst <= eps) {
        return Err(LabError::ApproximationFailed { best_error: worst });
    }
    Ok(FiniteSchedule {
        points: e.to_vec(),
        value_targets: value_targets.to_vec(),
        result_g: g,
        indices,
        report,
    })
}
