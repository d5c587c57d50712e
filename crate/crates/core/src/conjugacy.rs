//! Linearizing coordinates near a fixed point.
//!
//! * Koenigs: Φ∘f = λΦ at an attracting point, normalized by Φ'(z0) = 1 and
//!   extended to the whole basin through Φ = λ^{-m}·Φ(f^m).
//! * Böttcher: φ∘f = φ^p at a superattracting point, local only.
//! * Abel (Fatou): Φ∘f = Φ + 1 on an attracting petal of a parabolic point
//!   with multiplier 1.
//!
//! Every chart is verified numerically at construction by sampling its disk,
//! and the radius is halved until the checks pass.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::ComplexPoint;
use crate::poly::series;
use crate::symbol_dynamics::{classify_fixed_point, FixedPointClass, FixedPointInfo, HolomorphicMap, LocalMap, ESCAPE_RADIUS};

pub const KOENIGS_DEPTH: usize = 60;
pub const BOETTCHER_DEPTH: usize = 8;
pub const ABEL_DEPTH: usize = 200;
/// Number of positive powers kept in the asymptotic Abel expansion.
pub const ABEL_SERIES_ORDER: usize = 10;

const MAX_HALVINGS: usize = 40;
const RING_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
const RING_SAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartOptions {
    /// Use this chart radius instead of searching for one. It is still verified.
    pub radius: Option<f64>,
    pub depth: Option<usize>,
    /// Steps allowed for a basin point to reach the chart disk.
    pub basin_budget: usize,
    /// Accept maps of degree below two. The dynamical theory excludes them,
    /// but they make exact test cases.
    pub allow_low_degree: bool,
    /// Petal index 1..=m for Abel charts.
    pub petal: usize,
    pub series_order: usize,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            radius: None,
            depth: None,
            basin_budget: 2000,
            allow_low_degree: false,
            petal: 1,
            series_order: ABEL_SERIES_ORDER,
        }
    }
}

impl ChartOptions {
    pub fn test_map() -> Self {
        ChartOptions { allow_low_degree: true, ..Default::default() }
    }
}

/// Attracting petal realized as the disk of radius `radius` centered at
/// z0 + radius·direction, tangent to z0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Petal {
    pub index: usize,
    pub direction: Complex64,
    pub center: ComplexPoint,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChartKind {
    Koenigs {
        lambda: Complex64,
        /// Φ_loc maps the chart disk onto a set containing |w| < range_radius.
        range_radius: f64,
    },
    Boettcher {
        p: u32,
        leading: Complex64,
        /// Principal (p−1)-th root of `leading`.
        scale: Complex64,
    },
    Abel {
        petal: usize,
        petals: Vec<Petal>,
        series: AbelSeries,
    },
}

/// Φ(u) ≈ Σ α_j u^j + β·log(u / v) with j from −m to K, j ≠ 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AbelSeries {
    pub m: u32,
    /// α_j stored at index j + m (the j = 0 slot is zero).
    pub alpha: Vec<Complex64>,
    pub beta: Complex64,
}

impl AbelSeries {
    fn eval(&self, u: Complex64, direction: Complex64) -> Complex64 {
        let m = self.m as i32;
        let mut acc = self.beta * (u / direction).ln();
        let inv = u.inv();
        let mut p = Complex64::new(1.0, 0.0);
        for j in 1..=m {
            p *= inv;
            acc += self.alpha[(m - j) as usize] * p;
        }
        let mut p = Complex64::new(1.0, 0.0);
        for idx in (m + 1) as usize..self.alpha.len() {
            p *= u;
            acc += self.alpha[idx] * p;
        }
        acc
    }

    /// True once the two highest kept terms are below rounding of the
    /// leading term, so pushing further only adds cancellation.
    fn settled(&self, u: Complex64) -> bool {
        let m = self.m as i32;
        let k = self.alpha.len() as i32 - m - 1;
        let r = u.norm();
        let tail: f64 = (k - 1..=k).filter(|&j| j > 0).map(|j| self.alpha[(j + m) as usize].norm() * r.powi(j)).sum();
        tail <= 0.25 * f64::EPSILON * self.alpha[0].norm() * r.powi(-m)
    }
}

#[derive(Clone, Debug)]
pub struct ConjugacyChart {
    pub f: HolomorphicMap,
    pub info: FixedPointInfo,
    pub local_radius: f64,
    pub depth: usize,
    pub basin_budget: usize,
    pub kind: ChartKind,
    local: LocalMap,
}

fn ring_samples(r: f64) -> impl Iterator<Item = Complex64> {
    RING_FRACTIONS.into_iter().flat_map(move |fr| {
        (0..RING_SAMPLES).map(move |k| Complex64::from_polar(fr * r, 2.0 * PI * (k as f64 + 0.25) / RING_SAMPLES as f64))
    })
}

fn check_degree(f: &HolomorphicMap, opts: &ChartOptions) -> Result<()> {
    if f.degree() < 2 && !opts.allow_low_degree {
        return Err(LabError::ChartConstruction(format!(
            "symbol has degree {}, charts need degree at least 2",
            f.degree()
        )));
    }
    Ok(())
}

fn radius_candidates(opts: &ChartOptions) -> Vec<f64> {
    match opts.radius {
        Some(r) => vec![r],
        None => (0..MAX_HALVINGS).map(|k| 0.5f64.powi(k as i32)).collect(),
    }
}

impl ConjugacyChart {
    /// Builds the chart matching the fixed point's class.
    pub fn from_fixed_point(f: &HolomorphicMap, z0: ComplexPoint, opts: &ChartOptions) -> Result<Self> {
        let info = classify_fixed_point(f, z0)?;
        match info.klass {
            FixedPointClass::Attracting => Self::koenigs(f, z0, opts),
            FixedPointClass::Superattracting => Self::boettcher(f, z0, opts),
            FixedPointClass::Neutral => Self::abel(f, z0, opts),
            other => Err(LabError::ChartConstruction(format!("no chart for a {other:?} fixed point"))),
        }
    }

    /// Koenigs chart of the linear map z ↦ λz (Φ is the identity).
    pub fn linear(lambda: Complex64) -> Result<Self> {
        let f = HolomorphicMap::polynomial(vec![Complex64::new(0.0, 0.0), lambda])?;
        Self::koenigs(&f, Complex64::new(0.0, 0.0), &ChartOptions::test_map())
    }

    pub fn koenigs(f: &HolomorphicMap, z0: ComplexPoint, opts: &ChartOptions) -> Result<Self> {
        check_degree(f, opts)?;
        let info = classify_fixed_point(f, z0)?;
        if info.klass != FixedPointClass::Attracting {
            return Err(LabError::ChartConstruction(format!("Koenigs chart needs an attracting point, got {:?}", info.klass)));
        }
        let lambda = info.multiplier;
        let local = f.recentered(z0)?;
        let q = (1.0 + lambda.norm()) / 2.0;
        let depth = opts.depth.unwrap_or(KOENIGS_DEPTH);
        let mut chart = ConjugacyChart {
            f: f.clone(),
            info,
            local_radius: 0.0,
            depth,
            basin_budget: opts.basin_budget,
            kind: ChartKind::Koenigs { lambda, range_radius: 0.0 },
            local: local.clone(),
        };
        let verify = |chart: &mut ConjugacyChart, r: f64| -> Option<f64> {
            let ok = ring_samples(r).all(|u| match local.eval_with_derivative(u) {
                Some((gu, dg)) => gu.norm() <= q * u.norm() && (dg / lambda - 1.0).norm() < 1.0,
                None => false,
            });
            if !ok {
                return None;
            }
            chart.local_radius = r;
            let mut min_abs = f64::INFINITY;
            for k in 0..256 {
                let u = Complex64::from_polar(r, 2.0 * PI * k as f64 / 256.0);
                min_abs = min_abs.min(chart.koenigs_local(u).map(|(w, _)| w.norm()).unwrap_or(0.0));
            }
            (min_abs > 0.0 && min_abs.is_finite()).then_some(0.98 * min_abs)
        };
        let candidates = radius_candidates(opts);
        let explicit = opts.radius.is_some();
        for (i, &r) in candidates.iter().enumerate() {
            let Some(mut range) = verify(&mut chart, r) else { continue };
            let mut lo = r;
            if !explicit && i > 0 {
                // the halving overshoots; bisect back toward the failing radius
                let mut hi = candidates[i - 1];
                for _ in 0..12 {
                    let mid = 0.5 * (lo + hi);
                    match verify(&mut chart, mid) {
                        Some(rg) => {
                            lo = mid;
                            range = rg;
                        }
                        None => hi = mid,
                    }
                }
            }
            chart.local_radius = lo;
            chart.kind = ChartKind::Koenigs { lambda, range_radius: range };
            return Ok(chart);
        }
        Err(LabError::ChartConstruction("no verified Koenigs radius found".into()))
    }

    pub fn boettcher(f: &HolomorphicMap, z0: ComplexPoint, opts: &ChartOptions) -> Result<Self> {
        check_degree(f, opts)?;
        let info = classify_fixed_point(f, z0)?;
        let p = match (info.klass, info.p) {
            (FixedPointClass::Superattracting, Some(p)) => p,
            _ => return Err(LabError::ChartConstruction(format!("Böttcher chart needs a superattracting point, got {:?}", info.klass))),
        };
        let local = f.recentered(z0)?;
        let leading = local.taylor(p as usize)[p as usize];
        let scale = (leading.ln() / (p - 1) as f64).exp();
        let depth = opts.depth.unwrap_or(BOETTCHER_DEPTH);
        for r in radius_candidates(opts) {
            let mut c_sup: f64 = 0.0;
            let ok = ring_samples(r).all(|u| match local.eval(u) {
                Some(gu) => {
                    c_sup = c_sup.max(gu.norm() / u.norm().powi(p as i32));
                    (gu / (leading * u.powu(p)) - 1.0).norm() <= 0.5
                }
                None => false,
            });
            if !ok || !(c_sup * r.powi(p as i32 - 1) < 1.0) {
                continue;
            }
            let chart = ConjugacyChart {
                f: f.clone(),
                info,
                local_radius: r,
                depth,
                basin_budget: opts.basin_budget,
                kind: ChartKind::Boettcher { p, leading, scale },
                local: local.clone(),
            };
            if ring_samples(r).all(|u| boettcher_phi(&chart, z0 + u).is_ok()) {
                return Ok(chart);
            }
        }
        Err(LabError::ChartConstruction("no verified Böttcher radius found".into()))
    }

    pub fn abel(f: &HolomorphicMap, z0: ComplexPoint, opts: &ChartOptions) -> Result<Self> {
        check_degree(f, opts)?;
        let info = classify_fixed_point(f, z0)?;
        let m = match (info.klass, info.m) {
            (FixedPointClass::Neutral, Some(m)) => m,
            _ => return Err(LabError::ChartConstruction(format!("Abel chart needs a multiplier-one point, got {:?}", info.klass))),
        };
        if opts.petal == 0 || opts.petal > m as usize {
            return Err(LabError::InvalidInput(format!("petal index {} outside 1..={m}", opts.petal)));
        }
        let local = f.recentered(z0)?;
        let series = abel_series(&local, m as usize, opts.series_order);
        let a = local.taylor(m as usize + 1)[m as usize + 1];
        let base = ((-a.norm() / a).ln() / m as f64).exp();
        let directions: Vec<Complex64> =
            (0..m).map(|k| base * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect();
        let depth = opts.depth.unwrap_or(ABEL_DEPTH);
        let candidates = match opts.radius {
            Some(r) => vec![r],
            None => (1..MAX_HALVINGS).map(|k| 0.5f64.powi(k as i32)).collect(),
        };
        for r in candidates {
            let petals: Vec<Petal> = directions
                .iter()
                .enumerate()
                .map(|(k, &v)| Petal { index: k + 1, direction: v, center: z0 + v * r, radius: r })
                .collect();
            if petals.iter().all(|p| petal_invariant(&local, z0, p, m)) {
                return Ok(ConjugacyChart {
                    f: f.clone(),
                    info,
                    local_radius: r,
                    depth,
                    basin_budget: opts.basin_budget,
                    kind: ChartKind::Abel { petal: opts.petal, petals, series },
                    local: local.clone(),
                });
            }
        }
        Err(LabError::ChartConstruction("no forward-invariant petal radius found".into()))
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn z0(&self) -> ComplexPoint {
        self.info.z0
    }

    pub fn lambda(&self) -> Option<Complex64> {
        match self.kind {
            ChartKind::Koenigs { lambda, .. } => Some(lambda),
            _ => None,
        }
    }

    pub fn range_radius(&self) -> Option<f64> {
        match self.kind {
            ChartKind::Koenigs { range_radius, .. } => Some(range_radius),
            _ => None,
        }
    }

    pub fn petals(&self) -> &[Petal] {
        match &self.kind {
            ChartKind::Abel { petals, .. } => petals,
            _ => &[],
        }
    }

    pub fn in_chart_disk(&self, z: ComplexPoint) -> bool {
        (z - self.info.z0).norm() < self.local_radius
    }

    fn koenigs_lambda(&self) -> Result<(Complex64, f64)> {
        match self.kind {
            ChartKind::Koenigs { lambda, range_radius } => Ok((lambda, range_radius)),
            _ => Err(LabError::InvalidInput("operation needs a Koenigs chart".into())),
        }
    }

    /// Φ_loc(u) and Φ_loc'(u) in the local coordinate u = z − z0.
    pub(crate) fn koenigs_local(&self, u: Complex64) -> Option<(Complex64, Complex64)> {
        let ChartKind::Koenigs { lambda, .. } = self.kind else { return None };
        let mut x = u;
        let mut d = Complex64::new(1.0, 0.0);
        let mut scale = Complex64::new(1.0, 0.0);
        for _ in 0..self.depth {
            let (gx, dg) = self.local.eval_with_derivative(x)?;
            x = gx;
            d *= dg / lambda;
            scale /= lambda;
        }
        Some((x * scale, d))
    }
}

fn petal_invariant(local: &LocalMap, z0: ComplexPoint, petal: &Petal, m: u32) -> bool {
    let c = petal.center - z0;
    let r = petal.radius;
    let inside = |w: Complex64| {
        (w - c).norm() <= r * (1.0 + 1e-12) && (m <= 2 || (w / petal.direction).arg().abs() <= PI / m as f64 + 1e-12)
    };
    let n = 256;
    let mut boundary: Vec<Complex64> = (0..n)
        .map(|k| c + Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / n as f64))
        .filter(|&b| m <= 2 || (b / petal.direction).arg().abs() <= PI / m as f64)
        .collect();
    if m > 2 {
        // edges of the sector inside the disk
        for s in [-1.0, 1.0] {
            let ray = petal.direction * Complex64::from_polar(1.0, s * PI / m as f64);
            let len = 2.0 * r * (PI / m as f64).cos();
            boundary.extend((1..64).map(|k| ray * (len * k as f64 / 64.0)));
        }
    }
    boundary.into_iter().all(|b| local.eval(b).is_some_and(inside))
}

/// Formal Fatou coordinate of g(u) = u(1 + s(u)), s = a u^m + …, solved
/// order by order from Φ(g(u)) − Φ(u) = 1.
fn abel_series(local: &LocalMap, m: usize, k_pos: usize) -> AbelSeries {
    let e_max = k_pos + 2 * m;
    let len = e_max + 1;
    let g = local.taylor(len + 1);
    // s(u) = g(u)/u − 1
    let mut s = vec![Complex64::new(0.0, 0.0); len];
    s[1..len].copy_from_slice(&g[2..len + 1]);
    let l = series::log1p(&s, len);
    let mi = m as i64;
    let t = |j: i64| {
        let jl: Vec<Complex64> = l.iter().map(|&x| x * j as f64).collect();
        let mut e = series::exp(&jl, len);
        e[0] -= 1.0;
        e
    };
    let ts: Vec<Option<Vec<Complex64>>> = (-mi..=k_pos as i64).map(|j| (j != 0).then(|| t(j))).collect();
    let mut alpha = vec![Complex64::new(0.0, 0.0); m + k_pos + 1];
    let mut beta = Complex64::new(0.0, 0.0);
    let a = l[m];
    for e in 0..=(k_pos + m) as i64 {
        let mut rhs = if e == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        for j in -mi..e - mi {
            if j == 0 {
                continue;
            }
            let tj = ts[(j + mi) as usize].as_ref().expect("j != 0");
            rhs -= alpha[(j + mi) as usize] * tj[(e - j) as usize];
        }
        if e > mi {
            rhs -= beta * l[e as usize];
        }
        if e == mi {
            beta = rhs / a;
        } else {
            let j = e - mi;
            alpha[(j + mi) as usize] = rhs / (a * j as f64);
        }
    }
    AbelSeries { m: m as u32, alpha, beta }
}

/// Extended Koenigs coordinate on the basin.
pub fn koenigs_phi(chart: &ConjugacyChart, z: ComplexPoint) -> Result<ComplexPoint> {
    koenigs_phi_with_derivative(chart, z).map(|(w, _)| w)
}

/// Φ(z) together with Φ'(z).
pub fn koenigs_phi_with_derivative(chart: &ConjugacyChart, z: ComplexPoint) -> Result<(Complex64, Complex64)> {
    koenigs_phi_budget(chart, z, chart.basin_budget)
}

/// As [`koenigs_phi_with_derivative`] with an explicit entry budget.
pub fn koenigs_phi_budget(chart: &ConjugacyChart, z: ComplexPoint, budget: usize) -> Result<(Complex64, Complex64)> {
    let (lambda, _) = chart.koenigs_lambda()?;
    let z0 = chart.info.z0;
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    let mut scale = Complex64::new(1.0, 0.0);
    for _ in 0..=budget {
        if chart.in_chart_disk(w) {
            let (phi, dphi) = chart.koenigs_local(w - z0).ok_or(LabError::NotInBasin { budget })?;
            return Ok((phi * scale, dphi * d));
        }
        let (fw, dw) = chart.f.eval_with_derivative(w).ok_or(LabError::NotInBasin { budget })?;
        if fw.norm() > ESCAPE_RADIUS {
            break;
        }
        d *= dw / lambda;
        scale /= lambda;
        w = fw;
    }
    Err(LabError::NotInBasin { budget })
}

/// Point of the chart disk with Φ(z) = w, by Newton's method.
pub fn koenigs_inverse(chart: &ConjugacyChart, w: ComplexPoint) -> Result<ComplexPoint> {
    let (_, range) = chart.koenigs_lambda()?;
    if !(w.norm() < range) {
        return Err(LabError::OutOfRange);
    }
    let z0 = chart.info.z0;
    let r = chart.local_radius;
    let mut u = w;
    if u.norm() >= r {
        u *= 0.99 * r / u.norm();
    }
    const STEPS: usize = 60;
    for _ in 0..STEPS {
        let (phi, dphi) = chart.koenigs_local(u).ok_or(LabError::NonConvergence { steps: STEPS })?;
        let res = phi - w;
        if res.norm() <= 1e-12 * w.norm().max(1e-2) {
            return Ok(z0 + u);
        }
        let mut next = u - res / dphi;
        if next.norm() >= r {
            next = u + (next - u) * 0.5;
            if next.norm() >= r {
                next *= 0.99 * r / next.norm();
            }
        }
        u = next;
    }
    match chart.koenigs_local(u) {
        Some((phi, _)) if (phi - w).norm() <= 1e-10 => Ok(z0 + u),
        _ => Err(LabError::NonConvergence { steps: STEPS }),
    }
}

/// The branch of f^{-n} landing in the chart disk.
pub fn inverse_branch(chart: &ConjugacyChart, n: usize, w: ComplexPoint) -> Result<ComplexPoint> {
    let (lambda, range) = chart.koenigs_lambda()?;
    if n == 0 {
        return if chart.in_chart_disk(w) { Ok(w) } else { Err(LabError::OutOfRange) };
    }
    let phi = koenigs_phi(chart, w).map_err(|_| LabError::OutOfRange)?;
    let v = phi / lambda.powi(n as i32);
    if !(v.norm() < range) {
        return Err(LabError::OutOfRange);
    }
    let z = koenigs_inverse(chart, v).map_err(|_| LabError::OutOfRange)?;
    let mut x = z;
    for _ in 0..n {
        x = chart.f.eval_opt(x).ok_or(LabError::OutOfRange)?;
    }
    if (x - w).norm() <= 1e-8 {
        Ok(z)
    } else {
        Err(LabError::OutOfRange)
    }
}

/// Local Böttcher coordinate φ with φ∘f = φ^p.
///
/// φ(u) = c·u·Π_n (g(u_n)/(a u_n^p))^{1/p^{n+1}}, each factor a principal
/// root that must stay within 0.5 of 1.
pub fn boettcher_phi(chart: &ConjugacyChart, z: ComplexPoint) -> Result<ComplexPoint> {
    let ChartKind::Boettcher { p, leading, scale } = chart.kind else {
        return Err(LabError::InvalidInput("operation needs a Böttcher chart".into()));
    };
    let u = z - chart.info.z0;
    if !(u.norm() <= chart.local_radius) {
        return Err(LabError::NotInChart);
    }
    if u.norm_sqr() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut phi = scale * u;
    let mut x = u;
    let mut root_deg = p as f64;
    for step in 0..chart.depth {
        if x.norm() < 1e-100 {
            break;
        }
        let gx = chart.local.eval(x).ok_or(LabError::NotInChart)?;
        let ratio = gx / (leading * x.powu(p));
        if ratio == Complex64::new(1.0, 0.0) {
            break;
        }
        let corr = (ratio.ln() / root_deg).exp();
        if !((corr - 1.0).norm() < 0.5) {
            return Err(LabError::BranchAmbiguity { step });
        }
        phi *= corr;
        x = gx;
        root_deg *= p as f64;
    }
    Ok(phi)
}

/// Petal containing z, if any.
pub fn petal_membership(chart: &ConjugacyChart, z: ComplexPoint) -> Option<usize> {
    let ChartKind::Abel { petals, .. } = &chart.kind else { return None };
    let m = chart.info.m.unwrap_or(1);
    let z0 = chart.info.z0;
    petals
        .iter()
        .find(|p| {
            let u = z - z0;
            u.norm_sqr() > 0.0
                && (z - p.center).norm() < p.radius
                && (m <= 2 || (u / p.direction).arg().abs() < PI / m as f64)
        })
        .map(|p| p.index)
}

/// Abel coordinate on the chart's own petal.
pub fn abel_phi(chart: &ConjugacyChart, z: ComplexPoint) -> Result<ComplexPoint> {
    let ChartKind::Abel { petal, petals, series } = &chart.kind else {
        return Err(LabError::InvalidInput("operation needs an Abel chart".into()));
    };
    if petal_membership(chart, z) != Some(*petal) {
        return Err(LabError::NotInPetal);
    }
    let dir = petals[*petal - 1].direction;
    let mut u = z - chart.info.z0;
    // depth caps the pushes; most points settle long before
    let mut n = 0;
    while n < chart.depth && !series.settled(u) {
        u = chart.local.eval(u).ok_or(LabError::NotInPetal)?;
        if u.norm_sqr() == 0.0 {
            return Err(LabError::NotInPetal);
        }
        n += 1;
    }
    Ok(series.eval(u, dir) - n as f64)
}

/// Abel coordinate continued along the orbit: Φ(z) = Φ(fʲ(z)) − j for the
/// first j ≤ budget with fʲ(z) in the petal.
pub fn abel_phi_extended(chart: &ConjugacyChart, z: ComplexPoint, budget: usize) -> Result<ComplexPoint> {
    let ChartKind::Abel { petal, .. } = &chart.kind else {
        return Err(LabError::InvalidInput("operation needs an Abel chart".into()));
    };
    let mut w = z;
    for j in 0..=budget {
        if petal_membership(chart, w) == Some(*petal) {
            return Ok(abel_phi(chart, w)? - j as f64);
        }
        w = match chart.f.eval_opt(w) {
            Some(v) if v.norm() <= ESCAPE_RADIUS => v,
            _ => break,
        };
    }
    Err(LabError::NotInPetal)
}
