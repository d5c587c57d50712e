//! Limit-function structure: collisions under iteration and fiber checks
//! against the linearizing coordinates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::conjugacy::{abel_phi_extended, koenigs_phi, ChartKind, ConjugacyChart};
use crate::error::{LabError, Result};
use crate::geometry::ComplexPoint;
use crate::linalg::poly_roots;
use crate::poly;
use crate::symbol_dynamics::HolomorphicMap;

/// Largest degree of fⁿ handed to the root finder.
pub const DEGREE_CAP: usize = 64;
const POLISH_STEPS: usize = 200;

/// fⁿ = P_n/Q_n through the homogenized recursion
/// P_{k+1} = Σ p_i P_k^i Q_k^{d−i}, Q_{k+1} = Σ q_i P_k^i Q_k^{d−i}.
fn compose_power(f: &HolomorphicMap, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let one = vec![Complex64::new(1.0, 0.0)];
    let num = f.numerator();
    let den = f.denominator();
    let d = poly::degree(num).max(poly::degree(den));
    let mut p = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let mut q = one.clone();
    for _ in 0..n {
        let pp: Vec<_> = (0..=d).map(|i| poly::pow(&p, i)).collect();
        let qp: Vec<_> = (0..=d).map(|i| poly::pow(&q, i)).collect();
        let mut np = vec![Complex64::new(0.0, 0.0)];
        let mut nq = vec![Complex64::new(0.0, 0.0)];
        for i in 0..=d {
            let term = poly::mul(&pp[i], &qp[d - i]);
            if let Some(&a) = num.get(i) {
                np = poly::add(&np, &poly::scale(&term, a));
            }
            if let Some(&b) = den.get(i) {
                nq = poly::add(&nq, &poly::scale(&term, b));
            }
        }
        p = poly::trim(np);
        q = poly::trim(nq);
    }
    (p, q)
}

fn orbit_with_derivative(f: &HolomorphicMap, z: ComplexPoint, n: usize) -> Option<(Complex64, Complex64)> {
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        let (fw, dw) = f.eval_with_derivative(w)?;
        w = fw;
        d *= dw;
    }
    Some((w, d))
}

fn lex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// All z with fⁿ(z) = w, each verified to |fⁿ(z) − w| ≤ 1e-8.
///
/// Roots of P_n − w·Q_n come from companion eigenvalues and are then
/// polished by Newton on fⁿ itself. Repeated roots are reported once.
pub fn collision_pairs(f: &HolomorphicMap, w: ComplexPoint, n: usize) -> Result<Vec<ComplexPoint>> {
    let d = f.degree();
    let degree = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(d)).unwrap_or(usize::MAX);
    if degree > DEGREE_CAP {
        return Err(LabError::DegreeCapExceeded { degree, cap: DEGREE_CAP });
    }
    if n == 0 {
        return Ok(vec![w]);
    }
    let (p, q) = compose_power(f, n);
    let eq = poly::add(&p, &poly::scale(&q, -w));
    let mut roots: Vec<ComplexPoint> = poly_roots(&eq)
        .into_par_iter()
        .filter_map(|z0| {
            let mut z = z0;
            for _ in 0..POLISH_STEPS {
                let (v, dv) = orbit_with_derivative(f, z, n)?;
                if dv.norm_sqr() == 0.0 || v == w {
                    break;
                }
                let step = (v - w) / dv;
                z -= step;
                if step.norm() <= 1e-17 * (1.0 + z.norm()) {
                    break;
                }
            }
            let (v, _) = orbit_with_derivative(f, z, n)?;
            ((v - w).norm() <= 1e-8).then_some(z)
        })
        .collect();
    roots.sort_by(lex);
    let mut out: Vec<ComplexPoint> = Vec::new();
    for z in roots {
        if out.iter().all(|u| (u - z).norm() > 1e-6 * (1.0 + z.norm())) {
            out.push(z);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberViolation {
    pub z: ComplexPoint,
    pub w: ComplexPoint,
    pub phi_gap: f64,
    pub value_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    /// Pairs close enough in the coordinate to be compared.
    pub pairs_checked: usize,
    pub violations: Vec<FiberViolation>,
    pub tol_in: f64,
    pub tol_out: f64,
}

/// The chart's linearizing coordinate: Koenigs, or Abel on the chart petal.
pub fn chart_coordinate(chart: &ConjugacyChart, z: ComplexPoint) -> Result<Complex64> {
    match chart.kind {
        ChartKind::Koenigs { .. } => koenigs_phi(chart, z),
        ChartKind::Abel { .. } => abel_phi_extended(chart, z, chart.basin_budget),
        ChartKind::Boettcher { .. } => Err(LabError::InvalidInput("fiber checks need a Koenigs or Abel chart".into())),
    }
}

struct Sample {
    z: ComplexPoint,
    phi: Complex64,
    h: Complex64,
    label: usize,
}

/// Canonical order so reports do not depend on how the points were listed.
fn canonical(mut s: Vec<Sample>) -> Vec<Sample> {
    s.sort_by(|a, b| a.label.cmp(&b.label).then(lex(&a.z, &b.z)).then(lex(&a.h, &b.h)));
    s
}

/// Index pairs (i, j), i < j in canonical order, with |φ_i − φ_j| ≤ tol,
/// found by sorting on Re φ and sweeping.
fn close_pairs(s: &[Sample], tol: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].phi.re.total_cmp(&s[b].phi.re).then(a.cmp(&b)));
    let mut out: Vec<(usize, usize)> = order
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, &a)| {
            order[k + 1..]
                .iter()
                .take_while(move |&&b| s[b].phi.re - s[a].phi.re <= tol)
                .filter(move |&&b| (s[a].phi - s[b].phi).norm() <= tol)
                .map(move |&b| (a.min(b), a.max(b)))
        })
        .collect();
    out.sort_unstable();
    out
}

fn violations(s: &[Sample], pairs: &[(usize, usize)], tol_out: f64) -> Vec<FiberViolation> {
    pairs
        .iter()
        .filter_map(|&(i, j)| {
            let value_gap = (s[i].h - s[j].h).norm();
            (value_gap > tol_out).then(|| FiberViolation { z: s[i].z, w: s[j].z, phi_gap: (s[i].phi - s[j].phi).norm(), value_gap })
        })
        .collect()
}

/// Flags sample pairs that are close in Φ but whose values of h differ.
///
/// An empty violation list means h is compatible with factoring through Φ at
/// the resolution of the samples.
pub fn phi_fiber_check(
    chart: &ConjugacyChart,
    points: &[ComplexPoint],
    values: &[Complex64],
    tol_in: f64,
    tol_out: f64,
) -> Result<FiberReport> {
    if points.len() != values.len() {
        return Err(LabError::InvalidInput("one value per point".into()));
    }
    let samples: Vec<Sample> = points
        .par_iter()
        .zip(values)
        .map(|(&z, &h)| Ok(Sample { z, phi: chart_coordinate(chart, z)?, h, label: 0 }))
        .collect::<Result<_>>()?;
    let s = canonical(samples);
    let pairs = close_pairs(&s, tol_in);
    Ok(FiberReport { pairs_checked: pairs.len(), violations: violations(&s, &pairs, tol_out), tol_in, tol_out })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossPetalPair {
    pub z: ComplexPoint,
    pub w: ComplexPoint,
    pub petal_z: usize,
    pub petal_w: usize,
    pub phi_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarFiberReport {
    pub report: FiberReport,
    /// Pairs from different petals with nearly equal Abel values. Φ\* keeps
    /// them apart, so they are not violations.
    pub non_identified: Vec<CrossPetalPair>,
}

/// Fiber check for the petal-indexed coordinate (Φ_k(z), k).
///
/// `charts[k − 1]` is the Abel chart of petal k, and each point carries the
/// petal it is measured in.
pub fn phi_star_fiber_check(
    charts: &[ConjugacyChart],
    points: &[(ComplexPoint, usize)],
    values: &[Complex64],
    tol_in: f64,
    tol_out: f64,
) -> Result<StarFiberReport> {
    let petals = charts.first().map_or(0, |c| c.petals().len());
    if petals < 2 {
        return Err(LabError::PetalCountTooSmall { petals });
    }
    for (k, ch) in charts.iter().enumerate() {
        match ch.kind {
            ChartKind::Abel { petal, .. } if petal == k + 1 && ch.petals().len() == petals => {}
            _ => return Err(LabError::InvalidInput(format!("chart {k} is not the Abel chart of petal {}", k + 1))),
        }
    }
    if charts.len() != petals {
        return Err(LabError::InvalidInput(format!("need one chart per petal, got {} for {petals}", charts.len())));
    }
    if points.len() != values.len() {
        return Err(LabError::InvalidInput("one value per point".into()));
    }
    let samples: Vec<Sample> = points
        .par_iter()
        .zip(values)
        .map(|(&(z, k), &h)| {
            let ch = charts.get(k.wrapping_sub(1)).ok_or_else(|| LabError::InvalidInput(format!("petal label {k}")))?;
            Ok(Sample { z, phi: abel_phi_extended(ch, z, ch.basin_budget)?, h, label: k })
        })
        .collect::<Result<_>>()?;
    let s = canonical(samples);
    let pairs = close_pairs(&s, tol_in);
    let (same, cross): (Vec<_>, Vec<_>) = pairs.into_iter().partition(|&(i, j)| s[i].label == s[j].label);
    let non_identified = cross
        .iter()
        .map(|&(i, j)| CrossPetalPair {
            z: s[i].z,
            w: s[j].z,
            petal_z: s[i].label,
            petal_w: s[j].label,
            phi_gap: (s[i].phi - s[j].phi).norm(),
        })
        .collect();
    Ok(StarFiberReport {
        report: FiberReport { pairs_checked: same.len(), violations: violations(&s, &same, tol_out), tol_in, tol_out },
        non_identified,
    })
}

/// Values of g∘fⁿ at the last index, if the last three indices agree
/// pointwise within `cauchy_tol`.
pub fn omega_limit_estimate<G>(
    g: G,
    f: &HolomorphicMap,
    indices: &[usize],
    points: &[ComplexPoint],
    cauchy_tol: f64,
) -> Result<Option<Vec<Complex64>>>
where
    G: Fn(ComplexPoint) -> Complex64 + Sync,
{
    if indices.len() < 3 {
        return Err(LabError::InvalidInput("need at least three indices".into()));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::InvalidInput("indices must be strictly increasing".into()));
    }
    let tail = &indices[indices.len() - 3..];
    let rows: Option<Vec<[Complex64; 3]>> = points
        .par_iter()
        .map(|&z| {
            let mut w = z;
            let mut at = 0;
            let mut out = [Complex64::new(0.0, 0.0); 3];
            for (k, &n) in tail.iter().enumerate() {
                while at < n {
                    w = f.eval_opt(w)?;
                    at += 1;
                }
                out[k] = g(w);
                if !out[k].is_finite() {
                    return None;
                }
            }
            Some(out)
        })
        .collect();
    let Some(rows) = rows else { return Ok(None) };
    let cauchy = rows.iter().all(|r| (r[1] - r[0]).norm() <= cauchy_tol && (r[2] - r[1]).norm() <= cauchy_tol);
    Ok(cauchy.then(|| rows.iter().map(|r| r[2]).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conjugacy::ChartOptions;
    use crate::runge_engine::fit_rational;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn blaschke() -> HolomorphicMap {
        HolomorphicMap::blaschke(c(0.6, 0.0)).unwrap()
    }

    fn chart() -> ConjugacyChart {
        ConjugacyChart::koenigs(&blaschke(), c(0.0, 0.0), &ChartOptions::default()).unwrap()
    }

    fn abel_charts(f: &HolomorphicMap) -> Vec<ConjugacyChart> {
        (1..=2)
            .map(|k| ConjugacyChart::abel(f, c(0.0, 0.0), &ChartOptions { petal: k, ..Default::default() }).unwrap())
            .collect()
    }

    #[test]
    fn collision_examples() {
        let sq = HolomorphicMap::real_polynomial(&[0.0, 0.0, 1.0]);
        let r = collision_pairs(&sq, c(0.25, 0.0), 1).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] + 0.5).norm() < 1e-12 && (r[1] - 0.5).norm() < 1e-12, "{r:?}");

        let f = blaschke();
        let w = f.eval(c(0.2, 0.0)).unwrap();
        let r = collision_pairs(&f, w, 1).unwrap();
        assert_eq!(r.len(), 2);
        // oracle: z(z − α) = w(1 − αz), i.e. z² + (αw − α)z − w = 0
        let (a, b) = (0.6 * w - 0.6, -w);
        let disc = (a * a - 4.0 * b).sqrt();
        let mut oracle = [(-a + disc) / 2.0, (-a - disc) / 2.0];
        oracle.sort_by(lex);
        for (x, y) in r.iter().zip(&oracle) {
            assert!((x - y).norm() < 1e-12, "{x} vs {y}");
        }
        assert!(r.iter().any(|z| (z - 0.2).norm() < 1e-12));

        let r = collision_pairs(&sq, c(0.0, 0.0), 2).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].norm() < 1e-8);

        assert!(matches!(collision_pairs(&sq, c(0.1, 0.0), 7), Err(LabError::DegreeCapExceeded { degree: 128, cap: 64 })));
    }

    #[test]
    fn iterated_preimages_of_blaschke() {
        let f = blaschke();
        let w = c(0.05, -0.02);
        let r = collision_pairs(&f, w, 4).unwrap();
        assert_eq!(r.len(), 16);
        for z in r {
            let v = (0..4).fold(z, |x, _| f.eval(x).unwrap());
            assert!((v - w).norm() <= 1e-8);
        }
    }

    #[test]
    fn fiber_examples() {
        let ch = chart();
        let f = blaschke();
        let z = c(0.2, 0.05);
        let partner = collision_pairs(&f, f.eval(z).unwrap(), 1).unwrap().into_iter().find(|p| (p - z).norm() > 1e-3).unwrap();
        let mut pts: Vec<Complex64> = (0..60).map(|k| Complex64::from_polar(0.1 + 0.004 * k as f64, 0.37 * k as f64)).collect();
        pts.push(z);
        pts.push(partner);
        let phis: Vec<_> = pts.iter().map(|&p| koenigs_phi(&ch, p).unwrap()).collect();

        let exp_phi: Vec<_> = phis.iter().map(|p| p.exp()).collect();
        let rep = phi_fiber_check(&ch, &pts, &exp_phi, 1e-8, 1e-6).unwrap();
        assert!(rep.pairs_checked >= 1);
        assert!(rep.violations.is_empty());

        let rep = phi_fiber_check(&ch, &pts, &pts, 1e-8, 1e-6).unwrap();
        assert_eq!(rep.violations.len(), 1);
        let v = rep.violations[0];
        assert!(v.phi_gap <= 1e-8 && v.value_gap > 1e-6);

        let rep = phi_fiber_check(&ch, &[], &[], 1e-8, 1e-6).unwrap();
        assert_eq!(rep.pairs_checked, 0);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn collisions_have_equal_koenigs_values() {
        let ch = chart();
        let f = blaschke();
        let w = c(0.02, 0.01);
        let pts = collision_pairs(&f, w, 3).unwrap();
        let phis: Vec<_> = pts.iter().map(|&p| koenigs_phi(&ch, p).unwrap()).collect();
        let rep = phi_fiber_check(&ch, &pts, &phis, 1e-8, 1e-8).unwrap();
        assert_eq!(rep.pairs_checked, pts.len() * (pts.len() - 1) / 2);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn fitted_functions_of_phi_pass() {
        let ch = chart();
        let f = blaschke();
        let pts: Vec<Complex64> = collision_pairs(&f, c(0.03, 0.0), 2)
            .unwrap()
            .into_iter()
            .chain((0..30).map(|k| Complex64::from_polar(0.15, 0.2 * k as f64)))
            .collect();
        let phis: Vec<_> = pts.iter().map(|&p| koenigs_phi(&ch, p).unwrap()).collect();
        let psi = |w: Complex64| (2.0 * w).sin() + w * w;
        let data: Vec<_> = phis.iter().map(|&w| (w, psi(w))).collect();
        let (r, err) = fit_rational(&data, &[], 12, 0.0).unwrap();
        let h: Vec<_> = phis.iter().map(|&w| r.eval(w)).collect();
        let rep = phi_fiber_check(&ch, &pts, &h, 1e-8, 10.0 * err.max(1e-15)).unwrap();
        assert!(rep.pairs_checked >= 6);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }

    #[test]
    fn star_check_separates_petals() {
        let f = HolomorphicMap::real_polynomial(&[0.0, 1.0, 0.0, 1.0]);
        let charts = abel_charts(&f);
        // f is odd, so −z in petal 2 mirrors z in petal 1
        let p1 = charts[0].petals()[0];
        let mut pts = Vec::new();
        for k in 0..12 {
            let z = p1.center + Complex64::from_polar(0.5 * p1.radius, 0.5 * k as f64);
            pts.push((z, 1));
            pts.push((-z, 2));
            pts.push((-z + Complex64::from_polar(0.1 * p1.radius, 1.0), 2));
        }
        let h: Vec<_> = pts.iter().map(|&(z, k)| abel_phi_extended(&charts[k - 1], z, 2000).unwrap()).collect();
        let rep = phi_star_fiber_check(&charts, &pts, &h, 1e-8, 1e-6).unwrap();
        assert!(rep.report.violations.is_empty());

        // oracle: the smallest cross-petal gap over the sample set
        let mut best = f64::INFINITY;
        for (a, ha) in pts.iter().zip(&h) {
            for (b, hb) in pts.iter().zip(&h) {
                if a.1 != b.1 {
                    best = best.min((ha - hb).norm());
                }
            }
        }
        assert!(best < 1e-9, "{best}");
        assert!(!rep.non_identified.is_empty());
        assert!(rep.non_identified.iter().all(|p| p.petal_z != p.petal_w && p.phi_gap <= 1e-8));

        let g = HolomorphicMap::real_polynomial(&[0.0, 1.0, 1.0]);
        let one = ConjugacyChart::abel(&g, c(0.0, 0.0), &ChartOptions::default()).unwrap();
        let e = phi_star_fiber_check(&[one], &[], &[], 1e-8, 1e-6);
        assert!(matches!(e, Err(LabError::PetalCountTooSmall { petals: 1 })));
    }

    #[test]
    fn omega_limit_examples() {
        let f = blaschke();
        let pts = [c(0.1, 0.0), c(-0.2, 0.3), c(0.5, -0.1)];
        let lim = omega_limit_estimate(|_| c(2.0, -1.0), &f, &[3, 7, 20], &pts, 1e-12).unwrap().unwrap();
        assert!(lim.iter().all(|&v| v == c(2.0, -1.0)));

        let ch = chart();
        let lim = omega_limit_estimate(|z| koenigs_phi(&ch, z).unwrap(), &f, &[40, 60, 80], &pts, 1e-6).unwrap().unwrap();
        assert!(lim.iter().all(|v| v.norm() < 1e-6));

        assert!(omega_limit_estimate(|z| z, &f, &[1, 2], &pts, 1.0).is_err());
        assert!(omega_limit_estimate(|z| z, &f, &[1, 3, 3], &pts, 1.0).is_err());
    }

    #[test]
    fn unscheduled_tail_drifts() {
        use crate::runge_engine::{build_universal_schedule, Compact, RungeOptions, ScheduleTarget, TargetFunction};
        let f = blaschke();
        let ch = chart();
        let l = Compact::Disk { center: c(0.15, 0.0), radius: 0.05 };
        let t = [
            ScheduleTarget { h: TargetFunction::constant(c(1.0, 0.0)), l: l.clone(), eps: 1e-3 },
            ScheduleTarget { h: TargetFunction::constant(c(-1.0, 0.0)), l: l.clone(), eps: 1e-3 },
        ];
        let s = build_universal_schedule(&f, &ch, &[c(0.0, 0.0)], &t, &RungeOptions::default()).unwrap();
        let (n1, n2) = (s.indices[0], s.indices[1]);
        let pts = l.samples(16, true);
        // the third index continues with the same stride but was never scheduled
        let r = omega_limit_estimate(|z| s.result_g.eval(z), &f, &[n1, n2, 2 * n2 - n1], &pts, 1e-3).unwrap();
        assert!(r.is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn fiber_report_ignores_point_order(seed in 0u64..10_000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let ch = chart();
            let f = blaschke();
            let mut pts = collision_pairs(&f, c(0.04, 0.01), 2).unwrap();
            pts.extend((0..10).map(|k| Complex64::from_polar(0.12, 0.6 * k as f64)));
            let vals: Vec<_> = pts.iter().map(|z| z * z).collect();
            let a = phi_fiber_check(&ch, &pts, &vals, 1e-8, 1e-9).unwrap();
            let mut idx: Vec<usize> = (0..pts.len()).collect();
            idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let p2: Vec<_> = idx.iter().map(|&i| pts[i]).collect();
            let v2: Vec<_> = idx.iter().map(|&i| vals[i]).collect();
            let b = phi_fiber_check(&ch, &p2, &v2, 1e-8, 1e-9).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn preimages_map_onto_target(re in -0.3f64..0.3, im in -0.3f64..0.3, n in 1usize..4) {
            let f = blaschke();
            let w = c(re, im);
            for z in collision_pairs(&f, w, n).unwrap() {
                let v = (0..n).fold(z, |x, _| f.eval(x).unwrap());
                prop_assert!((v - w).norm() <= 1e-8);
            }
        }
    }
}
