//! Spiral cuts and the invariant domain G₀.
//!
//! S₀ = {δλᵗ : t > 0} ∪ {0} is the trace of a logarithmic spiral (a segment
//! when λ is positive real). V₀ is the δ-disk minus S₀, and G₀ collects all
//! basin points some iterate of which lands in the chart preimage of V₀.
//! Because Φ∘fⁿ = λⁿΦ and the full spiral {δλˢ : s ∈ ℝ} is λ-invariant,
//! z ∈ G₀ exactly when Φ(z) avoids the full spiral and 0.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conjugacy::{koenigs_phi_budget, ConjugacyChart};
use crate::error::{LabError, Result};
use crate::geometry::{CompactGridSet, ComplexPoint, GridSpec};

/// Default half-width of the t window around the radius-matched parameter.
pub const T_WINDOW: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpiralCut {
    pub delta: f64,
    pub lambda: Complex64,
    pub t_window: f64,
}

impl SpiralCut {
    pub fn new(delta: f64, lambda: Complex64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(LabError::InvalidInput(format!("delta must be positive, got {delta}")));
        }
        let r = lambda.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(LabError::InvalidInput(format!("spiral needs 0 < |lambda| < 1, got {lambda}")));
        }
        Ok(SpiralCut { delta, lambda, t_window: T_WINDOW })
    }

    /// Cut for a Koenigs chart; δ defaults to half the chart range radius.
    pub fn for_chart(chart: &ConjugacyChart, delta: Option<f64>) -> Result<Self> {
        let (Some(lambda), Some(range)) = (chart.lambda(), chart.range_radius()) else {
            return Err(LabError::InvalidInput("spiral cut needs a Koenigs chart".into()));
        };
        let delta = delta.unwrap_or(0.5 * range);
        if delta > range {
            return Err(LabError::InvalidInput(format!("delta {delta} exceeds the chart range radius {range}")));
        }
        Self::new(delta, lambda)
    }

    fn log_lambda(&self) -> Complex64 {
        self.lambda.ln()
    }

    /// δλᵗ with the principal logarithm.
    pub fn point(&self, t: f64) -> Complex64 {
        self.delta * (self.log_lambda() * t).exp()
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    if fc < fd { (c, fc) } else { (d, fd) }
}

/// Distance from `w` to S₀ (`extended = false`) or to the full spiral
/// {δλˢ : s ∈ ℝ} ∪ {0} (`extended = true`).
pub fn spiral_distance(s: &SpiralCut, w: ComplexPoint, extended: bool) -> f64 {
    let rw = w.norm();
    if rw == 0.0 {
        return 0.0;
    }
    let l = s.log_lambda();
    let (ar, theta) = (l.re, l.im);
    if theta == 0.0 {
        // positive real λ: a segment (0, δ] or the ray (0, ∞) along δ > 0
        let x = if extended { w.re.max(0.0) } else { w.re.clamp(0.0, s.delta) };
        return (w - x).norm();
    }
    let dist = |t: f64| (w - s.point(t)).norm();
    let mut best = rw;
    if !extended {
        best = best.min(dist(0.0));
    }
    // parameter where the spiral radius equals |w|
    let t_star = (rw / s.delta).ln() / ar;
    let t_lo = t_star - s.t_window;
    let t_hi = t_star + s.t_window.max(28.0 / ar.abs());
    let t_lo = if extended { t_lo } else { t_lo.max(0.0) };
    if t_lo >= t_hi {
        return best;
    }
    // successive turns in the log-plane project to t values `spacing` apart
    let spacing = (2.0 * PI * theta / l.norm_sqr()).abs();
    let radius = |t: f64| s.delta * (ar * t).exp();
    let mut a = t_lo;
    while a < t_hi {
        let b = (a + spacing).min(t_hi);
        // radii decrease in t; lower bound from the radial gap
        let (r_big, r_small) = (radius(a), radius(b));
        let lb = if rw > r_big { rw - r_big } else if rw < r_small { r_small - rw } else { 0.0 };
        if lb < best {
            let n = 24;
            let h = (b - a) / n as f64;
            let mut bi = 0;
            let mut bv = f64::INFINITY;
            for i in 0..=n {
                let v = dist(a + h * i as f64);
                if v < bv {
                    bv = v;
                    bi = i;
                }
            }
            let lo = a + h * (bi.max(1) - 1) as f64;
            let hi = a + h * (bi + 1).min(n) as f64;
            let (_, v) = golden_min(dist, lo, hi);
            best = best.min(v).min(bv);
        }
        a = b;
    }
    best
}

/// |w| < δ and w clears S₀ by more than `clearance`.
pub fn in_v0(s: &SpiralCut, w: ComplexPoint, clearance: f64) -> bool {
    w.norm() < s.delta && spiral_distance(s, w, false) > clearance
}

/// G₀ membership through the collapsed criterion: Φ(z) must clear the full
/// spiral by more than `clearance`, measured in the Φ-plane.
pub fn in_g0(chart: &ConjugacyChart, s: &SpiralCut, z: ComplexPoint, n_max: usize, clearance: f64) -> bool {
    match koenigs_phi_budget(chart, z, n_max) {
        Ok((phi, _)) => clears(s, phi, clearance),
        Err(_) => false,
    }
}

fn clears(s: &SpiralCut, phi: Complex64, clearance: f64) -> bool {
    phi.norm() > 0.0 && spiral_distance(s, phi, true) > clearance
}

/// G₀ membership straight from the union of preimages: follow the orbit into
/// the δ-disk and test the iterates there with in_V0. Since φ(fⁿ(z)) =
/// λⁿΦ(z), iterate n is held to clearance |λ|ⁿ·c. With zero clearance the
/// first such iterate decides, but a positive clearance lets a later iterate
/// graze the cut, so we keep going until the arms not yet seen are further
/// away than the clearance.
pub fn in_g0_direct(chart: &ConjugacyChart, s: &SpiralCut, z: ComplexPoint, n_max: usize, clearance: f64) -> bool {
    let z0 = chart.z0();
    let q = s.lambda.norm();
    let mut w = z;
    // (|φ|, clearance) at the first iterate inside the δ-disk, and steps since
    let mut first: Option<(f64, f64)> = None;
    let mut k = 0i32;
    for n in 0..=n_max {
        if chart.in_chart_disk(w) {
            let Some((phi, _)) = chart.koenigs_local(w - z0) else { return false };
            if phi.norm() < s.delta {
                let thr = clearance * q.powi(n as i32);
                if phi.norm() == 0.0 || !in_v0(s, phi, thr) {
                    return false;
                }
                let (r0, t0) = *first.get_or_insert((phi.norm(), thr));
                if s.delta * q.powi(-k) - r0 > t0 {
                    return true;
                }
                k += 1;
            }
        }
        if n == n_max {
            break;
        }
        match chart.f.eval_opt(w) {
            Some(fw) => w = fw,
            None => return false,
        }
    }
    false
}

/// Rendered G₀ together with the basin it was cut from.
#[derive(Clone, Debug, PartialEq)]
pub struct G0Render {
    pub g0: CompactGridSet,
    pub basin: CompactGridSet,
}

impl G0Render {
    /// Basin pixels outside G₀.
    pub fn complement(&self) -> CompactGridSet {
        let (CompactGridSet::Raster { grid, mask: g }, Some(b)) = (&self.g0, self.basin.mask()) else {
            unreachable!("renders are rasters")
        };
        let mask = b.iter().zip(g).map(|(&b, &g)| b && !g).collect();
        CompactGridSet::Raster { grid: *grid, mask }
    }

    pub fn basin_pixels(&self) -> usize {
        self.basin.count()
    }

    pub fn complement_pixels(&self) -> usize {
        self.complement().count()
    }

    pub fn complement_fraction(&self) -> f64 {
        let b = self.basin_pixels();
        if b == 0 { 0.0 } else { self.complement_pixels() as f64 / b as f64 }
    }
}

pub fn render_g0_full(chart: &ConjugacyChart, s: &SpiralCut, grid: GridSpec, n_max: usize, clearance: f64) -> Result<G0Render> {
    grid.validate()?;
    let n = grid.resolution;
    let cells: Vec<(bool, bool)> = (0..n * n)
        .into_par_iter()
        .map(|i| {
            let z = grid.index_center(i);
            match koenigs_phi_budget(chart, z, n_max) {
                Ok((phi, _)) => (true, clears(s, phi, clearance)),
                Err(_) => (false, false),
            }
        })
        .collect();
    let basin = cells.iter().map(|c| c.0).collect();
    let g0 = cells.iter().map(|c| c.1).collect();
    Ok(G0Render {
        g0: CompactGridSet::from_mask(grid, g0)?,
        basin: CompactGridSet::from_mask(grid, basin)?,
    })
}

/// Raster of G₀ over pixel centers.
pub fn render_g0(chart: &ConjugacyChart, s: &SpiralCut, grid: GridSpec, n_max: usize, clearance: f64) -> Result<CompactGridSet> {
    Ok(render_g0_full(chart, s, grid, n_max, clearance)?.g0)
}

/// Least-squares slope of log N(ε) against log(1/ε). Each scale s splits the
/// raster into s×s boxes, so ε = 1/s of the frame width. Scales must be
/// powers of two no larger than the resolution.
pub fn box_dimension(mask: &CompactGridSet, scales: &[usize]) -> Result<f64> {
    let CompactGridSet::Raster { grid, mask } = mask else {
        return Err(LabError::UnsupportedRepresentation("point-cloud"));
    };
    let n = grid.resolution;
    if scales.len() < 3 {
        return Err(LabError::InvalidInput(format!("need at least 3 scales, got {}", scales.len())));
    }
    let mut seen = scales.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != scales.len() || scales.iter().any(|&s| s == 0 || !s.is_power_of_two() || s > n) {
        return Err(LabError::InvalidInput(format!("scales must be distinct powers of two up to {n}: {scales:?}")));
    }
    if !mask.iter().any(|&b| b) {
        return Err(LabError::DegenerateFit("mask is empty".into()));
    }
    let pts: Vec<(f64, f64)> = scales
        .iter()
        .map(|&s| {
            let mut occupied = vec![false; s * s];
            for (i, _) in mask.iter().enumerate().filter(|(_, &b)| b) {
                occupied[(i / n) * s / n * s + (i % n) * s / n] = true;
            }
            let count = occupied.iter().filter(|&&b| b).count();
            ((s as f64).ln(), (count as f64).ln())
        })
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}
