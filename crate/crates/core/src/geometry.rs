//! Planar compact sets on pixel grids and as point clouds.
//!
//! A raster pixel belongs to a set when its center does. Set pixels are
//! 8-connected and complement pixels 4-connected, so a diagonal chain of set
//! pixels already closes a curve.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub type ComplexPoint = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub center: ComplexPoint,
    pub half_width: f64,
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(center: ComplexPoint, half_width: f64, resolution: usize) -> Result<Self> {
        let g = GridSpec { center, half_width, resolution };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(LabError::InvalidInput(format!("half_width must be positive, got {}", self.half_width)));
        }
        if self.resolution < 2 {
            return Err(LabError::InvalidInput(format!("resolution must be at least 2, got {}", self.resolution)));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(LabError::InvalidInput("grid center must be finite".into()));
        }
        Ok(())
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    pub fn pixel_diagonal(&self) -> f64 {
        self.pixel_size() * std::f64::consts::SQRT_2
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.resolution == 0
    }

    /// Center of the pixel in column `col`, row `row`; row 0 is the top edge.
    pub fn pixel_center(&self, col: usize, row: usize) -> ComplexPoint {
        let px = self.pixel_size();
        Complex64::new(
            self.center.re - self.half_width + (col as f64 + 0.5) * px,
            self.center.im + self.half_width - (row as f64 + 0.5) * px,
        )
    }

    pub fn index_center(&self, idx: usize) -> ComplexPoint {
        self.pixel_center(idx % self.resolution, idx / self.resolution)
    }

    /// Pixel (col, row) containing `z`, if it lies on the grid.
    pub fn pixel_of(&self, z: ComplexPoint) -> Option<(usize, usize)> {
        let px = self.pixel_size();
        let x = (z.re - (self.center.re - self.half_width)) / px;
        let y = ((self.center.im + self.half_width) - z.im) / px;
        if !(x >= 0.0 && y >= 0.0) {
            return None;
        }
        let (c, r) = (x.floor() as usize, y.floor() as usize);
        (c < self.resolution && r < self.resolution).then_some((c, r))
    }

    fn same_lattice(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// A compact set, either as a raster mask (row-major, row 0 on top) or a
/// finite point cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompactGridSet {
    Raster { grid: GridSpec, mask: Vec<bool> },
    Points(Vec<ComplexPoint>),
}

impl CompactGridSet {
    pub fn from_mask(grid: GridSpec, mask: Vec<bool>) -> Result<Self> {
        grid.validate()?;
        if mask.len() != grid.len() {
            return Err(LabError::InvalidInput(format!(
                "mask has {} entries, grid needs {}",
                mask.len(),
                grid.len()
            )));
        }
        Ok(CompactGridSet::Raster { grid, mask })
    }

    /// Rasterizes a membership predicate at pixel centers, row-parallel.
    pub fn from_predicate<F>(grid: GridSpec, pred: F) -> Result<Self>
    where
        F: Fn(ComplexPoint) -> bool + Sync,
    {
        grid.validate()?;
        let n = grid.resolution;
        let mask: Vec<bool> = (0..n)
            .into_par_iter()
            .flat_map_iter(|row| {
                let pred = &pred;
                (0..n).map(move |col| pred(grid.pixel_center(col, row)))
            })
            .collect();
        Ok(CompactGridSet::Raster { grid, mask })
    }

    pub fn from_points(points: Vec<ComplexPoint>) -> Result<Self> {
        if points.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(LabError::InvalidInput("point cloud contains non-finite coordinates".into()));
        }
        Ok(CompactGridSet::Points(points))
    }

    pub fn disk(grid: GridSpec, center: ComplexPoint, radius: f64) -> Result<Self> {
        Self::from_predicate(grid, |z| (z - center).norm() <= radius)
    }

    pub fn annulus(grid: GridSpec, center: ComplexPoint, inner: f64, outer: f64) -> Result<Self> {
        Self::from_predicate(grid, |z| {
            let r = (z - center).norm();
            r >= inner && r <= outer
        })
    }

    pub fn is_raster(&self) -> bool {
        matches!(self, CompactGridSet::Raster { .. })
    }

    pub fn grid(&self) -> Option<&GridSpec> {
        match self {
            CompactGridSet::Raster { grid, .. } => Some(grid),
            CompactGridSet::Points(_) => None,
        }
    }

    pub fn mask(&self) -> Option<&[bool]> {
        match self {
            CompactGridSet::Raster { mask, .. } => Some(mask),
            CompactGridSet::Points(_) => None,
        }
    }

    /// Number of marked pixels or stored points.
    pub fn count(&self) -> usize {
        match self {
            CompactGridSet::Raster { mask, .. } => mask.iter().filter(|&&b| b).count(),
            CompactGridSet::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Pixel centers of marked pixels, or the points themselves.
    pub fn points(&self) -> Vec<ComplexPoint> {
        match self {
            CompactGridSet::Raster { grid, mask } => mask
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| grid.index_center(i))
                .collect(),
            CompactGridSet::Points(p) => p.clone(),
        }
    }

    /// Marked pixels with an unmarked 8-neighbour or touching the frame.
    pub fn boundary_points(&self) -> Vec<ComplexPoint> {
        match self {
            CompactGridSet::Points(p) => p.clone(),
            CompactGridSet::Raster { grid, mask } => {
                let n = grid.resolution as isize;
                let at = |c: isize, r: isize| c >= 0 && r >= 0 && c < n && r < n && mask[(r * n + c) as usize];
                let mut out = Vec::new();
                for r in 0..n {
                    for c in 0..n {
                        if !mask[(r * n + c) as usize] {
                            continue;
                        }
                        let edge = (-1..=1).any(|dr| (-1..=1).any(|dc| !at(c + dc, r + dr)));
                        if edge {
                            out.push(grid.pixel_center(c as usize, r as usize));
                        }
                    }
                }
                out
            }
        }
    }

    /// Whether `z` falls in a marked pixel (rasters) or equals a point (clouds).
    pub fn contains(&self, z: ComplexPoint) -> bool {
        match self {
            CompactGridSet::Raster { grid, mask } => grid
                .pixel_of(z)
                .map(|(c, r)| mask[r * grid.resolution + c])
                .unwrap_or(false),
            CompactGridSet::Points(p) => p.contains(&z),
        }
    }

    /// Largest distance between two stored points, or marked pixel centers.
    pub fn diameter(&self) -> f64 {
        let pts = self.boundary_points();
        let mut d: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    pub fn union(&self, other: &CompactGridSet) -> Result<CompactGridSet> {
        match (self, other) {
            (CompactGridSet::Raster { grid: g1, mask: m1 }, CompactGridSet::Raster { grid: g2, mask: m2 }) => {
                if !g1.same_lattice(g2) {
                    return Err(LabError::InvalidInput("raster union needs identical grids".into()));
                }
                let mask = m1.iter().zip(m2).map(|(a, b)| *a || *b).collect();
                Ok(CompactGridSet::Raster { grid: *g1, mask })
            }
            (CompactGridSet::Points(a), CompactGridSet::Points(b)) => {
                let mut p = a.clone();
                p.extend(b.iter().filter(|x| !a.contains(x)));
                Ok(CompactGridSet::Points(p))
            }
            _ => Err(LabError::UnsupportedRepresentation("mixed")),
        }
    }
}

/// Hausdorff distance between two nonempty sets of the same representation.
///
/// Point clouds are compared exactly. Rasters over one grid use a squared
/// Euclidean distance transform, so the cost is linear in the pixel count;
/// rasters over different grids fall back to comparing pixel centers.
pub fn hausdorff_distance(a: &CompactGridSet, b: &CompactGridSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(LabError::EmptySet);
    }
    match (a, b) {
        (CompactGridSet::Points(pa), CompactGridSet::Points(pb)) => {
            Ok(directed_points(pa, pb).max(directed_points(pb, pa)))
        }
        (CompactGridSet::Raster { grid: ga, mask: ma }, CompactGridSet::Raster { grid: gb, mask: mb }) => {
            if ga.same_lattice(gb) {
                let n = ga.resolution;
                let da = squared_edt(ma, n);
                let db = squared_edt(mb, n);
                let dir = |m: &[bool], d: &[f64]| {
                    m.iter()
                        .zip(d)
                        .filter(|(&x, _)| x)
                        .map(|(_, &v)| v)
                        .fold(0.0f64, f64::max)
                };
                let sq = dir(ma, &db).max(dir(mb, &da));
                Ok(sq.sqrt() * ga.pixel_size())
            } else {
                let pa = a.points();
                let pb = b.points();
                Ok(directed_points(&pa, &pb).max(directed_points(&pb, &pa)))
            }
        }
        _ => Err(LabError::UnsupportedRepresentation("mixed")),
    }
}

/// sup over `a` of the distance to `b`, with early exit once a point of `b`
/// closer than the running maximum is found.
fn directed_points(a: &[ComplexPoint], b: &[ComplexPoint]) -> f64 {
    let mut cmax = 0.0f64;
    for x in a {
        let mut cmin = f64::INFINITY;
        for y in b {
            let d = (x - y).norm_sqr();
            if d < cmin {
                cmin = d;
                if cmin <= cmax {
                    break;
                }
            }
        }
        cmax = cmax.max(cmin);
    }
    cmax.sqrt()
}

/// Squared Euclidean distance (in pixels) from each pixel center to the
/// nearest marked pixel center. Felzenszwalb-Huttenlocher, separable.
pub(crate) fn squared_edt(mask: &[bool], n: usize) -> Vec<f64> {
    const INF: f64 = 1e20;
    let mut grid: Vec<f64> = mask.iter().map(|&b| if b { 0.0 } else { INF }).collect();
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    // columns
    for c in 0..n {
        for r in 0..n {
            f[r] = grid[r * n + c];
        }
        edt_1d(&f, &mut d, &mut v, &mut z);
        for r in 0..n {
            grid[r * n + c] = d[r];
        }
    }
    // rows
    for r in 0..n {
        f.copy_from_slice(&grid[r * n..(r + 1) * n]);
        edt_1d(&f, &mut d, &mut v, &mut z);
        grid[r * n..(r + 1) * n].copy_from_slice(&d);
    }
    grid
}

fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            // z[0] is -inf, so this never underflows k
            if s <= z[k] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
    }
}

/// Labels the holes of a mask. Returns per-pixel hole ids (0 = set pixel or
/// unbounded complement, 1..=h otherwise) and the hole count.
pub(crate) fn label_holes(mask: &[bool], n: usize) -> (Vec<u32>, usize) {
    // padded lattice of side n+2; the frame is always complement
    let m = n + 2;
    let inside = |pr: usize, pc: usize| pr >= 1 && pc >= 1 && pr <= n && pc <= n && mask[(pr - 1) * n + (pc - 1)];
    let mut label = vec![u32::MAX; m * m]; // MAX = unvisited
    let mut stack = Vec::new();
    let fill = |start: usize, id: u32, label: &mut Vec<u32>, stack: &mut Vec<usize>| {
        label[start] = id;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (r, c) = (p / m, p % m);
            let nbrs = [
                (r > 0).then(|| p - m),
                (r + 1 < m).then(|| p + m),
                (c > 0).then(|| p - 1),
                (c + 1 < m).then(|| p + 1),
            ];
            for q in nbrs.into_iter().flatten() {
                if label[q] == u32::MAX && !inside(q / m, q % m) {
                    label[q] = id;
                    stack.push(q);
                }
            }
        }
    };
    fill(0, 0, &mut label, &mut stack);
    let mut holes = 0u32;
    for p in 0..m * m {
        if label[p] == u32::MAX && !inside(p / m, p % m) {
            holes += 1;
            fill(p, holes, &mut label, &mut stack);
        }
    }
    let mut out = vec![0u32; n * n];
    for r in 0..n {
        for c in 0..n {
            let l = label[(r + 1) * m + c + 1];
            out[r * n + c] = if l == u32::MAX { 0 } else { l };
        }
    }
    (out, holes as usize)
}

/// Number of bounded complementary components of a raster set.
pub fn count_holes(k: &CompactGridSet) -> Result<usize> {
    match k {
        CompactGridSet::Raster { grid, mask } => Ok(label_holes(mask, grid.resolution).1),
        CompactGridSet::Points(_) => Err(LabError::UnsupportedRepresentation("point-cloud")),
    }
}

/// K united with each of its holes that contains none of the excluded points.
/// Excluded points off the grid are ignored.
pub fn relative_hull(k: &CompactGridSet, omega_excluded: &[ComplexPoint]) -> Result<CompactGridSet> {
    let (grid, mask) = match k {
        CompactGridSet::Raster { grid, mask } => (grid, mask),
        CompactGridSet::Points(_) => return Err(LabError::UnsupportedRepresentation("point-cloud")),
    };
    let n = grid.resolution;
    let (labels, holes) = label_holes(mask, n);
    let mut keep_open = vec![false; holes + 1];
    for &z in omega_excluded {
        if let Some((c, r)) = grid.pixel_of(z) {
            keep_open[labels[r * n + c] as usize] = true;
        }
    }
    let out = mask
        .iter()
        .zip(&labels)
        .map(|(&inside, &l)| inside || (l > 0 && !keep_open[l as usize]))
        .collect();
    Ok(CompactGridSet::Raster { grid: *grid, mask: out })
}
