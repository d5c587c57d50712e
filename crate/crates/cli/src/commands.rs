//! Flags, resolved parameters and execution for each command.

use std::path::{Path, PathBuf};

use clap::Args;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use universality_lab::conjugacy::{
    abel_phi, boettcher_phi, koenigs_phi, ChartKind, ChartOptions, ConjugacyChart,
};
use universality_lab::geometry::{count_holes, hausdorff_distance, relative_hull};
use universality_lab::io;
use universality_lab::omega_analysis::phi_fiber_check;
use universality_lab::runge_engine::{
    build_universal_schedule, finite_set_universal, fit_rational, Compact, LaurentRational, PoleSpec,
    RungeOptions, ScheduleTarget, TargetFunction, TargetKind,
};
use universality_lab::spiral_domain::{box_dimension, render_g0_full, SpiralCut};
use universality_lab::symbol_dynamics::{
    basin_raster, classify_fixed_point, find_fixed_point, iterate, HolomorphicMap,
};
use universality_lab::{CompactGridSet, GridSpec, LabError};

use crate::config::{resolve, usage, CliError};
use crate::parse::{self, Symbol};

type Out = Result<(), CliError>;
type FileMap = Option<Map<String, Value>>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Writes the run report: the resolved config next to the results.
fn emit<P: Serialize>(path: &Option<PathBuf>, command: &str, config: &P, result: Value) -> Out {
    let report = json!({ "command": command, "config": config, "result": result });
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| LabError::Format(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => io::write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Out {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Format(e.to_string()))?;
    text.push('\n');
    io::write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a PathBuf, CliError> {
    p.as_ref().ok_or_else(|| usage(format!("missing required parameter `{key}`")))
}

fn fixed_point(f: &HolomorphicMap, z0: Option<Complex64>, guess: Complex64) -> Result<Complex64, CliError> {
    Ok(match z0 {
        Some(z) => z,
        None => find_fixed_point(f, guess)?,
    })
}

/// Clips default box-count scales to the raster resolution.
fn default_scales(res: usize) -> Vec<usize> {
    [8, 16, 32, 64, 128, 256].into_iter().filter(|&s| s <= res).collect()
}

// ---------------------------------------------------------------- classify

#[derive(Args, Serialize, Debug)]
pub struct ClassifyFlags {
    /// Symbol, e.g. blaschke:0.6 or poly:0;0.5;1
    #[arg(long)]
    symbol: Option<String>,
    /// Newton start for the fixed point, as re,im
    #[arg(long, value_parser = parse::complex)]
    guess: Option<Complex64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; stdout if absent
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyParams {
    pub symbol: Symbol,
    pub guess: Complex64,
    pub seed: u64,
    pub report: Option<PathBuf>,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams { symbol: Symbol::blaschke(0.6), guess: zero(), seed: 0, report: None }
    }
}

pub fn classify(file: FileMap, flags: &ClassifyFlags) -> Out {
    let p: ClassifyParams = resolve(file, flags)?;
    let f = p.symbol.map()?;
    let z0 = find_fixed_point(&f, p.guess)?;
    let info = classify_fixed_point(&f, z0)?;
    emit(&p.report, "classify", &p, json!({ "fixed_point": info }))
}

// ---------------------------------------------------------------- basin

#[derive(Args, Serialize, Debug)]
pub struct BasinFlags {
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long, value_parser = parse::complex)]
    guess: Option<Complex64>,
    /// Fixed point; found by Newton from --guess if absent
    #[arg(long, value_parser = parse::complex)]
    z0: Option<Complex64>,
    #[arg(long, value_parser = parse::complex)]
    center: Option<Complex64>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    res: Option<usize>,
    #[arg(long = "nmax")]
    n_max: Option<usize>,
    /// Capture radius around the fixed point
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output PGM
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct BasinParams {
    pub symbol: Symbol,
    pub guess: Complex64,
    pub z0: Option<Complex64>,
    pub center: Complex64,
    pub half_width: f64,
    pub res: usize,
    pub n_max: usize,
    pub eps: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for BasinParams {
    fn default() -> Self {
        BasinParams {
            symbol: Symbol::blaschke(0.6),
            guess: zero(),
            z0: None,
            center: zero(),
            half_width: 1.0,
            res: 512,
            n_max: 200,
            eps: 0.05,
            seed: 0,
            out: None,
            report: None,
        }
    }
}

pub fn basin(file: FileMap, flags: &BasinFlags) -> Out {
    let p: BasinParams = resolve(file, flags)?;
    let out = required(&p.out, "out")?;
    let f = p.symbol.map()?;
    let z0 = fixed_point(&f, p.z0, p.guess)?;
    let grid = GridSpec::new(p.center, p.half_width, p.res)?;
    let set = basin_raster(&f, z0, grid, p.n_max, p.eps)?;
    io::write_pgm(out, &set)?;
    emit(&p.report, "basin", &p, json!({ "z0": z0, "basin_pixels": set.count(), "total_pixels": grid.len() }))
}

// ---------------------------------------------------------------- chart-table

#[derive(Args, Serialize, Debug)]
pub struct ChartTableFlags {
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long, value_parser = parse::complex)]
    guess: Option<Complex64>,
    #[arg(long, value_parser = parse::complex)]
    z0: Option<Complex64>,
    /// Grid center; the fixed point (or the petal center) if absent
    #[arg(long, value_parser = parse::complex)]
    center: Option<Complex64>,
    /// Grid half width; sized to fit the chart disk (or petal) if absent
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    res: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    /// Petal index for neutral fixed points
    #[arg(long)]
    petal: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct ChartTableParams {
    pub symbol: Symbol,
    pub guess: Complex64,
    pub z0: Option<Complex64>,
    pub center: Option<Complex64>,
    pub half_width: Option<f64>,
    pub res: usize,
    pub depth: Option<usize>,
    pub petal: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for ChartTableParams {
    fn default() -> Self {
        ChartTableParams {
            symbol: Symbol::blaschke(0.6),
            guess: zero(),
            z0: None,
            center: None,
            half_width: None,
            res: 64,
            depth: None,
            petal: 1,
            seed: 0,
            out: None,
            report: None,
        }
    }
}

/// (Φ(z), functional-equation residual at z) for the chart's coordinate.
fn chart_row(chart: &ConjugacyChart, z: Complex64) -> Option<(Complex64, f64)> {
    let fz = chart.f.eval_opt(z)?;
    match &chart.kind {
        ChartKind::Koenigs { lambda, .. } => {
            let phi = koenigs_phi(chart, z).ok()?;
            Some((phi, (koenigs_phi(chart, fz).ok()? - lambda * phi).norm()))
        }
        ChartKind::Boettcher { p, .. } => {
            let phi = boettcher_phi(chart, z).ok()?;
            Some((phi, (boettcher_phi(chart, fz).ok()? - phi.powu(*p)).norm()))
        }
        ChartKind::Abel { .. } => {
            let phi = abel_phi(chart, z).ok()?;
            Some((phi, (abel_phi(chart, fz).ok()? - phi - 1.0).norm()))
        }
    }
}

pub fn chart_table(file: FileMap, flags: &ChartTableFlags) -> Out {
    let p: ChartTableParams = resolve(file, flags)?;
    let out = required(&p.out, "out")?;
    let f = p.symbol.map()?;
    let z0 = fixed_point(&f, p.z0, p.guess)?;
    let opts = ChartOptions { depth: p.depth, petal: p.petal, ..Default::default() };
    let chart = ConjugacyChart::from_fixed_point(&f, z0, &opts)?;
    let (c, r) = match &chart.kind {
        ChartKind::Abel { petal, petals, .. } => {
            let pt = petals[petal - 1];
            (pt.center, pt.radius)
        }
        _ => (z0, chart.local_radius),
    };
    // the inscribed square of the chart disk
    let grid = GridSpec::new(p.center.unwrap_or(c), p.half_width.unwrap_or(r / 2f64.sqrt()), p.res)?;
    let rows: Vec<Option<(Complex64, Complex64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let z = grid.index_center(i);
            chart_row(&chart, z).map(|(phi, res)| (z, phi, res))
        })
        .collect();
    let mut csv = String::from("re,im,phi_re,phi_im,residual\n");
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for (z, phi, res) in rows.into_iter().flatten() {
        csv.push_str(&format!("{:?},{:?},{:?},{:?},{:?}\n", z.re, z.im, phi.re, phi.im, res));
        worst = worst.max(res);
        count += 1;
    }
    io::write_atomic(out, csv.as_bytes())?;
    let kind = match chart.kind {
        ChartKind::Koenigs { .. } => "koenigs",
        ChartKind::Boettcher { .. } => "boettcher",
        ChartKind::Abel { .. } => "abel",
    };
    emit(
        &p.report,
        "chart-table",
        &p,
        json!({
            "kind": kind,
            "z0": z0,
            "local_radius": chart.local_radius,
            "depth": chart.depth,
            "grid": grid,
            "rows": count,
            "max_residual": worst,
        }),
    )
}

// ---------------------------------------------------------------- render-g0

#[derive(Args, Serialize, Debug)]
pub struct RenderG0Flags {
    /// Blaschke parameter; ignored if a symbol is configured
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long, value_parser = parse::complex)]
    guess: Option<Complex64>,
    /// Radius of the spiral cut in the chart; half the chart range if absent
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_parser = parse::complex)]
    center: Option<Complex64>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    res: Option<usize>,
    #[arg(long = "nmax")]
    n_max: Option<usize>,
    /// Clearance from the cut, in pixel widths
    #[arg(long)]
    clearance: Option<f64>,
    /// Box-count scales as boxes per side, e.g. 8,16,32
    #[arg(long, value_delimiter = ',')]
    scales: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output PGM of G0
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stats CSV; next to the PGM if absent
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct RenderG0Params {
    pub alpha: f64,
    pub symbol: Option<Symbol>,
    pub guess: Complex64,
    pub delta: Option<f64>,
    pub center: Complex64,
    pub half_width: f64,
    pub res: usize,
    pub n_max: usize,
    pub clearance: f64,
    pub scales: Option<Vec<usize>>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub stats: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for RenderG0Params {
    fn default() -> Self {
        RenderG0Params {
            alpha: 0.6,
            symbol: None,
            guess: zero(),
            delta: None,
            center: zero(),
            half_width: 1.0,
            res: 512,
            n_max: 2000,
            clearance: std::f64::consts::SQRT_2,
            scales: None,
            seed: 0,
            out: None,
            stats: None,
            report: None,
        }
    }
}

pub fn render_g0(file: FileMap, flags: &RenderG0Flags) -> Out {
    let mut p: RenderG0Params = resolve(file, flags)?;
    let out = required(&p.out, "out")?.clone();
    let stats = p.stats.clone().unwrap_or_else(|| out.with_extension("csv"));
    if p.clearance.is_nan() || p.clearance < 0.0 {
        return Err(usage("clearance must be nonnegative"));
    }
    let symbol = p.symbol.get_or_insert_with(|| Symbol::blaschke(p.alpha)).clone();
    let scales = p.scales.get_or_insert_with(|| default_scales(p.res)).clone();
    let f = symbol.map()?;
    let z0 = find_fixed_point(&f, p.guess)?;
    let chart = ConjugacyChart::koenigs(&f, z0, &ChartOptions { basin_budget: p.n_max, ..Default::default() })?;
    let cut = SpiralCut::for_chart(&chart, p.delta)?;
    let grid = GridSpec::new(p.center, p.half_width, p.res)?;
    let r = render_g0_full(&chart, &cut, grid, p.n_max, p.clearance * grid.pixel_size())?;
    // an empty complement has no dimension to report
    let dim = match box_dimension(&r.complement(), &scales) {
        Ok(d) => Some(d),
        Err(LabError::DegenerateFit(_)) => None,
        Err(e) => return Err(e.into()),
    };
    io::write_pgm(&out, &r.g0)?;
    let csv = format!(
        "basin_pixels,complement_pixels,complement_fraction,box_dimension\n{},{},{:?},{}\n",
        r.basin_pixels(),
        r.complement_pixels(),
        r.complement_fraction(),
        dim.map_or("nan".to_string(), |d| format!("{d:?}")),
    );
    io::write_atomic(&stats, csv.as_bytes())?;
    emit(
        &p.report,
        "render-g0",
        &p,
        json!({
            "z0": z0,
            "delta": cut.delta,
            "lambda": cut.lambda,
            "clearance_phi": p.clearance * grid.pixel_size(),
            "basin_pixels": r.basin_pixels(),
            "g0_pixels": r.g0.count(),
            "complement_pixels": r.complement_pixels(),
            "complement_fraction": r.complement_fraction(),
            "box_dimension": dim,
            "stats": stats,
        }),
    )
}

// ---------------------------------------------------------------- runge-fit

#[derive(Args, Serialize, Debug)]
pub struct RungeFitFlags {
    /// Target function: const, identity or poly
    #[arg(long)]
    target: Option<String>,
    /// Target coefficients, ascending, as re,im;re,im
    #[arg(long, value_parser = parse::coeff_list)]
    coeffs: Option<parse::CoeffList>,
    /// disk or circle
    #[arg(long)]
    shape: Option<String>,
    #[arg(long, value_parser = parse::complex)]
    center: Option<Complex64>,
    #[arg(long)]
    radius: Option<f64>,
    /// Boundary samples
    #[arg(long)]
    samples: Option<usize>,
    /// Pole as re,im:order; repeatable
    #[arg(long = "pole", value_parser = parse::pole)]
    poles: Vec<PoleSpec>,
    /// Degree of the polynomial part
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    ridge: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSON with the fitted rational function
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Disk,
    Circle,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct RungeFitParams {
    pub target: TargetKind,
    pub coeffs: Vec<Complex64>,
    pub shape: Shape,
    pub center: Complex64,
    pub radius: f64,
    pub samples: usize,
    pub poles: Vec<PoleSpec>,
    pub degree: usize,
    pub ridge: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for RungeFitParams {
    fn default() -> Self {
        RungeFitParams {
            target: TargetKind::Identity,
            coeffs: vec![],
            shape: Shape::Disk,
            center: zero(),
            radius: 1.0,
            samples: 64,
            poles: vec![],
            degree: 8,
            ridge: 0.0,
            seed: 0,
            out: None,
            report: None,
        }
    }
}

fn compact(shape: Shape, center: Complex64, radius: f64) -> Compact {
    match shape {
        Shape::Disk => Compact::Disk { center, radius },
        Shape::Circle => Compact::Circle { center, radius },
    }
}

pub fn runge_fit(file: FileMap, flags: &RungeFitFlags) -> Out {
    let p: RungeFitParams = resolve(file, flags)?;
    let out = required(&p.out, "out")?;
    let h = TargetFunction { kind: p.target, coeffs: p.coeffs.clone() };
    h.validate()?;
    let l = compact(p.shape, p.center, p.radius);
    l.validate()?;
    let data: Vec<_> = l.samples(p.samples, false).into_iter().map(|z| (z, h.eval(z))).collect();
    let (r, fit_error) = fit_rational(&data, &p.poles, p.degree, p.ridge)?;
    let validation_error = l
        .samples(p.samples, true)
        .into_iter()
        .map(|z| (r.eval(z) - h.eval(z)).norm())
        .fold(0.0f64, f64::max);
    write_json(out, &r)?;
    emit(
        &p.report,
        "runge-fit",
        &p,
        json!({
            "fit_error": fit_error,
            "validation_error": validation_error,
            "basis_len": r.basis_len(),
        }),
    )
}

// ---------------------------------------------------------------- universal-build

#[derive(Args, Serialize, Debug)]
pub struct UniversalBuildFlags {
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long, value_parser = parse::complex)]
    guess: Option<Complex64>,
    /// Puncture of Ω as re,im; repeatable. Defaults to the fixed point.
    #[arg(long = "puncture", value_parser = parse::complex)]
    punctures: Vec<Complex64>,
    /// Interpolation tolerance for the finite mode
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "nmax")]
    n_max: Option<usize>,
    /// Boundary samples per compact, unless a target sets its own
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output schedule JSON
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

/// The compact L of a schedule target.
#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct TargetSet {
    pub center: Complex64,
    pub radius: f64,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default = "disk")]
    pub shape: Shape,
}

fn disk() -> Shape {
    Shape::Disk
}

#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct TargetEntry {
    pub target: TargetKind,
    #[serde(default)]
    pub coeffs: Vec<Complex64>,
    #[serde(rename = "L")]
    pub l: TargetSet,
    pub eps: f64,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct UniversalBuildParams {
    pub symbol: Symbol,
    pub guess: Complex64,
    pub punctures: Option<Vec<Complex64>>,
    pub targets: Vec<TargetEntry>,
    /// Finite mode: the set E and one value vector per target.
    pub points: Vec<Complex64>,
    pub values: Vec<Vec<Complex64>>,
    pub eps: f64,
    pub n_max: usize,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for UniversalBuildParams {
    fn default() -> Self {
        UniversalBuildParams {
            symbol: Symbol::blaschke(0.6),
            guess: zero(),
            punctures: None,
            targets: vec![],
            points: vec![],
            values: vec![],
            eps: 1e-6,
            n_max: 200,
            samples: 64,
            seed: 0,
            out: None,
            report: None,
        }
    }
}

/// Contents of the schedule file written by universal-build.
#[derive(Serialize, Deserialize, Debug)]
pub struct ScheduleFile {
    pub symbol: Symbol,
    pub z0: Complex64,
    pub punctures: Vec<Complex64>,
    pub mode: String,
    pub result_g: LaurentRational,
    pub indices: Vec<usize>,
    pub report: Vec<f64>,
    pub schedule: Value,
    pub config: Value,
}

pub fn universal_build(file: FileMap, flags: &UniversalBuildFlags) -> Out {
    let mut p: UniversalBuildParams = resolve(file, flags)?;
    let out = required(&p.out, "out")?.clone();
    if !p.points.is_empty() && !p.targets.is_empty() {
        return Err(usage("give either targets or points/values, not both"));
    }
    let f = p.symbol.map()?;
    let z0 = find_fixed_point(&f, p.guess)?;
    let punctures = p.punctures.get_or_insert_with(|| vec![z0]).clone();
    let samples = p.targets.iter().filter_map(|t| t.l.samples).fold(p.samples, usize::max);
    let opts = RungeOptions { samples, n_max: p.n_max };
    let config = serde_json::to_value(&p).map_err(|e| LabError::Format(e.to_string()))?;
    let (mode, g, indices, errors, schedule) = if p.points.is_empty() {
        let chart = ConjugacyChart::koenigs(&f, z0, &ChartOptions::default())?;
        let targets: Vec<ScheduleTarget> = p
            .targets
            .iter()
            .map(|t| ScheduleTarget {
                h: TargetFunction { kind: t.target, coeffs: t.coeffs.clone() },
                l: compact(t.l.shape, t.l.center, t.l.radius),
                eps: t.eps,
            })
            .collect();
        let s = build_universal_schedule(&f, &chart, &punctures, &targets, &opts)?;
        let v = serde_json::to_value(&s).map_err(|e| LabError::Format(e.to_string()))?;
        ("schedule", s.result_g, s.indices, s.report, v)
    } else {
        let s = finite_set_universal(&f, &p.points, &punctures, &p.values, p.eps, &opts)?;
        let v = serde_json::to_value(&s).map_err(|e| LabError::Format(e.to_string()))?;
        ("finite", s.result_g, s.indices, s.report, v)
    };
    let sf = ScheduleFile {
        symbol: p.symbol.clone(),
        z0,
        punctures,
        mode: mode.into(),
        result_g: g,
        indices: indices.clone(),
        report: errors.clone(),
        schedule,
        config,
    };
    write_json(&out, &sf)?;
    emit(
        &p.report,
        "universal-build",
        &p,
        json!({
            "mode": mode,
            "z0": z0,
            "indices": indices,
            "errors": errors,
            "basis_len": sf.result_g.basis_len(),
        }),
    )
}

// ---------------------------------------------------------------- omega-check

#[derive(Args, Serialize, Debug)]
pub struct OmegaCheckFlags {
    /// Schedule JSON written by universal-build
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Points CSV with header re,im
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    tol_in: Option<f64>,
    /// Value tolerance; 1e-4 of the sample value range if absent
    #[arg(long)]
    tol_out: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output FiberReport JSON
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaCheckParams {
    pub schedule: Option<PathBuf>,
    pub points: Option<PathBuf>,
    pub tol_in: f64,
    pub tol_out: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for OmegaCheckParams {
    fn default() -> Self {
        OmegaCheckParams { schedule: None, points: None, tol_in: 1e-8, tol_out: None, seed: 0, out: None, report: None }
    }
}

/// Diagonal of the bounding box of the values.
fn value_range(values: &[Complex64]) -> f64 {
    let (mut lo, mut hi) = (Complex64::new(f64::INFINITY, f64::INFINITY), Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for v in values {
        lo = Complex64::new(lo.re.min(v.re), lo.im.min(v.im));
        hi = Complex64::new(hi.re.max(v.re), hi.im.max(v.im));
    }
    if values.is_empty() { 0.0 } else { (hi - lo).norm() }
}

pub fn omega_check(file: FileMap, flags: &OmegaCheckFlags) -> Out {
    let p: OmegaCheckParams = resolve(file, flags)?;
    let sched_path = required(&p.schedule, "schedule")?;
    let points_path = required(&p.points, "points")?;
    let text = std::fs::read_to_string(sched_path).map_err(LabError::from)?;
    let sf: ScheduleFile =
        serde_json::from_str(&text).map_err(|e| LabError::Format(format!("schedule file: {e}")))?;
    let points = io::read_points_csv(points_path)?;
    let f = sf.symbol.map()?;
    let n = *sf.indices.last().ok_or_else(|| LabError::InvalidInput("schedule has no indices".into()))?;
    // h = g∘fⁿ at the last scheduled index
    let values: Vec<Complex64> = points
        .par_iter()
        .map(|&z| {
            let w = iterate(&f, z, n)?.point().ok_or(LabError::Escaped { step: n })?;
            sf.result_g.eval_opt(w).ok_or(LabError::PoleHit { step: n })
        })
        .collect::<universality_lab::Result<_>>()?;
    let tol_out = p.tol_out.unwrap_or(1e-4 * value_range(&values));
    let chart = ConjugacyChart::from_fixed_point(&f, sf.z0, &ChartOptions::default())?;
    let fr = phi_fiber_check(&chart, &points, &values, p.tol_in, tol_out)?;
    if let Some(out) = &p.out {
        write_json(out, &fr)?;
    }
    emit(&p.report, "omega-check", &p, json!({ "index": n, "fiber_report": fr }))
}

// ---------------------------------------------------------------- hull

#[derive(Args, Serialize, Debug)]
pub struct HullFlags {
    /// Input PGM mask
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_parser = parse::complex)]
    center: Option<Complex64>,
    #[arg(long)]
    half_width: Option<f64>,
    /// Excluded point (puncture of Ω) as re,im; repeatable
    #[arg(long = "exclude", value_parser = parse::complex)]
    exclude: Vec<Complex64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output PGM
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct HullParams {
    pub input: Option<PathBuf>,
    pub center: Complex64,
    pub half_width: f64,
    pub exclude: Vec<Complex64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for HullParams {
    fn default() -> Self {
        HullParams { input: None, center: zero(), half_width: 1.0, exclude: vec![], seed: 0, out: None, report: None }
    }
}

pub fn hull(file: FileMap, flags: &HullFlags) -> Out {
    let p: HullParams = resolve(file, flags)?;
    let input = required(&p.input, "input")?;
    let out = required(&p.out, "out")?;
    let k = io::read_pgm(input, p.center, p.half_width)?;
    let h = relative_hull(&k, &p.exclude)?;
    io::write_pgm(out, &h)?;
    emit(
        &p.report,
        "hull",
        &p,
        json!({
            "holes_before": count_holes(&k)?,
            "holes_after": count_holes(&h)?,
            "pixels_before": k.count(),
            "pixels_after": h.count(),
        }),
    )
}

// ---------------------------------------------------------------- hausdorff

#[derive(Args, Serialize, Debug)]
pub struct HausdorffFlags {
    /// First set: .csv point cloud or PGM mask
    #[arg(long)]
    a: Option<PathBuf>,
    /// Second set, same representation as the first
    #[arg(long)]
    b: Option<PathBuf>,
    /// Raster geometry for PGM inputs
    #[arg(long, value_parser = parse::complex)]
    center: Option<Complex64>,
    #[arg(long)]
    half_width: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(default, deny_unknown_fields)]
pub struct HausdorffParams {
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub center: Complex64,
    pub half_width: f64,
    pub seed: u64,
    pub report: Option<PathBuf>,
}

impl Default for HausdorffParams {
    fn default() -> Self {
        HausdorffParams { a: None, b: None, center: zero(), half_width: 1.0, seed: 0, report: None }
    }
}

fn read_set(path: &Path, center: Complex64, half_width: f64) -> Result<CompactGridSet, CliError> {
    let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(if csv {
        CompactGridSet::from_points(io::read_points_csv(path)?)?
    } else {
        io::read_pgm(path, center, half_width)?
    })
}

pub fn hausdorff(file: FileMap, flags: &HausdorffFlags) -> Out {
    let p: HausdorffParams = resolve(file, flags)?;
    let a = read_set(required(&p.a, "a")?, p.center, p.half_width)?;
    let b = read_set(required(&p.b, "b")?, p.center, p.half_width)?;
    let d = hausdorff_distance(&a, &b)?;
    emit(&p.report, "hausdorff", &p, json!({ "distance": d }))
}

// ---------------------------------------------------------------- boxdim

#[derive(Args, Serialize, Debug)]
pub struct BoxdimFlags {
    /// Input PGM mask
    #[arg(long)]
    input: Option<PathBuf>,
    /// Scales as boxes per side, e.g. 8,16,32
    #[arg(long, value_delimiter = ',')]
    scales: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Serialize, Deserialize, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BoxdimParams {
    pub input: Option<PathBuf>,
    pub scales: Option<Vec<usize>>,
    pub seed: u64,
    pub report: Option<PathBuf>,
}

pub fn boxdim(file: FileMap, flags: &BoxdimFlags) -> Out {
    let mut p: BoxdimParams = resolve(file, flags)?;
    let input = required(&p.input, "input")?.clone();
    // geometry does not affect box counts
    let k = io::read_pgm(&input, zero(), 1.0)?;
    let res = k.grid().map_or(0, |g| g.resolution);
    let scales = p.scales.get_or_insert_with(|| default_scales(res)).clone();
    let d = box_dimension(&k, &scales)?;
    emit(&p.report, "boxdim", &p, json!({ "dimension": d, "pixels": k.count(), "resolution": res }))
}
