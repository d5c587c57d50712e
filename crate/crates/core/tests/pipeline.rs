//! Cross-module runs: chart, invariant domain and fibers on one map.

use num_complex::Complex64;
use universality_lab::conjugacy::{koenigs_phi, ChartOptions, ConjugacyChart};
use universality_lab::geometry::{count_holes, relative_hull};
use universality_lab::omega_analysis::{collision_pairs, phi_fiber_check};
use universality_lab::spiral_domain::{in_g0, render_g0_full, SpiralCut};
use universality_lab::symbol_dynamics::{basin_raster, find_fixed_point, HolomorphicMap};
use universality_lab::GridSpec;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn blaschke() -> (HolomorphicMap, ConjugacyChart) {
    let f = HolomorphicMap::blaschke(c(0.6, 0.0)).unwrap();
    let z0 = find_fixed_point(&f, c(0.1, 0.0)).unwrap();
    let chart = ConjugacyChart::from_fixed_point(&f, z0, &ChartOptions::default()).unwrap();
    (f, chart)
}

#[test]
fn g0_points_map_into_g0() {
    let (f, chart) = blaschke();
    let s = SpiralCut::for_chart(&chart, None).unwrap();
    let grid = GridSpec::new(c(0.0, 0.0), 1.0, 96).unwrap();
    let clearance = 1e-3;
    let mut checked = 0;
    for idx in 0..grid.len() {
        let z = grid.index_center(idx);
        if in_g0(&chart, &s, z, 2000, clearance) {
            checked += 1;
            let fz = f.eval(z).unwrap();
            assert!(in_g0(&chart, &s, fz, 2000, 0.0), "{z} in G0 but f(z) = {fz} is not");
        }
    }
    assert!(checked > grid.len() / 4, "{checked}");
}

#[test]
fn g0_complement_is_a_small_part_of_the_basin() {
    let (f, chart) = blaschke();
    let s = SpiralCut::for_chart(&chart, None).unwrap();
    let grid = GridSpec::new(c(0.0, 0.0), 1.0, 128).unwrap();
    let r = render_g0_full(&chart, &s, grid, 2000, grid.pixel_size()).unwrap();
    assert!(r.complement_fraction() < 0.1, "{}", r.complement_fraction());

    // every G0 pixel lies in the basin raster
    let basin = basin_raster(&f, chart.z0(), grid, 2000, 0.05).unwrap();
    let g0 = r.g0.mask().unwrap();
    let b = basin.mask().unwrap();
    assert!(g0.iter().zip(b).all(|(&g, &b)| !g || b));
}

#[test]
fn basin_of_z_squared_has_no_holes() {
    let f = HolomorphicMap::real_polynomial(&[0.0, 0.0, 1.0]);
    let grid = GridSpec::new(c(0.0, 0.0), 1.5, 64).unwrap();
    let basin = basin_raster(&f, c(0.0, 0.0), grid, 200, 1e-3).unwrap();
    assert_eq!(count_holes(&basin).unwrap(), 0);
    assert_eq!(relative_hull(&basin, &[]).unwrap(), basin);
}

#[test]
fn functions_of_phi_pass_the_fiber_check_and_iterates_do_not() {
    let (f, chart) = blaschke();
    // points sharing Φ: the preimages of one point under f²
    let w = c(0.05, 0.02);
    let pre = collision_pairs(&f, w, 2).unwrap();
    let near: Vec<_> = pre.into_iter().filter(|z| koenigs_phi(&chart, *z).is_ok()).collect();
    assert!(near.len() >= 2, "{near:?}");
    let phi: Vec<_> = near.iter().map(|z| koenigs_phi(&chart, *z).unwrap()).collect();
    for p in &phi[1..] {
        assert!((p - phi[0]).norm() < 1e-8 * (1.0 + phi[0].norm()));
    }

    let h: Vec<_> = phi.iter().map(|p| p * p + 1.0).collect();
    let ok = phi_fiber_check(&chart, &near, &h, 1e-6, 1e-6).unwrap();
    assert!(ok.pairs_checked >= 1);
    assert!(ok.violations.is_empty());

    let bad = phi_fiber_check(&chart, &near, &near, 1e-6, 1e-6).unwrap();
    assert!(!bad.violations.is_empty());
}
