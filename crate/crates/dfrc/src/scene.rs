//! Radar-side model: ULA steering vectors, the transmit beampattern, angular
//! region quadrature, the integrated sidelobe-to-mainlobe ratio, and the
//! radar-only reference beamformer.
//!
//! All quadratic forms over the big Kronecker-structured region matrices are
//! evaluated through their `n_tx x n_tx` blocks; the `I_{N_s} (x) A` matrices
//! are never materialized.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::numerics::{self, CMat, CVec};

/// Array, RF-chain, stream, and channel-cluster dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemConfig {
    /// Transmit antennas (N_t).
    pub n_tx: usize,
    /// Receive antennas at the downlink user (N_r).
    pub n_rx: usize,
    /// RF chains at the transmitter (N_RF).
    pub n_rf: usize,
    /// Data streams (N_s).
    pub n_streams: usize,
    /// Scattering clusters (N_cl).
    pub n_clusters: usize,
    /// Rays per cluster (N_ray).
    pub n_rays: usize,
}

impl SystemConfig {
    pub fn new(
        n_tx: usize,
        n_rx: usize,
        n_rf: usize,
        n_streams: usize,
        n_clusters: usize,
        n_rays: usize,
    ) -> Result<Self> {
        let cfg = SystemConfig {
            n_tx,
            n_rx,
            n_rf,
            n_streams,
            n_clusters,
            n_rays,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The simulation default: N_t=32, N_r=6, N_RF=16, N_s=6, N_cl=10, N_ray=5.
    pub fn desk_default() -> Self {
        SystemConfig {
            n_tx: 32,
            n_rx: 6,
            n_rf: 16,
            n_streams: 6,
            n_clusters: 10,
            n_rays: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.n_tx,
            self.n_rx,
            self.n_rf,
            self.n_streams,
            self.n_clusters,
            self.n_rays,
        ];
        if positive.contains(&0) {
            return Err(Error::Config("all dimensions must be at least 1".into()));
        }
        if !(self.n_streams <= self.n_rf && self.n_rf <= self.n_tx) {
            return Err(Error::Config(format!(
                "need n_streams <= n_rf <= n_tx, got {} <= {} <= {}",
                self.n_streams, self.n_rf, self.n_tx
            )));
        }
        Ok(())
    }

    /// Antennas per RF chain in the partially-connected layout.
    ///
    /// Errors unless `n_rf` divides `n_tx`.
    pub fn block_size(&self) -> Result<usize> {
        if !self.n_tx.is_multiple_of(self.n_rf) {
            return Err(Error::Config(format!(
                "partially-connected layout needs n_rf | n_tx, got n_tx={}, n_rf={}",
                self.n_tx, self.n_rf
            )));
        }
        Ok(self.n_tx / self.n_rf)
    }
}

/// Transmit/receive array response of a half-wavelength ULA:
/// entry k is `(1/sqrt(n)) exp(j pi k sin(theta))`.
pub fn steering(theta: f64, n: usize) -> CVec {
    let scale = 1.0 / (n as f64).sqrt();
    let s = theta.sin();
    CVec::from_fn(n, |k, _| {
        let phase = PI * (k as f64) * s;
        Complex64::from_polar(scale, phase)
    })
}

/// Transmit beampattern `P(theta) = ||F^H a_t(theta)||^2 / N_s` (linear power).
pub fn beampattern(f: &CMat, theta: f64) -> f64 {
    let a = steering(theta, f.nrows());
    let projected = f.adjoint() * &a;
    projected.norm_squared() / f.ncols() as f64
}

/// A union of disjoint angle intervals inside the ULA visible region
/// `[-pi/2, pi/2]`, together with the quadrature step used to integrate
/// over it.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularRegion {
    intervals: Vec<(f64, f64)>,
    grid_step: f64,
}

impl AngularRegion {
    pub fn new(mut intervals: Vec<(f64, f64)>, grid_step: f64) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidRegion("no intervals".into()));
        }
        if !(grid_step > 0.0) || !grid_step.is_finite() {
            return Err(Error::InvalidRegion(format!("grid_step {grid_step} must be positive")));
        }
        const EDGE: f64 = FRAC_PI_2 + 1e-12;
        for &(lo, hi) in &intervals {
            if !(lo < hi) {
                return Err(Error::InvalidRegion(format!("interval [{lo}, {hi}] is empty")));
            }
            if lo < -EDGE || hi > EDGE {
                return Err(Error::InvalidRegion(format!(
                    "interval [{lo}, {hi}] leaves the visible region [-pi/2, pi/2]"
                )));
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in intervals.windows(2) {
            if pair[0].1 > pair[1].0 {
                return Err(Error::InvalidRegion(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1
                )));
            }
        }
        Ok(AngularRegion { intervals, grid_step })
    }

    pub fn from_degrees(intervals_deg: &[(f64, f64)], grid_step_deg: f64) -> Result<Self> {
        let intervals = intervals_deg
            .iter()
            .map(|&(lo, hi)| (lo.to_radians(), hi.to_radians()))
            .collect();
        AngularRegion::new(intervals, grid_step_deg.to_radians())
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    /// Total angular measure in radians.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|&(lo, hi)| hi - lo).sum()
    }

    /// The same region with a different quadrature step.
    pub fn with_grid_step(&self, grid_step: f64) -> Result<Self> {
        AngularRegion::new(self.intervals.clone(), grid_step)
    }
}

/// Quadrature of `a_t(theta) a_t(theta)^H` over a region, by the composite
/// midpoint rule at the region's grid step. Hermitian PSD by construction.
pub fn region_integral(region: &AngularRegion, n_tx: usize) -> Result<CMat> {
    if n_tx == 0 {
        return Err(Error::Config("n_tx must be at least 1".into()));
    }
    let mut acc = CMat::zeros(n_tx, n_tx);
    for &(lo, hi) in region.intervals() {
        let cells = ((hi - lo) / region.grid_step()).ceil().max(1.0) as usize;
        let h = (hi - lo) / cells as f64;
        for k in 0..cells {
            let theta = lo + (k as f64 + 0.5) * h;
            let a = steering(theta, n_tx);
            // rank-one midpoint contribution h * a a^H
            acc.gerc(Complex64::new(h, 0.0), &a, &a, Complex64::new(1.0, 0.0));
        }
    }
    Ok(numerics::symmetrize(&acc))
}

/// Mainlobe/sidelobe regions with their cached quadrature blocks.
#[derive(Debug, Clone)]
pub struct RadarScene {
    mainlobe: AngularRegion,
    sidelobe: AngularRegion,
    block_m: CMat,
    block_s: CMat,
}

/// Geometry knobs for building a scene from target directions.
#[derive(Debug, Clone, Copy)]
pub struct SceneGeometry {
    /// Half-width of each mainlobe interval, radians.
    pub mainlobe_halfwidth: f64,
    /// Guard band excluded from the sidelobe on each side of a mainlobe, radians.
    pub guard: f64,
    /// Quadrature step, radians.
    pub grid_step: f64,
}

impl Default for SceneGeometry {
    fn default() -> Self {
        SceneGeometry {
            mainlobe_halfwidth: 5f64.to_radians(),
            guard: 2f64.to_radians(),
            grid_step: 0.5f64.to_radians(),
        }
    }
}

impl RadarScene {
    pub fn new(mainlobe: AngularRegion, sidelobe: AngularRegion, n_tx: usize) -> Result<Self> {
        let block_m = region_integral(&mainlobe, n_tx)?;
        let block_s = region_integral(&sidelobe, n_tx)?;
        Ok(RadarScene {
            mainlobe,
            sidelobe,
            block_m,
            block_s,
        })
    }

    /// Builds a scene around target angles: mainlobes are `target +- halfwidth`
    /// (merged if they overlap), the sidelobe is the rest of the visible region
    /// minus a guard band on each side of every mainlobe interval.
    pub fn from_targets(targets: &[f64], geometry: SceneGeometry, n_tx: usize) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidRegion("no target angles".into()));
        }
        let SceneGeometry {
            mainlobe_halfwidth,
            guard,
            grid_step,
        } = geometry;
        if !(mainlobe_halfwidth > 0.0) || guard < 0.0 {
            return Err(Error::InvalidRegion(
                "mainlobe half-width must be positive and guard nonnegative".into(),
            ));
        }
        let clip = |x: f64| x.clamp(-FRAC_PI_2, FRAC_PI_2);
        let mut main: Vec<(f64, f64)> = targets
            .iter()
            .map(|&t| (clip(t - mainlobe_halfwidth), clip(t + mainlobe_halfwidth)))
            .collect();
        main.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mainlobe_intervals = merge_intervals(&main);

        let guarded: Vec<(f64, f64)> = mainlobe_intervals
            .iter()
            .map(|&(lo, hi)| (clip(lo - guard), clip(hi + guard)))
            .collect();
        let guarded = merge_intervals(&guarded);
        let side_intervals = complement(&guarded);
        if side_intervals.is_empty() {
            return Err(Error::InvalidRegion(
                "mainlobes plus guards cover the whole visible region".into(),
            ));
        }

        let mainlobe = AngularRegion::new(mainlobe_intervals, grid_step)?;
        let sidelobe = AngularRegion::new(side_intervals, grid_step)?;
        RadarScene::new(mainlobe, sidelobe, n_tx)
    }

    pub fn mainlobe(&self) -> &AngularRegion {
        &self.mainlobe
    }

    pub fn sidelobe(&self) -> &AngularRegion {
        &self.sidelobe
    }

    /// Mainlobe quadrature block `A_m` (n_tx x n_tx).
    pub fn block_m(&self) -> &CMat {
        &self.block_m
    }

    /// Sidelobe quadrature block `A_s` (n_tx x n_tx).
    pub fn block_s(&self) -> &CMat {
        &self.block_s
    }

    pub fn n_tx(&self) -> usize {
        self.block_m.nrows()
    }

    /// Default diagonal loading applied to `A_s` before inversion:
    /// `1e-8 tr(A_s) / n_tx`. Narrow sidelobe regions leave `A_s` near-singular.
    pub fn default_loading(&self) -> f64 {
        1e-8 * self.block_s.trace().re / self.n_tx() as f64
    }
}

fn merge_intervals(sorted: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
    for &(lo, hi) in sorted {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

fn complement(sorted_disjoint: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut cursor = -FRAC_PI_2;
    for &(lo, hi) in sorted_disjoint {
        if lo > cursor {
            out.push((cursor, lo));
        }
        cursor = cursor.max(hi);
    }
    if cursor < FRAC_PI_2 {
        out.push((cursor, FRAC_PI_2));
    }
    out.retain(|&(lo, hi)| hi - lo > 1e-12);
    out
}

/// Integrated sidelobe-to-mainlobe ratio
/// `tr(F^H A_s F) / tr(F^H A_m F)` (linear scale).
pub fn ismr(f: &CMat, scene: &RadarScene) -> Result<f64> {
    if f.nrows() != scene.n_tx() {
        return Err(Error::DimensionMismatch {
            context: format!("ismr: F has {} rows, scene expects {}", f.nrows(), scene.n_tx()),
        });
    }
    let num = (f.adjoint() * scene.block_s() * f).trace().re;
    let den = (f.adjoint() * scene.block_m() * f).trace().re;
    if den <= (num + den).abs() * 1e-15 {
        return Err(Error::ZeroMainlobePower { power: den });
    }
    Ok(num / den)
}

/// Radar-only reference beamformer `F_Rad` (n_tx x n_streams).
///
/// Takes the principal generalized eigenvector `v` of `(A_m, A_s + loading I)`
/// and expands it into the deterministic rank-one choice `F_Rad = v u^T` with
/// uniform `u`, rescaled so `||F_Rad||_F^2 = N_s` exactly. The eigenvector
/// phase is pinned by making its largest-magnitude entry real positive.
pub fn radar_reference(scene: &RadarScene, cfg: &SystemConfig, loading: f64) -> Result<CMat> {
    if loading < 0.0 {
        return Err(Error::Config(format!("loading {loading} must be nonnegative")));
    }
    let n = scene.n_tx();
    if cfg.n_tx != n {
        return Err(Error::DimensionMismatch {
            context: format!("radar_reference: scene has n_tx={n}, config has {}", cfg.n_tx),
        });
    }
    let loaded = scene.block_s() + CMat::identity(n, n).scale(loading);
    let (_, mut v) = numerics::generalized_eig_principal(scene.block_m(), &loaded)?;

    let mut best = 0usize;
    for k in 1..n {
        if v[k].norm() > v[best].norm() {
            best = k;
        }
    }
    let phase = v[best].arg();
    v *= Complex64::from_polar(1.0, -phase);

    let n_s = cfg.n_streams;
    let mut f = CMat::from_fn(n, n_s, |r, _| v[r] / Complex64::new((n_s as f64).sqrt(), 0.0));
    let norm = numerics::frob(&f);
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    f *= Complex64::new((n_s as f64).sqrt() / norm, 0.0);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::frob;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steering_broadside_and_endfire() {
        let a = steering(0.0, 4);
        for k in 0..4 {
            assert!((a[k] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let b = steering(FRAC_PI_2, 2);
        let isq = 1.0 / 2f64.sqrt();
        assert!((b[0] - Complex64::new(isq, 0.0)).norm() < 1e-15);
        assert!((b[1] - Complex64::new(-isq, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn steering_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            use rand::Rng;
            let theta: f64 = rng.gen_range(-2.0..2.0);
            let n = rng.gen_range(1..40);
            assert!((steering(theta, n).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn beampattern_identity_and_matched() {
        let eye = CMat::identity(2, 2);
        for theta in [-1.2, 0.0, 0.7] {
            assert!((beampattern(&eye, theta) - 0.5).abs() < 1e-12);
        }
        let matched = CMat::from_column_slice(2, 1, steering(FRAC_PI_2, 2).as_slice());
        assert!(beampattern(&matched, 0.0).abs() < 1e-12);
        assert!((beampattern(&matched, FRAC_PI_2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beampattern_scales_quadratically() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = crate::numerics::test_support::random_cmat(6, 2, &mut rng);
        let scaled = f.scale(3.0);
        for theta in [-0.4, 0.1, 1.0] {
            let base = beampattern(&f, theta);
            assert!((beampattern(&scaled, theta) - 9.0 * base).abs() < 1e-10 * base.max(1.0));
        }
    }

    #[test]
    fn region_integral_full_domain_diagonal() {
        let region = AngularRegion::new(vec![(-FRAC_PI_2, FRAC_PI_2)], 0.01).unwrap();
        let a = region_integral(&region, 4).unwrap();
        for k in 0..4 {
            assert!((a[(k, k)].re - PI / 4.0).abs() < 1e-12);
            assert!(a[(k, k)].im.abs() < 1e-15);
        }
    }

    #[test]
    fn region_integral_additive_over_disjoint_intervals() {
        let step = 0.002;
        let left = AngularRegion::new(vec![(-1.0, -0.4)], step).unwrap();
        let right = AngularRegion::new(vec![(0.2, 0.9)], step).unwrap();
        let both = AngularRegion::new(vec![(-1.0, -0.4), (0.2, 0.9)], step).unwrap();
        let sum = region_integral(&left, 5).unwrap() + region_integral(&right, 5).unwrap();
        let joint = region_integral(&both, 5).unwrap();
        assert!(frob(&(joint - sum)) < 1e-12);
    }

    #[test]
    fn region_integral_hermitian_psd() {
        let region = AngularRegion::new(vec![(-0.9, -0.1), (0.3, 1.2)], 0.01).unwrap();
        let a = region_integral(&region, 8).unwrap();
        assert!(frob(&(&a - a.adjoint())) < 1e-12);
        let (values, _) = numerics::hermitian_eig(&a).unwrap();
        assert!(values[0] >= -1e-10);
    }

    #[test]
    fn region_integral_second_order_convergence() {
        // Halving the step shrinks the change to the next halving by >= 4x.
        let interval = vec![(-0.8, 0.35)];
        let coarse = region_integral(&AngularRegion::new(interval.clone(), 0.02).unwrap(), 6).unwrap();
        let mid = region_integral(&AngularRegion::new(interval.clone(), 0.01).unwrap(), 6).unwrap();
        let fine = region_integral(&AngularRegion::new(interval, 0.005).unwrap(), 6).unwrap();
        let change_coarse = frob(&(&mid - &coarse));
        let change_fine = frob(&(&fine - &mid));
        assert!(
            change_fine * 4.0 <= change_coarse * 1.05,
            "expected second-order: {change_coarse:.3e} -> {change_fine:.3e}"
        );
    }

    #[test]
    fn region_rejects_bad_inputs() {
        assert!(AngularRegion::new(vec![], 0.1).is_err());
        assert!(AngularRegion::new(vec![(0.2, 0.1)], 0.1).is_err());
        assert!(AngularRegion::new(vec![(0.0, 2.0)], 0.1).is_err());
        assert!(AngularRegion::new(vec![(-0.5, 0.1), (0.0, 0.4)], 0.1).is_err());
        assert!(AngularRegion::new(vec![(0.0, 0.5)], 0.0).is_err());
    }

    fn test_scene() -> RadarScene {
        RadarScene::from_targets(
            &[-30f64.to_radians(), 30f64.to_radians()],
            SceneGeometry::default(),
            8,
        )
        .unwrap()
    }

    #[test]
    fn scene_regions_have_expected_measures() {
        let scene = test_scene();
        assert!((scene.mainlobe().measure() - 20f64.to_radians()).abs() < 1e-12);
        assert!((scene.sidelobe().measure() - 152f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn scene_diagonal_matches_measure() {
        let scene = test_scene();
        let expected = scene.mainlobe().measure() / 8.0;
        for k in 0..8 {
            assert!((scene.block_m()[(k, k)].re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ismr_of_identity_is_measure_ratio() {
        let mainlobe = AngularRegion::from_degrees(&[(-40.0, -20.0), (20.0, 40.0)], 0.05).unwrap();
        let sidelobe = AngularRegion::from_degrees(&[(-90.0, -45.0), (45.0, 90.0)], 0.05).unwrap();
        let scene = RadarScene::new(mainlobe, sidelobe, 4).unwrap();
        let f = CMat::identity(4, 4);
        let r = ismr(&f, &scene).unwrap();
        let expected = scene.sidelobe().measure() / scene.mainlobe().measure();
        assert!((r - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn ismr_identical_regions_is_one() {
        let region = AngularRegion::from_degrees(&[(-20.0, 20.0)], 0.1).unwrap();
        let scene = RadarScene::new(region.clone(), region, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = crate::numerics::test_support::random_cmat(5, 2, &mut rng);
        assert!((ismr(&f, &scene).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ismr_scale_invariant() {
        let scene = test_scene();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = crate::numerics::test_support::random_cmat(8, 3, &mut rng);
        let base = ismr(&f, &scene).unwrap();
        let scaled = ismr(&f.scale(0.37), &scene).unwrap();
        assert!((base - scaled).abs() < 1e-12 * base);
    }

    #[test]
    fn ismr_rejects_zero_beam() {
        let scene = test_scene();
        let f = CMat::zeros(8, 2);
        assert!(matches!(ismr(&f, &scene), Err(Error::ZeroMainlobePower { .. })));
    }

    #[test]
    fn radar_reference_synthetic_diagonal() {
        // A_m = diag(2, 1), A_s = I: the principal direction is e1.
        let mainlobe = AngularRegion::new(vec![(-0.1, 0.1)], 0.01).unwrap();
        let sidelobe = AngularRegion::new(vec![(0.5, 1.0)], 0.01).unwrap();
        let mut scene = RadarScene::new(mainlobe, sidelobe, 2).unwrap();
        scene.block_m = CMat::from_fn(2, 2, |r, c| {
            Complex64::new(if r == c { 2.0 - r as f64 } else { 0.0 }, 0.0)
        });
        scene.block_s = CMat::identity(2, 2);
        let cfg = SystemConfig::new(2, 1, 1, 1, 1, 1).unwrap();
        let f = radar_reference(&scene, &cfg, 0.0).unwrap();
        assert!((f[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        assert!(f[(1, 0)].norm() < 1e-9);
    }

    #[test]
    fn radar_reference_power_is_exact() {
        let scene = test_scene();
        let cfg = SystemConfig::new(8, 2, 4, 2, 3, 2).unwrap();
        let f = radar_reference(&scene, &cfg, scene.default_loading()).unwrap();
        assert!((frob(&f).powi(2) - 2.0).abs() < 1e-12);
        // every column is the same steering-space direction
        assert!((f.column(0) - f.column(1)).norm() < 1e-12);
    }
}
