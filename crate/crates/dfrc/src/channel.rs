//! Communication-side model: clustered mmWave channel sampling, the
//! zero-forcing reference precoder, and spectral-efficiency evaluation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::numerics::{self, CMat};
use crate::scene::{steering, SystemConfig};

/// Deterministic, portable generator; every random draw in the crate flows
/// through one of these.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One sampled clustered channel with the path parameters that generated it.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// Channel matrix, `n_rx x n_tx`.
    pub h: CMat,
    /// Per-path complex gains, cluster-major.
    pub gains: Vec<Complex64>,
    /// Per-path angles of departure, radians.
    pub aod: Vec<f64>,
    /// Per-path angles of arrival, radians.
    pub aoa: Vec<f64>,
    /// Seed that produced this realization.
    pub seed: u64,
}

/// SNR definition used throughout: `snr_db = 10 log10(rho / sigma_n^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub snr_db: f64,
}

impl LinkBudget {
    pub fn new(snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::Config(format!("snr_db {snr_db} must be finite")));
        }
        Ok(LinkBudget { snr_db })
    }

    /// Linear `rho / sigma_n^2`.
    pub fn linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }
}

/// Samples the clustered channel
/// `H = sqrt(N_t N_r / (N_cl N_ray)) sum_il alpha_il a_r(aoa_il) a_t(aod_il)^H`
/// with i.i.d. circular complex Gaussian gains and angles uniform on
/// `[0, 2pi)`. Per path the draw order is gain re, gain im, aod, aoa.
pub fn sample_channel(cfg: &SystemConfig, seed: u64) -> ChannelRealization {
    let mut rng = seeded_rng(seed);
    let paths = cfg.n_clusters * cfg.n_rays;
    let mut gains = Vec::with_capacity(paths);
    let mut aod = Vec::with_capacity(paths);
    let mut aoa = Vec::with_capacity(paths);
    let half = 1.0 / 2f64.sqrt();
    for _ in 0..paths {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        gains.push(Complex64::new(re * half, im * half));
        aod.push(rng.gen::<f64>() * TAU);
        aoa.push(rng.gen::<f64>() * TAU);
    }
    let h = assemble_channel(cfg, &gains, &aod, &aoa);
    ChannelRealization {
        h,
        gains,
        aod,
        aoa,
        seed,
    }
}

/// Builds `H` from explicit path parameters (used by tests to inject
/// closed-form cases).
pub fn assemble_channel(
    cfg: &SystemConfig,
    gains: &[Complex64],
    aod: &[f64],
    aoa: &[f64],
) -> CMat {
    let scale = ((cfg.n_tx * cfg.n_rx) as f64 / gains.len() as f64).sqrt();
    let mut h = CMat::zeros(cfg.n_rx, cfg.n_tx);
    for ((&alpha, &phi_t), &phi_r) in gains.iter().zip(aod).zip(aoa) {
        let ar = steering(phi_r, cfg.n_rx);
        let at = steering(phi_t, cfg.n_tx);
        h.gerc(alpha * scale, &ar, &at, Complex64::new(1.0, 0.0));
    }
    h
}

/// Normalization of the zero-forcing precoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    /// The literal reference normalization, `||F_Com||_F = 1`.
    Unit,
    /// Rescaled so `||F_Com||_F^2 = N_s`, matching the hybrid power constraint.
    Streams,
}

/// Zero-forcing precoder `F_Com = c H^H (H H^H)^-1`.
///
/// `c = 1 / sqrt(tr((H H^H)^-1))` in [`PowerMode::Unit`]; `Streams` adds a
/// further `sqrt(N_s)` with `N_s` the column count (= n_rx).
pub fn zf_precoder(h: &CMat, mode: PowerMode) -> Result<CMat> {
    let n_rx = h.nrows();
    let gram = numerics::symmetrize(&(h * h.adjoint()));
    let gram_inv = solve_gram(&gram)?;
    let trace_inv = gram_inv.trace().re;
    if !(trace_inv > 0.0) || !trace_inv.is_finite() {
        return Err(Error::RankDeficientChannel);
    }
    let mut c = 1.0 / trace_inv.sqrt();
    if mode == PowerMode::Streams {
        c *= (n_rx as f64).sqrt();
    }
    Ok((h.adjoint() * gram_inv).scale(c))
}

fn solve_gram(gram: &CMat) -> Result<CMat> {
    let eye = CMat::identity(gram.nrows(), gram.ncols());
    numerics::solve_hpd(gram, &eye).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::RankDeficientChannel,
        other => other,
    })
}

/// Spectral efficiency of the link,
/// `R = log2 | I + (snr / N_s) H F F^H H^H |` in bits/s/Hz.
pub fn spectral_efficiency(
    h: &CMat,
    f: &CMat,
    link: &LinkBudget,
    n_streams: usize,
) -> Result<f64> {
    if h.ncols() != f.nrows() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "spectral_efficiency: H is {}x{}, F is {}x{}",
                h.nrows(),
                h.ncols(),
                f.nrows(),
                f.ncols()
            ),
        });
    }
    let hf = h * f;
    let scale = link.linear() / n_streams as f64;
    let a = numerics::symmetrize(&(&hf * hf.adjoint()).scale(scale));
    numerics::logdet_plus(&a)
}
