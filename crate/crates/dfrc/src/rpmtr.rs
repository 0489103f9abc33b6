//! Partially-connected hybrid design: a Riemannian trust-region loop on the
//! circle x sphere product manifold with a Steihaug truncated-CG subproblem
//! solver, rho-ratio step acceptance, and radius adaptation.

use std::time::Instant;

use crate::beamformer::{HybridBeamformer, SolverReport, SolverStatus, Structure};
use crate::error::{Error, Result};
use crate::manifold::{product_inner, TangentPair};
use crate::objective::{
    effective_from_partial, weighted_objective, ConnectionMask, PartialPoint, PointData,
    ReferencePair, TradeoffConfig,
};

/// Truncated-CG inner-solver parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcgConfig {
    /// Inner iteration cap; the manifold dimension is the natural choice.
    pub max_inner: usize,
    /// Residual-decrease factor: stop at `||r|| <= ||r0|| min(kappa, ||r0||^theta)`.
    pub kappa: f64,
    pub theta: f64,
}

/// Trust-region loop parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrConfig {
    /// Maximum radius.
    pub delta_bar: f64,
    /// Initial radius, in `(0, delta_bar)`.
    pub delta0: f64,
    /// Acceptance threshold, in `[0, 1/4)`.
    pub rho_prime: f64,
    pub k_max: usize,
    /// Gradient-norm stopping threshold.
    pub grad_tol: f64,
    /// Stop once the subproblem returns a displacement shorter than this.
    pub step_tol: f64,
    pub tcg: TcgConfig,
}

/// Real dimension of the product manifold: `n_tx n_rf` circle phases plus a
/// `2 n_rf n_streams - 1` dimensional sphere.
pub fn manifold_dim(n_tx: usize, n_rf: usize, n_streams: usize) -> usize {
    n_tx * n_rf + 2 * n_rf * n_streams - 1
}

impl TrConfig {
    /// Defaults scaled to the problem: `delta_bar = sqrt(dim)`,
    /// `delta0 = delta_bar / 8`, `rho' = 0.1`, full-dimension inner cap.
    pub fn default_for(n_tx: usize, n_rf: usize, n_streams: usize) -> Self {
        let dim = manifold_dim(n_tx, n_rf, n_streams);
        let delta_bar = (dim as f64).sqrt();
        TrConfig {
            delta_bar,
            delta0: delta_bar / 8.0,
            rho_prime: 0.1,
            k_max: 500,
            grad_tol: 1e-6,
            step_tol: 1e-6,
            tcg: TcgConfig {
                max_inner: dim,
                kappa: 0.1,
                theta: 1.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_bar > 0.0) || !(self.delta0 > 0.0) || self.delta0 >= self.delta_bar {
            return Err(Error::Config(format!(
                "need 0 < delta0 < delta_bar, got delta0={}, delta_bar={}",
                self.delta0, self.delta_bar
            )));
        }
        if !(0.0..0.25).contains(&self.rho_prime) {
            return Err(Error::Config(format!(
                "rho_prime {} must lie in [0, 1/4)",
                self.rho_prime
            )));
        }
        if self.k_max == 0 || self.tcg.max_inner == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0) || !(self.step_tol >= 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.tcg.kappa > 0.0) || !(self.tcg.theta > 0.0) {
            return Err(Error::Config("tCG parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Loop state exposed for inspection and tests.
#[derive(Debug, Clone)]
pub struct TrState {
    pub point: PartialPoint,
    pub delta: f64,
    pub rho: f64,
    pub iter: usize,
}

/// Quadratic model `w(z) = J + <grad, z> + 1/2 <Hess[z], z>` at a point.
pub fn model_value(
    pt: &PartialPoint,
    z: &TangentPair,
    refs: &ReferencePair,
    phi: f64,
    mask: &ConnectionMask,
) -> f64 {
    let data = PointData::new(pt, mask, refs, phi);
    data.value() + product_inner(data.rgrad(), z) + 0.5 * product_inner(&data.rhess(z), z)
}

/// Steihaug truncated conjugate gradient for the trust-region subproblem.
///
/// Matrix-free: only Hessian-vector products are used. Negative curvature and
/// radius violations are resolved by following the current direction to the
/// boundary, so the returned step never exceeds the radius and its model
/// decrease is at least the Cauchy point's.
pub fn tcg_subproblem(
    pt: &PartialPoint,
    refs: &ReferencePair,
    phi: f64,
    mask: &ConnectionMask,
    delta: f64,
    cfg: &TcgConfig,
) -> TangentPair {
    let data = PointData::new(pt, mask, refs, phi);
    tcg_with_data(&data, pt, delta, cfg)
}

fn tcg_with_data(
    data: &PointData<'_>,
    pt: &PartialPoint,
    delta: f64,
    cfg: &TcgConfig,
) -> TangentPair {
    let mut z = pt.zero_tangent();
    let mut r = data.rgrad().clone();
    let r0_norm = r.norm();
    if r0_norm == 0.0 {
        return z;
    }
    let stop = r0_norm * cfg.kappa.min(r0_norm.powf(cfg.theta));
    let mut d = r.scale(-1.0);
    let mut rr = r0_norm * r0_norm;
    let mut zz = 0.0;
    let mut zd = 0.0;

    for _ in 0..cfg.max_inner {
        let hd = data.rhess(&d);
        let dhd = product_inner(&d, &hd);
        let dd = product_inner(&d, &d);
        if dd == 0.0 {
            break;
        }
        if dhd <= 0.0 {
            return z.axpy(boundary_tau(zz, zd, dd, delta), &d);
        }
        let alpha = rr / dhd;
        let z_next_sq = zz + 2.0 * alpha * zd + alpha * alpha * dd;
        if z_next_sq >= delta * delta {
            return z.axpy(boundary_tau(zz, zd, dd, delta), &d);
        }
        z = z.axpy(alpha, &d);
        r = r.axpy(alpha, &hd);
        let rr_next = product_inner(&r, &r);
        if rr_next.sqrt() <= stop {
            break;
        }
        let beta = rr_next / rr;
        // track <z, z> and <z, d> incrementally alongside the recurrences
        zd = beta * (zd + alpha * dd);
        zz = z_next_sq;
        d = r.scale(-1.0).axpy(beta, &d);
        rr = rr_next;
    }
    z
}

/// Positive root of `||z + tau d||^2 = delta^2`.
fn boundary_tau(zz: f64, zd: f64, dd: f64, delta: f64) -> f64 {
    let disc = zd * zd + dd * (delta * delta - zz);
    (-zd + disc.max(0.0).sqrt()) / dd
}

/// Actual-to-predicted decrease quotient, with the near-zero-denominator
/// guard: a negligible denominator yields 1 when the numerator is negligible
/// too, and rejects (`-inf`) otherwise.
pub fn rho_ratio(
    pt: &PartialPoint,
    candidate: &PartialPoint,
    z: &TangentPair,
    refs: &ReferencePair,
    phi: f64,
    mask: &ConnectionMask,
) -> f64 {
    let data = PointData::new(pt, mask, refs, phi);
    let j_candidate = weighted_objective(&effective_from_partial(candidate, mask), refs, phi);
    let model_decrease =
        -(product_inner(data.rgrad(), z) + 0.5 * product_inner(&data.rhess(z), z));
    rho_from_values(data.value(), j_candidate, model_decrease)
}

fn rho_from_values(j_point: f64, j_candidate: f64, model_decrease: f64) -> f64 {
    let guard = 1e-15 * j_point.abs();
    let actual_decrease = j_point - j_candidate;
    if model_decrease.abs() < guard {
        if actual_decrease.abs() < guard {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        actual_decrease / model_decrease
    }
}

/// Step acceptance: the candidate replaces the point iff `rho > rho'`.
pub fn accept_step(
    point: PartialPoint,
    candidate: PartialPoint,
    rho: f64,
    rho_prime: f64,
) -> PartialPoint {
    if rho > rho_prime {
        candidate
    } else {
        point
    }
}

/// Radius adaptation: quarter on poor agreement, double (capped) on strong
/// agreement with a boundary step, otherwise unchanged.
pub fn radius_update(delta: f64, rho: f64, step_norm: f64, delta_bar: f64) -> f64 {
    if rho < 0.25 {
        delta / 4.0
    } else if rho > 0.75 && (step_norm - delta).abs() <= 1e-10 * delta {
        (2.0 * delta).min(delta_bar)
    } else {
        delta
    }
}

/// Trust-region loop on the product manifold.
///
/// Iterates subproblem -> retraction -> rho -> acceptance -> radius until the
/// gradient norm falls below `grad_tol`, the subproblem step is shorter than
/// `step_tol`, or `k_max` is hit. Accepted steps never increase the
/// objective. The report traces record one entry per guard evaluation,
/// including the final one that stops the loop.
pub fn rpmtr_solve(
    refs: &ReferencePair,
    phi: f64,
    mask: &ConnectionMask,
    cfg: &TrConfig,
    init: PartialPoint,
) -> Result<(HybridBeamformer, SolverReport)> {
    cfg.validate()?;
    TradeoffConfig::new(phi)?;
    if init.f_ps.nrows() != refs.n_tx()
        || init.f_ps.nrows() != mask.n_tx()
        || init.f_ps.ncols() != mask.n_rf()
        || init.f_bb.mat().ncols() != refs.n_streams()
    {
        return Err(Error::DimensionMismatch {
            context: format!(
                "rpmtr init F_PS {}x{} / F_BB {}x{} vs mask {}x{} and references {}x{}",
                init.f_ps.nrows(),
                init.f_ps.ncols(),
                init.f_bb.mat().nrows(),
                init.f_bb.mat().ncols(),
                mask.n_tx(),
                mask.n_rf(),
                refs.n_tx(),
                refs.n_streams()
            ),
        });
    }

    let started = Instant::now();
    let mut state = TrState {
        point: init,
        delta: cfg.delta0,
        rho: 0.0,
        iter: 0,
    };
    let mut objective_trace = Vec::new();
    let mut grad_trace = Vec::new();
    let mut status = SolverStatus::IterationCap;

    for k in 1..=cfg.k_max {
        let data = PointData::new(&state.point, mask, refs, phi);
        objective_trace.push(data.value());
        grad_trace.push(data.grad_norm());
        state.iter = k;

        if data.grad_norm() <= cfg.grad_tol {
            status = SolverStatus::Converged;
            break;
        }

        let z = tcg_with_data(&data, &state.point, state.delta, &cfg.tcg);
        let step_norm = z.norm();
        if step_norm < cfg.step_tol {
            status = SolverStatus::Converged;
            break;
        }

        let candidate = state.point.retract(&z, 1.0).map_err(|e| e.at_iteration(k))?;
        let j_candidate =
            weighted_objective(&effective_from_partial(&candidate, mask), refs, phi);
        let model_decrease =
            -(product_inner(data.rgrad(), &z) + 0.5 * product_inner(&data.rhess(&z), &z));
        state.rho = rho_from_values(data.value(), j_candidate, model_decrease);

        state.point = accept_step(state.point, candidate, state.rho, cfg.rho_prime);
        state.delta = radius_update(state.delta, state.rho, step_norm, cfg.delta_bar);
    }

    let point = state.point;
    let f_rf = mask.mat().component_mul(point.f_ps.mat());
    let beamformer = HybridBeamformer {
        structure: Structure::PartiallyConnected,
        f_rf,
        f_bb: point.f_bb.mat().clone(),
    };
    let report = SolverReport {
        iterations: objective_trace.len(),
        objective_trace,
        primal_residual_trace: Vec::new(),
        grad_norm_trace: grad_trace,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        status,
    };
    Ok((beamformer, report))
}
