//! Fully-connected hybrid design: an ADMM outer loop with closed-form updates
//! for the consensus variable and the digital beamformer, a Riemannian
//! conjugate-gradient inner solver for the analog beamformer, and the
//! adaptive penalty rule.

use rand::Rng;
use std::time::Instant;

use crate::beamformer::{HybridBeamformer, SolverReport, SolverStatus, Structure};
use crate::error::{Error, Result};
use crate::manifold::{inner_re, CirclePoint};
use crate::numerics::{frob, hermitian_eig, solve_hpd, CMat};
use crate::objective::{madmm_sub_value_grad, weighted_objective, ReferencePair, TradeoffConfig};

/// Backtracking line-search parameters for the inner RCG.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoConfig {
    pub initial_step: f64,
    /// Step shrink factor, in (0, 1).
    pub shrink: f64,
    /// Sufficient-decrease coefficient, in (0, 1).
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        ArmijoConfig {
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 30,
        }
    }
}

/// Inner Riemannian conjugate-gradient configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcgConfig {
    pub k_max: usize,
    /// Gradient-norm stopping threshold.
    pub grad_tol: f64,
    pub armijo: ArmijoConfig,
}

impl Default for RcgConfig {
    fn default() -> Self {
        RcgConfig {
            k_max: 60,
            grad_tol: 1e-6,
            armijo: ArmijoConfig::default(),
        }
    }
}

/// Outer ADMM configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MadmmConfig {
    /// Initial penalty.
    pub alpha0: f64,
    /// Penalty growth factor (> 1).
    pub beta: f64,
    /// Residual-ratio threshold (> 1).
    pub gamma: f64,
    /// Outer iteration cap.
    pub n_max: usize,
    pub rcg: RcgConfig,
    /// Early stop once the primal residual drops below this.
    pub primal_tol: f64,
}

impl Default for MadmmConfig {
    fn default() -> Self {
        MadmmConfig {
            alpha0: 1.0,
            beta: 2.0,
            gamma: 10.0,
            n_max: 200,
            rcg: RcgConfig::default(),
            primal_tol: 1e-6,
        }
    }
}

impl MadmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha0 > 0.0) {
            return Err(Error::Config(format!("alpha0 {} must be positive", self.alpha0)));
        }
        if !(self.beta > 1.0) || !(self.gamma > 1.0) {
            return Err(Error::Config(format!(
                "beta {} and gamma {} must exceed 1",
                self.beta, self.gamma
            )));
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        let a = self.rcg.armijo;
        if !(a.shrink > 0.0 && a.shrink < 1.0)
            || !(a.sufficient_decrease > 0.0 && a.sufficient_decrease < 1.0)
            || !(a.initial_step > 0.0)
        {
            return Err(Error::Config("Armijo coefficients out of range".into()));
        }
        Ok(())
    }
}

/// Mutable state of the ADMM outer loop.
#[derive(Debug, Clone)]
pub struct MadmmState {
    /// Consensus variable `F`; rescaled to `||F||_F^2 = N_s` by every update.
    pub f: CMat,
    pub f_rf: CirclePoint,
    pub f_bb: CMat,
    /// Dual variable.
    pub lambda: CMat,
    /// Current penalty.
    pub alpha: f64,
    pub iter: usize,
}

impl MadmmState {
    /// Default initialization: random analog phases, digital beamformer fit
    /// against the communication reference, consensus variable from the
    /// rescaled product, zero dual.
    pub fn init(
        refs: &ReferencePair,
        n_rf: usize,
        alpha0: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let n_tx = refs.n_tx();
        let n_s = refs.n_streams();
        let f_rf = CirclePoint::random(n_tx, n_rf, rng);
        let f_bb = fbb_update(&f_rf, &refs.f_com)?;
        let product = f_rf.mat() * &f_bb;
        let norm = frob(&product);
        if norm == 0.0 {
            return Err(Error::DegenerateUpdate);
        }
        let f = product.scale((n_s as f64).sqrt() / norm);
        Ok(MadmmState {
            f,
            f_rf,
            f_bb,
            lambda: CMat::zeros(n_tx, n_s),
            alpha: alpha0,
            iter: 0,
        })
    }
}

/// Closed-form consensus update: with
/// `Fbar = 2 phi F_Com + 2 (1-phi) F_Rad - Lambda + alpha F_RF F_BB`,
/// returns `sqrt(N_s) Fbar / ||Fbar||_F`.
pub fn f_update(state: &MadmmState, refs: &ReferencePair, phi: f64) -> Result<CMat> {
    let f_bar = refs.f_com.scale(2.0 * phi) + refs.f_rad.scale(2.0 * (1.0 - phi))
        - &state.lambda
        + (state.f_rf.mat() * &state.f_bb).scale(state.alpha);
    let norm = frob(&f_bar);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateUpdate);
    }
    let n_s = refs.n_streams() as f64;
    Ok(f_bar.scale(n_s.sqrt() / norm))
}

/// Least-squares digital update `(F_RF^H F_RF)^-1 F_RF^H F_target`, with
/// diagonal regularization if the normal matrix is ill-conditioned
/// (condition number above 1e12).
pub fn fbb_update(f_rf: &CirclePoint, f_target: &CMat) -> Result<CMat> {
    let mut gram = crate::numerics::symmetrize(&(f_rf.mat().adjoint() * f_rf.mat()));
    let (values, _) = hermitian_eig(&gram)?;
    let lambda_max = *values.last().expect("gram is nonempty");
    let lambda_min = values[0];
    if !(lambda_max > 0.0) {
        return Err(Error::SingularNormalMatrix);
    }
    if lambda_min <= lambda_max * 1e-12 {
        let n = gram.nrows();
        gram += CMat::identity(n, n).scale(lambda_max * 1e-12);
    }
    let rhs = f_rf.mat().adjoint() * f_target;
    solve_hpd(&gram, &rhs).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::SingularNormalMatrix,
        other => other,
    })
}

/// Adaptive penalty rule: with `r = primal_res / dual_delta`, returns
/// `beta * alpha` if `r > gamma`, `alpha / beta` if `r < 1/gamma`, else
/// `alpha`. The penalty is left unchanged when `dual_delta` is not positive.
pub fn penalty_update(
    alpha: f64,
    primal_res: f64,
    dual_delta: f64,
    beta: f64,
    gamma: f64,
) -> f64 {
    if !(dual_delta > 0.0) {
        return alpha;
    }
    let r = primal_res / dual_delta;
    if r > gamma {
        beta * alpha
    } else if r < 1.0 / gamma {
        alpha / beta
    } else {
        alpha
    }
}

/// Outcome of one inner RCG solve.
#[derive(Debug, Clone)]
pub struct RcgOutcome {
    pub point: CirclePoint,
    /// Completed line-search iterations.
    pub iterations: usize,
    /// Final subproblem objective `g`.
    pub objective: f64,
    /// Final Riemannian gradient norm.
    pub grad_norm: f64,
    pub status: SolverStatus,
    /// `g` after each accepted step; nonincreasing.
    pub objective_trace: Vec<f64>,
}

/// Riemannian conjugate gradient on the complex circle manifold for the
/// MADMM analog subproblem `min ||F_target - F_RF F_BB||_F^2`.
///
/// Polak-Ribiere directions (clamped at zero for guaranteed descent, with a
/// steepest-descent reset whenever conjugacy is lost), projection as the
/// vector transport, and Armijo backtracking. A failed search along the CG
/// direction falls back to steepest descent; if that also fails the current
/// point is returned with [`SolverStatus::Stalled`].
pub fn rcg_solve(
    f_target: &CMat,
    f_bb: &CMat,
    init: CirclePoint,
    cfg: &RcgConfig,
) -> RcgOutcome {
    let mut point = init;
    let (mut value, egrad) = madmm_sub_value_grad(&point, f_target, f_bb);
    let mut grad = point.project(&egrad);
    let mut grad_norm_sq = inner_re(&grad, &grad);
    let mut direction = grad.scale(-1.0);
    let mut trace = Vec::new();
    let mut status = SolverStatus::IterationCap;
    let mut iterations = 0;

    if grad_norm_sq.sqrt() < cfg.grad_tol {
        status = SolverStatus::Converged;
    } else {
        for _ in 0..cfg.k_max {
            let slope = inner_re(&grad, &direction);
            let mut accepted = line_search(&point, &direction, slope, value, f_target, f_bb, &cfg.armijo);
            if accepted.is_none() {
                // fall back to plain steepest descent
                direction = grad.scale(-1.0);
                accepted = line_search(
                    &point,
                    &direction,
                    -grad_norm_sq,
                    value,
                    f_target,
                    f_bb,
                    &cfg.armijo,
                );
                if accepted.is_none() {
                    status = SolverStatus::Stalled;
                    break;
                }
            }
            let (new_point, new_value) = accepted.expect("checked above");
            let (_, new_egrad) = madmm_sub_value_grad(&new_point, f_target, f_bb);
            let new_grad = new_point.project(&new_egrad);
            let new_grad_norm_sq = inner_re(&new_grad, &new_grad);

            // Polak-Ribiere with the previous gradient transported by projection
            let transported_grad = new_point.project(&grad);
            let chi = &new_grad - &transported_grad;
            let sigma = (inner_re(&new_grad, &chi) / grad_norm_sq).max(0.0);
            let transported_dir = new_point.project(&direction);
            let mut new_direction = new_grad.scale(-1.0) + transported_dir.scale(sigma);
            if inner_re(&new_direction, &new_grad.scale(-1.0)) <= 0.0 {
                new_direction = new_grad.scale(-1.0);
            }

            point = new_point;
            value = new_value;
            grad = new_grad;
            grad_norm_sq = new_grad_norm_sq;
            direction = new_direction;
            iterations += 1;
            trace.push(value);

            if grad_norm_sq.sqrt() < cfg.grad_tol {
                status = SolverStatus::Converged;
                break;
            }
        }
    }

    RcgOutcome {
        point,
        iterations,
        objective: value,
        grad_norm: grad_norm_sq.sqrt(),
        status,
        objective_trace: trace,
    }
}

fn line_search(
    point: &CirclePoint,
    direction: &CMat,
    slope: f64,
    value: f64,
    f_target: &CMat,
    f_bb: &CMat,
    cfg: &ArmijoConfig,
) -> Option<(CirclePoint, f64)> {
    if !(slope < 0.0) {
        return None;
    }
    let mut step = cfg.initial_step;
    for _ in 0..=cfg.max_backtracks {
        if let Ok(candidate) = point.retract(direction, step) {
            let (candidate_value, _) = madmm_sub_value_grad(&candidate, f_target, f_bb);
            if candidate_value <= value + cfg.sufficient_decrease * step * slope {
                return Some((candidate, candidate_value));
            }
        }
        step *= cfg.shrink;
    }
    None
}

/// Full MADMM outer loop for the fully-connected structure.
///
/// Each iteration runs the consensus, analog (RCG), and digital updates, the
/// dual ascent `Lambda += alpha (F - F_RF F_BB)`, and the penalty rule; stops
/// early once the primal residual drops below `primal_tol`. The returned
/// beamformer is rescaled so `||F_RF F_BB||_F^2 = N_s` holds exactly.
pub fn madmm_solve(
    refs: &ReferencePair,
    phi: f64,
    cfg: &MadmmConfig,
    init: MadmmState,
) -> Result<(HybridBeamformer, SolverReport)> {
    cfg.validate()?;
    TradeoffConfig::new(phi)?;
    if init.f_rf.nrows() != refs.n_tx() || init.f_bb.ncols() != refs.n_streams() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "madmm init is {}x{} / {}x{}, references are {}x{}",
                init.f_rf.nrows(),
                init.f_rf.ncols(),
                init.f_bb.nrows(),
                init.f_bb.ncols(),
                refs.n_tx(),
                refs.n_streams()
            ),
        });
    }

    let started = Instant::now();
    let n_s = refs.n_streams() as f64;
    let mut state = init;
    let mut objective_trace = Vec::new();
    let mut primal_trace = Vec::new();
    let mut grad_trace = Vec::new();
    let mut status = SolverStatus::IterationCap;

    for n in 1..=cfg.n_max {
        let f_prev = state.f.clone();
        state.f = f_update(&state, refs, phi).map_err(|e| e.at_iteration(n))?;
        // With n_rf >= 2 n_s the analog/digital fit is exact and the primal
        // residual is ~0 from the first iteration; the consensus variable
        // still has to run its fixed-point iteration to the optimum, so the
        // early stop also requires F to have stopped moving.
        let consensus_delta = frob(&(&state.f - &f_prev));
        let target = &state.f + state.lambda.scale(1.0 / state.alpha);
        let rcg = rcg_solve(&target, &state.f_bb, state.f_rf.clone(), &cfg.rcg);
        state.f_rf = rcg.point;
        state.f_bb = fbb_update(&state.f_rf, &target).map_err(|e| e.at_iteration(n))?;

        let product = state.f_rf.mat() * &state.f_bb;
        let residual = &state.f - &product;
        let primal = frob(&residual);
        let lambda_step = residual.scale(state.alpha);
        state.lambda += &lambda_step;
        let dual_delta = frob(&lambda_step);
        state.alpha = penalty_update(state.alpha, primal * primal, dual_delta, cfg.beta, cfg.gamma);
        state.iter = n;

        objective_trace.push(weighted_objective(&product, refs, phi));
        primal_trace.push(primal);
        grad_trace.push(rcg.grad_norm);

        if primal < cfg.primal_tol && consensus_delta < cfg.primal_tol {
            status = SolverStatus::Converged;
            break;
        }
    }

    let product = state.f_rf.mat() * &state.f_bb;
    let power = frob(&product);
    if !(power > 0.0) {
        return Err(Error::DegenerateUpdate);
    }
    let f_bb = state.f_bb.scale(n_s.sqrt() / power);
    let beamformer = HybridBeamformer {
        structure: Structure::FullyConnected,
        f_rf: state.f_rf.into_mat(),
        f_bb,
    };
    let report = SolverReport {
        iterations: objective_trace.len(),
        objective_trace,
        primal_residual_trace: primal_trace,
        grad_norm_trace: grad_trace,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        status,
    };
    Ok((beamformer, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::seeded_rng;
    use crate::numerics::test_support::random_cmat;
    use num_complex::Complex64;

    fn random_refs(n_tx: usize, n_s: usize, seed: u64) -> ReferencePair {
        let mut rng = seeded_rng(seed);
        let scale = |m: CMat| {
            let norm = frob(&m);
            m.scale((n_s as f64).sqrt() / norm)
        };
        ReferencePair::new(
            scale(random_cmat(n_tx, n_s, &mut rng)),
            scale(random_cmat(n_tx, n_s, &mut rng)),
        )
        .unwrap()
    }

    #[test]
    fn f_update_single_term_cases() {
        let refs = random_refs(4, 2, 1);
        let mut rng = seeded_rng(2);
        let mut state = MadmmState::init(&refs, 2, 1.0, &mut rng).unwrap();
        state.alpha = 1e-300; // effectively alpha -> 0 without dividing by zero
        state.lambda = CMat::zeros(4, 2);
        // kill the product term's influence by zeroing F_BB
        state.f_bb = CMat::zeros(2, 2);

        let f1 = f_update(&state, &refs, 1.0).unwrap();
        let expected = refs.f_com.scale(2f64.sqrt() / frob(&refs.f_com));
        assert!(frob(&(&f1 - &expected)) < 1e-12);

        let f0 = f_update(&state, &refs, 0.0).unwrap();
        let expected = refs.f_rad.scale(2f64.sqrt() / frob(&refs.f_rad));
        assert!(frob(&(&f0 - &expected)) < 1e-12);
    }

    #[test]
    fn f_update_satisfies_kkt() {
        // Recover the multiplier Phi from the norm equation and check that the
        // Lagrangian gradient vanishes at the returned point.
        let refs = random_refs(5, 2, 3);
        let mut rng = seeded_rng(4);
        let mut state = MadmmState::init(&refs, 3, 1.0, &mut rng).unwrap();
        state.lambda = random_cmat(5, 2, &mut rng).scale(0.3);
        state.alpha = 1.7;
        let phi = 0.4;
        let n_s = 2.0f64;

        let f_bar = refs.f_com.scale(2.0 * phi) + refs.f_rad.scale(2.0 * (1.0 - phi))
            - &state.lambda
            + (state.f_rf.mat() * &state.f_bb).scale(state.alpha);
        let f = f_update(&state, &refs, phi).unwrap();
        assert!((frob(&f).powi(2) - n_s).abs() < 1e-12);

        let multiplier = (frob(&f_bar) / n_s.sqrt() - 2.0 - state.alpha) / 2.0;
        let stationarity = (&f - &refs.f_com).scale(2.0 * phi)
            + (&f - &refs.f_rad).scale(2.0 * (1.0 - phi))
            + (&f + state.lambda.scale(1.0 / state.alpha)
                - state.f_rf.mat() * &state.f_bb)
                .scale(state.alpha)
            + f.scale(2.0 * multiplier);
        assert!(frob(&stationarity) <= 1e-9 * frob(&f_bar).max(1.0));
    }

    #[test]
    fn f_update_rejects_zero_combination() {
        let refs = ReferencePair::new(CMat::zeros(2, 1), CMat::zeros(2, 1)).unwrap();
        let mut rng = seeded_rng(5);
        let f_rf = CirclePoint::random(2, 1, &mut rng);
        let state = MadmmState {
            f: CMat::zeros(2, 1),
            f_rf,
            f_bb: CMat::zeros(1, 1),
            lambda: CMat::zeros(2, 1),
            alpha: 1.0,
            iter: 0,
        };
        assert!(matches!(
            f_update(&state, &refs, 0.5),
            Err(Error::DegenerateUpdate)
        ));
    }

    #[test]
    fn fbb_update_scalar_and_consistent_cases() {
        let mut rng = seeded_rng(6);
        // all-ones column: least squares reduces to the column mean times n
        let ones = CirclePoint::from_phases(4, 1, &[0.0; 4]).unwrap();
        let target = random_cmat(4, 2, &mut rng);
        let out = fbb_update(&ones, &target).unwrap();
        for c in 0..2 {
            let mean: Complex64 = (0..4).map(|r| target[(r, c)]).sum::<Complex64>() / 4.0;
            assert!((out[(0, c)] - mean).norm() < 1e-12);
        }
        // consistent system is recovered exactly
        let f_rf = CirclePoint::random(4, 2, &mut rng);
        let b = random_cmat(2, 2, &mut rng);
        let consistent = f_rf.mat() * &b;
        let recovered = fbb_update(&f_rf, &consistent).unwrap();
        assert!(frob(&(&recovered - &b)) < 1e-10);
    }

    #[test]
    fn fbb_update_normal_equation_residual() {
        let mut rng = seeded_rng(7);
        for _ in 0..20 {
            let f_rf = CirclePoint::random(6, 3, &mut rng);
            let target = random_cmat(6, 2, &mut rng);
            let out = fbb_update(&f_rf, &target).unwrap();
            let residual = f_rf.mat().adjoint() * (&target - f_rf.mat() * &out);
            assert!(frob(&residual) <= 1e-9 * frob(&target).max(1.0));
        }
    }

    #[test]
    fn penalty_update_branches() {
        // r = 20 doubles, r = 0.05 halves, r = 1 leaves alpha alone
        assert_eq!(penalty_update(1.0, 20.0, 1.0, 2.0, 10.0), 2.0);
        assert_eq!(penalty_update(1.0, 0.05, 1.0, 2.0, 10.0), 0.5);
        assert_eq!(penalty_update(1.0, 1.0, 1.0, 2.0, 10.0), 1.0);
        // zero dual delta is a no-op
        assert_eq!(penalty_update(3.0, 1.0, 0.0, 2.0, 10.0), 3.0);
        // beta = gamma = infinity disables the rule
        let inf = f64::INFINITY;
        assert_eq!(penalty_update(3.0, 123.0, 1e-9, inf, inf), 3.0);
    }

    #[test]
    fn rcg_returns_optimal_init_immediately() {
        let mut rng = seeded_rng(8);
        let f_rf = CirclePoint::random(3, 2, &mut rng);
        let f_bb = random_cmat(2, 2, &mut rng);
        let target = f_rf.mat() * &f_bb; // gradient is exactly zero here
        let out = rcg_solve(&target, &f_bb, f_rf.clone(), &RcgConfig::default());
        assert_eq!(out.iterations, 0);
        assert_eq!(out.status, SolverStatus::Converged);
        assert_eq!(out.point.mat(), f_rf.mat());
    }

    #[test]
    fn rcg_scalar_phase_alignment() {
        // N_t = N_RF = N_s = 1: the minimizer of |t - x b|^2 over |x| = 1 is
        // x = phase(t conj(b)).
        let mut rng = seeded_rng(9);
        let t = Complex64::new(0.83, -0.41);
        let b = Complex64::new(-0.3, 0.92);
        let target = CMat::from_element(1, 1, t);
        let f_bb = CMat::from_element(1, 1, b);
        let init = CirclePoint::random(1, 1, &mut rng);
        let out = rcg_solve(&target, &f_bb, init, &RcgConfig::default());
        let expected = (t * b.conj()) / (t * b.conj()).norm();
        assert!(
            (out.point.mat()[(0, 0)] - expected).norm() < 1e-5,
            "got {}, want {}",
            out.point.mat()[(0, 0)],
            expected
        );
    }

    #[test]
    fn rcg_objective_nonincreasing_and_tangent_iterates() {
        let mut rng = seeded_rng(10);
        let f_bb = random_cmat(3, 2, &mut rng);
        let target = random_cmat(6, 2, &mut rng);
        let init = CirclePoint::random(6, 3, &mut rng);
        let out = rcg_solve(&target, &f_bb, init, &RcgConfig::default());
        for pair in out.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "objective increased: {pair:?}");
        }
        assert!(out.point.modulus_violation() <= 1e-12);
    }

    #[test]
    fn rcg_matches_phase_grid_brute_force() {
        // N_t = 2, N_RF = 1: sweep both analog phases on a 4096-point grid.
        let mut rng = seeded_rng(11);
        let b = Complex64::new(0.7, -0.2);
        let f_bb = CMat::from_element(1, 1, b);
        let target = random_cmat(2, 1, &mut rng);
        let init = CirclePoint::random(2, 1, &mut rng);
        let out = rcg_solve(&target, &f_bb, init, &RcgConfig::default());

        let grid = 4096;
        let mut best = f64::INFINITY;
        for i in 0..grid {
            let p0 = Complex64::from_polar(1.0, std::f64::consts::TAU * i as f64 / grid as f64);
            for j in 0..grid {
                let p1 =
                    Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / grid as f64);
                let r0 = target[(0, 0)] - p0 * b;
                let r1 = target[(1, 0)] - p1 * b;
                let value = r0.norm_sqr() + r1.norm_sqr();
                if value < best {
                    best = value;
                }
            }
        }
        assert!(
            out.objective <= best + 1e-3,
            "rcg {} vs brute force {}",
            out.objective,
            best
        );
    }

    #[test]
    fn madmm_identical_references_ignore_phi() {
        // With F_Rad = F_Com the consensus update is phi-independent, so two
        // runs from the same init coincide and the residual collapses.
        let mut rng = seeded_rng(12);
        let f_com = {
            let m = random_cmat(8, 2, &mut rng);
            let n = frob(&m);
            m.scale(2f64.sqrt() / n)
        };
        let refs = ReferencePair::new(f_com.clone(), f_com).unwrap();
        let cfg = MadmmConfig::default();
        let init = MadmmState::init(&refs, 4, cfg.alpha0, &mut rng).unwrap();
        let (b1, r1) = madmm_solve(&refs, 1.0, &cfg, init.clone()).unwrap();
        let (b2, r2) = madmm_solve(&refs, 0.5, &cfg, init).unwrap();
        assert!(r1.primal_residual_trace.last().unwrap() < &1e-6);
        let j1 = weighted_objective(&(&b1.f_rf * &b1.f_bb), &refs, 1.0);
        let j2 = weighted_objective(&(&b2.f_rf * &b2.f_bb), &refs, 1.0);
        assert!((j1 - j2).abs() < 1e-9);
        assert_eq!(r1.iterations, r2.iterations);
    }

    #[test]
    fn madmm_consensus_norm_and_feasibility() {
        let refs = random_refs(8, 2, 13);
        let cfg = MadmmConfig::default();
        let mut rng = seeded_rng(14);
        let init = MadmmState::init(&refs, 4, cfg.alpha0, &mut rng).unwrap();
        let (beamformer, report) = madmm_solve(&refs, 0.5, &cfg, init).unwrap();
        assert!(beamformer.validate().is_feasible(), "{}", beamformer.validate());
        assert_eq!(report.iterations, report.objective_trace.len());
        assert!(!report.objective_trace.is_empty());
        // primal residual fell below tolerance well before the cap
        assert!(report.primal_residual_trace.last().unwrap() < &1e-3);
    }

    #[test]
    fn penalty_freeze_keeps_alpha_constant_through_solve() {
        let refs = random_refs(6, 2, 15);
        let cfg = MadmmConfig {
            beta: f64::INFINITY,
            gamma: f64::INFINITY,
            n_max: 5,
            primal_tol: 0.0,
            ..MadmmConfig::default()
        };
        let mut rng = seeded_rng(16);
        let init = MadmmState::init(&refs, 3, cfg.alpha0, &mut rng).unwrap();
        // replicate the loop manually to observe alpha
        let mut state = init.clone();
        for _ in 0..3 {
            state.f = f_update(&state, &refs, 0.5).unwrap();
            let target = &state.f + state.lambda.scale(1.0 / state.alpha);
            state.f_rf = rcg_solve(&target, &state.f_bb, state.f_rf.clone(), &cfg.rcg).point;
            state.f_bb = fbb_update(&state.f_rf, &target).unwrap();
            let residual = &state.f - state.f_rf.mat() * &state.f_bb;
            let step = residual.scale(state.alpha);
            state.lambda += &step;
            let primal = frob(&residual);
            state.alpha =
                penalty_update(state.alpha, primal * primal, frob(&step), cfg.beta, cfg.gamma);
            assert_eq!(state.alpha, cfg.alpha0);
            assert!((frob(&state.f).powi(2) - 2.0).abs() < 1e-12);
        }
        // the library loop accepts the frozen config too
        let (_, report) = madmm_solve(&refs, 0.5, &cfg, init).unwrap();
        assert_eq!(report.iterations, 5);
    }
}
