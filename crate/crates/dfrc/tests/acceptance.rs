//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The trade-off and structure-comparison criteria share one batch of
//! desk-scale solver runs through a process-local cache.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;
use std::sync::OnceLock;

use dfrc::harness::{run_design, ExperimentConfig};
use dfrc::manifold::{inner_re, product_inner};
use dfrc::numerics::{frob, CMat};
use dfrc::objective::{
    effective_from_partial, rgrad_partial, weighted_objective, ConnectionMask, PartialPoint,
    PointData, ReferencePair,
};
use dfrc::{
    ismr, madmm_solve, rpmtr_solve, seeded_rng, spectral_efficiency, CirclePoint, LinkBudget,
    MadmmConfig, MadmmState, SpherePoint, Structure, SystemConfig, TangentPair, TrConfig,
};

fn random_cmat(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    })
}

fn pass(n: usize, name: &str) {
    println!("acceptance {n} ({name}): pass");
}

// --- 1: manifold invariants --------------------------------------------------

#[test]
fn acceptance_1_manifold_suite() {
    let mut rng = seeded_rng(1001);
    for _ in 0..1000 {
        let p = CirclePoint::random(8, 4, &mut rng);
        let v = p.project(&random_cmat(8, 4, &mut rng));
        let step = rng.gen::<f64>() * 2.0;
        let moved = p.retract(&v, step).unwrap();
        assert!(moved.modulus_violation() <= 1e-12);

        let raw = random_cmat(8, 4, &mut rng);
        let once = p.project(&raw);
        let twice = p.project(&once);
        let scale = frob(&once).max(1.0);
        assert!(frob(&(&twice - &once)) <= 1e-10 * scale, "projection not idempotent");
        let u = random_cmat(8, 4, &mut rng);
        let lhs = inner_re(&p.project(&raw), &u);
        let rhs = inner_re(&raw, &p.project(&u));
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "projection not self-adjoint");
    }
    let mut rng = seeded_rng(1002);
    for _ in 0..1000 {
        let s = SpherePoint::rescale(random_cmat(6, 3, &mut rng), 1.7).unwrap();
        let v = s.project(&random_cmat(6, 3, &mut rng));
        let step = rng.gen::<f64>() * 2.0;
        let moved = s.retract(&v, step).unwrap();
        assert!(moved.radius_violation() <= 1e-12 * 1.7);

        let raw = random_cmat(6, 3, &mut rng);
        let once = s.project(&raw);
        let twice = s.project(&once);
        assert!(frob(&(&twice - &once)) <= 1e-10 * frob(&once).max(1.0));
        let u = random_cmat(6, 3, &mut rng);
        let lhs = inner_re(&s.project(&raw), &u);
        let rhs = inner_re(&raw, &s.project(&u));
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }
    pass(1, "manifold suite");
}

// --- 2: derivatives ------------------------------------------------------------

fn random_partial_setup(
    n_tx: usize,
    n_rf: usize,
    n_s: usize,
    seed: u64,
) -> (PartialPoint, ConnectionMask, ReferencePair, rand_chacha::ChaCha8Rng) {
    let mut rng = seeded_rng(seed);
    let cfg = SystemConfig::new(n_tx, n_s, n_rf, n_s, 2, 2).unwrap();
    let pt = PartialPoint::random(&cfg, &mut rng).unwrap();
    let mask = ConnectionMask::partially_connected(n_tx, n_rf).unwrap();
    let refs = ReferencePair::new(
        random_cmat(n_tx, n_s, &mut rng),
        random_cmat(n_tx, n_s, &mut rng),
    )
    .unwrap();
    (pt, mask, refs, rng)
}

fn random_tangent(pt: &PartialPoint, rng: &mut impl Rng) -> TangentPair {
    TangentPair {
        z_ps: pt
            .f_ps
            .project(&random_cmat(pt.f_ps.nrows(), pt.f_ps.ncols(), rng)),
        z_bb: pt.f_bb.project(&random_cmat(
            pt.f_bb.mat().nrows(),
            pt.f_bb.mat().ncols(),
            rng,
        )),
    }
}

#[test]
fn acceptance_2_derivative_suite() {
    let phi = 0.5;
    // 17 instances per size = 51 seeded points overall
    for (n_tx, n_rf, n_s) in [(4, 2, 2), (8, 4, 2), (32, 8, 4)] {
        for instance in 0..17u64 {
            let seed = 2000 + n_tx as u64 * 100 + instance;
            let (pt, mask, refs, mut rng) = random_partial_setup(n_tx, n_rf, n_s, seed);
            let grad = rgrad_partial(&pt, &mask, &refs, phi);
            let eps = 1e-7;
            for _ in 0..20 {
                let v = random_tangent(&pt, &mut rng);
                let j_at = |t: f64| {
                    let moved = pt.retract(&v, t).unwrap();
                    weighted_objective(&effective_from_partial(&moved, &mask), &refs, phi)
                };
                let fd = (j_at(eps) - j_at(-eps)) / (2.0 * eps);
                let analytic = product_inner(&grad, &v);
                // relative to the gradient scale: |fd| itself can vanish when
                // a random direction lands near-orthogonal to the gradient
                let scale = (grad.norm() * v.norm()).max(1e-9);
                let rel = (analytic - fd).abs() / scale;
                assert!(rel <= 1e-6, "n_tx={n_tx}: gradient mismatch, rel {rel:.3e}");
            }

            // Hessian: self-adjointness and third-order Taylor remainder
            let data = PointData::new(&pt, &mask, &refs, phi);
            for _ in 0..10 {
                let x = random_tangent(&pt, &mut rng);
                let y = random_tangent(&pt, &mut rng);
                let lhs = product_inner(&data.rhess(&x), &y);
                let rhs = product_inner(&x, &data.rhess(&y));
                assert!(
                    (lhs - rhs).abs() <= 1e-8 * x.norm() * y.norm(),
                    "n_tx={n_tx}: Hessian not self-adjoint"
                );
            }
            let z = {
                let raw = random_tangent(&pt, &mut rng);
                raw.scale(1.0 / raw.norm()) // unit direction keeps t in the asymptotic regime
            };
            let g_z = product_inner(data.rgrad(), &z);
            let h_z = product_inner(&data.rhess(&z), &z);
            let remainder = |t: f64| {
                let moved = pt.retract(&z, t).unwrap();
                let j = weighted_objective(&effective_from_partial(&moved, &mask), &refs, phi);
                (j - data.value() - t * g_z - 0.5 * t * t * h_z).abs()
            };
            // An O(t^3) remainder shrinks ~8x per halving, an O(t^2) defect
            // only 4x. The signed remainder can cross zero at an isolated t
            // and wreck the ratios around it, so take five halvings and use
            // the median ratio as the order estimate: one root contaminates
            // at most two ratios while a genuine order defect drags them all.
            let remainders: Vec<f64> = (0..6).map(|i| remainder(0.2 / 2f64.powi(i))).collect();
            if remainders[0] > 1e-10 * data.value().max(1.0) {
                let mut ratios: Vec<f64> = remainders
                    .windows(2)
                    .map(|w| w[0] / w[1].max(1e-300))
                    .collect();
                ratios.sort_by(f64::total_cmp);
                assert!(
                    ratios[2] >= 6.0,
                    "n_tx={n_tx}: Taylor remainder not O(t^3): {remainders:?}"
                );
            }
        }
    }
    pass(2, "derivative suite");
}

// --- 3: tiny-instance brute force ---------------------------------------------

const PHASE_GRID: usize = 4096;

#[test]
fn acceptance_3_oracle_equivalence_tiny() {
    // Fully connected, N_t = 2, N_RF = 2, N_s = 1. Column phases of F_RF are
    // absorbed into F_BB (factorization invariance), so pinning the top row
    // to 1 leaves two free phases to sweep. Per grid point the digital
    // beamformer is eliminated in closed form: with u = F_RF b on the power
    // sphere, J(u) = ||u||^2 - 2 Re(w^H u) + const for w = phi a + (1-phi) c,
    // minimized over range(F_RF) & {||u|| = 1}.
    let phi = 0.35;
    let mut rng = seeded_rng(3001);
    let unit = |m: CMat| {
        let n = frob(&m);
        m.scale(1.0 / n)
    };
    let a = unit(random_cmat(2, 1, &mut rng));
    let c = unit(random_cmat(2, 1, &mut rng));
    let refs = ReferencePair::new(a.clone(), c.clone()).unwrap();
    let w = [
        phi * a[(0, 0)] + (1.0 - phi) * c[(0, 0)],
        phi * a[(1, 0)] + (1.0 - phi) * c[(1, 0)],
    ];
    let w_norm_sq = w[0].norm_sqr() + w[1].norm_sqr();
    let constant = phi * frob(&a).powi(2) + (1.0 - phi) * frob(&c).powi(2);

    let mut best = f64::INFINITY;
    for i in 0..PHASE_GRID {
        let p0 = Complex64::from_polar(1.0, TAU * i as f64 / PHASE_GRID as f64);
        for j in 0..PHASE_GRID {
            let p1 = Complex64::from_polar(1.0, TAU * j as f64 / PHASE_GRID as f64);
            // columns f0 = [1, p0], f1 = [1, p1]
            let j_grid = if (p0 - p1).norm() < 1e-12 {
                // rank one: u = t [1, p0] with |t| = 1/sqrt(2)
                let overlap = (w[0].conj() + w[1].conj() * p0).norm();
                1.0 - 2.0 * overlap / 2f64.sqrt() + constant
            } else {
                // rank two: the whole power sphere is reachable
                1.0 - 2.0 * w_norm_sq.sqrt() + constant
            };
            if j_grid < best {
                best = j_grid;
            }
        }
    }

    let cfg = MadmmConfig::default();
    let init = MadmmState::init(&refs, 2, cfg.alpha0, &mut rng).unwrap();
    let (beamformer, _) = madmm_solve(&refs, phi, &cfg, init).unwrap();
    let j_solver = weighted_objective(&(&beamformer.f_rf * &beamformer.f_bb), &refs, phi);
    assert!(
        (j_solver - best).abs() <= 0.05 * best.abs().max(1e-12),
        "madmm {j_solver} vs brute force {best}"
    );

    // Partially connected, N_t = 2, N_RF = 1, N_s = 1: F_eff is
    // (1/sqrt(2)) [e^{j t1}, e^{j t2}] after absorbing the digital phase, so
    // the feasible set itself is a two-phase grid sweep.
    let phi = 0.6;
    let a = unit(random_cmat(2, 1, &mut rng));
    let c = unit(random_cmat(2, 1, &mut rng));
    let refs = ReferencePair::new(a.clone(), c.clone()).unwrap();
    let mut best = f64::INFINITY;
    let scale = 1.0 / 2f64.sqrt();
    for i in 0..PHASE_GRID {
        let x0 = Complex64::from_polar(scale, TAU * i as f64 / PHASE_GRID as f64);
        let d0 = phi * (x0 - a[(0, 0)]).norm_sqr() + (1.0 - phi) * (x0 - c[(0, 0)]).norm_sqr();
        for j in 0..PHASE_GRID {
            let x1 = Complex64::from_polar(scale, TAU * j as f64 / PHASE_GRID as f64);
            let value = d0
                + phi * (x1 - a[(1, 0)]).norm_sqr()
                + (1.0 - phi) * (x1 - c[(1, 0)]).norm_sqr();
            if value < best {
                best = value;
            }
        }
    }

    let sys = SystemConfig::new(2, 1, 1, 1, 1, 1).unwrap();
    let mask = ConnectionMask::partially_connected(2, 1).unwrap();
    let init = PartialPoint::random(&sys, &mut rng).unwrap();
    let tr = TrConfig::default_for(2, 1, 1);
    let (beamformer, _) = rpmtr_solve(&refs, phi, &mask, &tr, init).unwrap();
    let j_solver = weighted_objective(&(&beamformer.f_rf * &beamformer.f_bb), &refs, phi);
    assert!(
        (j_solver - best).abs() <= 0.05 * best.abs().max(1e-12),
        "rpmtr {j_solver} vs brute force {best}"
    );
    pass(3, "oracle equivalence on tiny instances");
}

// --- 4: convergence reproduction ------------------------------------------------

#[test]
fn acceptance_4_convergence_reproduction() {
    let cfg = ExperimentConfig::resolve_default();
    let scene = cfg.build_scene(&cfg.system).unwrap();

    let madmm = run_design(&cfg, &cfg.system, &scene, 0.5, Structure::FullyConnected, 0).unwrap();
    let hit = madmm
        .report
        .primal_residual_trace
        .iter()
        .position(|&r| r < 1e-3);
    assert!(
        matches!(hit, Some(k) if k < 200),
        "madmm primal residual never fell below 1e-3 in 200 iterations"
    );

    let rpmtr = run_design(
        &cfg,
        &cfg.system,
        &scene,
        0.5,
        Structure::PartiallyConnected,
        0,
    )
    .unwrap();
    let hit = rpmtr.report.grad_norm_trace.iter().position(|&g| g <= 1e-6);
    assert!(
        matches!(hit, Some(k) if k < 50),
        "rpmtr gradient norm never reached 1e-6 within 50 iterations: {:?}",
        rpmtr.report.grad_norm_trace.last()
    );
    pass(4, "convergence reproduction");
}

// --- 5 and 6: shared desk-scale trade-off runs -----------------------------------

struct TradeCell {
    phi: f64,
    seed: u64,
    structure: Structure,
    rate: f64,
    ismr_linear: f64,
    objective: f64,
    zf_rate: f64,
}

static TRADE: OnceLock<Vec<TradeCell>> = OnceLock::new();

const TRADE_PHIS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
const TRADE_SEEDS: u64 = 20;

fn trade_cells() -> &'static [TradeCell] {
    TRADE.get_or_init(|| {
        let cfg = ExperimentConfig::resolve_default();
        let scene = cfg.build_scene(&cfg.system).unwrap();
        let link = LinkBudget::new(0.0).unwrap();
        let mut cells = Vec::new();
        for &phi in &TRADE_PHIS {
            for seed in 0..TRADE_SEEDS {
                for structure in [Structure::FullyConnected, Structure::PartiallyConnected] {
                    let out = run_design(&cfg, &cfg.system, &scene, phi, structure, seed).unwrap();
                    let rate =
                        spectral_efficiency(&out.channel_h, &out.f_eff, &link, cfg.system.n_streams)
                            .unwrap();
                    let zf_rate = spectral_efficiency(
                        &out.channel_h,
                        &out.refs.f_com,
                        &link,
                        cfg.system.n_streams,
                    )
                    .unwrap();
                    cells.push(TradeCell {
                        phi,
                        seed,
                        structure,
                        rate,
                        ismr_linear: ismr(&out.f_eff, &scene).unwrap(),
                        objective: out.objective,
                        zf_rate,
                    });
                }
            }
        }
        cells
    })
}

#[test]
fn acceptance_5_tradeoff_trends() {
    let cells = trade_cells();
    for structure in [Structure::FullyConnected, Structure::PartiallyConnected] {
        let mean = |phi: f64, pick: fn(&TradeCell) -> f64| -> f64 {
            let values: Vec<f64> = cells
                .iter()
                .filter(|c| c.structure == structure && c.phi == phi)
                .map(pick)
                .collect();
            assert_eq!(values.len(), TRADE_SEEDS as usize);
            values.iter().sum::<f64>() / values.len() as f64
        };

        // seed-averaged rate nondecreasing, allowing one adjacent dip <= 2%
        let rates: Vec<f64> = TRADE_PHIS.iter().map(|&p| mean(p, |c| c.rate)).collect();
        let mut violations = 0;
        for pair in rates.windows(2) {
            if pair[1] < pair[0] {
                violations += 1;
                assert!(
                    (pair[0] - pair[1]) <= 0.02 * pair[0],
                    "{structure}: rate dip beyond 2%: {pair:?}"
                );
            }
        }
        assert!(violations <= 1, "{structure}: more than one rate dip: {rates:?}");

        // seed-averaged ISMR nondecreasing
        let ismrs: Vec<f64> = TRADE_PHIS.iter().map(|&p| mean(p, |c| c.ismr_linear)).collect();
        for pair in ismrs.windows(2) {
            assert!(pair[1] >= pair[0], "{structure}: ISMR decreased with phi: {ismrs:?}");
        }
    }

    // The fully-digital rate bounds every hybrid at phi = 1 per seed. The
    // hybrid converges onto the ZF reference itself here, so the measured
    // difference is first-order in the residual beamforming error
    // (|dR| <= ||grad R|| sqrt(J_final), observed <= 3e-6); the tolerance
    // sits a decade above that noise and far below any real rate gap.
    for cell in cells.iter().filter(|c| c.phi == 1.0) {
        assert!(
            cell.zf_rate >= cell.rate - 1e-5,
            "seed {} {}: hybrid rate {} above ZF {}",
            cell.seed,
            cell.structure,
            cell.rate,
            cell.zf_rate
        );
    }
    pass(5, "trade-off trends");
}

#[test]
fn acceptance_6_structure_comparison() {
    let cells = trade_cells();
    for &phi in TRADE_PHIS.iter().filter(|&&p| p <= 0.7) {
        let mut gap_sum = 0.0;
        let mut count = 0;
        for seed in 0..TRADE_SEEDS {
            let j_full = cells
                .iter()
                .find(|c| c.phi == phi && c.seed == seed && c.structure == Structure::FullyConnected)
                .unwrap()
                .objective;
            let j_partial = cells
                .iter()
                .find(|c| {
                    c.phi == phi && c.seed == seed && c.structure == Structure::PartiallyConnected
                })
                .unwrap()
                .objective;
            gap_sum += j_full - j_partial;
            count += 1;
        }
        let mean_gap = gap_sum / count as f64;
        assert!(
            mean_gap <= 1e-6,
            "phi={phi}: fully-connected objective above partially-connected by {mean_gap}"
        );
    }
    pass(6, "structure comparison");
}

// --- 7: radar reference optimality ------------------------------------------------

#[test]
fn acceptance_7_radar_reference_optimality() {
    let cfg = ExperimentConfig::resolve_default();
    let scene = cfg.build_scene(&cfg.system).unwrap();
    let f_rad = dfrc::radar_reference(
        &scene,
        &cfg.system,
        cfg.loading_rel * scene.block_s().trace().re / cfg.system.n_tx as f64,
    )
    .unwrap();
    let best = ismr(&f_rad, &scene).unwrap();

    let n_s = cfg.system.n_streams as f64;
    let mut rng = seeded_rng(7001);
    for _ in 0..10_000 {
        let raw = random_cmat(cfg.system.n_tx, cfg.system.n_streams, &mut rng);
        let f = raw.scale(n_s.sqrt() / frob(&raw));
        let value = ismr(&f, &scene).unwrap();
        assert!(
            best <= value,
            "random precoder beat the reference: {value} < {best}"
        );
    }
    pass(7, "radar reference optimality");
}

// --- 8: beampattern sanity ---------------------------------------------------------

#[test]
fn acceptance_8_beampattern_peaks_on_targets() {
    let cfg = ExperimentConfig::resolve_default();
    let scene = cfg.build_scene(&cfg.system).unwrap();
    let out = run_design(&cfg, &cfg.system, &scene, 0.0, Structure::FullyConnected, 0).unwrap();

    // sample the pattern at 0.25 degrees and collect strict local maxima
    let resolution = 0.25;
    let steps = (180.0 / resolution) as usize;
    let pattern: Vec<(f64, f64)> = (0..=steps)
        .map(|k| {
            let theta_deg = -90.0 + k as f64 * resolution;
            (
                theta_deg,
                dfrc::beampattern(&out.f_eff, theta_deg.to_radians()),
            )
        })
        .collect();
    let mut maxima: Vec<(f64, f64)> = Vec::new();
    for w in pattern.windows(3) {
        if w[1].1 > w[0].1 && w[1].1 > w[2].1 {
            maxima.push(w[1]);
        }
    }
    maxima.sort_by(|a, b| b.1.total_cmp(&a.1));
    assert!(maxima.len() >= 2, "fewer than two local maxima");
    let (first, second) = (maxima[0].0, maxima[1].0);
    let near = |peak: f64, target: f64| (peak - target).abs() <= 2.0;
    let ok = (near(first, -30.0) && near(second, 30.0))
        || (near(first, 30.0) && near(second, -30.0));
    assert!(ok, "two largest maxima at {first} and {second} degrees");
    pass(8, "beampattern peaks on targets");
}
