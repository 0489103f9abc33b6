//! Convergence behavior of both solvers on the desk-scale scenario:
//! the MADMM primal residual and the trust-region gradient norm, printed
//! per iteration.
//!
//! ```bash
//! cargo run --release --example convergence_traces
//! ```

use dfrc::harness::ExperimentConfig;
use dfrc::{Structure, SweepAxis};

fn main() -> dfrc::Result<()> {
    let _ = SweepAxis::Phi; // same config type the CLI uses
    let cfg = ExperimentConfig::resolve_default();
    let scene = cfg.build_scene(&cfg.system)?;
    let phi = 0.5;
    let seed = 0;

    for structure in [Structure::FullyConnected, Structure::PartiallyConnected] {
        let cell = dfrc::harness::run_design(&cfg, &cfg.system, &scene, phi, structure, seed)?;
        println!(
            "== {structure} ({}) finished after {} iterations, status {:?}",
            cell.algorithm, cell.report.iterations, cell.report.status
        );
        for i in 0..cell.report.iterations {
            let objective = cell.report.objective_trace[i];
            match structure {
                Structure::FullyConnected => {
                    let primal = cell.report.primal_residual_trace[i];
                    println!("iter {:3}  objective {objective:.6e}  primal residual {primal:.6e}", i + 1);
                }
                Structure::PartiallyConnected => {
                    let grad = cell.report.grad_norm_trace[i];
                    println!("iter {:3}  objective {objective:.6e}  grad norm {grad:.6e}", i + 1);
                }
            }
        }
        println!();
    }
    Ok(())
}
