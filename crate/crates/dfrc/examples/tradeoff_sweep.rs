//! Rate/ISMR trade-off against the weighting factor, seed-averaged over a
//! few channels, for both hybrid structures. Prints a small table and writes
//! the full CSV next to it.
//!
//! ```bash
//! cargo run --release --example tradeoff_sweep -- [n_seeds]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use dfrc::harness::{cmd_sweep, ExperimentConfig};
use dfrc::SweepAxis;

fn main() -> dfrc::Result<()> {
    let n_seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4);
    let seeds: Vec<u64> = (0..n_seeds).collect();
    let config = format!(
        r#"{{
            "phi_grid": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            "snr_grid_db": [0.0],
            "seeds": {seeds:?}
        }}"#
    );
    let cfg = ExperimentConfig::from_json_str(&config, None)?;
    let out = Path::new("tradeoff_sweep.csv");
    cmd_sweep(&cfg, SweepAxis::Phi, out, 1, false)?;

    // aggregate the CSV we just wrote
    let text = std::fs::read_to_string(out)?;
    let mut rate_sum: BTreeMap<(String, String), (f64, f64, usize)> = BTreeMap::new();
    for line in text.lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        let (phi, structure, status) = (f[0], f[2], f[12]);
        if status != "ok" {
            continue;
        }
        let rate: f64 = f[6].parse().unwrap_or(f64::NAN);
        let ismr_db: f64 = f[8].parse().unwrap_or(f64::NAN);
        let entry = rate_sum
            .entry((phi.to_string(), structure.to_string()))
            .or_insert((0.0, 0.0, 0));
        entry.0 += rate;
        entry.1 += ismr_db;
        entry.2 += 1;
    }

    println!("phi    structure      mean rate (bits/s/Hz)   mean ISMR (dB)");
    for ((phi, structure), (rate, ismr, n)) in &rate_sum {
        println!(
            "{phi:<6} {structure:<14} {:<23.4} {:.4}",
            rate / *n as f64,
            ismr / *n as f64
        );
    }
    println!("\nfull data: {}", out.display());
    Ok(())
}
