//! The simulation stack on its own: clustered channel statistics, the
//! zero-forcing precoder, spectral efficiency across SNR, and the radar
//! reference beamformer's ISMR.
//!
//! ```bash
//! cargo run --release --example channel_and_references
//! ```

use dfrc::numerics::frob;
use dfrc::{
    ismr, radar_reference, sample_channel, spectral_efficiency, zf_precoder, LinkBudget,
    PowerMode, RadarScene, SceneGeometry, SystemConfig,
};

fn main() -> dfrc::Result<()> {
    let system = SystemConfig::desk_default();

    // E ||H||_F^2 = N_t N_r for the clustered model
    let trials = 2000;
    let mean_power: f64 = (0..trials)
        .map(|seed| frob(&sample_channel(&system, seed).h).powi(2))
        .sum::<f64>()
        / trials as f64;
    println!(
        "mean ||H||_F^2 over {trials} channels: {mean_power:.2} (N_t N_r = {})",
        system.n_tx * system.n_rx
    );

    let channel = sample_channel(&system, 0);
    let f_com = zf_precoder(&channel.h, PowerMode::Streams)?;
    println!("\nZF precoder rate (seed 0):");
    for snr_db in [-10.0, -5.0, 0.0, 5.0, 10.0] {
        let rate = spectral_efficiency(&channel.h, &f_com, &LinkBudget::new(snr_db)?, system.n_streams)?;
        println!("  {snr_db:>5.1} dB SNR -> {rate:.3} bits/s/Hz");
    }

    let scene = RadarScene::from_targets(
        &[-30f64.to_radians(), 30f64.to_radians()],
        SceneGeometry::default(),
        system.n_tx,
    )?;
    let f_rad = radar_reference(&scene, &system, scene.default_loading())?;
    println!("\nradar reference (targets at -30/+30 deg):");
    println!("  ISMR(F_Rad) = {:.2} dB", 10.0 * ismr(&f_rad, &scene)?.log10());
    println!("  ISMR(F_Com) = {:.2} dB", 10.0 * ismr(&f_com, &scene)?.log10());
    Ok(())
}
