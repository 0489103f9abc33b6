//! Reproducible experiment harness: JSON scenario configuration, solver
//! dispatch, and figure-data export (CSV for grids and traces, JSON for
//! matrices and reports).
//!
//! Given the same config and seeds every command writes byte-identical
//! output; wall-clock timings are therefore left out of the files unless
//! explicitly requested.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::beamformer::{FeasibilityReport, HybridBeamformer, SolverReport, SolverStatus, Structure};
use crate::channel::{sample_channel, seeded_rng, spectral_efficiency, zf_precoder, LinkBudget, PowerMode};
use crate::error::{Error, Result};
use crate::madmm::{madmm_solve, MadmmConfig, MadmmState};
use crate::numerics::CMat;
use crate::objective::{weighted_objective, ConnectionMask, PartialPoint, ReferencePair, TradeoffConfig};
use crate::rpmtr::{rpmtr_solve, TrConfig};
use crate::scene::{beampattern, radar_reference, RadarScene, SceneGeometry, SystemConfig};

/// Mixed into the channel seed to give solver initialization an independent
/// stream.
const SOLVER_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Which hybrid structures a sweep covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureChoice {
    Full,
    Partial,
    Both,
}

impl StructureChoice {
    fn structures(self) -> &'static [Structure] {
        match self {
            StructureChoice::Full => &[Structure::FullyConnected],
            StructureChoice::Partial => &[Structure::PartiallyConnected],
            StructureChoice::Both => &[Structure::FullyConnected, Structure::PartiallyConnected],
        }
    }
}

/// Sweep axis of [`cmd_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Phi,
    Snr,
    Nrf,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi" => Ok(SweepAxis::Phi),
            "snr" => Ok(SweepAxis::Snr),
            "nrf" => Ok(SweepAxis::Nrf),
            other => Err(Error::Config(format!(
                "unknown sweep axis '{other}' (expected phi, snr, or nrf)"
            ))),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepAxis::Phi => write!(f, "phi"),
            SweepAxis::Snr => write!(f, "snr"),
            SweepAxis::Nrf => write!(f, "nrf"),
        }
    }
}

// --- configuration file ----------------------------------------------------

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    n_tx: Option<usize>,
    n_rx: Option<usize>,
    n_rf: Option<usize>,
    n_streams: Option<usize>,
    n_clusters: Option<usize>,
    n_rays: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneSection {
    targets_deg: Option<Vec<f64>>,
    mainlobe_halfwidth_deg: Option<f64>,
    guard_deg: Option<f64>,
    grid_step_deg: Option<f64>,
    loading_rel: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MadmmOverrides {
    alpha0: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    n_max: Option<usize>,
    primal_tol: Option<f64>,
    rcg_k_max: Option<usize>,
    rcg_grad_tol: Option<f64>,
    armijo_initial_step: Option<f64>,
    armijo_shrink: Option<f64>,
    armijo_sufficient_decrease: Option<f64>,
    armijo_max_backtracks: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrOverrides {
    delta_bar: Option<f64>,
    delta0: Option<f64>,
    rho_prime: Option<f64>,
    k_max: Option<usize>,
    grad_tol: Option<f64>,
    step_tol: Option<f64>,
    tcg_max_inner: Option<usize>,
    tcg_kappa: Option<f64>,
    tcg_theta: Option<f64>,
}

/// On-disk configuration: a single JSON document, every field optional,
/// unknown keys rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    system: Option<SystemSection>,
    scene: Option<SceneSection>,
    power_mode: Option<PowerMode>,
    phi_grid: Option<Vec<f64>>,
    snr_grid_db: Option<Vec<f64>>,
    nrf_grid: Option<Vec<usize>>,
    seeds: Option<Vec<u64>>,
    structure: Option<StructureChoice>,
    madmm: Option<MadmmOverrides>,
    trust_region: Option<TrOverrides>,
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    /// Target directions, radians.
    pub targets: Vec<f64>,
    pub geometry: SceneGeometry,
    /// Diagonal loading for the radar reference, relative to `tr(A_s)/n_tx`.
    pub loading_rel: f64,
    pub power_mode: PowerMode,
    pub phi_grid: Vec<f64>,
    pub snr_grid_db: Vec<f64>,
    pub nrf_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    pub structure: StructureChoice,
    pub madmm: MadmmConfig,
    tr_overrides: TrOverrides,
}

impl ExperimentConfig {
    /// Desk-scale defaults (the simulation-parameter table).
    pub fn resolve_default() -> Self {
        ConfigFile::default()
            .resolve(None)
            .expect("built-in defaults are valid")
    }

    pub fn from_json_str(text: &str, axis: Option<SweepAxis>) -> Result<Self> {
        let file: ConfigFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        file.resolve(axis)
    }

    pub fn from_json_file(path: &Path, axis: Option<SweepAxis>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json_str(&text, axis)
    }

    /// Trust-region configuration for the given dimensions, with any file
    /// overrides applied on top of the scaled defaults.
    pub fn tr_config_for(&self, system: &SystemConfig) -> TrConfig {
        let o = self.tr_overrides;
        let mut cfg = TrConfig::default_for(system.n_tx, system.n_rf, system.n_streams);
        if let Some(v) = o.delta_bar {
            cfg.delta_bar = v;
        }
        if let Some(v) = o.delta0 {
            cfg.delta0 = v;
        }
        if let Some(v) = o.rho_prime {
            cfg.rho_prime = v;
        }
        if let Some(v) = o.k_max {
            cfg.k_max = v;
        }
        if let Some(v) = o.grad_tol {
            cfg.grad_tol = v;
        }
        if let Some(v) = o.step_tol {
            cfg.step_tol = v;
        }
        if let Some(v) = o.tcg_max_inner {
            cfg.tcg.max_inner = v;
        }
        if let Some(v) = o.tcg_kappa {
            cfg.tcg.kappa = v;
        }
        if let Some(v) = o.tcg_theta {
            cfg.tcg.theta = v;
        }
        cfg
    }

    /// Radar scene for a system (depends only on `n_tx`).
    pub fn build_scene(&self, system: &SystemConfig) -> Result<RadarScene> {
        RadarScene::from_targets(&self.targets, self.geometry, system.n_tx)
    }

    /// Reference pair for one sampled channel under a given system.
    pub fn build_references(
        &self,
        system: &SystemConfig,
        scene: &RadarScene,
        channel: &crate::channel::ChannelRealization,
    ) -> Result<ReferencePair> {
        let f_com = zf_precoder(&channel.h, self.power_mode)?;
        let loading = self.loading_rel * scene.block_s().trace().re / system.n_tx as f64;
        let f_rad = radar_reference(scene, system, loading)?;
        ReferencePair::new(f_com, f_rad)
    }
}

impl ConfigFile {
    /// Applies defaults (and the four-stream preset when sweeping RF
    /// chains: 4 receive antennas, 4 streams, phi = 0.4) and validates.
    pub fn resolve(self, axis: Option<SweepAxis>) -> Result<ExperimentConfig> {
        let nrf_axis = axis == Some(SweepAxis::Nrf);
        let sys = self.system.unwrap_or_default();
        let system = SystemConfig::new(
            sys.n_tx.unwrap_or(32),
            sys.n_rx.unwrap_or(if nrf_axis { 4 } else { 6 }),
            sys.n_rf.unwrap_or(16),
            sys.n_streams.unwrap_or(if nrf_axis { 4 } else { 6 }),
            sys.n_clusters.unwrap_or(10),
            sys.n_rays.unwrap_or(5),
        )?;
        if system.n_rx != system.n_streams {
            return Err(Error::Config(format!(
                "the zero-forcing reference needs n_streams = n_rx, got {} and {}",
                system.n_streams, system.n_rx
            )));
        }

        let scene = self.scene.unwrap_or_default();
        let targets_deg = scene.targets_deg.unwrap_or_else(|| vec![-30.0, 30.0]);
        if targets_deg.is_empty() {
            return Err(Error::Config("scene.targets_deg must be non-empty".into()));
        }
        let geometry = SceneGeometry {
            mainlobe_halfwidth: scene.mainlobe_halfwidth_deg.unwrap_or(5.0).to_radians(),
            guard: scene.guard_deg.unwrap_or(2.0).to_radians(),
            grid_step: scene.grid_step_deg.unwrap_or(0.5).to_radians(),
        };
        let loading_rel = scene.loading_rel.unwrap_or(1e-8);
        if !(loading_rel >= 0.0) {
            return Err(Error::Config("scene.loading_rel must be nonnegative".into()));
        }

        let phi_grid = self
            .phi_grid
            .unwrap_or_else(|| if nrf_axis { vec![0.4] } else { vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0] });
        if phi_grid.is_empty() {
            return Err(Error::Config("phi_grid must be non-empty".into()));
        }
        for &phi in &phi_grid {
            TradeoffConfig::new(phi)?;
        }
        let snr_grid_db = self.snr_grid_db.unwrap_or_else(|| vec![0.0]);
        if snr_grid_db.is_empty() {
            return Err(Error::Config("snr_grid_db must be non-empty".into()));
        }
        for &snr in &snr_grid_db {
            LinkBudget::new(snr)?;
        }
        let nrf_grid = self.nrf_grid.unwrap_or_else(|| vec![4, 8, 16, 32]);
        if nrf_grid.is_empty() {
            return Err(Error::Config("nrf_grid must be non-empty".into()));
        }
        let seeds = self.seeds.unwrap_or_else(|| vec![0]);
        if seeds.is_empty() {
            return Err(Error::Config("seeds must be non-empty".into()));
        }
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        if unique.len() != seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }

        let o = self.madmm.unwrap_or_default();
        let mut madmm = MadmmConfig::default();
        if let Some(v) = o.alpha0 {
            madmm.alpha0 = v;
        }
        if let Some(v) = o.beta {
            madmm.beta = v;
        }
        if let Some(v) = o.gamma {
            madmm.gamma = v;
        }
        if let Some(v) = o.n_max {
            madmm.n_max = v;
        }
        if let Some(v) = o.primal_tol {
            madmm.primal_tol = v;
        }
        if let Some(v) = o.rcg_k_max {
            madmm.rcg.k_max = v;
        }
        if let Some(v) = o.rcg_grad_tol {
            madmm.rcg.grad_tol = v;
        }
        if let Some(v) = o.armijo_initial_step {
            madmm.rcg.armijo.initial_step = v;
        }
        if let Some(v) = o.armijo_shrink {
            madmm.rcg.armijo.shrink = v;
        }
        if let Some(v) = o.armijo_sufficient_decrease {
            madmm.rcg.armijo.sufficient_decrease = v;
        }
        if let Some(v) = o.armijo_max_backtracks {
            madmm.rcg.armijo.max_backtracks = v;
        }
        madmm.validate()?;

        Ok(ExperimentConfig {
            system,
            targets: targets_deg.iter().map(|d| d.to_radians()).collect(),
            geometry,
            loading_rel,
            power_mode: self.power_mode.unwrap_or(PowerMode::Streams),
            phi_grid,
            snr_grid_db,
            nrf_grid,
            seeds,
            structure: self.structure.unwrap_or(StructureChoice::Both),
            madmm,
            tr_overrides: self.trust_region.unwrap_or_default(),
        })
    }
}

// --- design ------------------------------------------------------------------

/// One solved design cell plus its evaluation inputs.
#[derive(Debug)]
pub struct DesignedCell {
    pub system: SystemConfig,
    pub channel_h: CMat,
    pub refs: ReferencePair,
    pub beamformer: HybridBeamformer,
    pub report: SolverReport,
    pub f_eff: CMat,
    pub objective: f64,
    pub algorithm: &'static str,
}

/// Runs the structure-appropriate solver on one (phi, seed) cell.
pub fn run_design(
    cfg: &ExperimentConfig,
    system: &SystemConfig,
    scene: &RadarScene,
    phi: f64,
    structure: Structure,
    seed: u64,
) -> Result<DesignedCell> {
    // sweeps mutate n_rf on copies of the system, so re-check the invariants
    system.validate()?;
    TradeoffConfig::new(phi)?;
    let channel = sample_channel(system, seed);
    let refs = cfg.build_references(system, scene, &channel)?;
    let mut solver_rng = seeded_rng(seed ^ SOLVER_SEED_SALT);

    let (beamformer, report, algorithm) = match structure {
        Structure::FullyConnected => {
            let init = MadmmState::init(&refs, system.n_rf, cfg.madmm.alpha0, &mut solver_rng)?;
            let (b, r) = madmm_solve(&refs, phi, &cfg.madmm, init)?;
            (b, r, "madmm")
        }
        Structure::PartiallyConnected => {
            system.block_size()?; // divisibility check with a clear error
            let mask = ConnectionMask::partially_connected(system.n_tx, system.n_rf)?;
            let init = PartialPoint::random(system, &mut solver_rng)?;
            let tr = cfg.tr_config_for(system);
            let (b, r) = rpmtr_solve(&refs, phi, &mask, &tr, init)?;
            (b, r, "rpmtr")
        }
    };
    let f_eff = beamformer.effective_precoder()?;
    let objective = weighted_objective(&f_eff, &refs, phi);
    Ok(DesignedCell {
        system: *system,
        channel_h: channel.h,
        refs,
        beamformer,
        report,
        f_eff,
        objective,
        algorithm,
    })
}

#[derive(Serialize)]
struct Evaluation {
    snr_db: f64,
    rate_bits_s_hz: f64,
    ismr_linear: f64,
    ismr_db: f64,
}

#[derive(Serialize)]
struct DesignReport<'a> {
    phi: f64,
    structure: Structure,
    algorithm: &'a str,
    seed: u64,
    objective: f64,
    evaluation: Evaluation,
    iterations: usize,
    status: SolverStatus,
    traces: Traces<'a>,
    wall_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    feasibility: Option<&'a FeasibilityReport>,
}

#[derive(Serialize)]
struct Traces<'a> {
    objective: &'a [f64],
    primal_residual: &'a [f64],
    grad_norm: &'a [f64],
}

/// `design` command: solves one cell and writes `beamformer.json` and
/// `report.json` into `out_dir`. The report's evaluation uses the first SNR
/// of the configured grid.
pub fn cmd_design(
    cfg: &ExperimentConfig,
    phi: f64,
    structure: Structure,
    seed: u64,
    out_dir: &Path,
    check: bool,
    timings: bool,
) -> Result<DesignedCell> {
    let scene = cfg.build_scene(&cfg.system)?;
    let cell = run_design(cfg, &cfg.system, &scene, phi, structure, seed)?;

    let snr_db = cfg.snr_grid_db[0];
    let link = LinkBudget::new(snr_db)?;
    let rate = spectral_efficiency(&cell.channel_h, &cell.f_eff, &link, cfg.system.n_streams)?;
    let ismr_linear = crate::scene::ismr(&cell.f_eff, &scene)?;
    let feasibility = check.then(|| cell.beamformer.validate());

    let report = DesignReport {
        phi,
        structure,
        algorithm: cell.algorithm,
        seed,
        objective: cell.objective,
        evaluation: Evaluation {
            snr_db,
            rate_bits_s_hz: rate,
            ismr_linear,
            ismr_db: 10.0 * ismr_linear.log10(),
        },
        iterations: cell.report.iterations,
        status: cell.report.status,
        traces: Traces {
            objective: &cell.report.objective_trace,
            primal_residual: &cell.report.primal_residual_trace,
            grad_norm: &cell.report.grad_norm_trace,
        },
        wall_ms: timings.then_some(cell.report.wall_time_ms),
        feasibility: feasibility.as_ref(),
    };

    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("beamformer.json"), cell.beamformer.to_json()?)?;
    fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(cell)
}

// --- sweep -------------------------------------------------------------------

/// One CSV row of a sweep; `None` fields serialize as empty cells.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub phi: f64,
    pub n_rf: usize,
    pub structure: String,
    pub algorithm: String,
    pub seed: u64,
    pub snr_db: f64,
    pub rate_bits_s_hz: Option<f64>,
    pub ismr_linear: Option<f64>,
    pub ismr_db: Option<f64>,
    pub objective: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_ms: Option<f64>,
    pub status: String,
}

pub const SWEEP_CSV_HEADER: &str =
    "phi,n_rf,structure,algorithm,seed,snr_db,rate_bits_s_hz,ismr_linear,ismr_db,objective,iterations,wall_ms,status";

impl ResultRow {
    fn axis_value(&self, axis: SweepAxis) -> f64 {
        match axis {
            SweepAxis::Phi => self.phi,
            SweepAxis::Snr => self.snr_db,
            SweepAxis::Nrf => self.n_rf as f64,
        }
    }

    fn csv_line(&self) -> String {
        let opt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.phi,
            self.n_rf,
            csv_escape(&self.structure),
            csv_escape(&self.algorithm),
            self.seed,
            self.snr_db,
            opt(&self.rate_bits_s_hz),
            opt(&self.ismr_linear),
            opt(&self.ismr_db),
            opt(&self.objective),
            self.iterations.map(|v| v.to_string()).unwrap_or_default(),
            opt(&self.wall_ms),
            csv_escape(&self.status),
        )
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// One unit of sweep work: a (system, phi, seed, structure) design whose
/// evaluation fans out over `snr_list`.
#[derive(Debug, Clone)]
struct Cell {
    system: SystemConfig,
    phi: f64,
    seed: u64,
    structure: Option<Structure>, // None marks a fully-digital reference cell
    snr_list: Vec<f64>,
}

/// `sweep` command: one design per (grid point x seed x structure), plus
/// fully-digital reference rows, sorted by (axis value, seed) and written as
/// CSV. Cells are independent; `jobs` > 1 executes them on that many threads
/// without changing the output bytes.
pub fn cmd_sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    out_path: &Path,
    jobs: usize,
    timings: bool,
) -> Result<()> {
    let cells = enumerate_cells(cfg, axis);
    let rows = run_cells(cfg, &cells, jobs.max(1), timings);

    let mut rows = rows;
    rows.sort_by(|a, b| {
        a.axis_value(axis)
            .total_cmp(&b.axis_value(axis))
            .then(a.seed.cmp(&b.seed))
            .then(a.structure.cmp(&b.structure))
            .then(a.algorithm.cmp(&b.algorithm))
            .then(a.snr_db.total_cmp(&b.snr_db))
    });

    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut out = fs::File::create(out_path)?;
    writeln!(out, "# dfrc sweep csv schema=1 axis={axis}")?;
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for row in &rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    Ok(())
}

fn enumerate_cells(cfg: &ExperimentConfig, axis: SweepAxis) -> Vec<Cell> {
    let mut cells = Vec::new();
    let structures = cfg.structure.structures();
    match axis {
        SweepAxis::Phi => {
            for &phi in &cfg.phi_grid {
                for &seed in &cfg.seeds {
                    for &structure in structures {
                        cells.push(Cell {
                            system: cfg.system,
                            phi,
                            seed,
                            structure: Some(structure),
                            snr_list: cfg.snr_grid_db.clone(),
                        });
                    }
                    cells.push(Cell {
                        system: cfg.system,
                        phi,
                        seed,
                        structure: None,
                        snr_list: cfg.snr_grid_db.clone(),
                    });
                }
            }
        }
        SweepAxis::Snr => {
            let phi = cfg.phi_grid[0];
            for &seed in &cfg.seeds {
                for &structure in structures {
                    cells.push(Cell {
                        system: cfg.system,
                        phi,
                        seed,
                        structure: Some(structure),
                        snr_list: cfg.snr_grid_db.clone(),
                    });
                }
                cells.push(Cell {
                    system: cfg.system,
                    phi,
                    seed,
                    structure: None,
                    snr_list: cfg.snr_grid_db.clone(),
                });
            }
        }
        SweepAxis::Nrf => {
            let phi = cfg.phi_grid[0];
            for &n_rf in &cfg.nrf_grid {
                let system = SystemConfig {
                    n_rf,
                    ..cfg.system
                };
                for &seed in &cfg.seeds {
                    for &structure in structures {
                        cells.push(Cell {
                            system,
                            phi,
                            seed,
                            structure: Some(structure),
                            snr_list: cfg.snr_grid_db.clone(),
                        });
                    }
                    cells.push(Cell {
                        system,
                        phi,
                        seed,
                        structure: None,
                        snr_list: cfg.snr_grid_db.clone(),
                    });
                }
            }
        }
    }
    cells
}

fn run_cells(cfg: &ExperimentConfig, cells: &[Cell], jobs: usize, timings: bool) -> Vec<ResultRow> {
    if jobs <= 1 || cells.len() <= 1 {
        return cells
            .iter()
            .flat_map(|c| run_cell(cfg, c, timings))
            .collect();
    }
    let chunk = cells.len().div_ceil(jobs);
    let mut rows = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .chunks(chunk)
            .map(|slice| {
                scope.spawn(move || {
                    slice
                        .iter()
                        .flat_map(|c| run_cell(cfg, c, timings))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for handle in handles {
            rows.extend(handle.join().expect("sweep worker panicked"));
        }
    });
    rows
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell, timings: bool) -> Vec<ResultRow> {
    match cell.structure {
        Some(structure) => run_solver_cell(cfg, cell, structure, timings),
        None => run_reference_cell(cfg, cell),
    }
}

fn blank_row(cell: &Cell, structure: &str, algorithm: &str, snr_db: f64) -> ResultRow {
    ResultRow {
        phi: cell.phi,
        n_rf: cell.system.n_rf,
        structure: structure.to_string(),
        algorithm: algorithm.to_string(),
        seed: cell.seed,
        snr_db,
        rate_bits_s_hz: None,
        ismr_linear: None,
        ismr_db: None,
        objective: None,
        iterations: None,
        wall_ms: None,
        status: String::new(),
    }
}

fn run_solver_cell(
    cfg: &ExperimentConfig,
    cell: &Cell,
    structure: Structure,
    timings: bool,
) -> Vec<ResultRow> {
    let structure_name = structure.to_string();
    let outcome = cfg
        .build_scene(&cell.system)
        .and_then(|scene| {
            run_design(cfg, &cell.system, &scene, cell.phi, structure, cell.seed)
                .map(|cell_out| (scene, cell_out))
        });
    match outcome {
        Ok((scene, out)) => {
            let ismr_linear = crate::scene::ismr(&out.f_eff, &scene).ok();
            cell.snr_list
                .iter()
                .map(|&snr_db| {
                    let mut row = blank_row(cell, &structure_name, out.algorithm, snr_db);
                    let link = LinkBudget { snr_db };
                    row.rate_bits_s_hz =
                        spectral_efficiency(&out.channel_h, &out.f_eff, &link, cell.system.n_streams)
                            .ok();
                    row.ismr_linear = ismr_linear;
                    row.ismr_db = ismr_linear.map(|v| 10.0 * v.log10());
                    row.objective = Some(out.objective);
                    row.iterations = Some(out.report.iterations);
                    row.wall_ms = timings.then_some(out.report.wall_time_ms);
                    row.status = "ok".to_string();
                    row
                })
                .collect()
        }
        Err(e) => {
            // record the failure and keep sweeping
            let algorithm = match structure {
                Structure::FullyConnected => "madmm",
                Structure::PartiallyConnected => "rpmtr",
            };
            let mut row = blank_row(cell, &structure_name, algorithm, cell.snr_list[0]);
            row.status = format!("error: {e}");
            vec![row]
        }
    }
}

fn run_reference_cell(cfg: &ExperimentConfig, cell: &Cell) -> Vec<ResultRow> {
    let scene = match cfg.build_scene(&cell.system) {
        Ok(s) => s,
        Err(e) => {
            let mut row = blank_row(cell, "zf_digital", "reference", cell.snr_list[0]);
            row.status = format!("error: {e}");
            return vec![row];
        }
    };
    let channel = sample_channel(&cell.system, cell.seed);
    let refs = match cfg.build_references(&cell.system, &scene, &channel) {
        Ok(r) => r,
        Err(e) => {
            let mut row = blank_row(cell, "zf_digital", "reference", cell.snr_list[0]);
            row.status = format!("error: {e}");
            return vec![row];
        }
    };
    let mut rows = Vec::new();
    for (name, f) in [("zf_digital", &refs.f_com), ("radar_digital", &refs.f_rad)] {
        let ismr_linear = crate::scene::ismr(f, &scene).ok();
        for &snr_db in &cell.snr_list {
            let mut row = blank_row(cell, name, "reference", snr_db);
            let link = LinkBudget { snr_db };
            row.rate_bits_s_hz =
                spectral_efficiency(&channel.h, f, &link, cell.system.n_streams).ok();
            row.ismr_linear = ismr_linear;
            row.ismr_db = ismr_linear.map(|v| 10.0 * v.log10());
            row.objective = Some(weighted_objective(f, &refs, cell.phi));
            row.iterations = Some(0);
            row.status = "ok".to_string();
            rows.push(row);
        }
    }
    rows
}

// --- beampattern -------------------------------------------------------------

/// `beampattern` command: evaluates the stored beamformer's transmit pattern
/// on a uniform grid over [-90, 90] degrees and writes `theta_deg,power_db`.
/// Power is floored at 1e-30 before the dB conversion so the CSV stays finite.
pub fn cmd_beampattern(beamformer_path: &Path, resolution_deg: f64, out_path: &Path) -> Result<()> {
    if !(resolution_deg > 0.0) || resolution_deg > 180.0 {
        return Err(Error::Config(format!(
            "resolution_deg {resolution_deg} must lie in (0, 180]"
        )));
    }
    let text = fs::read_to_string(beamformer_path)?;
    let beamformer = HybridBeamformer::from_json(&text)?;
    let f = &beamformer.f_rf * &beamformer.f_bb;

    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut out = fs::File::create(out_path)?;
    writeln!(out, "# dfrc beampattern csv schema=1")?;
    writeln!(out, "theta_deg,power_db")?;
    let steps = (180.0 / resolution_deg).round() as usize;
    for k in 0..=steps {
        let theta_deg = -90.0 + 180.0 * k as f64 / steps as f64;
        let p = beampattern(&f, theta_deg.to_radians());
        let power_db = 10.0 * p.max(1e-30).log10();
        writeln!(out, "{theta_deg},{power_db}")?;
    }
    Ok(())
}

// --- convergence ---------------------------------------------------------------

/// `convergence` command: per-iteration objective, primal-residual, and
/// gradient-norm columns for the selected solver.
pub fn cmd_convergence(
    cfg: &ExperimentConfig,
    phi: f64,
    structure: Structure,
    seed: u64,
    out_path: &Path,
) -> Result<()> {
    let scene = cfg.build_scene(&cfg.system)?;
    let cell = run_design(cfg, &cfg.system, &scene, phi, structure, seed)?;
    let report = &cell.report;

    if let Some(parent) = out_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut out = fs::File::create(out_path)?;
    writeln!(out, "# dfrc convergence csv schema=1")?;
    writeln!(out, "iter,objective,primal_residual,grad_norm")?;
    for i in 0..report.iterations {
        let objective = report.objective_trace[i];
        let primal = report
            .primal_residual_trace
            .get(i)
            .map(|v| v.to_string())
            .unwrap_or_default();
        let grad = report
            .grad_norm_trace
            .get(i)
            .map(|v| v.to_string())
            .unwrap_or_default();
        writeln!(out, "{},{objective},{primal},{grad}", i + 1)?;
    }
    Ok(())
}

/// Process exit code for an error, per the harness contract: 2 for
/// configuration problems, 4 for I/O, 3 for numeric or solver failures.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::Config(_) | Error::InvalidRegion(_) => 2,
        Error::Io(_) | Error::Json(_) => 4,
        Error::Solver { source, .. } => exit_code_for(source),
        _ => 3,
    }
}
