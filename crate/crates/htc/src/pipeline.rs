//! Config-driven pipeline behind the CLI binary: parse a run configuration,
//! execute one task, and write deterministic plot-ready datasets.
//!
//! All CSV output uses 12 significant digits, '.' decimal separators and LF
//! line endings so that two runs of the same config are byte-identical. A
//! JSON metadata sidecar records the full parameter set, the sha256 of the
//! input config and of every produced file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{degeneracy_census, sector_project};
use crate::basis::{enumerate, BasisCatalog, Manifold, TruncationParams};
use crate::eigensolver::{eigh, EigenSystem};
use crate::error::{HtcError, Result};
use crate::hamiltonian::{assemble, assemble_ground};
use crate::model::ModelParams;
use crate::observables::TransitionTable;
use crate::spectra::{
    absorption, dispersion_sweep, emission_fraction, hotband_distribution, linspace,
    peak_clusters, photoluminescence, PlWeighting, PopulationKind, Spectrum,
};

/// Which dataset a run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Absorb,
    Pl,
    Hotband,
    Dispersion,
    Eigen,
    Analyze,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Absorb => "absorb",
            TaskKind::Pl => "pl",
            TaskKind::Hotband => "hotband",
            TaskKind::Dispersion => "dispersion",
            TaskKind::Eigen => "eigen",
            TaskKind::Analyze => "analyze",
        }
    }
}

fn default_omega_min() -> f64 {
    -3.0
}
fn default_omega_max() -> f64 {
    3.0
}
fn default_omega_points() -> usize {
    1201
}
fn default_k_points() -> usize {
    101
}
fn default_max_final_quanta() -> u32 {
    2
}
fn default_weighting() -> PlWeighting {
    PlWeighting::PerState
}
fn default_population() -> PopulationKind {
    PopulationKind::GroundOnly
}
fn default_emission_window() -> f64 {
    0.1
}

/// One fully specified run; unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub truncation: TruncationParams,
    pub task: TaskKind,
    /// Frequency grid (units of ω_v, relative to ω_c at normal incidence).
    #[serde(default = "default_omega_min")]
    pub omega_min: f64,
    #[serde(default = "default_omega_max")]
    pub omega_max: f64,
    #[serde(default = "default_omega_points")]
    pub omega_points: usize,
    /// Pump cutoff for PL (required for task = pl).
    #[serde(default)]
    pub cutoff: Option<f64>,
    #[serde(default = "default_max_final_quanta")]
    pub max_final_quanta: u32,
    #[serde(default = "default_weighting")]
    pub weighting: PlWeighting,
    /// Initial ground-manifold population for absorption tasks.
    #[serde(default = "default_population")]
    pub population: PopulationKind,
    /// In-plane wave-vector grid for dispersion sweeps.
    #[serde(default)]
    pub k_min: f64,
    #[serde(default)]
    pub k_max: Option<f64>,
    #[serde(default = "default_k_points")]
    pub k_points: usize,
    /// Block-diagonalization fast path (P = 1 only).
    #[serde(default)]
    pub use_symmetry: bool,
    /// Audit frequency for the emission-fraction breakdown; defaults to the
    /// lowest significant PL line.
    #[serde(default)]
    pub emission_target: Option<f64>,
    #[serde(default = "default_emission_window")]
    pub emission_window: f64,
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| HtcError::InvalidParameter(format!("config parse error: {e}")))
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub dump_basis: bool,
    pub dump_matrix: bool,
    /// sha256 of the raw config bytes, recorded in the metadata sidecar.
    pub config_sha256: String,
}

#[derive(Debug)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn io_err(path: &Path, e: std::io::Error) -> HtcError {
    HtcError::BadRequest(format!("cannot write {}: {e}", path.display()))
}

/// 12 significant digits, locale-independent.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
    hashes: Vec<(String, String)>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Writer { dir: dir.to_path_buf(), files: Vec::new(), hashes: Vec::new() })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|e| io_err(&path, e))?;
        let digest = Sha256::digest(content.as_bytes());
        self.hashes.push((name.to_string(), format!("{digest:x}")));
        self.files.push(path);
        Ok(())
    }
}

fn spectrum_csv(s: &Spectrum) -> String {
    let mut out = String::from("omega,intensity\n");
    for (w, i) in s.omega_grid.iter().zip(&s.intensity) {
        let _ = writeln!(out, "{},{}", sig12(*w), sig12(*i));
    }
    out
}

fn peaks_csv(s: &Spectrum) -> String {
    let mut out =
        String::from("omega_ji,weight,parent_index,parent_energy,final_index,final_quanta\n");
    for p in &s.peaks {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            sig12(p.omega),
            sig12(p.weight),
            p.parent,
            sig12(p.parent_energy),
            p.final_state,
            p.final_quanta
        );
    }
    out
}

struct Engine {
    catalog: BasisCatalog,
    es: EigenSystem,
    table: TransitionTable,
    matrix_dump: Option<String>,
}

fn build_engine(p: &ModelParams, t: &TruncationParams, keep_matrix: bool) -> Result<Engine> {
    let catalog = enumerate(Manifold::OneExcitation, p.n_molecules, t)?;
    let ground = enumerate(Manifold::Ground, p.n_molecules, t)?;
    let (h, _) = assemble(&catalog, p, p.cavity_freq_normal)?;
    let es = eigh(&h)?;
    let gs = EigenSystem::from_diagonal(&assemble_ground(&ground, p)?);
    let table = TransitionTable::build(&catalog, &es, &ground, &gs, p)?;
    let matrix_dump = keep_matrix.then(|| h.dump());
    Ok(Engine { catalog, es, table, matrix_dump })
}

/// Execute one run and write its files into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunOutput> {
    let p = cfg.model.clone().validated()?;
    let t = cfg.truncation;
    let mut w = Writer::new(out_dir)?;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "task {}: N={} sqrtN*Omega={:.6} lambda2={:.6} V_max={} P={}",
        cfg.task.name(),
        p.n_molecules,
        p.collective_rabi(),
        p.huang_rhys,
        t.total_quanta,
        t.spectators
    );
    let mut normalization: Vec<(String, f64)> = Vec::new();

    let grid = if cfg.omega_points >= 2 && cfg.omega_max > cfg.omega_min {
        linspace(cfg.omega_min, cfg.omega_max, cfg.omega_points)
    } else {
        return Err(HtcError::InvalidParameter(
            "omega grid needs omega_max > omega_min and at least 2 points".into(),
        ));
    };

    match cfg.task {
        TaskKind::Absorb | TaskKind::Hotband => {
            let engine = build_engine(&p, &t, opts.dump_matrix)?;
            dumps(&mut w, &engine, opts)?;
            let population = if cfg.task == TaskKind::Absorb {
                PopulationKind::GroundOnly
            } else {
                cfg.population
            };
            let eta = hotband_distribution(population, &engine.table)?;
            let s = absorption(&engine.table, &eta, &grid)?;
            let peak = s.intensity.iter().cloned().fold(0.0f64, f64::max);
            let name = if cfg.task == TaskKind::Absorb { "absorption.csv" } else { "hotband.csv" };
            w.write(name, &spectrum_csv(&s))?;
            w.write("peaks.csv", &peaks_csv(&s))?;
            normalization.push((name.to_string(), peak));
            let lines = main_lines(&s);
            let _ = writeln!(summary, "absorption lines (omega, relative weight):");
            for (o, wt) in &lines {
                let _ = writeln!(summary, "  {o:+.4}  {wt:.4}");
            }
        }
        TaskKind::Pl => {
            let cutoff = cfg.cutoff.ok_or_else(|| {
                HtcError::InvalidParameter("task pl requires a cutoff".into())
            })?;
            let engine = build_engine(&p, &t, opts.dump_matrix)?;
            dumps(&mut w, &engine, opts)?;
            let s = photoluminescence(
                &engine.table,
                cutoff,
                cfg.max_final_quanta,
                cfg.weighting,
                &grid,
            )?;
            let peak = s.intensity.iter().cloned().fold(0.0f64, f64::max);
            w.write("pl.csv", &spectrum_csv(&s))?;
            w.write("peaks.csv", &peaks_csv(&s))?;
            normalization.push(("pl.csv".to_string(), peak));
            let lines = main_lines(&s);
            let _ = writeln!(summary, "emission lines (omega, relative weight):");
            for (o, wt) in &lines {
                let _ = writeln!(summary, "  {o:+.4}  {wt:.4}");
            }
            let target = cfg.emission_target.or_else(|| lines.first().map(|&(o, _)| o));
            if let Some(target) = target {
                let fr = emission_fraction(
                    &engine.table,
                    cutoff,
                    cfg.max_final_quanta,
                    cfg.weighting,
                    target,
                    cfg.emission_window,
                )?;
                let _ = writeln!(summary, "flux at omega = {target:+.4} by parent offset:");
                for (m, f) in fr {
                    let _ = writeln!(summary, "  m={m}: {:.1}%", 100.0 * f);
                }
            }
        }
        TaskKind::Dispersion => {
            let k_max = cfg.k_max.ok_or_else(|| {
                HtcError::InvalidParameter("task dispersion requires k_max".into())
            })?;
            if !(k_max > cfg.k_min && cfg.k_points >= 2) {
                return Err(HtcError::InvalidParameter(
                    "dispersion needs k_max > k_min and at least 2 points".into(),
                ));
            }
            let ks = linspace(cfg.k_min, k_max, cfg.k_points);
            let pts = dispersion_sweep(&p, &t, &ks, cfg.use_symmetry)?;
            let mut out = String::from("k,omega,photon_weight\n");
            for q in &pts {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    sig12(q.k),
                    sig12(q.omega),
                    sig12(q.photon_weight)
                );
            }
            w.write("dispersion.csv", &out)?;
            let _ = writeln!(
                summary,
                "{} branch points over k in [{:.4}, {:.4}]",
                pts.len(),
                cfg.k_min,
                k_max
            );
        }
        TaskKind::Eigen => {
            let engine = build_engine(&p, &t, opts.dump_matrix)?;
            dumps(&mut w, &engine, opts)?;
            let mut out = String::from("index,energy,photon_weight,gamma\n");
            for j in 0..engine.es.dim() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    j,
                    sig12(engine.es.values[j]),
                    sig12(engine.table.photon_weight[j]),
                    sig12(engine.table.gamma[j])
                );
            }
            w.write("eigen.csv", &out)?;
            let _ = writeln!(
                summary,
                "{} one-excitation eigenstates; lowest {:.6}, highest {:.6}",
                engine.es.dim(),
                engine.es.values[0],
                engine.es.values[engine.es.dim() - 1]
            );
        }
        TaskKind::Analyze => {
            let engine = build_engine(&p, &t, opts.dump_matrix)?;
            dumps(&mut w, &engine, opts)?;
            let census = degeneracy_census(&engine.es.values, 1e-6);
            let sectors = sector_project(&engine.es, &engine.catalog)?;
            let shown = engine.es.dim().min(40);
            let states: Vec<serde_json::Value> = (0..shown)
                .map(|j| {
                    serde_json::json!({
                        "index": j,
                        "energy": engine.es.values[j],
                        "photon_weight": engine.table.photon_weight[j],
                        "gamma": engine.table.gamma[j],
                        "sectors": {
                            "vacuum_photon": sectors[j].vacuum_photon,
                            "sym_phonon_photon": sectors[j].sym_phonon_photon,
                            "nonsym_phonon_photon": sectors[j].nonsym_phonon_photon,
                            "sym_vibronic": sectors[j].sym_vibronic,
                            "nonsym_vibronic": sectors[j].nonsym_vibronic,
                            "two_particle": sectors[j].two_particle,
                        },
                    })
                })
                .collect();
            let census_json: Vec<serde_json::Value> = census
                .iter()
                .map(|&(e, m)| serde_json::json!({"energy": e, "multiplicity": m}))
                .collect();
            let report = serde_json::json!({
                "dimension": engine.es.dim(),
                "degeneracy_census": census_json,
                "states": states,
            });
            w.write("analysis.json", &format!("{report:#}\n"))?;
            let max_mult = census.iter().map(|&(_, m)| m).max().unwrap_or(0);
            let _ = writeln!(
                summary,
                "{} levels, largest multiplicity {max_mult}",
                census.len()
            );
        }
    }

    // metadata sidecar (sorted keys, deterministic)
    let norm_json: serde_json::Value = normalization
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::json!(v)))
        .collect::<serde_json::Map<_, _>>()
        .into();
    let outputs: serde_json::Value = w
        .hashes
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::json!(v)))
        .collect::<serde_json::Map<_, _>>()
        .into();
    let meta = serde_json::json!({
        "task": cfg.task.name(),
        "model": p,
        "truncation": t,
        "config_sha256": opts.config_sha256,
        "outputs": outputs,
        "normalization": norm_json,
    });
    w.write("meta.json", &format!("{meta:#}\n"))?;
    w.write("summary.txt", &summary)?;
    Ok(RunOutput { files: w.files, summary })
}

fn dumps(w: &mut Writer, engine: &Engine, opts: &RunOptions) -> Result<()> {
    if opts.dump_basis {
        w.write("basis.txt", &engine.catalog.dump())?;
    }
    if let Some(m) = &engine.matrix_dump {
        w.write("matrix.txt", m)?;
    }
    Ok(())
}

/// Significant line clusters of a spectrum: ≥ 2% of the strongest cluster.
fn main_lines(s: &Spectrum) -> Vec<(f64, f64)> {
    let clusters = peak_clusters(s, 0.05);
    let wmax = clusters.iter().fold(0.0f64, |a, &(_, w)| a.max(w));
    clusters
        .into_iter()
        .filter(|&(_, w)| w > 0.02 * wmax)
        .map(|(o, w)| (o, w / wmax))
        .collect()
}

/// Exit code classification for the CLI: 1 config error, 2 numerical failure,
/// 3 truncation cap exceeded.
pub fn exit_code(e: &HtcError) -> i32 {
    match e {
        HtcError::InvalidParameter(_) | HtcError::BadRequest(_) => 1,
        HtcError::CatalogTooLarge { .. } => 3,
        HtcError::CatalogMismatch(_)
        | HtcError::EigenNoConvergence { .. }
        | HtcError::Numerical(_)
        | HtcError::NoBracket { .. } => 2,
    }
}
