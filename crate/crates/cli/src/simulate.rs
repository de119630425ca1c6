use crate::failure::{self, Failure};
use crate::{probes, Mode};
use mfd_sim::coupling::{
    run_abstract, run_hybrid, run_monolithic, CouplingError, HybridConfig, Probe, ProbeSample,
};
use mfd_sim::netmodel::parse_network;
use mfd_sim::PortId;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "MFD_SIM_THREADS";

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Network file (JSON).
    pub network: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Hybrid)]
    pub mode: Mode,
    /// Interface relaxation factor.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Lattice steps between interface exchanges.
    #[arg(long)]
    pub theta: Option<u64>,
    /// Interface convergence tolerance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Lattice cells across the narrowest channel.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Distance of the interface sections from the junction, in channel widths.
    #[arg(long)]
    pub interface_distance_widths: Option<f64>,
    #[arg(long)]
    pub max_exchanges: Option<usize>,
    /// Force a port to receive a flow rate instead of a pressure (repeatable).
    #[arg(long = "flow-port", value_name = "PORT")]
    pub flow_ports: Vec<u32>,
    /// Start region lattices from rest instead of the bootstrap solution.
    #[arg(long)]
    pub cold_start: bool,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Probe file, CSV with header `label,x,y` (m).
    #[arg(long)]
    pub probes: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub pressure_pa: f64,
    pub velocity_m_per_s: f64,
}

/// Written to `summary.json` by every run, including failed ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub network: String,
    pub mode: Mode,
    pub status: String,
    pub exit_code: u8,
    pub message: Option<String>,
    pub config: HybridConfig,
    pub regions: Option<usize>,
    pub exchanges: Option<usize>,
    pub final_residual: Option<f64>,
    pub lattice_steps: Option<u64>,
    /// Solver wall-clock time.
    pub elapsed_seconds: f64,
    pub probes: Vec<ProbeRecord>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn config_from(args: &Args, threads: Option<&str>) -> Result<HybridConfig, Failure> {
    let mut c = HybridConfig::default();
    if let Some(v) = args.alpha {
        c.alpha = v;
    }
    if let Some(v) = args.theta {
        c.theta = v;
    }
    if let Some(v) = args.epsilon {
        c.epsilon = v;
    }
    if let Some(v) = args.resolution {
        c.resolution = v;
    }
    if let Some(v) = args.interface_distance_widths {
        c.interface_distance_widths = v;
    }
    if let Some(v) = args.max_exchanges {
        c.max_exchanges = v;
    }
    c.warm_start = !args.cold_start;
    c.flow_ports = args.flow_ports.iter().map(|&p| PortId(p)).collect();
    if let Some(t) = threads {
        c.threads = Some(t.trim().parse().map_err(|_| {
            Failure::Invalid(format!(
                "{THREADS_VAR} must be a positive integer, got {t:?}"
            ))
        })?);
    }
    if args.mode == Mode::Cfd && !c.flow_ports.is_empty() {
        return Err(Failure::Invalid(
            "--flow-port applies to hybrid and abstract runs only".into(),
        ));
    }
    c.check()?;
    Ok(c)
}

fn probe_csv(records: &[ProbeRecord]) -> String {
    let mut out = String::from("label,x,y,pressure_pa,velocity_m_per_s\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{:.5e},{:.5e},{:.5e},{:.5e}",
            r.label, r.x, r.y, r.pressure_pa, r.velocity_m_per_s
        );
    }
    out
}

fn record(
    probes: &[Probe],
    mut sample: impl FnMut(&Probe) -> Result<ProbeSample, CouplingError>,
) -> Result<Vec<ProbeRecord>, Failure> {
    probes
        .iter()
        .map(|p| {
            let s = sample(p)?;
            Ok(ProbeRecord {
                label: p.label.clone(),
                x: p.point.x,
                y: p.point.y,
                pressure_pa: s.pressure,
                velocity_m_per_s: s.velocity,
            })
        })
        .collect()
}

struct Run<'a> {
    args: &'a Args,
    summary: Summary,
    log: String,
}

impl Run<'_> {
    fn file(&self, name: &str, text: &str) -> Result<(), Failure> {
        failure::write(&self.args.out.join(name), text)
    }

    fn note_state(&mut self, e: &CouplingError) {
        if let Some(state) = e.state() {
            self.summary.exchanges = Some(state.exchange_count);
            self.summary.final_residual = state.residual_history.last().copied().and_then(finite);
        }
    }

    fn execute(&mut self) -> Result<(), Failure> {
        let args = self.args;
        let text = failure::read(&args.network)?;
        let network = parse_network(&text).map_err(|e| Failure::parse(&args.network, e))?;
        let probes = match &args.probes {
            Some(path) => probes::parse(&failure::read(path)?, path)?,
            None => Vec::new(),
        };
        let threads = std::env::var(THREADS_VAR).ok();
        let config = config_from(args, threads.as_deref())?;
        self.summary.config = config.clone();

        let started = Instant::now();
        let outcome = match args.mode {
            Mode::Hybrid => run_hybrid(&network, &config),
            Mode::Abstract => run_abstract(&network, &config),
            Mode::Cfd => {
                let result = run_monolithic(&network, &config).inspect_err(|e| {
                    self.summary.elapsed_seconds = started.elapsed().as_secs_f64();
                    self.log.push_str(&format!("{e}\n"));
                })?;
                self.summary.elapsed_seconds = result.elapsed.as_secs_f64();
                self.summary.lattice_steps = Some(result.steady.steps);
                self.summary.regions = Some(1);
                let _ = writeln!(
                    self.log,
                    "steps={} change={:.6e} steady={}",
                    result.steady.steps, result.steady.change, result.steady.converged
                );
                self.file("field.csv", &result.macroscopics.to_csv())?;
                self.file("field.vtk", &result.macroscopics.to_vtk())?;
                let records = record(&probes, |p| result.sample(p))?;
                self.file("probes.csv", &probe_csv(&records))?;
                self.summary.probes = records;
                return Ok(());
            }
        };
        let result = match outcome {
            Ok(r) => r,
            Err(e) => {
                self.summary.elapsed_seconds = started.elapsed().as_secs_f64();
                self.note_state(&e);
                let _ = writeln!(self.log, "{e}");
                return Err(e.into());
            }
        };
        self.summary.elapsed_seconds = result.elapsed.as_secs_f64();
        self.summary.regions = Some(result.regions.len());
        self.summary.exchanges = Some(result.state.exchange_count);
        self.summary.final_residual = result
            .state
            .residual_history
            .last()
            .copied()
            .and_then(finite);
        if args.mode == Mode::Hybrid {
            self.summary.lattice_steps = Some(result.state.exchange_count as u64 * config.theta);
        }
        for line in &result.log {
            let _ = writeln!(self.log, "{line}");
        }
        self.file("pressures.csv", &result.solution.pressures_csv())?;
        self.file("flows.csv", &result.solution.flows_csv())?;
        for (id, m) in &result.regions {
            self.file(&format!("region_{}.csv", id.0), &m.to_csv())?;
            self.file(&format!("region_{}.vtk", id.0), &m.to_vtk())?;
        }
        let records = record(&probes, |p| result.sample(p))?;
        self.file("probes.csv", &probe_csv(&records))?;
        self.summary.probes = records;
        Ok(())
    }
}

pub fn simulate(args: &Args) -> Result<(), Failure> {
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let mut run = Run {
        args,
        summary: Summary {
            network: args.network.display().to_string(),
            mode: args.mode,
            status: "converged".into(),
            exit_code: 0,
            message: None,
            config: HybridConfig::default(),
            regions: None,
            exchanges: None,
            final_residual: None,
            lattice_steps: None,
            elapsed_seconds: 0.0,
            probes: Vec::new(),
        },
        log: String::new(),
    };
    let outcome = run.execute();
    if let Err(f) = &outcome {
        run.summary.status = f.status().into();
        run.summary.exit_code = f.code();
        run.summary.message = Some(f.to_string());
    }
    let summary = serde_json::to_string_pretty(&run.summary).expect("summary serializes") + "\n";
    run.file("summary.json", &summary)?;
    run.file("run.log", &run.log)?;
    outcome
}

pub fn load_summary(path: &Path) -> Result<Summary, Failure> {
    serde_json::from_str(&failure::read(path)?).map_err(|e| Failure::parse(path, e))
}
