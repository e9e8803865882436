use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bess_siting::dynsim::Simulator;
use bess_siting::powerflow::{solve_power_flow, DEFAULT_MAX_ITER, DEFAULT_TOL};
use bess_siting::study::{self, ce_trace_csv, pso_trace_csv, ranking_csv, Prepared, StudyConfig};
use bess_siting::vsi::check_criteria;
use bess_siting::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Transient voltage study and BESS placement for multi-machine grids")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Case file (JSON). Defaults to the bundled 39-bus case.
    #[arg(long, global = true)]
    case: Option<PathBuf>,
    /// Study config file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or directory for `study`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ce,
    Pso,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the power flow; prints bus,v_mag,v_ang_deg,p_inj,q_inj.
    Powerflow,
    /// Simulate one bus fault and write the trajectory CSV.
    Simulate {
        #[arg(long, default_value_t = 16)]
        fault_bus: u32,
        /// Comma-separated BESS buses.
        #[arg(long, value_delimiter = ',')]
        bess: Vec<u32>,
    },
    /// Rank the configured contingencies by severity; prints fault_bus,si.
    Rank,
    /// Per-bus criteria summary for one bus fault.
    Check {
        #[arg(long, default_value_t = 16)]
        fault_bus: u32,
        #[arg(long, value_delimiter = ',')]
        bess: Vec<u32>,
    },
    /// Optimize the placement with one method; writes its trace CSV.
    Place {
        #[arg(long, value_enum, default_value_t = Method::Ce)]
        method: Method,
    },
    /// Full study: ranking, CE, PSO, verification; writes every artifact.
    Study,
}

fn config(common: &Common) -> Result<StudyConfig> {
    let mut cfg = match &common.config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::default(),
    };
    if let Some(c) = &common.case {
        cfg.case_path = Some(c.clone());
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => study::write_text(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match cli.command {
        Command::Powerflow => {
            let case = config(common)?.load_case()?;
            let pf = solve_power_flow(&case, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            let mut s = String::from("bus,v_mag,v_ang_deg,p_inj,q_inj\n");
            for (i, b) in case.buses.iter().enumerate() {
                s += &format!("{},{},{},{},{}\n", b.id, pf.v_mag[i], pf.v_ang[i].to_degrees(), pf.p_inj[i], pf.q_inj[i]);
            }
            emit(&common.out, &s)
        }
        Command::Simulate { fault_bus, bess } => {
            let cfg = config(common)?;
            let case = cfg.load_case()?;
            let c = cfg.contingencies.contingency(&case, fault_bus)?;
            let pf = solve_power_flow(&case, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            let traj = Simulator::new(&case, &pf, &bess, &c, &cfg.sim)?.run()?;
            match &common.out {
                Some(p) => study::write_trajectory(p, &traj),
                None => traj
                    .write_csv(std::io::stdout().lock())
                    .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
            }
        }
        Command::Rank => {
            let prep = Prepared::new(config(common)?)?;
            emit(&common.out, &ranking_csv(&prep.ranking))
        }
        Command::Check { fault_bus, bess } => {
            let cfg = config(common)?;
            let case = cfg.load_case()?;
            let c = cfg.contingencies.contingency(&case, fault_bus)?;
            let pf = solve_power_flow(&case, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            let traj = Simulator::new(&case, &pf, &bess, &c, &cfg.sim)?.run()?;
            let mask = check_criteria(&traj, &pf.v_mag, &cfg.criteria, &case, c.t_clear)?;
            let mut s = String::from("bus,violated_samples,first_violation_t,max_deviation\n");
            for (j, b) in mask.bus_ids.iter().enumerate() {
                let first = (0..traj.len()).find(|&k| mask.violated[k][j]).map(|k| traj.times[k].to_string()).unwrap_or_default();
                let dev = traj.v_mag.iter().map(|row| (row[j] - pf.v_mag[j]).abs() / pf.v_mag[j]).fold(0.0, f64::max);
                s += &format!("{b},{},{first},{dev}\n", mask.per_bus[j]);
            }
            emit(&common.out, &s)
        }
        Command::Place { method } => {
            let prep = Prepared::new(config(common)?)?;
            let (buses, value, trace) = match method {
                Method::Ce => {
                    let o = prep.run_ce()?;
                    let pl = o.state.best_placement.expect("at least one evaluation");
                    (pl.bus_ids(&prep.candidates), o.state.best_value, ce_trace_csv(&o.trace, &prep.candidates))
                }
                Method::Pso => {
                    let o = prep.run_pso()?;
                    (o.best_placement.bus_ids(&prep.candidates), o.best_value, pso_trace_csv(&o.trace))
                }
            };
            eprintln!("placement {buses:?} vsi {value}");
            emit(&common.out, &trace)
        }
        Command::Study => {
            let mut cfg = config(common)?;
            if let Some(o) = &common.out {
                cfg.out_dir = o.clone();
            }
            let report = study::run_placement_study(cfg)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
