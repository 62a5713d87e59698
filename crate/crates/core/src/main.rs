use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kinchemo::harness::{
    comparison_lineup, convergence_study, evolution_study, regime_sweep, run, scheme_comparison,
    write_comparison_csv, write_convergence_csv, write_evolution_csv, write_snapshot_csv,
    write_sweep_csv, DtPolicy, RunConfig, Scheme,
};
use kinchemo::Result;

/// Kinetic chemotaxis solvers: micro-macro, explicit kinetic, odd-even and
/// Keller-Segel schemes in one space and one velocity dimension.
#[derive(Parser)]
#[command(name = "kinchemo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme and write the final (n, S) profile as CSV.
    Run {
        #[command(flatten)]
        common: Common,
        /// Write the run diagnostics as JSON to this file.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Grid refinement study (Nx,error,order per ε).
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        eps_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        nx_list: Vec<usize>,
        /// Comparison time (defaults to the config's end time).
        #[arg(long)]
        t: Option<f64>,
    },
    /// Final densities across ε next to the Keller-Segel limit.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1,0.125,0.03125,0.0078125,0.001953125")]
        eps_list: Vec<f64>,
    },
    /// Final densities of several schemes at one ε with pairwise distances.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Schemes to compare, all with the configured step policy
        /// (default: the standard lineup for the chosen ε).
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<Scheme>,
    },
    /// Density snapshots over time.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2,2.5,3")]
        times: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nv: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// diffusive_sq, kinetic, macroscopic, odd_even_macroscopic or fixed:<dt>
    #[arg(long)]
    dt: Option<DtPolicy>,
    #[arg(long)]
    d_s: Option<f64>,
    #[arg(long)]
    total_mass: Option<f64>,
    /// Output CSV file (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.scheme {
            cfg.scheme = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.nx {
            cfg.nx = v;
        }
        if let Some(v) = self.nv {
            cfg.nv = v;
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.dt {
            cfg.dt_policy = v;
        }
        if let Some(v) = self.d_s {
            cfg.d_s = v;
        }
        if let Some(v) = self.total_mass {
            cfg.total_mass = v;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Returns whether any run blew up.
fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Run {
            common,
            diagnostics,
        } => {
            let cfg = common.config()?;
            let tr = run(&cfg)?;
            let mut out = sink(cfg.output.as_deref())?;
            write_snapshot_csv(&mut out, &tr.x, tr.last())?;
            out.flush()?;
            if let Some(path) = diagnostics {
                let json = serde_json::json!({
                    "config": cfg,
                    "dt": tr.dt,
                    "blow_up": tr.blow_up,
                    "diagnostics": tr.diagnostics,
                });
                std::fs::write(path, serde_json::to_string_pretty(&json)?)?;
            }
            if let Some(b) = tr.blow_up {
                eprintln!("blew up at t = {} (step {})", b.t, b.step);
            }
            Ok(tr.blow_up.is_some())
        }
        Command::Converge {
            common,
            eps_list,
            nx_list,
            t,
        } => {
            let cfg = common.config()?;
            let reports = convergence_study(&cfg, &eps_list, &nx_list, t.unwrap_or(cfg.t_end))?;
            let mut out = sink(cfg.output.as_deref())?;
            let mut blew_up = false;
            for rep in &reports {
                writeln!(out, "# scheme={} eps={} t={}", rep.scheme, rep.eps, rep.t)?;
                write_convergence_csv(&mut out, rep)?;
                blew_up |= rep.errors().iter().any(|e| e.is_nan());
            }
            out.flush()?;
            Ok(blew_up)
        }
        Command::Sweep { common, eps_list } => {
            let cfg = common.config()?;
            let rep = regime_sweep(&cfg, &eps_list)?;
            let mut out = sink(cfg.output.as_deref())?;
            write_sweep_csv(&mut out, &rep)?;
            out.flush()?;
            for e in &rep.entries {
                eprintln!("eps = {}: distance to Keller-Segel {:.3e}", e.eps, e.distance_to_ks);
            }
            Ok(rep.entries.iter().any(|e| e.blow_up.is_some()))
        }
        Command::Compare { common, schemes } => {
            let cfg = common.config()?;
            let lineup: Vec<(Scheme, DtPolicy)> = if schemes.is_empty() {
                comparison_lineup(cfg.eps)
            } else {
                schemes.iter().map(|&s| (s, cfg.dt_policy)).collect()
            };
            let rep = scheme_comparison(&cfg, &lineup)?;
            let mut out = sink(cfg.output.as_deref())?;
            write_comparison_csv(&mut out, &rep)?;
            out.flush()?;
            for (a, b, d) in &rep.distances {
                eprintln!("{a} vs {b}: {d:.3e}");
            }
            Ok(rep.profiles.iter().any(|p| p.2.is_some()))
        }
        Command::Evolve { common, times } => {
            let cfg = common.config()?;
            let rep = evolution_study(&cfg, &times)?;
            let mut out = sink(cfg.output.as_deref())?;
            write_evolution_csv(&mut out, &rep)?;
            out.flush()?;
            for (w, d) in rep.snapshots.windows(2).zip(&rep.differences) {
                eprintln!("|n({}) - n({})| = {d:.3e}", w[1].0, w[0].0);
            }
            Ok(rep.blow_up.is_some())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors; code 2 is reserved for blow-ups.
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
