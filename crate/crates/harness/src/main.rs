use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fourier_penalty::stability::write_eigs_csv;
use fourier_penalty_harness::cases::{CaseId, Scheme};
use fourier_penalty_harness::config::Overrides;
use fourier_penalty_harness::output::{write_pollution_csv, write_report_csv};
use fourier_penalty_harness::study::{self_convergence_study, stability_study};
use fourier_penalty_harness::{
    convergence_study, pollution_study, run_case, HarnessError, Result, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "fpenalty",
    version,
    about = "Fourier active-penalty Maxwell solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CaseFlags {
    /// TOML file with case parameters; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    dt_coeff: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long = "T")]
    t: Option<f64>,
    /// Use the static penalty (g̃ = 0)
    #[arg(long)]
    static_penalty: bool,
    #[arg(long)]
    scheme: Option<String>,
}

impl CaseFlags {
    fn overrides(&self) -> Result<Overrides> {
        let file = match &self.config {
            Some(p) => Overrides::load(p)?,
            None => Overrides::default(),
        };
        let flags = Overrides {
            n: self.n,
            m: self.m,
            dt_coeff: self.dt_coeff,
            eta: self.eta,
            h: self.h,
            l: self.l,
            t_final: self.t,
            active: self.static_penalty.then_some(false),
            scheme: self.scheme.as_deref().map(str::parse).transpose()?,
            ..Default::default()
        };
        Ok(file.merge(flags))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write diagnostics, the final field and errors
    Run {
        case: Option<String>,
        #[command(flatten)]
        flags: CaseFlags,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Grid-refinement study
    Converge {
        case: String,
        #[command(flatten)]
        flags: CaseFlags,
        #[arg(long, value_delimiter = ',', required = true)]
        grids: Vec<usize>,
        /// Compare against a finer run instead of the exact solution
        #[arg(long)]
        reference: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fixed points-per-wavelength sweep over carrier frequencies
    Pollution {
        #[arg(long, default_value_t = 20.0)]
        ppwl: f64,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80")]
        omegas: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_delimiter = ',', default_value = "spectral,fd2,fd4")]
        schemes: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Eigenvalues of the semi-discrete operator and RK4 containment
    Stability {
        case: String,
        #[command(flatten)]
        flags: CaseFlags,
        #[arg(long, default_value_t = 1e-8)]
        slack: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the registered cases
    ListCases,
}

fn parse_case(s: Option<&str>) -> Result<Option<CaseId>> {
    s.map(str::parse).transpose()
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { case, flags, out } => {
            let spec = flags.overrides()?.resolve(parse_case(case.as_deref())?)?;
            let r = run_case(
                &spec,
                RunOptions {
                    divergence_diagnostics: true,
                },
                Some(&out),
            )?;
            print!(
                "{} N={} m={} steps={} dt={:.4e}",
                spec.case, spec.n, spec.m, r.steps, r.dt
            );
            match r.errors {
                Some(e) => println!(" Linf_E={:.6e} Linf_H={:.6e}", e.e, e.h),
                None => println!(),
            }
        }
        Command::Converge {
            case,
            flags,
            grids,
            reference,
            out,
        } => {
            let spec = flags.overrides()?.resolve(parse_case(Some(&case))?)?;
            let report = match reference {
                Some(r) => self_convergence_study(&spec, &grids, r)?,
                None => convergence_study(&spec, &grids)?,
            };
            std::fs::create_dir_all(&out)?;
            write_report_csv(out.join("errors.csv"), &report)?;
            println!("{}", report.summary());
        }
        Command::Pollution {
            ppwl,
            omegas,
            m,
            schemes,
            out,
        } => {
            std::fs::create_dir_all(&out)?;
            let mut rows = Vec::new();
            for s in schemes {
                let scheme: Scheme = s.parse()?;
                rows.extend(pollution_study(ppwl, &omegas, m, scheme)?);
            }
            for r in &rows {
                println!(
                    "{:?} omega0={} N={} Linf={:.6e}",
                    r.scheme, r.omega0, r.n, r.error
                );
            }
            write_pollution_csv(out.join("pollution.csv"), &rows)?;
        }
        Command::Stability {
            case,
            flags,
            slack,
            out,
        } => {
            let spec = flags.overrides()?.resolve(parse_case(Some(&case))?)?;
            let (eigs, report) = stability_study(&spec, slack)?;
            std::fs::create_dir_all(&out)?;
            write_eigs_csv(&eigs, out.join("eigs.csv")).map_err(HarnessError::from)?;
            println!("{}", report.summary());
        }
        Command::ListCases => {
            for c in CaseId::ALL {
                println!("{:<20} {}", c.name(), c.description());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
