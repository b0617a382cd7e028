use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qlmass::embed_h3::embed_surface;
use qlmass::exhaustion::{read_summary, render_report, run_sweep, verify_identities, write_outputs, SweepConfig};
use qlmass::sphere_geometry::coordinate_sphere;
use qlmass::Error;

const EXIT_IDENTITY: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "qlmass", version, about = "Quasi-local mass sweeps over coordinate exhaustions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ε-sweep, write the CSV table and the JSON summary.
    Sweep { config: PathBuf },
    /// Check the spinor and surface identities on the configured family.
    Verify { config: PathBuf },
    /// Embed every coordinate sphere of the sweep and dump the profiles.
    Embed { config: PathBuf },
    /// Print a summary file written by `sweep`.
    Report { record: PathBuf },
}

fn load(path: &PathBuf) -> Result<SweepConfig, ExitCode> {
    SweepConfig::from_path(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) | Error::Io(_) | Error::Json(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::from(EXIT_IDENTITY),
    }
}

fn status(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_IDENTITY)
    }
}

fn sweep(path: &PathBuf) -> Result<ExitCode, ExitCode> {
    let cfg = load(path)?;
    let record = run_sweep(&cfg).map_err(fail)?;
    let (csv, json) = write_outputs(&cfg, &record).map_err(fail)?;
    print!("{}", render_report(&record));
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(status(record.passed))
}

fn verify(path: &PathBuf) -> Result<ExitCode, ExitCode> {
    let cfg = load(path)?;
    let report = verify_identities(&cfg).map_err(fail)?;
    print!("{}", report.render());
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| fail(e.into()))?;
    let out = cfg.output.dir.join(format!("{}.verify.json", cfg.output.prefix));
    let text = serde_json::to_string_pretty(&report).map_err(|e| fail(e.into()))?;
    std::fs::write(&out, text + "\n").map_err(|e| fail(e.into()))?;
    println!("wrote {}", out.display());
    Ok(status(report.passed()))
}

fn embed(path: &PathBuf) -> Result<ExitCode, ExitCode> {
    let cfg = load(path)?;
    let grid = cfg.grid().map_err(fail)?;
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| fail(e.into()))?;
    let mut pass = true;
    for (k, eps) in cfg.epsilons().into_iter().enumerate() {
        let result = coordinate_sphere(&cfg.family, eps, &grid).and_then(|s| embed_surface(&s, cfg.branch.into(), &grid));
        match result {
            Ok(emb) => {
                let ok = emb.isometry_residual <= cfg.tolerances.isometry
                    && emb.hyperboloid_residual <= cfg.tolerances.hyperboloid;
                pass &= ok;
                let file = cfg.output.dir.join(format!("{}.profile{k}.csv", cfg.output.prefix));
                let out = std::fs::File::create(&file).map_err(|e| fail(e.into()))?;
                emb.write_profile_csv(out).map_err(fail)?;
                let (r1, r2) = emb.radii();
                println!(
                    "eps {eps:.6e}  R in [{r1:.6}, {r2:.6}]  isometry {:.2e}  hyperboloid {:.2e}  {}  -> {}",
                    emb.isometry_residual,
                    emb.hyperboloid_residual,
                    if ok { "ok" } else { "FAIL" },
                    file.display()
                );
            }
            Err(e) => {
                pass = false;
                println!("eps {eps:.6e}  failed: {e}");
            }
        }
    }
    Ok(status(pass))
}

fn report(path: &PathBuf) -> Result<ExitCode, ExitCode> {
    let record = read_summary(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    print!("{}", render_report(&record));
    Ok(status(record.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep { config } => sweep(config),
        Command::Verify { config } => verify(config),
        Command::Embed { config } => embed(config),
        Command::Report { record } => report(record),
    };
    result.unwrap_or_else(|code| code)
}
