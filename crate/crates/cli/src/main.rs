use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dgfilter::{emit_table, Error, RunConfig, RunReport, TableStyle};

#[derive(Parser)]
#[command(name = "dgfilter", version, about = "Filtered DG benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run {
        config: PathBuf,
        /// Override a config entry, e.g. `--set filter.beta=0.4`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run a sequence of doubled meshes and print the error table.
    Convergence {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Tabulate `report.json` files from earlier runs.
    Table {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Style::Errors)]
        style: Style,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Style {
    Errors,
    Extrema,
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) | Error::Io { .. } | Error::InvalidInput(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn summary(r: &RunReport) -> String {
    let mut s = format!(
        "{:?} k={} {}x{} -> {} cells, {} steps to t={}, {:.2} s\n",
        r.benchmark, r.degree, r.nx, r.ny, r.n_cells, r.steps, r.t_final, r.wall_seconds
    );
    s.push_str(&emit_table(std::slice::from_ref(r), TableStyle::Extrema));
    if r.error.is_some() {
        s.push_str(&emit_table(std::slice::from_ref(r), TableStyle::Errors));
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            overrides,
            json,
        } => {
            let cfg = match RunConfig::load(&config, &overrides) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match dgfilter::run(&cfg) {
                Ok(out) => {
                    if json {
                        println!("{}", serde_json::to_string_pretty(&out.report).expect("report serialises"));
                    } else {
                        print!("{}", summary(&out.report));
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Convergence {
            config,
            levels,
            overrides,
        } => {
            let cfg = match RunConfig::load(&config, &overrides) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            match dgfilter::convergence(&cfg, levels) {
                Ok(reports) => {
                    let table = emit_table(&reports, TableStyle::Errors);
                    print!("{table}");
                    if let Some(dir) = &cfg.output_dir {
                        let path = dir.join("convergence.txt");
                        if let Err(e) = std::fs::write(&path, &table) {
                            return fail(Error::Io { path, source: e });
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Table { reports, style } => {
            let mut loaded = Vec::with_capacity(reports.len());
            for p in &reports {
                match RunReport::load(p) {
                    Ok(r) => loaded.push(r),
                    Err(e) => return fail(e),
                }
            }
            let style = match style {
                Style::Errors => TableStyle::Errors,
                Style::Extrema => TableStyle::Extrema,
            };
            print!("{}", emit_table(&loaded, style));
            ExitCode::SUCCESS
        }
    }
}
