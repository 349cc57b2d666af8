use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use campus_core::Config;
use campus_harness::measure::{measure, Client};
use campus_harness::report::{plot_csv, read_run, render_table, rows, runs, write_run};
use campus_harness::seed::{seed_database, Profile, INVENTORY_MANAGER, SEED_PASSWORD};
use campus_harness::{ops, race};

/// Seeds, measures and reports on a campus server.
#[derive(Parser)]
#[command(name = "harness", version)]
struct Cli {
    /// Base URL of the running server.
    #[arg(long, global = true, env = "CAMPUS_SERVER", default_value = "http://127.0.0.1:8080")]
    server: String,

    /// Password of the seeded accounts.
    #[arg(long, global = true, env = "CAMPUS_SEED_PASSWORD", default_value = SEED_PASSWORD)]
    password: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fill the database named by DATABASE_PATH with a deterministic dataset.
    Seed {
        #[arg(long, value_enum, default_value = "small")]
        profile: Profile,
        /// Wipe existing data first.
        #[arg(long)]
        force: bool,
        /// Last seeded day (defaults to today).
        #[arg(long)]
        date: Option<chrono::NaiveDate>,
    },
    /// Replay an operation mix in both render modes and write a run file.
    Measure {
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// TOML operation mix; the built-in four operations when omitted.
        #[arg(long)]
        ops: Option<PathBuf>,
        #[arg(long, default_value = "run.csv")]
        out: PathBuf,
        /// Also write one summary line per operation for plotting.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Count only the main response, not the stylesheet, script and
        /// images a first visit also downloads.
        #[arg(long)]
        documents_only: bool,
    },
    /// Print the summary table for a run file.
    Report { run_file: PathBuf },
    /// Issue one unit of an item from many clients at once.
    Race {
        #[arg(long)]
        item: i64,
        #[arg(long, default_value_t = 20)]
        concurrency: usize,
        #[arg(long, default_value = "hostels")]
        area: String,
        #[arg(long, default_value = INVENTORY_MANAGER)]
        user: String,
    },
}

fn print_table(path: &PathBuf) -> anyhow::Result<()> {
    let samples = read_run(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))?;
    print!("{}", render_table(&rows(&runs(&samples))));
    Ok(())
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Seed { profile, force, date } => {
            let config = Config::from_env()?;
            let summary = tokio::task::spawn_blocking(move || seed_database(config, profile.scale(), date, force)).await??;
            print!("{summary}");
        }
        Command::Measure { samples, ops: ops_path, out, plot, documents_only } => {
            if samples == 0 {
                bail!("--samples must be at least 1");
            }
            let operations = match &ops_path {
                Some(p) => ops::load(p)?,
                None => ops::parse(ops::DEFAULT_OPS)?,
            };
            let client = Client::new(&cli.server)?;
            let data = measure(&client, &operations, &cli.password, samples, !documents_only).await?;
            write_run(BufWriter::new(File::create(&out)?), &data)?;
            print_table(&out)?;
            if let Some(p) = plot {
                let samples = read_run(BufReader::new(File::open(&out)?))?;
                std::fs::write(&p, plot_csv(&rows(&runs(&samples))))?;
            }
            eprintln!("samples written to {}", out.display());
        }
        Command::Report { run_file } => print_table(&run_file)?,
        Command::Race { item, concurrency, area, user } => {
            let client = Client::new(&cli.server)?;
            let agent = client.login(&user, &cli.password).await?;
            let r = race::race(&agent, item, concurrency, &area).await?;
            println!(
                "attempts {}  succeeded {}  refused {}  other {:?}  stock {} -> {}",
                r.attempts, r.succeeded, r.refused, r.other, r.before, r.after
            );
            if !r.consistent() {
                bail!("stock movement does not match the successful issuances");
            }
        }
    }
    Ok(())
}
