use std::io::{self, BufRead, Read, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use chrono::{DateTime, NaiveDate, Utc};
use clap::{Parser, Subcommand};
use mylibrary::app::App;
use mylibrary::clock::{Clock, FixedClock, SystemClock};
use mylibrary::config::Config;
use mylibrary::http::{self, Shared};
use mylibrary::scheduler;
use mylibrary::store::load_seed;
use mylibrary_core::callno::{CallNumber, RangeList};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "mylibrary", version, about = "Personalized library portal service")]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `data_dir` from the configuration.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service and the weekly alert scheduler.
    Serve {
        #[arg(long)]
        listen: Option<String>,
        /// Do not schedule weekly digests in this process.
        #[arg(long)]
        no_scheduler: bool,
    },
    /// Call-number tools; call numbers are read one per line from stdin.
    Callno {
        #[command(subcommand)]
        action: CallnoAction,
    },
    /// Send this week's current-awareness digests.
    RunWeekly {
        /// Evaluation time, RFC 3339 or YYYY-MM-DD (defaults to now).
        #[arg(long)]
        now: Option<String>,
    },
    /// Load acquisitions from a tab-separated file.
    Ingest { file: PathBuf },
    /// Load disciplines, librarians, resources, recommendations and messages.
    Seed { file: PathBuf },
    Admin {
        #[command(subcommand)]
        action: AdminAction,
    },
}

#[derive(Subcommand)]
enum CallnoAction {
    /// Print the canonical form and sort key of each call number.
    Parse,
    /// Print the input lines in shelf order.
    Sort,
    /// Print the lines whose call number falls in the given ranges.
    Match {
        #[arg(long)]
        ranges: String,
    },
}

#[derive(Subcommand)]
enum AdminAction {
    /// Create or reset an administrator account.
    AddUser {
        #[arg(long)]
        username: String,
        /// Read the password from the first line of stdin.
        #[arg(long, required = true)]
        password_stdin: bool,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(dir) = &cli.data_dir {
        config.data_dir = dir.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Callno { action } => callno(action),
        Command::Serve { listen, no_scheduler } => {
            let mut config = load_config(&cli)?;
            if let Some(listen) = listen {
                config.listen = listen.clone();
            }
            serve(config, !no_scheduler)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::RunWeekly { now } => {
            let config = load_config(&cli)?;
            let clock: Arc<dyn Clock> = match now {
                Some(text) => Arc::new(FixedClock::new(parse_now(text, &config)?)),
                None => Arc::new(SystemClock),
            };
            let app = App::from_config(&config, clock)?;
            let report = app.weekly_run()?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Ingest { file } => {
            let config = load_config(&cli)?;
            let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let app = App::from_config(&config, Arc::new(SystemClock))?;
            let report = app.store.ingest_tsv(&text)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Seed { file } => {
            let config = load_config(&cli)?;
            let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let app = App::from_config(&config, Arc::new(SystemClock))?;
            let report = load_seed(&app.store, &text)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Admin {
            action: AdminAction::AddUser { username, .. },
        } => {
            let config = load_config(&cli)?;
            let mut password = String::new();
            io::stdin().lock().read_line(&mut password)?;
            let password = password.trim_end_matches(['\r', '\n']);
            let app = App::from_config(&config, Arc::new(SystemClock))?;
            app.add_admin(username, password)?;
            eprintln!("administrator `{username}` saved");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_now(text: &str, config: &Config) -> anyhow::Result<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Ok(t.to_utc());
    }
    if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        let local = d
            .and_hms_opt(12, 0, 0)
            .expect("noon exists")
            .and_local_timezone(config.utc_offset)
            .single()
            .expect("fixed offsets are unambiguous");
        return Ok(local.to_utc());
    }
    bail!("--now must be RFC 3339 (2026-10-19T06:00:00Z) or a date (2026-10-19)")
}

fn serve(config: Config, scheduler_enabled: bool) -> anyhow::Result<()> {
    let addr: SocketAddr = config
        .listen
        .parse()
        .with_context(|| format!("bad listen address `{}`", config.listen))?;
    let app = Arc::new(App::from_config(&config, Arc::new(SystemClock))?);
    let shared = Shared::new(Arc::clone(&app))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        if scheduler_enabled && config.weekly.enabled {
            tokio::spawn(scheduler::weekly_loop(Arc::clone(&app), config.weekly.clone()));
        }
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!(%addr, data_dir = %config.data_dir.display(), "listening");
        http::serve(shared, listener, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        Ok(())
    })
}

fn read_stdin_lines() -> anyhow::Result<Vec<String>> {
    let mut text = String::new();
    io::stdin().read_to_string(&mut text)?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn callno(action: &CallnoAction) -> anyhow::Result<ExitCode> {
    let lines = read_stdin_lines()?;
    let ranges = match action {
        CallnoAction::Match { ranges } => {
            Some(RangeList::parse(ranges).map_err(|e| anyhow::anyhow!("--ranges: {e}"))?)
        }
        _ => None,
    };
    let mut failed = false;
    let mut parsed = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        match CallNumber::parse(line) {
            Ok(c) => parsed.push((c, line)),
            Err(e) => {
                eprintln!("line {}: {line:?}: {e}", i + 1);
                failed = true;
            }
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match action {
        CallnoAction::Parse => {
            for (c, _) in &parsed {
                let key: String = c.sort_key().as_bytes().iter().map(|b| format!("{b:02x}")).collect();
                writeln!(out, "{c}\t{key}")?;
            }
        }
        CallnoAction::Sort => {
            parsed.sort_by(|a, b| a.0.cmp(&b.0));
            for (_, line) in &parsed {
                writeln!(out, "{line}")?;
            }
        }
        CallnoAction::Match { .. } => {
            let ranges = ranges.expect("parsed above");
            for (c, line) in &parsed {
                if ranges.contains(c) {
                    writeln!(out, "{line}")?;
                }
            }
        }
    }
    Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}
