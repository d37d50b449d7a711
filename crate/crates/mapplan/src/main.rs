use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mapplan::cli::{cmd_kbgen, cmd_plan, cmd_validate, Exit};
use mapplan::config::RunConfig;

#[derive(Parser)]
#[command(name = "mapplan", version, about = "Two-level temporal task planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a KB, and the task descriptions if query files are given.
    Validate(Opts),
    /// Plan, schedule and write the artifacts.
    Plan(Opts),
    /// Generate KB files from task descriptions through a chat model.
    Kbgen(Opts),
}

/// Every option can also be set in the `--config` file under the name in
/// brackets; flags win.
#[derive(Args)]
struct Opts {
    /// `key = value` settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// KB with both levels [kb].
    #[arg(long)]
    kb: Option<String>,
    /// High-level KB [hl].
    #[arg(long)]
    hl: Option<String>,
    /// Low-level KB with the mappings [ll].
    #[arg(long)]
    ll: Option<String>,
    /// [max_depth]
    #[arg(long)]
    max_depth: Option<String>,
    /// [max_expansions]
    #[arg(long)]
    max_expansions: Option<String>,
    /// `iddfs` or `dfs` [search].
    #[arg(long)]
    search: Option<String>,
    /// Successor order: `declaration`, `goal-count` or `projected` [order].
    #[arg(long)]
    order: Option<String>,
    /// Seconds [solve_timeout].
    #[arg(long)]
    solve_timeout: Option<String>,
    /// Alternative total orders to try after an infeasible one [retries].
    #[arg(long)]
    retries: Option<String>,
    /// Output directory [out].
    #[arg(long)]
    out: Option<String>,
    /// `all`, `none` or a subset of `plan,enablers,schedule,stn,bt` [emit].
    #[arg(long)]
    emit: Option<String>,
    /// `whole` or `stepwise` [kms_mode].
    #[arg(long)]
    kms_mode: Option<String>,
    /// `replay` or `http` [transport].
    #[arg(long)]
    transport: Option<String>,
    /// Replay fixture directory [fixtures].
    #[arg(long)]
    fixtures: Option<String>,
    /// Chat completions URL [endpoint].
    #[arg(long)]
    endpoint: Option<String>,
    /// [model]
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key [api_key_env].
    #[arg(long)]
    api_key_env: Option<String>,
    /// [accept_marker]
    #[arg(long)]
    accept_marker: Option<String>,
    /// High-level task description [hl_query].
    #[arg(long)]
    hl_query: Option<String>,
    /// Low-level task description [ll_query].
    #[arg(long)]
    ll_query: Option<String>,
    /// Seconds per model request [request_timeout].
    #[arg(long)]
    request_timeout: Option<String>,
}

impl Opts {
    fn into_config(self) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path).map_err(|e| e.to_string())?;
        }
        let flags = [
            ("kb", self.kb),
            ("hl", self.hl),
            ("ll", self.ll),
            ("max_depth", self.max_depth),
            ("max_expansions", self.max_expansions),
            ("search", self.search),
            ("order", self.order),
            ("solve_timeout", self.solve_timeout),
            ("retries", self.retries),
            ("out", self.out),
            ("emit", self.emit),
            ("kms_mode", self.kms_mode),
            ("transport", self.transport),
            ("fixtures", self.fixtures),
            ("endpoint", self.endpoint),
            ("model", self.model),
            ("api_key_env", self.api_key_env),
            ("accept_marker", self.accept_marker),
            ("hl_query", self.hl_query),
            ("ll_query", self.ll_query),
            ("request_timeout", self.request_timeout),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v).map_err(|e| e.to_string())?;
            }
        }
        Ok(cfg)
    }
}

type CommandFn = fn(&RunConfig, &mut dyn std::io::Write, &mut dyn std::io::Write) -> Exit;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (run, opts): (CommandFn, Opts) = match cli.command {
        Command::Validate(o) => (cmd_validate, o),
        Command::Plan(o) => (cmd_plan, o),
        Command::Kbgen(o) => (cmd_kbgen, o),
    };
    let cfg = match opts.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(Exit::Failure.code() as u8);
        }
    };
    let exit = run(&cfg, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(exit.code() as u8)
}
