//! `fbzone`: command-line front end for the free-boundary protection-zone
//! model. Every run writes a directory holding CSV/JSON data, SVG plots and a
//! manifest that `fbzone replay` can re-execute.

mod commands;
mod error;
mod params;
mod plot;
mod run;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};

use crate::error::CliError;
use crate::params::{keys, Params, COMMANDS};
use crate::run::{RunDir, RunManifest};

type Handler = fn(&Params, &mut RunDir, &mut dyn std::io::Write) -> Result<(), CliError>;

fn handler(command: &str) -> Option<Handler> {
    Some(match command {
        "criticals" => commands::criticals,
        "groundstate" => commands::groundstate,
        "bump" => commands::bump,
        "semiwave" => commands::semiwave,
        "simulate" => commands::simulate_cmd,
        "thresholds" => commands::thresholds,
        "phasediagram" => commands::phasediagram,
        _ => return None,
    })
}

fn is_sweep(command: &str) -> bool {
    matches!(command, "thresholds" | "phasediagram")
}

fn out_arg() -> Arg {
    Arg::new("out").long("out").value_name("DIR").help("run directory (default runs/<command>)")
}

fn cli() -> Command {
    let mut app = Command::new("fbzone")
        .version(run::VERSION)
        .about("Spreading and vanishing in a free-boundary model with a protection zone")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in COMMANDS {
        let mut sub = Command::new(name)
            .about(about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("flat key = value parameter file"))
            .arg(out_arg());
        for k in keys(name) {
            let help =
                if k.default.is_empty() { k.help.to_string() } else { format!("{} [default: {}]", k.help, k.default) };
            sub = sub.arg(Arg::new(k.name).long(k.name).value_name("VALUE").allow_hyphen_values(true).help(help));
        }
        app = app.subcommand(sub);
    }
    app.subcommand(
        Command::new("replay")
            .about("re-execute the run described by a manifest")
            .arg(Arg::new("run").required(true).value_name("RUN_DIR"))
            .arg(out_arg()),
    )
}

fn flags(command: &str, m: &ArgMatches) -> BTreeMap<String, String> {
    keys(command).iter().filter_map(|k| m.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone()))).collect()
}

fn execute(params: &Params, out_dir: &Path) -> Result<(), CliError> {
    let run_fn =
        handler(&params.command).ok_or_else(|| CliError::Usage(format!("unknown command {}", params.command)))?;
    let threads = if is_sweep(&params.command) { params.usize("threads")? } else { 1 };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let mut run = RunDir::create(out_dir, params)?;
    let mut text = Vec::new();
    pool.install(|| run_fn(params, &mut run, &mut text))?;
    run.finish()?;
    std::io::stdout().write_all(&text)?;
    Ok(())
}

fn dispatch(argv: Vec<String>) -> Result<(), CliError> {
    let matches = cli().try_get_matches_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            let _ = e.print();
            std::process::exit(0);
        }
        _ => CliError::Usage(e.to_string().lines().next().unwrap_or("invalid arguments").to_string()),
    })?;
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let out_dir = |default: PathBuf| sub.get_one::<String>("out").map(PathBuf::from).unwrap_or(default);
    if name == "replay" {
        let dir = PathBuf::from(sub.get_one::<String>("run").expect("required"));
        let manifest = RunManifest::load(&dir)?;
        let params = Params::resolve(&manifest.command, None, Vec::new(), manifest.params)?;
        return execute(&params, &out_dir(dir.join("replay")));
    }
    let config = sub.get_one::<String>("config").map(PathBuf::from);
    let params = Params::resolve(name, config.as_deref(), std::env::vars(), flags(name, sub))?;
    execute(&params, &out_dir(Path::new("runs").join(name)))
}

fn main() -> ExitCode {
    match dispatch(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.code() as u8)
        }
    }
}
