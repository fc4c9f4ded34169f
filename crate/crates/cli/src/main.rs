mod args;
mod commands;
mod error;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use sha2::{Digest, Sha256};

use args::{Cli, Command};
use error::{usage, Result};

/// Appends `--key value` for every key of the `--config` TOML table that is
/// not already on the command line. `gen-corpus` reads its config itself.
fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let Some(sub) = strs.iter().skip(1).find(|a| !a.starts_with('-')) else {
        return Ok(argv);
    };
    if sub == "gen-corpus" {
        return Ok(argv);
    }
    let path = strs.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            strs.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    });
    let Some(path) = path else {
        return Ok(argv);
    };
    let raw = std::fs::read_to_string(&path).map_err(|e| usage(format!("{path}: {e}")))?;
    let table: toml::Table = raw.parse().map_err(|e| usage(format!("{path}: {e}")))?;
    let mut out = argv;
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        if strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        let scalar = |v: &toml::Value| -> Result<Option<String>> {
            Ok(match v {
                toml::Value::String(s) => Some(s.clone()),
                toml::Value::Integer(n) => Some(n.to_string()),
                toml::Value::Float(x) => Some(x.to_string()),
                toml::Value::Boolean(_) => None,
                _ => return Err(usage(format!("{path}: unsupported value for {key}"))),
            })
        };
        match &value {
            toml::Value::Boolean(true) => out.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                for v in items {
                    if let Some(s) = scalar(v)? {
                        out.push(format!("{flag}={s}").into());
                    }
                }
            }
            v => {
                if let Some(s) = scalar(v)? {
                    out.push(format!("{flag}={s}").into());
                }
            }
        }
    }
    Ok(out)
}

/// SHA-256 of the parsed arguments as JSON.
fn fingerprint(cmd: &Command) -> String {
    let json = serde_json::to_string(cmd).expect("arguments serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

fn run(cmd: &Command) -> Result<()> {
    match cmd {
        Command::GenCorpus(a) => commands::gen_corpus(a),
        Command::Prepare(a) => commands::prepare(a),
        Command::WbcExtract(a) => commands::wbc_extract(a),
        Command::BuildConcepts(a) => commands::build_concepts(a),
        Command::Featurize(a) => commands::featurize(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::LearningCurve(a) => commands::learning_curve(a),
        Command::Report(a) => commands::report(a),
    }
}

fn main() -> ExitCode {
    let argv = match merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        })
        .format_timestamp(None)
        .init();
    println!("fingerprint: {}", fingerprint(&cli.command));
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
