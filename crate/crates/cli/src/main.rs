mod args;
mod commands;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::de::DeserializeOwned;

use args::{Cli, Command};

/// Exit 2 for bad input or configuration, 3 for failures while running.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<ionqv_core::Error> for CliError {
    fn from(e: ionqv_core::Error) -> Self {
        use ionqv_core::Error::*;
        match e {
            Param(_) | Parse { .. } | Register(_) | NotUnitary(_) | Disconnected | Data(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

/// Deserialize JSON, naming the offending field path on failure.
pub fn from_json_str<T: DeserializeOwned>(src: &str, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(src);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            CliError::Config(format!("{what}: {inner}"))
        } else {
            CliError::Config(format!("{what}: {path}: {inner}"))
        }
    })
}

fn from_value<T: DeserializeOwned>(v: serde_json::Value, what: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{what}: {path}: {}", e.into_inner()))
    })
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if !p.as_os_str().is_empty() && p.is_relative() {
        *p = base.join(&*p);
    }
}

fn rebase_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        rebase(base, p);
    }
}

fn parse_command(src: &str, what: &str) -> Result<Command, CliError> {
    let mut value: serde_json::Value = from_json_str(src, what)?;
    let obj = value.as_object_mut().ok_or_else(|| CliError::Config(format!("{what}: expected a JSON object")))?;
    let tag = match obj.remove("command") {
        Some(serde_json::Value::String(s)) => s,
        Some(_) => return Err(CliError::Config(format!("{what}: command: expected a string"))),
        None => return Err(CliError::Config(format!("{what}: command: missing"))),
    };
    let body = serde_json::Value::Object(std::mem::take(obj));
    Ok(match tag.as_str() {
        "compile" => Command::Compile(from_value(body, what)?),
        "tables" => Command::Tables(from_value(body, what)?),
        "xeb" => Command::Xeb(from_value(body, what)?),
        "bv" => Command::Bv(from_value(body, what)?),
        "repcode" => Command::Repcode(from_value(body, what)?),
        "manifold" => Command::Manifold(from_value(body, what)?),
        other => return Err(CliError::Config(format!("{what}: command: unknown {other:?} (compile, tables, xeb, bv, repcode, manifold)"))),
    })
}

fn load_config(path: &Path) -> Result<Command, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cmd = parse_command(&src, &path.display().to_string())?;
    let base = path.parent().unwrap_or(Path::new("."));
    match &mut cmd {
        Command::Compile(a) => {
            rebase(base, &mut a.target);
            rebase(base, &mut a.register);
            rebase_opt(base, &mut a.out);
        }
        Command::Tables(a) => {
            rebase_opt(base, &mut a.tables);
            rebase_opt(base, &mut a.out);
        }
        Command::Xeb(a) => rebase_opt(base, &mut a.out),
        Command::Bv(a) => rebase_opt(base, &mut a.out),
        Command::Repcode(a) => rebase_opt(base, &mut a.out),
        Command::Manifold(a) => {
            rebase_opt(base, &mut a.level);
            rebase_opt(base, &mut a.out);
        }
        Command::Run(_) => unreachable!("run is not a config command"),
    }
    Ok(cmd)
}

fn dispatch(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Compile(a) => commands::compile(a),
        Command::Tables(a) => commands::tables(a),
        Command::Xeb(a) => commands::xeb(a),
        Command::Bv(a) => commands::bv(a),
        Command::Repcode(a) => commands::repcode(a),
        Command::Manifold(a) => commands::manifold(a),
        Command::Run(r) => dispatch(&load_config(&r.config)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("{}", CliError::Config("threads: must be at least 1".into()));
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("{}", CliError::Runtime(format!("thread pool: {e}")));
            return ExitCode::from(3);
        }
    }
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
