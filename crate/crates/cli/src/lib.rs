//! The `forge` command line: scaffold, check, format, build, serve and
//! publish `.buml` models.
//!
//! Exit codes: 0 success, 1 the model has error diagnostics, 2 usage error,
//! 3 I/O or network error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use forge_core::checker::{check_model, has_errors};
use forge_core::pipeline::{build_project, BuildError, BuildOptions, Part};
use forge_core::{render_diagnostic, scaffold, Diagnostic, GeneratedProject, Model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "forge", version, about = "Generate smart web applications from .buml models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a starter model (`library` or `blank`) as `<template>.buml`.
    New {
        template: String,
        #[arg(default_value = ".")]
        dir: PathBuf,
    },
    /// Report diagnostics for a model.
    Check { file: PathBuf },
    /// Rewrite a model in canonical form.
    Fmt { file: PathBuf },
    /// Check a model and generate the backend, frontend, agent and manifest.
    Build {
        file: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        /// Part to leave out (repeatable): backend, frontend or agent.
        #[arg(long = "skip")]
        skip: Vec<Part>,
        /// Directory holding a built webkit.js for the frontend.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
    /// Serve the CRUD API of a model.
    Serve {
        file: PathBuf,
        #[arg(long, default_value_t = forge_core::backend::BACKEND_DEFAULT_PORT)]
        port: u16,
    },
    /// Agent commands.
    Agent {
        #[command(subcommand)]
        command: AgentCommand,
    },
    /// Print the OpenAPI document of a model.
    Openapi { file: PathBuf },
    /// Publish a built project directory to a new repository.
    Publish {
        dir: PathBuf,
        #[arg(long)]
        repo: String,
    },
}

#[derive(Debug, Subcommand)]
enum AgentCommand {
    /// Serve every agent of a model over WebSocket.
    Serve {
        file: PathBuf,
        #[arg(long, default_value_t = forge_core::agent_gen::AGENT_DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value_t = forge_core::agent::DEFAULT_THRESHOLD)]
        threshold: f64,
    },
}

/// A failed command: the exit code plus what to print on stderr.
struct Failure {
    code: i32,
    message: Option<String>,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Failure { code: EXIT_IO, message: Some(message.into()) }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: Some(message.into()) }
    }

    /// Diagnostics were already printed.
    fn diagnostics() -> Self {
        Failure { code: EXIT_DIAGNOSTICS, message: None }
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::New { template, dir } => cmd_new(&template, &dir),
        Command::Check { file } => cmd_check(&file),
        Command::Fmt { file } => cmd_fmt(&file),
        Command::Build { file, out, skip, assets } => cmd_build(&file, &out, skip, assets),
        Command::Serve { file, port } => cmd_serve(&file, port),
        Command::Agent { command: AgentCommand::Serve { file, port, threshold } } => {
            cmd_agent_serve(&file, port, threshold)
        }
        Command::Openapi { file } => cmd_openapi(&file),
        Command::Publish { dir, repo } => cmd_publish(&dir, &repo),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            if let Some(message) = failure.message {
                eprintln!("forge: {message}");
            }
            failure.code
        }
    }
}

fn read_source(file: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(file).map_err(|e| Failure::io(format!("cannot read {}: {e}", file.display())))
}

fn print_diagnostics(diags: &[Diagnostic], file: &Path) {
    let name = file.display().to_string();
    for d in diags {
        eprintln!("{}", render_diagnostic(d, &name));
    }
}

/// Parses `file`, printing parse diagnostics on failure.
fn parse_file(file: &Path) -> Result<(String, Model), Failure> {
    let source = read_source(file)?;
    match forge_core::parse_model(&source) {
        Ok(model) => Ok((source, model)),
        Err(diags) => {
            print_diagnostics(&diags, file);
            Err(Failure::diagnostics())
        }
    }
}

/// Parses and checks `file`; warnings are printed, errors fail.
fn load_checked(file: &Path) -> Result<(String, Model), Failure> {
    let (source, model) = parse_file(file)?;
    let diags = check_model(&model);
    print_diagnostics(&diags, file);
    if has_errors(&diags) {
        return Err(Failure::diagnostics());
    }
    Ok((source, model))
}

fn cmd_new(template: &str, dir: &Path) -> CmdResult {
    let Some(source) = scaffold::template(template) else {
        let names: Vec<&str> = scaffold::TEMPLATES.iter().map(|(n, _)| *n).collect();
        return Err(Failure::usage(format!("unknown template '{template}' (available: {})", names.join(", "))));
    };
    let target = dir.join(format!("{template}.buml"));
    if target.exists() {
        return Err(Failure::io(format!("{} already exists", target.display())));
    }
    std::fs::create_dir_all(dir)
        .and_then(|()| std::fs::write(&target, source))
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", target.display())))?;
    println!("created {}", target.display());
    Ok(())
}

fn cmd_check(file: &Path) -> CmdResult {
    load_checked(file).map(|_| ())
}

fn cmd_fmt(file: &Path) -> CmdResult {
    let (source, model) = parse_file(file)?;
    let formatted = forge_core::print_model(&model);
    if formatted != source {
        std::fs::write(file, formatted).map_err(|e| Failure::io(format!("cannot write {}: {e}", file.display())))?;
    }
    Ok(())
}

fn cmd_build(file: &Path, out: &Path, skip: Vec<Part>, assets: Option<PathBuf>) -> CmdResult {
    let (_, model) = parse_file(file)?;
    let options = BuildOptions { skip, assets_dir: assets, ..Default::default() };
    let build = match build_project(&model, &options) {
        Ok(build) => build,
        Err(BuildError::Invalid(diags)) => {
            print_diagnostics(&diags, file);
            return Err(Failure::diagnostics());
        }
        Err(BuildError::Gen(err)) => return Err(Failure::io(err.to_string())),
    };
    print_diagnostics(&build.warnings, file);
    build
        .project
        .write_to(out)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {} files to {}", build.project.len(), out.display());
    Ok(())
}

fn init_tracing() {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).try_init();
}

fn cmd_serve(file: &Path, port: u16) -> CmdResult {
    let (source, _) = load_checked(file)?;
    init_tracing();
    forge_server::run_api_blocking(&source, port).map_err(|e| Failure::io(e.to_string()))
}

fn cmd_agent_serve(file: &Path, port: u16, threshold: f64) -> CmdResult {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Failure::usage(format!("threshold must be between 0 and 1, got {threshold}")));
    }
    let (source, model) = load_checked(file)?;
    if model.agents.is_empty() {
        return Err(Failure::usage(format!("{} declares no agents", file.display())));
    }
    init_tracing();
    forge_server::run_agents_blocking(&source, port, threshold).map_err(|e| Failure::io(e.to_string()))
}

fn cmd_openapi(file: &Path) -> CmdResult {
    let (_, model) = load_checked(file)?;
    print!("{}", forge_core::backend::openapi_json(&model));
    Ok(())
}

fn cmd_publish(dir: &Path, repo: &str) -> CmdResult {
    if !forge_publish::is_valid_repo_name(repo) {
        return Err(Failure::usage(format!("invalid repository name '{repo}' (allowed: a-z, 0-9, '-')")));
    }
    let project: GeneratedProject =
        GeneratedProject::read_from(dir).map_err(|e| Failure::io(format!("cannot read {}: {e}", dir.display())))?;
    if project.is_empty() {
        return Err(Failure::usage(format!("{} contains no files", dir.display())));
    }
    let vcs = forge_publish::VcsConfig::from_env();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::io(e.to_string()))?;
    let repo = runtime
        .block_on(forge_publish::publish(&project, repo, &vcs))
        .map_err(|e| Failure::io(e.to_string()))?;
    println!("published {} files to {}", project.len(), repo.html_url);
    Ok(())
}
