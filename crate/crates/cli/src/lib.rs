//! Command line front end for `udderid`.

pub mod commands;
pub mod server;

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use commands::{CmdResult, CommandError};

#[derive(Debug, Parser)]
#[command(name = "udderid", version, about = "Identify dairy cows from udder images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract feature vectors from manifests into a CSV.
    Extract(commands::ExtractArgs),
    /// Rank-1 accuracy curves over random cow groups.
    Evaluate(commands::EvaluateArgs),
    /// Generate a synthetic herd (manifests, annotations, optional frames).
    Synth(commands::SynthArgs),
    /// Fit a classifier on one session and save it.
    Enroll(commands::EnrollArgs),
    /// Identify the samples of one session with a saved model.
    Identify(commands::IdentifyArgs),
    /// Serve frames and annotations to the annotation UI.
    AnnotateServe(ServeArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory with a built UI bundle to serve instead of the built-in page.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

fn serve(args: &ServeArgs, out: &mut dyn Write) -> CmdResult {
    writeln!(out, "config: {}", serde_json::to_string(args).expect("config serializes"))?;
    let manifest = udderid::dataset_io::load_manifest(&args.manifest)?;
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| CommandError(vec![format!("invalid-argument: address: {e}")]))?;
    let app = server::router(manifest, args.ui_dir.clone());
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        writeln!(out, "listening on http://{}", listener.local_addr()?)?;
        out.flush()?;
        axum::serve(listener, app).await
    })?;
    Ok(())
}

/// Run a parsed command, returning the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Extract(a) => commands::extract(a, out),
        Command::Evaluate(a) => commands::evaluate(a, out),
        Command::Synth(a) => commands::synth(a, out),
        Command::Enroll(a) => commands::enroll(a, out),
        Command::Identify(a) => commands::identify(a, out),
        Command::AnnotateServe(a) => serve(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(CommandError(messages)) => {
            for m in messages {
                let _ = writeln!(err, "error: {m}");
            }
            1
        }
    }
}
