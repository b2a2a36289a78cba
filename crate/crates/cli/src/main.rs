use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use midair_cli::{commands, CliError};
use midair_core::MeshFormat;

#[derive(Debug, Parser)]
#[command(
    name = "midair",
    version,
    about = "CSG modeling engine tools and live session service"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Obj,
    Stl,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Replay a session script and write the final scene and effect log.
    Replay {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        script: PathBuf,
        /// Where to write the final scene.
        #[arg(long)]
        out: PathBuf,
        /// Where to write the effect log; printed to stdout when omitted.
        #[arg(long)]
        effects: Option<PathBuf>,
    },
    /// Polygonize a scene and export the mesh.
    Mesh {
        #[arg(long)]
        scene: PathBuf,
        /// Grid cells along the longest axis, 8 to 1024.
        #[arg(long, default_value_t = 64)]
        resolution: u32,
        #[arg(long, value_enum, default_value_t = Format::Obj)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Voice recognition rates from a user_label,recognized,unrecognized CSV.
    Stats { csv: PathBuf },
    /// Run the WebSocket session service.
    Serve {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8765")]
        bind: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Replay {
            scene,
            script,
            out,
            effects,
        } => {
            let log = commands::replay(&scene, &script, &out, effects.as_deref())?;
            if effects.is_none() {
                print!("{log}");
            }
        }
        Cmd::Mesh {
            scene,
            resolution,
            format,
            out,
        } => {
            let format = match format {
                Format::Obj => MeshFormat::Obj,
                Format::Stl => MeshFormat::StlBinary,
            };
            println!("{}", commands::mesh(&scene, resolution, format, &out)?);
        }
        Cmd::Stats { csv } => print!("{}", commands::stats(&csv)?),
        Cmd::Serve { scene, bind } => {
            let scene = commands::load_scene(&scene)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
                path: bind.clone().into(),
                source,
            })?;
            runtime
                .block_on(async {
                    let listener = tokio::net::TcpListener::bind(&bind).await?;
                    println!("listening on ws://{}/ws", listener.local_addr()?);
                    midair_cli::serve(listener, scene).await
                })
                .map_err(|source| CliError::Io {
                    path: bind.into(),
                    source,
                })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MIDAIR_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
