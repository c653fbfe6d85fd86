use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use brickc::api::{self, ApiError, CompileOptions, Emit, NormalizeOptions, ProofOptions, RenderRequest};
use brickc::server::{self, DEFAULT_PORT};
use brickc_core::backend::{Mode, TargetTemplate};
use brickc_core::il::{self, IlDocument};
use clap::{Parser, Subcommand};
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(name = "brickc", version, about = "Compile string and brick diagrams of monoidal categories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a document and print the type of its diagram.
    Check { input: PathBuf },
    /// Evaluate the diagram to a matrix, or emit a program that does.
    Compile {
        input: PathBuf,
        /// Bindings file; the document's own bindings are used otherwise.
        #[arg(long, conflicts_with = "seed")]
        bindings: Option<PathBuf>,
        /// Draw bindings from this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Dimension of every object for seeded bindings.
        #[arg(long, requires = "seed")]
        dim: Option<usize>,
        /// `kron` or `dirsum`.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        /// Emit code with a built-in template (`numpy`).
        #[arg(long, conflicts_with = "template")]
        emit: Option<String>,
        /// Emit code with a template read from a JSON file.
        #[arg(long)]
        template: Option<PathBuf>,
    },
    /// Rewrite the term into layered normal form.
    Normalize {
        input: PathBuf,
        #[arg(long)]
        minimize_width: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw the diagram as SVG.
    Render {
        input: PathBuf,
        #[arg(long, default_value = "string")]
        style: String,
        #[arg(long, default_value_t = 640.0)]
        width: f64,
        #[arg(long, default_value_t = 480.0)]
        height: f64,
        #[arg(long, default_value_t = 12.0)]
        font_size: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the derivation of the diagram's sequent.
    Proof {
        input: PathBuf,
        #[arg(long)]
        latex: bool,
    },
    /// Print width, leaf counts and depth.
    Stats { input: PathBuf },
    /// Print seeded bindings for the document's signature.
    Bindings {
        input: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_parser = parse_mode, default_value = "kron")]
        mode: Mode,
    },
    /// Serve the HTTP API on 127.0.0.1.
    Serve {
        #[arg(long, env = "BRICKC_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn read_input(path: &PathBuf) -> Result<String, ApiError> {
    let io_error = |e: io::Error| ApiError {
        code: "io-error".into(),
        message: format!("{}: {e}", path.display()),
        path: None,
        malformed: true,
    };
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(io_error)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(io_error)
    }
}

fn load(path: &PathBuf) -> Result<IlDocument, ApiError> {
    Ok(il::parse(&read_input(path)?)?)
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), ApiError> {
    let result = match path {
        Some(p) if p.as_os_str() != "-" => fs::write(p, text),
        _ => io::stdout().write_all(text.as_bytes()),
    };
    result.map_err(|e| ApiError {
        code: "io-error".into(),
        message: e.to_string(),
        path: None,
        malformed: true,
    })
}

fn field(v: &Value, key: &str) -> String {
    v[key].as_str().unwrap_or_default().to_string()
}

fn run(cmd: Command) -> Result<(), ApiError> {
    match cmd {
        Command::Check { input } => write_output(None, &api::to_body(&api::check(&load(&input)?)?)),
        Command::Stats { input } => write_output(None, &api::to_body(&api::stats(&load(&input)?)?)),
        Command::Compile {
            input,
            bindings,
            seed,
            dim,
            mode,
            emit,
            template,
        } => {
            let doc = load(&input)?;
            let bindings = match bindings {
                Some(p) => Some(il::parse_json(&read_input(&p)?)?),
                None => None,
            };
            let emit = match (emit, template) {
                (Some(name), _) => Some(Emit::Builtin(name)),
                (None, Some(p)) => {
                    let t: TargetTemplate = serde_json::from_str(&read_input(&p)?).map_err(|e| ApiError {
                        code: "schema-error".into(),
                        message: format!("{}: {e}", p.display()),
                        path: None,
                        malformed: true,
                    })?;
                    Some(Emit::Template(Box::new(t)))
                }
                (None, None) => None,
            };
            let is_code = emit.is_some();
            let opts = CompileOptions {
                mode,
                seed,
                dim,
                bindings,
                emit,
            };
            let out = api::compile(&doc, &opts)?;
            if is_code {
                write_output(None, &field(&out, "source"))
            } else {
                write_output(None, &api::to_body(&out))
            }
        }
        Command::Normalize {
            input,
            minimize_width,
            output,
        } => {
            let out = api::normalize(&load(&input)?, &NormalizeOptions { minimize_width })?;
            write_output(output.as_ref(), &api::to_body(&out))
        }
        Command::Render {
            input,
            style,
            width,
            height,
            font_size,
            output,
        } => {
            let req = RenderRequest {
                style,
                width,
                height,
                font_size,
            };
            let out = api::render(&load(&input)?, &req)?;
            write_output(output.as_ref(), &field(&out, "svg"))
        }
        Command::Proof { input, latex } => {
            let out = api::proof(&load(&input)?, &ProofOptions { latex })?;
            write_output(None, &field(&out, "proof"))
        }
        Command::Bindings { input, seed, dim, mode } => write_output(None, &api::to_body(&api::bindings(&load(&input)?, mode, seed, dim)?)),
        Command::Serve { port } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| ApiError {
                code: "io-error".into(),
                message: e.to_string(),
                path: None,
                malformed: false,
            })?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                server::serve(listener).await
            })
            .map_err(|e| ApiError {
                code: "io-error".into(),
                message: e.to_string(),
                path: None,
                malformed: false,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
