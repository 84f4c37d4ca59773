//! `trimcx`: build resolutions of pfaffian and maximal-minor quotients,
//! trim generators, and report exact graded Betti tables, closed forms,
//! verification suites and clique-complex f-vectors.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use trimcx_cli::{
    cmd_betti, cmd_closed_form, cmd_demo, cmd_fvector, cmd_verify, parse_field, parse_sigma_sets,
    CmdError, Outcome, PipelineConfig, Preset,
};

#[derive(Parser)]
#[command(name = "trimcx", version, about = "exact trimming complexes and Betti tables")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the preset resolution, trim, lift and print the graded Betti table as JSON
    Betti(PipelineArgs),
    /// Evaluate the closed-form Betti table (no polynomial arithmetic)
    ClosedForm(ClosedFormArgs),
    /// Run the pipeline plus the verification battery; nonzero exit on failure
    Verify(VerifyArgs),
    /// f-vector of the clique complex of an n-uniform clutter, enumerated and in closed form
    Fvector(FvectorArgs),
    /// Run the built-in worked example end to end
    Demo,
}

#[derive(Args)]
struct PresetArgs {
    /// preset family: pfaffian | minors
    #[arg(long)]
    preset: Option<String>,
    /// skew-matrix input file (alternative to --preset)
    #[arg(long)]
    custom: Option<PathBuf>,
    /// skew matrix size (pfaffian preset)
    #[arg(long)]
    size: Option<usize>,
    /// matrix rows n (minors preset)
    #[arg(long)]
    rows: Option<usize>,
    /// matrix columns m (minors preset)
    #[arg(long)]
    cols: Option<usize>,
    /// generator index/indices to remove (pfaffian: one index; custom: comma list)
    #[arg(long)]
    remove: Option<String>,
    /// column index sets to remove, semicolon-separated (minors preset), e.g. "1,2;3,4"
    #[arg(long)]
    remove_sets: Option<String>,
    /// override the auxiliary ideal generators (comma-separated polynomials)
    #[arg(long)]
    a_ideal: Option<String>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    preset: PresetArgs,
    /// coefficient field: QQ or gf:<p>
    #[arg(long, default_value = "gf:32003")]
    field: String,
    /// seed for randomized checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// truncation bound for ideal comparisons (default: max degree + 3)
    #[arg(long)]
    dmax: Option<u32>,
    /// also write the JSON document here
    #[arg(long)]
    json: Option<PathBuf>,
    /// also write a CSV table here
    #[arg(long)]
    csv: Option<PathBuf>,
    /// write the assembled trimming complex in the text format
    #[arg(long)]
    dump_complex: Option<PathBuf>,
}

#[derive(Args)]
struct ClosedFormArgs {
    #[command(flatten)]
    preset: PresetArgs,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// test hook: corrupt one differential entry before verification
    #[arg(long, hide = true)]
    corrupt: bool,
}

#[derive(Args)]
struct FvectorArgs {
    /// circuit size n
    #[arg(long)]
    rows: Option<usize>,
    /// ground set size m
    #[arg(long)]
    cols: Option<usize>,
    /// removed circuits, semicolon-separated increasing lists
    #[arg(long)]
    remove_sets: Option<String>,
    /// alternatively a clutter spec string: "n=<n> m=<m> remove=<s1;s2>"
    #[arg(long)]
    clutter: Option<String>,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn build_preset(args: &PresetArgs) -> Result<Preset, CmdError> {
    if let Some(path) = &args.custom {
        let remove: Vec<usize> = match &args.remove {
            None => Vec::new(),
            Some(s) => s
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| CmdError::usage(format!("bad --remove: {e}")))?,
        };
        return Ok(Preset::Custom {
            path: path.clone(),
            remove,
            a_ideal: args.a_ideal.clone(),
        });
    }
    match args.preset.as_deref() {
        Some("pfaffian") => {
            let n = args
                .size
                .ok_or_else(|| CmdError::usage("--size is required for the pfaffian preset"))?;
            let remove = match &args.remove {
                None => 1,
                Some(s) => s
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| CmdError::usage(format!("bad --remove: {e}")))?,
            };
            Ok(Preset::Pfaffian { n, remove })
        }
        Some("minors") => {
            let n = args
                .rows
                .ok_or_else(|| CmdError::usage("--rows is required for the minors preset"))?;
            let m = args
                .cols
                .ok_or_else(|| CmdError::usage("--cols is required for the minors preset"))?;
            let sigmas = match &args.remove_sets {
                Some(s) => parse_sigma_sets(s)?,
                None => vec![trimcx::detfacet::IndexSet::new((1..=n).collect())
                    .map_err(|e| CmdError::usage(e.to_string()))?],
            };
            Ok(Preset::Minors { n, m, sigmas })
        }
        Some(other) => Err(CmdError::usage(format!(
            "unknown preset `{other}` (expected pfaffian or minors)"
        ))),
        None => Err(CmdError::usage("one of --preset or --custom is required")),
    }
}

fn pipeline_config(args: &PipelineArgs) -> Result<PipelineConfig, CmdError> {
    Ok(PipelineConfig {
        preset: build_preset(&args.preset)?,
        field: parse_field(&args.field)?,
        seed: args.seed,
        dmax: args.dmax,
    })
}

fn run() -> Result<String, CmdError> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Betti(args) => {
            let cfg = pipeline_config(&args)?;
            cmd_betti(&cfg, &args.json, &args.csv, &args.dump_complex)
        }
        Cmd::ClosedForm(args) => {
            let preset = build_preset(&args.preset)?;
            cmd_closed_form(&preset, &args.json, &args.csv)
        }
        Cmd::Verify(args) => {
            let cfg = pipeline_config(&args.pipeline)?;
            cmd_verify(&cfg, args.corrupt, &args.pipeline.json)
        }
        Cmd::Fvector(args) => {
            let (n, m, sigmas) = match (&args.clutter, args.rows, args.cols) {
                (Some(spec), _, _) => {
                    let c = trimcx::detfacet::Clutter::parse_spec(spec)
                        .map_err(|e| CmdError::usage(e.to_string()))?;
                    // recover the removal list for the closed forms
                    let all: Vec<Vec<usize>> = trimcx::builders::subsets_lex(c.ground, c.n)
                        .into_iter()
                        .map(|s| s.into_iter().map(|v| v + 1).collect())
                        .collect();
                    let removed: Vec<trimcx::detfacet::IndexSet> = all
                        .into_iter()
                        .filter(|s| !c.is_circuit(s))
                        .map(|s| trimcx::detfacet::IndexSet::new(s).unwrap())
                        .collect();
                    (c.n, c.ground, removed)
                }
                (None, Some(n), Some(m)) => {
                    let sigmas = match &args.remove_sets {
                        Some(s) => parse_sigma_sets(s)?,
                        None => Vec::new(),
                    };
                    (n, m, sigmas)
                }
                _ => {
                    return Err(CmdError::usage(
                        "need --rows and --cols (or --clutter \"n=.. m=..\")",
                    ))
                }
            };
            cmd_fvector(n, m, &sigmas, &args.json)
        }
        Cmd::Demo => cmd_demo(),
    }
}

fn main() -> ExitCode {
    use std::io::Write;
    match run() {
        Ok(output) => {
            // tolerate a closed pipe on the consumer side
            let _ = writeln!(std::io::stdout(), "{output}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            // verification reports still print their JSON on failure
            if e.outcome == Outcome::VerifyFailed && e.message.starts_with('{') {
                let _ = writeln!(std::io::stdout(), "{}", e.message);
            } else {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.outcome as u8)
        }
    }
}
