use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nestsub::bpa::{self, Inclusion};
use nestsub::driver::{self, Options, EXIT_ERROR, EXIT_NOT_SUBTYPE, EXIT_OK};
use nestsub::simoracle::{fuzz_bpa, FuzzConfig};
use nestsub::subtype::{Budget, Fault, DEFAULT_DEPTH};

/// Subtyping for nested polymorphic session types.
#[derive(Parser)]
#[command(name = "nestsub", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every `check` query of a file.
    Check {
        file: PathBuf,
        /// Unfolding budget per path (default: $NESTSUB_DEPTH or 50).
        #[arg(long)]
        depth: Option<usize>,
        /// Print the derivation of every proved query.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        json: bool,
    },
    /// Validate a file and print inferred variances.
    Validate {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Basic process algebra tools.
    #[command(subcommand)]
    Bpa(BpaCommand),
}

#[derive(Subcommand)]
enum BpaCommand {
    /// Print a system as type definitions.
    Translate {
        file: PathBuf,
        /// Variable to use as the root.
        #[arg(long)]
        root: Option<String>,
        /// Append `check LHS[1] <= RHS[1]`.
        #[arg(long, num_args = 2, value_names = ["LHS", "RHS"])]
        check: Option<Vec<String>>,
    },
    /// Compare the languages of two variables up to a word length.
    Include {
        file: PathBuf,
        lhs: String,
        rhs: String,
        #[arg(long)]
        bound: usize,
    },
    /// Print a random system.
    Gen(GenArgs),
    /// Compare the algorithm with both oracles on random system pairs.
    Fuzz {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Word length bound for the inclusion oracle.
        #[arg(long, default_value_t = 10)]
        bound: usize,
        /// Run with a deliberately broken internal choice rule.
        #[arg(long, hide = true)]
        mutate: bool,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    vars: usize,
    #[arg(long, default_value_t = 2)]
    branches: usize,
    #[arg(long, default_value_t = 3)]
    seqlen: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { file, depth, trace, json } => check(&file, depth, trace, json),
        Command::Validate { file, json } => validate(&file, json),
        Command::Bpa(cmd) => run_bpa(cmd),
    };
    ExitCode::from(code as u8)
}

fn read(path: &Path) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_ERROR
    })
}

fn depth_budget(flag: Option<usize>) -> Result<usize, i32> {
    if let Some(d) = flag {
        return Ok(d);
    }
    match std::env::var("NESTSUB_DEPTH") {
        Ok(v) => v.trim().parse().map_err(|_| {
            eprintln!("error: NESTSUB_DEPTH must be a non-negative integer, got `{v}`");
            EXIT_ERROR
        }),
        Err(_) => Ok(DEFAULT_DEPTH),
    }
}

fn check(file: &Path, depth: Option<usize>, trace: bool, json: bool) -> i32 {
    let (src, depth) = match (read(file), depth_budget(depth)) {
        (Ok(s), Ok(d)) => (s, d),
        (Err(c), _) | (_, Err(c)) => return c,
    };
    let opts = Options { budget: Budget { depth, ..Budget::default() }, trace, fault: None };
    let run = driver::run_check(&src, &opts);
    if json {
        println!("{}", run.to_json());
    } else {
        for r in &run.records {
            println!("{}", r.text());
        }
        if run.error.is_none() {
            let s = &run.summary;
            println!("{} subtype, {} not subtype, {} unknown", s.subtype, s.not_subtype, s.unknown);
        }
    }
    if let Some(e) = &run.error {
        eprintln!("error: {e}");
    }
    run.exit_code()
}

fn validate(file: &Path, json: bool) -> i32 {
    let src = match read(file) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let run = driver::run_validate(&src, Budget::default());
    if json {
        println!("{}", run.to_json());
    } else {
        for d in &run.definitions {
            println!("{}", d.text());
        }
        for r in &run.eqtypes {
            println!("{}", r.text());
        }
    }
    if let Some(e) = &run.error {
        eprintln!("error: {e}");
    }
    run.exit_code()
}

fn load_bpa(file: &Path) -> Result<bpa::BpaSystem, i32> {
    let src = read(file)?;
    let sys = bpa::parse_bpa(&src).map_err(bpa_error)?;
    sys.validate().map_err(bpa_error)?;
    Ok(sys)
}

fn bpa_error(e: bpa::BpaError) -> i32 {
    eprintln!("error: {e}");
    EXIT_ERROR
}

fn run_bpa(cmd: BpaCommand) -> i32 {
    match bpa_command(cmd) {
        Ok(c) | Err(c) => c,
    }
}

fn bpa_command(cmd: BpaCommand) -> Result<i32, i32> {
    match cmd {
        BpaCommand::Translate { file, root, check } => {
            let mut sys = load_bpa(&file)?;
            if let Some(r) = root {
                if sys.body(&r).is_none() {
                    return Err(bpa_error(bpa::BpaError::UnknownVariable(r)));
                }
                sys.root = r;
            }
            let tr = bpa::translate(&sys).map_err(bpa_error)?;
            let pair = match &check {
                Some(v) => {
                    for x in v {
                        if tr.system.body(x).is_none() {
                            return Err(bpa_error(bpa::BpaError::UnknownVariable(x.clone())));
                        }
                    }
                    Some((v[0].as_str(), v[1].as_str()))
                }
                None => None,
            };
            print!("{}", tr.to_surface(pair));
            Ok(EXIT_OK)
        }
        BpaCommand::Include { file, lhs, rhs, bound } => {
            let sys = load_bpa(&file)?;
            match bpa::bounded_inclusion(&sys, &lhs, &rhs, bound).map_err(bpa_error)? {
                Inclusion::Included => {
                    println!("included up to length {bound}");
                    Ok(EXIT_OK)
                }
                Inclusion::Witness(w) => {
                    println!("witness \"{}\"", bpa::show_word(&w));
                    Ok(EXIT_NOT_SUBTYPE)
                }
            }
        }
        BpaCommand::Gen(g) => {
            if g.vars == 0 || g.branches == 0 || g.seqlen == 0 {
                eprintln!("error: --vars, --branches and --seqlen must be at least 1");
                return Err(EXIT_ERROR);
            }
            print!("{}", bpa::gen_random(g.seed, g.vars, g.branches, g.seqlen));
            Ok(EXIT_OK)
        }
        BpaCommand::Fuzz { n, seed, bound, mutate } => {
            let cfg = FuzzConfig {
                n,
                seed,
                inclusion_k: bound,
                fault: mutate.then_some(Fault::InvertPlusLabels),
                ..FuzzConfig::default()
            };
            let report = fuzz_bpa(&cfg).map_err(bpa_error)?;
            let violations = report.violations();
            for c in &violations {
                println!("violation: {}", c.describe());
            }
            println!(
                "{n} pairs: {} subtype, {} not subtype, {} unknown",
                report.count("subtype"),
                report.count("not_subtype"),
                report.count("unknown")
            );
            println!("{} violations", violations.len());
            Ok(if violations.is_empty() { EXIT_OK } else { EXIT_NOT_SUBTYPE })
        }
    }
}
