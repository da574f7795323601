//! `arcolor`: exact chromatic number, three-way partitioning and set cover,
//! with brute-force cross-checks.

mod common;
mod gen;
mod solve;
mod tables;
mod tensor;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use arcolor_core::tensor::DEFAULT_MAX_NNZ;
use common::{Ctx, OracleMismatch};

const OUTPUT_HELP: &str = "\
Output is tab-separated. chromatic, setcover, partition3 and list-covers end
with a header and one row:
  command  n  size  verdict  witness  arith_ops  oracle_calls  iterations  wall_ms  oracle
size is the edge count or the total number of members; oracle is `agree`,
`mismatch`, or `-` without --oracle-check. Tables printed before the report
(chromatic --case-trace: `k case verdict note`; list-covers: `set tuples`)
are separated from it by a blank line.

Exit codes: 0 success, 1 input error, 2 oracle mismatch, 3 resource cap.";

#[derive(Debug, Parser)]
#[command(name = "arcolor", version, about, after_help = OUTPUT_HELP)]
struct Cli {
    /// Largest number of tensor nonzeros or certificate terms to materialize.
    #[arg(long, env = "TC_MAX_NNZ", global = true, default_value_t = DEFAULT_MAX_NNZ as u64)]
    max_nnz: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Chromatic number of a DIMACS graph.
    Chromatic(solve::ChromaticArgs),
    /// Can t members of a δ-bounded family cover the universe?
    Setcover(solve::SetcoverArgs),
    /// Find A₁ ∈ F₁, A₂ ∈ F₂, A₃ ∈ F₃ that partition the universe.
    Partition3(solve::Partition3Args),
    /// Sets covered by the union of t members, with the number of ordered
    /// t-tuples from the downward closure whose union is exactly the set.
    ListCovers(solve::ListCoversArgs),
    /// Build, multiply and evaluate sparse tensors.
    #[command(subcommand)]
    Tensor(tensor::TensorCommand),
    /// Write a seeded instance and a manifest of what was planted.
    Gen(gen::GenArgs),
    /// Exponential bases of the coloring cases, `delta epsilon B C D E max`.
    Exponents(tables::ExponentsArgs),
    /// Operation counts on seeded instances, one TSV row per run.
    Bench(tables::BenchArgs),
}

fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    let ctx = Ctx { max_nnz: u128::from(cli.max_nnz) };
    match &cli.command {
        Command::Chromatic(a) => solve::chromatic(a, &ctx, out),
        Command::Setcover(a) => solve::setcover(a, &ctx, out),
        Command::Partition3(a) => solve::partition3(a, &ctx, out),
        Command::ListCovers(a) => solve::list_covers(a, &ctx, out),
        Command::Tensor(t) => match t {
            tensor::TensorCommand::Build(a) => tensor::build(a, &ctx, out),
            tensor::TensorCommand::Kron(a) => tensor::kron(a, &ctx, out),
            tensor::TensorCommand::Eval(a) => tensor::eval(a, &ctx, out),
            tensor::TensorCommand::VerifyDecomp(a) => tensor::verify_decomp(a, &ctx, out),
        },
        Command::Gen(a) => gen::gen(a),
        Command::Exponents(a) => tables::exponents(a, out),
        Command::Bench(a) => tables::bench(a, &ctx, out),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<OracleMismatch>().is_some() {
        return 2;
    }
    match e.downcast_ref::<arcolor_core::Error>() {
        Some(arcolor_core::Error::CapExceeded { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses 2 for usage errors; here 2 means an oracle mismatch.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = run(&cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
