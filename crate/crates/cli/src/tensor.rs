use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use rand::Rng;

use arcolor_core::arith::q;
use arcolor_core::gen::rng_from_seed;
use arcolor_core::tensor::{
    block_sum_tensor_with_cap, kronecker_capped, kronecker_power, matrix_mult_tensor, partitioning_tensor,
    trivial_decomposition, yates_evaluate, Decomposition, SparseTensor, Verification, YatesOptions,
};
use arcolor_core::{Error, Metrics, Rational};

use crate::common::{emit, parse_rat, read_file, Ctx, OracleMismatch};

#[derive(Debug, Subcommand)]
pub enum TensorCommand {
    /// Write a named tensor in the `tensor v1` text format.
    Build(BuildArgs),
    /// Kronecker product of two tensors, or a Kronecker power of one.
    Kron(KronArgs),
    /// Evaluate the trilinear form of T^{⊗r} directly and by Yates' method.
    /// Prints `method value yates_ops`; exit 2 if the two values differ.
    Eval(EvalArgs),
    /// Check a `tensor-decomp v1` certificate against a tensor.
    /// Prints `rank power check`; exit 2 if the certificate is wrong.
    VerifyDecomp(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TensorKind {
    /// Tripartitions of [size] with parts of at most ⌈τ·size⌉ elements.
    Partitioning,
    /// Block-sum tensor over k ≤ max-k with per-part cap.
    BlockSum,
    /// size × size matrix multiplication.
    Matmul,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    kind: TensorKind,
    /// Ground set size (partitioning) or matrix size (matmul).
    #[arg(long)]
    size: Option<usize>,
    /// Part-size fraction τ for `partitioning`.
    #[arg(long, value_parser = parse_rat, default_value = "1/3")]
    tau: Rational,
    /// Largest part size for `block-sum`.
    #[arg(long)]
    cap: Option<usize>,
    /// Largest block size for `block-sum`.
    #[arg(long)]
    max_k: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the rank-nnz certificate here.
    #[arg(long)]
    decomp_out: Option<PathBuf>,
}

fn need(v: Option<usize>, flag: &str, kind: &str) -> Result<usize> {
    v.with_context(|| format!("--{flag} is required for {kind}"))
}

pub fn build(args: &BuildArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    let t = match args.kind {
        TensorKind::Partitioning => partitioning_tensor(&args.tau, need(args.size, "size", "partitioning")?)?,
        TensorKind::BlockSum => {
            block_sum_tensor_with_cap(need(args.cap, "cap", "block-sum")?, need(args.max_k, "max-k", "block-sum")?)?
        }
        TensorKind::Matmul => matrix_mult_tensor(need(args.size, "size", "matmul")?)?,
    };
    if t.nnz() as u128 > ctx.max_nnz {
        return Err(Error::CapExceeded { needed: t.nnz() as u128, cap: ctx.max_nnz }.into());
    }
    if let Some(path) = &args.decomp_out {
        let d = trivial_decomposition(&t, 1, ctx.max_nnz)?;
        emit(Some(path), &d.to_text()?, out)?;
    }
    emit(args.out.as_deref(), &t.to_text(), out)
}

fn load_tensor(path: &Path) -> Result<SparseTensor> {
    SparseTensor::parse(&read_file(path)?).with_context(|| path.display().to_string())
}

fn load_decomp(path: &Path) -> Result<Decomposition> {
    Decomposition::parse(&read_file(path)?).with_context(|| path.display().to_string())
}

#[derive(Debug, Args)]
pub struct KronArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long, conflicts_with = "power", required_unless_present = "power")]
    right: Option<PathBuf>,
    /// Kronecker power of the left tensor instead of a product.
    #[arg(long)]
    power: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn kron(args: &KronArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    let left = load_tensor(&args.left)?;
    let t = match (&args.right, args.power) {
        (Some(right), _) => kronecker_capped(&left, &load_tensor(right)?, ctx.max_nnz)?,
        (None, Some(r)) => kronecker_power(&left, r, ctx.max_nnz)?,
        (None, None) => unreachable!("clap requires --right or --power"),
    };
    emit(args.out.as_deref(), &t.to_text(), out)
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    tensor: PathBuf,
    /// Kronecker power r.
    #[arg(long, default_value_t = 1)]
    power: usize,
    /// Certificate to evaluate through; the rank-nnz one when omitted.
    #[arg(long)]
    decomp: Option<PathBuf>,
    /// Comma-separated rationals for leg 1; random when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_rat, allow_hyphen_values = true)]
    x: Option<Vec<Rational>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_rat, allow_hyphen_values = true)]
    y: Option<Vec<Rational>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_rat, allow_hyphen_values = true)]
    z: Option<Vec<Rational>>,
    /// Seed for the random vectors.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn eval(args: &EvalArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    let t = load_tensor(&args.tensor)?;
    if args.power == 0 {
        bail!("--power must be positive");
    }
    let base = trivial_decomposition(&t, 1, ctx.max_nnz)?;
    let d = match &args.decomp {
        Some(path) => load_decomp(path)?,
        None => base.clone(),
    };
    let mut rng = rng_from_seed(args.seed);
    let mut vectors = Vec::with_capacity(3);
    for (leg, given) in [&args.x, &args.y, &args.z].into_iter().enumerate() {
        let needed = (t.dims()[leg] as u128).saturating_pow(args.power as u32);
        if needed > ctx.max_nnz {
            return Err(Error::CapExceeded { needed, cap: ctx.max_nnz }.into());
        }
        let len = needed as usize;
        let v = match given {
            Some(v) if v.len() != len => bail!("vector {} has length {}, expected {len}", leg + 1, v.len()),
            Some(v) => v.clone(),
            None => (0..len).map(|_| q(rng.random_range(-6..=6), rng.random_range(1..=4))).collect(),
        };
        vectors.push(v);
    }
    let metrics = Metrics::new();
    let yates = yates_evaluate(&t, &d, Some(&base), args.power, &vectors[0], &vectors[1], &vectors[2], &YatesOptions::default(), &metrics)?;
    // The direct sum needs T^{⊗r} in memory; skip it past the cap.
    let direct = match kronecker_power(&t, args.power, ctx.max_nnz) {
        Ok(p) => Some(p.direct_evaluate(&vectors[0], &vectors[1], &vectors[2])?),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    writeln!(out, "method\tvalue\tyates_ops")?;
    writeln!(out, "yates\t{yates}\t{}", metrics.snapshot().yates_ops)?;
    match &direct {
        Some(v) => writeln!(out, "direct\t{v}\t-")?,
        None => writeln!(out, "direct\t-\t-")?,
    }
    if let Some(v) = direct {
        if v != yates {
            return Err(OracleMismatch(format!("yates {yates} vs direct {v}")).into());
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    tensor: PathBuf,
    #[arg(long)]
    decomp: PathBuf,
}

pub fn verify_decomp(args: &VerifyArgs, _ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    let t = load_tensor(&args.tensor)?;
    let d = load_decomp(&args.decomp)?;
    let how = match d.verify(&t) {
        Ok(how) => how,
        Err(e @ Error::CertificateMismatch(_)) => return Err(OracleMismatch(e.to_string()).into()),
        Err(e) => return Err(e.into()),
    };
    let check = match how {
        Verification::Full => "full".to_string(),
        Verification::Spot(k) => format!("spot:{k}"),
    };
    writeln!(out, "rank\tpower\tcheck")?;
    writeln!(out, "{}\t{}\t{check}", d.rank(), d.power())?;
    Ok(())
}
