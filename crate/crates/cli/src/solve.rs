use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::Ordering;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;

use arcolor_core::chromatic::{chromatic_number, PipelineConfig, SlackRule};
use arcolor_core::graph::{chromatic_brute, Graph};
use arcolor_core::lattice::{count_t_covers, LatticeIndex};
use arcolor_core::setcover::{brute_setcover, solve_setcover, CoverInstance};
use arcolor_core::tensor::Decomposition;
use arcolor_core::tripartition::{
    brute_tripartition, solve_tripartition, DecompositionProvider, FileProvider, TripartitionConfig, TrivialProvider,
};
use arcolor_core::{Mask, Metrics, Rational, SetFamily};

use crate::common::{format_set, format_triple, parse_rat, read_file, Ctx, Report};

fn parse_slack(s: &str) -> std::result::Result<SlackRule, String> {
    SlackRule::parse(s).map_err(|e| e.to_string())
}

fn load_family(path: &Path) -> Result<SetFamily> {
    SetFamily::parse(&read_file(path)?).with_context(|| path.display().to_string())
}

#[derive(Debug, Args)]
pub struct ChromaticArgs {
    /// DIMACS `.col` graph.
    #[arg(long)]
    graph: PathBuf,
    /// Slack d: a rational such as `2`, or per vertex as `n/145` or `0.05n`.
    /// Defaults to n/145.
    #[arg(long, value_parser = parse_slack)]
    d: Option<SlackRule>,
    /// Also compute χ by brute force and compare.
    #[arg(long)]
    oracle_check: bool,
    /// Print the table `k case verdict note` before the report.
    #[arg(long)]
    case_trace: bool,
    /// Do not decide k-colorability exactly when every case declines.
    #[arg(long)]
    no_fallback: bool,
}

pub fn chromatic(args: &ChromaticArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    let g = Graph::parse_dimacs(&read_file(&args.graph)?).with_context(|| args.graph.display().to_string())?;
    let cfg = PipelineConfig {
        slack: args.d.clone().unwrap_or_default(),
        provider: Arc::new(TrivialProvider::with_cap(ctx.max_nnz)),
        fallback: !args.no_fallback,
        ..PipelineConfig::default()
    };
    let metrics = Metrics::new();
    let start = Instant::now();
    let outcome = chromatic_number(&g, &cfg, &metrics)?;
    let wall = start.elapsed();
    let oracle = args.oracle_check.then(|| {
        metrics.oracle_calls.fetch_add(1, Ordering::Relaxed);
        chromatic_brute(&g) == outcome.chi
    });
    if args.case_trace {
        writeln!(out, "k\tcase\tverdict\tnote")?;
        for row in &outcome.trace {
            let note = if row.note.is_empty() { "-" } else { &row.note };
            writeln!(out, "{}\t{}\t{}\t{}", row.k, row.step, row.verdict, note)?;
        }
        writeln!(out)?;
    }
    Report {
        command: "chromatic",
        n: g.n(),
        size: g.edge_count(),
        verdict: outcome.chi.to_string(),
        witness: None,
        counters: metrics.snapshot(),
        wall,
        oracle,
    }
    .finish(out)
}

#[derive(Debug, Args)]
pub struct SetcoverArgs {
    /// Set-family file.
    #[arg(long)]
    family: PathBuf,
    /// Number of sets allowed in the cover.
    #[arg(long)]
    t: usize,
    /// Bound δ < 1/4 on member size relative to n.
    #[arg(long, value_parser = parse_rat)]
    delta: Rational,
    /// Also decide by breadth-first search over unions and compare.
    #[arg(long)]
    oracle_check: bool,
}

pub fn setcover(args: &SetcoverArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    let family = load_family(&args.family)?;
    let metrics = Metrics::new();
    let provider = TrivialProvider::with_cap(ctx.max_nnz);
    let start = Instant::now();
    let inst = CoverInstance::new(family.clone(), args.t, args.delta.clone());
    let found = solve_setcover(&inst, &provider, &metrics)?;
    let wall = start.elapsed();
    let oracle = args.oracle_check.then(|| {
        metrics.oracle_calls.fetch_add(1, Ordering::Relaxed);
        brute_setcover(&family, args.t) == found
    });
    Report {
        command: "setcover",
        n: family.n(),
        size: family.len(),
        verdict: found.to_string(),
        witness: None,
        counters: metrics.snapshot(),
        wall,
        oracle,
    }
    .finish(out)
}

#[derive(Debug, Args)]
pub struct Partition3Args {
    /// One file with `[F1]`, `[F2]`, `[F3]` sections, or three set-family files.
    #[arg(long, num_args = 1..=3, required = true)]
    families: Vec<PathBuf>,
    /// Size bound ν in [1/3, 1/2) on every member, relative to n.
    #[arg(long, value_parser = parse_rat)]
    nu: Rational,
    /// Balance slack δ. Defaults to halfway to the solver's bound.
    #[arg(long, value_parser = parse_rat)]
    delta: Option<Rational>,
    /// Target block size b'. Defaults to n: one block and no hashing.
    #[arg(long, value_parser = parse_rat)]
    b_prime: Option<Rational>,
    /// Admit b' below the asymptotic size condition.
    #[arg(long)]
    force_small: bool,
    /// Decomposition certificate for the block-sum tensor; shapes it does
    /// not match use the trivial certificate.
    #[arg(long)]
    decomp: Option<PathBuf>,
    /// Fill the witness column with the partition found, as `A|B|C`.
    #[arg(long)]
    witness: bool,
    /// Also search all pairs by brute force and compare.
    #[arg(long)]
    oracle_check: bool,
}

fn is_partition([a, b, c]: [Mask; 3], fams: &[SetFamily; 3]) -> bool {
    let full = fams[0].universe().full();
    fams[0].members().contains(&a)
        && fams[1].members().contains(&b)
        && fams[2].members().contains(&c)
        && a | b | c == full
        && a & b == 0
        && a & c == 0
        && b & c == 0
}

pub fn partition3(args: &Partition3Args, ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    let fams: [SetFamily; 3] = match args.families.as_slice() {
        [one] => SetFamily::parse_three(&read_file(one)?).with_context(|| one.display().to_string())?,
        [a, b, c] => [load_family(a)?, load_family(b)?, load_family(c)?],
        _ => bail!("--families takes one sectioned file or three family files"),
    };
    let n = fams[0].n();
    let mut cfg = TripartitionConfig::desk(args.nu.clone(), n);
    if let Some(d) = &args.delta {
        cfg.delta = d.clone();
    }
    if let Some(b) = &args.b_prime {
        cfg.b_prime = b.clone();
        cfg.force_small = args.force_small;
    }
    let provider: Box<dyn DecompositionProvider> = match &args.decomp {
        Some(path) => {
            let d = Decomposition::parse(&read_file(path)?).with_context(|| path.display().to_string())?;
            Box::new(FileProvider::with_cap(d, true, ctx.max_nnz))
        }
        None => Box::new(TrivialProvider::with_cap(ctx.max_nnz)),
    };
    let metrics = Metrics::new();
    let start = Instant::now();
    let outcome = solve_tripartition(&fams[0], &fams[1], &fams[2], &cfg, provider.as_ref(), &metrics)?;
    let wall = start.elapsed();
    let oracle = args.oracle_check.then(|| {
        metrics.oracle_calls.fetch_add(1, Ordering::Relaxed);
        let brute = brute_tripartition(&fams[0], &fams[1], &fams[2]);
        brute.is_some() == outcome.found() && outcome.witness.map_or(true, |w| is_partition(w, &fams))
    });
    Report {
        command: "partition3",
        n,
        size: fams.iter().map(SetFamily::len).sum(),
        verdict: outcome.found().to_string(),
        witness: if args.witness { outcome.witness.map(format_triple) } else { None },
        counters: metrics.snapshot(),
        wall,
        oracle,
    }
    .finish(out)
}

#[derive(Debug, Args)]
pub struct ListCoversArgs {
    /// Set-family file.
    #[arg(long)]
    family: PathBuf,
    /// Number of members per cover.
    #[arg(long)]
    t: usize,
    /// Only consider sets of at most this many elements.
    #[arg(long)]
    max_size: Option<usize>,
    /// Also list by brute force over unions and compare.
    #[arg(long)]
    oracle_check: bool,
}

/// Sets contained in a union of at most `t` members.
fn brute_covered(family: &SetFamily, t: usize, sets: &[Mask]) -> Vec<Mask> {
    let mut unions = vec![0u64];
    for _ in 0..t {
        let mut next: Vec<Mask> = unions.iter().flat_map(|&u| family.iter().map(move |m| u | m)).collect();
        next.extend(&unions);
        next.sort_unstable();
        next.dedup();
        unions = next;
    }
    sets.iter().copied().filter(|&x| unions.iter().any(|&u| x & !u == 0)).collect()
}

pub fn list_covers(args: &ListCoversArgs, _ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    let family = load_family(&args.family)?;
    let universe = family.universe();
    let index = Arc::new(LatticeIndex::bounded(universe, args.max_size.unwrap_or(universe.n()))?);
    let metrics = Metrics::new();
    let start = Instant::now();
    let counts = count_t_covers(&family, index.clone(), args.t, &metrics)?;
    let wall = start.elapsed();
    let covered: Vec<(Mask, &Rational)> =
        index.sets().iter().zip(counts.values()).filter(|(_, v)| !num_traits::Zero::is_zero(*v)).map(|(&m, v)| (m, v)).collect();
    writeln!(out, "set\ttuples")?;
    for (m, v) in &covered {
        writeln!(out, "{}\t{v}", format_set(*m))?;
    }
    writeln!(out)?;
    let oracle = args.oracle_check.then(|| {
        metrics.oracle_calls.fetch_add(1, Ordering::Relaxed);
        brute_covered(&family, args.t, index.sets()) == covered.iter().map(|(m, _)| *m).collect::<Vec<_>>()
    });
    Report {
        command: "list-covers",
        n: universe.n(),
        size: family.len(),
        verdict: covered.len().to_string(),
        witness: None,
        counters: metrics.snapshot(),
        wall,
        oracle,
    }
    .finish(out)
}
