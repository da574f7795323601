use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use rand::Rng;

use arcolor_core::arith::{q, qu};
use arcolor_core::chromatic::{chromatic_number, exponent_report, PipelineConfig, SlackRule};
use arcolor_core::gen::{planted_tripartition, random_graph, rng_from_seed};
use arcolor_core::tripartition::{solve_tripartition, TripartitionConfig, TrivialProvider};
use arcolor_core::{Metrics, MetricsSnapshot, Rational};

use crate::common::{parse_rat, Ctx};

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    /// Slack δ in (0, 1/12), as a fraction of n.
    #[arg(long, value_parser = parse_rat, default_value = "1/145")]
    delta: Rational,
    /// Decomposition slack ε ≥ 0.
    #[arg(long, value_parser = parse_rat, default_value = "0")]
    epsilon: Rational,
    /// Base of the 3-coloring subroutine.
    #[arg(long, default_value_t = 1.3289)]
    t3: f64,
    /// Base of the 4-coloring subroutine.
    #[arg(long, default_value_t = 1.7215)]
    t4: f64,
    /// Instead of --delta, print rows for δ = j/(12(N+1)), j = 1..N.
    #[arg(long, value_name = "N")]
    sweep: Option<usize>,
}

pub fn exponents(args: &ExponentsArgs, out: &mut dyn Write) -> Result<()> {
    let deltas: Vec<Rational> = match args.sweep {
        Some(steps) => (1..=steps).map(|j| qu(j) / qu(12 * (steps + 1))).collect(),
        None => vec![args.delta.clone()],
    };
    let reports = deltas
        .iter()
        .map(|d| exponent_report(d, &args.epsilon, args.t3, args.t4))
        .collect::<arcolor_core::Result<Vec<_>>>()?;
    writeln!(out, "delta\tepsilon\tB\tC\tD\tE\tmax")?;
    for (delta, r) in deltas.iter().zip(reports) {
        writeln!(out, "{delta}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}", args.epsilon, r.b, r.c, r.d, r.e, r.max())?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 6)]
    n_min: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    /// Instances per size and workload.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append a wall_ms column; the rest of the table does not depend on the run.
    #[arg(long)]
    timing: bool,
}

/// Operation counts of the chromatic pipeline on G(n, 1/2) and of three-way
/// partitioning on planted instances with ν = 5/12.
pub fn bench(args: &BenchArgs, ctx: &Ctx, out: &mut dyn Write) -> Result<()> {
    let mut rng = rng_from_seed(args.seed);
    let provider = Arc::new(TrivialProvider::with_cap(ctx.max_nnz));
    let cfg = PipelineConfig { slack: SlackRule::PerVertex(q(1, 10)), provider: provider.clone(), ..PipelineConfig::default() };
    let nu = q(5, 12);
    write!(out, "workload\tn\trep\tverdict\tlattice_ops\tyates_ops\tblock_calls\titerations\tmis_listed")?;
    writeln!(out, "{}", if args.timing { "\twall_ms" } else { "" })?;
    let row = |out: &mut dyn Write, name: &str, n: usize, rep: usize, verdict: String, m: MetricsSnapshot, ms: f64| {
        write!(
            out,
            "{name}\t{n}\t{rep}\t{verdict}\t{}\t{}\t{}\t{}\t{}",
            m.lattice_ops, m.yates_ops, m.block_balanced_calls, m.tripartition_iterations, m.mis_listed
        )?;
        if args.timing {
            write!(out, "\t{ms:.3}")?;
        }
        writeln!(out)
    };
    for n in args.n_min.max(1)..=args.n_max {
        for rep in 0..args.reps {
            let g = random_graph(n, 0.5, &mut rng)?;
            let m = Metrics::new();
            let start = Instant::now();
            let chi = chromatic_number(&g, &cfg, &m)?.chi;
            row(out, "chromatic", n, rep, chi.to_string(), m.snapshot(), start.elapsed().as_secs_f64() * 1e3)?;
        }
        // Planted instances need [n] to split into parts of at most ⌊νn⌋.
        if n < 3 || 3 * (5 * n / 12) < n {
            continue;
        }
        for rep in 0..args.reps {
            let noise = rng.random_range(2..=8);
            let inst = planted_tripartition(n, &nu, noise, &mut rng)?;
            let [f1, f2, f3] = &inst.families;
            let m = Metrics::new();
            let start = Instant::now();
            let found = solve_tripartition(f1, f2, f3, &TripartitionConfig::desk(nu.clone(), n), provider.as_ref(), &m)?.found();
            row(out, "partition3", n, rep, found.to_string(), m.snapshot(), start.elapsed().as_secs_f64() * 1e3)?;
        }
    }
    Ok(())
}
