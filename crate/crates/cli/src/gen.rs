use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use arcolor_core::chromatic::CaseLabel;
use arcolor_core::gen::{
    case_profile, planted_coloring, planted_tripartition, random_bounded_family, random_graph, rng_from_seed,
    unsolvable_tripartition,
};
use arcolor_core::{Rational, SetFamily};

use crate::common::{format_set, format_triple, parse_rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// G(n, p).
    Graph,
    /// Planted coloring whose class sizes fit case B at slack d.
    CaseB,
    CaseC,
    CaseD,
    CaseE,
    /// Three ν-bounded families hiding a partition of [n].
    TripartitionYes,
    /// Three ν-bounded families with no partition, checked by brute force.
    TripartitionNo,
    /// One family of random ν-bounded sets.
    Family,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the instance and `manifest.tsv`; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Edge probability.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Slack d for the case kinds.
    #[arg(long, value_parser = parse_rat, default_value = "1")]
    d: Rational,
    /// Member size bound ν for the family kinds.
    #[arg(long, value_parser = parse_rat, default_value = "5/12")]
    nu: Rational,
    /// Members per family; for planted instances, noise members.
    #[arg(long, default_value_t = 6)]
    count: usize,
}

/// Writes the instance file and `manifest.tsv` (`key<TAB>value` lines).
pub fn gen(args: &GenArgs) -> Result<()> {
    let mut rng = rng_from_seed(args.seed);
    let kind = args.kind.to_possible_value().expect("no skipped variants").get_name().to_string();
    let mut manifest = format!("kind\t{kind}\nn\t{}\nseed\t{}\n", args.n, args.seed);
    let (file, text) = match args.kind {
        Kind::Graph => {
            let g = random_graph(args.n, args.p, &mut rng)?;
            writeln!(manifest, "p\t{}\nedges\t{}", args.p, g.edge_count())?;
            ("graph.col", g.to_dimacs())
        }
        Kind::CaseB | Kind::CaseC | Kind::CaseD | Kind::CaseE => {
            let case = match args.kind {
                Kind::CaseB => CaseLabel::B,
                Kind::CaseC => CaseLabel::C,
                Kind::CaseD => CaseLabel::D,
                _ => CaseLabel::E,
            };
            let profile = case_profile(case, args.n, &args.d, &mut rng)?;
            let planted = planted_coloring(profile.sizes(), args.p, &mut rng)?;
            let sizes: Vec<String> = profile.sizes().iter().map(usize::to_string).collect();
            writeln!(manifest, "p\t{}\nd\t{}\nedges\t{}", args.p, args.d, planted.graph.edge_count())?;
            writeln!(manifest, "colors\t{}\nsizes\t{}", profile.k(), sizes.join(","))?;
            for (i, &class) in planted.classes.iter().enumerate() {
                writeln!(manifest, "class{}\t{}", i + 1, format_set(class))?;
            }
            ("graph.col", planted.graph.to_dimacs())
        }
        Kind::TripartitionYes | Kind::TripartitionNo => {
            let inst = if args.kind == Kind::TripartitionYes {
                planted_tripartition(args.n, &args.nu, args.count, &mut rng)?
            } else {
                unsolvable_tripartition(args.n, &args.nu, args.count, 1000, &mut rng)?
            };
            writeln!(manifest, "nu\t{}\ncount\t{}", args.nu, args.count)?;
            match inst.planted {
                Some(w) => writeln!(manifest, "witness\t{}", format_triple(w))?,
                None => writeln!(manifest, "witness\tnone (brute force)")?,
            }
            let [a, b, c] = &inst.families;
            ("families.txt", SetFamily::three_to_text([a, b, c]))
        }
        Kind::Family => {
            let f = random_bounded_family(args.n, &args.nu, args.count, &mut rng)?;
            writeln!(manifest, "nu\t{}\ncount\t{}", args.nu, args.count)?;
            ("family.txt", f.to_text())
        }
    };
    writeln!(manifest, "instance\t{file}")?;
    fs::create_dir_all(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let write = |name: &str, body: &str| {
        let path = args.out.join(name);
        fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))
    };
    write(file, &text)?;
    write("manifest.tsv", &manifest)
}
