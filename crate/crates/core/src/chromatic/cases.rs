use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use super::cover::{detect_balanced_k_cover_with, list_colorable_up_to};
use super::CaseLabel;
use crate::arith::{ceil_usize, floor_usize, parse_rational, q, qu, Rational};
use crate::error::{Error, Result};
use crate::graph::{bipartition_within, for_each_mis, independent_set_family, k_colorable_brute, ColoringEngine, Graph, MisReduction};
use crate::lattice::{list_t_covered, LatticeIndex, MAX_FULL_LATTICE_BITS};
use crate::metrics::Metrics;
use crate::sets::{popcount, Universe};
use crate::tensor::YatesOptions;
use crate::tripartition::{DecompositionProvider, TrivialProvider};

/// How the balance slack `d` is chosen for an `n`-vertex graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlackRule {
    /// `d` is this value regardless of `n`.
    Absolute(Rational),
    /// `d = c·n`.
    PerVertex(Rational),
}

impl SlackRule {
    pub fn resolve(&self, n: usize) -> Rational {
        match self {
            SlackRule::Absolute(d) => d.clone(),
            SlackRule::PerVertex(c) => c * qu(n),
        }
    }

    /// Accepts `<rational>`, `n/<rational>` and `<rational>n`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |e: String| Error::param(format!("slack {s:?}: {e}"));
        let rule = if let Some(den) = s.strip_prefix("n/") {
            let den = parse_rational(den).map_err(bad)?;
            if den <= q(0, 1) {
                return Err(Error::param(format!("slack {s:?} must be positive")));
            }
            SlackRule::PerVertex(q(1, 1) / den)
        } else if let Some(c) = s.strip_suffix('n') {
            SlackRule::PerVertex(parse_rational(c.trim_end_matches('*')).map_err(bad)?)
        } else {
            SlackRule::Absolute(parse_rational(s).map_err(bad)?)
        };
        let positive = match &rule {
            SlackRule::Absolute(v) | SlackRule::PerVertex(v) => *v > q(0, 1),
        };
        if !positive {
            return Err(Error::param(format!("slack {s:?} must be positive")));
        }
        Ok(rule)
    }
}

impl Default for SlackRule {
    fn default() -> Self {
        SlackRule::PerVertex(q(1, 145))
    }
}

impl fmt::Display for SlackRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlackRule::Absolute(d) => write!(f, "{d}"),
            SlackRule::PerVertex(c) => write!(f, "{c}n"),
        }
    }
}

#[derive(Clone)]
pub struct PipelineConfig {
    pub slack: SlackRule,
    pub engine: Arc<dyn ColoringEngine>,
    pub provider: Arc<dyn DecompositionProvider>,
    /// After the cases at a given `k` all fail, decide `k`-colorability
    /// exactly and record whether that changed the answer.
    pub fallback: bool,
    pub yates: YatesOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            slack: SlackRule::default(),
            engine: Arc::new(MisReduction),
            provider: Arc::new(TrivialProvider::new()),
            fallback: true,
            yates: YatesOptions::default(),
        }
    }
}

impl fmt::Debug for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PipelineConfig")
            .field("slack", &self.slack)
            .field("engine", &self.engine.name())
            .field("fallback", &self.fallback)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStep {
    Case(CaseLabel),
    Fallback,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStep::Case(c) => write!(f, "{c}"),
            TraceStep::Fallback => f.write_str("fallback"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub k: usize,
    pub step: TraceStep,
    pub verdict: bool,
    /// Free-form counters, `key=value` separated by spaces.
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChromaticOutcome {
    pub chi: usize,
    pub d: Rational,
    pub trace: Vec<TraceRow>,
    /// The exact check found a coloring the cases missed.
    pub fallback_fired: bool,
}

fn check_d(d: &Rational) -> Result<()> {
    if *d <= q(0, 1) {
        return Err(Error::param(format!("slack d must be positive, got {d}")));
    }
    Ok(())
}

/// `k ≤ 3`: edgeless test, bipartiteness, or the engine's 3-coloring.
pub fn case_a(g: &Graph, k: usize, cfg: &PipelineConfig) -> Result<bool> {
    Ok(match k {
        0 => false,
        1 => g.edge_count() == 0,
        2 => bipartition_within(g, g.full()).is_some(),
        3 => cfg.engine.three_colorable(g, g.full()),
        _ => return Err(Error::pre(format!("case A needs k ≤ 3, got {k}"))),
    })
}

/// Four large classes: some `X` with `|X| ≤ 6d` and `G[X]`
/// `(k−4)`-colorable leaves a 4-colorable `G[V∖X]`. At `k = 4` only
/// `X = ∅` qualifies. The size bound is clipped to `n`.
pub fn case_b(g: &Graph, k: usize, d: &Rational, cfg: &PipelineConfig, metrics: &Metrics) -> Result<bool> {
    check_d(d)?;
    if k < 4 {
        return Err(Error::pre(format!("case B needs k ≥ 4, got {k}")));
    }
    if k == 4 {
        return Ok(cfg.engine.four_colorable(g, g.full()));
    }
    let bound = floor_usize(&(d * qu(6))).min(g.n());
    let xs = list_colorable_up_to(g, k - 4, bound, metrics)?;
    let found = xs.iter().any(|x| cfg.engine.four_colorable(g, g.full() & !x));
    Ok(found)
}

/// Two large classes: some `X` with `|X| ≤ n/2 − d` and `G[X]`
/// `(k−2)`-colorable leaves a bipartite `G[V∖X]`.
pub fn case_c(g: &Graph, k: usize, d: &Rational, _cfg: &PipelineConfig, metrics: &Metrics) -> Result<bool> {
    check_d(d)?;
    if k < 3 {
        return Err(Error::pre(format!("case C needs k ≥ 3, got {k}")));
    }
    let bound = qu(g.n()) / qu(2) - d;
    if bound < q(0, 1) {
        return Ok(false);
    }
    let xs = list_colorable_up_to(g, k - 2, floor_usize(&bound), metrics)?;
    let found = xs.iter().any(|x| bipartition_within(g, g.full() & !x).is_some());
    Ok(found)
}

/// Counters from one run of case D.
#[derive(Debug, Default, Clone, Copy)]
struct CaseDStats {
    mis: usize,
    direct: usize,
}

fn case_d_stats(
    g: &Graph,
    k: usize,
    d: &Rational,
    cfg: &PipelineConfig,
    metrics: &Metrics,
) -> Result<(bool, CaseDStats)> {
    check_d(d)?;
    if k < 4 {
        return Err(Error::pre(format!("case D needs k ≥ 4, got {k}")));
    }
    let n = g.n();
    let half = qu(n) / qu(2);
    let lo = &half - d;
    let lo = if lo <= q(0, 1) { 0 } else { ceil_usize(&lo) };
    let hi = floor_usize(&(&half + d)).min(n);
    let mut stats = CaseDStats::default();
    let mut failure = None;
    let flow = for_each_mis(g, g.full(), lo, hi, |x| {
        stats.mis += 1;
        Metrics::add(&metrics.mis_listed, 1);
        let rest = g.full() & !x;
        let size = popcount(rest);
        if size == 0 {
            return ControlFlow::Break(());
        }
        let nu = q(1, 3) + d * qu(2) / qu(size);
        let found = if nu >= q(1, 2) {
            stats.direct += 1;
            Ok(k_colorable_brute(g, rest, k - 1))
        } else {
            g.induced(rest).and_then(|sub| {
                let f = independent_set_family(&sub, floor_usize(&(&nu * qu(size))))?;
                detect_balanced_k_cover_with(&f, k - 1, &nu, cfg.provider.as_ref(), &cfg.yates, metrics)
            })
        };
        match found {
            Ok(true) => ControlFlow::Break(()),
            Ok(false) => ControlFlow::Continue(()),
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((flow.is_break(), stats))
}

/// One class near `n/2`: some maximal independent set `X` with
/// `n/2 − d ≤ |X| ≤ n/2 + d` leaves `G[V∖X]` with a ν-balanced
/// `(k−1)`-cover by its independent sets, `ν = 1/3 + 2d/|V∖X|`. When that
/// `ν` reaches `1/2` the remainder is colored directly instead.
pub fn case_d(g: &Graph, k: usize, d: &Rational, cfg: &PipelineConfig, metrics: &Metrics) -> Result<bool> {
    Ok(case_d_stats(g, k, d, cfg, metrics)?.0)
}

/// No dominant classes: the independent sets give a ν-balanced `k`-cover
/// for `ν = 1/2 − d/n`. `false` when that `ν` is below `1/3`.
pub fn case_e(g: &Graph, k: usize, d: &Rational, cfg: &PipelineConfig, metrics: &Metrics) -> Result<bool> {
    check_d(d)?;
    if k < 3 {
        return Err(Error::pre(format!("case E needs k ≥ 3, got {k}")));
    }
    let n = g.n();
    let nu = q(1, 2) - d / qu(n);
    if nu < q(1, 3) {
        return Ok(false);
    }
    let f = independent_set_family(g, floor_usize(&(&nu * qu(n))))?;
    detect_balanced_k_cover_with(&f, k, &nu, cfg.provider.as_ref(), &cfg.yates, metrics)
}

/// Exact `k`-colorability: `[n]` is `k`-covered by independent sets.
fn exactly_colorable(g: &Graph, k: usize, metrics: &Metrics) -> Result<bool> {
    if g.n() > MAX_FULL_LATTICE_BITS {
        return Ok(k_colorable_brute(g, g.full(), k));
    }
    let universe = Universe::new(g.n())?;
    let index = Arc::new(LatticeIndex::full(universe)?);
    let f = independent_set_family(g, g.n())?;
    Ok(list_t_covered(&f, index, k, metrics)?.members().contains(&g.full()))
}

/// Smallest `k` for which one of the applicable cases succeeds, trying
/// `k = 1, 2, …`. Case A alone decides `k ≤ 3`; from `k = 4` on, cases
/// B, C, D and E run in that order until one succeeds.
pub fn chromatic_number(g: &Graph, cfg: &PipelineConfig, metrics: &Metrics) -> Result<ChromaticOutcome> {
    let n = g.n();
    let d = cfg.slack.resolve(n);
    check_d(&d)?;
    let mut trace = Vec::new();
    for k in 1..=n {
        let mut hit = false;
        if k <= 3 {
            hit = case_a(g, k, cfg)?;
            trace.push(TraceRow { k, step: TraceStep::Case(CaseLabel::A), verdict: hit, note: String::new() });
        } else {
            for label in [CaseLabel::B, CaseLabel::C, CaseLabel::D, CaseLabel::E] {
                let mut note = String::new();
                let verdict = match label {
                    CaseLabel::B => case_b(g, k, &d, cfg, metrics)?,
                    CaseLabel::C => case_c(g, k, &d, cfg, metrics)?,
                    CaseLabel::D => {
                        let (v, s) = case_d_stats(g, k, &d, cfg, metrics)?;
                        note = format!("mis={} direct={}", s.mis, s.direct);
                        v
                    }
                    CaseLabel::E => case_e(g, k, &d, cfg, metrics)?,
                    CaseLabel::A => unreachable!(),
                };
                trace.push(TraceRow { k, step: TraceStep::Case(label), verdict, note });
                if verdict {
                    hit = true;
                    break;
                }
            }
        }
        if hit {
            return Ok(ChromaticOutcome { chi: k, d, trace, fallback_fired: false });
        }
        if cfg.fallback {
            let verdict = exactly_colorable(g, k, metrics)?;
            trace.push(TraceRow { k, step: TraceStep::Fallback, verdict, note: String::new() });
            if verdict {
                return Ok(ChromaticOutcome { chi: k, d, trace, fallback_fired: true });
            }
        }
    }
    Err(Error::pre(format!("no case found a coloring with at most {n} colors")))
}
