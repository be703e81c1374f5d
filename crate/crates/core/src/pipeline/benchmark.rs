//! Side-by-side comparison of greedy, randomized double greedy and exhaustive
//! search on a batch of synthetic shops.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PipelineError, SynthesisSpec};
use crate::domain::{ConsumerProfile, Money, RuleSet};
use crate::optimizer::{
    exhaustive_search, filter_by_rules, generate_candidates, greedy_search, randomized_usm, score_candidates,
    CandidatePool, DEFAULT_ENUMERATION_LIMIT, DEFAULT_POOL_CAP,
};
use crate::oracle::rng::derive_seed;
use crate::oracle::{ChoiceModelParams, SimulatorOracle};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkSpec {
    pub shops: usize,
    pub candidates_per_shop: usize,
    pub usm_seeds: usize,
    /// Each shop's mean basket value is drawn uniformly from this range.
    #[serde(rename = "min_mean_spend_cents")]
    pub min_mean_spend: Money,
    #[serde(rename = "max_mean_spend_cents")]
    pub max_mean_spend: Money,
    pub rules: RuleSet,
    /// Choice model; the seed is replaced per shop.
    pub choice: ChoiceModelParams,
    /// Population template; count, seed and mean spend are set per shop.
    pub population: SynthesisSpec,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            shops: 100,
            candidates_per_shop: 12,
            usm_seeds: 20,
            min_mean_spend: Money::from_dollars(25),
            max_mean_spend: Money::from_dollars(55),
            rules: RuleSet {
                min_threshold: Money::from_dollars(15),
                max_threshold: Money::from_dollars(200),
                ..RuleSet::default()
            },
            choice: ChoiceModelParams::default(),
            population: SynthesisSpec::default(),
        }
    }
}

/// One shop's optimization instance.
pub struct ShopInstance {
    pub index: usize,
    pub seed: u64,
    pub population: Vec<ConsumerProfile>,
    pub oracle: SimulatorOracle,
    /// Rule-filtered candidate sequence, truncated to the configured size.
    pub candidates: CandidatePool,
}

pub fn build_shop_instance(spec: &BenchmarkSpec, seed: u64, index: usize) -> Result<ShopInstance, PipelineError> {
    let shop_seed = derive_seed(seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(shop_seed);
    let (lo, hi) = (spec.min_mean_spend.cents(), spec.max_mean_spend.cents());
    if lo == 0 || lo > hi {
        return Err(PipelineError::Config("benchmark: need 0 < min_mean_spend <= max_mean_spend".into()));
    }
    let mean_spend = Money::from_cents(rng.random_range(lo..=hi));
    let pop_spec = SynthesisSpec { mean_spend, id_prefix: format!("s{index}-"), ..spec.population.clone() };
    let population = super::synthesize_population(&pop_spec, derive_seed(shop_seed, 1))?;
    let oracle = SimulatorOracle::new(ChoiceModelParams { seed: derive_seed(shop_seed, 2), ..spec.choice.clone() })
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let pool = generate_candidates(&spec.rules, DEFAULT_POOL_CAP).map_err(|e| PipelineError::stage("candidates", e))?;
    let scored = score_candidates(&pool, &population, &oracle).map_err(|e| PipelineError::stage("score", e))?;
    let candidates = filter_by_rules(&scored, &spec.rules).truncated(spec.candidates_per_shop);
    Ok(ShopInstance { index, seed: shop_seed, population, oracle, candidates })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShopOutcome {
    pub shop: usize,
    pub candidates: usize,
    pub greedy_cents: u64,
    pub usm_mean_cents: f64,
    pub usm_best_cents: u64,
    pub exhaustive_cents: u64,
    pub greedy_ms: f64,
    pub usm_ms: f64,
    pub exhaustive_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub name: String,
    #[serde(rename = "revenue_cents")]
    pub revenue: Money,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub instance: String,
    pub seed: u64,
    pub usm_seeds: usize,
    pub methods: Vec<MethodRow>,
    pub shops: Vec<ShopOutcome>,
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

pub fn benchmark_shop(instance: &ShopInstance, rules: &RuleSet, usm_seeds: usize) -> Result<ShopOutcome, PipelineError> {
    let (pop, oracle, cands) = (&instance.population, &instance.oracle, &instance.candidates);

    let start = Instant::now();
    let greedy = greedy_search(cands, pop, oracle, rules, None).map_err(|e| PipelineError::stage("greedy", e))?;
    let greedy_ms = ms(start);

    let start = Instant::now();
    let mut usm = Vec::with_capacity(usm_seeds);
    for j in 0..usm_seeds {
        let (r, _) = randomized_usm(cands, pop, oracle, derive_seed(instance.seed, 1000 + j as u64))
            .map_err(|e| PipelineError::stage("usm", e))?;
        usm.push(r.revenue.cents());
    }
    let usm_ms = ms(start);

    let start = Instant::now();
    let exhaustive = exhaustive_search(cands, pop, oracle, rules, None, DEFAULT_ENUMERATION_LIMIT)
        .map_err(|e| PipelineError::stage("exhaustive", e))?;
    let exhaustive_ms = ms(start);

    Ok(ShopOutcome {
        shop: instance.index,
        candidates: cands.len(),
        greedy_cents: greedy.revenue.cents(),
        usm_mean_cents: usm.iter().sum::<u64>() as f64 / usm.len().max(1) as f64,
        usm_best_cents: usm.iter().copied().max().unwrap_or(0),
        exhaustive_cents: exhaustive.revenue.cents(),
        greedy_ms,
        usm_ms,
        exhaustive_ms,
    })
}

/// Runs all three methods on `spec.shops` synthetic shops.
pub fn run_benchmark(spec: &BenchmarkSpec, seed: u64) -> Result<BenchmarkReport, PipelineError> {
    if spec.usm_seeds == 0 || spec.shops == 0 {
        return Err(PipelineError::Config("benchmark needs at least one shop and one USM seed".into()));
    }
    // Instances depend only on (seed, index), so building them in parallel is deterministic.
    let instances =
        (0..spec.shops).into_par_iter().map(|i| build_shop_instance(spec, seed, i)).collect::<Result<Vec<_>, _>>()?;
    // Timings compare algorithmic cost, so every method runs on one thread.
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| PipelineError::Io(format!("thread pool: {e}")))?;
    let shops = single.install(|| {
        instances.iter().map(|inst| benchmark_shop(inst, &spec.rules, spec.usm_seeds)).collect::<Result<Vec<_>, _>>()
    })?;
    let total = |f: &dyn Fn(&ShopOutcome) -> f64| shops.iter().map(f).sum::<f64>();
    let methods = vec![
        MethodRow {
            name: "Global Optimum Searching".into(),
            revenue: Money::from_cents(shops.iter().map(|s| s.exhaustive_cents).sum()),
            wall_time_ms: total(&|s| s.exhaustive_ms),
        },
        MethodRow {
            name: "Randomized USM Searching (mean)".into(),
            revenue: Money::from_cents_f64(total(&|s| s.usm_mean_cents)),
            wall_time_ms: total(&|s| s.usm_ms),
        },
        MethodRow {
            name: "Randomized USM Searching (best)".into(),
            revenue: Money::from_cents(shops.iter().map(|s| s.usm_best_cents).sum()),
            wall_time_ms: total(&|s| s.usm_ms),
        },
        MethodRow {
            name: "Greedy Searching".into(),
            revenue: Money::from_cents(shops.iter().map(|s| s.greedy_cents).sum()),
            wall_time_ms: total(&|s| s.greedy_ms),
        },
    ];
    Ok(BenchmarkReport {
        instance: format!("{} shops x {} candidates", spec.shops, spec.candidates_per_shop),
        seed,
        usm_seeds: spec.usm_seeds,
        methods,
        shops,
    })
}

impl BenchmarkReport {
    /// Shops where the mean double-greedy revenue is strictly above greedy.
    pub fn usm_wins(&self) -> usize {
        self.shops.iter().filter(|s| s.usm_mean_cents > s.greedy_cents as f64).count()
    }

    pub fn method(&self, prefix: &str) -> Option<&MethodRow> {
        self.methods.iter().find(|m| m.name.starts_with(prefix))
    }

    /// Aligned text table: method, revenue, time.
    pub fn to_table(&self) -> String {
        let rows: Vec<[String; 3]> = self
            .methods
            .iter()
            .map(|m| [m.name.clone(), m.revenue.to_string(), format!("{:.1} ms", m.wall_time_ms)])
            .collect();
        let mut out = render_table(&["Search Method", "GMV", "Time Cost"], &rows);
        let _ = writeln!(out, "{}; USM mean > greedy on {}/{} shops", self.instance, self.usm_wins(), self.shops.len());
        out
    }
}

/// Renders rows under a header with columns padded to equal width.
pub fn render_table<const N: usize>(header: &[&str; N], rows: &[[String; N]]) -> String {
    let mut widths = header.map(str::len);
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join(" | ").trim_end().to_string()
    };
    let rule = widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-");
    let mut out = String::new();
    let _ = writeln!(out, "{}", line(header.to_vec()));
    let _ = writeln!(out, "{rule}");
    for row in rows {
        let _ = writeln!(out, "{}", line(row.iter().map(String::as_str).collect()));
    }
    out
}
