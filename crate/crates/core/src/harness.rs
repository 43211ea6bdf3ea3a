//! Experiments, trial orchestration and reports.
//!
//! Every trial draws from its own generator seeded by
//! `trial_seed(master, index)`; trials run on rayon and are collected in
//! index order, so reports do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{bind, book_table_bundles, bundle, intervene, unbind, unbind_from_bundle, RoleFillerPair, SoapOpera};
use crate::baselines::{nested_component_count, tensor_bind, tensor_unbind, Hrr, RealVector};
use crate::cleanup::{CleanupMemory, Cr2Trace, ReadoutResult};
use crate::error::{Error, Result};
use crate::gf2::{BlockState, Lfsr};
use crate::hypervector::{fnv1a64, BlockPolynomialConfig, Hypervector};

/// Every tolerance the experiments check against.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative error allowed on the mean distance against `q/2`.
    pub qod_mean_rel: f64,
    /// Relative error allowed on the distance variance against `q/4`.
    pub qod_variance_rel: f64,
    /// Per-block avalanche band as fractions of `q`.
    pub avalanche_low: f64,
    pub avalanche_high: f64,
    /// Accuracy that counts as recovered when locating the capacity knee.
    pub knee_accuracy: f64,
    /// HRR recoveries at or above this cosine count as exact.
    pub hrr_exact_cosine: f64,
    /// Fraction of HRR trials that must fall below `hrr_exact_cosine`.
    pub hrr_lossy_fraction: f64,
    /// Fraction of role readouts that must come back right.
    pub recovery_fraction: f64,
    pub cr2_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            qod_mean_rel: 0.02,
            qod_variance_rel: 0.10,
            avalanche_low: 0.35,
            avalanche_high: 0.65,
            knee_accuracy: 0.95,
            hrr_exact_cosine: 0.999,
            hrr_lossy_fraction: 0.99,
            recovery_fraction: 0.99,
            cr2_abs: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn describe(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("qod_mean_rel", self.qod_mean_rel),
            ("qod_variance_rel", self.qod_variance_rel),
            ("avalanche_low", self.avalanche_low),
            ("avalanche_high", self.avalanche_high),
            ("knee_accuracy", self.knee_accuracy),
            ("hrr_exact_cosine", self.hrr_exact_cosine),
            ("hrr_lossy_fraction", self.hrr_lossy_fraction),
            ("recovery_fraction", self.recovery_fraction),
            ("cr2_abs", self.cr2_abs),
        ]
    }
}

/// Generator seed for trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut bytes = [0u8; 16];
    bytes[..8].copy_from_slice(&master.to_le_bytes());
    bytes[8..].copy_from_slice(&index.to_le_bytes());
    fnv1a64(&bytes)
}

pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, index))
}

/// Runs `f` for every trial index in parallel, results in index order.
pub fn run_trials<T, F>(master: u64, first: u64, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    (first..first + count)
        .into_par_iter()
        .map(|i| f(i, &mut trial_rng(master, i)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricStats {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricStats {
    pub fn from_samples(name: &str, samples: &[f64]) -> Self {
        let count = samples.len();
        if count == 0 {
            return MetricStats {
                name: name.to_string(),
                count,
                mean: f64::NAN,
                variance: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
            };
        }
        let n = count as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        MetricStats {
            name: name.to_string(),
            count,
            mean,
            variance,
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: String,
    pub target: String,
    pub pass: bool,
}

/// Rows for CSV output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DataTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl DataTable {
    pub fn new(columns: &[&str]) -> Self {
        DataTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub experiment: String,
    pub config_fingerprint: u64,
    pub master_seed: u64,
    pub sample_count: usize,
    pub metrics: Vec<MetricStats>,
    pub checks: Vec<Check>,
    pub tolerances: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub table: DataTable,
}

impl TrialReport {
    pub fn new(experiment: &str, config_fingerprint: u64, master_seed: u64, tol: &Tolerances) -> Self {
        TrialReport {
            experiment: experiment.to_string(),
            config_fingerprint,
            master_seed,
            sample_count: 0,
            metrics: Vec::new(),
            checks: Vec::new(),
            tolerances: tol.describe().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            notes: Vec::new(),
            table: DataTable::default(),
        }
    }

    pub fn check(&mut self, name: &str, observed: impl ToString, target: impl ToString, pass: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            observed: observed.to_string(),
            target: target.to_string(),
            pass,
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn metric(&self, name: &str) -> Option<&MetricStats> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment: {}", self.experiment);
        let _ = writeln!(out, "config: 0x{:016x}", self.config_fingerprint);
        let _ = writeln!(out, "seed: {}", self.master_seed);
        let _ = writeln!(out, "samples: {}", self.sample_count);
        for m in &self.metrics {
            let _ = writeln!(
                out,
                "metric {}: n={} mean={:.6} var={:.6} min={:.6} max={:.6}",
                m.name, m.count, m.mean, m.variance, m.min, m.max
            );
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "check {}: {} observed={} target={}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.observed,
                c.target
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let tol: Vec<String> = self.tolerances.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(out, "tolerances: {}", tol.join(" "));
        let _ = writeln!(out, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }

    /// The data table when there is one, otherwise the metric summary.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.table.columns.is_empty() {
            out.push_str("experiment,metric,count,mean,variance,min,max\n");
            for m in &self.metrics {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    self.experiment, m.name, m.count, m.mean, m.variance, m.min, m.max
                );
            }
        } else {
            out.push_str(&self.table.columns.join(","));
            out.push('\n');
            for row in &self.table.rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        out
    }
}

fn within_rel(observed: f64, target: f64, rel: f64) -> bool {
    (observed - target).abs() <= rel * target.abs()
}

/// A cleanup where a tie at the top counts as a miss rather than an error.
#[derive(Clone, Debug, PartialEq)]
pub struct Readout {
    pub winner: Option<String>,
    pub cr1: f64,
    pub result: Option<ReadoutResult>,
}

impl Readout {
    pub fn is(&self, token: &str) -> bool {
        self.winner.as_deref() == Some(token)
    }

    pub fn label(&self) -> &str {
        self.winner.as_deref().unwrap_or("<tie>")
    }
}

pub fn read_out(mem: &CleanupMemory, query: &Hypervector) -> Result<Readout> {
    match mem.cleanup(query) {
        Ok(r) => Ok(Readout {
            winner: Some(r.winner.clone()),
            cr1: r.cr1,
            result: Some(r),
        }),
        Err(Error::TiedWinner { votes, .. }) => Ok(Readout {
            winner: None,
            cr1: votes as f64 / query.blocks().len() as f64,
            result: None,
        }),
        Err(e) => Err(e),
    }
}

fn random_state<R: Rng + ?Sized>(rng: &mut R, q: u32) -> BlockState {
    let mask = if q == 32 { u32::MAX } else { (1u32 << q) - 1 };
    rng.gen::<u32>() & mask
}

/// Distances `hamming(diffuse(a), diffuse(b))` for random distinct pairs
/// within random blocks.
pub fn qod_experiment(cfg: &BlockPolynomialConfig, samples: usize, master_seed: u64, tol: &Tolerances) -> TrialReport {
    let q = cfg.block_bits();
    let n = cfg.block_count();
    let distances: Vec<f64> = run_trials(master_seed, 0, samples as u64, |_, rng| {
        let lfsr = cfg.lfsr(rng.gen_range(0..n));
        let a = random_state(rng, q);
        let mut b = random_state(rng, q);
        while b == a {
            b = random_state(rng, q);
        }
        (lfsr.diffuse(a) ^ lfsr.diffuse(b)).count_ones() as f64
    });
    let stats = MetricStats::from_samples("distance", &distances);
    let mut report = TrialReport::new("qod", cfg.config_id(), master_seed, tol);
    report.sample_count = samples;
    let (mean_t, var_t) = (q as f64 / 2.0, q as f64 / 4.0);
    report.check(
        "mean",
        format!("{:.6}", stats.mean),
        format!("{mean_t} +/- {}%", tol.qod_mean_rel * 100.0),
        within_rel(stats.mean, mean_t, tol.qod_mean_rel),
    );
    report.check(
        "variance",
        format!("{:.6}", stats.variance),
        format!("{var_t} +/- {}%", tol.qod_variance_rel * 100.0),
        within_rel(stats.variance, var_t, tol.qod_variance_rel),
    );
    report.check("min_distance", stats.min, ">= 1", samples > 0 && stats.min >= 1.0);
    let mut table = DataTable::new(&["distance", "count"]);
    let mut hist: BTreeMap<u64, usize> = BTreeMap::new();
    for d in &distances {
        *hist.entry(*d as u64).or_default() += 1;
    }
    for (d, c) in &hist {
        table.push(vec![d.to_string(), c.to_string()]);
    }
    report.table = table;
    report.metrics.push(stats);
    report
}

/// Distance histogram over every unordered pair of distinct states.
/// Practical for `q <= 12`.
pub fn qod_exhaustive_table(lfsr: &Lfsr) -> BTreeMap<u32, usize> {
    let size = 1u32 << lfsr.width();
    let mut table = BTreeMap::new();
    for a in 0..size {
        let da = lfsr.diffuse(a);
        for b in a + 1..size {
            *table.entry((da ^ lfsr.diffuse(b)).count_ones()).or_default() += 1;
        }
    }
    table
}

/// `weight(diffuse(e_i))` for every block and bit, with a rotate-by-one
/// contrast that always has weight 1.
pub fn avalanche_experiment(cfg: &BlockPolynomialConfig, tol: &Tolerances) -> TrialReport {
    let q = cfg.block_bits();
    let mut report = TrialReport::new("avalanche", cfg.config_id(), 0, tol);
    let mut table = DataTable::new(&["block", "generator", "mean_weight", "min_weight", "max_weight"]);
    let mut block_means = Vec::with_capacity(cfg.block_count());
    let mut all = Vec::new();
    for b in 0..cfg.block_count() {
        let lfsr = cfg.lfsr(b);
        let weights: Vec<f64> = (0..q).map(|i| lfsr.diffuse(1 << i).count_ones() as f64).collect();
        let s = MetricStats::from_samples("w", &weights);
        table.push(vec![
            b.to_string(),
            format!("0x{:x}", lfsr.poly().mask()),
            format!("{:.4}", s.mean),
            s.min.to_string(),
            s.max.to_string(),
        ]);
        block_means.push(s.mean);
        all.extend(weights);
    }
    let (lo, hi) = (tol.avalanche_low * q as f64, tol.avalanche_high * q as f64);
    let outside: Vec<usize> = (0..block_means.len())
        .filter(|&b| block_means[b] < lo || block_means[b] > hi)
        .collect();
    report.sample_count = all.len();
    report.check(
        "block_means_in_band",
        format!("{} of {} outside", outside.len(), block_means.len()),
        format!("[{lo}, {hi}]"),
        outside.is_empty(),
    );
    if !outside.is_empty() {
        report.note(format!("blocks outside band: {outside:?}"));
    }
    let all_stats = MetricStats::from_samples("weight", &all);
    report.check("min_weight", all_stats.min, ">= 1", all_stats.min >= 1.0);
    let rotate = |s: u32| ((s << 1) | (s >> (q - 1))) & cfg.block_mask();
    let contrast: Vec<f64> = (0..q).map(|i| rotate(1 << i).count_ones() as f64).collect();
    let contrast = MetricStats::from_samples("rotate_weight", &contrast);
    report.check(
        "rotate_contrast",
        contrast.max,
        "1",
        contrast.min == 1.0 && contrast.max == 1.0,
    );
    report.metrics.push(MetricStats::from_samples("block_mean", &block_means));
    report.metrics.push(all_stats);
    report.metrics.push(contrast);
    report.table = table;
    report
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityParams {
    pub vocab_size: usize,
    pub max_arity: usize,
    pub max_depth: usize,
    pub trials: usize,
}

/// Vocabulary `tok0 .. tok{n-1}` of item vectors.
pub fn token_vocabulary(cfg: &BlockPolynomialConfig, n: usize) -> Result<(Vec<String>, CleanupMemory)> {
    let names: Vec<String> = (0..n).map(|i| format!("tok{i}")).collect();
    let mem = CleanupMemory::from_tokens(cfg, names.iter().map(String::as_str))?;
    Ok((names, mem))
}

fn largest_contiguous(acc: &[(usize, f64)], knee: f64) -> usize {
    acc.iter().take_while(|(_, a)| *a >= knee).last().map_or(0, |(x, _)| *x)
}

/// Flat arity sweep and nested depth sweep of unbind-then-cleanup accuracy.
///
/// Flat: `k` random roles bound to vocabulary fillers; every role is read
/// back. Nested: at each level the previous structure is bound to a role
/// and bundled with one sibling binding; the innermost filler is read back
/// by unbinding the roles outermost first.
pub fn capacity_experiment(
    cfg: &BlockPolynomialConfig,
    params: &CapacityParams,
    master_seed: u64,
    tol: &Tolerances,
) -> Result<TrialReport> {
    if params.vocab_size == 0 {
        return Err(Error::EmptyVocabulary);
    }
    let (names, mem) = token_vocabulary(cfg, params.vocab_size)?;
    let reference = (cfg.block_count() as f64).log2();
    let mut report = TrialReport::new("capacity", cfg.config_id(), master_seed, tol);
    let mut table = DataTable::new(&["sweep", "x", "trials", "accuracy", "mean_cr1", "log2_n"]);
    let trials = params.trials as u64;
    let mut flat = Vec::new();
    for k in 1..=params.max_arity {
        let base = (k as u64) * trials;
        let outcomes = run_trials(master_seed, base, trials, |_, rng| -> Result<Vec<(bool, f64)>> {
            let fillers: Vec<usize> = (0..k).map(|_| rng.gen_range(0..names.len())).collect();
            let pairs: Vec<RoleFillerPair> = fillers
                .iter()
                .map(|&f| RoleFillerPair::new(cfg.random(rng), mem.get(&names[f]).expect("in vocabulary").clone()))
                .collect();
            let s = bundle(cfg, &pairs)?;
            pairs
                .iter()
                .zip(&fillers)
                .map(|(p, &f)| {
                    let r = read_out(&mem, &unbind_from_bundle(cfg, &s, &p.role)?)?;
                    Ok((r.is(&names[f]), r.cr1))
                })
                .collect()
        });
        let flat_reads: Vec<(bool, f64)> = outcomes.into_iter().collect::<Result<Vec<_>>>()?.concat();
        let acc = flat_reads.iter().filter(|r| r.0).count() as f64 / flat_reads.len() as f64;
        let cr1 = flat_reads.iter().map(|r| r.1).sum::<f64>() / flat_reads.len() as f64;
        table.push(vec![
            "arity".into(),
            k.to_string(),
            trials.to_string(),
            format!("{acc:.6}"),
            format!("{cr1:.6}"),
            format!("{reference:.6}"),
        ]);
        flat.push((k, acc));
    }
    let mut nested = Vec::new();
    for d in 1..=params.max_depth {
        let base = (1 << 40) + (d as u64) * trials;
        let outcomes = run_trials(master_seed, base, trials, |_, rng| -> Result<(bool, f64)> {
            let target = rng.gen_range(0..names.len());
            let mut structure = mem.get(&names[target]).expect("in vocabulary").clone();
            let mut path = Vec::with_capacity(d);
            for _ in 0..d {
                let role = cfg.random(rng);
                let sibling_role = cfg.random(rng);
                let sibling = mem
                    .get(&names[rng.gen_range(0..names.len())])
                    .expect("in vocabulary")
                    .clone();
                structure = bundle(
                    cfg,
                    &[
                        RoleFillerPair::new(role.clone(), structure),
                        RoleFillerPair::new(sibling_role, sibling),
                    ],
                )?
                .value;
                path.push(role);
            }
            for role in path.iter().rev() {
                structure = unbind(cfg, &structure, role)?;
            }
            let r = read_out(&mem, &structure)?;
            Ok((r.is(&names[target]), r.cr1))
        });
        let reads = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let acc = reads.iter().filter(|r| r.0).count() as f64 / reads.len() as f64;
        let cr1 = reads.iter().map(|r| r.1).sum::<f64>() / reads.len() as f64;
        table.push(vec![
            "depth".into(),
            d.to_string(),
            trials.to_string(),
            format!("{acc:.6}"),
            format!("{cr1:.6}"),
            format!("{reference:.6}"),
        ]);
        nested.push((d, acc));
    }
    let max_k = largest_contiguous(&flat, tol.knee_accuracy);
    let max_d = largest_contiguous(&nested, tol.knee_accuracy);
    report.sample_count = params.trials * (params.max_arity + params.max_depth);
    report.metrics.push(MetricStats::from_samples(
        "arity_accuracy",
        &flat.iter().map(|x| x.1).collect::<Vec<_>>(),
    ));
    report.metrics.push(MetricStats::from_samples(
        "depth_accuracy",
        &nested.iter().map(|x| x.1).collect::<Vec<_>>(),
    ));
    if let Some(&(_, a1)) = flat.first() {
        report.check("arity_1_exact", a1, "1", a1 == 1.0);
    }
    report.note(format!("largest arity at >= {}: {max_k}", tol.knee_accuracy));
    report.note(format!("largest depth at >= {}: {max_d}", tol.knee_accuracy));
    report.note(format!("log2(N) reference: {reference:.4} (reported, not asserted)"));
    report.table = table;
    Ok(report)
}

/// `n` pseudotokens that avoid `exclude`.
pub fn pseudotokens(n: usize, master_seed: u64, exclude: &[String]) -> Vec<String> {
    let mut rng = trial_rng(master_seed, u64::MAX);
    let mut out: Vec<String> = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.gen_range(5..=9);
        let word: String = (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
        if !exclude.contains(&word) && !out.contains(&word) {
            out.push(word);
        }
    }
    out
}

/// Binds `Stem` to each novel token and checks bit-exact recovery. The
/// training vocabulary is built but never consulted.
pub fn inflection_experiment(
    cfg: &BlockPolynomialConfig,
    train_tokens: &[String],
    novel_tokens: &[String],
    tol: &Tolerances,
) -> Result<TrialReport> {
    let stem = cfg.item_vector(b"Stem")?;
    let train = CleanupMemory::from_tokens(cfg, train_tokens.iter().map(String::as_str))?;
    let mut report = TrialReport::new("inflect", cfg.config_id(), 0, tol);
    let mut table = DataTable::new(&["token", "novel", "exact"]);
    let mut exact = 0usize;
    let mut novel = 0usize;
    for tok in novel_tokens {
        let item = cfg.item_vector(tok.as_bytes())?;
        let ok = unbind(cfg, &bind(cfg, &stem, &item)?, &stem)? == item;
        let is_novel = !train.contains(tok);
        exact += ok as usize;
        novel += is_novel as usize;
        table.push(vec![tok.clone(), is_novel.to_string(), ok.to_string()]);
    }
    report.sample_count = novel_tokens.len();
    let frac = exact as f64 / novel_tokens.len().max(1) as f64;
    report.check("all_novel", novel, novel_tokens.len(), novel == novel_tokens.len());
    report.check("exact_recovery", format!("{frac:.6}"), "1", !novel_tokens.is_empty() && frac == 1.0);
    report.metrics.push(MetricStats::from_samples(
        "exact",
        &table.rows.iter().map(|r| if r[2] == "true" { 1.0 } else { 0.0 }).collect::<Vec<_>>(),
    ));
    report.table = table;
    Ok(report)
}

/// The eight Lover/Beloved readouts, then the closure over the story.
pub fn soap_opera_experiment(cfg: &BlockPolynomialConfig, master_seed: u64, tol: &Tolerances) -> Result<TrialReport> {
    let so = SoapOpera::build(cfg)?;
    let mem = CleanupMemory::from_tokens(cfg, so.people.iter().map(|(n, _)| n.as_str()))?;
    let mut report = TrialReport::new("soap-opera", cfg.config_id(), master_seed, tol);
    let mut table = DataTable::new(&["fact", "role", "expected", "winner", "cr1"]);
    let mut correct = 0;
    let mut cr1s = Vec::new();
    for (i, (fact, (who, whom))) in so.facts.iter().zip(&so.expected).enumerate() {
        for (role_name, role, want) in [("Lover", &so.lover, who), ("Beloved", &so.beloved, whom)] {
            let r = read_out(&mem, &unbind_from_bundle(cfg, fact, role)?)?;
            correct += r.is(want) as usize;
            cr1s.push(r.cr1);
            table.push(vec![
                (i + 1).to_string(),
                role_name.into(),
                want.clone(),
                r.label().to_string(),
                format!("{:.6}", r.cr1),
            ]);
        }
    }
    let total = 2 * so.facts.len();
    report.check("fact_readouts", format!("{correct}/{total}"), format!("{total}/{total}"), correct == total);

    let residue = so.closure_residue()?;
    let lover = read_out(&mem, &unbind(cfg, &residue, &so.lover)?)?;
    let beloved = read_out(&mem, &unbind(cfg, &residue, &so.beloved)?)?;
    let (last_who, last_whom) = so.expected.last().expect("nonempty cast");
    for (role_name, r, want) in [("Lover", &lover, last_who), ("Beloved", &beloved, last_whom)] {
        table.push(vec![
            "closure".into(),
            role_name.into(),
            want.clone(),
            r.label().to_string(),
            format!("{:.6}", r.cr1),
        ]);
    }
    let closure_ok = lover.is(last_who) && beloved.is(last_whom);
    report.check(
        "closure",
        format!("{} {}", lover.label(), beloved.label()),
        format!("{last_who} {last_whom}"),
        closure_ok,
    );
    let cr2 = match (&lover.result, &beloved.result) {
        (Some(a), Some(b)) => Cr2Trace::new().extend(a.clone()).extend(b.clone()).cr2,
        _ => lover.cr1 * beloved.cr1,
    };
    let product = lover.cr1 * beloved.cr1;
    report.check(
        "cr2_product",
        format!("{cr2:.12}"),
        format!("{product:.12} +/- {}", tol.cr2_abs),
        (cr2 - product).abs() <= tol.cr2_abs,
    );
    report.note(format!("story weight: {}", so.story.value.weight()));
    report.sample_count = total + 2;
    report.metrics.push(MetricStats::from_samples("fact_cr1", &cr1s));
    report.table = table;
    Ok(report)
}

/// Random role-swapped pairs of two-binding bundles.
pub fn book_table_experiment(
    cfg: &BlockPolynomialConfig,
    trials: usize,
    master_seed: u64,
    tol: &Tolerances,
) -> Result<TrialReport> {
    let outcomes = run_trials(master_seed, 0, trials as u64, |_, rng| -> Result<(u32, usize)> {
        let (inner, outer, book, table) = (cfg.random(rng), cfg.random(rng), cfg.random(rng), cfg.random(rng));
        let (on, swapped) = book_table_bundles(cfg, &inner, &outer, &book, &table)?;
        let mut mem = CleanupMemory::new(cfg);
        mem.add_entry("book", book.clone())?;
        mem.add_entry("table", table.clone())?;
        let mut right = 0;
        for (s, inner_want, outer_want) in [(&on, "book", "table"), (&swapped, "table", "book")] {
            right += read_out(&mem, &unbind_from_bundle(cfg, s, &inner)?)?.is(inner_want) as usize;
            right += read_out(&mem, &unbind_from_bundle(cfg, s, &outer)?)?.is(outer_want) as usize;
        }
        Ok((on.value.hamming(&swapped.value)?, right))
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = TrialReport::new("book-table", cfg.config_id(), master_seed, tol);
    let distances: Vec<f64> = outcomes.iter().map(|o| o.0 as f64).collect();
    let differ = outcomes.iter().filter(|o| o.0 > 0).count();
    let reads = 4 * outcomes.len();
    let right: usize = outcomes.iter().map(|o| o.1).sum();
    let frac = right as f64 / reads.max(1) as f64;
    report.sample_count = trials;
    report.check("bundles_differ", format!("{differ}/{trials}"), format!("{trials}/{trials}"), differ == trials);
    report.check(
        "role_recovery",
        format!("{frac:.6}"),
        format!(">= {}", tol.recovery_fraction),
        frac >= tol.recovery_fraction,
    );
    report.metrics.push(MetricStats::from_samples("swap_hamming", &distances));
    let mut table = DataTable::new(&["trial", "swap_hamming", "correct_of_4"]);
    for (i, o) in outcomes.iter().enumerate() {
        table.push(vec![i.to_string(), o.0.to_string(), o.1.to_string()]);
    }
    report.table = table;
    Ok(report)
}

/// Random filler replacements in bundles of arity `arity`.
pub fn intervention_experiment(
    cfg: &BlockPolynomialConfig,
    arity: usize,
    trials: usize,
    master_seed: u64,
    tol: &Tolerances,
) -> Result<TrialReport> {
    if arity == 0 {
        return Err(Error::EmptyBundle);
    }
    let outcomes = run_trials(master_seed, 0, trials as u64, |_, rng| -> Result<(bool, bool)> {
        let pairs: Vec<RoleFillerPair> = (0..arity)
            .map(|_| RoleFillerPair::new(cfg.random(rng), cfg.random(rng)))
            .collect();
        let s = bundle(cfg, &pairs)?;
        let j = rng.gen_range(0..arity);
        let new = cfg.random(rng);
        let old = &pairs[j].filler;
        let role = &pairs[j].role;
        let s2 = intervene(cfg, &s, role, old, &new)?;
        let delta_ok = s2.value.xor(&s.value)? == cfg.shift(&old.xor(&new)?)?;
        let back = intervene(cfg, &s2, role, &new, old)?;
        Ok((delta_ok, back == s))
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let delta = outcomes.iter().filter(|o| o.0).count();
    let restore = outcomes.iter().filter(|o| o.1).count();
    let mut report = TrialReport::new("intervene", cfg.config_id(), master_seed, tol);
    report.sample_count = trials;
    report.check("delta_identity", format!("{delta}/{trials}"), format!("{trials}/{trials}"), delta == trials);
    report.check("double_restores", format!("{restore}/{trials}"), format!("{trials}/{trials}"), restore == trials);
    report.metrics.push(MetricStats::from_samples(
        "delta_identity",
        &outcomes.iter().map(|o| o.0 as u8 as f64).collect::<Vec<_>>(),
    ));
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HrrParams {
    pub dim: usize,
    pub trials: usize,
    pub arities: Vec<usize>,
}

impl Default for HrrParams {
    fn default() -> Self {
        HrrParams {
            dim: 512,
            trials: 1000,
            arities: vec![1, 2, 4, 8, 16],
        }
    }
}

/// HRR against XOR-shift: single-binding recovery, then HRR recovery over
/// bundle arity. `cfg` supplies the XOR-shift side.
pub fn hrr_contrast_experiment(
    cfg: &BlockPolynomialConfig,
    params: &HrrParams,
    master_seed: u64,
    tol: &Tolerances,
) -> Result<TrialReport> {
    let hrr = Hrr::<f64>::new(params.dim);
    let trials = params.trials as u64;
    let mut table = DataTable::new(&["scheme", "dim", "k", "trial", "score"]);
    let single = run_trials(master_seed, 0, trials, |_, rng| -> Result<(f64, f64)> {
        let r = RealVector::<f64>::random_normal(params.dim, rng);
        let f = RealVector::<f64>::random_normal(params.dim, rng);
        let cos = hrr.unbind(&hrr.bind(&r, &f)?, &r)?.cosine(&f);
        let (xr, xf) = (cfg.random(rng), cfg.random(rng));
        let got = unbind(cfg, &bind(cfg, &xr, &xf)?, &xr)?;
        let score = 1.0 - got.hamming(&xf)? as f64 / cfg.total_bits() as f64;
        Ok((cos, score))
    });
    let single = single.into_iter().collect::<Result<Vec<_>>>()?;
    for (i, (cos, score)) in single.iter().enumerate() {
        table.push(vec!["hrr".into(), params.dim.to_string(), "1".into(), i.to_string(), format!("{cos:.6}")]);
        table.push(vec![
            "xor-shift".into(),
            cfg.total_bits().to_string(),
            "1".into(),
            i.to_string(),
            format!("{score:.6}"),
        ]);
    }
    let lossy = single.iter().filter(|s| s.0 < tol.hrr_exact_cosine).count();
    let exact = single.iter().filter(|s| s.1 == 1.0).count();
    let lossy_frac = lossy as f64 / single.len().max(1) as f64;

    let mut means = Vec::with_capacity(params.arities.len());
    for (ai, &k) in params.arities.iter().enumerate() {
        let base = (ai as u64 + 1) << 32;
        let cosines = run_trials(master_seed, base, trials, |_, rng| -> Result<f64> {
            let pairs: Vec<_> = (0..k)
                .map(|_| {
                    (
                        RealVector::<f64>::random_normal(params.dim, rng),
                        RealVector::<f64>::random_normal(params.dim, rng),
                    )
                })
                .collect();
            let s = hrr.bundle(&pairs)?;
            Ok(hrr.unbind(&s, &pairs[0].0)?.cosine(&pairs[0].1))
        });
        let cosines = cosines.into_iter().collect::<Result<Vec<_>>>()?;
        for (i, c) in cosines.iter().enumerate() {
            table.push(vec!["hrr".into(), params.dim.to_string(), k.to_string(), i.to_string(), format!("{c:.6}")]);
        }
        means.push(cosines.iter().sum::<f64>() / cosines.len().max(1) as f64);
    }
    let monotone = means.windows(2).all(|w| w[1] < w[0]);

    let mut report = TrialReport::new("baseline-hrr", cfg.config_id(), master_seed, tol);
    report.sample_count = params.trials * (1 + params.arities.len());
    report.check(
        "hrr_lossy",
        format!("{lossy_frac:.6}"),
        format!(">= {} below cosine {}", tol.hrr_lossy_fraction, tol.hrr_exact_cosine),
        lossy_frac >= tol.hrr_lossy_fraction,
    );
    report.check(
        "xor_shift_exact",
        format!("{exact}/{}", single.len()),
        format!("{0}/{0}", single.len()),
        exact == single.len() && !single.is_empty(),
    );
    let curve: Vec<String> = params.arities.iter().zip(&means).map(|(k, m)| format!("{k}:{m:.4}")).collect();
    report.check("hrr_monotone_in_k", curve.join(" "), "strictly decreasing", monotone);
    report.metrics.push(MetricStats::from_samples(
        "hrr_cosine_k1",
        &single.iter().map(|s| s.0).collect::<Vec<_>>(),
    ));
    report.metrics.push(MetricStats::from_samples(
        "xor_shift_score",
        &single.iter().map(|s| s.1).collect::<Vec<_>>(),
    ));
    report.table = table;
    Ok(report)
}

/// Exact tensor contraction at depth 1, then size bookkeeping per depth
/// against the constant XOR-shift width.
pub fn tensor_experiment(
    cfg: &BlockPolynomialConfig,
    dim: usize,
    max_depth: u32,
    trials: usize,
    master_seed: u64,
    tol: &Tolerances,
) -> Result<TrialReport> {
    let errors = run_trials(master_seed, 0, trials as u64, |_, rng| -> Result<f64> {
        let r = RealVector::<f64>::random_normal(dim, rng);
        let f = RealVector::<f64>::random_normal(dim, rng);
        let got = tensor_unbind(&tensor_bind(&r, &f), &r)?;
        let scale = r.dot(&r);
        Ok(got
            .components
            .iter()
            .zip(&f.components)
            .map(|(g, x)| (g - x * scale).abs())
            .fold(0.0, f64::max))
    });
    let errors = errors.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = TrialReport::new("baseline-tensor", cfg.config_id(), master_seed, tol);
    let stats = MetricStats::from_samples("contraction_error", &errors);
    report.sample_count = trials;
    report.check("contraction_exact", format!("{:e}", stats.max), "<= 1e-9", stats.max <= 1e-9);
    let mut table = DataTable::new(&["scheme", "dim", "depth", "components"]);
    for depth in 1..=max_depth {
        let count = nested_component_count(dim, depth).map_or("overflow".to_string(), |c| c.to_string());
        table.push(vec!["tensor".into(), dim.to_string(), depth.to_string(), count]);
        table.push(vec![
            "xor-shift".into(),
            cfg.total_bits().to_string(),
            depth.to_string(),
            cfg.total_bits().to_string(),
        ]);
    }
    report.metrics.push(stats);
    report.table = table;
    Ok(report)
}
