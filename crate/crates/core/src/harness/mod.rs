//! Numerical checks of the inequalities behind the density argument.
//!
//! Each lemma has an explicit-input check in [`checks`] and a random
//! generator here. `ASSERT` checks must hold at every tested scale; `REPORT`
//! checks carry asymptotic constants and only record the ratio of the two
//! sides. Suites run checks in parallel and merge them in a fixed order, so
//! output is identical for any thread count.

pub mod checks;
pub mod report;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{BilinearWitness, Grid3};
pub use report::{InputsDigest, LemmaId, LemmaReport, Mode, Verdict};

use crate::counting::CountingParams;
use crate::error::{invalid, Result};
use crate::fourier::{e, gcd, Frequency};
use crate::funcspace::{indicator, Interval, ProbKernel};
use crate::gowers::Grid2;
use crate::random::{random_weights, rng_for, Family};

/// Suite configuration. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub lemmas: Vec<LemmaId>,
    pub sizes: Vec<u64>,
    pub trials: u64,
    pub families: Vec<Family>,
    /// The constant `c` in the hypotheses of the arithmetic correlation check.
    pub arithcor_c: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            lemmas: LemmaId::ALL.to_vec(),
            sizes: vec![16, 64, 256],
            trials: 20,
            families: Family::ALL.to_vec(),
            arithcor_c: 0.1,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.iter().any(|&n| n < 4) {
            return Err(invalid("harness sizes must be at least 4"));
        }
        if self.families.is_empty() {
            return Err(invalid("harness needs at least one family"));
        }
        if !(self.arithcor_c > 0.0) {
            return Err(invalid("arithcor_c must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pass: u64,
    pub fail: u64,
    pub reported: u64,
    pub error: u64,
}

impl Counts {
    fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Pass => self.pass += 1,
            Verdict::Fail => self.fail += 1,
            Verdict::Reported => self.reported += 1,
            Verdict::Error => self.error += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub checks: u64,
    pub totals: Counts,
    /// Failed `ASSERT` checks; a suite succeeds when this is zero.
    pub assert_failures: u64,
    pub by_lemma: BTreeMap<String, Counts>,
}

impl SuiteSummary {
    pub fn from_reports(reports: &[LemmaReport]) -> Self {
        let mut totals = Counts::default();
        let mut by_lemma: BTreeMap<String, Counts> = BTreeMap::new();
        let mut assert_failures = 0;
        for r in reports {
            totals.add(r.verdict);
            by_lemma.entry(r.lemma_id.name().to_string()).or_default().add(r.verdict);
            if r.mode == Mode::Assert && r.verdict == Verdict::Fail {
                assert_failures += 1;
            }
        }
        Self {
            checks: reports.len() as u64,
            totals,
            assert_failures,
            by_lemma,
        }
    }

    pub fn ok(&self) -> bool {
        self.assert_failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub reports: Vec<LemmaReport>,
    pub summary: SuiteSummary,
}

impl SuiteResult {
    /// One JSON object per line, in run order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&serde_json::to_string(r).expect("reports serialise"));
            out.push('\n');
        }
        out
    }
}

/// One generated check: which lemma, at which requested size, which trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckSpec {
    pub lemma: LemmaId,
    pub n: u64,
    pub trial: u64,
    pub family: Family,
}

impl CheckSpec {
    /// Variants cycle with `trial % 3` and families with `trial / 3`, so
    /// every variant meets every family.
    pub fn new(lemma: LemmaId, n: u64, trial: u64, families: &[Family]) -> Self {
        let family = families[(trial / 3 % families.len() as u64) as usize];
        Self { lemma, n, trial, family }
    }

    /// Seed for this check, derived from the suite seed and its labels.
    pub fn seed(&self, suite_seed: u64) -> u64 {
        rng_for(suite_seed, &[self.lemma.index(), self.n, self.trial]).gen()
    }
}

/// Runs one generated check, converting errors and panics into an `Error`
/// report.
pub fn run_check(spec: CheckSpec, seed: u64, config: &SuiteConfig) -> LemmaReport {
    let digest = InputsDigest {
        seed: Some(seed),
        family: Some(spec.family),
        params: BTreeMap::new(),
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| generate_and_check(spec, seed, config)));
    let (mut report, n_used) = match outcome {
        Ok(Ok(pair)) => pair,
        Ok(Err(err)) => (
            LemmaReport::errored(spec.lemma, default_mode(spec.lemma), err.to_string(), digest.clone()),
            spec.n,
        ),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            (
                LemmaReport::errored(spec.lemma, default_mode(spec.lemma), format!("panicked: {msg}"), digest.clone()),
                spec.n,
            )
        }
    };
    let mut params = std::mem::take(&mut report.inputs_digest.params);
    params.insert("n_requested".into(), spec.n as f64);
    params.insert("n_used".into(), n_used as f64);
    params.insert("trial".into(), spec.trial as f64);
    report.inputs_digest = InputsDigest { params, ..digest };
    report
}

/// Runs every (lemma, size, trial) combination and merges the reports in
/// lemma, size, trial order.
pub fn run_suite(config: &SuiteConfig, seed: u64) -> Result<SuiteResult> {
    config.validate()?;
    let mut lemmas = config.lemmas.clone();
    lemmas.sort();
    lemmas.dedup();
    let mut specs = Vec::new();
    for &lemma in &lemmas {
        for &n in &config.sizes {
            for trial in 0..config.trials {
                specs.push(CheckSpec::new(lemma, n, trial, &config.families));
            }
        }
    }
    let reports: Vec<LemmaReport> = specs
        .par_iter()
        .map(|spec| run_check(*spec, spec.seed(seed), config))
        .collect();
    let summary = SuiteSummary::from_reports(&reports);
    Ok(SuiteResult { reports, summary })
}

fn default_mode(lemma: LemmaId) -> Mode {
    use LemmaId::*;
    match lemma {
        Vdc | HLipschitz | L1Fourier | GcdCount | DualInterchange | LowRank | U2Inverse | Gcs | PhaseInv | BoxCs => {
            Mode::Assert
        }
        _ => Mode::Report,
    }
}

fn first(n: u64) -> Interval {
    Interval::first(n).expect("sizes are positive")
}

fn random_phase_table(rng: &mut impl Rng, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| e(rng.gen::<f64>())).collect()
}

/// A deterministic pseudo-random phase function on `Z^k`.
fn hashed_phase(seed: u64) -> impl Fn(&[i64]) -> f64 {
    move |h: &[i64]| {
        let labels: Vec<u64> = h.iter().map(|&v| v as u64).collect();
        rng_for(seed, &labels).gen::<f64>()
    }
}

fn rand_real(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Generates inputs for `spec` and runs its check. Returns the report and
/// the size actually used after per-lemma caps.
fn generate_and_check(spec: CheckSpec, seed: u64, config: &SuiteConfig) -> Result<(LemmaReport, u64)> {
    use LemmaId::*;
    let mut rng = rng_for(seed, &[]);
    let fam = spec.family;
    let n = spec.n;
    let r = n.isqrt().max(1);
    let variant = spec.trial % 3;
    Ok(match spec.lemma {
        Vdc => {
            let m = rng.gen_range(1..=n);
            let f = fam.sample(&mut rng, first(m));
            let h = rand_real(&mut rng, 1.0, m as f64 + 1.0);
            (checks::vdc(&f, m, h)?, n)
        }
        DiffControl => {
            let fs: Vec<_> = (0..4).map(|_| fam.sample(&mut rng, first(n))).collect();
            let a = rng.gen_range(1..=r as i64);
            let b = rng.gen_range(1..=r as i64);
            let h = rand_real(&mut rng, 1.0, r.min(3) as f64 + 1.0);
            (checks::diff_control([&fs[0], &fs[1], &fs[2], &fs[3]], n, a, b, h)?, n)
        }
        Linearisation => {
            let q = 1 + spec.trial % 2;
            let p = CountingParams::new(q, n)?;
            let fs: Vec<_> = (0..3).map(|_| fam.sample(&mut rng, first(n))).collect();
            (checks::linearisation(&p, &fs[0], &fs[1], &fs[2], 2.0)?, n)
        }
        BoxInverse => {
            let (a, b) = loop {
                let a = rng.gen_range(1..=r);
                let b = rng.gen_range(1..=r);
                if gcd(a, b) == 1 {
                    break (a, b);
                }
            };
            let h = rand_real(&mut rng, 1.0, r as f64 + 1.0);
            let f = fam.sample(&mut rng, first(n));
            (checks::box_inverse(&f, n, a, b, h)?, n)
        }
        Arithcor => {
            let a = rng.gen_range(1..=r);
            let b = rng.gen_range(1..=r);
            let h = rand_real(&mut rng, 1.0, r as f64 + 1.0);
            let k = rand_real(&mut rng, 1.0, r as f64 + 1.0);
            let f = fam.sample(&mut rng, first(n));
            (checks::arithcor(&f, n, a, b, h, k, config.arithcor_c)?, n)
        }
        HLipschitz => {
            let f = fam.sample(&mut rng, first(n));
            let b = rng.gen_range(1..=r as i64);
            let k = rand_real(&mut rng, 1.0, r as f64 + 1.0);
            let span = 2 * k.floor() as i64;
            let ys: Vec<i64> = (0..4)
                .map(|_| {
                    let y = rng.gen_range(1..=span);
                    if rng.gen() {
                        y
                    } else {
                        -y
                    }
                })
                .collect();
            (checks::h_lipschitz(&f, b, k, &ys)?, n)
        }
        L1Fourier => {
            let k = rand_real(&mut rng, 1.0, r as f64 + 1.0);
            let l = rand_real(&mut rng, 1.0, r as f64 + 1.0);
            let a = rng.gen_range(1..=n);
            let b = rng.gen_range(1..=n);
            (checks::l1_fourier(k, l, a, b)?, n)
        }
        GcdCount => {
            let m = rng.gen_range(1..=n);
            let a1 = rng.gen_range(0..=m);
            let a2 = rng.gen_range(0..=m);
            let delta = rand_real(&mut rng, 0.02, 1.0);
            (checks::gcd_count(a1, a2, m, delta)?, n)
        }
        Densify => {
            let f = fam.sample(&mut rng, first(n));
            (checks::densify(&f, n)?, n)
        }
        PeriodicProduct => {
            let f = fam.sample(&mut rng, first(n));
            let tables: Vec<_> = (1..=r as usize).map(|a| random_phase_table(&mut rng, a)).collect();
            (checks::periodic_product(&f, n, &tables)?, n)
        }
        HbCore => {
            let n = n.min(64);
            let r = n.isqrt();
            let f = fam.sample(&mut rng, first(n));
            let a = rng.gen_range(1..=r);
            let k = (r as f64 / 2.0).max(1.0);
            let tables: Vec<_> = (1..=r as usize).map(|b| random_phase_table(&mut rng, b)).collect();
            // planted: h_b = conj(f g_b), so f g_b h_b = |f g_b|²
            let hs: Vec<_> = tables
                .iter()
                .map(|t| {
                    let a = t.len() as i64;
                    f.map(|x, v| (v * t[x.rem_euclid(a) as usize]).conj())
                })
                .collect();
            (checks::hb_core(&f, n, a, k, &tables, &hs)?, n)
        }
        GlobalU5 => {
            let n = n.min(48);
            let q = 1 + spec.trial % 2;
            let p = CountingParams::new(q, n)?;
            let one = indicator(first(n));
            let f = fam.sample(&mut rng, first(n));
            (checks::global_u5(&p, &one, &one, &f)?, n)
        }
        Weyl => {
            let alpha = if variant == 0 {
                Frequency::new(rng.gen())
            } else {
                let q0 = rng.gen_range(1..=10u64);
                let a0 = rng.gen_range(0..q0);
                let noise = rand_real(&mut rng, -1.0, 1.0) / (n * n) as f64;
                Frequency::new(a0 as f64 / q0 as f64 + noise)
            };
            let beta = Frequency::new(rng.gen());
            (checks::weyl(alpha, beta, first(n))?, n)
        }
        Lem62 => {
            let q = 1 + spec.trial % 3;
            let p = CountingParams::new(q, n)?;
            let (g0, g1) = if variant == 0 {
                (fam.sample(&mut rng, first(n)), fam.sample(&mut rng, first(n)))
            } else {
                (indicator(first(n)), indicator(first(n)))
            };
            let q0 = rng.gen_range(1..=4u64) * q * q;
            let a0 = rng.gen_range(0..q0);
            let noise = rand_real(&mut rng, -1.0, 1.0) / (n * n) as f64;
            let alpha = Frequency::new(a0 as f64 / q0 as f64 + noise);
            (checks::lem62(&p, &g0, &g1, alpha)?, n)
        }
        DualInterchange => {
            let s = variant as usize;
            let n = n.min(128);
            let fys: Vec<_> = (0..3).map(|_| fam.sample(&mut rng, first(n))).collect();
            let count = [1, 6, 5][s];
            let hs: Vec<Vec<i64>> = (0..count)
                .map(|_| (0..s).map(|_| rng.gen_range(-(n as i64) + 1..n as i64)).collect())
                .collect();
            let phi = hashed_phase(rng.gen());
            (checks::dual_interchange(&fys, n, &hs, &phi)?, n)
        }
        LowRank => {
            let m = variant as usize;
            let s = if m == 0 { 1 + (spec.trial / 3 % 2) as usize } else { 2 };
            let n = if s == 2 { n.min(128) } else { n };
            let f = fam.sample(&mut rng, first(n));
            let phi1 = hashed_phase(rng.gen());
            let phi2 = hashed_phase(rng.gen());
            let phases: Vec<&dyn Fn(&[i64]) -> f64> = vec![&phi1, &phi2];
            (checks::low_rank(&f, n, s, &phases[..m])?, n)
        }
        DegreeLower => {
            let n = n.min(64);
            let q = 1 + spec.trial % 2;
            let p = CountingParams::new(q, n)?;
            let f0 = fam.sample(&mut rng, first(n));
            let f1 = fam.sample(&mut rng, first(n));
            (checks::degree_lower(&p, &f0, &f1)?, n)
        }
        U2Inverse => {
            let f = fam.sample(&mut rng, first(n));
            (checks::u2_inverse(&f, n)?, n)
        }
        Gcs => {
            let s = 1 + variant as u32;
            let n = n.min([256, 32, 16][variant as usize]);
            let fs: Vec<_> = (0..1 << s).map(|_| fam.sample(&mut rng, first(n))).collect();
            (checks::gcs(&fs)?, n)
        }
        PhaseInv => {
            let s = 2 + (spec.trial % 2) as usize;
            let n = n.min(if s == 2 { 48 } else { 16 });
            let f = fam.sample(&mut rng, first(n));
            let alpha = rng.gen::<f64>();
            let betas: Vec<f64> = (0..s).map(|_| rng.gen()).collect();
            (checks::phase_inv(&f, alpha, &betas)?, n)
        }
        BoxCs => {
            let sides: Vec<u64> = (0..3).map(|_| rng.gen_range(2..=5)).collect();
            let axes = [first(sides[0]), first(sides[1]), first(sides[2])];
            let flat = fam.sample(&mut rng, first(sides.iter().product()));
            let (s1, s2) = (sides[1] as i64, sides[2] as i64);
            let f = Grid3::from_fn(axes, |a, b, c| flat.at(((a - 1) * s1 + (b - 1)) * s2 + c));
            let mut plane = |xs: Interval, ys: Interval| {
                let vals = fam.sample(&mut rng, first((xs.len() * ys.len()) as u64));
                let w = ys.len() as i64;
                Grid2::from_fn(xs, ys, |x, y| vals.at((x - xs.lo()) * w + (y - ys.lo()) + 1))
            };
            let f1 = plane(axes[1], axes[2]);
            let f2 = plane(axes[0], axes[2]);
            let f3 = plane(axes[0], axes[1]);
            let mut kernel = |iv: Interval| ProbKernel::new(iv.lo(), random_weights(&mut rng, iv.len()), iv.len() as f64);
            let mus = [kernel(axes[0])?, kernel(axes[1])?, kernel(axes[2])?];
            (checks::box_cs(&f, &f1, &f2, &f3, [&mus[0], &mus[1], &mus[2]])?, n)
        }
    })
}
