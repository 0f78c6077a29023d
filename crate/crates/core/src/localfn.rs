//! Local functions: functions constant on each intersection of a length-`M`
//! cell with a residue class mod `q`, and the construction of a local
//! function correlating with `f` from a large value of `Λ(g₀, g₁, f)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counting::{dual_function, lambda, CountingParams};
use crate::diophantine::{arc_numerator, major_arc_member, ARC_SLACK};
use crate::error::{invalid, Error, Result};
use crate::fourier::{ft_at, sup_ft, Frequency};
use crate::funcspace::{indicator, FiniteFunction, BOUNDED_SLACK};
use crate::sum::{sum_complex, ComplexSum};

/// A function of resolution `M` and modulus `q`: constant on every set
/// `{x : anchor + cM <= x < anchor + (c+1)M, x ≡ u (mod q)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFunction {
    resolution: u64,
    modulus: u64,
    anchor: i64,
    table: BTreeMap<(i64, u64), Complex64>,
    bounded: bool,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    cell: i64,
    residue: u64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct RawLocal {
    #[serde(rename = "M")]
    resolution: u64,
    q: u64,
    anchor: i64,
    entries: Vec<RawEntry>,
}

impl Serialize for LocalFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawLocal {
            resolution: self.resolution,
            q: self.modulus,
            anchor: self.anchor,
            entries: self
                .table
                .iter()
                .map(|(&(cell, residue), v)| RawEntry {
                    cell,
                    residue,
                    re: v.re,
                    im: v.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LocalFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawLocal::deserialize(d)?;
        let mut table = BTreeMap::new();
        for e in raw.entries {
            if table
                .insert((e.cell, e.residue), Complex64::new(e.re, e.im))
                .is_some()
            {
                return Err(serde::de::Error::custom(format!(
                    "duplicate entry for cell {} residue {}",
                    e.cell, e.residue
                )));
            }
        }
        LocalFunction::new(raw.resolution, raw.q, raw.anchor, table)
            .map_err(serde::de::Error::custom)
    }
}

impl LocalFunction {
    pub fn new(
        resolution: u64,
        modulus: u64,
        anchor: i64,
        table: BTreeMap<(i64, u64), Complex64>,
    ) -> Result<Self> {
        if resolution == 0 || modulus == 0 {
            return Err(invalid("local functions need positive resolution and modulus"));
        }
        if let Some(&(_, r)) = table.keys().find(|(_, r)| *r >= modulus) {
            return Err(invalid(format!("residue {r} is not reduced mod {modulus}")));
        }
        let bounded = table.values().all(|v| v.norm() <= 1.0 + BOUNDED_SLACK);
        Ok(Self {
            resolution,
            modulus,
            anchor,
            table,
            bounded,
        })
    }

    pub fn resolution(&self) -> u64 {
        self.resolution
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn anchor(&self) -> i64 {
        self.anchor
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((i64, u64), Complex64)> + '_ {
        self.table.iter().map(|(&k, &v)| (k, v))
    }

    /// `(cell, residue)` coordinates of `x`.
    pub fn coordinates(&self, x: i64) -> (i64, u64) {
        coordinates(x, self.resolution, self.modulus, self.anchor)
    }

    /// `φ(x)`; cells without an entry evaluate to zero.
    pub fn eval(&self, x: i64) -> Complex64 {
        self.table
            .get(&self.coordinates(x))
            .copied()
            .unwrap_or_default()
    }

    /// The pointwise phase `v / |v|` of every nonzero entry.
    pub fn phase(&self) -> Self {
        let table = self
            .table
            .iter()
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(&k, v)| (k, v / v.norm()))
            .collect();
        Self::new(self.resolution, self.modulus, self.anchor, table).expect("same shape")
    }

    pub fn conj(&self) -> Self {
        let table = self.table.iter().map(|(&k, v)| (k, v.conj())).collect();
        Self::new(self.resolution, self.modulus, self.anchor, table).expect("same shape")
    }

    /// The points of the cell `c` lying in the class `r`.
    fn class_points(&self, cell: i64, residue: u64) -> impl Iterator<Item = i64> {
        let q = self.modulus as i64;
        let lo = self.anchor + cell * self.resolution as i64;
        let hi = lo + self.resolution as i64;
        let first = lo + (residue as i64 - lo).rem_euclid(q);
        (first..hi).step_by(q as usize)
    }

    /// The function on `Z` taking the table values on every populated cell.
    pub fn to_function(&self) -> FiniteFunction {
        FiniteFunction::from_points(
            self.table
                .iter()
                .flat_map(|(&(c, r), &v)| self.class_points(c, r).map(move |x| (x, v))),
        )
    }
}

fn coordinates(x: i64, resolution: u64, modulus: u64, anchor: i64) -> (i64, u64) {
    (
        (x - anchor).div_euclid(resolution as i64),
        x.rem_euclid(modulus as i64) as u64,
    )
}

/// `Σ_x f(x) φ(x)`.
pub fn correlation(f: &FiniteFunction, phi: &LocalFunction) -> Complex64 {
    sum_complex(f.iter().map(|(x, v)| v * phi.eval(x)))
}

/// Sums of `f` over each nonempty cell-class intersection meeting its window.
fn cell_sums(
    f: &FiniteFunction,
    resolution: u64,
    modulus: u64,
    anchor: i64,
) -> BTreeMap<(i64, u64), Vec<Complex64>> {
    let mut groups: BTreeMap<(i64, u64), Vec<Complex64>> = BTreeMap::new();
    for (x, v) in f.iter() {
        groups
            .entry(coordinates(x, resolution, modulus, anchor))
            .or_default()
            .push(v);
    }
    groups
}

/// Cellwise means of `f` over each cell-class intersection.
///
/// The mean is taken as `v₀ + Σ (v - v₀) / k` over all `k` points of the
/// intersection, so a function that is already constant there is returned
/// unchanged bit for bit.
pub fn project_to_local(
    f: &FiniteFunction,
    resolution: u64,
    modulus: u64,
    anchor: i64,
) -> Result<LocalFunction> {
    if resolution == 0 || modulus == 0 {
        return Err(invalid("projection needs positive resolution and modulus"));
    }
    let shape = LocalFunction::new(resolution, modulus, anchor, BTreeMap::new())?;
    let mut table = BTreeMap::new();
    for ((c, r), _) in cell_sums(f, resolution, modulus, anchor) {
        let points: Vec<i64> = shape.class_points(c, r).collect();
        let first = f.at(points[0]);
        let mut acc = ComplexSum::new();
        for &x in &points[1..] {
            acc.add(f.at(x) - first);
        }
        let mean = first + acc.value() / points.len() as f64;
        if mean != Complex64::default() {
            table.insert((c, r), mean);
        }
    }
    LocalFunction::new(resolution, modulus, anchor, table)
}

/// The local function equal to `conj(S) / |S|` on each cell-class
/// intersection, where `S` is the sum of `f` there; `Σ f φ = Σ |S|`.
pub fn aligned_phase(
    f: &FiniteFunction,
    resolution: u64,
    modulus: u64,
    anchor: i64,
) -> Result<LocalFunction> {
    let mut table = BTreeMap::new();
    for (key, values) in cell_sums(f, resolution, modulus, anchor) {
        let s = sum_complex(values);
        let r = s.norm();
        if r > 0.0 {
            table.insert(key, s.conj() / r);
        }
    }
    LocalFunction::new(resolution, modulus, anchor, table)
}

/// Tunable thresholds of [`extract_correlating_local`]. Unset values take
/// defaults depending on `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    /// `C` in the rounding grid `T = ⌈C δ^{-1/2} N / q⌉`.
    pub rounding_constant: f64,
    /// Largest `q'` considered for major arcs.
    pub max_q_prime: u64,
    /// Arc half-width numerator `Q₂` (default `1/δ`).
    pub arc_width: Option<f64>,
    /// Fraction of `|I_u|` a residue's Fourier peak must reach (default `δ/2`).
    pub peak_fraction: Option<f64>,
    /// Resolutions tried are `M / 2^k` for `2^k` up to this divisor.
    pub max_resolution_divisor: u64,
    /// Certified gap for Fourier sups, relative to `‖G_u‖₁`.
    pub sup_gap: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            rounding_constant: 4.0,
            max_q_prime: 12,
            arc_width: None,
            peak_fraction: None,
            max_resolution_divisor: 8,
            sup_gap: 1e-6,
        }
    }
}

/// What happened to one residue class `u + qZ` of the dual function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueDiagnostic {
    pub u: u64,
    pub class_size: u64,
    pub peak_lower: f64,
    pub peak_upper: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Frequency rounded to `t / T`.
    pub rounded_t: Option<u64>,
    /// `|Ĝ_u(t/T)|` after rounding.
    pub rounded_value: Option<f64>,
    /// `(a, q')` of the major arc holding `t / T`.
    pub arc: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionDiagnostics {
    /// `|Λ(g₀, g₁, f)| / Λ(1_{[N]})`.
    pub lambda_ratio: f64,
    /// Whether `lambda_ratio >= δ`.
    pub hypothesis_met: bool,
    pub grid: u64,
    pub arc_width: f64,
    pub residues: Vec<ResidueDiagnostic>,
    /// Frequency `t / T` shared by the most mass, with its arc.
    pub alpha_t: Option<u64>,
    pub q_prime: Option<u64>,
    /// `q'' <= max_q_prime` whose arc of denominator `q'' q²` contains `α`.
    pub valid_q_primes: Vec<u64>,
    pub candidates_tried: usize,
    /// Set when the reported modulus `q' q²` is used in place of `q' q³`;
    /// a local function of modulus `q' q²` is one of modulus `q' q³` too.
    pub contained_in_modulus: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub local: LocalFunction,
    pub correlation: Complex64,
    pub diagnostics: ExtractionDiagnostics,
}

/// An extraction stage that produced nothing usable.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionFailure {
    pub stage: ExtractionStage,
    pub message: String,
    pub correlation: f64,
    pub diagnostics: ExtractionDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionStage {
    Input,
    FourierPeak,
    MajorArc,
    Assembly,
}

impl std::fmt::Display for ExtractionStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::Input => "input",
            Self::FourierPeak => "fourier_peak",
            Self::MajorArc => "major_arc",
            Self::Assembly => "assembly",
        };
        f.write_str(s)
    }
}

impl From<ExtractionFailure> for Error {
    fn from(e: ExtractionFailure) -> Self {
        Error::Extraction {
            stage: e.stage.to_string(),
            message: e.message,
        }
    }
}

fn fail(
    stage: ExtractionStage,
    message: impl Into<String>,
    diagnostics: ExtractionDiagnostics,
) -> std::result::Result<Extraction, ExtractionFailure> {
    Err(ExtractionFailure {
        stage,
        message: message.into(),
        correlation: 0.0,
        diagnostics,
    })
}

/// Builds a 1-bounded local function correlating with `f`, following the
/// structure of the inverse argument for the counting operator:
///
/// 1. form the dual `G(x) = E_y g₀(x - qy²) g₁(x + y - qy²)`;
/// 2. for each residue `u ∈ [q]` find a certified Fourier peak of
///    `G_u(x) = G(u + qx)` and keep the residues whose peak reaches
///    `peak_fraction · |I_u|`;
/// 3. round the peaks to the grid `t / T` and locate them on major arcs
///    `a / (q' q²) ± Q₂ / N`;
/// 4. take the rounded frequency `α` carrying the largest total
///    `Σ_u |Ĝ_u(α)|`, and collect every `q'' <= max_q_prime` whose arc
///    contains `α`;
/// 5. for moduli `q'' q²` and `q'' q³`, resolutions `M / 2^k` and anchors
///    `{0, ⌊res/2⌋}`, take `χ` to be the conjugate phase of the cell sums
///    of `f` and keep the best correlation `Σ f χ`.
///
/// The output always has modulus `q'' q²` or `q'' q³` with
/// `q'' <= max_q_prime` and resolution at least `M / max_resolution_divisor`;
/// the size of the correlation is reported, not promised.
pub fn extract_correlating_local(
    p: &CountingParams,
    f: &FiniteFunction,
    g0: &FiniteFunction,
    g1: &FiniteFunction,
    delta: f64,
    config: &ExtractionConfig,
) -> std::result::Result<Extraction, ExtractionFailure> {
    let n = p.n();
    let q = p.q();
    let arc_width = config.arc_width.unwrap_or(1.0 / delta);
    let mut diag = ExtractionDiagnostics {
        lambda_ratio: 0.0,
        hypothesis_met: false,
        grid: 0,
        arc_width,
        residues: Vec::new(),
        alpha_t: None,
        q_prime: None,
        valid_q_primes: Vec::new(),
        candidates_tried: 0,
        contained_in_modulus: None,
    };
    if !(delta > 0.0 && delta <= 1.0) {
        return fail(ExtractionStage::Input, format!("δ = {delta} must lie in (0, 1]"), diag);
    }
    let domain = p.domain();
    for (name, h) in [("f", f), ("g0", g0), ("g1", g1)] {
        if !h.is_bounded() {
            return fail(ExtractionStage::Input, format!("{name} is not 1-bounded"), diag);
        }
        if let Some(w) = h.window() {
            if w.lo() < domain.lo() || w.hi() > domain.hi() {
                return fail(ExtractionStage::Input, format!("{name} is not supported in [N]"), diag);
            }
        }
    }

    let ones = indicator(domain);
    let reference = lambda(p, &ones, &ones, &ones).re;
    diag.lambda_ratio = lambda(p, g0, g1, f).norm() / reference;
    diag.hypothesis_met = diag.lambda_ratio >= delta;

    // stage 1-2: per-residue Fourier peaks of the dual
    let dual = dual_function(p, g0, g1);
    let peak_fraction = config.peak_fraction.unwrap_or(delta / 2.0);
    let grid = (config.rounding_constant * delta.powf(-0.5) * n as f64 / q as f64).ceil() as u64;
    let grid = grid.max(1);
    diag.grid = grid;
    let residues: Vec<(FiniteFunction, ResidueDiagnostic)> = (1..=q)
        .into_par_iter()
        .map(|u| {
            let g_u = dual.compress(u as i64, q);
            let class_size = domain.iter().filter(|x| (x - u as i64).rem_euclid(q as i64) == 0).count() as u64;
            let threshold = peak_fraction * class_size as f64;
            let mut d = ResidueDiagnostic {
                u,
                class_size,
                peak_lower: 0.0,
                peak_upper: 0.0,
                threshold,
                passed: false,
                rounded_t: None,
                rounded_value: None,
                arc: None,
            };
            if g_u.is_empty() {
                return (g_u, d);
            }
            let l1: f64 = g_u.values().iter().map(|v| v.norm()).sum();
            if let Ok(est) = sup_ft(&g_u, config.sup_gap * l1) {
                d.peak_lower = est.lower;
                d.peak_upper = est.upper;
                d.passed = est.lower >= threshold && est.lower > 0.0;
                if d.passed {
                    let t = (est.alpha.value() * grid as f64).round() as u64 % grid;
                    let rounded = Frequency::grid(t, grid);
                    d.rounded_t = Some(t);
                    d.rounded_value = Some(ft_at(&g_u, rounded).norm());
                    d.arc = major_arc_member(rounded, config.max_q_prime, arc_width, n, q);
                }
            }
            (g_u, d)
        })
        .collect();
    let (classes, reports): (Vec<FiniteFunction>, Vec<ResidueDiagnostic>) = residues.into_iter().unzip();
    diag.residues = reports;
    if !diag.residues.iter().any(|d| d.passed) {
        return fail(
            ExtractionStage::FourierPeak,
            format!("no residue class has a Fourier peak above {peak_fraction} of its size"),
            diag,
        );
    }

    // stage 3-4: frequencies on major arcs, pigeonholed by total mass
    let mut arc_ts: Vec<u64> = diag
        .residues
        .iter()
        .filter(|d| d.arc.is_some())
        .filter_map(|d| d.rounded_t)
        .collect();
    arc_ts.sort_unstable();
    arc_ts.dedup();
    if arc_ts.is_empty() {
        return fail(ExtractionStage::MajorArc, "no rounded peak lies on a major arc", diag);
    }
    let mass = |t: u64| -> f64 {
        let alpha = Frequency::grid(t, grid);
        classes.iter().map(|g| ft_at(g, alpha).norm()).sum()
    };
    let mut best_t = arc_ts[0];
    let mut best_mass = mass(best_t);
    for &t in &arc_ts[1..] {
        let m = mass(t);
        if m > best_mass {
            best_t = t;
            best_mass = m;
        }
    }
    let alpha = Frequency::grid(best_t, grid);
    let r = arc_width / n as f64 + ARC_SLACK;
    diag.alpha_t = Some(best_t);
    diag.q_prime = major_arc_member(alpha, config.max_q_prime, arc_width, n, q).map(|(_, qp)| qp);
    diag.valid_q_primes = (1..=config.max_q_prime)
        .filter(|&qp| arc_numerator(alpha, qp * q * q, r).is_some())
        .collect();

    // stage 5: local phase assembly
    let mut moduli: Vec<(u64, u64)> = diag
        .valid_q_primes
        .iter()
        .flat_map(|&qp| [(qp * q * q, qp * q * q * q), (qp * q * q * q, qp * q * q * q)])
        .collect();
    moduli.sort_unstable();
    moduli.dedup_by_key(|m| m.0);
    let m = p.m();
    let mut resolutions: Vec<u64> = Vec::new();
    let mut div = 1;
    while div <= config.max_resolution_divisor.max(1) {
        let res = m / div;
        if res >= 1 && !resolutions.contains(&res) {
            resolutions.push(res);
        }
        div *= 2;
    }
    let mut best: Option<(LocalFunction, Complex64, f64, u64)> = None;
    for &(modulus, containing) in &moduli {
        for &res in &resolutions {
            let mut anchors = vec![0i64, (res / 2) as i64];
            anchors.dedup();
            for anchor in anchors {
                diag.candidates_tried += 1;
                let chi = aligned_phase(f, res, modulus, anchor).expect("positive shape");
                let c = correlation(f, &chi);
                let value = c.norm();
                let better = match &best {
                    None => value > 0.0,
                    Some((_, _, b, _)) => value > b * (1.0 + 1e-9),
                };
                if better {
                    best = Some((chi, c, value, containing));
                }
            }
        }
    }
    match best {
        Some((local, correlation, _, containing)) => {
            if containing != local.modulus() {
                diag.contained_in_modulus = Some(containing);
            }
            Ok(Extraction {
                local,
                correlation,
                diagnostics: diag,
            })
        }
        None => fail(
            ExtractionStage::Assembly,
            "every candidate local phase has zero correlation with f",
            diag,
        ),
    }
}
