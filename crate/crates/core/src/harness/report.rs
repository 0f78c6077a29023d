use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};
use crate::random::Family;

/// Relative slack for `ASSERT` comparisons.
pub const ASSERT_RTOL: f64 = 1e-9;
/// Absolute slack for `ASSERT` comparisons.
pub const ASSERT_ATOL: f64 = 1e-12;

macro_rules! lemma_ids {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// The inequalities checked by the harness.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum LemmaId {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl LemmaId {
            pub const ALL: [LemmaId; 21] = [$(LemmaId::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(LemmaId::$variant => $name,)*
                }
            }
        }

        impl std::str::FromStr for LemmaId {
            type Err = Error;
            fn from_str(s: &str) -> crate::Result<Self> {
                match s {
                    $($name => Ok(LemmaId::$variant),)*
                    other => Err(invalid(format!("unknown lemma id {other:?}"))),
                }
            }
        }
    };
}

lemma_ids! {
    Vdc => "VDC",
    DiffControl => "DIFF_CONTROL",
    Linearisation => "LINEARISATION",
    BoxInverse => "BOX_INVERSE",
    Arithcor => "ARITHCOR",
    HLipschitz => "H_LIPSCHITZ",
    L1Fourier => "L1_FOURIER",
    GcdCount => "GCD_COUNT",
    Densify => "DENSIFY",
    PeriodicProduct => "PERIODIC_PRODUCT",
    HbCore => "HB_CORE",
    GlobalU5 => "GLOBAL_U5",
    Weyl => "WEYL",
    Lem62 => "LEM62",
    DualInterchange => "DUAL_INTERCHANGE",
    LowRank => "LOW_RANK",
    DegreeLower => "DEGREE_LOWER",
    U2Inverse => "U2_INVERSE",
    Gcs => "GCS",
    PhaseInv => "PHASE_INV",
    BoxCs => "BOX_CS",
}

impl LemmaId {
    pub fn index(self) -> u64 {
        Self::ALL.iter().position(|&l| l == self).unwrap() as u64
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    /// The inequality must hold at the tested scale.
    Assert,
    /// The ratio is recorded; asymptotic constants are not checked.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Reported,
    /// The check could not run, e.g. a panic or invalid generated input.
    Error,
}

/// What a check was run on: the seed that generated it and its scalar
/// parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InputsDigest {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub params: BTreeMap<String, f64>,
}

impl InputsDigest {
    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: LemmaId,
    pub variant: String,
    pub lhs: f64,
    pub rhs_constant_free: f64,
    /// `lhs / rhs`; `0` when both sides vanish, absent when only `rhs` does
    /// (or underflows).
    pub ratio: Option<f64>,
    pub mode: Mode,
    pub verdict: Verdict,
    pub inputs_digest: InputsDigest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn ratio(lhs: f64, rhs: f64) -> Option<f64> {
    if rhs > 0.0 {
        let r = lhs / rhs;
        r.is_finite().then_some(r)
    } else if lhs == 0.0 && rhs == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// `lhs <= rhs` up to [`ASSERT_RTOL`] and [`ASSERT_ATOL`].
pub fn holds(lhs: f64, rhs: f64) -> bool {
    lhs.is_finite() && rhs.is_finite() && lhs <= rhs + ASSERT_RTOL * lhs.abs().max(rhs.abs()) + ASSERT_ATOL
}

/// `a == b` up to the assertion tolerances.
pub fn agrees(a: f64, b: f64) -> bool {
    holds(a, b) && holds(b, a)
}

impl LemmaReport {
    pub fn asserted(lemma_id: LemmaId, variant: impl Into<String>, lhs: f64, rhs: f64, digest: InputsDigest) -> Self {
        Self::asserted_with(lemma_id, variant, lhs, rhs, holds(lhs, rhs), digest)
    }

    /// An `ASSERT` report whose verdict combines more than the displayed
    /// inequality.
    pub fn asserted_with(
        lemma_id: LemmaId,
        variant: impl Into<String>,
        lhs: f64,
        rhs: f64,
        ok: bool,
        inputs_digest: InputsDigest,
    ) -> Self {
        Self {
            lemma_id,
            variant: variant.into(),
            lhs,
            rhs_constant_free: rhs,
            ratio: ratio(lhs, rhs),
            mode: Mode::Assert,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            inputs_digest,
            note: None,
        }
    }

    pub fn reported(lemma_id: LemmaId, variant: impl Into<String>, lhs: f64, rhs: f64, inputs_digest: InputsDigest) -> Self {
        Self {
            lemma_id,
            variant: variant.into(),
            lhs,
            rhs_constant_free: rhs,
            ratio: ratio(lhs, rhs),
            mode: Mode::Report,
            verdict: Verdict::Reported,
            inputs_digest,
            note: None,
        }
    }

    pub fn errored(lemma_id: LemmaId, mode: Mode, message: String, inputs_digest: InputsDigest) -> Self {
        Self {
            lemma_id,
            variant: String::new(),
            lhs: 0.0,
            rhs_constant_free: 0.0,
            ratio: None,
            mode,
            verdict: Verdict::Error,
            inputs_digest,
            note: Some(message),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}
