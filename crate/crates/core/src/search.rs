//! Sets without the configuration `x, x + y, x + qy²`: detection, greedy
//! construction, exact maxima by branch and bound, and density tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::counting::{isqrt_ratio, CountingParams};
use crate::error::{invalid, Error, Result};

/// Largest `N` accepted by [`max_free_set_exact`].
pub const EXACT_LIMIT: u64 = 40;

/// A configuration `x, x + y, x + qy²` inside a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfigWitness {
    pub x: i64,
    pub y: i64,
}

/// Range of the step `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YMode {
    /// `y ∈ [M]`, as in the counting operator.
    #[default]
    Bounded,
    /// Any `y >= 1` with `x + qy² <= N`.
    Unbounded,
}

impl YMode {
    pub fn name(self) -> &'static str {
        match self {
            YMode::Bounded => "bounded",
            YMode::Unbounded => "unbounded",
        }
    }

    /// Largest admissible `y`; configurations must also stay inside `[N]`.
    fn max_y(self, p: &CountingParams) -> u64 {
        match self {
            YMode::Bounded => p.m(),
            YMode::Unbounded => isqrt_ratio(p.n(), p.q()),
        }
    }
}

impl std::str::FromStr for YMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bounded" => Ok(YMode::Bounded),
            "unbounded" => Ok(YMode::Unbounded),
            other => Err(invalid(format!("unknown y-mode {other:?}"))),
        }
    }
}

fn membership(set: &[i64], p: &CountingParams) -> Result<Vec<bool>> {
    let mut member = vec![false; p.n() as usize + 1];
    for &x in set {
        if x < 1 || x > p.n() as i64 {
            return Err(Error::OutOfRange(x));
        }
        member[x as usize] = true;
    }
    Ok(member)
}

/// The lexicographically least witness `(x, y)` in `A`, if any.
pub fn find_config(set: &[i64], p: &CountingParams, mode: YMode) -> Result<Option<ConfigWitness>> {
    let member = membership(set, p)?;
    let n = p.n() as i64;
    let q = p.q() as i64;
    let y_max = mode.max_y(p) as i64;
    for x in 1..=n {
        if !member[x as usize] {
            continue;
        }
        for y in 1..=y_max {
            let top = x + q * y * y;
            if top > n {
                break;
            }
            if member[(x + y) as usize] && member[top as usize] {
                return Ok(Some(ConfigWitness { x, y }));
            }
        }
    }
    Ok(None)
}

/// For each `t`, the configurations with top element `t`, as the pairs
/// `(x, x + y)` of the other two elements.
fn configurations_by_top(p: &CountingParams, mode: YMode) -> Vec<Vec<(usize, usize)>> {
    let n = p.n() as i64;
    let q = p.q() as i64;
    let y_max = mode.max_y(p) as i64;
    let mut by_top = vec![Vec::new(); n as usize + 1];
    for (t, list) in by_top.iter_mut().enumerate().skip(1) {
        let t = t as i64;
        for y in 1..=y_max {
            let x = t - q * y * y;
            if x < 1 {
                break;
            }
            list.push((x as usize, (x + y) as usize));
        }
    }
    by_top
}

/// Ascending greedy construction: each `n ∈ [N]` is kept unless it completes
/// a configuration with the elements already kept.
pub fn greedy_free_set(p: &CountingParams, mode: YMode) -> Vec<i64> {
    let by_top = configurations_by_top(p, mode);
    let mut member = vec![false; p.n() as usize + 1];
    let mut out = Vec::new();
    for t in 1..=p.n() as usize {
        member[t] = true;
        if by_top[t].iter().any(|&(a, b)| member[a] && member[b]) {
            member[t] = false;
        } else {
            out.push(t as i64);
        }
    }
    debug_assert_eq!(find_config(&out, p, mode).ok(), Some(None));
    out
}

struct Exact {
    /// For each `t`, bitmasks of the other elements of configurations
    /// topped by `t`.
    masks: Vec<Vec<u64>>,
    n: usize,
}

impl Exact {
    fn new(p: &CountingParams, mode: YMode) -> Self {
        let masks = configurations_by_top(p, mode)
            .into_iter()
            .map(|list| {
                list.into_iter()
                    .map(|(a, b)| (1u64 << a) | (1u64 << b))
                    .collect()
            })
            .collect();
        Self {
            masks,
            n: p.n() as usize,
        }
    }

    /// `t` can join `chosen` when every chosen element is below `t`.
    fn fits(&self, chosen: u64, t: usize) -> bool {
        let with_t = chosen | (1u64 << t);
        self.masks[t].iter().all(|&m| with_t & m != m)
    }

    /// `best[i]` is the largest free subset of `{i, ..., N}`.
    fn russian_doll(&self) -> Vec<usize> {
        let n = self.n;
        let mut best = vec![0usize; n + 2];
        for i in (1..=n).rev() {
            let target = best[i + 1] + 1;
            let found = self.extend(1u64 << i, 1, i + 1, target, &best);
            best[i] = if found { target } else { best[i + 1] };
        }
        best
    }

    /// Whether `chosen` (of size `size`, all elements below `next`) extends
    /// within `{next, ..., N}` to a free set of size `target`.
    fn extend(&self, chosen: u64, size: usize, next: usize, target: usize, best: &[usize]) -> bool {
        if size >= target {
            return true;
        }
        for j in next..=self.n {
            if size + best[j] < target {
                return false;
            }
            if self.fits(chosen, j) && self.extend(chosen | (1u64 << j), size + 1, j + 1, target, best) {
                return true;
            }
        }
        false
    }

    /// The lexicographically least free set of size `target`, by
    /// include-first search.
    fn least(&self, chosen: u64, size: usize, next: usize, target: usize, best: &[usize]) -> Option<u64> {
        if size >= target {
            return Some(chosen);
        }
        for j in next..=self.n {
            if size + best[j] < target {
                return None;
            }
            if self.fits(chosen, j) {
                if let Some(s) = self.least(chosen | (1u64 << j), size + 1, j + 1, target, best) {
                    return Some(s);
                }
            }
        }
        None
    }
}

/// Size of the largest configuration-free subset of `[N]` and the
/// lexicographically least one attaining it, for `N <= EXACT_LIMIT`.
pub fn max_free_set_exact(p: &CountingParams, mode: YMode) -> Result<(usize, Vec<i64>)> {
    if p.n() > EXACT_LIMIT {
        return Err(invalid(format!(
            "exact search is limited to N <= {EXACT_LIMIT}, got {}",
            p.n()
        )));
    }
    let search = Exact::new(p, mode);
    let best = search.russian_doll();
    let size = best[1];
    let mask = search
        .least(0, 0, 1, size, &best)
        .expect("an optimum of the computed size exists");
    let set: Vec<i64> = (1..=p.n() as i64).filter(|&x| mask >> x & 1 == 1).collect();
    debug_assert_eq!(find_config(&set, p, mode).ok(), Some(None));
    Ok((size, set))
}

/// How a table row was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Greedy,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Greedy => "greedy",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub q: u64,
    pub size: usize,
    pub density: f64,
    pub method: Method,
    pub mode: YMode,
}

/// One row per `N`: the exact maximum when `N <= exact_limit`, the greedy
/// size otherwise.
pub fn density_table(q: u64, ns: &[u64], mode: YMode, exact_limit: u64) -> Result<Vec<DensityRow>> {
    let exact_limit = exact_limit.min(EXACT_LIMIT);
    ns.iter()
        .map(|&n| {
            let p = CountingParams::new(q, n)?;
            let (size, method) = if n <= exact_limit {
                (max_free_set_exact(&p, mode)?.0, Method::Exact)
            } else {
                (greedy_free_set(&p, mode).len(), Method::Greedy)
            };
            Ok(DensityRow {
                n,
                q,
                size,
                density: size as f64 / n as f64,
                method,
                mode,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "N,q,size,density,method,mode";

pub fn density_csv(rows: &[DensityRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            r.q,
            r.size,
            r.density,
            r.method.name(),
            r.mode.name()
        );
    }
    out
}
