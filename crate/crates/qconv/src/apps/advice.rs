//! Power-law advice distribution over strings of weight one or two, and
//! the in-order classical baseline.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    FindBoth,
    FindFirst,
}

impl std::fmt::Display for SearchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchMode::FindBoth => "find-both",
            SearchMode::FindFirst => "find-first",
        })
    }
}

impl std::str::FromStr for SearchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "find-both" => Ok(SearchMode::FindBoth),
            "find-first" => Ok(SearchMode::FindFirst),
            _ => Err(Error::Validation(format!("unknown search mode {s:?}"))),
        }
    }
}

/// Strings whose dividing index `i ∈ {2..n}` has probability `∝ (i-1)^k`.
/// One uniformly placed 1 sits below `i`; the bit at `i` is 1 always
/// (find-both) or with probability `p_plus` (find-first).
#[derive(Clone, Debug, PartialEq)]
pub struct AdviceDistribution {
    n: usize,
    k: f64,
    p_plus: f64,
    mode: SearchMode,
    dividing: Vec<f64>,
}

impl AdviceDistribution {
    pub fn new(n: usize, k: f64, p_plus: f64, mode: SearchMode) -> Result<Self> {
        if n < 2 {
            return Err(Error::Validation(format!("n must be at least 2, got {n}")));
        }
        if !(k > -2.0 && k < -1.5) {
            return Err(Error::Validation(format!("k must lie in (-2, -3/2), got {k}")));
        }
        if !(0.0..=1.0).contains(&p_plus) {
            return Err(Error::Validation(format!("p_plus must lie in [0, 1], got {p_plus}")));
        }
        let p_plus = if mode == SearchMode::FindBoth { 1.0 } else { p_plus };
        let mut dividing = vec![0.0; n + 1];
        for (i, d) in dividing.iter_mut().enumerate().skip(2) {
            *d = ((i - 1) as f64).powf(k);
        }
        let total: f64 = dividing.iter().sum();
        dividing.iter_mut().for_each(|d| *d /= total);
        Ok(AdviceDistribution { n, k, p_plus, mode, dividing })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }
    pub fn mode(&self) -> SearchMode {
        self.mode
    }

    /// Normalizer `A_n` with `p(E_i*) = A_n (i-1)^k`.
    pub fn normalizer(&self) -> f64 {
        self.dividing[2]
    }

    /// `p(E_i*)` at position `i` (zero for `i < 2`).
    pub fn dividing_probability(&self, i: usize) -> f64 {
        self.dividing.get(i).copied().unwrap_or(0.0)
    }

    /// `p(E_i†)`, the probability that the first 1 is at `i`:
    /// `Σ_{j>i} p(E_j*)/(j-1)`, indexed `0..=n`.
    pub fn first_one_probabilities(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        let mut tail = 0.0;
        for i in (1..self.n).rev() {
            tail += self.dividing[i + 1] / i as f64;
            out[i] = tail;
        }
        out
    }

    /// `p(E_i)`, the probability that bit `i` is 1, indexed `0..=n`.
    pub fn bit_marginals(&self) -> Vec<f64> {
        let mut out = self.first_one_probabilities();
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.p_plus * self.dividing_probability(i);
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let mut r: f64 = rng.gen();
        let mut i = self.n;
        for (j, &p) in self.dividing.iter().enumerate().skip(2) {
            if r < p {
                i = j;
                break;
            }
            r -= p;
        }
        let mut x = vec![0u8; self.n];
        x[rng.gen_range(1..i) - 1] = 1;
        if rng.gen::<f64>() < self.p_plus {
            x[i - 1] = 1;
        }
        x
    }

    /// Every string in the support with its probability.
    pub fn support(&self) -> Vec<(Vec<u8>, f64)> {
        let mut out = Vec::new();
        for i in 2..=self.n {
            let pi = self.dividing[i];
            for low in 1..i {
                let share = pi / (i - 1) as f64;
                for (top, p) in [(1u8, self.p_plus), (0u8, 1.0 - self.p_plus)] {
                    if p > 0.0 {
                        let mut x = vec![0u8; self.n];
                        x[low - 1] = 1;
                        x[i - 1] = top;
                        out.push((x, share * p));
                    }
                }
            }
        }
        out
    }

    /// Exact average of [`classical_baseline_queries`] over the distribution.
    pub fn classical_average(&self) -> f64 {
        match self.mode {
            SearchMode::FindBoth => (2..=self.n).map(|i| self.dividing[i] * i as f64).sum(),
            SearchMode::FindFirst => {
                self.first_one_probabilities().iter().enumerate().map(|(i, p)| p * i as f64).sum()
            }
        }
    }
}

/// Queries spent by the in-order strategy: the position of the second 1
/// (find-both) or the first 1 (find-first), 1-based.
pub fn classical_baseline_queries(x: &[u8], mode: SearchMode) -> Result<usize> {
    let ones: Vec<usize> = x.iter().enumerate().filter(|(_, &b)| b == 1).map(|(i, _)| i + 1).collect();
    if ones.is_empty() || ones.len() > 2 || x.iter().any(|&b| b > 1) {
        return Err(Error::Validation(format!("input of weight {} is outside the support", ones.len())));
    }
    Ok(match mode {
        SearchMode::FindBoth if ones.len() == 2 => ones[1],
        // A lone 1 is only confirmed after reading every bit.
        SearchMode::FindBoth => x.len(),
        SearchMode::FindFirst => ones[0],
    })
}

/// The four sums over one distribution.
#[derive(Clone, Debug, Serialize)]
pub struct SumRow {
    pub n: usize,
    pub normalizer: f64,
    /// Lower end of the normalizer sandwich, `(k+1)/((n-1)^{k+1}+k)`.
    pub normalizer_lower: f64,
    /// Σ p(E_i*) √i.
    pub dividing_sqrt: f64,
    /// Σ p(E_i*) i.
    pub dividing_linear: f64,
    /// Σ p(E_i†) √i.
    pub first_sqrt: f64,
    /// Σ p(E_i†) i.
    pub first_linear: f64,
    /// Closed-form upper bound on Σ p(E_i*) √i.
    pub dividing_sqrt_bound: f64,
    /// Closed-form upper bound on Σ p(E_i†) √i.
    pub first_sqrt_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SumBoundsReport {
    pub k: f64,
    pub rows: Vec<SumRow>,
    pub dividing_linear_slope: f64,
    pub first_linear_slope: f64,
    pub dividing_sqrt_slope: f64,
    pub first_sqrt_slope: f64,
}

impl SumBoundsReport {
    /// Both linear sums grow with slope `k + 2` within `tol`.
    pub fn linear_slopes_ok(&self, tol: f64) -> bool {
        let target = self.k + 2.0;
        (self.dividing_linear_slope - target).abs() <= tol && (self.first_linear_slope - target).abs() <= tol
    }

    /// Both √i sums stay below twice their first value and below their
    /// closed-form bounds, with shrinking increments.
    pub fn sqrt_sums_bounded(&self) -> bool {
        let bounded = |get: fn(&SumRow) -> f64, bound: fn(&SumRow) -> f64| {
            let first = get(&self.rows[0]);
            let within = self.rows.iter().all(|r| get(r) <= 2.0 * first && get(r) <= bound(r));
            let steps: Vec<f64> = self.rows.windows(2).map(|w| get(&w[1]) - get(&w[0])).collect();
            let shrinking = steps.windows(2).all(|s| s[1] <= s[0] + 1e-12);
            within && shrinking
        };
        bounded(|r| r.dividing_sqrt, |r| r.dividing_sqrt_bound) && bounded(|r| r.first_sqrt, |r| r.first_sqrt_bound)
    }

    /// The normalizer lies above the lower sandwich bound for every `n`.
    pub fn normalizer_ok(&self) -> bool {
        self.rows.iter().all(|r| r.normalizer >= r.normalizer_lower - 1e-12)
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Evaluates the sums exactly for every `n` in `grid`.
pub fn verify_sum_bounds(k: f64, grid: &[usize]) -> Result<SumBoundsReport> {
    if grid.len() < 2 {
        return Err(Error::Validation("need at least two grid points".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &n in grid {
        let d = AdviceDistribution::new(n, k, 1.0, SearchMode::FindBoth)?;
        let first = d.first_one_probabilities();
        let a = d.normalizer();
        let nf = n as f64;
        let tail = ((nf - 1.0).powf(k + 1.5) - 1.0) / (3.0 + 2.0 * k);
        rows.push(SumRow {
            n,
            normalizer: a,
            normalizer_lower: (k + 1.0) / ((nf - 1.0).powf(k + 1.0) + k),
            dividing_sqrt: (2..=n).map(|i| d.dividing_probability(i) * (i as f64).sqrt()).sum(),
            dividing_linear: d.classical_average(),
            first_sqrt: first.iter().enumerate().map(|(i, p)| p * (i as f64).sqrt()).sum(),
            first_linear: first.iter().enumerate().map(|(i, p)| p * i as f64).sum(),
            dividing_sqrt_bound: a * (2f64.sqrt() + 4.0 * tail),
            first_sqrt_bound: a / k * (k - 1.0 - 4.0 * tail),
        });
    }
    let ns: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    let col = |f: fn(&SumRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    Ok(SumBoundsReport {
        k,
        dividing_linear_slope: log_log_slope(&ns, &col(|r| r.dividing_linear)),
        first_linear_slope: log_log_slope(&ns, &col(|r| r.first_linear)),
        dividing_sqrt_slope: log_log_slope(&ns, &col(|r| r.dividing_sqrt)),
        first_sqrt_slope: log_log_slope(&ns, &col(|r| r.first_sqrt)),
        rows,
    })
}
