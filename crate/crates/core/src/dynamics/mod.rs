//! Synchronous sign-threshold dynamics on a ring:
//! `σ_i(t+1) = sign(K_t(σ_{i−1} + σ_{i+1}) + (1−γ)σ_i + ξ_i)` with independent
//! Gaussian `ξ_i` and `sign(0) = +1`.
//!
//! Observed sites are labelled `1..=N` on the ring. Words over observed sites
//! and over their three-site windows follow the binary-sort convention of
//! [`crate::numerics`].

mod kernel;
mod montecarlo;
mod ring;

pub use kernel::{
    analytic_spectrum, build_theta, build_transfer_determined, coefficient_iteration,
    fixed_point_limit, m_point_observable, matrix_power_deviation, new_spin_distribution,
    observable_from_distribution, power_horizon, site_update_probability, spectrum_check,
    theta_error_bound, FixedPointLimit, ThetaErrorBound, ThetaMatrix, TransferDeterminedMatrix,
    MAX_THETA_SITES, MAX_TRANSFER_SITES,
};
pub use montecarlo::{
    gibbs_sample, mc_simulate, mc_step, replica_rng, Estimate, McConfig, McInit, McPoint, McResult,
    McValues, DEFAULT_BUDGET,
};
pub use ring::{
    exact_ring_evolve, exact_ring_step, gibbs_initial_distribution, observed_marginal,
    window_marginal, EvolvePoint, RingDistribution, RingState, MAX_EXACT_SITES,
};

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{spin_at, x_log_x, Spin};
use crate::rgflow::rgt_step;
use crate::transfer::{observable_constants, ObservableFn};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub gamma: f64,
    /// Standard deviation of ξ.
    pub noise_scale: f64,
    pub sign_at_zero: Spin,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            noise_scale: 1.0,
            sign_at_zero: Spin::Up,
        }
    }
}

impl DynamicsParams {
    pub fn new(gamma: f64, noise_scale: f64) -> Result<Self> {
        let p = Self {
            gamma,
            noise_scale,
            sign_at_zero: Spin::Up,
        };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() {
            return Err(Error::domain("gamma must be finite"));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale > 0.0) {
            return Err(Error::domain(format!(
                "noise_scale must be > 0, got {}",
                self.noise_scale
            )));
        }
        if self.sign_at_zero != Spin::Up {
            return Err(Error::domain("only sign(0) = +1 is supported"));
        }
        Ok(())
    }

    /// `x = (1−γ)/noise_scale`, the scaled self-coupling.
    pub fn drift_ratio(&self) -> f64 {
        (1.0 - self.gamma) / self.noise_scale
    }
}

/// Coupling as a function of the step index; step `t` (from 0) uses `K_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Schedule {
    Constant { k: f64 },
    Geometric { k0: f64, ratio: f64 },
    Rgt { k0: f64 },
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let k = match *self {
            Schedule::Constant { k } => k,
            Schedule::Geometric { k0, ratio } => {
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(Error::domain(format!(
                        "geometric ratio must lie in (0,1), got {ratio}"
                    )));
                }
                k0
            }
            Schedule::Rgt { k0 } => k0,
        };
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::domain(format!(
                "schedule coupling must be finite and >= 0, got {k}"
            )));
        }
        Ok(())
    }

    pub fn initial(&self) -> f64 {
        match *self {
            Schedule::Constant { k } => k,
            Schedule::Geometric { k0, .. } | Schedule::Rgt { k0 } => k0,
        }
    }

    /// `K_0, …, K_{len−1}`.
    pub fn couplings(&self, len: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let mut out = Vec::with_capacity(len);
        let mut k = self.initial();
        for t in 0..len {
            out.push(match *self {
                Schedule::Constant { k } => k,
                Schedule::Geometric { k0, ratio } => k0 * ratio.powi(t as i32),
                Schedule::Rgt { .. } => {
                    let current = k;
                    k = rgt_step(k)?;
                    current
                }
            });
        }
        Ok(out)
    }

    pub fn coupling_at(&self, t: usize) -> Result<f64> {
        Ok(self.couplings(t + 1)?[t])
    }
}

impl FromStr for Schedule {
    type Err = Error;

    /// `constant:K`, `geometric:K0,RATIO` or `rgt:K0`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = args
            .split(',')
            .filter(|a| !a.trim().is_empty())
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::domain(format!("bad schedule number {a:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        let sched = match (kind.trim(), nums.as_slice()) {
            ("constant", [k]) => Schedule::Constant { k: *k },
            ("geometric", [k0, ratio]) => Schedule::Geometric {
                k0: *k0,
                ratio: *ratio,
            },
            ("rgt", [k0]) => Schedule::Rgt { k0: *k0 },
            _ => {
                return Err(Error::domain(format!(
                    "unrecognised schedule {s:?}; expected constant:K, geometric:K0,RATIO or rgt:K0"
                )))
            }
        };
        sched.validate()?;
        Ok(sched)
    }
}

fn check_probabilities(probs: &[f64], what: &str) -> Result<()> {
    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::domain(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

/// Joint law of the `3m` spins around `m` observed sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDistribution {
    pub m: usize,
    pub probs: Vec<f64>,
}

impl WindowDistribution {
    pub fn new(m: usize, probs: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_THETA_SITES).contains(&m) || probs.len() != 1 << (3 * m) {
            return Err(Error::domain(format!(
                "window over {m} sites needs 2^{} entries",
                3 * m
            )));
        }
        check_probabilities(&probs, "window distribution")?;
        Ok(Self { m, probs })
    }

    pub fn point_mass(m: usize, rank: usize) -> Result<Self> {
        let mut probs = vec![0.0; 1usize.checked_shl(3 * m as u32).unwrap_or(0)];
        if rank >= probs.len() {
            return Err(Error::domain("window rank out of range"));
        }
        probs[rank] = 1.0;
        Self::new(m, probs)
    }
}

/// Law of the `m` observed spins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewSpinDistribution {
    pub m: usize,
    pub probs: Vec<f64>,
}

impl NewSpinDistribution {
    pub fn new(m: usize, probs: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_TRANSFER_SITES).contains(&m) || probs.len() != 1 << m {
            return Err(Error::domain(format!(
                "distribution over {m} sites needs 2^{m} entries"
            )));
        }
        check_probabilities(&probs, "spin-word distribution")?;
        Ok(Self { m, probs })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(m, vec![1.0 / (1u64 << m) as f64; 1 << m])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub m: usize,
    pub coeffs: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let m = word_length(coeffs.len())?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("coefficients must be finite"));
        }
        Ok(Self { m, coeffs })
    }

    /// `(a, b, c, d)` of the pair `f, g`.
    pub fn hat(f: &ObservableFn, g: &ObservableFn) -> Result<Self> {
        Self::new(observable_constants(f, g)?.hat_weights().to_vec())
    }

    pub fn tilde(f: &ObservableFn, g: &ObservableFn) -> Result<Self> {
        Self::new(observable_constants(f, g)?.tilde_weights().to_vec())
    }
}

/// `log₂ len` for a power-of-two table length between 2 and 2^8.
fn word_length(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() || len > 1 << MAX_TRANSFER_SITES {
        return Err(Error::domain(format!(
            "table length {len} is not 2^m with 1 <= m <= {MAX_TRANSFER_SITES}"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

/// What is measured on the observed sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObservableSpec {
    /// `F = f²(σ_{x₁}) g²(σ_{x₂})`, reported as `Ŝ`, `S̃`, `S` and the
    /// connected spin correlation.
    Pair { f: ObservableFn, g: ObservableFn },
    /// `f²` over `m` sites as a table in binary-sort order.
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ObservableValues {
    Pair {
        s_hat: f64,
        s_tilde: f64,
        s: f64,
        connected: f64,
    },
    Table {
        value: f64,
    },
}

impl ObservableSpec {
    pub fn m(&self) -> usize {
        match self {
            ObservableSpec::Pair { .. } => 2,
            ObservableSpec::Table { values } => values.len().trailing_zeros() as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ObservableSpec::Pair { f, g } => {
                observable_constants(f, g)?;
            }
            ObservableSpec::Table { values } => {
                word_length(values.len())?;
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::domain(
                        "observable table entries must be finite and >= 0",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Per-word columns whose expectations determine the observable:
    /// `[F ln F, F, σ₁, σ₂, σ₁σ₂]` for a pair, `[f²]` for a table.
    pub(crate) fn columns(&self) -> Vec<Vec<f64>> {
        match self {
            ObservableSpec::Pair { f, g } => {
                let oc = observable_constants(f, g).expect("validated");
                let hat = oc.hat_weights();
                let tilde = oc.tilde_weights();
                (0..4)
                    .map(|w| {
                        let (s1, s2) = (spin_at(w, 0), spin_at(w, 1));
                        vec![hat[w], tilde[w], s1, s2, s1 * s2]
                    })
                    .collect()
            }
            ObservableSpec::Table { values } => values.iter().map(|&v| vec![v]).collect(),
        }
    }

    pub(crate) fn values_from_means(&self, means: &[f64]) -> ObservableValues {
        match self {
            ObservableSpec::Pair { .. } => {
                let s_tilde = x_log_x(means[1]);
                ObservableValues::Pair {
                    s_hat: means[0],
                    s_tilde,
                    s: means[0] - s_tilde,
                    connected: means[4] - means[2] * means[3],
                }
            }
            ObservableSpec::Table { .. } => ObservableValues::Table { value: means[0] },
        }
    }

    pub fn evaluate(&self, dist: &NewSpinDistribution) -> Result<ObservableValues> {
        self.validate()?;
        if dist.m != self.m() {
            return Err(Error::domain(format!(
                "observable over {} sites applied to a distribution over {}",
                self.m(),
                dist.m
            )));
        }
        let cols = self.columns();
        let width = cols[0].len();
        let means: Vec<f64> = (0..width)
            .map(|c| {
                cols.iter()
                    .zip(&dist.probs)
                    .map(|(row, p)| row[c] * p)
                    .sum()
            })
            .collect();
        Ok(self.values_from_means(&means))
    }

    /// Value once the observed spins are independent and uniform.
    pub fn limit(&self) -> Result<ObservableValues> {
        self.evaluate(&NewSpinDistribution::uniform(self.m())?)
    }
}

/// Converts 1-based ring labels to 0-based positions, rejecting duplicates.
pub(crate) fn ring_positions(sites: &[usize], n: usize) -> Result<Vec<usize>> {
    if sites.is_empty() {
        return Err(Error::domain("at least one observed site is required"));
    }
    let mut out = Vec::with_capacity(sites.len());
    for &s in sites {
        if !(1..=n).contains(&s) {
            return Err(Error::domain(format!(
                "site {s} is outside the ring 1..={n}"
            )));
        }
        if out.contains(&(s - 1)) {
            return Err(Error::domain(format!("site {s} listed twice")));
        }
        out.push(s - 1);
    }
    Ok(out)
}

/// Ring distance between 0-based positions.
pub(crate) fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}
