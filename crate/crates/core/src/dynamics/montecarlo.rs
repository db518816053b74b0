//! Monte Carlo for the synchronous dynamics on rings too large to enumerate.
//!
//! Replica `r` draws from its own ChaCha stream `(seed, r)`. Each replica
//! records the observed spin word after every step; words are tallied into
//! integer histograms whose merge is exact, so results do not depend on how
//! replicas are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    ring_positions, DynamicsParams, ObservableSpec, ObservableValues, RingDistribution, RingState,
    Schedule,
};
use crate::error::{Error, Result};
use crate::numerics::{x_log_x, Spin};

/// Default cap on `replicas · steps · sites`.
pub const DEFAULT_BUDGET: u64 = 4_000_000_000;

const REPLICA_CHUNK: usize = 64;

pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Sequential sampler for the zero-field ring Gibbs measure. Site 0 is a fair
/// coin; site `i` given `σ_{i−1}` and `σ₀` has weight
/// `e^{Kσ_{i−1}s}·(1 + sσ₀ tanh^{N−i}K)`, the bond times the remaining arc.
struct GibbsSampler {
    /// `p_up[i][(prev_bit << 1) | first_bit]`
    p_up: Vec<[f64; 4]>,
}

impl GibbsSampler {
    fn new(k: f64, n: usize) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::domain(format!(
                "coupling must be finite and >= 0, got {k}"
            )));
        }
        if n < 3 {
            return Err(Error::domain(format!(
                "a ring needs at least 3 sites, got {n}"
            )));
        }
        let r = k.tanh();
        let flip = (-2.0 * k).exp();
        let mut p_up = vec![[0.0; 4]; n];
        for (i, row) in p_up.iter_mut().enumerate().skip(1) {
            let arc = (n - i) as f64;
            let (agree, disagree) = if r > 0.0 {
                let rn = (arc * r.ln()).exp();
                (1.0 + rn, -(arc * r.ln()).exp_m1())
            } else {
                (1.0, 1.0)
            };
            for (key, p) in row.iter_mut().enumerate() {
                let prev_up = key >> 1 == 0;
                let first_up = key & 1 == 0;
                let bond_up = if prev_up { 1.0 } else { flip };
                let bond_down = if prev_up { flip } else { 1.0 };
                let (arc_up, arc_down) = if first_up {
                    (agree, disagree)
                } else {
                    (disagree, agree)
                };
                let w_up = bond_up * arc_up;
                *p = w_up / (w_up + bond_down * arc_down);
            }
        }
        Ok(Self { p_up })
    }

    fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let first = if rng.random::<bool>() { 0 } else { 1 };
        out[0] = 1.0 - 2.0 * first as f64;
        let mut prev = first;
        for (i, row) in self.p_up.iter().enumerate().skip(1) {
            let up = rng.random::<f64>() < row[(prev << 1) | first];
            prev = if up { 0 } else { 1 };
            out[i] = if up { 1.0 } else { -1.0 };
        }
    }
}

fn to_state(values: &[f64]) -> RingState {
    RingState {
        spins: values
            .iter()
            .map(|&v| if v > 0.0 { Spin::Up } else { Spin::Down })
            .collect(),
    }
}

/// Exact draw from the ring Gibbs measure at coupling `k`.
pub fn gibbs_sample(k: f64, n_sites: usize, seed: u64) -> Result<RingState> {
    let sampler = GibbsSampler::new(k, n_sites)?;
    let mut buf = vec![0.0; n_sites];
    sampler.sample_into(&mut replica_rng(seed, 0), &mut buf);
    Ok(to_state(&buf))
}

#[inline]
fn step_values<R: Rng>(
    k: f64,
    self_coupling: f64,
    scale: f64,
    old: &[f64],
    new: &mut [f64],
    rng: &mut R,
) {
    let n = old.len();
    for i in 0..n {
        let left = old[if i == 0 { n - 1 } else { i - 1 }];
        let right = old[if i + 1 == n { 0 } else { i + 1 }];
        let xi: f64 = rng.sample(StandardNormal);
        let field = k * (left + right) + self_coupling * old[i] + scale * xi;
        new[i] = if field >= 0.0 { 1.0 } else { -1.0 };
    }
}

/// One synchronous update with fresh noise from `rng`.
pub fn mc_step<R: Rng>(
    params: &DynamicsParams,
    k: f64,
    state: &RingState,
    rng: &mut R,
) -> Result<RingState> {
    params.validate()?;
    if state.n_sites() < 3 {
        return Err(Error::domain("a ring needs at least 3 sites"));
    }
    let old: Vec<f64> = state.spins.iter().map(|s| s.value()).collect();
    let mut new = vec![0.0; old.len()];
    step_values(
        k,
        1.0 - params.gamma,
        params.noise_scale,
        &old,
        &mut new,
        rng,
    );
    Ok(to_state(&new))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum McInit {
    /// Ring Gibbs measure at coupling `k`.
    Gibbs {
        k: f64,
    },
    AllUp,
    /// Draws from an explicit distribution over a ring of at most 14 sites.
    Distribution {
        dist: RingDistribution,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_sites: usize,
    pub steps: usize,
    pub replicas: usize,
    pub seed: u64,
    /// 1-based ring labels.
    pub sites: Vec<usize>,
    pub observable: ObservableSpec,
    pub init: McInit,
    pub budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn within(&self, reference: f64, sigmas: f64) -> bool {
        (self.value - reference).abs() <= sigmas * self.stderr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum McValues {
    Pair {
        s_hat: Estimate,
        s_tilde: Estimate,
        s: Estimate,
        connected: Estimate,
    },
    Table {
        value: Estimate,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McPoint {
    pub t: usize,
    pub k: f64,
    pub values: McValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub replicas: usize,
    pub points: Vec<McPoint>,
    /// Value for independent uniform observed spins.
    pub limit: ObservableValues,
}

impl McResult {
    /// `(name, estimate, reference)` at the last checkpoint.
    pub fn final_checks(&self) -> Vec<(&'static str, Estimate, f64)> {
        let Some(last) = self.points.last() else {
            return Vec::new();
        };
        match (last.values, self.limit) {
            (
                McValues::Pair {
                    s_hat,
                    s_tilde,
                    s,
                    connected,
                },
                ObservableValues::Pair {
                    s_hat: lh,
                    s_tilde: lt,
                    s: ls,
                    connected: lc,
                },
            ) => vec![
                ("s_hat", s_hat, lh),
                ("s_tilde", s_tilde, lt),
                ("s", s, ls),
                ("connected", connected, lc),
            ],
            (McValues::Table { value }, ObservableValues::Table { value: lv }) => {
                vec![("value", value, lv)]
            }
            _ => unreachable!("estimate and limit come from the same observable"),
        }
    }
}

fn validate_config(
    params: &DynamicsParams,
    schedule: &Schedule,
    cfg: &McConfig,
) -> Result<Vec<usize>> {
    params.validate()?;
    schedule.validate()?;
    cfg.observable.validate()?;
    if cfg.n_sites < 3 {
        return Err(Error::domain(format!(
            "a ring needs at least 3 sites, got {}",
            cfg.n_sites
        )));
    }
    if cfg.replicas < 2 {
        return Err(Error::domain("standard errors need at least 2 replicas"));
    }
    if cfg.sites.len() != cfg.observable.m() {
        return Err(Error::domain(format!(
            "observable needs {} sites, {} given",
            cfg.observable.m(),
            cfg.sites.len()
        )));
    }
    let cost = (cfg.replicas as u128) * (cfg.steps as u128) * (cfg.n_sites as u128);
    if cost > cfg.budget as u128 {
        return Err(Error::resource(format!(
            "replicas x steps x sites = {cost} exceeds the budget of {}",
            cfg.budget
        )));
    }
    match &cfg.init {
        McInit::Gibbs { k } if !(k.is_finite() && *k >= 0.0) => {
            return Err(Error::domain(
                "initial Gibbs coupling must be finite and >= 0",
            ))
        }
        McInit::Distribution { dist } if dist.n_sites != cfg.n_sites => {
            return Err(Error::domain(
                "initial distribution has the wrong ring size",
            ))
        }
        _ => {}
    }
    ring_positions(&cfg.sites, cfg.n_sites)
}

enum Init {
    Gibbs(GibbsSampler),
    AllUp,
    Cumulative(Vec<f64>),
}

impl Init {
    fn draw<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Init::Gibbs(s) => s.sample_into(rng, out),
            Init::AllUp => out.iter_mut().for_each(|v| *v = 1.0),
            Init::Cumulative(cdf) => {
                let u = rng.random::<f64>() * cdf[cdf.len() - 1];
                let x = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                for (i, v) in out.iter_mut().enumerate() {
                    *v = 1.0 - 2.0 * ((x >> i) & 1) as f64;
                }
            }
        }
    }
}

/// Runs `cfg.replicas` independent trajectories and estimates the observable
/// after every step, with replica standard errors.
pub fn mc_simulate(
    params: &DynamicsParams,
    schedule: &Schedule,
    cfg: &McConfig,
) -> Result<McResult> {
    let pos = validate_config(params, schedule, cfg)?;
    let ks = schedule.couplings(cfg.steps)?;
    let init = match &cfg.init {
        McInit::Gibbs { k } => Init::Gibbs(GibbsSampler::new(*k, cfg.n_sites)?),
        McInit::AllUp => Init::AllUp,
        McInit::Distribution { dist } => Init::Cumulative(
            dist.probs
                .iter()
                .scan(0.0, |acc, p| {
                    *acc += p;
                    Some(*acc)
                })
                .collect(),
        ),
    };
    let words = 1usize << pos.len();
    let hist_len = cfg.steps * words;
    let self_coupling = 1.0 - params.gamma;
    let n_chunks = cfg.replicas.div_ceil(REPLICA_CHUNK);

    let hist = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut hist = vec![0u64; hist_len];
            let mut cur = vec![0.0; cfg.n_sites];
            let mut next = vec![0.0; cfg.n_sites];
            let end = ((chunk + 1) * REPLICA_CHUNK).min(cfg.replicas);
            for replica in chunk * REPLICA_CHUNK..end {
                let mut rng = replica_rng(cfg.seed, replica as u64);
                init.draw(&mut rng, &mut cur);
                for (t, &k) in ks.iter().enumerate() {
                    step_values(
                        k,
                        self_coupling,
                        params.noise_scale,
                        &cur,
                        &mut next,
                        &mut rng,
                    );
                    std::mem::swap(&mut cur, &mut next);
                    let w = pos
                        .iter()
                        .enumerate()
                        .fold(0, |acc, (s, &p)| acc | (usize::from(cur[p] < 0.0) << s));
                    hist[t * words + w] += 1;
                }
            }
            hist
        })
        .reduce(
            || vec![0u64; hist_len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let cols = cfg.observable.columns();
    let points = ks
        .iter()
        .enumerate()
        .map(|(t, &k)| McPoint {
            t: t + 1,
            k,
            values: estimate(
                &cfg.observable,
                &cols,
                &hist[t * words..(t + 1) * words],
                cfg.replicas,
            ),
        })
        .collect();
    Ok(McResult {
        replicas: cfg.replicas,
        points,
        limit: cfg.observable.limit()?,
    })
}

/// Mean and standard error of `Y_w = Σ_c α_c·col_c(w)` under the histogram.
fn linear_estimate(cols: &[Vec<f64>], counts: &[u64], total: usize, alpha: &[f64]) -> Estimate {
    let y: Vec<f64> = cols
        .iter()
        .map(|row| row.iter().zip(alpha).map(|(v, a)| v * a).sum())
        .collect();
    let r = total as f64;
    let mean = counts
        .iter()
        .zip(&y)
        .map(|(&n, v)| n as f64 * v)
        .sum::<f64>()
        / r;
    let ss: f64 = counts
        .iter()
        .zip(&y)
        .map(|(&n, v)| n as f64 * (v - mean).powi(2))
        .sum();
    Estimate {
        value: mean,
        stderr: (ss / (r - 1.0) / r).sqrt(),
    }
}

fn estimate(spec: &ObservableSpec, cols: &[Vec<f64>], counts: &[u64], total: usize) -> McValues {
    let unit = |c: usize| {
        let mut a = vec![0.0; cols[0].len()];
        a[c] = 1.0;
        a
    };
    match spec {
        ObservableSpec::Pair { .. } => {
            let s_hat = linear_estimate(cols, counts, total, &unit(0));
            let q = linear_estimate(cols, counts, total, &unit(1));
            let m1 = linear_estimate(cols, counts, total, &unit(2)).value;
            let m2 = linear_estimate(cols, counts, total, &unit(3)).value;
            // delta method around the sample mean q
            let slope = if q.value > 0.0 {
                q.value.ln() + 1.0
            } else {
                0.0
            };
            let s_tilde = Estimate {
                value: x_log_x(q.value),
                stderr: slope.abs() * q.stderr,
            };
            let s_lin = linear_estimate(cols, counts, total, &[1.0, -slope, 0.0, 0.0, 0.0]);
            let s = Estimate {
                value: s_hat.value - s_tilde.value,
                stderr: s_lin.stderr,
            };
            let c_lin = linear_estimate(cols, counts, total, &[0.0, 0.0, -m2, -m1, 1.0]);
            let s12 = linear_estimate(cols, counts, total, &unit(4)).value;
            let connected = Estimate {
                value: s12 - m1 * m2,
                stderr: c_lin.stderr,
            };
            McValues::Pair {
                s_hat,
                s_tilde,
                s,
                connected,
            }
        }
        ObservableSpec::Table { .. } => McValues::Table {
            value: linear_estimate(cols, counts, total, &unit(0)),
        },
    }
}
