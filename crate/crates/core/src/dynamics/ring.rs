//! Exact evolution of a full probability vector over ring configurations.
//!
//! One synchronous step is a product of site kernels, each reading the old
//! spins of its neighbours. Sweeping the sites in order and replacing one bit
//! at a time needs only two extra remembered bits: the old value of the
//! previous site and the old value of site 0 (the right neighbour of the last
//! site). The kernel is never materialised.

use serde::{Deserialize, Serialize};

use super::{
    ring_distance, ring_positions, DynamicsParams, NewSpinDistribution, ObservableSpec,
    ObservableValues, Schedule, WindowDistribution,
};
use crate::error::{Error, Result};
use crate::numerics::{phi, CompensatedSum, Spin};

pub const MAX_EXACT_SITES: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingState {
    pub spins: Vec<Spin>,
}

impl RingState {
    pub fn new(spins: Vec<Spin>) -> Result<Self> {
        if spins.len() < 3 {
            return Err(Error::domain(format!(
                "a ring needs at least 3 sites, got {}",
                spins.len()
            )));
        }
        Ok(Self { spins })
    }

    pub fn all_up(n: usize) -> Result<Self> {
        Self::new(vec![Spin::Up; n])
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingDistribution {
    pub n_sites: usize,
    pub probs: Vec<f64>,
}

fn check_ring_size(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::domain(format!(
            "a ring needs at least 3 sites, got {n}"
        )));
    }
    if n > MAX_EXACT_SITES {
        return Err(Error::resource(format!(
            "exact ring distributions are capped at {MAX_EXACT_SITES} sites, got {n}"
        )));
    }
    Ok(())
}

impl RingDistribution {
    pub fn new(n_sites: usize, probs: Vec<f64>) -> Result<Self> {
        check_ring_size(n_sites)?;
        if probs.len() != 1 << n_sites {
            return Err(Error::domain(format!(
                "ring of {n_sites} sites needs 2^{n_sites} probabilities"
            )));
        }
        super::check_probabilities(&probs, "ring distribution")?;
        Ok(Self { n_sites, probs })
    }

    pub fn uniform(n_sites: usize) -> Result<Self> {
        check_ring_size(n_sites)?;
        Self::new(n_sites, vec![1.0 / (1u64 << n_sites) as f64; 1 << n_sites])
    }

    pub fn point_mass(n_sites: usize, rank: usize) -> Result<Self> {
        check_ring_size(n_sites)?;
        let mut probs = vec![0.0; 1 << n_sites];
        *probs
            .get_mut(rank)
            .ok_or_else(|| Error::domain("configuration rank out of range"))? = 1.0;
        Self::new(n_sites, probs)
    }

    /// Image under the global flip σ → −σ.
    pub fn flipped(&self) -> Self {
        let mask = (1usize << self.n_sites) - 1;
        let mut probs = vec![0.0; self.probs.len()];
        for (x, p) in self.probs.iter().enumerate() {
            probs[x ^ mask] = *p;
        }
        Self {
            n_sites: self.n_sites,
            probs,
        }
    }
}

/// `kern[(l<<3)|(c<<2)|(r<<1)|new]` over binary-sort bits.
fn kernel_table(params: &DynamicsParams, k: f64) -> [f64; 16] {
    let mut t = [0.0; 16];
    for (idx, v) in t.iter_mut().enumerate() {
        let s = |shift: usize| 1.0 - 2.0 * ((idx >> shift) & 1) as f64;
        let drift = k * (s(3) + s(1)) + (1.0 - params.gamma) * s(2);
        *v = phi(s(0) * drift / params.noise_scale);
    }
    t
}

#[inline]
fn kern(t: &[f64; 16], l: usize, c: usize, r: usize, new: usize) -> f64 {
    t[(l << 3) | (c << 2) | (r << 1) | new]
}

pub fn exact_ring_step(
    params: &DynamicsParams,
    k: f64,
    dist: &RingDistribution,
) -> Result<RingDistribution> {
    params.validate()?;
    check_ring_size(dist.n_sites)?;
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::domain(format!(
            "coupling must be finite and >= 0, got {k}"
        )));
    }
    let n = dist.n_sites;
    let t = kernel_table(params, k);
    let bit = |x: usize, i: usize| (x >> i) & 1;
    let size = 1usize << n;
    // index: (config << 2) | (old previous << 1) | old first
    let mut cur = vec![0.0; 4 * size];
    let mut next = vec![0.0; 4 * size];

    for (x, &p) in dist.probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (l, c, r) = (bit(x, n - 1), bit(x, 0), bit(x, 1));
        for new in 0..2 {
            let y = (x & !1) | new;
            cur[(y << 2) | (c << 1) | c] += p * kern(&t, l, c, r, new);
        }
    }
    for i in 1..n - 1 {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (idx, &p) in cur.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (x, prev, first) = (idx >> 2, (idx >> 1) & 1, idx & 1);
            let (c, r) = (bit(x, i), bit(x, i + 1));
            for new in 0..2 {
                let y = (x & !(1 << i)) | (new << i);
                next[(y << 2) | (c << 1) | first] += p * kern(&t, prev, c, r, new);
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let mut out = vec![0.0; size];
    for (idx, &p) in cur.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (x, prev, first) = (idx >> 2, (idx >> 1) & 1, idx & 1);
        let c = bit(x, n - 1);
        for new in 0..2 {
            let y = (x & !(1 << (n - 1))) | (new << (n - 1));
            out[y] += p * kern(&t, prev, c, first, new);
        }
    }
    Ok(RingDistribution {
        n_sites: n,
        probs: out,
    })
}

/// Law of the spins at the given 1-based sites, as a word in site order.
pub fn observed_marginal(dist: &RingDistribution, sites: &[usize]) -> Result<NewSpinDistribution> {
    let pos = ring_positions(sites, dist.n_sites)?;
    let mut probs = vec![CompensatedSum::new(); 1 << pos.len()];
    for (x, &p) in dist.probs.iter().enumerate() {
        let w = pos
            .iter()
            .enumerate()
            .fold(0, |acc, (s, &q)| acc | (((x >> q) & 1) << s));
        probs[w].add(p);
    }
    NewSpinDistribution::new(pos.len(), probs.iter().map(|c| c.value()).collect())
}

/// Law of the three-site windows around the given 1-based sites, which must
/// be pairwise at ring distance 3 or more.
pub fn window_marginal(dist: &RingDistribution, sites: &[usize]) -> Result<WindowDistribution> {
    let n = dist.n_sites;
    let pos = ring_positions(sites, n)?;
    if pos.len() > super::MAX_THETA_SITES {
        return Err(Error::resource(format!(
            "windows support at most {} sites",
            super::MAX_THETA_SITES
        )));
    }
    for (a, &p) in pos.iter().enumerate() {
        for &q in &pos[a + 1..] {
            if ring_distance(p, q, n) < 3 {
                return Err(Error::domain("window sites must be at ring distance >= 3"));
            }
        }
    }
    let mut probs = vec![CompensatedSum::new(); 1 << (3 * pos.len())];
    for (x, &p) in dist.probs.iter().enumerate() {
        let mut w = 0;
        for (s, &q) in pos.iter().enumerate() {
            let triple = [(q + n - 1) % n, q, (q + 1) % n];
            for (o, &site) in triple.iter().enumerate() {
                w |= ((x >> site) & 1) << (3 * s + o);
            }
        }
        probs[w].add(p);
    }
    WindowDistribution::new(pos.len(), probs.iter().map(|c| c.value()).collect())
}

/// Finite-ring Gibbs measure `∝ exp(K Σ σ_iσ_{i+1})`.
pub fn gibbs_initial_distribution(k: f64, n_sites: usize) -> Result<RingDistribution> {
    check_ring_size(n_sites)?;
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::domain(format!(
            "coupling must be finite and >= 0, got {k}"
        )));
    }
    let weights = gibbs_weights(k, n_sites);
    let z: CompensatedSum = weights.iter().copied().collect();
    let z = z.value();
    RingDistribution::new(n_sites, weights.iter().map(|w| w / z).collect())
}

/// `exp(K(E − N))`, i.e. Boltzmann weights scaled by the ground state.
fn gibbs_weights(k: f64, n: usize) -> Vec<f64> {
    let mask = (1usize << n) - 1;
    (0..1usize << n)
        .map(|x| {
            let rot = ((x >> 1) | (x << (n - 1))) & mask;
            (-2.0 * k * (x ^ rot).count_ones() as f64).exp()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolvePoint {
    /// Number of steps taken.
    pub t: usize,
    /// Coupling used for the step that produced this point.
    pub k: f64,
    pub values: ObservableValues,
}

/// Runs `steps` exact steps, step `t` using `K_t`, and evaluates the
/// observable on the observed-site marginal after each one.
pub fn exact_ring_evolve(
    params: &DynamicsParams,
    schedule: &Schedule,
    init: &RingDistribution,
    steps: usize,
    sites: &[usize],
    observable: &ObservableSpec,
) -> Result<Vec<EvolvePoint>> {
    observable.validate()?;
    if sites.len() != observable.m() {
        return Err(Error::domain(format!(
            "observable needs {} sites, {} given",
            observable.m(),
            sites.len()
        )));
    }
    ring_positions(sites, init.n_sites)?;
    let ks = schedule.couplings(steps)?;
    let mut dist = init.clone();
    let mut out = Vec::with_capacity(steps);
    for (t, &k) in ks.iter().enumerate() {
        dist = exact_ring_step(params, k, &dist)?;
        let marginal = observed_marginal(&dist, sites)?;
        out.push(EvolvePoint {
            t: t + 1,
            k,
            values: observable.evaluate(&marginal)?,
        });
    }
    Ok(out)
}
