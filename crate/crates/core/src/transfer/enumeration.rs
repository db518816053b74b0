//! Brute-force expectations over every configuration of a short chain.
//!
//! These are the ground truth for the closed forms. Configurations are split
//! into fixed-size blocks, each block is summed with compensation, and the
//! blocks are merged in index order, so the result does not depend on how
//! rayon schedules the work.

use rayon::prelude::*;

use super::{Coupling, ObservableFn, TwoPointObservable};
use crate::error::{Error, Result};
use crate::numerics::{x_log_x, CompensatedSum, Spin};

pub const MAX_ENUMERATION_SITES: usize = 22;

const BLOCK_BITS: usize = 12;

/// Returns `(Σ w, [Σ w·obs_k])` over all `2^n` configurations.
pub(crate) fn weighted_sums<const M: usize>(
    n: usize,
    eval: impl Fn(usize) -> (f64, [f64; M]) + Sync,
) -> (f64, [f64; M]) {
    let total = 1usize << n;
    let block = 1usize << BLOCK_BITS.min(n);
    let partials: Vec<(CompensatedSum, [CompensatedSum; M])> = (0..total / block)
        .into_par_iter()
        .map(|b| {
            let mut z = CompensatedSum::new();
            let mut acc = [CompensatedSum::new(); M];
            for x in b * block..(b + 1) * block {
                let (w, obs) = eval(x);
                z.add(w);
                for (a, o) in acc.iter_mut().zip(obs) {
                    a.add(w * o);
                }
            }
            (z, acc)
        })
        .collect();
    let mut z = CompensatedSum::new();
    let mut acc = [CompensatedSum::new(); M];
    for (pz, pa) in &partials {
        z.merge(pz);
        for (a, p) in acc.iter_mut().zip(pa) {
            a.merge(p);
        }
    }
    (z.value(), acc.map(|a| a.value()))
}

fn check_sites(i: usize, j: usize, n: usize) -> Result<()> {
    if n > MAX_ENUMERATION_SITES {
        return Err(Error::resource(format!(
            "enumeration over {n} sites exceeds the cap of {MAX_ENUMERATION_SITES}"
        )));
    }
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::domain(format!(
            "need 1 <= i < j <= N, got i = {i}, j = {j}, N = {n}"
        )));
    }
    Ok(())
}

/// `(F ln F, F)` for `F = f²(σ_i) g²(σ_j)`, keyed by `bit_i + 2·bit_j`.
fn pair_table(f: &ObservableFn, g: &ObservableFn) -> [[f64; 2]; 4] {
    let mut t = [[0.0; 2]; 4];
    for (key, row) in t.iter_mut().enumerate() {
        let v = f.value(Spin::from_bit(key)) * g.value(Spin::from_bit(key >> 1));
        *row = [x_log_x(v), v];
    }
    t
}

#[inline]
fn pair_key(x: usize, i: usize, j: usize) -> usize {
    ((x >> (i - 1)) & 1) | (((x >> (j - 1)) & 1) << 1)
}

/// Exact finite-ring `Ŝ_N`, `S̃_N` for sites `i < j` on a periodic ring of `N`.
pub fn finite_ring_observable(
    c: &Coupling,
    f: &ObservableFn,
    g: &ObservableFn,
    i: usize,
    j: usize,
    n: usize,
) -> Result<TwoPointObservable> {
    c.require_zero_field("finite_ring_observable")?;
    check_sites(i, j, n)?;
    let f = ObservableFn::new(f.v_plus, f.v_minus)?;
    let g = ObservableFn::new(g.v_plus, g.v_minus)?;
    let table = pair_table(&f, &g);
    let mask = (1usize << n) - 1;
    let k = c.k;
    let (z, [flf, fm]) = weighted_sums(n, |x| {
        let rot = ((x >> 1) | (x << (n - 1))) & mask;
        // energy relative to the ground state, so weights stay <= 1
        let broken = (x ^ rot).count_ones() as f64;
        ((-2.0 * k * broken).exp(), table[pair_key(x, i, j)])
    });
    Ok(TwoPointObservable::from_moments(flf / z, fm / z))
}

/// Exact open-chain `Ŝ_N`, `S̃_N` with spins `s0` at site 0 and `s_end` at `N+1`.
#[allow(clippy::too_many_arguments)]
pub fn finite_open_chain_observable(
    c: &Coupling,
    f: &ObservableFn,
    g: &ObservableFn,
    i: usize,
    j: usize,
    n: usize,
    s0: Spin,
    s_end: Spin,
) -> Result<TwoPointObservable> {
    c.require_zero_field("finite_open_chain_observable")?;
    check_sites(i, j, n)?;
    let f = ObservableFn::new(f.v_plus, f.v_minus)?;
    let g = ObservableFn::new(g.v_plus, g.v_minus)?;
    let table = pair_table(&f, &g);
    let inner = (1usize << (n - 1)) - 1;
    let (b0, b_end) = (s0.bit(), s_end.bit());
    let k = c.k;
    let (z, [flf, fm]) = weighted_sums(n, |x| {
        let broken = ((x ^ (x >> 1)) & inner).count_ones()
            + ((x & 1) ^ b0) as u32
            + (((x >> (n - 1)) & 1) ^ b_end) as u32;
        ((-2.0 * k * broken as f64).exp(), table[pair_key(x, i, j)])
    });
    Ok(TwoPointObservable::from_moments(flf / z, fm / z))
}
