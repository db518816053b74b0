//! The coupling map `K' = ½ ln cosh K`, its iterates under dilatation by 2,
//! and the remainder sequences of the correlation and observable scaling
//! equations.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::transfer::{observable_constants, ObservableFn};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RgTrajectory {
    pub k_values: Vec<f64>,
    pub dilatation_base: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RemainderKind {
    Correlation,
    ObservableHat,
    ObservableTilde,
    Observable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderSeries {
    /// `values[m]` belongs to dilatation `λ = 2^m`, starting at `m = 0`.
    pub values: Vec<f64>,
    pub kind: RemainderKind,
    pub x1: i64,
    pub x2: i64,
    pub scaling_factor_z: f64,
}

fn check_coupling(k: f64) -> Result<()> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::domain(format!(
            "coupling must be finite and >= 0, got {k}"
        )));
    }
    Ok(())
}

/// `K' = ½ ln cosh K`.
pub fn rgt_step(k: f64) -> Result<f64> {
    check_coupling(k)?;
    Ok(rgt(k))
}

#[inline]
fn rgt(k: f64) -> f64 {
    if k < 1.0 {
        // cosh K − 1 = 2 sinh²(K/2) keeps the tiny-K regime accurate
        0.5 * (2.0 * (0.5 * k).sinh().powi(2)).ln_1p()
    } else {
        0.5 * (k + (-2.0 * k).exp().ln_1p() - LN_2)
    }
}

/// Effective coupling between the outer spins of a three-site segment after
/// summing out the middle one, solved from the four boundary weights.
pub fn decimation_oracle(k: f64) -> Result<f64> {
    check_coupling(k)?;
    let log_w = |s1: f64, s3: f64| {
        let terms = [k * (s1 + s3), -k * (s1 + s3)];
        let top = terms[0].max(terms[1]);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    };
    // W(σ₁,σ₃) = C·e^{K'σ₁σ₃}, so K' = ¼ ln[W₊₊W₋₋ / (W₊₋W₋₊)]
    Ok(0.25 * (log_w(1.0, 1.0) + log_w(-1.0, -1.0) - log_w(1.0, -1.0) - log_w(-1.0, 1.0)))
}

pub fn rg_trajectory(k0: f64, n: usize) -> Result<RgTrajectory> {
    check_coupling(k0)?;
    let mut k_values = Vec::with_capacity(n + 1);
    k_values.push(k0);
    for t in 0..n {
        k_values.push(rgt(k_values[t]));
    }
    Ok(RgTrajectory {
        k_values,
        dilatation_base: 2,
    })
}

/// `(tanh^{|Δx|} K_m, tanh^{2^m|Δx|} K₀)` for `m = 0..=n`.
fn correlation_pairs(k0: f64, dx: u64, n: usize) -> Result<Vec<(f64, f64)>> {
    let traj = rg_trajectory(k0, n)?;
    let t0 = k0.tanh();
    Ok(traj
        .k_values
        .iter()
        .enumerate()
        .map(|(m, &km)| {
            let rescaled = km.tanh().powi(dx as i32);
            let dilated = t0.powf(2f64.powi(m as i32) * dx as f64);
            (rescaled, dilated)
        })
        .collect())
}

fn separation(x1: i64, x2: i64) -> Result<u64> {
    if x1 == x2 {
        return Err(Error::domain("remainders need two distinct sites"));
    }
    let dx = x1.abs_diff(x2);
    if dx > i32::MAX as u64 {
        return Err(Error::domain("site separation too large"));
    }
    Ok(dx)
}

/// `S_m = G_{λ=2^m}(x₁,x₂) − G(2^m x₁, 2^m x₂)` for `m = 0..=n`, with `Z(λ) = 1`.
pub fn correlation_remainder(k0: f64, x1: i64, x2: i64, n: usize) -> Result<RemainderSeries> {
    let dx = separation(x1, x2)?;
    let values = correlation_pairs(k0, dx, n)?
        .into_iter()
        .map(|(a, b)| a - b)
        .collect();
    Ok(RemainderSeries {
        values,
        kind: RemainderKind::Correlation,
        x1,
        x2,
        scaling_factor_z: 1.0,
    })
}

/// `u ln u − v ln v`, accurate when `u` and `v` are close.
fn x_log_x_difference(u: f64, v: f64, diff: f64) -> f64 {
    if u == 0.0 || v == 0.0 {
        return crate::numerics::x_log_x(u) - crate::numerics::x_log_x(v);
    }
    diff * u.ln() + v * (diff / v).ln_1p()
}

/// `(Ô, Õ, O)` remainders of the observable scaling equation.
pub fn observable_remainders(
    k0: f64,
    f: &ObservableFn,
    g: &ObservableFn,
    x1: i64,
    x2: i64,
    n: usize,
) -> Result<(RemainderSeries, RemainderSeries, RemainderSeries)> {
    let dx = separation(x1, x2)?;
    let oc = observable_constants(f, g)?;
    let q0 = oc.product_mass();
    let mut hat = Vec::with_capacity(n + 1);
    let mut tilde = Vec::with_capacity(n + 1);
    for (rescaled, dilated) in correlation_pairs(k0, dx, n)? {
        let gap = rescaled - dilated;
        hat.push(oc.big_b / 4.0 * gap);
        let u = q0 + oc.delta_bar / 4.0 * rescaled;
        let v = q0 + oc.delta_bar / 4.0 * dilated;
        tilde.push(x_log_x_difference(u, v, oc.delta_bar / 4.0 * gap));
    }
    let total = hat.iter().zip(&tilde).map(|(h, t)| h - t).collect();
    let series = |values, kind| RemainderSeries {
        values,
        kind,
        x1,
        x2,
        scaling_factor_z: 1.0,
    };
    Ok((
        series(hat, RemainderKind::ObservableHat),
        series(tilde, RemainderKind::ObservableTilde),
        series(total, RemainderKind::Observable),
    ))
}

/// Least-squares slope of `ln|v_m|` against `m`, using entries from
/// `from_index` on whose magnitude exceeds 1e−300.
pub fn decay_rate_fit(series: &RemainderSeries, from_index: usize) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .values
        .iter()
        .enumerate()
        .skip(from_index)
        .filter(|(_, v)| v.abs() > 1e-300 && v.is_finite())
        .map(|(m, v)| (m as f64, v.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::domain(format!(
            "decay fit needs at least 3 nonzero entries, found {}",
            pts.len()
        )));
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// True when `|v_{m+1}| ≤ ratio·|v_m|` for every `m ≥ from_index`; exact
/// zeros count as decayed.
pub fn tail_ratio_holds(values: &[f64], from_index: usize, ratio: f64) -> bool {
    values
        .windows(2)
        .skip(from_index)
        .all(|w| w[1].abs() <= ratio * w[0].abs())
}
