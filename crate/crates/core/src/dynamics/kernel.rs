//! Single-site kernel, window transition matrices and the transfer-determined
//! matrix that drives the zero-coupling coefficient iteration.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{CoefficientVector, DynamicsParams, NewSpinDistribution, WindowDistribution};
use crate::error::{Error, Result};
use crate::numerics::{phi, spin_at, x_log_x, Spin};
use crate::transfer::{observable_constants, ObservableFn};

pub const MAX_THETA_SITES: usize = 4;
pub const MAX_TRANSFER_SITES: usize = 8;

/// `P(σ_new | left, center, right) = Φ(σ_new·(K(left+right) + (1−γ)center)/scale)`.
pub fn site_update_probability(
    params: &DynamicsParams,
    k: f64,
    left: Spin,
    center: Spin,
    right: Spin,
    new: Spin,
) -> f64 {
    let drift = k * (left.value() + right.value()) + (1.0 - params.gamma) * center.value();
    phi(new.value() * drift / params.noise_scale)
}

/// `Θ_K`: rows are new-spin words over the `m` observed sites, columns are
/// words over their windows `(x_k−1, x_k, x_k+1)` concatenated site by site.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    pub m: usize,
    pub k: f64,
    pub params: DynamicsParams,
    pub entries: DMatrix<f64>,
}

pub fn build_theta(params: &DynamicsParams, k: f64, m: usize) -> Result<ThetaMatrix> {
    params.validate()?;
    if !(1..=MAX_THETA_SITES).contains(&m) {
        return Err(Error::resource(format!(
            "Θ supports 1..={MAX_THETA_SITES} sites, got {m}"
        )));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::domain(format!(
            "coupling must be finite and >= 0, got {k}"
        )));
    }
    let rows = 1usize << m;
    let cols = 1usize << (3 * m);
    let mut entries = DMatrix::zeros(rows, cols);
    let mut up = vec![0.0; m];
    let mut down = vec![0.0; m];
    for col in 0..cols {
        for s in 0..m {
            let drift = k * (spin_at(col, 3 * s) + spin_at(col, 3 * s + 2))
                + (1.0 - params.gamma) * spin_at(col, 3 * s + 1);
            up[s] = phi(drift / params.noise_scale);
            down[s] = phi(-drift / params.noise_scale);
        }
        for row in 0..rows {
            entries[(row, col)] = (0..m)
                .map(|s| if (row >> s) & 1 == 0 { up[s] } else { down[s] })
                .product();
        }
    }
    Ok(ThetaMatrix {
        m,
        k,
        params: *params,
        entries,
    })
}

/// Symmetric stochastic `2^m × 2^m` matrix with entries
/// `Π_k Φ(rowsign_k · x · colspin_k)`, `x = (1−γ)/scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferDeterminedMatrix {
    pub m: usize,
    pub x: f64,
    pub entries: DMatrix<f64>,
}

pub fn build_transfer_determined(
    params: &DynamicsParams,
    m: usize,
) -> Result<TransferDeterminedMatrix> {
    params.validate()?;
    if !(1..=MAX_TRANSFER_SITES).contains(&m) {
        return Err(Error::resource(format!(
            "transfer-determined matrix supports 1..={MAX_TRANSFER_SITES} sites, got {m}"
        )));
    }
    let x = params.drift_ratio();
    let (same, diff) = (phi(x), phi(-x));
    let dim = 1usize << m;
    let entries = DMatrix::from_fn(dim, dim, |i, j| {
        // factor per site is Φ(x) when row and column spins agree
        let disagree = ((i ^ j) & (dim - 1)).count_ones() as i32;
        same.powi(m as i32 - disagree) * diff.powi(disagree)
    });
    Ok(TransferDeterminedMatrix { m, x, entries })
}

/// The matrix is the m-fold tensor power of `[[Φ(x), Φ(−x)], [Φ(−x), Φ(x)]]`,
/// so its eigenvalues are `r^k` with multiplicity `C(m,k)`, `r = Φ(x) − Φ(−x)`.
pub fn analytic_spectrum(x: f64, m: usize) -> Vec<f64> {
    let r = phi(x) - phi(-x);
    let mut out = Vec::with_capacity(1 << m);
    let mut binom = 1usize;
    for k in 0..=m {
        out.extend(std::iter::repeat_n(r.powi(k as i32), binom));
        binom = binom * (m - k) / (k + 1);
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Eigenvalues in descending order after checking that the top one is a
/// simple 1 and the rest match the analytic tensor spectrum.
pub fn spectrum_check(mat: &TransferDeterminedMatrix) -> Result<Vec<f64>> {
    let eig = mat.entries.clone().symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "eigensolve produced non-finite values".into(),
        ));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    if (values[0] - 1.0).abs() > 1e-10 {
        return Err(Error::Numeric(format!(
            "top eigenvalue {} is not 1",
            values[0]
        )));
    }
    if values.len() > 1 && values[1] >= 1.0 - 1e-12 {
        return Err(Error::Numeric(format!(
            "top eigenvalue is not simple (second = {})",
            values[1]
        )));
    }
    let expected = analytic_spectrum(mat.x, mat.m);
    if let Some((got, want)) = values
        .iter()
        .zip(&expected)
        .find(|(g, w)| (*g - *w).abs() > 1e-10)
    {
        return Err(Error::Numeric(format!(
            "eigenvalue {got} differs from analytic {want}"
        )));
    }
    Ok(values)
}

/// Steps `T` with `|r|^T ≤ eps`, at least 1.
pub fn power_horizon(r: f64, eps: f64) -> usize {
    let r = r.abs();
    if r == 0.0 {
        return 1;
    }
    ((eps.ln() / r.ln()).ceil() as usize).max(1)
}

/// `max |M^T − 2^{−m}|`.
pub fn matrix_power_deviation(mat: &TransferDeterminedMatrix, t: usize) -> f64 {
    let dim = mat.entries.nrows();
    let mut acc = DMatrix::<f64>::identity(dim, dim);
    let mut base = mat.entries.clone();
    let mut e = t;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    let target = 1.0 / dim as f64;
    acc.iter().map(|v| (v - target).abs()).fold(0.0, f64::max)
}

/// `v·M^t`.
pub fn coefficient_iteration(
    v: &CoefficientVector,
    mat: &TransferDeterminedMatrix,
    t: usize,
) -> Result<CoefficientVector> {
    if v.m != mat.m {
        return Err(Error::domain(format!(
            "coefficients over {} sites, matrix over {}",
            v.m, mat.m
        )));
    }
    let mut row = nalgebra::DVector::from_vec(v.coeffs.clone());
    let mt = mat.entries.transpose();
    for _ in 0..t {
        row = &mt * row;
    }
    Ok(CoefficientVector {
        m: v.m,
        coeffs: row.iter().copied().collect(),
    })
}

/// `Θ·P_window`.
pub fn new_spin_distribution(
    theta: &ThetaMatrix,
    window: &WindowDistribution,
) -> Result<NewSpinDistribution> {
    if window.m != theta.m {
        return Err(Error::domain(format!(
            "window over {} sites, Θ over {}",
            window.m, theta.m
        )));
    }
    let p = nalgebra::DVector::from_column_slice(&window.probs);
    let out = &theta.entries * p;
    NewSpinDistribution::new(theta.m, out.iter().copied().collect())
}

pub fn observable_from_distribution(
    v: &CoefficientVector,
    dist: &NewSpinDistribution,
) -> Result<f64> {
    if v.m != dist.m {
        return Err(Error::domain(format!(
            "coefficients over {} sites, distribution over {}",
            v.m, dist.m
        )));
    }
    Ok(v.coeffs.iter().zip(&dist.probs).map(|(a, p)| a * p).sum())
}

/// Expectation of an `f²` table over the observed spins.
pub fn m_point_observable(table: &[f64], dist: &NewSpinDistribution) -> Result<f64> {
    if table.len() != dist.probs.len() {
        return Err(Error::domain(format!(
            "table has {} entries, distribution has {}",
            table.len(),
            dist.probs.len()
        )));
    }
    if table.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::domain(
            "observable table entries must be finite and >= 0",
        ));
    }
    Ok(table.iter().zip(&dist.probs).map(|(a, p)| a * p).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaErrorBound {
    pub max_abs: f64,
    pub frobenius: f64,
    /// `2m/(scale·√(2π))`.
    pub lipschitz_constant: f64,
    pub within_bound: bool,
}

/// Size of `Θ_K − Θ_0`, compared against `C_lip·K`.
pub fn theta_error_bound(params: &DynamicsParams, k: f64, m: usize) -> Result<ThetaErrorBound> {
    let diff = build_theta(params, k, m)?.entries - build_theta(params, 0.0, m)?.entries;
    let max_abs = diff.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let frobenius = diff.norm();
    let lipschitz_constant =
        2.0 * m as f64 / (params.noise_scale * (2.0 * std::f64::consts::PI).sqrt());
    Ok(ThetaErrorBound {
        max_abs,
        frobenius,
        lipschitz_constant,
        within_bound: max_abs <= lipschitz_constant * k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointLimit {
    pub s_hat: f64,
    pub s_tilde: f64,
    pub s: f64,
}

/// `(A/4, q ln q, A/4 − q ln q)` with `q = C⁴₁₂C²₁₂/4`.
pub fn fixed_point_limit(f: &ObservableFn, g: &ObservableFn) -> Result<FixedPointLimit> {
    let oc = observable_constants(f, g)?;
    let q = oc.product_mass();
    if q <= 0.0 {
        return Err(Error::domain("limit undefined for vanishing total mass"));
    }
    let s_hat = oc.big_a / 4.0;
    let s_tilde = x_log_x(q);
    Ok(FixedPointLimit {
        s_hat,
        s_tilde,
        s: s_hat - s_tilde,
    })
}
