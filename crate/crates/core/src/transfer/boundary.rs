//! Fixed-boundary observables in the limit of a long open chain.
//!
//! Sites `0` and `N+1` carry fixed spins. Inserting the site functions at
//! `i < j` splits `⟨σ₀|P^{N+1}|σ_{N+1}⟩` into `P^{i−1} C P^{j−i−2} C' P^{N−j}`,
//! and as `N → ∞` only the `λ₊` channel of the trailing power survives, so the
//! limit depends on `σ₀` alone.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::{observable_operator, transfer_spectrum, Coupling, ObservableFn};
use crate::error::{Error, Result};
use crate::numerics::{x_log_x, Spin};

/// `(σ₀, σ_{N+1})` for the four boundary conditions, in their conventional order.
pub const BOUNDARIES: [(Spin, Spin); 4] = [
    (Spin::Up, Spin::Up),
    (Spin::Down, Spin::Up),
    (Spin::Up, Spin::Down),
    (Spin::Down, Spin::Down),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLimitSet {
    /// Indexed like [`BOUNDARIES`].
    pub s_hat: [f64; 4],
    pub s_tilde: [f64; 4],
    pub m11: f64,
    pub m21: f64,
    pub l11: f64,
    pub l21: f64,
    pub r11: f64,
    pub r21: f64,
    pub r_hat_1: f64,
    pub r_hat_2: f64,
}

impl BoundaryLimitSet {
    pub fn s(&self, k: usize) -> f64 {
        self.s_hat[k] - self.s_tilde[k]
    }
}

pub fn boundary_limit_observables(
    c: &Coupling,
    f: &ObservableFn,
    g: &ObservableFn,
    i: usize,
    j: usize,
) -> Result<BoundaryLimitSet> {
    c.require_zero_field("boundary_limit_observables")?;
    if i < 1 || j < i + 2 {
        return Err(Error::domain(format!(
            "boundary limits need 1 <= i and j - i >= 2, got i = {i}, j = {j}"
        )));
    }
    let f = ObservableFn::new(f.v_plus, f.v_minus)?;
    let g = ObservableFn::new(g.v_plus, g.v_minus)?;
    let spec = transfer_spectrum(c);
    let op = observable_operator(c.k, &f, &g);
    let [c1, c2, c3, c4] = op.c_hat;

    // P'/λ₊ powers keep everything O(1); the raw products are λ₊^{j−3} larger.
    let r = spec.ratio;
    let head = Matrix2::new(1.0, 0.0, 0.0, r.powi(i as i32 - 1));
    let gap = Matrix2::new(1.0, 0.0, 0.0, r.powi((j - i - 2) as i32));
    let m = head * c1 * gap * c2;
    let l = head * c4 * gap * c3;
    let rr = head * c4 * gap * c2;

    let lp = spec.lambda_plus;
    let tail = lp.powi(-4);
    let raw = lp.powi(j as i32 - 3);

    let hat_minus = (l[(0, 0)] - l[(1, 0)] + m[(0, 0)] - m[(1, 0)]) * tail;
    let hat_plus = (l[(0, 0)] + l[(1, 0)] + m[(0, 0)] + m[(1, 0)]) * tail;
    let r_hat_1 = x_log_x((rr[(0, 0)] - rr[(1, 0)]) * tail);
    let r_hat_2 = x_log_x((rr[(0, 0)] + rr[(1, 0)]) * tail);

    let pick = |s0: Spin, up: f64, down: f64| if s0 == Spin::Up { up } else { down };
    let s_hat = BOUNDARIES.map(|(s0, _)| pick(s0, hat_minus, hat_plus));
    let s_tilde = BOUNDARIES.map(|(s0, _)| pick(s0, r_hat_1, r_hat_2));

    Ok(BoundaryLimitSet {
        s_hat,
        s_tilde,
        m11: m[(0, 0)] * raw,
        m21: m[(1, 0)] * raw,
        l11: l[(0, 0)] * raw,
        l21: l[(1, 0)] * raw,
        r11: rr[(0, 0)] * raw,
        r21: rr[(1, 0)] * raw,
        r_hat_1,
        r_hat_2,
    })
}
