//! Exact transfer-matrix engine for the periodic and fixed-boundary chain.
//!
//! The symmetric transfer matrix has entries `e^{Kσσ' + h(σ+σ')/2}`. At zero
//! field it is diagonalised by a fixed 45° rotation, which is what makes the
//! two-point observables of a pair of site functions available in closed form.

mod boundary;
mod enumeration;

pub use boundary::{boundary_limit_observables, BoundaryLimitSet, BOUNDARIES};
pub use enumeration::{
    finite_open_chain_observable, finite_ring_observable, MAX_ENUMERATION_SITES,
};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::numerics::{x_log_x, Spin};

/// Dimensionless couplings: `K = βJ`, `h = βH`, and the quadratic offset γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub k: f64,
    pub h: f64,
    pub gamma: f64,
}

impl Coupling {
    pub fn new(k: f64, h: f64, gamma: f64) -> Result<Self> {
        if !(k.is_finite() && h.is_finite() && gamma.is_finite()) {
            return Err(Error::domain("couplings must be finite"));
        }
        if k < 0.0 {
            return Err(Error::domain(format!("coupling K must be >= 0, got {k}")));
        }
        Ok(Self { k, h, gamma })
    }

    pub fn zero_field(k: f64) -> Result<Self> {
        Self::new(k, 0.0, 0.0)
    }

    pub(crate) fn require_zero_field(&self, what: &str) -> Result<()> {
        if self.h != 0.0 {
            return Err(Error::UnsupportedRegime(format!(
                "{what} is only available at h = 0 (got h = {})",
                self.h
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSpectrum {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Rotation angle with `tan 2φ = e^{−2K}/sinh h`; `−π/4` at zero field.
    pub angle_phi: f64,
    /// `λ₋/λ₊`, evaluated as `tanh K` at zero field.
    pub ratio: f64,
}

pub fn transfer_spectrum(c: &Coupling) -> TransferSpectrum {
    let k = c.k;
    if c.h == 0.0 {
        return TransferSpectrum {
            lambda_plus: k.exp() + (-k).exp(),
            lambda_minus: k.exp() - (-k).exp(),
            angle_phi: -FRAC_PI_4,
            ratio: k.tanh(),
        };
    }
    let root = (c.h.sinh().powi(2) + (-4.0 * k).exp()).sqrt();
    let lambda_plus = k.exp() * (c.h.cosh() + root);
    let lambda_minus = k.exp() * (c.h.cosh() - root);
    TransferSpectrum {
        lambda_plus,
        lambda_minus,
        angle_phi: 0.5 * ((-2.0 * k).exp() / c.h.sinh()).atan(),
        ratio: lambda_minus / lambda_plus,
    }
}

impl TransferSpectrum {
    /// `sin²(2φ)` written through `tan 2φ` so that it is exactly 1 at h = 0.
    fn sin_sq_two_phi(c: &Coupling) -> f64 {
        let e = (-4.0 * c.k).exp();
        e / (c.h.sinh().powi(2) + e)
    }
}

/// `Z_N = λ₊^N + λ₋^N` for the periodic ring.
pub fn partition_function(c: &Coupling, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("partition function needs N >= 1"));
    }
    let s = transfer_spectrum(c);
    let n = n as i32;
    Ok(s.lambda_plus.powi(n) + s.lambda_minus.powi(n))
}

/// Infinite-volume connected correlation `sin²(2φ)·(λ₋/λ₊)^d`.
pub fn correlation_two_point(c: &Coupling, d: u32) -> f64 {
    let s = transfer_spectrum(c);
    TransferSpectrum::sin_sq_two_phi(c) * s.ratio.powi(d as i32)
}

/// Squared site function, stored as its two values `f²(+1)`, `f²(−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableFn {
    pub v_plus: f64,
    pub v_minus: f64,
}

impl ObservableFn {
    pub fn new(v_plus: f64, v_minus: f64) -> Result<Self> {
        if !(v_plus.is_finite() && v_minus.is_finite()) || v_plus < 0.0 || v_minus < 0.0 {
            return Err(Error::domain(format!(
                "observable values must be finite and >= 0, got ({v_plus}, {v_minus})"
            )));
        }
        if v_plus + v_minus <= 0.0 {
            return Err(Error::domain("observable must not vanish on both spins"));
        }
        Ok(Self { v_plus, v_minus })
    }

    pub fn one() -> Self {
        Self {
            v_plus: 1.0,
            v_minus: 1.0,
        }
    }

    #[inline]
    pub fn value(&self, s: Spin) -> f64 {
        match s {
            Spin::Up => self.v_plus,
            Spin::Down => self.v_minus,
        }
    }

    /// The same function composed with a global spin flip.
    pub fn flipped(&self) -> Self {
        Self {
            v_plus: self.v_minus,
            v_minus: self.v_plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub big_a: f64,
    pub big_b: f64,
    pub c2_12: f64,
    pub c4_12: f64,
    pub delta_bar: f64,
    pub delta_hat: f64,
    pub delta_tilde: f64,
    pub ta: f64,
    pub tb: f64,
    pub tc: f64,
    pub td: f64,
}

impl ObservableConstants {
    /// `(a, b, c, d)` in binary-sort order of `(σ_{x₁}, σ_{x₂})`.
    pub fn hat_weights(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn tilde_weights(&self) -> [f64; 4] {
        [self.ta, self.tb, self.tc, self.td]
    }

    /// `C⁴₁₂·C²₁₂/4`, the uncorrelated part of `⟨f²g²⟩`.
    pub fn product_mass(&self) -> f64 {
        self.c4_12 * self.c2_12 / 4.0
    }
}

pub fn observable_constants(f: &ObservableFn, g: &ObservableFn) -> Result<ObservableConstants> {
    // re-validate: the fields are public
    let f = ObservableFn::new(f.v_plus, f.v_minus)?;
    let g = ObservableFn::new(g.v_plus, g.v_minus)?;
    let (fp, fm, gp, gm) = (f.v_plus, f.v_minus, g.v_plus, g.v_minus);
    let a = x_log_x(fp * gp);
    let b = x_log_x(fm * gp);
    let c = x_log_x(fp * gm);
    let d = x_log_x(fm * gm);
    Ok(ObservableConstants {
        a,
        b,
        c,
        d,
        big_a: a + b + c + d,
        big_b: a - b - c + d,
        c2_12: gp + gm,
        c4_12: fp + fm,
        delta_bar: (fp - fm) * (gp - gm),
        delta_hat: (x_log_x(fp) - x_log_x(fm)) * (gp - gm),
        delta_tilde: (x_log_x(gp) - x_log_x(gm)) * (fp - fm),
        ta: fp * gp,
        tb: fm * gp,
        tc: fp * gm,
        td: fm * gm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointObservable {
    pub s_hat: f64,
    pub s_tilde: f64,
    pub s: f64,
}

impl TwoPointObservable {
    pub fn new(s_hat: f64, s_tilde: f64) -> Self {
        Self {
            s_hat,
            s_tilde,
            s: s_hat - s_tilde,
        }
    }

    /// Builds the observable from `⟨F ln F⟩` and `⟨F⟩`.
    pub fn from_moments(mean_f_log_f: f64, mean_f: f64) -> Self {
        Self::new(mean_f_log_f, x_log_x(mean_f))
    }
}

/// Thermodynamic-limit observable of `F = f²(σ_{x₁}) g²(σ_{x₂})` at distance
/// `d = |x₂ − x₁|` on the zero-field chain.
pub fn two_point_observable(
    c: &Coupling,
    f: &ObservableFn,
    g: &ObservableFn,
    d: u32,
) -> Result<TwoPointObservable> {
    c.require_zero_field("the two-point observable")?;
    if d < 1 {
        return Err(Error::domain("two-point observable needs distance d >= 1"));
    }
    let oc = observable_constants(f, g)?;
    Ok(closed_form_observable(&oc, c.k.tanh().powi(d as i32)))
}

/// Closed form in terms of the correlation factor `ρ = (λ₋/λ₊)^d`.
pub(crate) fn closed_form_observable(oc: &ObservableConstants, rho: f64) -> TwoPointObservable {
    let s_hat = oc.big_a / 4.0 + oc.big_b / 4.0 * rho;
    let q = oc.product_mass() + oc.delta_bar / 4.0 * rho;
    TwoPointObservable::new(s_hat, x_log_x(q))
}

/// Insertion operators `C¹…C⁴` (site sums against the two adjacent bonds)
/// and their rotations `Ĉᵏ = O Cᵏ Oᵀ` into the transfer eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableOperator {
    pub c: [Matrix2<f64>; 4],
    pub c_hat: [Matrix2<f64>; 4],
}

pub fn observable_operator(k: f64, f: &ObservableFn, g: &ObservableFn) -> ObservableOperator {
    let insertion = |plus: f64, minus: f64| {
        let e2 = (2.0 * k).exp();
        let em2 = (-2.0 * k).exp();
        Matrix2::new(
            plus * e2 + minus * em2,
            plus + minus,
            plus + minus,
            plus * em2 + minus * e2,
        )
    };
    let c = [
        insertion(x_log_x(f.v_plus), x_log_x(f.v_minus)),
        insertion(g.v_plus, g.v_minus),
        insertion(x_log_x(g.v_plus), x_log_x(g.v_minus)),
        insertion(f.v_plus, f.v_minus),
    ];
    let rotate = |m: &Matrix2<f64>| {
        let mean = (m[(0, 0)] + m[(1, 1)]) / 2.0;
        let half_diff = (m[(0, 0)] - m[(1, 1)]) / 2.0;
        Matrix2::new(mean + m[(0, 1)], -half_diff, -half_diff, mean - m[(0, 1)])
    };
    let c_hat = [rotate(&c[0]), rotate(&c[1]), rotate(&c[2]), rotate(&c[3])];
    ObservableOperator { c, c_hat }
}

/// Free energy per bond, `ln λ₊`, independent of the boundary condition.
pub fn free_energy_density(c: &Coupling) -> Result<f64> {
    c.require_zero_field("free_energy_density")?;
    // ln(e^K + e^{−K}) without overflow
    Ok(c.k + (-2.0 * c.k).exp().ln_1p())
}

/// `⟨s₀|P^{N+1}|s_{N+1}⟩` for the open chain of `N` free spins.
pub fn fixed_boundary_partition(c: &Coupling, n: usize, s0: Spin, s_end: Spin) -> Result<f64> {
    c.require_zero_field("fixed_boundary_partition")?;
    if n < 1 {
        return Err(Error::domain("fixed-boundary partition needs N >= 1"));
    }
    let s = transfer_spectrum(c);
    let p = (n + 1) as i32;
    let sign = if s0 == s_end { 1.0 } else { -1.0 };
    Ok((s.lambda_plus.powi(p) + sign * s.lambda_minus.powi(p)) / 2.0)
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn obs(p: f64, m: f64) -> ObservableFn {
        ObservableFn::new(p, m).unwrap()
    }

    /// Brute-force periodic ring with field: returns (Z, ⟨σ_0σ_d⟩ − ⟨σ_0⟩⟨σ_d⟩).
    fn ring_oracle(c: &Coupling, n: usize, d: usize) -> (f64, f64) {
        let (mut z, mut s0sd, mut s0, mut sd) = (0.0, 0.0, 0.0, 0.0);
        for x in 0..(1usize << n) {
            let spin = |i: usize| 1.0 - 2.0 * ((x >> (i % n)) & 1) as f64;
            let e: f64 = (0..n)
                .map(|i| c.k * spin(i) * spin(i + 1) + c.h * spin(i))
                .sum();
            let w = e.exp();
            z += w;
            s0sd += w * spin(0) * spin(d);
            s0 += w * spin(0);
            sd += w * spin(d);
        }
        (z, s0sd / z - (s0 / z) * (sd / z))
    }

    #[test]
    fn spectrum_reference_values() {
        let s = transfer_spectrum(&Coupling::zero_field(0.0).unwrap());
        assert_eq!((s.lambda_plus, s.lambda_minus), (2.0, 0.0));
        let s = transfer_spectrum(&Coupling::zero_field(1.0).unwrap());
        assert!((s.lambda_plus - 3.0861612696).abs() < 1e-10);
        assert!((s.lambda_minus - 2.3504023873).abs() < 1e-10);
        assert_eq!(s.angle_phi, -FRAC_PI_4);
    }

    #[test]
    fn spectrum_with_field_matches_eigensolve() {
        let c = Coupling::new(0.5, 0.3, 0.0).unwrap();
        let s = transfer_spectrum(&c);
        let p = Matrix2::new(
            (c.k + c.h).exp(),
            (-c.k).exp(),
            (-c.k).exp(),
            (c.k - c.h).exp(),
        );
        let mut ev: Vec<f64> = p.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_relative_eq!(s.lambda_plus, ev[0], max_relative = 1e-13);
        assert_relative_eq!(s.lambda_minus, ev[1], max_relative = 1e-13);
        // mpmath
        assert!((s.lambda_plus - 2.51084266285865061).abs() < 1e-14);
        assert!((s.lambda_minus - 0.936101023793986816).abs() < 1e-14);
        let t = (2.0 * s.angle_phi).tan();
        assert_relative_eq!(t, (-2.0 * c.k).exp() / c.h.sinh(), max_relative = 1e-12);
    }

    #[test]
    fn general_field_path_approaches_zero_field_path() {
        let z = transfer_spectrum(&Coupling::zero_field(0.7).unwrap());
        let nz = transfer_spectrum(&Coupling::new(0.7, 1e-9, 0.0).unwrap());
        assert!((z.lambda_plus - nz.lambda_plus).abs() < 1e-8);
        assert!((z.lambda_minus - nz.lambda_minus).abs() < 1e-8);
    }

    #[test]
    fn partition_function_examples() {
        assert_eq!(
            partition_function(&Coupling::zero_field(0.0).unwrap(), 3).unwrap(),
            8.0
        );
        let z2 = partition_function(&Coupling::zero_field(1.0).unwrap(), 2).unwrap();
        // four configurations of the 2-ring: two with weight e^{2K}, two with e^{−2K}
        assert_relative_eq!(
            z2,
            2.0 * (2.0f64).exp() + 2.0 * (-2.0f64).exp(),
            max_relative = 1e-14
        );
        assert!((z2 - 15.0487827643345258).abs() < 1e-12);
        assert!(partition_function(&Coupling::zero_field(1.0).unwrap(), 0).is_err());
    }

    #[test]
    fn partition_function_matches_enumeration_with_field() {
        for &(k, h, n) in &[(0.5, 0.0, 10), (0.3, 0.4, 9), (1.2, -0.2, 12)] {
            let c = Coupling::new(k, h, 0.0).unwrap();
            let (z, _) = ring_oracle(&c, n, 1);
            assert_relative_eq!(partition_function(&c, n).unwrap(), z, max_relative = 1e-12);
        }
    }

    #[test]
    fn correlation_examples() {
        let c = Coupling::zero_field(1.0).unwrap();
        assert_eq!(correlation_two_point(&c, 0), 1.0);
        assert!((correlation_two_point(&c, 1) - 0.7615941560).abs() < 1e-10);
        // mpmath: tanh(1)^3
        assert!((correlation_two_point(&c, 3) - 0.441744151731152638).abs() < 1e-14);
        // finite ring of 20 sites, corrections of order tanh(1)^{N−d}
        let (_, g1) = ring_oracle(&c, 20, 1);
        assert!((g1 - correlation_two_point(&c, 1)).abs() < 2.0 * 0.7616f64.powi(19));
    }

    #[test]
    fn connected_correlation_with_field_matches_large_ring() {
        let c = Coupling::new(0.4, 0.25, 0.0).unwrap();
        for d in 0..4 {
            let (_, g) = ring_oracle(&c, 18, d);
            assert!(
                (g - correlation_two_point(&c, d as u32)).abs() < 1e-5,
                "d={d}"
            );
        }
    }

    #[test]
    fn observable_constant_examples() {
        let one = ObservableFn::one();
        let oc = observable_constants(&one, &one).unwrap();
        assert_eq!(oc.hat_weights(), [0.0; 4]);
        assert_eq!(
            (oc.big_a, oc.big_b, oc.c2_12, oc.c4_12, oc.delta_bar),
            (0.0, 0.0, 2.0, 2.0, 0.0)
        );

        let ln2 = std::f64::consts::LN_2;
        let oc = observable_constants(&obs(2.0, 1.0), &obs(2.0, 1.0)).unwrap();
        assert_relative_eq!(oc.a, 4.0 * 4f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(oc.b, 2.0 * ln2, max_relative = 1e-15);
        assert_relative_eq!(oc.c, 2.0 * ln2, max_relative = 1e-15);
        assert_eq!(oc.d, 0.0);
        assert_relative_eq!(oc.big_a, 12.0 * ln2, max_relative = 1e-15);
        assert_relative_eq!(oc.big_b, 4.0 * ln2, max_relative = 1e-15);
        assert_eq!((oc.c2_12, oc.c4_12, oc.delta_bar), (3.0, 3.0, 1.0));

        let oc = observable_constants(&obs(2.0, 1.0), &ObservableFn::one()).unwrap();
        assert_eq!(oc.delta_bar, 0.0);
        assert!(oc.big_b.abs() < 1e-15);
    }

    #[test]
    fn observable_constants_reject_vanishing_functions() {
        let zero = ObservableFn {
            v_plus: 0.0,
            v_minus: 0.0,
        };
        assert!(observable_constants(&zero, &ObservableFn::one()).is_err());
        assert!(ObservableFn::new(-1.0, 1.0).is_err());
        // a single zero value is fine under 0·ln 0 = 0
        assert!(observable_constants(&obs(0.0, 1.0), &obs(1.0, 0.0)).is_ok());
    }

    #[test]
    fn b_equals_sum_of_the_proof_deltas() {
        let oc = observable_constants(&obs(2.0, 0.5), &obs(3.0, 1.5)).unwrap();
        assert_relative_eq!(
            oc.big_b,
            oc.delta_hat + oc.delta_tilde,
            max_relative = 1e-14
        );
    }

    #[test]
    fn two_point_observable_examples() {
        let ln2 = std::f64::consts::LN_2;
        let f = obs(2.0, 1.0);
        for d in [1, 4, 9] {
            let o = two_point_observable(&Coupling::zero_field(0.0).unwrap(), &f, &f, d).unwrap();
            assert_relative_eq!(o.s_hat, 3.0 * ln2, max_relative = 1e-15);
            assert!((o.s_tilde - 1.8245929864867397).abs() < 1e-14);
            assert!((o.s - 0.2548485551930962).abs() < 1e-14);
        }
        let one = ObservableFn::one();
        let o = two_point_observable(&Coupling::zero_field(0.8).unwrap(), &one, &one, 3).unwrap();
        assert_eq!((o.s_hat, o.s_tilde, o.s), (0.0, 0.0, 0.0));
    }

    #[test]
    fn two_point_observable_rejects_field_and_zero_distance() {
        let f = ObservableFn::one();
        let c = Coupling::new(0.5, 0.1, 0.0).unwrap();
        assert!(matches!(
            two_point_observable(&c, &f, &f, 2),
            Err(Error::UnsupportedRegime(_))
        ));
        let c = Coupling::zero_field(0.5).unwrap();
        assert!(matches!(
            two_point_observable(&c, &f, &f, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rotated_operators_match_explicit_conjugation() {
        let (f, g) = (obs(2.0, 0.3), obs(1.5, 4.0));
        let op = observable_operator(0.6, &f, &g);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let o = Matrix2::new(h, h, -h, h);
        for k in 0..4 {
            assert_eq!(op.c[k], op.c[k].transpose());
            let explicit = o * op.c[k] * o.transpose();
            assert!((explicit - op.c_hat[k]).amax() < 1e-12, "k={k}");
        }
        // O diagonalises the zero-field transfer matrix
        let kk = 0.6f64;
        let p = Matrix2::new(kk.exp(), (-kk).exp(), (-kk).exp(), kk.exp());
        let d = o * p * o.transpose();
        assert!(d[(0, 1)].abs() < 1e-14 && d[(1, 0)].abs() < 1e-14);
        assert_relative_eq!(d[(0, 0)], kk.exp() + (-kk).exp(), max_relative = 1e-14);
    }

    #[test]
    fn free_energy_examples() {
        let f0 = free_energy_density(&Coupling::zero_field(0.0).unwrap()).unwrap();
        assert!((f0 - std::f64::consts::LN_2).abs() < 1e-15);
        let c = Coupling::zero_field(1.0).unwrap();
        let f1 = free_energy_density(&c).unwrap();
        assert!((f1 - 1.1269280110429725).abs() < 1e-14);
        let z2 = fixed_boundary_partition(&c, 30, Spin::Down, Spin::Up).unwrap();
        assert!((z2.ln() / 31.0 - f1).abs() <= 0.03);
        assert!(free_energy_density(&Coupling::new(1.0, 0.5, 0.0).unwrap()).is_err());
    }

    #[test]
    fn fixed_boundary_partition_matches_interior_enumeration() {
        let c = Coupling::zero_field(1.0).unwrap();
        let n = 3;
        for s0 in Spin::ALL {
            for s1 in Spin::ALL {
                let mut z = 0.0;
                for x in 0..(1usize << n) {
                    let mut spins = vec![s0.value()];
                    spins.extend((0..n).map(|i| 1.0 - 2.0 * ((x >> i) & 1) as f64));
                    spins.push(s1.value());
                    z += spins
                        .windows(2)
                        .map(|w| c.k * w[0] * w[1])
                        .sum::<f64>()
                        .exp();
                }
                let got = fixed_boundary_partition(&c, n, s0, s1).unwrap();
                assert_relative_eq!(got, z, max_relative = 1e-13);
            }
        }
        assert_eq!(
            fixed_boundary_partition(&Coupling::zero_field(0.0).unwrap(), 1, Spin::Up, Spin::Up)
                .unwrap(),
            2.0
        );
    }

    proptest! {
        #[test]
        fn boundary_partitions_sum_to_twice_lambda_plus_power(k in 0.0f64..2.0, n in 1usize..25) {
            let c = Coupling::zero_field(k).unwrap();
            let total: f64 = Spin::ALL.iter()
                .flat_map(|&a| Spin::ALL.iter().map(move |&b| (a, b)))
                .map(|(a, b)| fixed_boundary_partition(&c, n, a, b).unwrap())
                .sum();
            let lp = transfer_spectrum(&c).lambda_plus;
            prop_assert!((total / (2.0 * lp.powi(n as i32 + 1)) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn zero_field_correlation_is_tanh_power(k in 0.0f64..3.0, d in 0u32..40) {
            let c = Coupling::zero_field(k).unwrap();
            prop_assert!((correlation_two_point(&c, d) - k.tanh().powi(d as i32)).abs() <= 1e-12);
        }

        #[test]
        fn s_hat_moves_monotonically_toward_a_over_4(k in 0.01f64..2.0, p in 0.1f64..5.0, q in 0.1f64..5.0) {
            let f = ObservableFn::new(p, 1.0).unwrap();
            let g = ObservableFn::new(q, 1.0).unwrap();
            let oc = observable_constants(&f, &g).unwrap();
            let c = Coupling::zero_field(k).unwrap();
            let mut prev = f64::INFINITY;
            for d in 1..30 {
                let gap = (two_point_observable(&c, &f, &g, d).unwrap().s_hat - oc.big_a / 4.0).abs();
                prop_assert!(gap <= prev + 1e-15);
                prev = gap;
            }
        }

        #[test]
        fn constants_continuous_as_value_vanishes(eps in 1e-300f64..1e-200) {
            let a = observable_constants(&ObservableFn::new(eps, 1.0).unwrap(), &ObservableFn::new(2.0, 1.0).unwrap()).unwrap();
            let b = observable_constants(&ObservableFn::new(0.0, 1.0).unwrap(), &ObservableFn::new(2.0, 1.0).unwrap()).unwrap();
            prop_assert!((a.big_a - b.big_a).abs() < 1e-150);
            prop_assert!((a.big_b - b.big_b).abs() < 1e-150);
        }
    }
}
