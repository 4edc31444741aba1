//! Quasimomentum condition of the box with delta scatterers.
//!
//! Two independent routes are provided:
//!
//! * a real transfer sweep of `(ψ, ψ')` from the left wall, whose value at
//!   the right wall ([`bethe_mismatch`]) vanishes exactly at the allowed
//!   quasimomenta and has no poles;
//! * the complex reflection/scattering recursions on plane-wave amplitudes
//!   and the explicit ordered-subset polynomial, kept for cross-checking and
//!   for assembling eigenfunctions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ScattererSet;

/// Default cap on `M` for [`bethe_polynomial_form`] (cost is `2^M`).
pub const POLYNOMIAL_CAP: usize = 12;

/// Relative size below which a recursion denominator is treated as a pole.
pub const POLE_FLOOR: f64 = 1e-12;

/// `(ψ, ψ'/κ)` with `κ = max(1, k)`.
///
/// Scaling the derivative by `κ` turns free propagation into a rotation for
/// `k >= 1`, so magnitudes only grow at the scatterers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferState {
    pub psi: f64,
    pub slope: f64,
}

impl TransferState {
    pub fn magnitude(&self) -> f64 {
        self.psi.hypot(self.slope)
    }
}

#[inline]
fn derivative_scale(k: f64) -> f64 {
    k.max(1.0)
}

#[inline]
fn free_step(state: TransferState, k: f64, kappa: f64, d: f64) -> TransferState {
    let (s, c) = (k * d).sin_cos();
    TransferState {
        psi: state.psi * c + state.slope * kappa * s / k,
        slope: -state.psi * k * s / kappa + state.slope * c,
    }
}

/// Propagates the solution with `ψ(-L/2) = 0`, `ψ'(-L/2) = κ` to the right
/// wall.
pub fn sweep_to_right_wall(set: &ScattererSet, k: f64) -> TransferState {
    let kappa = derivative_scale(k);
    let mut state = TransferState {
        psi: 0.0,
        slope: 1.0,
    };
    let mut x = -0.5 * set.length();
    for (&y, &h) in set.positions().iter().zip(set.heights()) {
        state = free_step(state, k, kappa, y - x);
        state.slope += 2.0 * h * state.psi / kappa;
        x = y;
    }
    free_step(state, k, kappa, 0.5 * set.length() - x)
}

/// Right-wall value of the left-anchored solution. Its zeros in `k > 0`
/// are exactly the allowed quasimomenta.
pub fn bethe_mismatch(set: &ScattererSet, k: f64) -> f64 {
    sweep_to_right_wall(set, k).psi
}

/// [`bethe_mismatch`] together with the magnitude of the final state, which
/// serves as the local scale for "is this zero".
pub fn bethe_mismatch_scaled(set: &ScattererSet, k: f64) -> (f64, f64) {
    let state = sweep_to_right_wall(set, k);
    (state.psi, state.magnitude())
}

/// Transfer matrix acting on `(ψ, ψ')` from the left wall to the right wall.
pub fn transfer_matrix(set: &ScattererSet, k: f64) -> [[f64; 2]; 2] {
    let free = |d: f64| {
        let (s, c) = (k * d).sin_cos();
        [[c, s / k], [-k * s, c]]
    };
    let mut total = [[1.0, 0.0], [0.0, 1.0]];
    let mut x = -0.5 * set.length();
    for (&y, &h) in set.positions().iter().zip(set.heights()) {
        total = mat_mul(free(y - x), total);
        total = mat_mul([[1.0, 0.0], [2.0 * h, 1.0]], total);
        x = y;
    }
    mat_mul(free(0.5 * set.length() - x), total)
}

pub(crate) fn mat_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Reflection amplitudes `R_n = A_n(-k)/A_n(k)` for the regions `1..=M+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionVector {
    /// `R_1..R_M` from the left recursion, then the right-wall value
    /// `R_{M+1} = -e^{ikL}`.
    pub values: Vec<Complex64>,
    /// `R_{M+1}` carried through the left recursion across the last
    /// scatterer. Equals the wall value exactly when `k` is allowed.
    pub closure: Complex64,
}

impl ReflectionVector {
    /// Complex Bethe residual: left-propagated minus right-wall reflection.
    pub fn residual(&self) -> Complex64 {
        self.closure - self.values[self.values.len() - 1]
    }

    /// Reflection coefficient of region `n` (1-based), using the
    /// left-propagated value in the last region.
    pub fn region(&self, n: usize) -> Complex64 {
        if n == self.values.len() {
            self.closure
        } else {
            self.values[n - 1]
        }
    }
}

/// One step of the left recursion across a scatterer at `y` of height `h`.
fn reflect_across(r: Complex64, y: f64, h: f64, k: f64, barrier: usize) -> Result<Complex64> {
    let ik = Complex64::new(0.0, k);
    let phase = Complex64::from_polar(1.0, 2.0 * y * k);
    let num = -h * phase + (ik - h) * r;
    let den = (ik + h) + h * phase.conj() * r;
    if den.norm() <= POLE_FLOOR * num.norm() {
        return Err(Error::RecursionPole { k, barrier });
    }
    Ok(num / den)
}

/// Reflection amplitudes from the left-wall value `R_1 = -e^{-ikL}`.
pub fn reflection_coefficients(set: &ScattererSet, k: f64) -> Result<ReflectionVector> {
    let l = set.length();
    let mut values = Vec::with_capacity(set.len() + 1);
    let mut r = -Complex64::from_polar(1.0, -k * l);
    values.push(r);
    for (n, (&y, &h)) in set.positions().iter().zip(set.heights()).enumerate() {
        r = reflect_across(r, y, h, k, n + 1)?;
        if n + 1 < set.len() {
            values.push(r);
        }
    }
    values.push(-Complex64::from_polar(1.0, k * l));
    Ok(ReflectionVector { values, closure: r })
}

/// Reflection amplitudes `R_1..R_{M+1}` obtained from the right wall
/// inwards. Agrees with [`reflection_coefficients`] at allowed `k`.
pub fn reflection_from_right(set: &ScattererSet, k: f64) -> Result<Vec<Complex64>> {
    let ik = Complex64::new(0.0, k);
    let mut out = vec![Complex64::new(0.0, 0.0); set.len() + 1];
    let mut r = -Complex64::from_polar(1.0, k * set.length());
    out[set.len()] = r;
    for n in (0..set.len()).rev() {
        let (y, h) = (set.positions()[n], set.heights()[n]);
        let phase = Complex64::from_polar(1.0, 2.0 * y * k);
        let num = h * phase + (ik + h) * r;
        let den = (ik - h) - h * phase.conj() * r;
        if den.norm() <= POLE_FLOOR * num.norm() {
            return Err(Error::RecursionPole { k, barrier: n + 1 });
        }
        r = num / den;
        out[n] = r;
    }
    Ok(out)
}

/// Transmission ratios `S_n = A_{n+1}(k)/A_n(k)` across each scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringVector {
    pub values: Vec<Complex64>,
}

/// `S_n = 1 - (i h_n / k)(1 + e^{-2i y_n k} R_n)`.
///
/// Follows from continuity and the derivative jump `2 h_n ψ(y_n)`.
pub fn scattering_coefficients(
    set: &ScattererSet,
    k: f64,
    reflection: &ReflectionVector,
) -> ScatteringVector {
    let values = set
        .positions()
        .iter()
        .zip(set.heights())
        .enumerate()
        .map(|(n, (&y, &h))| {
            let r = reflection.values[n];
            let bracket = 1.0 + Complex64::from_polar(1.0, -2.0 * y * k) * r;
            1.0 - Complex64::new(0.0, h / k) * bracket
        })
        .collect();
    ScatteringVector { values }
}

/// Explicit form `Σ_n 2ⁿ ξ_n k^{M-n}` of the quasimomentum condition, where
/// `ξ_n` sums `Π h_{p_j} Π sin(k(y_{p_j} - y_{p_{j-1}}))` over ordered index
/// subsets `p_1 < … < p_n` (walls as `y_{p_0}` and `y_{p_{n+1}}`).
///
/// Equals `k^{M+1} ψ(L/2)` for the solution with `ψ(-L/2) = 0, ψ' = 1`.
pub fn bethe_polynomial_form(set: &ScattererSet, k: f64) -> Result<f64> {
    bethe_polynomial_form_capped(set, k, POLYNOMIAL_CAP)
}

pub fn bethe_polynomial_form_capped(set: &ScattererSet, k: f64, cap: usize) -> Result<f64> {
    let m = set.len();
    if m > cap {
        return Err(Error::SubsetBlowup { m, cap });
    }
    let half = 0.5 * set.length();
    let (y, h) = (set.positions(), set.heights());
    let mut total = 0.0;
    for mask in 0u64..(1u64 << m) {
        let n = mask.count_ones() as i32;
        let mut term = 2f64.powi(n) * k.powi(m as i32 - n);
        let mut prev = -half;
        for p in (0..m).filter(|p| mask >> p & 1 == 1) {
            term *= h[p] * (k * (y[p] - prev)).sin();
            prev = y[p];
        }
        term *= (k * (half - prev)).sin();
        total += term;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn single() -> ScattererSet {
        ScattererSet::new(2.0, vec![0.0], vec![1.0]).unwrap()
    }

    #[test]
    fn empty_box_mismatch_is_a_sine() {
        let set = ScattererSet::empty(PI).unwrap();
        for &k in &[0.3, 1.0, 1.7, 2.0, 3.0, 5.5] {
            let expected = (k * PI).sin() * derivative_scale(k) / k;
            assert_abs_diff_eq!(bethe_mismatch(&set, k), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn free_transfer_matrix() {
        let set = ScattererSet::empty(1.3).unwrap();
        let k = 2.1;
        let t = transfer_matrix(&set, k);
        let (s, c) = (k * 1.3f64).sin_cos();
        assert_abs_diff_eq!(t[0][0], c, epsilon = 1e-14);
        assert_abs_diff_eq!(t[0][1], s / k, epsilon = 1e-14);
        assert_abs_diff_eq!(t[1][0], -k * s, epsilon = 1e-14);
        assert_abs_diff_eq!(t[1][1], c, epsilon = 1e-14);
    }

    #[test]
    fn transfer_matrix_maps_root_onto_node() {
        let t = transfer_matrix(&single(), PI);
        // (0, 1) -> (t01, t11); the first component must vanish.
        assert_abs_diff_eq!(t[0][1], 0.0, epsilon = 1e-14);
        assert!(t[1][1].abs() > 0.5);
    }

    #[test]
    fn left_wall_reflection() {
        let set = crate::model::uniform_lattice(5.0, 4, 0.7, 0.2).unwrap();
        let k = 1.37;
        let r = reflection_coefficients(&set, k).unwrap();
        assert_abs_diff_eq!(
            (r.values[0] + Complex64::from_polar(1.0, -k * 5.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(r.values[0].norm(), 1.0);
        assert_eq!(r.values[4], -Complex64::from_polar(1.0, k * 5.0));
    }

    #[test]
    fn transparent_barriers_do_not_reflect() {
        let set = crate::model::uniform_lattice(5.0, 4, 0.0, 0.2).unwrap();
        let k = 2.2;
        let r = reflection_coefficients(&set, k).unwrap();
        for n in 1..=4 {
            assert_abs_diff_eq!((r.region(n) - r.values[0]).norm(), 0.0, epsilon = 1e-14);
        }
        let s = scattering_coefficients(&set, k, &r);
        assert!(s.values.iter().all(|&v| v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn node_on_barrier_gives_unit_transmission() {
        let set = single();
        let r = reflection_coefficients(&set, PI).unwrap();
        assert_abs_diff_eq!((r.values[0] + 1.0).norm(), 0.0, epsilon = 1e-14);
        let s = scattering_coefficients(&set, PI, &r);
        assert_abs_diff_eq!((s.values[0] - 1.0).norm(), 0.0, epsilon = 1e-14);
        // The antisymmetric state passes the barrier untouched, so the
        // recursion carries R_1 across it and closes on the right wall.
        assert_abs_diff_eq!(r.residual().norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((r.closure - r.values[0]).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn polynomial_form_small_cases() {
        let l = 1.7;
        let empty = ScattererSet::empty(l).unwrap();
        for &k in &[0.4, 2.3, 7.1] {
            assert_abs_diff_eq!(
                bethe_polynomial_form(&empty, k).unwrap(),
                (k * l).sin(),
                epsilon = 1e-14
            );
        }
        let h = 0.8;
        let one = ScattererSet::new(l, vec![0.0], vec![h]).unwrap();
        for &k in &[0.4, 2.3, 7.1] {
            let expected = k * (k * l).sin() + 2.0 * h * (0.5 * k * l).sin().powi(2);
            assert_abs_diff_eq!(
                bethe_polynomial_form(&one, k).unwrap(),
                expected,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn polynomial_cap() {
        let set = crate::model::uniform_lattice(13.0, 13, 0.2, 0.0).unwrap();
        assert!(matches!(
            bethe_polynomial_form(&set, 1.0),
            Err(Error::SubsetBlowup { m: 13, cap: 12 })
        ));
    }

    #[test]
    fn polynomial_equals_scaled_mismatch() {
        let set =
            ScattererSet::new(3.0, vec![-1.1, -0.2, 0.4, 1.3], vec![0.5, -0.3, 1.2, 0.9]).unwrap();
        for &k in &[0.2, 0.9, 1.5, 3.3, 8.0] {
            let poly = bethe_polynomial_form(&set, k).unwrap();
            let psi = bethe_mismatch(&set, k) / derivative_scale(k);
            assert_abs_diff_eq!(poly, k.powi(5) * psi, epsilon = 1e-9 * k.powi(5));
        }
    }
}
