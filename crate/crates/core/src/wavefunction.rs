//! Eigenfunctions assembled from plane-wave coefficients.
//!
//! In region `n` the state is `A_n(k) e^{ikx} + A_n(-k) e^{-ikx}`. The chain
//! starts from `A_1(k) = e^{ikL/2}`, which makes the state purely imaginary
//! and gives `A_n(-k) = -conj(A_n(k))` in every region; the explicit
//! subset-sum coefficients then read `e^{ikL/2}(1 + Σ_j (2/k)^j Ξ_j^n)`.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::Serialize;

use crate::bethe::{reflection_coefficients, scattering_coefficients, POLYNOMIAL_CAP};
use crate::eigensolve::QuasimomentumRoot;
use crate::error::{Error, Result};
use crate::format_float;
use crate::model::ScattererSet;

/// Largest relative mismatch between the left- and right-wall shots
/// accepted by [`build_state`].
pub const WALL_TOLERANCE: f64 = 1e-7;

/// A normalized eigenstate.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenState {
    pub root: QuasimomentumRoot,
    /// `A_n(k)` for `n = 1..=M+1`, normalized.
    pub plus: Vec<Complex64>,
    /// `A_n(-k)` for `n = 1..=M+1`, normalized.
    pub minus: Vec<Complex64>,
    /// Normalization constant applied to the `A_1(k) = e^{ikL/2}` chain.
    pub norm: f64,
    pub set: ScattererSet,
}

/// Coefficients `(A_n(k), A_n(-k))` before normalization.
pub fn unnormalized_coefficients(
    set: &ScattererSet,
    k: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let reflection = reflection_coefficients(set, k)?;
    let scattering = scattering_coefficients(set, k, &reflection);
    let mut plus = Vec::with_capacity(set.len() + 1);
    let mut a = Complex64::from_polar(1.0, 0.5 * k * set.length());
    plus.push(a);
    for s in &scattering.values {
        a *= s;
        plus.push(a);
    }
    let minus = plus
        .iter()
        .enumerate()
        .map(|(i, a)| reflection.region(i + 1) * a)
        .collect();
    Ok((plus, minus))
}

/// Closed-form `∫|Ψ|²` for coefficients with `A_n(-k) = -conj(A_n(k))`:
/// per region `2|A|²(y_n - y_{n-1}) - (Re²A - Im²A)(sin 2ky_n - sin 2ky_{n-1})/k
/// - 2 Re A Im A (cos 2ky_n - cos 2ky_{n-1})/k`.
pub fn closed_form_norm_squared(set: &ScattererSet, k: f64, plus: &[Complex64]) -> f64 {
    set.regions()
        .zip(plus)
        .map(|(region, a)| {
            let (l, r) = (region.left, region.right);
            let dsin = (2.0 * k * r).sin() - (2.0 * k * l).sin();
            let dcos = (2.0 * k * r).cos() - (2.0 * k * l).cos();
            2.0 * a.norm_sqr() * region.width()
                - (a.re * a.re - a.im * a.im) * dsin / k
                - 2.0 * a.re * a.im * dcos / k
        })
        .sum()
}

/// Coefficients shot from the left wall and from the right wall, spliced
/// where both are large. Returns the spliced chain and the relative mismatch
/// of the two shots at the splice.
fn spliced_coefficients(
    set: &ScattererSet,
    k: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
    let (mut plus, mut minus) = unnormalized_coefficients(set, k)?;
    let (mirror_plus, mirror_minus) = unnormalized_coefficients(&set.mirrored(), k)?;
    let n = plus.len();
    // Region i seen from the right is region n-1-i of the mirror, with the
    // two plane waves exchanged.
    let right_plus: Vec<Complex64> = (0..n).map(|i| mirror_minus[n - 1 - i]).collect();
    let right_minus: Vec<Complex64> = (0..n).map(|i| mirror_plus[n - 1 - i]).collect();
    let splice = (0..n)
        .max_by(|&a, &b| {
            plus[a]
                .norm()
                .min(right_plus[a].norm())
                .total_cmp(&plus[b].norm().min(right_plus[b].norm()))
        })
        .unwrap_or(0);
    let (l, r) = (
        (plus[splice], minus[splice]),
        (right_plus[splice], right_minus[splice]),
    );
    let size = (r.0.norm_sqr() + r.1.norm_sqr()).max(f64::MIN_POSITIVE);
    // Both chains are in the gauge A(-k) = -conj(A(k)), so the ratio is real.
    let scale = (l.0 * r.0.conj() + l.1 * r.1.conj()).re / size;
    let mismatch = ((l.0 - scale * r.0).norm_sqr() + (l.1 - scale * r.1).norm_sqr()).sqrt()
        / (l.0.norm_sqr() + l.1.norm_sqr()).sqrt();
    for i in splice + 1..n {
        plus[i] = scale * right_plus[i];
        minus[i] = scale * right_minus[i];
    }
    Ok((plus, minus, mismatch))
}

/// Builds and normalizes the eigenstate of `root`.
pub fn build_state(set: &ScattererSet, root: &QuasimomentumRoot) -> Result<EigenState> {
    let k = root.k;
    let (mut plus, mut minus, residual) = spliced_coefficients(set, k)?;
    if !(residual <= WALL_TOLERANCE) {
        return Err(Error::InvalidRoot { k, residual });
    }

    let norm = closed_form_norm_squared(set, k, &plus).powf(-0.5);
    for a in plus.iter_mut().chain(minus.iter_mut()) {
        *a *= norm;
    }
    Ok(EigenState {
        root: *root,
        plus,
        minus,
        norm,
        set: set.clone(),
    })
}

/// `A_n(k)` from the explicit ordered-subset sums, with unit base amplitude:
/// `e^{ikL/2}(1 + Σ_j (2/k)^j Ξ_j^n)`,
/// `Ξ_j^n = Σ_{p_1<…<p_j<n} e^{-ik(y_{p_j}+L/2)} Π_l h_{p_l} sin(k(y_{p_l} - y_{p_{l-1}}))`.
pub fn explicit_coefficients(set: &ScattererSet, k: f64) -> Result<Vec<Complex64>> {
    let m = set.len();
    if m > POLYNOMIAL_CAP {
        return Err(Error::SubsetBlowup {
            m,
            cap: POLYNOMIAL_CAP,
        });
    }
    let half = 0.5 * set.length();
    let (y, h) = (set.positions(), set.heights());
    let prefactor = Complex64::from_polar(1.0, k * half);
    Ok((1..=m + 1)
        .map(|n| {
            let mut sum = Complex64::new(1.0, 0.0);
            for mask in 1u64..(1u64 << (n - 1)) {
                let mut term = 1.0;
                let mut prev = -half;
                for p in (0..n - 1).filter(|p| mask >> p & 1 == 1) {
                    term *= 2.0 * h[p] / k * (k * (y[p] - prev)).sin();
                    prev = y[p];
                }
                sum += term * Complex64::from_polar(1.0, -k * (prev + half));
            }
            prefactor * sum
        })
        .collect())
}

impl EigenState {
    pub fn k(&self) -> f64 {
        self.root.k
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let half = 0.5 * self.set.length();
        if x.is_finite() && (-half..=half).contains(&x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x })
        }
    }

    /// `Ψ(x)` using the coefficients of region `n` (1-based), without a
    /// domain check. Useful for one-sided limits at a scatterer.
    pub fn value_in_region(&self, n: usize, x: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, self.k() * x);
        self.plus[n - 1] * phase + self.minus[n - 1] * phase.conj()
    }

    /// `Ψ'(x)` using the coefficients of region `n` (1-based).
    pub fn derivative_in_region(&self, n: usize, x: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, self.k() * x);
        Complex64::new(0.0, self.k())
            * (self.plus[n - 1] * phase - self.minus[n - 1] * phase.conj())
    }

    /// `Ψ(x)`; exactly zero on the walls.
    pub fn evaluate(&self, x: f64) -> Result<Complex64> {
        self.check_domain(x)?;
        if x.abs() == 0.5 * self.set.length() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.value_in_region(self.set.region_of(x), x))
    }

    /// `∫_a^b |Ψ|²` from exact per-region antiderivatives.
    pub fn probability_between(&self, a: f64, b: f64) -> Result<f64> {
        self.check_domain(a)?;
        self.check_domain(b)?;
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let k = self.k();
        Ok(self
            .set
            .regions()
            .filter_map(|region| {
                let (lo, hi) = (region.left.max(a), region.right.min(b));
                (hi > lo).then(|| {
                    let (p, m) = (self.plus[region.index - 1], self.minus[region.index - 1]);
                    let cross = p.conj() * m * exp_integral(-2.0 * k, lo, hi);
                    (p.norm_sqr() + m.norm_sqr()) * (hi - lo) + 2.0 * cross.re
                })
            })
            .sum())
    }

    /// `⟨self|other⟩` over the box, exact per region. Both states must
    /// belong to the same instance.
    pub fn overlap(&self, other: &EigenState) -> Result<Complex64> {
        if self.set != other.set {
            return Err(Error::InvalidParameter(
                "overlap of states from different instances".into(),
            ));
        }
        let (k1, k2) = (self.k(), other.k());
        Ok(self
            .set
            .regions()
            .map(|region| {
                let i = region.index - 1;
                let (a1, b1) = (self.plus[i].conj(), self.minus[i].conj());
                let (a2, b2) = (other.plus[i], other.minus[i]);
                let (l, r) = (region.left, region.right);
                a1 * a2 * exp_integral(k2 - k1, l, r)
                    + a1 * b2 * exp_integral(-k2 - k1, l, r)
                    + b1 * a2 * exp_integral(k2 + k1, l, r)
                    + b1 * b2 * exp_integral(k1 - k2, l, r)
            })
            .sum())
    }
}

/// `∫_a^b e^{icx} dx`, stable for small `c`.
fn exp_integral(c: f64, a: f64, b: f64) -> Complex64 {
    let half_width = 0.5 * (b - a);
    let t = c * half_width;
    let sinc = if t.abs() < 1e-4 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    };
    Complex64::from_polar(1.0, 0.5 * c * (a + b)) * (2.0 * half_width * sinc)
}

/// Probability within `edge_fraction · L` of either wall.
pub fn edge_weight(state: &EigenState, edge_fraction: f64) -> Result<f64> {
    if !(edge_fraction > 0.0 && edge_fraction <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "edge fraction {edge_fraction} outside (0, 1/2]"
        )));
    }
    let l = state.set.length();
    let half = 0.5 * l;
    let width = edge_fraction * l;
    Ok(state.probability_between(-half, -half + width)?
        + state.probability_between(half - width, half)?)
}

/// Default edge fraction: one lattice period `1/M` per side.
pub fn default_edge_fraction(set: &ScattererSet) -> f64 {
    if set.is_empty() {
        0.5
    } else {
        (1.0 / set.len() as f64).min(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensitySample {
    pub x: f64,
    pub psi: Complex64,
    pub density: f64,
}

/// Samples `Ψ` and `|Ψ|²` on a uniform grid that includes both walls.
pub fn density_grid(state: &EigenState, n_samples: usize) -> Result<Vec<DensitySample>> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(
            "density grid needs at least two samples".into(),
        ));
    }
    let l = state.set.length();
    let half = 0.5 * l;
    (0..n_samples)
        .map(|i| {
            let x = if i + 1 == n_samples {
                half
            } else {
                -half + l * i as f64 / (n_samples - 1) as f64
            };
            let psi = state.evaluate(x)?;
            Ok(DensitySample {
                x,
                psi,
                density: psi.norm_sqr(),
            })
        })
        .collect()
}

/// Writes samples as CSV with header `x,psi_re,psi_im,density`.
pub fn write_density_csv<W: Write>(out: &mut W, samples: &[DensitySample]) -> io::Result<()> {
    writeln!(out, "x,psi_re,psi_im,density")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{}",
            format_float(s.x),
            format_float(s.psi.re),
            format_float(s.psi.im),
            format_float(s.density)
        )?;
    }
    Ok(())
}
