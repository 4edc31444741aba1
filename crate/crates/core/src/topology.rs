//! Periodic counterpart of the lattice and Chern numbers over the torus of
//! Bloch momentum `q` and rigid lattice shift `δ`.
//!
//! Bands are found in the energy domain so that `E <= 0` stays reachable:
//! the cell transfer matrix is entire in `E`, and a band energy at Bloch
//! momentum `q` is a root of `tr T(E)/2 - cos(qa)`. The Chern number uses
//! gauge-invariant link variables on a discretized `(q, δ)` torus.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bethe::mat_mul;
use crate::error::{Error, Result};
use crate::roots::{self, Candidate, ScanSettings};

/// Relative floor for degenerate band edges (touching roots).
const BAND_TANGENT_FLOOR: f64 = 1e-10;

/// Overlap magnitude below which adjacent Bloch states are treated as
/// belonging to different bands.
pub const MIN_LINK_OVERLAP: f64 = 0.1;

/// One period of a lattice: scatterers at positions in `[0, a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitCell {
    period: f64,
    positions: Vec<f64>,
    heights: Vec<f64>,
}

impl UnitCell {
    /// Scatterers are stored sorted by position; positions must be distinct
    /// and lie in `[0, a)`.
    pub fn new(period: f64, positions: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::NonPositiveLength(period));
        }
        if positions.len() != heights.len() {
            return Err(Error::LengthMismatch {
                positions: positions.len(),
                heights: heights.len(),
            });
        }
        let mut pairs: Vec<(f64, f64)> = positions.into_iter().zip(heights).collect();
        for (index, &(p, _)) in pairs.iter().enumerate() {
            if !(0.0..period).contains(&p) {
                return Err(Error::PositionOutOfBox {
                    index,
                    position: p,
                    half: period,
                });
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(i) = pairs.windows(2).position(|w| w[0].0 == w[1].0) {
            return Err(Error::NonMonotonePositions {
                index: i + 1,
                previous: pairs[i].0,
                current: pairs[i + 1].0,
            });
        }
        Ok(Self {
            period,
            positions: pairs.iter().map(|p| p.0).collect(),
            heights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    /// One scatterer of height `h` at the origin of a cell of length `a`.
    pub fn single(period: f64, height: f64) -> Result<Self> {
        Self::new(period, vec![0.0], vec![height])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// True if no scatterer has a nonzero height, i.e. the cell is free space.
    pub fn is_translation_invariant(&self) -> bool {
        self.heights.iter().all(|&h| h == 0.0)
    }

    /// Scatterers translated by `δ a` modulo `a`, sorted, with inert
    /// (zero-height) ones dropped.
    pub fn shifted(&self, delta: f64) -> Vec<(f64, f64)> {
        let a = self.period;
        let mut out: Vec<(f64, f64)> = self
            .positions
            .iter()
            .zip(&self.heights)
            .filter(|(_, &h)| h != 0.0)
            .map(|(&p, &h)| {
                let mut y = (p + delta * a).rem_euclid(a);
                if y >= a {
                    y = 0.0;
                }
                (y, h)
            })
            .collect();
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }
}

/// Free propagation over `d` at energy `E` acting on `(ψ, ψ')`.
fn free_matrix(energy: f64, d: f64) -> [[f64; 2]; 2] {
    if energy > 0.0 {
        let k = (2.0 * energy).sqrt();
        let (s, c) = (k * d).sin_cos();
        [[c, s / k], [-k * s, c]]
    } else if energy < 0.0 {
        let kappa = (-2.0 * energy).sqrt();
        let (s, c) = ((kappa * d).sinh(), (kappa * d).cosh());
        [[c, s / kappa], [kappa * s, c]]
    } else {
        [[1.0, d], [0.0, 1.0]]
    }
}

/// Transfer matrix over one period, from `0⁻` to `a⁻`.
fn cell_matrix(scatterers: &[(f64, f64)], period: f64, energy: f64) -> [[f64; 2]; 2] {
    let mut total = [[1.0, 0.0], [0.0, 1.0]];
    let mut x = 0.0;
    for &(y, h) in scatterers {
        total = mat_mul(free_matrix(energy, y - x), total);
        total = mat_mul([[1.0, 0.0], [2.0 * h, 1.0]], total);
        x = y;
    }
    mat_mul(free_matrix(energy, period - x), total)
}

fn signed_energy(s: f64) -> f64 {
    0.5 * s * s.abs()
}

/// Band energies at Bloch momentum `q` for the scatterer layout
/// `scatterers` (positions in `[0, a)`), lowest `n_bands` first.
fn band_energies_of(
    scatterers: &[(f64, f64)],
    period: f64,
    q: f64,
    n_bands: usize,
) -> Result<Vec<f64>> {
    let target = (q * period).cos();
    let dispersion = |s: f64| {
        let t = cell_matrix(scatterers, period, signed_energy(s));
        let half_trace = 0.5 * (t[0][0] + t[1][1]);
        (half_trace - target, 1.0 + half_trace.abs())
    };
    let attractive: f64 = scatterers.iter().map(|&(_, h)| (-h).max(0.0)).sum();
    let s_lo = -(attractive + (2.0 * attractive / period).sqrt()) - 0.1 * PI / period;
    let settings = ScanSettings {
        step: PI / (period * 8.0 * (scatterers.len() as f64 + 1.0)),
        tangent_floor: BAND_TANGENT_FLOOR,
    };
    let mut s_hi = (n_bands + scatterers.len() + 1) as f64 * PI / period;
    for _ in 0..6 {
        let mut energies = Vec::new();
        for candidate in roots::scan(&dispersion, s_lo, s_hi, settings)? {
            match candidate {
                Candidate::Bracket { lo, hi } => {
                    let s = roots::brent(|s| dispersion(s).0, lo, hi, 1e-13)?;
                    energies.push(signed_energy(s));
                }
                Candidate::Exact { x, .. } => energies.push(signed_energy(x)),
                // A touching root is a degenerate pair of band edges.
                Candidate::Tangent { x, .. } => {
                    energies.push(signed_energy(x));
                    energies.push(signed_energy(x));
                }
            }
        }
        if energies.len() >= n_bands {
            energies.truncate(n_bands);
            return Ok(energies);
        }
        s_hi *= 2.0;
    }
    Err(Error::BandNotFound { q, band: n_bands })
}

/// Energies of the lowest `n_bands` bands at Bloch momentum `q`.
pub fn bloch_energies(cell: &UnitCell, q: f64, n_bands: usize) -> Result<Vec<f64>> {
    band_energies_of(&cell.shifted(0.0), cell.period, q, n_bands)
}

/// Quasimomenta `k = √(2E)` of the lowest `n_bands` bands at `q`.
pub fn bloch_bands(cell: &UnitCell, q: f64, n_bands: usize) -> Result<Vec<f64>> {
    if n_bands == 0 {
        return Err(Error::InvalidParameter("need at least one band".into()));
    }
    bloch_energies(cell, q, n_bands)?
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            if e >= 0.0 {
                Ok((2.0 * e).sqrt())
            } else if e > -1e-18 {
                Ok(0.0)
            } else {
                Err(Error::NegativeEnergyBand { q, band: i + 1 })
            }
        })
        .collect()
}

/// Cell-periodic part `u(x) = e^{-iqx} ψ(x)` of one Bloch state, sampled at
/// `x_j = j a / N_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochState {
    pub q: f64,
    pub delta: f64,
    pub band: usize,
    pub energy: f64,
    pub period: f64,
    pub samples: Vec<Complex64>,
}

impl BlochState {
    /// `⟨self|other⟩` by the periodic trapezoid rule on the shared grid.
    pub fn overlap(&self, other: &BlochState) -> Complex64 {
        overlap_samples(&self.samples, &other.samples, self.period)
    }

    /// Quasimomentum `√(2E)` (zero for non-positive energies).
    pub fn k(&self) -> f64 {
        (2.0 * self.energy.max(0.0)).sqrt()
    }

    /// `ψ(x_j) = e^{iqx_j} u(x_j)`.
    pub fn psi(&self) -> Vec<Complex64> {
        let dx = self.period / self.samples.len() as f64;
        self.samples
            .iter()
            .enumerate()
            .map(|(j, u)| u * Complex64::from_polar(1.0, self.q * dx * j as f64))
            .collect()
    }
}

fn overlap_samples(a: &[Complex64], b: &[Complex64], period: f64) -> Complex64 {
    let sum: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    sum * (period / a.len() as f64)
}

/// Bloch state of `band` (1-based, energy-ordered) at `(q, δ)`.
///
/// Gauge: the first sample with magnitude at least `1e-8` is made real and
/// positive.
pub fn bloch_state(
    cell: &UnitCell,
    q: f64,
    delta: f64,
    band: usize,
    n_x: usize,
) -> Result<BlochState> {
    if band == 0 || n_x < 2 {
        return Err(Error::InvalidParameter(
            "band is 1-based and N_x must be at least 2".into(),
        ));
    }
    let a = cell.period;
    let scatterers = cell.shifted(delta);
    let energy = band_energies_of(&scatterers, a, q, band)?[band - 1];
    let t = cell_matrix(&scatterers, a, energy);
    let lambda = Complex64::from_polar(1.0, q * a);

    let from_top = [Complex64::new(t[0][1], 0.0), lambda - t[0][0]];
    let from_bottom = [lambda - t[1][1], Complex64::new(t[1][0], 0.0)];
    let size = |v: &[Complex64; 2]| v[0].norm_sqr() + v[1].norm_sqr();
    let mut state = if size(&from_top) >= size(&from_bottom) {
        from_top
    } else {
        from_bottom
    };
    if size(&state) == 0.0 {
        // T = λ I: every vector is a Bloch vector.
        state = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    }

    let dx = a / n_x as f64;
    let mut samples = Vec::with_capacity(n_x);
    let mut x = 0.0;
    let mut next = 0;
    let advance = |state: &mut [Complex64; 2], d: f64| {
        let m = free_matrix(energy, d);
        *state = [
            m[0][0] * state[0] + m[0][1] * state[1],
            m[1][0] * state[0] + m[1][1] * state[1],
        ];
    };
    for j in 0..n_x {
        let xj = dx * j as f64;
        while next < scatterers.len() && scatterers[next].0 <= xj {
            let (y, h) = scatterers[next];
            advance(&mut state, y - x);
            state[1] += 2.0 * h * state[0];
            x = y;
            next += 1;
        }
        advance(&mut state, xj - x);
        x = xj;
        samples.push(state[0] * Complex64::from_polar(1.0, -q * xj));
    }

    let norm = overlap_samples(&samples, &samples, a).re.sqrt();
    for u in &mut samples {
        *u /= norm;
    }
    let pin = samples
        .iter()
        .find(|u| u.norm() >= 1e-8)
        .ok_or(Error::GaugePinFailure)?;
    let phase = pin.conj() / pin.norm();
    for u in &mut samples {
        *u *= phase;
    }
    Ok(BlochState {
        q,
        delta,
        band,
        energy,
        period: a,
        samples,
    })
}

/// Bloch states of one band on an `N_q × N_δ` torus grid.
///
/// `q_i = -π/a + (i + 1/2) 2π/(a N_q)` (half-step offset keeps the grid off
/// the zone centre and boundary) and `δ_j = j / N_δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BerryGrid {
    pub band: usize,
    pub n_q: usize,
    pub n_delta: usize,
    pub period: f64,
    /// Row-major in `q`: index `i * n_delta + j`.
    pub states: Vec<BlochState>,
    translation_invariant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChernResult {
    pub band: usize,
    pub chern: i64,
    pub grid: [usize; 2],
    pub min_overlap: f64,
    /// Sum of plaquette angles over `2π`, before rounding.
    #[serde(skip)]
    pub raw: f64,
}

pub fn berry_grid(
    cell: &UnitCell,
    band: usize,
    n_q: usize,
    n_delta: usize,
    n_x: usize,
) -> Result<BerryGrid> {
    if n_q < 8 || n_delta < 8 {
        return Err(Error::InvalidParameter(format!(
            "torus grid {n_q}x{n_delta} is below 8x8"
        )));
    }
    let a = cell.period;
    let states = (0..n_q * n_delta)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n_delta, idx % n_delta);
            let q = -PI / a + (i as f64 + 0.5) * 2.0 * PI / (a * n_q as f64);
            let delta = j as f64 / n_delta as f64;
            bloch_state(cell, q, delta, band, n_x)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BerryGrid {
        band,
        n_q,
        n_delta,
        period: a,
        states,
        translation_invariant: cell.is_translation_invariant(),
    })
}

fn wrap_angle(x: f64) -> f64 {
    x - 2.0 * PI * (x / (2.0 * PI)).round()
}

impl BerryGrid {
    fn state(&self, i: usize, j: usize) -> &BlochState {
        &self.states[i * self.n_delta + j]
    }

    /// Link variables `(U_q, U_δ)` at every grid point, unnormalized.
    ///
    /// The link leaving the last `q` column connects to the first column
    /// shifted by a reciprocal lattice vector, `e^{-iGx} u(q_0)`.
    fn links(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let n_x = self.states[0].samples.len();
        let g = 2.0 * PI / self.period;
        let dx = self.period / n_x as f64;
        let umklapp: Vec<Complex64> = (0..n_x)
            .map(|m| Complex64::from_polar(1.0, -g * dx * m as f64))
            .collect();
        let mut link_q = Vec::with_capacity(self.states.len());
        let mut link_d = Vec::with_capacity(self.states.len());
        for i in 0..self.n_q {
            for j in 0..self.n_delta {
                let here = self.state(i, j);
                let uq = if i + 1 < self.n_q {
                    here.overlap(self.state(i + 1, j))
                } else {
                    let shifted: Vec<Complex64> = self
                        .state(0, j)
                        .samples
                        .iter()
                        .zip(&umklapp)
                        .map(|(u, p)| u * p)
                        .collect();
                    overlap_samples(&here.samples, &shifted, self.period)
                };
                link_q.push(uq);
                link_d.push(here.overlap(self.state(i, (j + 1) % self.n_delta)));
            }
        }
        (link_q, link_d)
    }

    /// Plaquette sum `Σ arg(U_q(p) U_δ(p+q̂) U_q(p+δ̂)⁻¹ U_δ(p)⁻¹) / 2π`.
    pub fn chern(&self) -> Result<ChernResult> {
        let (link_q, link_d) = self.links();
        let min_overlap = link_q
            .iter()
            .chain(&link_d)
            .map(|u| u.norm())
            .fold(f64::INFINITY, f64::min);
        // Free space has δ-independent states, so every plaquette closes
        // trivially even though its bands touch at the zone boundary.
        if min_overlap < MIN_LINK_OVERLAP && !self.translation_invariant {
            return Err(Error::GapClosure { min_overlap });
        }
        let nd = self.n_delta;
        let angle = |v: &[Complex64], i: usize, j: usize| v[(i % self.n_q) * nd + (j % nd)].arg();
        let mut total = 0.0;
        for i in 0..self.n_q {
            for j in 0..nd {
                let f = angle(&link_q, i, j) + angle(&link_d, i + 1, j)
                    - angle(&link_q, i, j + 1)
                    - angle(&link_d, i, j);
                total += wrap_angle(f);
            }
        }
        let raw = total / (2.0 * PI);
        Ok(ChernResult {
            band: self.band,
            chern: raw.round() as i64,
            grid: [self.n_q, self.n_delta],
            min_overlap,
            raw,
        })
    }
}

/// Chern number of `band` over the `(q, δ)` torus.
pub fn chern_number(
    cell: &UnitCell,
    band: usize,
    n_q: usize,
    n_delta: usize,
    n_x: usize,
) -> Result<ChernResult> {
    berry_grid(cell, band, n_q, n_delta, n_x)?.chern()
}

/// Energy interval between two consecutive bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandGap {
    /// The band below the gap (1-based).
    pub below: usize,
    /// Maximum over `q` of band `below`.
    pub lower: f64,
    /// Minimum over `q` of band `below + 1`.
    pub upper: f64,
}

impl BandGap {
    pub fn is_open(&self) -> bool {
        self.upper > self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, energy: f64) -> bool {
        self.lower < energy && energy < self.upper
    }
}

/// Gaps between consecutive bands among the lowest `n_bands`, at `δ = 0`.
pub fn bulk_gaps(cell: &UnitCell, n_bands: usize) -> Result<Vec<BandGap>> {
    if n_bands < 2 {
        return Err(Error::InvalidParameter(
            "need at least two bands for a gap".into(),
        ));
    }
    let a = cell.period;
    let n_q = 16;
    let qs: Vec<f64> = (0..=n_q).map(|i| PI / a * i as f64 / n_q as f64).collect();
    let bands = qs
        .par_iter()
        .map(|&q| bloch_energies(cell, q, n_bands))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..n_bands - 1)
        .map(|j| BandGap {
            below: j + 1,
            lower: bands.iter().map(|b| b[j]).fold(f64::NEG_INFINITY, f64::max),
            upper: bands.iter().map(|b| b[j + 1]).fold(f64::INFINITY, f64::min),
        })
        .collect())
}


#[cfg(test)]
mod chern_tests {
    use super::*;

    #[test]
    fn weak_lattice_bands_carry_unit_chern() {
        let cell = UnitCell::single(1.0, 0.4).unwrap();
        for band in 1..=2 {
            let r = chern_number(&cell, band, 32, 32, 256).unwrap();
            assert_eq!(r.chern, 1, "{r:?}");
            assert!((r.raw - 1.0).abs() < 1e-6);
            assert!(r.min_overlap >= MIN_LINK_OVERLAP);
        }
    }

    #[test]
    fn free_space_is_trivial() {
        let cell = UnitCell::single(1.0, 0.0).unwrap();
        let r = chern_number(&cell, 1, 16, 16, 128).unwrap();
        assert_eq!(r.chern, 0);
        assert_eq!(r.raw, 0.0);
    }

    #[test]
    fn attractive_lattice() {
        let cell = UnitCell::single(1.0, -0.5).unwrap();
        assert_eq!(chern_number(&cell, 1, 16, 16, 128).unwrap().chern, 1);
    }

    #[test]
    fn independent_of_gauge() {
        let cell = UnitCell::new(2.0, vec![0.0, 1.0], vec![0.4, 1.4]).unwrap();
        let mut grid = berry_grid(&cell, 1, 16, 16, 128).unwrap();
        let before = grid.chern().unwrap();
        for (n, state) in grid.states.iter_mut().enumerate() {
            let phase = Complex64::from_polar(1.0, 0.7 * n as f64 * n as f64);
            for u in &mut state.samples {
                *u *= phase;
            }
        }
        let after = grid.chern().unwrap();
        assert_eq!(before.chern, 1);
        assert_eq!(before.chern, after.chern);
        assert!((before.raw - after.raw).abs() < 1e-9);
    }

    #[test]
    fn json_shape() {
        let cell = UnitCell::single(1.0, 0.4).unwrap();
        let r = chern_number(&cell, 1, 8, 8, 64).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
        assert_eq!(v["chern"], 1);
        assert_eq!(v["grid"], serde_json::json!([8, 8]));
    }
}
