//! Problem instances: a hard-wall box of length `L` holding `M` delta
//! scatterers at ordered positions with arbitrary real heights.
//!
//! Units are natural (`m = ħ = 1`), so the potential `Σ h_n δ(x - y_n)`
//! produces a derivative jump of `2 h_n ψ(y_n)` at each scatterer and the
//! energy of a plane wave is `k²/2`.

use std::f64::consts::PI;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Box length plus the ordered positions and heights of all scatterers.
///
/// Immutable once constructed; every constructor validates the ordering and
/// box invariants instead of silently repairing them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScattererSet {
    length: f64,
    positions: Vec<f64>,
    heights: Vec<f64>,
}

/// One free region `D_n = (y_{n-1}, y_n)` between scatterers or walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    /// 1-based region index, `1..=M+1`.
    pub index: usize,
    pub left: f64,
    pub right: f64,
}

impl Region {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn contains(&self, x: f64) -> bool {
        self.left <= x && x <= self.right
    }
}

impl ScattererSet {
    /// Validates and builds an instance. Positions must be strictly
    /// increasing and lie in the closed interval `[-L/2, L/2]`.
    pub fn new(length: f64, positions: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::NonPositiveLength(length));
        }
        if positions.len() != heights.len() {
            return Err(Error::LengthMismatch {
                positions: positions.len(),
                heights: heights.len(),
            });
        }
        let half = 0.5 * length;
        for (index, &y) in positions.iter().enumerate() {
            if !y.is_finite() || y < -half || y > half {
                return Err(Error::PositionOutOfBox {
                    index,
                    position: y,
                    half,
                });
            }
        }
        for (index, pair) in positions.windows(2).enumerate() {
            if pair[0] >= pair[1] {
                return Err(Error::NonMonotonePositions {
                    index: index + 1,
                    previous: pair[0],
                    current: pair[1],
                });
            }
        }
        if let Some(h) = heights.iter().find(|h| !h.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite height {h}")));
        }
        Ok(Self {
            length,
            positions,
            heights,
        })
    }

    /// The instance reflected through the box center, `y -> -y`.
    pub fn mirrored(&self) -> Self {
        Self {
            length: self.length,
            positions: self.positions.iter().rev().map(|y| -y).collect(),
            heights: self.heights.iter().rev().copied().collect(),
        }
    }

    /// A particle in a box with no scatterers.
    pub fn empty(length: f64) -> Result<Self> {
        Self::new(length, Vec::new(), Vec::new())
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Number of scatterers `M`.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Boundary `y_n` for `n = 0..=M+1`, with the walls at both ends.
    pub fn boundary(&self, n: usize) -> f64 {
        let m = self.len();
        match n {
            0 => -0.5 * self.length,
            n if n == m + 1 => 0.5 * self.length,
            n => self.positions[n - 1],
        }
    }

    /// The `M + 1` regions tiling the box, left to right.
    pub fn regions(&self) -> impl Iterator<Item = Region> + '_ {
        (1..=self.len() + 1).map(move |index| Region {
            index,
            left: self.boundary(index - 1),
            right: self.boundary(index),
        })
    }

    /// 1-based index of the region containing `x`. Points sitting exactly on
    /// a scatterer belong to the region on its left.
    pub fn region_of(&self, x: f64) -> usize {
        self.positions.partition_point(|&y| y < x) + 1
    }

    /// Returns a copy with the heights replaced (positions unchanged).
    pub fn with_heights(&self, heights: Vec<f64>) -> Result<Self> {
        Self::new(self.length, self.positions.clone(), heights)
    }
}

/// Free-function alias of [`ScattererSet::new`].
pub fn make_scatterer_set(
    length: f64,
    positions: Vec<f64>,
    heights: Vec<f64>,
) -> Result<ScattererSet> {
    ScattererSet::new(length, positions, heights)
}

/// Positions `y_n = -L/2 + (n + (Δ-1)/2) L/M` of an equidistant lattice
/// shifted by `delta ∈ [-1, 1]` relative to the walls.
pub fn uniform_positions(length: f64, count: usize, delta: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "lattice needs at least one scatterer".into(),
        ));
    }
    if !(-1.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!(
            "shift {delta} outside [-1, 1]"
        )));
    }
    let half = 0.5 * length;
    let spacing = length / count as f64;
    // Clamping only absorbs the last-ulp rounding at Δ = ±1.
    Ok((1..=count)
        .map(|n| (-half + (n as f64 + 0.5 * (delta - 1.0)) * spacing).clamp(-half, half))
        .collect())
}

/// Equidistant lattice with one common height.
pub fn uniform_lattice(length: f64, count: usize, height: f64, delta: f64) -> Result<ScattererSet> {
    let positions = uniform_positions(length, count, delta)?;
    ScattererSet::new(length, positions, vec![height; count])
}

/// Heights `h_n = h_min + (h_max - h_min) cos²(2πφ(an + 1/2))`, `a = 1/(M+1)`.
pub fn modulated_heights(count: usize, h_min: f64, h_max: f64, phi: f64) -> Vec<f64> {
    let a = 1.0 / (count as f64 + 1.0);
    (1..=count)
        .map(|n| {
            let c = (2.0 * PI * phi * (a * n as f64 + 0.5)).cos();
            h_min + (h_max - h_min) * c * c
        })
        .collect()
}

/// Flux-modulated lattice: positions `-L/2 + anL` with `a = 1/(M+1)` and
/// cosine-squared heights. The modulation has period `(M+1)/2` in `φ`.
pub fn modulated_lattice(
    length: f64,
    count: usize,
    h_min: f64,
    h_max: f64,
    phi: f64,
) -> Result<ScattererSet> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "lattice needs at least one scatterer".into(),
        ));
    }
    let a = 1.0 / (count as f64 + 1.0);
    let positions = (1..=count)
        .map(|n| -0.5 * length + a * n as f64 * length)
        .collect();
    ScattererSet::new(
        length,
        positions,
        modulated_heights(count, h_min, h_max, phi),
    )
}

/// Period of the flux modulation, `φ₀ = (M+1)/2`.
pub fn flux_period(count: usize) -> f64 {
    0.5 * (count as f64 + 1.0)
}

/// Draws `count` heights uniformly from `[h_min, h_max]`.
///
/// The stream is SplitMix64 seeded with `seed` as its raw state. Each value
/// uses the top 53 bits of one output, `u = (x >> 11) · 2⁻⁵³ ∈ [0, 1)`, and
/// maps to `h_min + (h_max - h_min) u`, so results are reproducible in any
/// language with 64-bit unsigned arithmetic.
pub fn random_heights(count: usize, h_min: f64, h_max: f64, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let scale = 1.0 / (1u64 << 53) as f64;
    (0..count)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * scale;
            h_min + (h_max - h_min) * u
        })
        .collect()
}

/// Repeats `pattern` along the lattice: `h_n = pattern[(n-1) mod len]`.
pub fn alternating_heights(count: usize, pattern: &[f64]) -> Vec<f64> {
    if pattern.is_empty() {
        return vec![0.0; count];
    }
    (0..count).map(|i| pattern[i % pattern.len()]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererSpec {
    pub y: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSpec {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub count: usize,
    pub h: f64,
    #[serde(default)]
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulatedSpec {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub count: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub phi: f64,
}

/// Random heights on an equidistant lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "M")]
    pub count: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub seed: u64,
    #[serde(default)]
    pub delta: f64,
}

/// JSON instance description: either explicit scatterers or one of the
/// lattice generators.
///
/// ```json
/// {"L": 2.0, "scatterers": [{"y": 0.0, "h": 1.0}]}
/// {"uniform": {"L": 11, "M": 11, "h": 0.4, "delta": 0.5}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum InstanceSpec {
    Explicit {
        #[serde(rename = "L")]
        length: f64,
        #[serde(default)]
        scatterers: Vec<ScattererSpec>,
    },
    Uniform {
        uniform: UniformSpec,
    },
    Modulated {
        modulated: ModulatedSpec,
    },
    Random {
        random: RandomSpec,
    },
}

impl InstanceSpec {
    pub fn build(&self) -> Result<ScattererSet> {
        match self {
            InstanceSpec::Explicit { length, scatterers } => ScattererSet::new(
                *length,
                scatterers.iter().map(|s| s.y).collect(),
                scatterers.iter().map(|s| s.h).collect(),
            ),
            InstanceSpec::Uniform { uniform: u } => {
                uniform_lattice(u.length, u.count, u.h, u.delta)
            }
            InstanceSpec::Modulated { modulated: m } => {
                modulated_lattice(m.length, m.count, m.h_min, m.h_max, m.phi)
            }
            InstanceSpec::Random { random: r } => {
                let positions = uniform_positions(r.length, r.count, r.delta)?;
                ScattererSet::new(
                    r.length,
                    positions,
                    random_heights(r.count, r.h_min, r.h_max, r.seed),
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_box_is_valid() {
        let set = ScattererSet::empty(1.0).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.regions().count(), 1);
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(matches!(
            ScattererSet::new(1.0, vec![0.3, 0.1], vec![1.0, 1.0]),
            Err(Error::NonMonotonePositions { index: 1, .. })
        ));
        assert!(matches!(
            ScattererSet::new(1.0, vec![0.6], vec![1.0]),
            Err(Error::PositionOutOfBox { .. })
        ));
        assert!(matches!(
            ScattererSet::empty(0.0),
            Err(Error::NonPositiveLength(_))
        ));
        assert!(matches!(
            ScattererSet::new(1.0, vec![0.0], vec![]),
            Err(Error::LengthMismatch { .. })
        ));
        // Coincident positions are not strictly increasing.
        assert!(ScattererSet::new(1.0, vec![0.1, 0.1], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn walls_are_admissible_positions() {
        assert!(ScattererSet::new(2.0, vec![-1.0, 1.0], vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn fig3_lattice_positions() {
        let set = uniform_lattice(11.0, 11, 0.4, 0.0).unwrap();
        assert_eq!(set.len(), 11);
        assert_abs_diff_eq!(set.positions()[0], -5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(set.positions()[10], 5.0, epsilon = 1e-14);
        let right = uniform_lattice(11.0, 11, 0.4, 1.0).unwrap();
        assert_eq!(right.positions()[10], 5.5);
        let left = uniform_lattice(11.0, 11, 0.4, -1.0).unwrap();
        assert_eq!(left.positions()[0], -5.5);
    }

    #[test]
    fn regions_tile_the_box() {
        let set = uniform_lattice(3.0, 4, 1.0, 0.3).unwrap();
        let regions: Vec<_> = set.regions().collect();
        assert_eq!(regions.len(), 5);
        assert_eq!(regions[0].left, -1.5);
        assert_eq!(regions[4].right, 1.5);
        for w in regions.windows(2) {
            assert_eq!(w[0].right, w[1].left);
        }
        let total: f64 = regions.iter().map(Region::width).sum();
        assert_abs_diff_eq!(total, 3.0, epsilon = 1e-14);
        assert_eq!(set.region_of(-1.5), 1);
        assert_eq!(set.region_of(1.5), 5);
    }

    #[test]
    fn zero_flux_gives_maximal_heights() {
        for h in modulated_heights(9, 0.1, 1.5, 0.0) {
            assert_eq!(h, 1.5);
        }
    }

    #[test]
    fn flux_period_for_odd_count() {
        let m = 17;
        let period = flux_period(m);
        for &phi in &[0.0, 0.37, 1.2, 4.9] {
            let a = modulated_heights(m, 0.1, 1.5, phi);
            let b = modulated_heights(m, 0.1, 1.5, phi + period);
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn random_heights_are_reproducible() {
        let a = random_heights(11, 0.1, 1.4, 42);
        let b = random_heights(11, 0.1, 1.4, 42);
        assert_eq!(a, b);
        assert!(a.iter().all(|h| (0.1..=1.4).contains(h)));
        assert_ne!(a, random_heights(11, 0.1, 1.4, 43));
        assert!(random_heights(11, 0.7, 0.7, 5).iter().all(|&h| h == 0.7));
    }

    #[test]
    fn splitmix_stream_is_the_reference_one() {
        // First output of SplitMix64 from state 0 (reference value of the
        // published algorithm).
        let mut rng = SplitMix64::seed_from_u64(0);
        assert_eq!(rng.next_u64(), 0xe220a8397b1dcdaf);
    }

    #[test]
    fn alternating_pattern() {
        assert_eq!(
            alternating_heights(5, &[0.4, 1.4]),
            vec![0.4, 1.4, 0.4, 1.4, 0.4]
        );
    }

    #[test]
    fn instance_json_schema() {
        let explicit: InstanceSpec =
            serde_json::from_str(r#"{"L": 2.0, "scatterers": [{"y": 0.0, "h": 1.0}]}"#).unwrap();
        let set = explicit.build().unwrap();
        assert_eq!(set.len(), 1);
        let uniform: InstanceSpec =
            serde_json::from_str(r#"{"uniform": {"L": 11, "M": 11, "h": 0.4, "delta": 0.5}}"#)
                .unwrap();
        assert_eq!(uniform.build().unwrap().len(), 11);
        let modulated: InstanceSpec = serde_json::from_str(
            r#"{"modulated": {"L": 18, "M": 17, "h_min": 0.1, "h_max": 1.5, "phi": 0.3}}"#,
        )
        .unwrap();
        assert_eq!(modulated.build().unwrap().len(), 17);
        let random: InstanceSpec = serde_json::from_str(
            r#"{"random": {"L": 11, "M": 11, "h_min": 0.1, "h_max": 1.4, "seed": 3}}"#,
        )
        .unwrap();
        assert_eq!(random.build().unwrap().len(), 11);
        assert!(serde_json::from_str::<InstanceSpec>(r#"{"bogus": 1}"#).is_err());
    }
}
