//! Finite-difference reference solver for validating the exact spectra.
//!
//! The box `[-L/2, L/2]` is discretized with `N` interior points and
//! `Δx = L/(N+1)`. The three-point Laplacian gives a symmetric tridiagonal
//! matrix; each delta becomes an on-site potential `h/Δx` at its nearest grid
//! point. Eigenvalues come from Sturm-sequence bisection, eigenvectors from
//! inverse iteration. Convergence in `Δx` is first order.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolve::{count_states_below, find_roots, SolverOptions};
use crate::error::{Error, Result};
use crate::model::ScattererSet;
use crate::topology::UnitCell;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSpectrum {
    pub n: usize,
    pub dx: f64,
    /// Largest distance between a scatterer and its grid point.
    pub snap_error: f64,
    /// Lowest eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Grid values at `x_i = -L/2 + i Δx`, `i = 1..=N`, with `Σ ψ² Δx = 1`.
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

/// Symmetric tridiagonal matrix with constant off-diagonal.
struct Tridiagonal {
    diagonal: Vec<f64>,
    off: f64,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let e2 = self.off * self.off;
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut pivot = 1.0;
        for (i, &d) in self.diagonal.iter().enumerate() {
            pivot = if i == 0 { d - x } else { d - x - e2 / pivot };
            if pivot == 0.0 {
                pivot = -tiny;
            }
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self
            .diagonal
            .iter()
            .fold(f64::INFINITY, |a, &d| a.min(d - r));
        let hi = self
            .diagonal
            .iter()
            .fold(f64::NEG_INFINITY, |a, &d| a.max(d + r));
        (lo, hi)
    }

    /// Solves `(T - λ) y = b` by elimination without pivoting.
    fn shifted_solve(&self, lambda: f64, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let e = self.off;
        let tiny = f64::EPSILON * e.abs();
        let mut pivots = vec![0.0; n];
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut p = self.diagonal[i] - lambda;
            let mut rhs = b[i];
            if i > 0 {
                p -= e * e / pivots[i - 1];
                rhs -= e * y[i - 1] / pivots[i - 1];
            }
            if p.abs() < tiny {
                p = tiny;
            }
            pivots[i] = p;
            y[i] = rhs;
        }
        for i in (0..n).rev() {
            let upper = if i + 1 < n { e * y[i + 1] } else { 0.0 };
            y[i] = (y[i] - upper) / pivots[i];
        }
        y
    }
}

/// `index`-th eigenvalue (0-based) of a matrix described by `count`,
/// bisected to a relative width of `1e-14`.
fn bisect<C: Fn(f64) -> usize>(count: C, index: usize, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-14 * lo.abs().max(hi.abs()) {
            break;
        }
        if count(mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn box_matrix(set: &ScattererSet, n: usize) -> Result<(Tridiagonal, f64, f64)> {
    let l = set.length();
    let dx = l / (n as f64 + 1.0);
    let mut diagonal = vec![1.0 / (dx * dx); n];
    let mut owner: Vec<Option<usize>> = vec![None; n + 2];
    let mut snap_error: f64 = 0.0;
    for (j, (&y, &h)) in set.positions().iter().zip(set.heights()).enumerate() {
        let index = ((y + 0.5 * l) / dx).round() as usize;
        snap_error = snap_error.max((y + 0.5 * l - index as f64 * dx).abs());
        if let Some(first) = owner[index] {
            return Err(Error::GridTooCoarse {
                first: first + 1,
                second: j + 1,
                index,
            });
        }
        owner[index] = Some(j);
        // A scatterer snapped onto a wall acts on a node and drops out.
        if (1..=n).contains(&index) {
            diagonal[index - 1] += h / dx;
        }
    }
    Ok((
        Tridiagonal {
            diagonal,
            off: -0.5 / (dx * dx),
        },
        dx,
        snap_error,
    ))
}

/// Lowest `m` eigenvalues of the discretized box.
pub fn fd_spectrum(set: &ScattererSet, n: usize, m: usize) -> Result<FdSpectrum> {
    spectrum(set, n, m, false)
}

/// As [`fd_spectrum`], with eigenvectors.
pub fn fd_spectrum_with_vectors(set: &ScattererSet, n: usize, m: usize) -> Result<FdSpectrum> {
    spectrum(set, n, m, true)
}

fn spectrum(set: &ScattererSet, n: usize, m: usize, vectors: bool) -> Result<FdSpectrum> {
    if n < 3 || m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "need 0 < m <= N and N >= 3, got m={m}, N={n}"
        )));
    }
    let (matrix, dx, snap_error) = box_matrix(set, n)?;
    let (lo, hi) = matrix.bounds();
    let eigenvalues: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|j| bisect(|x| matrix.count_below(x), j, lo, hi))
        .collect();
    let eigenvectors = vectors.then(|| {
        eigenvalues
            .par_iter()
            .map(|&lambda| inverse_iteration(&matrix, lambda, dx))
            .collect()
    });
    Ok(FdSpectrum {
        n,
        dx,
        snap_error,
        eigenvalues,
        eigenvectors,
    })
}

fn inverse_iteration(matrix: &Tridiagonal, lambda: f64, dx: f64) -> Vec<f64> {
    let n = matrix.diagonal.len();
    let shift = lambda + 1e-10 * lambda.abs().max(1.0);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64)
        .collect();
    for _ in 0..4 {
        v = matrix.shifted_solve(shift, &v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    let scale = 1.0 / dx.sqrt();
    let peak = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let sign = v
        .iter()
        .find(|x| x.abs() > 1e-3 * peak)
        .map_or(1.0, |x| x.signum());
    v.iter().map(|x| x * sign * scale).collect()
}

/// Agreement between the oracle and the exact positive-energy spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// `max_j |E_fd - E_exact| / E_exact` over the compared states.
    pub max_relative_error: f64,
    pub exact: Vec<f64>,
    pub oracle: Vec<f64>,
    /// States with `E <= 0` (bound by attractive scatterers, or `k = 0`),
    /// skipped in both spectra.
    pub bound_states: usize,
    pub n: usize,
}

/// Compares the lowest `m` positive-energy states against the oracle at
/// grid size `n`.
///
/// Non-positive energies are outside the quasimomentum solver's range; their
/// number is taken from oscillation counting at half the lowest positive
/// energy (well away from any eigenvalue, unlike `E → 0⁺`, where a `k = 0`
/// state makes the count ill-conditioned) and the same number of oracle
/// eigenvalues is skipped. The oracle must then find exactly `bound + m`
/// states below the midpoint between the `m`-th and `(m+1)`-th exact
/// energies.
pub fn compare(set: &ScattererSet, m: usize, n: usize) -> Result<Comparison> {
    if m == 0 {
        return Err(Error::InvalidParameter("nothing to compare".into()));
    }
    let mut k_max = (m + set.len() + 2) as f64 * std::f64::consts::PI / set.length();
    let exact = loop {
        let roots = find_roots(set, k_max, &SolverOptions::default())?;
        if roots.len() > m {
            break roots.iter().map(|r| r.energy).collect::<Vec<_>>();
        }
        k_max *= 2.0;
    };
    let bound = count_states_below(set, 0.5 * exact[0]);
    let threshold = 0.5 * (exact[m - 1] + exact[m]);
    let (matrix, _, _) = box_matrix(set, n)?;
    let found = matrix.count_below(threshold);
    if found != bound + m {
        return Err(Error::CountMismatch {
            expected: bound + m,
            found,
        });
    }
    let fd = fd_spectrum(set, n, bound + m)?;
    let oracle = fd.eigenvalues[bound..].to_vec();
    let exact = exact[..m].to_vec();
    let max_relative_error = exact
        .iter()
        .zip(&oracle)
        .map(|(e, f)| (f - e).abs() / e)
        .fold(0.0, f64::max);
    Ok(Comparison {
        max_relative_error,
        exact,
        oracle,
        bound_states: bound,
        n,
    })
}

/// Lowest `m` eigenvalues of one lattice cell on an `n`-point ring with
/// Bloch twist `e^{iqa}` across the seam.
pub fn fd_ring_spectrum(cell: &UnitCell, q: f64, n: usize, m: usize) -> Result<Vec<f64>> {
    if n < 3 || m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "need 0 < m <= N and N >= 3, got m={m}, N={n}"
        )));
    }
    let a = cell.period();
    let dx = a / n as f64;
    let mut diagonal = vec![1.0 / (dx * dx); n];
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (j, (&y, &h)) in cell.positions().iter().zip(cell.heights()).enumerate() {
        let index = (y / dx).round() as usize % n;
        if let Some(first) = owner[index] {
            return Err(Error::GridTooCoarse {
                first: first + 1,
                second: j + 1,
                index,
            });
        }
        owner[index] = Some(j);
        diagonal[index] += h / dx;
    }
    let t = -0.5 / (dx * dx);
    let corner = Complex64::from_polar(t, -q * a);

    // Inertia of the Hermitian cyclic tridiagonal matrix by LDL*: eliminating
    // the chain fills only the last column.
    let count_below = |x: f64| {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let guard = |p: f64| if p == 0.0 { -tiny } else { p };
        let mut count = 0;
        let mut pivot = guard(diagonal[0] - x);
        let mut fill = corner;
        if n == 3 {
            fill += t;
        }
        let mut last = diagonal[n - 1] - x;
        for i in 0..n - 1 {
            if pivot < 0.0 {
                count += 1;
            }
            last -= fill.norm_sqr() / pivot;
            if i + 1 < n - 1 {
                let original = if i + 1 == n - 2 {
                    Complex64::new(t, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let next_fill = original - t * fill / pivot;
                pivot = guard(diagonal[i + 1] - x - t * t / pivot);
                fill = next_fill;
            }
        }
        if guard(last) < 0.0 {
            count += 1;
        }
        count
    };
    let r = 2.0 * t.abs();
    let lo = diagonal
        .iter()
        .fold(f64::INFINITY, |acc, &d| acc.min(d - r));
    let hi = diagonal
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &d| acc.max(d + r));
    Ok((0..m).map(|j| bisect(count_below, j, lo, hi)).collect())
}
