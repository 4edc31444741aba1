//! Bracketing scans and refinement for real transcendental equations.
//!
//! A scan samples `f` on a uniform grid and reports sign changes as
//! brackets. Pairs of roots closer than one grid step leave no sign change
//! on the grid, so every same-signed local minimum of `|f|` is searched for
//! a sign flip; an extremum that only touches zero is reported as a
//! tangential root.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A root located by [`scan`], before or after refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Candidate {
    /// `f` changes sign on `[lo, hi]`.
    Bracket { lo: f64, hi: f64 },
    /// `|f|` dips below the floor at `x` without changing sign.
    Tangent { x: f64, lo: f64, hi: f64 },
    /// `f` is exactly zero at a grid point.
    Exact { x: f64, lo: f64, hi: f64 },
}

/// Evaluation returning `(value, scale)`; `scale` is a positive magnitude
/// against which "zero" is judged.
pub trait ScaledFn: Fn(f64) -> (f64, f64) + Sync {}
impl<F: Fn(f64) -> (f64, f64) + Sync> ScaledFn for F {}

#[derive(Debug, Clone, Copy)]
pub struct ScanSettings {
    pub step: f64,
    /// Relative floor below which a same-signed extremum counts as a root.
    pub tangent_floor: f64,
}

/// Scans the open interval `(lo, hi)`.
pub fn scan<F: ScaledFn>(
    f: &F,
    lo: f64,
    hi: f64,
    settings: ScanSettings,
) -> Result<Vec<Candidate>> {
    if !(hi > lo) || !(settings.step > 0.0) {
        return Ok(Vec::new());
    }
    let n = ((hi - lo) / settings.step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + i as f64 * settings.step
            }
        })
        .collect();
    let values: Vec<(f64, f64)> = grid.par_iter().map(|&x| f(x)).collect();
    if let Some(i) = values.iter().position(|(v, _)| !v.is_finite()) {
        return Err(Error::BracketExhaustion {
            lo: grid[i.saturating_sub(1)],
            hi: grid[(i + 1).min(n)],
        });
    }

    let mut out = Vec::new();
    for i in 0..n {
        let (fa, _) = values[i];
        let (fb, _) = values[i + 1];
        if fa == 0.0 && i > 0 {
            out.push(Candidate::Exact {
                x: grid[i],
                lo: grid[i - 1],
                hi: grid[i + 1],
            });
        } else if fa * fb < 0.0 {
            out.push(Candidate::Bracket {
                lo: grid[i],
                hi: grid[i + 1],
            });
        }
    }

    // Near misses: same sign at three consecutive points with |f| smallest
    // in the middle.
    let near_misses: Vec<usize> = (1..n)
        .filter(|&i| {
            let (a, b, c) = (values[i - 1].0, values[i].0, values[i + 1].0);
            a * b > 0.0 && b * c > 0.0 && b.abs() <= a.abs() && b.abs() < c.abs()
        })
        .collect();
    let extra: Vec<Result<Vec<Candidate>>> = near_misses
        .par_iter()
        .map(|&i| {
            resolve_near_miss(
                f,
                grid[i - 1],
                grid[i + 1],
                values[i].0.signum(),
                settings.tangent_floor,
            )
        })
        .collect();
    for found in extra {
        out.extend(found?);
    }
    out.sort_by(|a, b| a.location().total_cmp(&b.location()));
    Ok(out)
}

impl Candidate {
    fn location(&self) -> f64 {
        match *self {
            Candidate::Bracket { lo, hi } => 0.5 * (lo + hi),
            Candidate::Tangent { x, .. } | Candidate::Exact { x, .. } => x,
        }
    }
}

/// Golden-section search for the extremum of `f` pointing towards zero.
fn resolve_near_miss<F: ScaledFn>(
    f: &F,
    a: f64,
    b: f64,
    sign: f64,
    floor: f64,
) -> Result<Vec<Candidate>> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let g = |x: f64| {
        let (v, s) = f(x);
        (sign * v, s)
    };
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut g1, mut s1) = g(x1);
    let (mut g2, mut s2) = g(x2);
    for _ in 0..200 {
        if g1 < 0.0 {
            return Ok(vec![
                Candidate::Bracket { lo: a, hi: x1 },
                Candidate::Bracket { lo: x1, hi: b },
            ]);
        }
        if g2 < 0.0 {
            return Ok(vec![
                Candidate::Bracket { lo: a, hi: x2 },
                Candidate::Bracket { lo: x2, hi: b },
            ]);
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        if g1 < g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            s2 = s1;
            x1 = hi - INV_PHI * (hi - lo);
            (g1, s1) = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            s1 = s2;
            x2 = lo + INV_PHI * (hi - lo);
            (g2, s2) = g(x2);
        }
    }
    let (x, gm, sm) = if g1 < g2 { (x1, g1, s1) } else { (x2, g2, s2) };
    if gm <= floor * sm {
        Ok(vec![Candidate::Tangent { x, lo: a, hi: b }])
    } else {
        Ok(Vec::new())
    }
}

/// Brent's method (bisection, secant and inverse quadratic interpolation)
/// on a bracket with `f(a) f(b) <= 0`. Converges to `|Δx| <= tol_rel |x|`.
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol_rel: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::BracketExhaustion { lo: a, hi: b });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol_rel * b.abs();
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::BracketExhaustion {
        lo: b.min(c),
        hi: b.max(c),
    })
}
