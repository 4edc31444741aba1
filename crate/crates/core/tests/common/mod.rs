//! Randomized instances and invariant checks shared by the integration
//! suites.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use kp_core::bethe::{bethe_mismatch, bethe_polynomial_form};
use kp_core::topology::{berry_grid, UnitCell};
use kp_core::wavefunction::explicit_coefficients;
use kp_core::{
    build_state, count_states_below, find_roots, EigenState, ScattererSet, SolverOptions,
};

pub struct Rng(Xoshiro256PlusPlus);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }
}

/// Box of length 1..12 with 1..=`max_m` scatterers at least 2% of `L` apart
/// and from the walls; heights in `[h_lo, h_hi]`.
pub fn random_instance(seed: u64, max_m: usize, h_lo: f64, h_hi: f64) -> ScattererSet {
    let mut rng = Rng::new(seed);
    let l = rng.uniform(1.0, 12.0);
    let m = 1 + rng.below(max_m);
    let gap = 0.02 * l;
    // Spread the free length randomly over m+1 gaps.
    let free = l - gap * (m as f64 + 1.0);
    let mut cuts: Vec<f64> = (0..m).map(|_| rng.uniform(0.0, free)).collect();
    cuts.sort_by(f64::total_cmp);
    let positions = cuts
        .iter()
        .enumerate()
        .map(|(i, c)| -0.5 * l + c + gap * (i as f64 + 1.0))
        .collect();
    let heights = (0..m).map(|_| rng.uniform(h_lo, h_hi)).collect();
    ScattererSet::new(l, positions, heights).unwrap()
}

/// Cutoff giving roughly a dozen states.
pub fn cutoff(set: &ScattererSet) -> f64 {
    12.5 * PI / set.length()
}

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn states(set: &ScattererSet) -> Result<Vec<EigenState>, String> {
    let roots =
        find_roots(set, cutoff(set), &SolverOptions::default()).map_err(|e| e.to_string())?;
    roots
        .iter()
        .map(|r| build_state(set, r).map_err(|e| e.to_string()))
        .collect()
}

fn peak(state: &EigenState) -> f64 {
    state
        .plus
        .iter()
        .zip(&state.minus)
        .map(|(p, m)| p.norm() + m.norm())
        .fold(0.0, f64::max)
}

/// Wall values, continuity and the jump condition at every scatterer.
pub fn check_matching(set: &ScattererSet, states: &[EigenState]) -> Check {
    let half = 0.5 * set.length();
    let m = set.len();
    for s in states {
        let top = peak(s);
        let k = s.k();
        let left = s.value_in_region(1, -half).norm();
        let right = s.value_in_region(m + 1, half).norm();
        ensure(left < 1e-9 * top && right < 1e-7 * top, || {
            format!("k={k}: wall values {left:e}, {right:e}")
        })?;
        for (i, (&y, &h)) in set.positions().iter().zip(set.heights()).enumerate() {
            let (l, r) = (s.value_in_region(i + 1, y), s.value_in_region(i + 2, y));
            ensure((l - r).norm() < 1e-9 * top, || {
                format!("k={k}: discontinuity {:e} at y={y}", (l - r).norm())
            })?;
            let jump =
                s.derivative_in_region(i + 2, y) - s.derivative_in_region(i + 1, y) - 2.0 * h * l;
            ensure(jump.norm() < 1e-8 * k * top, || {
                format!("k={k}: jump residual {:e} at y={y}", jump.norm())
            })?;
        }
    }
    Ok(())
}

/// Exact norm, and a trapezoid cross-check on 10⁵ samples.
pub fn check_normalization(set: &ScattererSet, states: &[EigenState]) -> Check {
    let half = 0.5 * set.length();
    for s in states {
        let exact = s
            .probability_between(-half, half)
            .map_err(|e| e.to_string())?;
        ensure((exact - 1.0).abs() < 1e-10, || {
            format!("k={}: exact norm {exact}", s.k())
        })?;
        let n = 100_000;
        let dx = set.length() / n as f64;
        let sum: f64 = (1..n)
            .map(|i| s.evaluate(-half + dx * i as f64).unwrap().norm_sqr())
            .sum::<f64>()
            * dx;
        ensure((sum - 1.0).abs() < 1e-6, || {
            format!("k={}: quadrature norm {sum}", s.k())
        })?;
    }
    Ok(())
}

pub fn check_orthogonality(states: &[EigenState]) -> Check {
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            let o = a.overlap(b).map_err(|e| e.to_string())?.norm();
            ensure(o < 1e-8, || {
                format!("overlap {o:e} between k={} and k={}", a.k(), b.k())
            })?;
        }
    }
    Ok(())
}

/// `A_n(-k) = -conj(A_n(k))`, so `Ψ` is purely imaginary; the explicit
/// subset sums reproduce `A_n(k)` up to one real factor.
pub fn check_reality_gauge(set: &ScattererSet, states: &[EigenState]) -> Check {
    for s in states {
        let k = s.k();
        for (p, m) in s.plus.iter().zip(&s.minus) {
            let d: Complex64 = m + p.conj();
            ensure(d.norm() <= 1e-12 * peak(s), || {
                format!("k={k}: gauge defect {:e}", d.norm())
            })?;
        }
        if set.len() <= 8 {
            let explicit = explicit_coefficients(set, k).map_err(|e| e.to_string())?;
            let scale = s.plus[0] / explicit[0];
            ensure(scale.im.abs() < 1e-9 * scale.norm(), || {
                format!("k={k}: complex scale {scale}")
            })?;
            for (e, p) in explicit.iter().zip(&s.plus) {
                let d = (e * scale - p).norm();
                ensure(d < 1e-8 * peak(s), || {
                    format!("k={k}: explicit coefficient defect {d:e}")
                })?;
            }
        }
    }
    Ok(())
}

/// Sign changes of the transfer mismatch and the polynomial form fall in
/// the same cells of a uniform grid.
pub fn check_zero_sets(set: &ScattererSet) -> Check {
    let k_max = cutoff(set);
    let n = 4000;
    let ks: Vec<f64> = (0..=n)
        .map(|i| 1e-3 + (k_max - 1e-3) * i as f64 / n as f64)
        .collect();
    let sign = |f: f64| {
        if f > 0.0 {
            1
        } else if f < 0.0 {
            -1
        } else {
            0
        }
    };
    let transfer: Vec<i32> = ks.iter().map(|&k| sign(bethe_mismatch(set, k))).collect();
    let poly: Vec<i32> = ks
        .iter()
        .map(|&k| bethe_polynomial_form(set, k).map(sign))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let changes = |v: &[i32]| -> Vec<usize> { (0..n).filter(|&i| v[i] * v[i + 1] <= 0).collect() };
    let (a, b) = (changes(&transfer), changes(&poly));
    ensure(a == b, || {
        format!("sign-change cells differ: {a:?} vs {b:?}")
    })
}

/// Raising one height never lowers any eigenvalue. Eigenvalues are matched
/// by their global index, counting states with `E <= 0` first.
pub fn check_monotone_in_height(set: &ScattererSet, which: usize, step: f64) -> Check {
    let mut heights = set.heights().to_vec();
    heights[which] += step;
    let raised = set.with_heights(heights).unwrap();
    let energies = |s: &ScattererSet| -> Result<(usize, Vec<f64>), String> {
        let roots =
            find_roots(s, cutoff(s), &SolverOptions::default()).map_err(|e| e.to_string())?;
        let bound = count_states_below(s, 0.5 * roots[0].energy);
        Ok((bound, roots.iter().map(|r| r.energy).collect()))
    };
    let (b0, e0) = energies(set)?;
    let (b1, e1) = energies(&raised)?;
    ensure(b1 <= b0, || format!("bound states grew from {b0} to {b1}"))?;
    // Global index g has energy e[g - bound]; skip the top state, whose
    // partner may lie beyond the cutoff.
    for g in b0..b0 + e0.len() - 1 {
        if let Some(&after) = e1.get(g - b1) {
            let before = e0[g - b0];
            ensure(after >= before * (1.0 - 1e-12), || {
                format!("E_{g} fell from {before} to {after}")
            })?;
        }
    }
    Ok(())
}

/// Oscillation count equals the number of roots below random energies.
pub fn check_completeness(set: &ScattererSet, seed: u64) -> Check {
    let k_max = cutoff(set);
    let roots = find_roots(set, k_max, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let bound = count_states_below(set, 0.5 * roots[0].energy);
    let mut rng = Rng::new(seed);
    for _ in 0..20 {
        let e = rng.uniform(0.0, 0.5 * k_max * k_max);
        let below = roots.iter().filter(|r| r.energy < e).count();
        let counted = count_states_below(set, e);
        ensure(counted == bound + below, || {
            format!("E={e}: count {counted} vs {bound} non-positive + {below} roots")
        })?;
    }
    Ok(())
}

/// Chern number and plaquette sum are unchanged by arbitrary per-point
/// phases on the stored states.
pub fn check_chern_gauge(seed: u64) -> Check {
    let mut rng = Rng::new(seed);
    let a = rng.uniform(0.5, 2.0);
    // Distinct heights keep band 1 isolated in two-scatterer cells.
    let n = 1 + rng.below(2);
    let positions: Vec<f64> = (0..n)
        .map(|i| a * (i as f64 + rng.uniform(0.0, 0.5)) / n as f64)
        .collect();
    let heights: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                rng.uniform(0.3, 0.8)
            } else {
                rng.uniform(1.5, 2.5)
            }
        })
        .collect();
    let cell = UnitCell::new(a, positions, heights).map_err(|e| e.to_string())?;
    let mut grid = berry_grid(&cell, 1, 16, 16, 64).map_err(|e| e.to_string())?;
    let before = grid.chern().map_err(|e| e.to_string())?;
    for state in &mut grid.states {
        let phase = Complex64::from_polar(1.0, rng.uniform(-PI, PI));
        for u in &mut state.samples {
            *u *= phase;
        }
    }
    let after = grid.chern().map_err(|e| e.to_string())?;
    ensure(
        before.chern == after.chern && (before.raw - after.raw).abs() < 1e-9,
        || {
            format!(
                "gauge changed the plaquette sum: {} vs {}",
                before.raw, after.raw
            )
        },
    )?;
    ensure((before.raw - before.raw.round()).abs() < 1e-12, || {
        format!("unquantized sum {}", before.raw)
    })
}

/// All instance-level checks; returns the first failure with its name.
pub fn check_instance(seed: u64) -> Check {
    let set = random_instance(seed, 8, -0.5, 2.0);
    let states = states(&set)?;
    let named = |name: &str, r: Check| r.map_err(|e| format!("{name}: {e}"));
    named("matching", check_matching(&set, &states))?;
    named("normalization", check_normalization(&set, &states))?;
    named("orthogonality", check_orthogonality(&states))?;
    named("reality gauge", check_reality_gauge(&set, &states))?;
    named("zero sets", check_zero_sets(&set))?;
    let which = (seed as usize) % set.len();
    named("monotone", check_monotone_in_height(&set, which, 0.3))?;
    named("completeness", check_completeness(&set, seed ^ 0x5eed))?;
    Ok(())
}
