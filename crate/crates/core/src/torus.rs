//! Norms of multilinear forms over unimodular inputs (the vector game) and
//! the Khinchin/Steinhaus averages behind their lower certificates.
//!
//! With every axis but `k` fixed the form is `Σ_j b_j x_j`, and over
//! unimodular `x` its modulus is maximised by `x_j = conj(b_j)/|b_j|`, giving
//! `Σ_j |b_j|`. Both the ascent and the grid search close one axis this way.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{search_chunks, Best, Goal};
use crate::tensor::{canonical_angle, contract_all_but, evaluate, unit, AxisAssignment, Coefficients, Shape};
use crate::DEFAULT_SEED;

/// `√π / 2`, the sharp lower constant of the first-moment Khinchin
/// inequality for Steinhaus variables.
pub const STEINHAUS_A1: f64 = 0.886_226_925_452_758_f64;

/// Cap on the number of grid points a grid search may visit.
pub const GRID_POINT_BUDGET: u64 = 1 << 30;

/// Sample batch size for Monte Carlo averages; fixes the random substreams.
const MC_BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    pub restarts: u32,
    /// Relative improvement per full sweep below which a run stops.
    pub tol: f64,
    pub max_sweeps: u32,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self { restarts: 50, tol: 1e-10, max_sweeps: 1000, seed: DEFAULT_SEED }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_sweeps == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidValue(
                "ascent needs restarts ≥ 1, max_sweeps ≥ 1 and tol > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Certified lower bound on the torus norm with the phases that reach it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub witness: AxisAssignment,
    pub sweeps: u32,
    pub restarts_used: u32,
    pub converged: bool,
    pub seed: u64,
}

/// One ascent run from a fixed start.
#[derive(Debug, Clone)]
pub struct AscentRun {
    pub value: f64,
    /// Final phases, one vector per axis.
    pub phases: Vec<Vec<f64>>,
    pub sweeps: u32,
    pub converged: bool,
    /// `(before, after)` objective for every single-axis realignment.
    pub steps: Vec<(f64, f64)>,
}

/// Runs alternating phase ascent from `start` until the relative gain of a
/// full sweep drops below `tol` or `max_sweeps` is reached.
pub fn ascend_from<T: Coefficients + ?Sized>(
    tensor: &T,
    start: &[Vec<f64>],
    tol: f64,
    max_sweeps: u32,
) -> Result<AscentRun> {
    let shape = tensor.shape();
    let lengths: Vec<usize> = start.iter().map(Vec::len).collect();
    if lengths != shape.dims() {
        return Err(Error::Dimension(format!(
            "start phases have lengths {lengths:?}, shape is {shape}"
        )));
    }
    let data = tensor.to_complex();
    Ok(ascend_dense(&data, shape, start.to_vec(), tol, max_sweeps, true))
}

fn ascend_dense(
    data: &[Complex64],
    shape: &Shape,
    mut phases: Vec<Vec<f64>>,
    tol: f64,
    max_sweeps: u32,
    record: bool,
) -> AscentRun {
    let dims = shape.dims();
    let mut vectors: Vec<Vec<Complex64>> =
        phases.iter().map(|v| v.iter().map(|&t| unit(t)).collect()).collect();
    let mut steps = Vec::new();
    let mut value = f64::NAN;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        let before_sweep = value;
        for k in 0..dims.len() {
            let b = contract_all_but(data, dims, &vectors, k);
            let before = if record {
                b.iter().zip(&vectors[k]).map(|(&b, &x)| b * x).sum::<Complex64>().norm()
            } else {
                0.0
            };
            for (j, bj) in b.iter().enumerate() {
                // any phase is optimal against a zero coefficient; keep the old one
                if bj.norm_sqr() > 0.0 {
                    let theta = canonical_angle(-bj.arg()).expect("finite coefficient");
                    phases[k][j] = theta;
                    vectors[k][j] = unit(theta);
                }
            }
            value = b.iter().map(|bj| bj.norm()).sum();
            if record {
                steps.push((before, value));
            }
        }
        sweeps += 1;
        if before_sweep.is_finite() && value - before_sweep <= tol * value.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    AscentRun { value, phases, sweeps, converged, steps }
}

/// Starting phases for a restart: zeros for restart 0, otherwise uniform
/// angles from the `(seed, restart)` substream.
pub fn restart_start(shape: &Shape, seed: u64, restart: u32) -> Vec<Vec<f64>> {
    if restart == 0 {
        return shape.dims().iter().map(|&n| vec![0.0; n]).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    shape
        .dims()
        .iter()
        .map(|&n| (0..n).map(|_| rng.random::<f64>() * TAU).collect())
        .collect()
}

/// Best of `cfg.restarts` ascent runs. The reported value is recomputed from
/// the witness, so it is a valid lower bound on the norm.
pub fn alternating_ascent<T: Coefficients + ?Sized>(tensor: &T, cfg: &AscentConfig) -> Result<NormEstimate> {
    cfg.validate()?;
    let shape = tensor.shape();
    let data = tensor.to_complex();
    let runs: Vec<AscentRun> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| ascend_dense(&data, shape, restart_start(shape, cfg.seed, r), cfg.tol, cfg.max_sweeps, false))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("restarts ≥ 1");
    let witness = AxisAssignment::Phases(best.phases);
    let value = evaluate(tensor, &witness)?.norm();
    Ok(NormEstimate {
        value,
        witness,
        sweeps: best.sweeps,
        restarts_used: cfg.restarts,
        converged: best.converged,
        seed: cfg.seed,
    })
}

/// Exhaustive search over phases `2πg/G` on every axis but the last, with the
/// last axis closed exactly.
///
/// The first coordinate is pinned to phase 0 (a global phase does not change
/// the modulus). Fails with a capacity error when
/// `G^{n₁+⋯+n_{m−1}} > 2³⁰`.
pub fn phase_grid_lower_bound<T: Coefficients + ?Sized>(tensor: &T, grid: u32) -> Result<NormEstimate> {
    if grid == 0 {
        return Err(Error::InvalidValue("grid size must be at least 1".into()));
    }
    let shape = tensor.shape();
    let dims = shape.dims();
    let m = dims.len();
    let bits: usize = dims[..m - 1].iter().sum();
    let within_budget = u32::try_from(bits)
        .ok()
        .and_then(|b| (grid as u64).checked_pow(b))
        .is_some_and(|p| p <= GRID_POINT_BUDGET);
    if !within_budget {
        return Err(Error::Capacity(format!("grid {grid} over shape {shape} exceeds 2^30 points")));
    }

    let data = tensor.to_complex();
    let width = dims[m - 1];
    let rows = data.len() / width;
    let roots: Vec<Complex64> = (0..grid).map(|g| unit(grid_angle(g, grid))).collect();
    // enumerated coordinate t belongs to axis `axis_of[t]` at index `index_of[t]`
    let mut axis_of = Vec::with_capacity(bits);
    let mut index_of = Vec::with_capacity(bits);
    for (k, &n) in dims[..m - 1].iter().enumerate() {
        for j in 0..n {
            axis_of.push(k);
            index_of.push(j);
        }
    }
    let row_dims = &dims[..m - 1];
    let offsets: Vec<usize> = (0..m - 1).map(|k| dims[..k].iter().sum()).collect();
    let free = bits.saturating_sub(1) as u32;
    let total = (grid as u64).pow(free);

    let digits_of = |mut i: u64| {
        let mut d = vec![0u32; bits];
        for slot in d.iter_mut().skip(1).rev() {
            *slot = (i % grid as u64) as u32;
            i /= grid as u64;
        }
        d
    };
    let closed = |digits: &[u32]| -> Vec<Complex64> {
        let mut b = vec![Complex64::new(0.0, 0.0); width];
        let mut ix = vec![0usize; m - 1];
        for r in 0..rows {
            let mut p = Complex64::new(1.0, 0.0);
            for (k, &j) in ix.iter().enumerate() {
                p *= roots[digits[offsets[k] + j] as usize];
            }
            for (bj, &a) in b.iter_mut().zip(&data[r * width..(r + 1) * width]) {
                *bj += p * a;
            }
            for k in (0..m - 1).rev() {
                ix[k] += 1;
                if ix[k] < row_dims[k] {
                    break;
                }
                ix[k] = 0;
            }
        }
        b
    };

    let best = search_chunks(total, 1 << 10, Goal::Max, |range| {
        let mut best: Option<Best<f64>> = None;
        if range.is_empty() {
            return None;
        }
        let mut digits = digits_of(range.start);
        for i in range {
            let value: f64 = closed(&digits).iter().map(|b| b.norm()).sum();
            if best.as_ref().is_none_or(|b| value > b.key) {
                best = Some(Best { key: value, index: i });
            }
            for d in digits.iter_mut().skip(1).rev() {
                *d += 1;
                if *d < grid {
                    break;
                }
                *d = 0;
            }
        }
        best
    })
    .expect("at least one grid point");

    let digits = digits_of(best.index);
    let b = closed(&digits);
    let mut phases: Vec<Vec<f64>> = dims.iter().map(|&n| vec![0.0; n]).collect();
    for t in 0..bits {
        phases[axis_of[t]][index_of[t]] = grid_angle(digits[t], grid);
    }
    for (j, bj) in b.iter().enumerate() {
        if bj.norm_sqr() > 0.0 {
            phases[m - 1][j] = canonical_angle(-bj.arg())?;
        }
    }
    let witness = AxisAssignment::Phases(phases);
    let value = evaluate(tensor, &witness)?.norm();
    Ok(NormEstimate { value, witness, sweeps: 0, restarts_used: 0, converged: true, seed: 0 })
}

/// `2πg/G`, computed so that `g/G` and `(cg)/(cG)` give the same angle.
fn grid_angle(g: u32, grid: u32) -> f64 {
    g as f64 / grid as f64 * TAU
}

/// Monte Carlo mean with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Running mean and second moment, merged with Chan's formula.
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

/// Mean of `|A(e^{it⁽¹⁾}, …)|` with independent uniform angles on the
/// `random_axes` and phase 0 on every other axis.
///
/// Samples are drawn in fixed batches from `(seed, batch)` substreams, so
/// the estimate does not depend on the thread count.
pub fn steinhaus_average<T: Coefficients + Sync + ?Sized>(
    coeffs: &T,
    random_axes: &[usize],
    samples: u64,
    seed: u64,
) -> Result<MeanEstimate> {
    if samples < 100 {
        return Err(Error::InvalidValue("Steinhaus averages need at least 100 samples".into()));
    }
    let shape = coeffs.shape();
    let dims = shape.dims();
    let mut random = vec![false; dims.len()];
    for &k in random_axes {
        if k >= dims.len() {
            return Err(Error::Dimension(format!("axis {} out of range", k + 1)));
        }
        random[k] = true;
    }
    let data = coeffs.to_complex();
    let last = dims.len() - 1;
    let batches = samples.div_ceil(MC_BATCH);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch);
            let count = MC_BATCH.min(samples - batch * MC_BATCH);
            let mut vectors: Vec<Vec<Complex64>> =
                dims.iter().map(|&n| vec![Complex64::new(1.0, 0.0); n]).collect();
            let mut moments = Moments::default();
            for _ in 0..count {
                for (k, v) in vectors.iter_mut().enumerate() {
                    if random[k] {
                        for x in v.iter_mut() {
                            *x = unit(rng.random::<f64>() * TAU);
                        }
                    }
                }
                let b = contract_all_but(&data, dims, &vectors, last);
                let s: Complex64 = b.iter().zip(&vectors[last]).map(|(&b, &x)| b * x).sum();
                moments.push(s.norm());
            }
            moments
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let variance = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok(MeanEstimate {
        mean: total.mean,
        half_width_95: 1.96 * (variance.max(0.0) / total.n).sqrt(),
        samples,
        seed,
    })
}

/// Exact first Rademacher moment `2⁻ⁿ Σ_ε |Σ_j ε_j a_j|` by enumeration.
pub fn rademacher_average_exact(coeffs: &[f64]) -> Result<f64> {
    let n = coeffs.len();
    if n > 24 {
        return Err(Error::Capacity(format!("exact Rademacher average of {n} terms exceeds 24")));
    }
    if coeffs.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidValue("coefficients must be finite".into()));
    }
    if n == 0 {
        return Ok(0.0);
    }
    // ε and −ε give the same modulus, so pin ε₁ = +1
    let states = 1u64 << (n - 1);
    let chunk = 1u64 << 12;
    let partial: Vec<f64> = (0..states.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let end = (start + chunk).min(states);
            let gray = start ^ (start >> 1);
            let mut eps: Vec<f64> = (0..n)
                .map(|j| if j > 0 && gray >> (j - 1) & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            let mut s: f64 = eps.iter().zip(coeffs).map(|(e, a)| e * a).sum();
            let mut acc = 0.0;
            for i in start..end {
                acc += s.abs();
                let next = i + 1;
                if next < end {
                    let j = next.trailing_zeros() as usize + 1;
                    eps[j] = -eps[j];
                    s += 2.0 * eps[j] * coeffs[j];
                }
            }
            acc
        })
        .collect();
    Ok(partial.iter().sum::<f64>() / states as f64)
}

/// `(√π/2)^{m−1} · n_max · √(∏ other dims)`: a lower bound on the torus norm
/// of every unimodular tensor of this shape.
pub fn unimodular_lower_certificate(shape: &Shape) -> f64 {
    let m = shape.order() as i32;
    let n_max = shape.max_dim() as f64;
    let rest = shape.len() as f64 / n_max;
    STEINHAUS_A1.powi(m - 1) * n_max * rest.sqrt()
}

/// Outcome of checking `√(Σ|a|²) ≤ (2/√π)^exponent · E|…|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinhausCheck {
    pub l2: f64,
    pub exponent: u32,
    pub average: MeanEstimate,
    /// `(2/√π)^exponent · mean`.
    pub bound: f64,
    /// Holds with the mean taken at the top of its 95% interval.
    pub holds: bool,
    /// Fails even with the mean taken at the top of its 95% interval.
    pub fails_beyond_ci: bool,
}

/// Evaluates the multi-axis Steinhaus inequality with the given exponent and
/// randomized axes.
pub fn steinhaus_inequality_check<T: Coefficients + Sync + ?Sized>(
    coeffs: &T,
    random_axes: &[usize],
    exponent: u32,
    samples: u64,
    seed: u64,
) -> Result<SteinhausCheck> {
    let average = steinhaus_average(coeffs, random_axes, samples, seed)?;
    let l2 = coeffs.to_complex().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let factor = (1.0 / STEINHAUS_A1).powi(exponent as i32);
    let upper = factor * (average.mean + average.half_width_95);
    Ok(SteinhausCheck {
        l2,
        exponent,
        average,
        bound: factor * average.mean,
        holds: l2 <= upper,
        fails_beyond_ci: l2 > upper,
    })
}

/// Two readings of the multi-sum Steinhaus inequality on one tensor: the
/// consistent one (exponent = number of randomized axes) and the one that
/// randomizes all `m` axes with exponent `m − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub consistent: SteinhausCheck,
    pub all_axes_exponent_m_minus_1: SteinhausCheck,
}

pub fn steinhaus_exponent_report<T: Coefficients + Sync + ?Sized>(
    coeffs: &T,
    samples: u64,
    seed: u64,
) -> Result<ExponentReport> {
    let m = coeffs.shape().order();
    let axes: Vec<usize> = (0..m).collect();
    Ok(ExponentReport {
        consistent: steinhaus_inequality_check(coeffs, &axes, m as u32, samples, seed)?,
        all_axes_exponent_m_minus_1: steinhaus_inequality_check(coeffs, &axes, m as u32 - 1, samples, seed)?,
    })
}

/// `(1/2π)∫|1 + e^{iu}| du = 4/π`, the two-term Steinhaus mean.
pub const TWO_TERM_STEINHAUS_MEAN: f64 = 4.0 / PI;
