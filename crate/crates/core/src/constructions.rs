//! Fourier matrices and the chained Fourier tensor whose torus norm meets the
//! universal upper bound `√(n₁⋯n_m) · max √n_k`.
//!
//! Phases are kept as exact fractions of a turn until the final conversion to
//! radians, so entries carry a single rounding step regardless of the number
//! of factors in the chain.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{unit, Shape, UnimodularTensor};

/// `n × n` matrix with entries `e^{2πi·rs/n}` for 1-based `r, s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMatrix {
    n: usize,
    angles: Vec<f64>,
}

impl FourierMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Angles in radians, row-major, 0-based storage of the 1-based formula.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Entry at 1-based row `r` and column `s`.
    pub fn entry(&self, r: usize, s: usize) -> Complex64 {
        assert!((1..=self.n).contains(&r) && (1..=self.n).contains(&s), "index out of range");
        unit(self.angles[(r - 1) * self.n + (s - 1)])
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.n,
            cols: self.n,
            data: self.angles.iter().map(|&a| unit(a)).collect(),
        }
    }

    pub fn to_tensor(&self) -> UnimodularTensor {
        UnimodularTensor::new(Shape::new(vec![self.n, self.n]).expect("n ≥ 1"), self.angles.clone())
            .expect("angles are canonical")
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::Dimension(format!(
                "{rows}×{cols} matrix needs {} entries, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }
}

/// Fraction of a turn for `e^{2πi·rs/n}` with 1-based `r, s`, as
/// `(numerator, n)` with `numerator < n`.
fn fourier_turns(r: usize, s: usize, n: usize) -> (u128, u128) {
    (((r as u128) * (s as u128)) % n as u128, n as u128)
}

pub fn fourier_matrix(n: usize) -> Result<FourierMatrix> {
    if n == 0 {
        return Err(Error::Dimension("Fourier matrix size must be at least 1".into()));
    }
    let mut angles = Vec::with_capacity(n * n);
    for r in 1..=n {
        for s in 1..=n {
            let (num, den) = fourier_turns(r, s, n);
            angles.push(num as f64 / den as f64 * TAU);
        }
    }
    Ok(FourierMatrix { n, angles })
}

/// `max_{r,s} |Σ_t a_{rt}·conj(a_{st}) − n·δ_{rs}|` for a square matrix.
pub fn verify_orthogonality(matrix: &ComplexMatrix) -> Result<f64> {
    if matrix.rows != matrix.cols {
        return Err(Error::Dimension(format!(
            "orthogonality check needs a square matrix, got {}×{}",
            matrix.rows, matrix.cols
        )));
    }
    let n = matrix.rows;
    let mut worst = 0.0f64;
    for r in 0..n {
        for s in 0..n {
            let dot: Complex64 = (0..n).map(|t| matrix.get(r, t) * matrix.get(s, t).conj()).sum();
            let target = if r == s { n as f64 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    Ok(worst)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Chained Fourier tensor of the given shape.
///
/// Dimensions are sorted ascending (stable, so equal dimensions keep their
/// order). With sorted sizes `s₁ ≤ ⋯ ≤ s_m` the entry at 1-based
/// `(i₁, …, i_m)` is `F⁽¹⁾_{i₁i₂} F⁽²⁾_{i₂i₃} ⋯ F⁽ᵐ⁻¹⁾_{i_{m−1}i_m}` with
/// `F⁽ᵏ⁾ = fourier_matrix(s_{k+1})` and `i_k ≤ s_k`. Only this box is
/// materialized (every entry in it is unimodular); the result is then
/// permuted back to the caller's axis order.
pub fn extremal_tensor(shape: &Shape) -> Result<UnimodularTensor> {
    let dims = shape.dims();
    let m = dims.len();
    if m < 2 {
        return Err(Error::Dimension("extremal tensor needs at least two axes".into()));
    }
    let mut perm: Vec<usize> = (0..m).collect();
    perm.sort_by_key(|&k| (dims[k], k));
    let sorted: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();

    // common denominator of every chain factor
    let mut lcm: u128 = 1;
    for &s in &sorted[1..] {
        lcm = lcm / gcd(lcm, s as u128) * s as u128;
    }

    let mut sorted_index = vec![0usize; m];
    UnimodularTensor::from_fn(shape.clone(), |idx| {
        for (p, &k) in perm.iter().enumerate() {
            sorted_index[p] = idx[k];
        }
        let mut turns: u128 = 0;
        for k in 0..m - 1 {
            let (num, den) = fourier_turns(sorted_index[k] + 1, sorted_index[k + 1] + 1, sorted[k + 1]);
            turns = (turns + num * (lcm / den)) % lcm;
        }
        turns as f64 / lcm as f64 * TAU
    })
}
