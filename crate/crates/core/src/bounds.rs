//! Closed-form bound constants for the sign and unimodular games, and the
//! sandwich report comparing an ascent estimate against them.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Shape;
use crate::torus::{unimodular_lower_certificate, NormEstimate, STEINHAUS_A1};

/// Where a pair of bounds comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundSource {
    /// Unimodular game: `(√π/2)^{m−1} ≤ S^ℂ / (√(n₁⋯n_m)·max√n_k) ≤ 1`.
    #[serde(rename = "T6b")]
    T6b,
    /// Anisotropic sign game, sum-of-roots normalizer.
    #[serde(rename = "T3a_26")]
    T3a26,
    /// Anisotropic sign game, max-root normalizer.
    #[serde(rename = "T3a_25")]
    T3a25,
    /// Square sign game, asymptotic `√(2/π)` lower constant.
    #[serde(rename = "E6hh3")]
    E6hh3,
    /// Square sign game, `n^{3/2}/√2` lower bound.
    #[serde(rename = "E223")]
    E223,
    /// Square sign game, Kahane–Salem–Zygmund upper bound.
    #[serde(rename = "Exz")]
    Exz,
    /// Square sign game, combined finite-n sandwich.
    #[serde(rename = "E6y7")]
    E6y7,
}

impl BoundSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::T6b => "T6b",
            Self::T3a26 => "T3a_26",
            Self::T3a25 => "T3a_25",
            Self::E6hh3 => "E6hh3",
            Self::E223 => "E223",
            Self::Exz => "Exz",
            Self::E6y7 => "E6y7",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub shape: Shape,
    pub lower: f64,
    pub upper: f64,
    /// The denominator the constants multiply.
    pub normalizer: f64,
    pub lower_constant: f64,
    pub upper_constant: f64,
    pub source: BoundSource,
    /// The lower constant only holds up to an unquantified `o(1)`; it is not
    /// a finite-n bound.
    pub asymptotic: bool,
}

impl BoundReport {
    fn new(shape: &Shape, normalizer: f64, lc: f64, uc: f64, source: BoundSource) -> Self {
        Self {
            shape: shape.clone(),
            lower: lc * normalizer,
            upper: uc * normalizer,
            normalizer,
            lower_constant: lc,
            upper_constant: uc,
            source,
            asymptotic: false,
        }
    }

    pub const CSV_HEADER: [&'static str; 5] = ["shape", "source", "lower", "upper", "normalizer"];

    pub fn csv_record(&self) -> [String; 5] {
        [
            self.shape.to_string(),
            self.source.as_str().to_string(),
            self.lower.to_string(),
            self.upper.to_string(),
            self.normalizer.to_string(),
        ]
    }
}

/// `√(n₁⋯n_m) · max √n_k`.
pub fn max_normalizer(shape: &Shape) -> f64 {
    (shape.len() as f64).sqrt() * (shape.max_dim() as f64).sqrt()
}

/// `√(n₁⋯n_m) · (√n₁ + ⋯ + √n_m)`.
pub fn sum_normalizer(shape: &Shape) -> f64 {
    (shape.len() as f64).sqrt() * shape.dims().iter().map(|&n| (n as f64).sqrt()).sum::<f64>()
}

/// Sandwich for the unimodular game. For a single axis both constants are 1.
pub fn theorem6b_bounds(shape: &Shape) -> BoundReport {
    let lc = STEINHAUS_A1.powi(shape.order() as i32 - 1);
    BoundReport::new(shape, max_normalizer(shape), lc, 1.0, BoundSource::T6b)
}

/// `1 / (m·√2^{m−1})`, shared by both anisotropic sign forms.
fn anisotropic_lower_constant(m: usize) -> f64 {
    1.0 / (m as f64 * SQRT_2.powi(m as i32 - 1))
}

/// `8·√(m!)·√ln(1 + 4m)`.
fn anisotropic_upper_constant(m: usize) -> f64 {
    let factorial: f64 = (1..=m).map(|k| k as f64).product();
    8.0 * factorial.sqrt() * (1.0 + 4.0 * m as f64).ln().sqrt()
}

/// Anisotropic sign-game bounds with the sum normalizer and with the max
/// normalizer. The max form keeps the lower constant and pays a factor `m`
/// on the upper one, via `max √n_k ≤ Σ√n_k ≤ m·max √n_k`.
pub fn anisotropic_sign_bounds(shape: &Shape) -> Result<(BoundReport, BoundReport)> {
    let m = shape.order();
    if m < 2 {
        return Err(Error::Dimension("anisotropic sign bounds need at least two axes".into()));
    }
    let lc = anisotropic_lower_constant(m);
    let uc = anisotropic_upper_constant(m);
    Ok((
        BoundReport::new(shape, sum_normalizer(shape), lc, uc, BoundSource::T3a26),
        BoundReport::new(shape, max_normalizer(shape), lc, m as f64 * uc, BoundSource::T3a25),
    ))
}

/// `8·√(2 ln 9)`, the Kahane–Salem–Zygmund constant for square boards.
pub fn ksz_square_constant() -> f64 {
    8.0 * (2.0 * 9f64.ln()).sqrt()
}

/// `√(2/π)`.
pub fn asymptotic_square_constant() -> f64 {
    (2.0 / PI).sqrt()
}

/// Bounds on the square sign game `S_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareBounds {
    pub n: usize,
    /// `n^{3/2} / √2`.
    pub lower: f64,
    /// `8√(2 ln 9) · n^{3/2}`.
    pub upper: f64,
    /// `√(2/π)`; holds only asymptotically.
    pub asymptotic_constant: f64,
    pub reports: Vec<BoundReport>,
}

pub fn square_sign_bounds(n: usize) -> Result<SquareBounds> {
    let shape = Shape::new(vec![n, n])?;
    let scale = (n as f64).powf(1.5);
    let lc = 1.0 / SQRT_2;
    let uc = ksz_square_constant();
    let finite = BoundReport::new(&shape, scale, lc, uc, BoundSource::E6y7);
    let mut asymptotic = BoundReport::new(&shape, scale, asymptotic_square_constant(), uc, BoundSource::E6hh3);
    asymptotic.asymptotic = true;
    Ok(SquareBounds {
        n,
        lower: finite.lower,
        upper: finite.upper,
        asymptotic_constant: asymptotic_square_constant(),
        reports: vec![finite, asymptotic],
    })
}

/// Certificate, estimate and upper bound for one unimodular tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub shape: Shape,
    pub lower_certificate: f64,
    pub estimate: f64,
    pub upper_t6b: f64,
    pub normalizer: f64,
    pub lower_ratio: f64,
    pub estimate_ratio: f64,
    pub lower_ok: bool,
    /// Only checked for construction tensors; other tensors may exceed the
    /// minimum over patterns.
    pub upper_ok: Option<bool>,
    pub pass: bool,
}

/// Relative slack allowed above the upper bound.
pub const UPPER_SLACK: f64 = 1e-9;

pub fn sandwich_report(shape: &Shape, estimate: &NormEstimate, construction: bool) -> Result<SandwichReport> {
    estimate.witness.check_against(shape)?;
    let t6b = theorem6b_bounds(shape);
    let lower = unimodular_lower_certificate(shape);
    let lower_ok = lower <= estimate.value;
    let upper_ok = construction.then_some(estimate.value <= t6b.upper * (1.0 + UPPER_SLACK));
    Ok(SandwichReport {
        shape: shape.clone(),
        lower_certificate: lower,
        estimate: estimate.value,
        upper_t6b: t6b.upper,
        normalizer: t6b.normalizer,
        lower_ratio: lower / t6b.normalizer,
        estimate_ratio: estimate.value / t6b.normalizer,
        lower_ok,
        upper_ok,
        pass: lower_ok && upper_ok.unwrap_or(true),
    })
}
