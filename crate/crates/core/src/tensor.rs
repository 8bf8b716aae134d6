//! Shapes, sign and unimodular coefficient tensors, axis assignments and the
//! contraction primitives used by every solver.
//!
//! Storage is flat and row-major (last axis fastest). All Rust-side indices
//! are 0-based; a documented 1-based coordinate `j` maps to storage index
//! `j - 1` (see [`MultiIndex`]).

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduce an angle to `[0, 2π)`.
pub fn canonical_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::InvalidValue(format!("angle {theta} is not finite")));
    }
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    Ok(if r >= TAU { 0.0 } else { r })
}

/// Unit complex number with the given argument.
#[inline]
pub fn unit(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

/// Dimensions `(n₁, …, n_m)` of a tensor. Every dimension is at least one and
/// the entry count fits in a `u64`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Dimension("a shape needs at least one axis".into()));
        }
        if let Some(k) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Dimension(format!("axis {} has dimension 0", k + 1)));
        }
        let mut product: u64 = 1;
        for &d in &dims {
            product = product
                .checked_mul(d as u64)
                .ok_or_else(|| Error::Capacity("entry count overflows 64 bits".into()))?;
        }
        usize::try_from(product)
            .map_err(|_| Error::Capacity("entry count does not fit in memory".into()))?;
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of axes `m`.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Total number of entries.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_dim(&self) -> usize {
        *self.dims.iter().max().expect("shape has at least one axis")
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Flat offset of a 0-based multi-index.
    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return Err(Error::Dimension(format!(
                "index has {} coordinates, shape has {} axes",
                index.len(),
                self.dims.len()
            )));
        }
        let mut flat = 0;
        for (k, (&j, &n)) in index.iter().zip(&self.dims).enumerate() {
            if j >= n {
                return Err(Error::Dimension(format!(
                    "coordinate {j} out of range for axis {} of size {n}",
                    k + 1
                )));
            }
            flat = flat * n + j;
        }
        Ok(flat)
    }

    /// Inverse of [`Shape::flat_index`].
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            index[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        index
    }

    /// Size of the block below `axis`, i.e. the stride of `axis`.
    pub(crate) fn inner(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.order() {
            return Err(Error::Dimension(format!(
                "axis {} out of range for a {}-axis shape",
                axis + 1,
                self.order()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Shape::new(dims)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(shape: Shape) -> Self {
        shape.dims
    }
}

impl FromStr for Shape {
    type Err = Error;

    /// Parses comma separated dimensions such as `"2,3,4"`.
    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad dimension {part:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Shape::new(dims)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.dims.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A multi-index `(j₁, …, j_m)` stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    /// Builds from 1-based coordinates, checking `1 ≤ j_k ≤ n_k`.
    pub fn from_one_based(shape: &Shape, coords: &[usize]) -> Result<Self> {
        if coords.contains(&0) {
            return Err(Error::Dimension("1-based coordinates start at 1".into()));
        }
        let zero: Vec<usize> = coords.iter().map(|&j| j - 1).collect();
        shape.flat_index(&zero)?;
        Ok(Self(zero))
    }

    pub fn zero_based(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&j| j + 1).collect()
    }
}

/// Anything that can be read as a dense array of complex coefficients.
pub trait Coefficients {
    fn shape(&self) -> &Shape;

    /// Complex value at a flat offset.
    fn entry(&self, flat: usize) -> Complex64;

    /// Exact ±1 view, when the coefficients are signs.
    fn as_signs(&self) -> Option<&SignTensor> {
        None
    }

    /// All entries realized as complex numbers, row-major.
    fn to_complex(&self) -> Vec<Complex64> {
        (0..self.shape().len()).map(|f| self.entry(f)).collect()
    }
}

/// Tensor of ±1 entries: a light pattern in the classic game.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignTensor {
    shape: Shape,
    entries: Vec<i8>,
}

impl SignTensor {
    pub fn new(shape: Shape, entries: Vec<i8>) -> Result<Self> {
        if entries.len() != shape.len() {
            return Err(Error::Dimension(format!(
                "shape {shape} needs {} entries, got {}",
                shape.len(),
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|&&e| e != 1 && e != -1) {
            return Err(Error::InvalidValue(format!("sign entry {bad} is not ±1")));
        }
        Ok(Self { shape, entries })
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> i8) -> Result<Self> {
        let entries = (0..shape.len()).map(|flat| f(&shape.multi_index(flat))).collect();
        Self::new(shape, entries)
    }

    pub fn all_ones(shape: Shape) -> Self {
        let entries = vec![1; shape.len()];
        Self { shape, entries }
    }

    /// Builds a matrix from rows. Convenience for tests and examples.
    pub fn from_rows(rows: &[&[i8]]) -> Result<Self> {
        let n2 = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n2) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let shape = Shape::new(vec![rows.len(), n2])?;
        Self::new(shape, rows.concat())
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn get(&self, index: &[usize]) -> Result<i8> {
        Ok(self.entries[self.shape.flat_index(index)?])
    }

    /// Plain sum of entries: lights on minus lights off.
    pub fn sum(&self) -> i64 {
        self.entries.iter().map(|&e| e as i64).sum()
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [i8] {
        &mut self.entries
    }
}

impl Coefficients for SignTensor {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn entry(&self, flat: usize) -> Complex64 {
        Complex64::new(self.entries[flat] as f64, 0.0)
    }

    fn as_signs(&self) -> Option<&SignTensor> {
        Some(self)
    }
}

/// Tensor of unit-modulus complex entries, stored as angles in `[0, 2π)` and
/// realized on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodularTensor {
    shape: Shape,
    angles: Vec<f64>,
}

impl UnimodularTensor {
    /// Angles are canonicalized into `[0, 2π)`.
    pub fn new(shape: Shape, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != shape.len() {
            return Err(Error::Dimension(format!(
                "shape {shape} needs {} entries, got {}",
                shape.len(),
                angles.len()
            )));
        }
        let angles = angles
            .into_iter()
            .map(canonical_angle)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { shape, angles })
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let angles = (0..shape.len()).map(|flat| f(&shape.multi_index(flat))).collect();
        Self::new(shape, angles)
    }

    /// All angles zero, i.e. every entry equal to 1.
    pub fn ones(shape: Shape) -> Self {
        let angles = vec![0.0; shape.len()];
        Self { shape, angles }
    }

    /// Signs as angles 0 (for +1) and π (for −1).
    pub fn from_signs(signs: &SignTensor) -> Self {
        let angles = signs
            .entries
            .iter()
            .map(|&e| if e > 0 { 0.0 } else { std::f64::consts::PI })
            .collect();
        Self { shape: signs.shape.clone(), angles }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn get(&self, index: &[usize]) -> Result<Complex64> {
        Ok(unit(self.angles[self.shape.flat_index(index)?]))
    }

    pub(crate) fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.angles
    }
}

impl Coefficients for UnimodularTensor {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn entry(&self, flat: usize) -> Complex64 {
        unit(self.angles[flat])
    }
}

/// General dense complex coefficients, e.g. a plain vector for Khinchin
/// averages.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<Complex64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::Dimension(format!(
                "shape {shape} needs {} entries, got {}",
                shape.len(),
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidValue("coefficients must be finite".into()));
        }
        Ok(Self { shape, data })
    }

    /// A single-axis tensor holding `values`.
    pub fn vector(values: Vec<Complex64>) -> Result<Self> {
        Self::new(Shape::new(vec![values.len()])?, values)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
}

impl Coefficients for DenseTensor {
    fn shape(&self) -> &Shape {
        &self.shape
    }

    fn entry(&self, flat: usize) -> Complex64 {
        self.data[flat]
    }

    fn to_complex(&self) -> Vec<Complex64> {
        self.data.clone()
    }
}

/// Either kind of coefficient tensor, as read from an interchange document.
#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Sign(SignTensor),
    Unimodular(UnimodularTensor),
}

impl Coefficients for Tensor {
    fn shape(&self) -> &Shape {
        match self {
            Tensor::Sign(t) => t.shape(),
            Tensor::Unimodular(t) => t.shape(),
        }
    }

    fn entry(&self, flat: usize) -> Complex64 {
        match self {
            Tensor::Sign(t) => t.entry(flat),
            Tensor::Unimodular(t) => t.entry(flat),
        }
    }

    fn as_signs(&self) -> Option<&SignTensor> {
        match self {
            Tensor::Sign(t) => Some(t),
            Tensor::Unimodular(_) => None,
        }
    }
}

impl From<SignTensor> for Tensor {
    fn from(t: SignTensor) -> Self {
        Tensor::Sign(t)
    }
}

impl From<UnimodularTensor> for Tensor {
    fn from(t: UnimodularTensor) -> Self {
        Tensor::Unimodular(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignmentKind {
    Signs,
    Phases,
}

/// One vector per axis: switch signs or knob angles.
///
/// An assignment does not carry a shape; lengths are checked against the
/// tensor when it is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "vectors",
    rename_all = "lowercase",
    try_from = "RawAssignment"
)]
pub enum AxisAssignment {
    Signs(Vec<Vec<i8>>),
    Phases(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
#[serde(tag = "kind", content = "vectors", rename_all = "lowercase")]
enum RawAssignment {
    Signs(Vec<Vec<i8>>),
    Phases(Vec<Vec<f64>>),
}

impl TryFrom<RawAssignment> for AxisAssignment {
    type Error = Error;

    fn try_from(raw: RawAssignment) -> Result<Self> {
        match raw {
            RawAssignment::Signs(v) => Self::signs(v),
            RawAssignment::Phases(v) => Self::phases(v),
        }
    }
}

impl AxisAssignment {
    pub fn signs(vectors: Vec<Vec<i8>>) -> Result<Self> {
        if let Some(bad) = vectors.iter().flatten().find(|&&e| e != 1 && e != -1) {
            return Err(Error::InvalidValue(format!("switch value {bad} is not ±1")));
        }
        Ok(Self::Signs(vectors))
    }

    /// Angles are canonicalized into `[0, 2π)`.
    pub fn phases(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let vectors = vectors
            .into_iter()
            .map(|v| v.into_iter().map(canonical_angle).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::Phases(vectors))
    }

    /// All switches up.
    pub fn unit_signs(shape: &Shape) -> Self {
        Self::Signs(shape.dims().iter().map(|&n| vec![1; n]).collect())
    }

    /// All knobs at angle zero.
    pub fn zero_phases(shape: &Shape) -> Self {
        Self::Phases(shape.dims().iter().map(|&n| vec![0.0; n]).collect())
    }

    pub fn kind(&self) -> AssignmentKind {
        match self {
            Self::Signs(_) => AssignmentKind::Signs,
            Self::Phases(_) => AssignmentKind::Phases,
        }
    }

    /// Number of axis vectors.
    pub fn len(&self) -> usize {
        match self {
            Self::Signs(v) => v.len(),
            Self::Phases(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lengths(&self) -> Vec<usize> {
        match self {
            Self::Signs(v) => v.iter().map(Vec::len).collect(),
            Self::Phases(v) => v.iter().map(Vec::len).collect(),
        }
    }

    /// Realizes every vector as complex numbers.
    pub fn to_complex(&self) -> Vec<Vec<Complex64>> {
        match self {
            Self::Signs(v) => v
                .iter()
                .map(|x| x.iter().map(|&s| Complex64::new(s as f64, 0.0)).collect())
                .collect(),
            Self::Phases(v) => v.iter().map(|x| x.iter().map(|&t| unit(t)).collect()).collect(),
        }
    }

    /// Checks that there is exactly one vector per axis of `shape`, each of
    /// the right length.
    pub fn check_against(&self, shape: &Shape) -> Result<()> {
        check_lengths(&self.lengths(), shape.dims())
    }
}

fn check_lengths(got: &[usize], want: &[usize]) -> Result<()> {
    if got.len() != want.len() {
        return Err(Error::Dimension(format!(
            "expected {} axis vectors, got {}",
            want.len(),
            got.len()
        )));
    }
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        if g != w {
            return Err(Error::Dimension(format!(
                "axis {} vector has length {g}, expected {w}",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Contracts one axis of a dense row-major array against `v`, removing it.
pub(crate) fn contract_axis(
    data: &[Complex64],
    dims: &[usize],
    axis: usize,
    v: &[Complex64],
) -> Vec<Complex64> {
    let n = dims[axis];
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * inner];
    for o in 0..outer {
        let dst = &mut out[o * inner..(o + 1) * inner];
        for (j, &x) in v.iter().enumerate().take(n) {
            let src = &data[(o * n + j) * inner..(o * n + j + 1) * inner];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += s * x;
            }
        }
    }
    out
}

/// Contracts every axis except `free` against `vectors[k]`. `vectors` holds
/// one entry per axis; the entry at `free` is ignored.
pub(crate) fn contract_all_but(
    data: &[Complex64],
    dims: &[usize],
    vectors: &[Vec<Complex64>],
    free: usize,
) -> Vec<Complex64> {
    // contracting from the last axis down keeps earlier axis numbers valid
    let mut current: Option<Vec<Complex64>> = None;
    let mut cur_dims = dims.to_vec();
    for axis in (0..dims.len()).rev() {
        if axis == free {
            continue;
        }
        let src = current.as_deref().unwrap_or(data);
        let next = contract_axis(src, &cur_dims, axis, &vectors[axis]);
        cur_dims.remove(axis);
        current = Some(next);
    }
    current.unwrap_or_else(|| data.to_vec())
}

/// `Σ a_{j₁…j_m} x^{(1)}_{j₁} ⋯ x^{(m)}_{j_m}`.
///
/// Sign tensors with sign assignments are evaluated in exact integer
/// arithmetic.
pub fn evaluate<T: Coefficients + ?Sized>(tensor: &T, assignment: &AxisAssignment) -> Result<Complex64> {
    let shape = tensor.shape();
    assignment.check_against(shape)?;
    if let (Some(signs), AxisAssignment::Signs(x)) = (tensor.as_signs(), assignment) {
        return Ok(Complex64::new(evaluate_signs(signs, x) as f64, 0.0));
    }
    let data = tensor.to_complex();
    let vectors = assignment.to_complex();
    let last = shape.order() - 1;
    let b = contract_all_but(&data, shape.dims(), &vectors, last);
    Ok(b.iter().zip(&vectors[last]).map(|(&b, &x)| b * x).sum())
}

/// Exact integer evaluation. Lengths must already be checked.
pub(crate) fn evaluate_signs(tensor: &SignTensor, x: &[Vec<i8>]) -> i64 {
    let dims = tensor.shape().dims();
    let mut index = vec![0usize; dims.len()];
    let mut total = 0i64;
    for &a in tensor.entries() {
        let mut p = a as i64;
        for (k, &j) in index.iter().enumerate() {
            p *= x[k][j] as i64;
        }
        total += p;
        // odometer increment, last axis fastest
        for k in (0..dims.len()).rev() {
            index[k] += 1;
            if index[k] < dims[k] {
                break;
            }
            index[k] = 0;
        }
    }
    total
}

/// Coefficients `b_j` of the axis-`free_axis` variable once every other axis
/// is fixed: `evaluate = Σ_j b_j x^{(k)}_j`.
///
/// `others` holds exactly `m − 1` vectors, for the axes other than
/// `free_axis`, in axis order.
pub fn partial_contract<T: Coefficients + ?Sized>(
    tensor: &T,
    others: &AxisAssignment,
    free_axis: usize,
) -> Result<Vec<Complex64>> {
    let shape = tensor.shape();
    shape.check_axis(free_axis)?;
    let want: Vec<usize> = shape
        .dims()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != free_axis)
        .map(|(_, &n)| n)
        .collect();
    check_lengths(&others.lengths(), &want)?;
    let mut vectors = others.to_complex();
    vectors.insert(free_axis, Vec::new());
    Ok(contract_all_but(&tensor.to_complex(), shape.dims(), &vectors, free_axis))
}

/// ℓ₂ norm of every slice obtained by fixing `axis`.
pub fn slice_l2_profile<T: Coefficients + ?Sized>(tensor: &T, axis: usize) -> Result<Vec<f64>> {
    let shape = tensor.shape();
    shape.check_axis(axis)?;
    let n = shape.dims()[axis];
    let inner = shape.inner(axis);
    let mut sq = vec![0.0; n];
    for flat in 0..shape.len() {
        sq[(flat / inner) % n] += tensor.entry(flat).norm_sqr();
    }
    Ok(sq.into_iter().map(f64::sqrt).collect())
}
