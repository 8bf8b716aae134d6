//! The ±1 light game.
//!
//! Switches on axis `k` negate every light whose `k`-th coordinate matches.
//! The best reachable imbalance of a pattern is the sign-vector norm of its
//! multilinear form; the worst pattern of a shape minimises that norm.
//!
//! Exact solving enumerates the switches of every axis but one in reflected
//! Gray-code order and closes the remaining axis in closed form: with the
//! other switches fixed, the light sum is `Σ_j b_j y_j`, maximised in absolute
//! value by `y_j = sign(b_j)` for a value of `Σ_j |b_j|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{search_chunks, Best, Goal};
use crate::tensor::{contract_all_but, AxisAssignment, Coefficients, Shape, SignTensor};

/// Default cap on the number of switches enumerated by the exact solver, and
/// on the number of free entries in an exact worst-pattern sweep.
pub const DEFAULT_BIT_BUDGET: u32 = 30;

/// Enumerations shorter than this run on the calling thread.
const PAR_CHUNK: u64 = 1 << 12;

/// A light pattern: `+1` is on, `−1` is off.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LightPattern {
    tensor: SignTensor,
}

impl LightPattern {
    pub fn new(tensor: SignTensor) -> Self {
        Self { tensor }
    }

    pub fn all_on(shape: Shape) -> Self {
        Self::new(SignTensor::all_ones(shape))
    }

    /// Uniformly random pattern from a seeded generator.
    pub fn random(shape: Shape, rng: &mut impl Rng) -> Self {
        let entries = (0..shape.len()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self::new(SignTensor::new(shape, entries).expect("entries are ±1 and sized to the shape"))
    }

    pub fn tensor(&self) -> &SignTensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> SignTensor {
        self.tensor
    }

    pub fn shape(&self) -> &Shape {
        self.tensor.shape()
    }

    /// Lights currently on.
    pub fn lights_on(&self) -> usize {
        self.tensor.entries().iter().filter(|&&e| e > 0).count()
    }

    /// Bit-packed rows of a matrix pattern: bit `j` of row `i` is set when
    /// light `(i, j)` is on. Only available for two axes with at most 64
    /// columns.
    pub fn packed_rows(&self) -> Option<Vec<u64>> {
        let dims = self.shape().dims();
        if dims.len() != 2 || dims[1] > 64 {
            return None;
        }
        Some(
            self.tensor
                .entries()
                .chunks(dims[1])
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .fold(0u64, |acc, (j, &e)| if e > 0 { acc | (1 << j) } else { acc })
                })
                .collect(),
        )
    }

    /// Inverse of [`LightPattern::packed_rows`].
    pub fn from_packed_rows(columns: usize, rows: &[u64]) -> Result<Self> {
        if columns == 0 || columns > 64 {
            return Err(Error::Dimension(format!("cannot pack {columns} columns into u64 rows")));
        }
        let shape = Shape::new(vec![rows.len(), columns])?;
        let entries = rows
            .iter()
            .flat_map(|&bits| (0..columns).map(move |j| if bits >> j & 1 == 1 { 1 } else { -1 }))
            .collect();
        Ok(Self::new(SignTensor::new(shape, entries)?))
    }
}

/// Switch settings, one ±1 vector per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SwitchPlan(Vec<Vec<i8>>);

impl SwitchPlan {
    pub fn new(switches: Vec<Vec<i8>>) -> Result<Self> {
        AxisAssignment::signs(switches.clone())?;
        Ok(Self(switches))
    }

    /// No switch pulled.
    pub fn identity(shape: &Shape) -> Self {
        Self(shape.dims().iter().map(|&n| vec![1; n]).collect())
    }

    pub fn switches(&self) -> &[Vec<i8>] {
        &self.0
    }

    pub fn to_assignment(&self) -> AxisAssignment {
        AxisAssignment::Signs(self.0.clone())
    }

    fn check_against(&self, shape: &Shape) -> Result<()> {
        self.to_assignment().check_against(shape)
    }
}

/// Best imbalance of a pattern together with the plan reaching it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameResult {
    #[serde(rename = "value")]
    pub imbalance: u64,
    #[serde(rename = "witness_plan")]
    pub witness: SwitchPlan,
    /// `(n₁⋯n_m − imbalance) / 2`: the fewest lights that can be left on.
    pub lights_remaining: u64,
}

impl GameResult {
    fn new(shape: &Shape, imbalance: u64, witness: SwitchPlan) -> Self {
        let total = shape.len() as u64;
        debug_assert_eq!((total - imbalance) % 2, 0);
        Self { imbalance, witness, lights_remaining: (total - imbalance) / 2 }
    }
}

/// Negates every light by the product of the switches on its lines.
pub fn apply_switches(pattern: &LightPattern, plan: &SwitchPlan) -> Result<LightPattern> {
    let shape = pattern.shape();
    plan.check_against(shape)?;
    let mut out = pattern.tensor.clone();
    let dims = shape.dims();
    let mut index = vec![0usize; dims.len()];
    for e in out.entries_mut() {
        for (k, &j) in index.iter().enumerate() {
            *e *= plan.0[k][j];
        }
        for k in (0..dims.len()).rev() {
            index[k] += 1;
            if index[k] < dims[k] {
                break;
            }
            index[k] = 0;
        }
    }
    Ok(LightPattern::new(out))
}

/// Precomputed enumeration layout for one shape.
///
/// The closed axis is the largest one (the last of equals). The remaining
/// axes form "rows": every multi-index over them owns a vector along the
/// closed axis. Enumerated switch coordinates are laid out axis by axis and
/// each one knows which rows it negates.
struct Layout {
    shape: Shape,
    closed: usize,
    enumerated: Vec<usize>,
    /// `(axis, index)` of each enumerated switch.
    coords: Vec<(usize, usize)>,
    /// Rows touched by each enumerated switch.
    members: Vec<Vec<u32>>,
    rows: usize,
    width: usize,
}

impl Layout {
    fn new(shape: &Shape, bit_budget: u32) -> Result<Self> {
        let dims = shape.dims();
        let closed = (0..dims.len()).rev().max_by_key(|&k| dims[k]).expect("non-empty shape");
        let enumerated: Vec<usize> = (0..dims.len()).filter(|&k| k != closed).collect();
        let bits: usize = enumerated.iter().map(|&k| dims[k]).sum();
        if bits > bit_budget as usize {
            return Err(Error::Capacity(format!(
                "exact solve of shape {shape} enumerates {bits} switches, budget is {bit_budget}"
            )));
        }
        let row_dims: Vec<usize> = enumerated.iter().map(|&k| dims[k]).collect();
        let rows: usize = row_dims.iter().product();
        let mut coords = Vec::with_capacity(bits);
        let mut members = Vec::with_capacity(bits);
        for (pos, &k) in enumerated.iter().enumerate() {
            let inner: usize = row_dims[pos + 1..].iter().product();
            for j in 0..dims[k] {
                coords.push((k, j));
                members.push(
                    (0..rows)
                        .filter(|r| (r / inner) % dims[k] == j)
                        .map(|r| r as u32)
                        .collect(),
                );
            }
        }
        Ok(Self {
            shape: shape.clone(),
            closed,
            enumerated,
            coords,
            members,
            rows,
            width: dims[closed],
        })
    }

    fn bits(&self) -> usize {
        self.coords.len()
    }

    /// Row vectors of `entries`, `rows × width`, row-major.
    fn row_vectors(&self, entries: &[i8]) -> Vec<i32> {
        let dims = self.shape.dims();
        let inner_closed = self.shape.inner(self.closed);
        let mut out = vec![0i32; self.rows * self.width];
        for (flat, &e) in entries.iter().enumerate() {
            let idx = self.shape.multi_index(flat);
            let mut r = 0;
            for &k in &self.enumerated {
                r = r * dims[k] + idx[k];
            }
            let j = (flat / inner_closed) % dims[self.closed];
            out[r * self.width + j] = e as i32;
        }
        out
    }

    /// Switch values of the enumerated coordinates at Gray index `i`. The
    /// first coordinate is pinned to +1; bit `p` of the Gray code drives
    /// coordinate `p + 1`.
    fn gray_signs(&self, i: u64) -> Vec<i8> {
        let g = i ^ (i >> 1);
        let mut s = vec![1i8; self.bits()];
        for (p, v) in s.iter_mut().enumerate().skip(1) {
            if g >> (p - 1) & 1 == 1 {
                *v = -1;
            }
        }
        s
    }

    /// Row products and closed-axis coefficients for a full switch setting.
    fn state(&self, rowvecs: &[i32], signs: &[i8]) -> (Vec<i32>, Vec<i64>) {
        let mut prod = vec![1i32; self.rows];
        for (t, rows) in self.members.iter().enumerate() {
            if signs[t] < 0 {
                for &r in rows {
                    prod[r as usize] = -prod[r as usize];
                }
            }
        }
        let mut b = vec![0i64; self.width];
        for (r, &p) in prod.iter().enumerate() {
            for (bj, &a) in b.iter_mut().zip(&rowvecs[r * self.width..(r + 1) * self.width]) {
                *bj += (p * a) as i64;
            }
        }
        (prod, b)
    }

    fn states(&self) -> u64 {
        if self.bits() == 0 {
            1
        } else {
            1u64 << (self.bits() - 1)
        }
    }

    /// Best value over Gray indices in `range`, scanning sequentially.
    fn scan(&self, rowvecs: &[i32], range: std::ops::Range<u64>) -> Option<Best<i64>> {
        if range.is_empty() {
            return None;
        }
        let (mut prod, mut b) = self.state(rowvecs, &self.gray_signs(range.start));
        let mut best: Option<Best<i64>> = None;
        let mut i = range.start;
        loop {
            let value: i64 = b.iter().map(|v| v.abs()).sum();
            if best.as_ref().is_none_or(|bst| value > bst.key) {
                best = Some(Best { key: value, index: i });
            }
            i += 1;
            if i >= range.end {
                break;
            }
            let coord = (i.trailing_zeros() + 1) as usize;
            for &r in &self.members[coord] {
                let r = r as usize;
                prod[r] = -prod[r];
                let p = 2 * prod[r] as i64;
                for (bj, &a) in b.iter_mut().zip(&rowvecs[r * self.width..(r + 1) * self.width]) {
                    *bj += p * a as i64;
                }
            }
        }
        best
    }

    fn best(&self, rowvecs: &[i32], parallel: bool) -> (i64, u64) {
        let total = self.states();
        let best = if parallel {
            search_chunks(total, PAR_CHUNK, Goal::Max, |r| self.scan(rowvecs, r))
        } else {
            self.scan(rowvecs, 0..total)
        }
        .expect("at least one state");
        (best.key, best.index)
    }

    fn witness(&self, rowvecs: &[i32], index: u64) -> SwitchPlan {
        let signs = self.gray_signs(index);
        let (_, b) = self.state(rowvecs, &signs);
        let mut plan = SwitchPlan::identity(&self.shape);
        for (t, &(k, j)) in self.coords.iter().enumerate() {
            plan.0[k][j] = signs[t];
        }
        for (j, &bj) in b.iter().enumerate() {
            plan.0[self.closed][j] = if bj < 0 { -1 } else { 1 };
        }
        plan
    }

    fn solve(&self, entries: &[i8], parallel: bool) -> GameResult {
        let rowvecs = self.row_vectors(entries);
        let (value, index) = self.best(&rowvecs, parallel);
        GameResult::new(&self.shape, value as u64, self.witness(&rowvecs, index))
    }
}

/// Exact best imbalance with the default switch budget.
pub fn best_imbalance_exact(pattern: &LightPattern) -> Result<GameResult> {
    best_imbalance_exact_with(pattern, DEFAULT_BIT_BUDGET)
}

/// Exact best imbalance: `max |Σ a x⁽¹⁾⋯x⁽ᵐ⁾|` over all switch plans.
///
/// Fails with a capacity error when the enumerated axes carry more than
/// `bit_budget` switches.
pub fn best_imbalance_exact_with(pattern: &LightPattern, bit_budget: u32) -> Result<GameResult> {
    let layout = Layout::new(pattern.shape(), bit_budget)?;
    Ok(layout.solve(pattern.tensor.entries(), true))
}

/// Orbit-normalised worst-pattern sweep.
///
/// Switches can turn on every light on the lines through the first corner
/// (all coordinates but one equal to the first index), and the best
/// imbalance is constant on switch orbits, so only the remaining entries
/// are enumerated.
pub fn worst_pattern_exact(shape: &Shape) -> Result<(u64, LightPattern)> {
    worst_pattern_exact_with(shape, DEFAULT_BIT_BUDGET)
}

pub fn worst_pattern_exact_with(shape: &Shape, bit_budget: u32) -> Result<(u64, LightPattern)> {
    let free: Vec<usize> = (0..shape.len())
        .filter(|&f| shape.multi_index(f).iter().filter(|&&j| j != 0).count() > 1)
        .collect();
    if free.len() > bit_budget as usize {
        return Err(Error::Capacity(format!(
            "normalized pattern space of shape {shape} has 2^{} members, budget is 2^{bit_budget}",
            free.len()
        )));
    }
    let layout = Layout::new(shape, bit_budget)?;
    let pattern_at = |t: u64| {
        let mut entries = vec![1i8; shape.len()];
        for (bit, &f) in free.iter().enumerate() {
            if t >> bit & 1 == 1 {
                entries[f] = -1;
            }
        }
        entries
    };
    let best = search_chunks(1u64 << free.len(), 256, Goal::Min, |range| {
        let mut best: Option<Best<i64>> = None;
        for t in range {
            let rowvecs = layout.row_vectors(&pattern_at(t));
            let (value, _) = layout.best(&rowvecs, false);
            if best.as_ref().is_none_or(|b| value < b.key) {
                best = Some(Best { key: value, index: t });
            }
        }
        best
    })
    .expect("at least one pattern");
    let witness = SignTensor::new(shape.clone(), pattern_at(best.index))?;
    Ok((best.key as u64, LightPattern::new(witness)))
}

/// Randomised upper estimate of the worst-pattern value.
///
/// Visits patterns from seeded random starts followed by first-improvement
/// single-light descent, evaluating each visited pattern exactly. Exactly
/// `budget` patterns are evaluated (fewer only if the sequence is cut
/// short), and the visit sequence for a smaller budget is a prefix of the
/// one for a larger budget.
pub fn worst_pattern_search(shape: &Shape, budget: u64, seed: u64) -> Result<(u64, LightPattern)> {
    if budget == 0 {
        return Err(Error::InvalidValue("search budget must be at least 1".into()));
    }
    let layout = Layout::new(shape, DEFAULT_BIT_BUDGET)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = |entries: &[i8]| layout.best(&layout.row_vectors(entries), false).0;
    let mut evals = 0u64;
    let mut best: Option<(i64, Vec<i8>)> = None;
    let consider = |value: i64, entries: &[i8], best: &mut Option<(i64, Vec<i8>)>| {
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            *best = Some((value, entries.to_vec()));
        }
    };
    while evals < budget {
        let mut current: Vec<i8> =
            (0..shape.len()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let mut value = eval(&current);
        evals += 1;
        consider(value, &current, &mut best);
        let mut improved = true;
        while improved && evals < budget {
            improved = false;
            for f in 0..shape.len() {
                if evals >= budget {
                    break;
                }
                current[f] = -current[f];
                let v = eval(&current);
                evals += 1;
                if v < value {
                    value = v;
                    improved = true;
                    consider(v, &current, &mut best);
                } else {
                    current[f] = -current[f];
                }
            }
        }
    }
    let (value, entries) = best.expect("budget ≥ 1");
    Ok((value as u64, LightPattern::new(SignTensor::new(shape.clone(), entries)?)))
}

/// Alternating sign ascent: a lower bound on the best imbalance for boards
/// too large for [`best_imbalance_exact`].
///
/// Each step fixes every axis but one and sets that axis to the signs of its
/// coefficients. Restart 0 starts from the identity plan, later restarts
/// from seeded random plans.
pub fn best_imbalance_heuristic(pattern: &LightPattern, restarts: u32, seed: u64) -> Result<GameResult> {
    let shape = pattern.shape();
    let data = pattern.tensor.to_complex();
    let dims = shape.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(i64, SwitchPlan)> = None;
    for restart in 0..restarts.max(1) {
        let mut plan = SwitchPlan::identity(shape);
        if restart > 0 {
            for v in plan.0.iter_mut().flatten() {
                *v = if rng.random::<bool>() { 1 } else { -1 };
            }
        }
        let mut value = crate::tensor::evaluate_signs(&pattern.tensor, &plan.0).abs();
        loop {
            let before = value;
            for k in 0..dims.len() {
                let vectors = plan.to_assignment().to_complex();
                let b = contract_all_but(&data, dims, &vectors, k);
                for (x, bj) in plan.0[k].iter_mut().zip(&b) {
                    if bj.re != 0.0 {
                        *x = if bj.re < 0.0 { -1 } else { 1 };
                    }
                }
                value = b.iter().map(|bj| bj.re.abs().round() as i64).sum();
            }
            if value <= before {
                break;
            }
        }
        let exact = crate::tensor::evaluate_signs(&pattern.tensor, &plan.0).abs();
        if best.as_ref().is_none_or(|(v, _)| exact > *v) {
            best = Some((exact, plan));
        }
    }
    let (value, plan) = best.expect("at least one restart");
    Ok(GameResult::new(shape, value as u64, plan))
}
