//! Interactive games: a board, its knob or switch history, and solver assist.
//!
//! Boards have two axes. Moves use 1-based axis and line numbers, matching
//! what a player sees on screen.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classic::{best_imbalance_exact, best_imbalance_heuristic, LightPattern};
use crate::error::{Error, Result};
use crate::tensor::{canonical_angle, evaluate, AxisAssignment, Coefficients, Shape, Tensor, UnimodularTensor};
use crate::torus::{alternating_ascent, AscentConfig};
use crate::DEFAULT_SEED;

/// Largest served board side.
pub const MAX_BOARD_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameMode {
    /// ±1 lights with line switches.
    Classic,
    /// Unit vectors with line rotation knobs.
    Vector,
}

/// A player move. `axis` and `index` are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Move {
    Flip { axis: usize, index: usize },
    Rotate { axis: usize, index: usize, angle: f64 },
}

impl Move {
    fn line(&self) -> (usize, usize) {
        match *self {
            Move::Flip { axis, index } | Move::Rotate { axis, index, .. } => (axis, index),
        }
    }
}

/// Reads a move document such as `{"kind":"flip","axis":1,"index":2}`.
pub fn parse_move(json: &str) -> Result<Move> {
    serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
}

/// Where the initial pattern comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PatternSource {
    Random { seed: u64 },
    Provided(Tensor),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameState {
    pub id: String,
    pub mode: GameMode,
    pub shape: Shape,
    /// Current board, after every logged move.
    pub pattern: Tensor,
    /// Cumulative switches (classic) or knob angles (vector).
    pub knobs: AxisAssignment,
    /// Classic: signed light sum. Vector: modulus of the vector sum.
    pub score: f64,
    pub move_log: Vec<Move>,
    pub seed: Option<u64>,
    #[serde(skip)]
    initial: Tensor,
}

/// Solver help for the current board.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assist {
    pub best_value: f64,
    /// Plan to apply to the current board.
    pub witness_plan: AxisAssignment,
    /// `(best_value − score) / best_value`, 0 when `best_value` is 0.
    pub relative_gap: f64,
    /// Whether `best_value` is the exact optimum.
    pub exact: bool,
    pub method: String,
}

/// Everything needed to restore a game: the current board in tensor
/// interchange layout (so it can be fed to the CLI as is), plus the initial
/// board and the move log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    #[serde(flatten)]
    pub pattern: Tensor,
    pub mode: GameMode,
    pub seed: Option<u64>,
    pub initial: Tensor,
    pub moves: Vec<Move>,
}

pub fn parse_snapshot(json: &str) -> Result<Snapshot> {
    serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
}

fn check_board(shape: &Shape) -> Result<()> {
    if shape.order() != 2 {
        return Err(Error::Unsupported(format!("served boards have two axes, got shape {shape}")));
    }
    if shape.max_dim() > MAX_BOARD_DIM {
        return Err(Error::Unsupported(format!("board sides are limited to {MAX_BOARD_DIM}")));
    }
    Ok(())
}

fn random_pattern(mode: GameMode, shape: &Shape, seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        GameMode::Classic => LightPattern::random(shape.clone(), &mut rng).into_tensor().into(),
        GameMode::Vector => {
            let angles = (0..shape.len()).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect();
            UnimodularTensor::new(shape.clone(), angles).expect("sized to shape").into()
        }
    }
}

fn score_of(pattern: &Tensor) -> f64 {
    match pattern {
        Tensor::Sign(t) => t.sum() as f64,
        Tensor::Unimodular(t) => t.to_complex().iter().sum::<Complex64>().norm(),
    }
}

impl GameState {
    pub fn create(id: impl Into<String>, mode: GameMode, shape: Option<Shape>, source: PatternSource) -> Result<Self> {
        let (pattern, seed) = match source {
            PatternSource::Random { seed } => {
                let shape = shape.ok_or_else(|| Error::InvalidValue("a random board needs a shape".into()))?;
                check_board(&shape)?;
                (random_pattern(mode, &shape, seed), Some(seed))
            }
            PatternSource::Provided(t) => {
                if let Some(shape) = &shape {
                    if shape != t.shape() {
                        return Err(Error::Dimension(format!(
                            "shape {shape} does not match the provided pattern {}",
                            t.shape()
                        )));
                    }
                }
                let t = match (mode, t) {
                    (GameMode::Classic, Tensor::Unimodular(_)) => {
                        return Err(Error::ModeMismatch("a classic board needs a sign pattern".into()))
                    }
                    (GameMode::Vector, Tensor::Sign(s)) => Tensor::Unimodular(UnimodularTensor::from_signs(&s)),
                    (_, t) => t,
                };
                check_board(t.shape())?;
                (t, None)
            }
        };
        let shape = pattern.shape().clone();
        let knobs = match mode {
            GameMode::Classic => AxisAssignment::unit_signs(&shape),
            GameMode::Vector => AxisAssignment::zero_phases(&shape),
        };
        Ok(Self {
            id: id.into(),
            mode,
            shape,
            score: score_of(&pattern),
            initial: pattern.clone(),
            pattern,
            knobs,
            move_log: Vec::new(),
            seed,
        })
    }

    pub fn initial_pattern(&self) -> &Tensor {
        &self.initial
    }

    /// Applies one move to the slice it names and appends it to the log.
    pub fn apply_move(&mut self, mv: Move) -> Result<()> {
        let (axis, index) = mv.line();
        let dims = self.shape.dims();
        if axis == 0 || axis > dims.len() {
            return Err(Error::Dimension(format!("axis {axis} out of range 1..={}", dims.len())));
        }
        if index == 0 || index > dims[axis - 1] {
            return Err(Error::Dimension(format!(
                "index {index} out of range 1..={} on axis {axis}",
                dims[axis - 1]
            )));
        }
        let (k, j) = (axis - 1, index - 1);
        let inner = self.shape.inner(k);
        let n = dims[k];
        let in_slice = |flat: usize| (flat / inner) % n == j;
        match (mv, &mut self.pattern, &mut self.knobs) {
            (Move::Flip { .. }, Tensor::Sign(t), AxisAssignment::Signs(x)) => {
                for (flat, e) in t.entries_mut().iter_mut().enumerate() {
                    if in_slice(flat) {
                        *e = -*e;
                    }
                }
                x[k][j] = -x[k][j];
            }
            (Move::Rotate { angle, .. }, Tensor::Unimodular(t), AxisAssignment::Phases(x)) => {
                canonical_angle(angle)?;
                for (flat, a) in t.angles_mut().iter_mut().enumerate() {
                    if in_slice(flat) {
                        *a = canonical_angle(*a + angle)?;
                    }
                }
                x[k][j] = canonical_angle(x[k][j] + angle)?;
            }
            (Move::Flip { .. }, ..) => {
                return Err(Error::ModeMismatch("flips apply to classic boards".into()))
            }
            (Move::Rotate { .. }, ..) => {
                return Err(Error::ModeMismatch("rotations apply to vector boards".into()))
            }
        }
        self.score = score_of(&self.pattern);
        self.move_log.push(mv);
        Ok(())
    }

    /// Back to the initial board with an empty log.
    pub fn reset(&mut self) {
        self.pattern = self.initial.clone();
        self.knobs = match self.mode {
            GameMode::Classic => AxisAssignment::unit_signs(&self.shape),
            GameMode::Vector => AxisAssignment::zero_phases(&self.shape),
        };
        self.score = score_of(&self.pattern);
        self.move_log.clear();
    }

    /// Rebuilds the game from its initial board and move log.
    pub fn replay(&self) -> Result<Self> {
        let mut fresh = Self::create(
            self.id.clone(),
            self.mode,
            Some(self.shape.clone()),
            PatternSource::Provided(self.initial.clone()),
        )?;
        fresh.seed = self.seed;
        for &mv in &self.move_log {
            fresh.apply_move(mv)?;
        }
        Ok(fresh)
    }

    /// `|A(knobs)|` on the initial board; equals the vector score.
    pub fn knob_value(&self) -> Result<f64> {
        Ok(evaluate(&self.initial, &self.knobs)?.norm())
    }

    /// Best value reachable from the current board.
    ///
    /// Classic boards are solved exactly when the switch budget allows and by
    /// sign ascent otherwise; vector boards use phase ascent with the default
    /// configuration.
    pub fn assist(&self) -> Result<Assist> {
        let (best_value, witness_plan, exact, method) = match &self.pattern {
            Tensor::Sign(t) => {
                let pattern = LightPattern::new(t.clone());
                match best_imbalance_exact(&pattern) {
                    Ok(r) => (r.imbalance as f64, r.witness.to_assignment(), true, "exact"),
                    Err(Error::Capacity(_)) => {
                        let r = best_imbalance_heuristic(&pattern, 50, DEFAULT_SEED)?;
                        (r.imbalance as f64, r.witness.to_assignment(), false, "sign_ascent")
                    }
                    Err(e) => return Err(e),
                }
            }
            Tensor::Unimodular(t) => {
                let est = alternating_ascent(t, &AscentConfig::default())?;
                (est.value, est.witness, false, "phase_ascent")
            }
        };
        let relative_gap = if best_value > 0.0 { (best_value - self.score) / best_value } else { 0.0 };
        Ok(Assist { best_value, witness_plan, relative_gap, exact, method: method.into() })
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            pattern: self.pattern.clone(),
            mode: self.mode,
            seed: self.seed,
            initial: self.initial.clone(),
            moves: self.move_log.clone(),
        }
    }

    /// Restores a game by replaying the snapshot's moves; the replayed board
    /// must match the stored one exactly.
    pub fn from_snapshot(id: impl Into<String>, snap: &Snapshot) -> Result<Self> {
        let mut game = Self::create(id, snap.mode, None, PatternSource::Provided(snap.initial.clone()))?;
        game.seed = snap.seed;
        for &mv in &snap.moves {
            game.apply_move(mv)?;
        }
        if game.pattern != snap.pattern {
            return Err(Error::InvalidValue("snapshot board does not match its move log".into()));
        }
        Ok(game)
    }
}

/// In-memory games. Each game has its own lock, so moves on one game are
/// serialized while different games proceed independently.
#[derive(Default)]
pub struct GameRegistry {
    games: RwLock<HashMap<String, Arc<Mutex<GameState>>>>,
    next_id: AtomicU64,
}

impl GameRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<GameState>>> {
        self.games
            .read()
            .expect("registry lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownGame(id.to_string()))
    }

    fn insert(&self, game: GameState) -> GameState {
        let out = game.clone();
        self.games
            .write()
            .expect("registry lock poisoned")
            .insert(game.id.clone(), Arc::new(Mutex::new(game)));
        out
    }

    fn fresh_id(&self) -> String {
        format!("g{}", self.next_id.fetch_add(1, Ordering::Relaxed) + 1)
    }

    pub fn create(&self, mode: GameMode, shape: Option<Shape>, source: PatternSource) -> Result<GameState> {
        let game = GameState::create(self.fresh_id(), mode, shape, source)?;
        Ok(self.insert(game))
    }

    pub fn restore(&self, snap: &Snapshot) -> Result<GameState> {
        let game = GameState::from_snapshot(self.fresh_id(), snap)?;
        Ok(self.insert(game))
    }

    pub fn get(&self, id: &str) -> Result<GameState> {
        Ok(self.slot(id)?.lock().expect("game lock poisoned").clone())
    }

    pub fn apply_move(&self, id: &str, mv: Move) -> Result<GameState> {
        let slot = self.slot(id)?;
        let mut game = slot.lock().expect("game lock poisoned");
        game.apply_move(mv)?;
        Ok(game.clone())
    }

    pub fn reset(&self, id: &str) -> Result<GameState> {
        let slot = self.slot(id)?;
        let mut game = slot.lock().expect("game lock poisoned");
        game.reset();
        Ok(game.clone())
    }

    /// Runs assist on a copy taken under the game lock, so the solver does
    /// not block moves.
    pub fn assist(&self, id: &str) -> Result<Assist> {
        let game = self.get(id)?;
        game.assist()
    }

    pub fn snapshot(&self, id: &str) -> Result<Snapshot> {
        Ok(self.get(id)?.snapshot())
    }

    pub fn len(&self) -> usize {
        self.games.read().expect("registry lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Random board of the requested mode, for callers that want a pattern
/// without a game.
pub fn random_board(mode: GameMode, shape: &Shape, seed: u64) -> Tensor {
    random_pattern(mode, shape, seed)
}

impl From<LightPattern> for Tensor {
    fn from(p: LightPattern) -> Self {
        Tensor::Sign(p.into_tensor())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::extremal_tensor;
    use crate::tensor::SignTensor;
    use std::f64::consts::{PI, SQRT_2};

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    fn sign_board(rows: &[&[i8]]) -> Result<Tensor> {
        Ok(Tensor::Sign(SignTensor::from_rows(rows)?))
    }

    #[test]
    fn create_examples() {
        let g = GameState::create("a", GameMode::Classic, None, PatternSource::Provided(sign_board(&[&[1, 1], &[1, -1]]).unwrap()))
            .unwrap();
        assert_eq!(g.score, 2.0);

        let a = GameState::create("a", GameMode::Vector, Some(shape(&[3, 4])), PatternSource::Random { seed: 7 }).unwrap();
        let b = GameState::create("b", GameMode::Vector, Some(shape(&[3, 4])), PatternSource::Random { seed: 7 }).unwrap();
        assert_eq!(a.pattern, b.pattern);

        let on = Tensor::Sign(SignTensor::all_ones(shape(&[1, 5])));
        let g = GameState::create("c", GameMode::Classic, None, PatternSource::Provided(on)).unwrap();
        assert_eq!(g.score, 5.0);
    }

    #[test]
    fn create_rejects_unsupported() {
        let cube = PatternSource::Random { seed: 1 };
        assert!(matches!(
            GameState::create("x", GameMode::Classic, Some(shape(&[2, 2, 2])), cube.clone()),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            GameState::create("x", GameMode::Classic, Some(shape(&[33, 2])), cube.clone()),
            Err(Error::Unsupported(_))
        ));
        assert!(GameState::create("x", GameMode::Classic, None, cube).is_err());
        let u = Tensor::Unimodular(UnimodularTensor::ones(shape(&[2, 2])));
        assert!(matches!(
            GameState::create("x", GameMode::Classic, None, PatternSource::Provided(u.clone())),
            Err(Error::ModeMismatch(_))
        ));
        assert!(matches!(
            GameState::create("x", GameMode::Vector, Some(shape(&[2, 3])), PatternSource::Provided(u)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn flip_move() {
        let on = Tensor::Sign(SignTensor::all_ones(shape(&[2, 2])));
        let mut g = GameState::create("a", GameMode::Classic, None, PatternSource::Provided(on)).unwrap();
        g.apply_move(Move::Flip { axis: 1, index: 1 }).unwrap();
        assert_eq!(g.pattern, sign_board(&[&[-1, -1], &[1, 1]]).unwrap());
        assert_eq!(g.score, 0.0);
        assert!(matches!(
            g.apply_move(Move::Rotate { axis: 1, index: 1, angle: 1.0 }),
            Err(Error::ModeMismatch(_))
        ));
        assert!(matches!(g.apply_move(Move::Flip { axis: 3, index: 1 }), Err(Error::Dimension(_))));
        assert!(matches!(g.apply_move(Move::Flip { axis: 1, index: 0 }), Err(Error::Dimension(_))));
        assert!(matches!(g.apply_move(Move::Flip { axis: 2, index: 3 }), Err(Error::Dimension(_))));
        assert_eq!(g.move_log.len(), 1);
    }

    #[test]
    fn rotations_undo() {
        let mut g = GameState::create("a", GameMode::Vector, Some(shape(&[3, 4])), PatternSource::Random { seed: 2 }).unwrap();
        let start = g.clone();
        g.apply_move(Move::Rotate { axis: 2, index: 3, angle: PI }).unwrap();
        g.apply_move(Move::Rotate { axis: 2, index: 3, angle: PI }).unwrap();
        g.apply_move(Move::Rotate { axis: 1, index: 2, angle: 0.4 }).unwrap();
        g.apply_move(Move::Rotate { axis: 1, index: 2, angle: -0.4 }).unwrap();
        let (Tensor::Unimodular(a), Tensor::Unimodular(b)) = (&g.pattern, &start.pattern) else { unreachable!() };
        for (x, y) in a.angles().iter().zip(b.angles()) {
            let d = (x - y).rem_euclid(std::f64::consts::TAU);
            assert!(d.min(std::f64::consts::TAU - d) < 1e-12);
        }
        assert!((g.score - start.score).abs() < 1e-12);
        assert!((g.knob_value().unwrap() - g.score).abs() < 1e-9);
    }

    #[test]
    fn replay_and_snapshot() {
        let mut g = GameState::create("a", GameMode::Vector, Some(shape(&[3, 3])), PatternSource::Random { seed: 5 }).unwrap();
        for (i, angle) in [0.3, 2.0, -1.1].into_iter().enumerate() {
            g.apply_move(Move::Rotate { axis: 1 + i % 2, index: 1 + i, angle }).unwrap();
        }
        let r = g.replay().unwrap();
        assert_eq!(r.pattern, g.pattern);
        assert_eq!(r.score, g.score);

        let json = serde_json::to_string(&g.snapshot()).unwrap();
        let snap = parse_snapshot(&json).unwrap();
        let back = GameState::from_snapshot("b", &snap).unwrap();
        assert_eq!(back.pattern, g.pattern);
        // snapshots double as tensor documents
        assert_eq!(crate::format::parse_tensor(&json).unwrap(), g.pattern);
    }

    #[test]
    fn assist_examples() {
        let g = GameState::create("a", GameMode::Classic, None, PatternSource::Provided(sign_board(&[&[1, 1], &[1, -1]]).unwrap()))
            .unwrap();
        let a = g.assist().unwrap();
        assert_eq!(a.best_value, 2.0);
        assert!(a.exact);
        assert_eq!(a.relative_gap, 0.0);

        let f = Tensor::Unimodular(extremal_tensor(&shape(&[2, 2])).unwrap());
        let g = GameState::create("b", GameMode::Vector, None, PatternSource::Provided(f)).unwrap();
        let a = g.assist().unwrap();
        assert!((a.best_value - 2.0 * SQRT_2).abs() < 1e-9);

        let big = GameState::create("c", GameMode::Classic, Some(shape(&[32, 32])), PatternSource::Random { seed: 1 }).unwrap();
        let a = big.assist().unwrap();
        assert!(!a.exact);
        assert_eq!(a.method, "sign_ascent");
    }

    #[test]
    fn registry_flow() {
        let reg = GameRegistry::new();
        let g = reg.create(GameMode::Classic, Some(shape(&[3, 3])), PatternSource::Random { seed: 4 }).unwrap();
        let after = reg.apply_move(&g.id, Move::Flip { axis: 2, index: 2 }).unwrap();
        assert_eq!(after.move_log.len(), 1);
        assert_eq!(reg.get(&g.id).unwrap(), after);
        let reset = reg.reset(&g.id).unwrap();
        assert_eq!(reset.pattern, g.pattern);
        assert!(matches!(reg.get("nope"), Err(Error::UnknownGame(_))));
        let restored = reg.restore(&reg.snapshot(&g.id).unwrap()).unwrap();
        assert_ne!(restored.id, g.id);
        assert_eq!(reg.len(), 2);
    }

    #[test]
    fn move_documents() {
        assert_eq!(parse_move(r#"{"kind":"flip","axis":1,"index":2}"#).unwrap(), Move::Flip { axis: 1, index: 2 });
        assert!(parse_move(r#"{"kind":"rotate","axis":1,"index":2}"#).is_err());
        assert!(parse_move(r#"{"kind":"flip","axis":-1,"index":2}"#).is_err());
        assert!(parse_move(r#"{"kind":"flip","axis":1,"index":2,"angle":1}"#).is_err());
    }
}
