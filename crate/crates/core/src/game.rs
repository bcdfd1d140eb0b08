//! Playing a quantum game: initial state, player moves, inverse gate,
//! measurement probabilities and expected payoffs.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gate::{build_gate, build_shift_strategies, GateParams};
use crate::linalg::{ComplexMatrix, StateVector, TOL_EXACT};

/// One of the two players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Player {
    A,
    B,
}

/// A 2-player N-strategy game plus the gate parameters that quantize it.
///
/// Payoff matrices are indexed `[sigma][sigma']` (row: player A's strategy,
/// column: player B's), stored row-major.
#[derive(Debug, Clone)]
pub struct GameDefinition {
    n: usize,
    payoff_a: Vec<f64>,
    payoff_b: Vec<f64>,
    gate: GateParams,
}

impl GameDefinition {
    pub fn new(
        n: usize,
        payoff_a: Vec<Vec<f64>>,
        payoff_b: Vec<Vec<f64>>,
        gate: GateParams,
    ) -> Result<Self> {
        if gate.n() != n {
            return Err(Error::InvalidParams(format!(
                "gate is for {} strategies but the game has {n}",
                gate.n()
            )));
        }
        let flatten = |name: &str, m: &[Vec<f64>]| -> Result<Vec<f64>> {
            if m.len() != n {
                return Err(Error::Config {
                    path: format!("game.{name}"),
                    message: format!("expected {n} rows, got {}", m.len()),
                });
            }
            let mut out = Vec::with_capacity(n * n);
            for (i, row) in m.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Config {
                        path: format!("game.{name}[{i}]"),
                        message: format!("expected {n} entries, got {}", row.len()),
                    });
                }
                for (j, &v) in row.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(Error::Config {
                            path: format!("game.{name}[{i}][{j}]"),
                            message: "payoff must be finite".into(),
                        });
                    }
                    out.push(v);
                }
            }
            Ok(out)
        };
        Ok(Self {
            n,
            payoff_a: flatten("payoff_a", &payoff_a)?,
            payoff_b: flatten("payoff_b", &payoff_b)?,
            gate,
        })
    }

    /// Symmetric game: B's payoff matrix is the transpose of A's.
    pub fn symmetric(n: usize, payoff_a: Vec<Vec<f64>>, gate: GateParams) -> Result<Self> {
        let payoff_b: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| payoff_a[j][i]).collect())
            .collect();
        Self::new(n, payoff_a, payoff_b, gate)
    }

    /// Two-strategy game from the conventional (r, s, t, p) table:
    /// both cooperate -> (r, r); A cooperates, B defects -> (s, t);
    /// A defects, B cooperates -> (t, s); both defect -> (p, p).
    pub fn from_rstp(r: f64, s: f64, t: f64, p: f64, gate: GateParams) -> Result<Self> {
        Self::symmetric(2, vec![vec![r, s], vec![t, p]], gate)
    }

    /// The usual Prisoner's Dilemma numbers (3, 0, 5, 1). A conventional
    /// demo choice, nothing more.
    pub fn prisoners_dilemma(gate: GateParams) -> Result<Self> {
        Self::from_rstp(3.0, 0.0, 5.0, 1.0, gate)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gate(&self) -> &GateParams {
        &self.gate
    }

    pub fn payoff_a(&self, sigma: usize, sigma_prime: usize) -> f64 {
        self.payoff_a[sigma * self.n + sigma_prime]
    }

    pub fn payoff_b(&self, sigma: usize, sigma_prime: usize) -> f64 {
        self.payoff_b[sigma * self.n + sigma_prime]
    }

    pub fn payoff_rows_a(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.payoff_a[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn payoff_rows_b(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.payoff_b[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn max_payoff_a(&self) -> f64 {
        self.payoff_a.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_payoff_b(&self) -> f64 {
        self.payoff_b.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| self.payoff_a[i * self.n + j] == self.payoff_b[j * self.n + i])
        })
    }

    /// The same payoffs under a different gate.
    pub fn with_gate(&self, gate: GateParams) -> Result<Self> {
        if gate.n() != self.n {
            return Err(Error::InvalidParams(format!(
                "gate is for {} strategies but the game has {}",
                gate.n(),
                self.n
            )));
        }
        Ok(Self {
            gate,
            ..self.clone()
        })
    }
}

/// Result of one play: final state, outcome distribution and both payoffs.
#[derive(Debug, Clone, Serialize)]
pub struct GameOutcome {
    pub final_state: StateVector,
    /// `P[sigma][sigma']`, row-major, sums to 1.
    pub probabilities: Vec<f64>,
    pub payoff_a: f64,
    pub payoff_b: f64,
}

/// A game with its gate already assembled, ready for many plays.
#[derive(Debug, Clone)]
pub struct PreparedGame {
    n: usize,
    j_dagger: ComplexMatrix,
    psi_i: StateVector,
    payoff_a: Vec<f64>,
    payoff_b: Vec<f64>,
}

impl PreparedGame {
    pub fn new(game: &GameDefinition) -> Result<Self> {
        let build = build_gate(game.gate())?;
        let psi_i = initial_state(&build.j)?;
        Ok(Self {
            n: game.n(),
            j_dagger: build.j.adjoint(),
            psi_i,
            payoff_a: game.payoff_a.clone(),
            payoff_b: game.payoff_b.clone(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn initial(&self) -> &StateVector {
        &self.psi_i
    }

    /// Column `idx` of the assembled gate, i.e. `J |sigma sigma'>` at flat
    /// index `idx`.
    pub fn gate_column(&self, idx: usize) -> Vec<Complex64> {
        // J = (J^+)^+, so J's columns are conjugated rows of the stored adjoint
        (0..self.n * self.n)
            .map(|r| self.j_dagger[(idx, r)].conj())
            .collect()
    }

    /// Full play with unitarity validation of the strategies.
    pub fn play(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<GameOutcome> {
        for u in [u_a, u_b] {
            if !u.is_square() || u.rows() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: u.rows(),
                });
            }
            let residual = u.unitarity_residual();
            if residual > TOL_EXACT {
                return Err(Error::NotUnitary {
                    residual,
                    tol: TOL_EXACT,
                });
            }
        }
        Ok(self.play_unchecked(u_a, u_b))
    }

    /// Play without re-validating the strategies; used by the optimizers,
    /// whose iterates are unitary by construction.
    pub fn play_unchecked(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> GameOutcome {
        let n = self.n;
        // (A (x) B) psi via the reshape identity: vec(A M B^T) with
        // M[a][b] = psi[a n + b]
        let psi = self.psi_i.amplitudes();
        let mut moved = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for a in 0..n {
                    let left = u_a[(i, a)];
                    if left == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for b in 0..n {
                        s += left * u_b[(j, b)] * psi[a * n + b];
                    }
                }
                moved[i * n + j] = s;
            }
        }
        let final_amplitudes = self.j_dagger.apply(&moved);
        let final_state = StateVector::new_unchecked(final_amplitudes);
        let probabilities = final_state.probabilities();
        let mut payoff_a = 0.0;
        let mut payoff_b = 0.0;
        for (idx, &p) in probabilities.iter().enumerate() {
            payoff_a += self.payoff_a[idx] * p;
            payoff_b += self.payoff_b[idx] * p;
        }
        GameOutcome {
            final_state,
            probabilities,
            payoff_a,
            payoff_b,
        }
    }

    /// Just the payoff pair; the hot path for optimizers.
    pub fn payoffs(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> (f64, f64) {
        let outcome = self.play_unchecked(u_a, u_b);
        (outcome.payoff_a, outcome.payoff_b)
    }
}

/// `J |11>`, the entangled state both players receive.
pub fn initial_state(j: &ComplexMatrix) -> Result<StateVector> {
    if !j.is_square() {
        return Err(Error::NotSquare {
            rows: j.rows(),
            cols: j.cols(),
        });
    }
    let residual = j.unitarity_residual();
    if residual > TOL_EXACT {
        return Err(Error::NotUnitary {
            residual,
            tol: TOL_EXACT,
        });
    }
    let basis = StateVector::basis(j.rows(), 0);
    Ok(StateVector::new_unchecked(j.apply(basis.amplitudes())))
}

/// Plays a full game: `psi_f = J^+ (U_A (x) U_B) J |11>` followed by a
/// computational-basis measurement and the expected-payoff sums.
pub fn play(game: &GameDefinition, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<GameOutcome> {
    PreparedGame::new(game)?.play(u_a, u_b)
}

/// Plays every pure classical strategy pair and tabulates the payoff pairs;
/// with any valid gate this reproduces the classical payoff matrices. The
/// classical strategies are the ones belonging to the gate's shift matrix,
/// so the embedding holds for generalized shift phases too.
pub fn classical_embedding_table(game: &GameDefinition) -> Result<Vec<Vec<(f64, f64)>>> {
    let prepared = PreparedGame::new(game)?;
    let strategies = build_shift_strategies(game.n(), game.gate().phi())?;
    let mut table = Vec::with_capacity(game.n());
    for us in &strategies {
        let mut row = Vec::with_capacity(game.n());
        for usp in &strategies {
            let outcome = prepared.play(us, usp)?;
            row.push((outcome.payoff_a, outcome.payoff_b));
        }
        table.push(row);
    }
    Ok(table)
}
