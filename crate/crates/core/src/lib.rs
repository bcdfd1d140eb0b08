//! Quantized 2-player N-strategy symmetric games.
//!
//! A classical symmetric game with N pure strategies is lifted to a quantum
//! game by entangling an initial product state with a gate operator `J`,
//! letting each player act with an SU(N) unitary on their own factor, undoing
//! the gate and measuring in the computational basis. This crate constructs
//! the full multi-parameter family of gates that embed the classical game
//! (the `gate` module), simulates plays (`game`), quantifies entanglement of
//! the initial state (`entanglement`) and probes equilibrium structure
//! numerically (`equilibrium`). The `cli` module exposes every stage as a
//! subcommand with reproducible, seedable outputs.
//!
//! ```
//! use qgame::{GameDefinition, GateParams};
//! use qgame::game::play;
//! use qgame::gate::{build_gate, build_shift_strategies};
//!
//! // the usual dilemma payoffs behind a maximally entangling gate
//! let gate = GateParams::ewl(-std::f64::consts::FRAC_PI_4);
//! let game = GameDefinition::prisoners_dilemma(gate).unwrap();
//!
//! // the classical strategies of this gate's shift matrix still reproduce
//! // the classical payoffs
//! let us = build_shift_strategies(2, game.gate().phi()).unwrap();
//! let outcome = play(&game, &us[0], &us[1]).unwrap();
//! assert!((outcome.payoff_a - 0.0).abs() < 1e-9);
//! assert!((outcome.payoff_b - 5.0).abs() < 1e-9);
//!
//! // while the initial state the players share is maximally entangled
//! let j = build_gate(game.gate()).unwrap().j;
//! let report = qgame::entanglement::analyze(&j).unwrap();
//! assert!(report.distance_to_maximal < 1e-10);
//! assert!((report.entropy - 2.0_f64.ln()).abs() < 1e-10);
//! ```

pub mod cli;
pub mod config;
pub mod entanglement;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod gate;
pub mod linalg;
pub mod optimize;
pub mod serialize;

pub use entanglement::EntanglementReport;
pub use equilibrium::{EquilibriumReport, StrategyPoint};
pub use error::{Error, Result};
pub use game::{GameDefinition, GameOutcome, Player};
pub use gate::{CartanBasis, GateBuild, GateParams};
pub use linalg::{ComplexMatrix, StateVector, Subsystem};
