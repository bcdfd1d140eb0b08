//! Entanglement of the initial game state.
//!
//! The degree of entanglement is read off the reduced density matrix of
//! `J |11>`: its spectrum, its von Neumann entropy and its Frobenius
//! distance to the maximally mixed state `1/N`, which is zero exactly at
//! maximal entanglement.

use serde::Serialize;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::initial_state;
use crate::gate::{build_gate, GateParams};
use crate::linalg::{eig_hermitian, partial_trace, ComplexMatrix, StateVector, Subsystem};
use crate::optimize::NelderMead;

/// Eigenvalues of the reduced density matrix closer than this share a
/// degeneracy class.
pub const DEGENERACY_TOL: f64 = 1e-7;
/// A gate counts as maximally entangling below this distance.
pub const MAX_ENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct EntanglementReport {
    /// Eigenvalues of the reduced density matrix, largest first.
    pub spectrum: Vec<f64>,
    /// Von Neumann entropy, natural log.
    pub entropy: f64,
    /// Frobenius distance of the reduced density matrix to 1/N.
    pub distance_to_maximal: f64,
    /// Multiplicities of the spectrum at tolerance, ascending.
    pub degeneracy_pattern: Vec<usize>,
}

/// Builds `J |11>`, traces out player B and reports the entanglement
/// structure of what player A is left with.
pub fn analyze(j: &ComplexMatrix) -> Result<EntanglementReport> {
    let psi = initial_state(j)?;
    analyze_state(&psi)
}

/// Same report computed from an already-prepared joint state.
pub fn analyze_state(psi: &StateVector) -> Result<EntanglementReport> {
    let n = integer_sqrt(psi.dim())?;
    let rho = partial_trace(&psi.density_matrix(), Subsystem::B, n)?;
    let (mut spectrum, _) = eig_hermitian(&rho)?;
    // eigendecomposition noise can push tiny eigenvalues barely negative
    for p in spectrum.iter_mut() {
        *p = p.clamp(0.0, 1.0);
    }
    spectrum.reverse();

    let entropy = -spectrum
        .iter()
        .filter(|&&p| p > 1e-12)
        .map(|&p| p * p.ln())
        .sum::<f64>();

    let uniform = ComplexMatrix::identity(n).scale(Complex64::new(1.0 / n as f64, 0.0));
    let distance_to_maximal = rho.dist(&uniform);

    let mut degeneracy_pattern = Vec::new();
    let mut run = 1usize;
    for w in spectrum.windows(2) {
        if (w[0] - w[1]).abs() <= DEGENERACY_TOL {
            run += 1;
        } else {
            degeneracy_pattern.push(run);
            run = 1;
        }
    }
    degeneracy_pattern.push(run);
    degeneracy_pattern.sort_unstable();

    Ok(EntanglementReport {
        spectrum,
        entropy,
        distance_to_maximal,
        degeneracy_pattern,
    })
}

/// Distance of the gate's initial state to maximal entanglement, the
/// objective the search below minimizes.
pub fn distance_to_maximal(params: &GateParams) -> Result<f64> {
    let build = build_gate(params)?;
    let psi = initial_state(&build.j)?;
    let n = params.n();
    // for a pure state the reduced density matrix is C C^+ with
    // C[a][b] = psi[a n + b]
    let amps = psi.amplitudes();
    let mut acc = 0.0;
    for a in 0..n {
        for ap in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for b in 0..n {
                s += amps[a * n + b] * amps[ap * n + b].conj();
            }
            if a == ap {
                s -= 1.0 / n as f64;
            }
            acc += s.norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

/// Multi-start search for gate parameters whose initial state is maximally
/// entangled. Returns every distinct solution found with distance below
/// 1e-8, canonicalized component-wise modulo 2 pi where that preserves the
/// solution, deduplicated and sorted. An empty result means the search
/// failed within its budget, not that no solution exists.
pub fn find_maximal_entanglement(
    n: usize,
    phi: &[f64],
    seeds: usize,
    evals_per_seed: usize,
    rng_seed: u64,
) -> Result<Vec<GateParams>> {
    if !(2..=6).contains(&n) {
        return Err(Error::InvalidParams(format!(
            "search supports 2 <= n <= 6, got {n}"
        )));
    }
    if phi.len() != n {
        return Err(Error::InvalidParams(format!(
            "phi must have length {n}, got {}",
            phi.len()
        )));
    }
    let dim = GateParams::free_parameter_count(n);
    let mut objective = |x: &[f64]| -> f64 {
        let params = GateParams::from_free_vector(n, phi, x).expect("dimension fixed");
        distance_to_maximal(&params).expect("valid parameters")
    };

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let optimizer = NelderMead {
        max_evals: evals_per_seed,
        x_tol: 1e-12,
        f_tol: 0.0,
        initial_step: 0.7,
    };
    let mut hits: Vec<Vec<f64>> = Vec::new();
    for _ in 0..seeds {
        let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-PI..PI)).collect();
        let result = optimizer.minimize(&mut objective, &x0);
        if result.f < MAX_ENT_TOL {
            hits.push(result.x);
        }
    }

    // canonical representative: reduce each component into [0, 2pi) when the
    // reduced point is still a solution (exact for n = 2; for larger n the
    // exponent coefficients are irrational and reduction can leave the
    // solution set, in which case the raw point is kept)
    let mut reps: Vec<Vec<f64>> = Vec::new();
    for x in hits {
        let reduced: Vec<f64> = x.iter().map(|v| v.rem_euclid(TAU)).collect();
        let rep = if objective(&reduced) < MAX_ENT_TOL {
            reduced
        } else {
            x
        };
        let duplicate = reps.iter().any(|r| {
            r.len() == rep.len()
                && r.iter().zip(&rep).all(|(a, b)| {
                    let d = (a - b).abs();
                    d.min(TAU - d.min(TAU)) < 1e-5
                })
        });
        if !duplicate {
            reps.push(rep);
        }
    }
    reps.sort_by(|a, b| a.partial_cmp(b).unwrap());

    reps.iter()
        .map(|r| GateParams::from_free_vector(n, phi, r))
        .collect()
}

fn integer_sqrt(dim: usize) -> Result<usize> {
    let n = (dim as f64).sqrt().round() as usize;
    if n * n != dim {
        return Err(Error::InvalidParams(format!(
            "joint dimension {dim} is not a perfect square"
        )));
    }
    Ok(n)
}
