//! Numerical probes of the game-theoretic structure: best responses over
//! SU(N), pure-Nash scans and the counterstrategy property at maximal
//! entanglement.
//!
//! Strategies are parameterized as `exp(i H)` with `H` a traceless Hermitian
//! matrix expanded over a fixed generator basis (generalized Gell-Mann:
//! symmetric and antisymmetric pair generators followed by the diagonal
//! ones), giving N^2 - 1 real coordinates per player.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::entanglement;
use crate::error::{Error, Result};
use crate::game::{GameDefinition, Player, PreparedGame};
use crate::gate::{build_cartan, build_gate, build_shift_strategies};
use crate::linalg::{eig_hermitian, eig_unitary, ComplexMatrix};
use crate::optimize::NelderMead;

/// Margin for counting a counterstrategy as having reached the target
/// payoff; optimizer-limited, not theory-limited.
pub const COUNTER_MARGIN: f64 = 1e-3;
/// Default improvement threshold above which a profile is refuted.
pub const DEFAULT_GAP_TOL: f64 = 1e-6;
/// Outcome mass on a single cell above which a profile counts as
/// deterministic (classical-like).
const DETERMINISTIC_MASS: f64 = 1.0 - 1e-6;

/// Generator basis of su(N): for each pair j < k the symmetric and
/// antisymmetric generators, then the N-1 diagonal ones; all normalized to
/// Tr(T_a T_b) = 2 delta_ab.
pub fn su_generators(n: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(n * n - 1);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut sym = ComplexMatrix::zeros(n, n);
            sym.set(j, k, one);
            sym.set(k, j, one);
            out.push(sym);
            let mut asym = ComplexMatrix::zeros(n, n);
            asym.set(j, k, -i);
            asym.set(k, j, i);
            out.push(asym);
        }
    }
    let cartan = build_cartan(n);
    for k in 0..n - 1 {
        out.push(cartan.matrix(k));
    }
    out
}

/// `exp(i sum_a x_a T_a)`: special unitary by construction.
pub fn su_exp(n: usize, coords: &[f64]) -> ComplexMatrix {
    let generators = su_generators(n);
    assert_eq!(coords.len(), generators.len(), "coordinate count mismatch");
    let mut h = ComplexMatrix::zeros(n, n);
    for (x, t) in coords.iter().zip(&generators) {
        h = h.add(&t.scale(Complex64::new(*x, 0.0)));
    }
    let (evals, w) = eig_hermitian(&h).expect("generator combination is Hermitian");
    let phases: Vec<Complex64> = evals
        .iter()
        .map(|&e| Complex64::from_polar(1.0, e))
        .collect();
    w.matmul(&ComplexMatrix::diagonal(&phases))
        .matmul(&w.adjoint())
}

/// Coordinates of the traceless Hermitian logarithm of a unitary. The
/// reconstruction `su_exp(n, su_log(u))` matches `u` up to a global phase
/// (an N-th root of unity when `u` itself is special unitary).
pub fn su_log(u: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = u.rows();
    let (evals, w) = eig_unitary(u)?;
    let thetas: Vec<f64> = evals.iter().map(|e| e.arg()).collect();
    let mean: f64 = thetas.iter().sum::<f64>() / n as f64;
    let h = ComplexMatrix::from_fn(n, n, |r, c| {
        let mut s = Complex64::new(0.0, 0.0);
        for (j, theta) in thetas.iter().enumerate() {
            s += w[(r, j)] * (theta - mean) * w[(c, j)].conj();
        }
        s
    });
    let generators = su_generators(n);
    Ok(generators
        .iter()
        .map(|t| (t.matmul(&h).trace() / 2.0).re)
        .collect())
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix, with the
/// positive-diagonal convention of modified Gram-Schmidt making the factor
/// unique.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let col: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(normal(rng), normal(rng)))
            .collect();
        columns.push(col);
    }
    // modified Gram-Schmidt, re-orthogonalized once
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let proj: Complex64 = columns[i]
                    .iter()
                    .zip(&columns[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let prev = columns[i].clone();
                for (x, p) in columns[j].iter_mut().zip(&prev) {
                    *x -= proj * p;
                }
            }
        }
        let norm = columns[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in columns[j].iter_mut() {
            *x /= norm;
        }
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for (j, col) in columns.iter().enumerate() {
        out.set_column(j, col);
    }
    out
}

/// Haar sample pushed into SU(N) by dividing out an N-th root of the
/// determinant phase.
pub fn haar_su(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let u = haar_unitary(n, rng);
    let det = u.det();
    u.scale(Complex64::from_polar(1.0, -det.arg() / n as f64))
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on open intervals
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// A pure quantum strategy: a special unitary and its generator coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyPoint {
    pub matrix: ComplexMatrix,
    pub parameters: Vec<f64>,
}

impl StrategyPoint {
    pub fn from_coords(n: usize, coords: &[f64]) -> Self {
        Self {
            matrix: su_exp(n, coords),
            parameters: coords.to_vec(),
        }
    }

    /// Validates unitarity (1e-9) and unit determinant (1e-8), then derives
    /// coordinates from the matrix logarithm.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        let residual = matrix.unitarity_residual();
        if residual > 1e-9 {
            return Err(Error::NotUnitary {
                residual,
                tol: 1e-9,
            });
        }
        let det = matrix.det();
        if (det - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::InvalidParams(format!(
                "strategy determinant {det} is not 1"
            )));
        }
        let parameters = su_log(&matrix)?;
        Ok(Self { matrix, parameters })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n),
            parameters: vec![0.0; n * n - 1],
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }
}

/// The classical strategies of a gate's shift matrix as strategy points.
pub fn classical_strategy_points(n: usize, phi: &[f64]) -> Result<Vec<StrategyPoint>> {
    build_shift_strategies(n, phi)?
        .into_iter()
        .map(StrategyPoint::from_matrix)
        .collect()
}

/// Outcome of a best-response optimization.
#[derive(Debug, Clone, Serialize)]
pub struct BestResponse {
    pub strategy: StrategyPoint,
    pub payoff: f64,
    pub converged: bool,
    pub evals: usize,
}

/// Maximizes the responder's expected payoff over SU(N) against a fixed
/// opponent, spending at most `budget` game evaluations across analytic
/// steering candidates, warm starts and multi-start local polish.
/// Deterministic for fixed inputs and seed.
pub fn best_response(
    game: &GameDefinition,
    opponent: &StrategyPoint,
    who: Player,
    budget: usize,
    seed: u64,
) -> Result<BestResponse> {
    let prepared = PreparedGame::new(game)?;
    Ok(best_response_prepared(
        &prepared, opponent, who, budget, seed, &[],
    ))
}

/// Like [`best_response`] but on a prepared game and with extra warm-start
/// coordinates (evaluated first, so the result never pays less than any of
/// them).
pub fn best_response_prepared(
    prepared: &PreparedGame,
    opponent: &StrategyPoint,
    who: Player,
    budget: usize,
    seed: u64,
    warm_starts: &[Vec<f64>],
) -> BestResponse {
    let n = prepared.n();
    let dim = n * n - 1;
    let mut evals = 0usize;
    let mut best_x = vec![0.0; dim];
    let mut best_f = f64::INFINITY;
    let mut any_converged = false;

    {
        // bookkeeping wrapper: every evaluation can only improve the result
        let objective = |x: &[f64], evals: &mut usize, best_x: &mut Vec<f64>, best_f: &mut f64| -> f64 {
            *evals += 1;
            let u = su_exp(n, x);
            let value = match who {
                Player::A => prepared.payoffs(&u, &opponent.matrix).0,
                Player::B => prepared.payoffs(&opponent.matrix, &u).1,
            };
            if -value < *best_f {
                *best_f = -value;
                *best_x = x.to_vec();
            }
            -value
        };

        let mut starts: Vec<Vec<f64>> = Vec::new();
        starts.extend(warm_starts.iter().cloned());
        starts.push(vec![0.0; dim]);
        starts.extend(steering_candidates(prepared, opponent, who));

        // rank the prepared starts by their own payoff before polishing
        let mut ranked: Vec<(Vec<f64>, f64)> = Vec::new();
        for x in starts {
            if evals >= budget {
                break;
            }
            let f = objective(&x, &mut evals, &mut best_x, &mut best_f);
            ranked.push((x, f));
        }
        ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        ranked.truncate(3);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let random_starts = 2usize;
        for _ in 0..random_starts {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
            ranked.push((x, f64::INFINITY));
        }

        let per_start = (budget / (ranked.len().max(1))).max(200);
        for (x0, _) in &ranked {
            if evals >= budget {
                break;
            }
            let optimizer = NelderMead {
                max_evals: (budget - evals).min(per_start),
                x_tol: 1e-10,
                f_tol: 1e-13,
                initial_step: 0.4,
            };
            let mut wrapped = |x: &[f64]| objective(x, &mut evals, &mut best_x, &mut best_f);
            any_converged |= optimizer.minimize(&mut wrapped, x0).converged;
        }
    }

    let strategy = StrategyPoint::from_coords(n, &best_x);
    let payoff = if best_f.is_finite() {
        -best_f
    } else {
        // zero budget: report the identity reply with its true payoff
        match who {
            Player::A => prepared.payoffs(&strategy.matrix, &opponent.matrix).0,
            Player::B => prepared.payoffs(&opponent.matrix, &strategy.matrix).1,
        }
    };
    BestResponse {
        strategy,
        payoff,
        converged: any_converged,
        evals,
    }
}

/// Analytic replies that steer the final state toward each basis outcome.
///
/// For target outcome |sigma sigma'> the overlap with the final state is
/// `tr(G U)` for a matrix `G` built from the gate column and the state after
/// the opponent's move; the unitary maximizing `|tr(G U)|` is the outer
/// polar factor of `G`, obtained from its singular vectors. At maximal
/// entanglement the best of these replies is exact.
fn steering_candidates(
    prepared: &PreparedGame,
    opponent: &StrategyPoint,
    who: Player,
) -> Vec<Vec<f64>> {
    let n = prepared.n();
    let psi = prepared.initial().amplitudes();
    // state after the opponent has moved, reshaped to a matrix
    let moved = match who {
        Player::B => {
            // (U_A (x) 1) psi -> U_A M
            let m = ComplexMatrix::from_fn(n, n, |a, b| psi[a * n + b]);
            opponent.matrix.matmul(&m)
        }
        Player::A => {
            // (1 (x) U_B) psi -> M U_B^T
            let m = ComplexMatrix::from_fn(n, n, |a, b| psi[a * n + b]);
            m.matmul(&opponent.matrix.transpose())
        }
    };
    let mut out = Vec::with_capacity(n * n);
    for target in 0..n * n {
        let col = prepared.gate_column(target);
        let target_m = ComplexMatrix::from_fn(n, n, |a, b| col[a * n + b]);
        let g = match who {
            Player::B => target_m.adjoint().matmul(&moved).transpose(),
            Player::A => moved.matmul(&target_m.adjoint()),
        };
        if let Some(u) = polar_maximizer(&g) {
            let det = u.det();
            let su = u.scale(Complex64::from_polar(1.0, -det.arg() / n as f64));
            if let Ok(coords) = su_log(&su) {
                out.push(coords);
            }
        }
    }
    out
}

/// The unitary maximizing `Re tr(G U)`: `V W^+` where `G = W S V^+` is the
/// singular value decomposition. Returns `None` for (numerically) rank
/// deficient `G`, where the maximizer is not unique.
fn polar_maximizer(g: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = g.rows();
    let gram = g.adjoint().matmul(g);
    let (evals, v) = eig_hermitian(&gram).ok()?;
    let max = evals.last().copied()?.max(0.0);
    if max <= 0.0 {
        return None;
    }
    let mut w = ComplexMatrix::zeros(n, n);
    for (j, &ev) in evals.iter().enumerate() {
        let sigma = ev.max(0.0).sqrt();
        if sigma < 1e-9 * max.sqrt() {
            return None;
        }
        let col = g.apply(&v.column(j));
        let scaled: Vec<Complex64> = col.iter().map(|z| z / sigma).collect();
        w.set_column(j, &scaled);
    }
    Some(v.matmul(&w.adjoint()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    EquilibriumCandidate,
    Refuted,
}

/// One examined strategy profile with the unilateral improvement each player
/// could still reach.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileRecord {
    pub strategy_a: StrategyPoint,
    pub strategy_b: StrategyPoint,
    pub payoff_a: f64,
    pub payoff_b: f64,
    pub gap_a: f64,
    pub gap_b: f64,
    pub verdict: Verdict,
    /// One-based (sigma, sigma') when the outcome distribution sits on a
    /// single cell, i.e. the profile plays like a classical pure profile.
    pub deterministic_outcome: Option<(usize, usize)>,
}

/// One counterstrategy trial: a random opponent and how close the optimized
/// reply came to the best payoff in the responder's table.
#[derive(Debug, Clone, Serialize)]
pub struct CounterstrategyRecord {
    pub opponent: StrategyPoint,
    pub achieved_payoff: f64,
    pub target_payoff: f64,
    pub success: bool,
}

/// Aggregated result of a Nash scan or a counterstrategy check.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub profiles: Vec<ProfileRecord>,
    pub counterstrategies: Vec<CounterstrategyRecord>,
    pub equilibrium_candidates: usize,
    pub refuted: usize,
    pub successes: usize,
    pub all_succeeded: bool,
    pub gap_tol: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl EquilibriumReport {
    pub fn profiles_examined(&self) -> usize {
        self.profiles.len()
    }

    fn new(gap_tol: f64) -> Self {
        Self {
            profiles: Vec::new(),
            counterstrategies: Vec::new(),
            equilibrium_candidates: 0,
            refuted: 0,
            successes: 0,
            all_succeeded: true,
            gap_tol,
            converged: true,
            warnings: Vec::new(),
        }
    }
}

/// How `nash_scan` draws profiles.
#[derive(Debug, Clone, Serialize)]
pub enum SamplingSpec {
    /// The N classical strategies; deviations enumerate the same finite set.
    Classical,
    /// Haar-random SU(N) profiles; deviations are optimized over all of
    /// SU(N) with the given budget per response.
    Haar { count: usize, seed: u64, budget: usize },
}

/// Examines pure strategy profiles and refutes every profile where either
/// player has a unilateral improvement larger than `gap_tol`.
pub fn nash_scan(
    game: &GameDefinition,
    sampling: &SamplingSpec,
    gap_tol: f64,
) -> Result<EquilibriumReport> {
    if !gap_tol.is_finite() || gap_tol <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "gap tolerance must be positive, got {gap_tol}"
        )));
    }
    let prepared = PreparedGame::new(game)?;
    let n = game.n();
    let mut report = EquilibriumReport::new(gap_tol);

    match sampling {
        SamplingSpec::Classical => {
            let points = classical_strategy_points(n, game.gate().phi())?;
            for a in &points {
                for b in &points {
                    let outcome = prepared.play_unchecked(&a.matrix, &b.matrix);
                    let best_a = points
                        .iter()
                        .map(|dev| prepared.payoffs(&dev.matrix, &b.matrix).0)
                        .fold(f64::NEG_INFINITY, f64::max);
                    let best_b = points
                        .iter()
                        .map(|dev| prepared.payoffs(&a.matrix, &dev.matrix).1)
                        .fold(f64::NEG_INFINITY, f64::max);
                    push_profile(
                        &mut report,
                        n,
                        a.clone(),
                        b.clone(),
                        outcome.payoff_a,
                        outcome.payoff_b,
                        (best_a - outcome.payoff_a).max(0.0),
                        (best_b - outcome.payoff_b).max(0.0),
                        &outcome.probabilities,
                        gap_tol,
                    );
                }
            }
        }
        SamplingSpec::Haar {
            count,
            seed,
            budget,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for trial in 0..*count {
                let a = StrategyPoint::from_matrix(haar_su(n, &mut rng))?;
                let b = StrategyPoint::from_matrix(haar_su(n, &mut rng))?;
                let outcome = prepared.play_unchecked(&a.matrix, &b.matrix);
                let br_a = best_response_prepared(
                    &prepared,
                    &b,
                    Player::A,
                    *budget,
                    seed.wrapping_add(2 * trial as u64 + 1),
                    std::slice::from_ref(&a.parameters),
                );
                let br_b = best_response_prepared(
                    &prepared,
                    &a,
                    Player::B,
                    *budget,
                    seed.wrapping_add(2 * trial as u64 + 2),
                    std::slice::from_ref(&b.parameters),
                );
                report.converged &= br_a.converged && br_b.converged;
                push_profile(
                    &mut report,
                    n,
                    a,
                    b,
                    outcome.payoff_a,
                    outcome.payoff_b,
                    (br_a.payoff - outcome.payoff_a).max(0.0),
                    (br_b.payoff - outcome.payoff_b).max(0.0),
                    &outcome.probabilities,
                    gap_tol,
                );
            }
        }
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn push_profile(
    report: &mut EquilibriumReport,
    n: usize,
    strategy_a: StrategyPoint,
    strategy_b: StrategyPoint,
    payoff_a: f64,
    payoff_b: f64,
    gap_a: f64,
    gap_b: f64,
    probabilities: &[f64],
    gap_tol: f64,
) {
    let verdict = if gap_a > gap_tol || gap_b > gap_tol {
        Verdict::Refuted
    } else {
        Verdict::EquilibriumCandidate
    };
    match verdict {
        Verdict::Refuted => report.refuted += 1,
        Verdict::EquilibriumCandidate => report.equilibrium_candidates += 1,
    }
    let deterministic_outcome = probabilities
        .iter()
        .enumerate()
        .find(|(_, &p)| p >= DETERMINISTIC_MASS)
        .map(|(idx, _)| (idx / n + 1, idx % n + 1));
    report.profiles.push(ProfileRecord {
        strategy_a,
        strategy_b,
        payoff_a,
        payoff_b,
        gap_a,
        gap_b,
        verdict,
        deterministic_outcome,
    });
}

/// Samples Haar-random opponents and checks that the responder (player B)
/// can always be steered to the best entry of their payoff table. Attaches a
/// warning when the gate is not verified maximally entangling, since the
/// property is only claimed there.
pub fn counterstrategy_check(
    game: &GameDefinition,
    trials: usize,
    budget: usize,
    seed: u64,
) -> Result<EquilibriumReport> {
    let prepared = PreparedGame::new(game)?;
    let n = game.n();
    let mut report = EquilibriumReport::new(DEFAULT_GAP_TOL);

    let build = build_gate(game.gate())?;
    let ent = entanglement::analyze(&build.j)?;
    if ent.distance_to_maximal >= entanglement::MAX_ENT_TOL {
        report.warnings.push(format!(
            "gate is not verified maximally entangling (distance {:.3e}); the counterstrategy property is only claimed at maximal entanglement",
            ent.distance_to_maximal
        ));
    }

    let target = game.max_payoff_b();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let opponent = StrategyPoint::from_matrix(haar_su(n, &mut rng))?;
        let br = best_response_prepared(
            &prepared,
            &opponent,
            Player::B,
            budget,
            seed.wrapping_add(trial as u64 + 1),
            &[],
        );
        let success = br.payoff >= target - COUNTER_MARGIN;
        report.converged &= br.converged;
        if success {
            report.successes += 1;
        }
        report.all_succeeded &= success;
        report.counterstrategies.push(CounterstrategyRecord {
            opponent,
            achieved_payoff: br.payoff,
            target_payoff: target,
            success,
        });
    }
    report.all_succeeded &= trials > 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateParams;
    use proptest::prelude::*;
    use rand::Rng;

    fn pd(gate: GateParams) -> GameDefinition {
        GameDefinition::prisoners_dilemma(gate).unwrap()
    }

    fn max_ent_two() -> GateParams {
        // lambda = -pi/4 with flip phases reproduces the reference gate at
        // gamma = pi/2
        GateParams::ewl(-std::f64::consts::FRAC_PI_4)
    }

    #[test]
    fn generator_basis_is_orthonormal() {
        for n in 2..=4 {
            let gens = su_generators(n);
            assert_eq!(gens.len(), n * n - 1);
            for (a, ta) in gens.iter().enumerate() {
                assert!(ta.is_hermitian(1e-15));
                assert!(ta.trace().norm() < 1e-14);
                for (b, tb) in gens.iter().enumerate() {
                    let dot = ta.matmul(tb).trace();
                    let expected = if a == b { 2.0 } else { 0.0 };
                    assert!((dot - Complex64::new(expected, 0.0)).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn su_exp_lands_in_the_special_unitary_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 2..=4 {
            for _ in 0..10 {
                let coords: Vec<f64> =
                    (0..n * n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let u = su_exp(n, &coords);
                assert!(u.is_unitary(1e-12));
                assert!((u.det() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn haar_samples_are_special_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [2usize, 3, 5] {
            for _ in 0..50 {
                let u = haar_su(n, &mut rng);
                assert!(u.is_unitary(1e-9));
                assert!((u.det() - Complex64::new(1.0, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn haar_entry_mass_matches_beta_law() {
        // |u_00|^2 of a Haar unitary is Beta(1, n-1): mean 1/n, known variance
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let samples = 10_000usize;
        for n in [2usize, 3] {
            let mut sum = 0.0;
            for _ in 0..samples {
                let u = haar_su(n, &mut rng);
                sum += u[(0, 0)].norm_sqr();
            }
            let mean = sum / samples as f64;
            let variance =
                (n as f64 - 1.0) / ((n * n) as f64 * (n as f64 + 1.0));
            let standard_error = (variance / samples as f64).sqrt();
            assert!(
                (mean - 1.0 / n as f64).abs() < 3.0 * standard_error,
                "n = {n}: mean {mean}"
            );
        }
    }

    #[test]
    fn su_log_round_trips_small_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for n in 2..=4 {
            for _ in 0..10 {
                let coords: Vec<f64> =
                    (0..n * n - 1).map(|_| rng.gen_range(-0.25..0.25)).collect();
                let u = su_exp(n, &coords);
                let recovered = su_log(&u).unwrap();
                for (a, b) in coords.iter().zip(&recovered) {
                    assert!((a - b).abs() < 1e-9, "n = {n}");
                }
            }
        }
    }

    #[test]
    fn su_log_reconstructs_up_to_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for n in 2..=4 {
            let u = haar_su(n, &mut rng);
            let coords = su_log(&u).unwrap();
            let rebuilt = su_exp(n, &coords);
            assert!(crate::linalg::phase_stripped_distance(&rebuilt, &u) < 1e-8);
        }
    }

    #[test]
    fn classical_defection_dominates_against_cooperation() {
        // trivial gate: the game is the classical one, and the best reply to
        // cooperate is defect with payoff 5
        let game = pd(GateParams::zero(2));
        let opponent = StrategyPoint::identity(2);
        let br = best_response(&game, &opponent, Player::B, 2000, 1).unwrap();
        assert!((br.payoff - 5.0).abs() < 1e-6, "payoff {}", br.payoff);
    }

    #[test]
    fn best_response_iteration_never_decreases() {
        let game = pd(max_ent_two());
        let opponent = StrategyPoint::identity(2);
        let first = best_response(&game, &opponent, Player::B, 1500, 2).unwrap();
        let second = best_response(&game, &first.strategy, Player::A, 1500, 3).unwrap();
        let third = best_response(&game, &second.strategy, Player::B, 1500, 4).unwrap();
        assert!(third.payoff >= first.payoff - 1e-9);
    }

    #[test]
    fn best_response_is_deterministic() {
        let game = pd(max_ent_two());
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let opponent = StrategyPoint::from_matrix(haar_su(2, &mut rng)).unwrap();
        let a = best_response(&game, &opponent, Player::B, 1200, 9).unwrap();
        let b = best_response(&game, &opponent, Player::B, 1200, 9).unwrap();
        assert_eq!(a.payoff.to_bits(), b.payoff.to_bits());
        assert_eq!(a.strategy.parameters, b.strategy.parameters);
    }

    #[test]
    fn counterstrategies_succeed_at_maximal_entanglement() {
        let game = pd(max_ent_two());
        let report = counterstrategy_check(&game, 10, 1500, 5).unwrap();
        assert!(report.warnings.is_empty());
        assert!(report.all_succeeded, "failures: {:?}",
            report.counterstrategies.iter().filter(|r| !r.success).count());
        for record in &report.counterstrategies {
            assert!(record.achieved_payoff >= 5.0 - COUNTER_MARGIN);
        }
    }

    #[test]
    fn counterstrategies_fail_without_entanglement() {
        // against a defecting opponent in the classical game the best reply
        // earns 1, far from the target 5, and a warning is attached
        let game = pd(GateParams::zero(2));
        let defect = classical_strategy_points(2, &[0.0, 0.0]).unwrap().remove(1);
        let br = best_response(&game, &defect, Player::B, 2000, 6).unwrap();
        assert!((br.payoff - 1.0).abs() < 1e-6);

        let report = counterstrategy_check(&game, 5, 800, 7).unwrap();
        assert!(!report.warnings.is_empty());
        assert!(!report.all_succeeded);
    }

    #[test]
    fn classical_scan_finds_the_dilemma_equilibrium() {
        let game = pd(GateParams::zero(2));
        let report = nash_scan(&game, &SamplingSpec::Classical, 1e-6).unwrap();
        assert_eq!(report.profiles_examined(), 4);
        assert_eq!(report.equilibrium_candidates, 1);
        let candidate = report
            .profiles
            .iter()
            .find(|p| p.verdict == Verdict::EquilibriumCandidate)
            .unwrap();
        // defect-defect, the classical equilibrium
        assert_eq!(candidate.deterministic_outcome, Some((2, 2)));
        // cross-check against the payoff matrices directly
        let classical = classical_pure_nash(&game);
        assert_eq!(classical, vec![(1, 1)]);
    }

    #[test]
    fn classical_scan_matches_exhaustive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for n in [2usize, 3] {
            let payoff: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(0..6) as f64).collect())
                .collect();
            let game =
                GameDefinition::symmetric(n, payoff, GateParams::zero(n)).unwrap();
            let report = nash_scan(&game, &SamplingSpec::Classical, 1e-6).unwrap();
            let from_scan: Vec<(usize, usize)> = report
                .profiles
                .iter()
                .enumerate()
                .filter(|(_, p)| p.verdict == Verdict::EquilibriumCandidate)
                .map(|(idx, _)| (idx / n, idx % n))
                .collect();
            assert_eq!(from_scan, classical_pure_nash(&game), "n = {n}");
        }
    }

    #[test]
    fn haar_scan_refutes_profiles_at_maximal_entanglement() {
        let game = pd(max_ent_two());
        let spec = SamplingSpec::Haar {
            count: 8,
            seed: 48,
            budget: 1200,
        };
        let report = nash_scan(&game, &spec, 1e-6).unwrap();
        assert_eq!(report.profiles_examined(), 8);
        assert_eq!(report.equilibrium_candidates, 0);
        for p in &report.profiles {
            assert!(p.gap_a >= -1e-9 && p.gap_b >= -1e-9);
            assert!(p.gap_a > 1e-6 || p.gap_b > 1e-6);
        }
    }

    #[test]
    fn empty_sampling_yields_empty_report() {
        let game = pd(max_ent_two());
        let spec = SamplingSpec::Haar {
            count: 0,
            seed: 0,
            budget: 100,
        };
        let report = nash_scan(&game, &spec, 1e-6).unwrap();
        assert_eq!(report.profiles_examined(), 0);
        assert_eq!(report.equilibrium_candidates, 0);
    }

    #[test]
    fn scan_reports_are_deterministic() {
        let game = pd(max_ent_two());
        let spec = SamplingSpec::Haar {
            count: 3,
            seed: 49,
            budget: 600,
        };
        let a = serde_json::to_string(&nash_scan(&game, &spec, 1e-6).unwrap()).unwrap();
        let b = serde_json::to_string(&nash_scan(&game, &spec, 1e-6).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    /// Pure Nash equilibria of the classical payoff matrices by direct
    /// enumeration, zero-based; the oracle for the classical scans.
    fn classical_pure_nash(game: &GameDefinition) -> Vec<(usize, usize)> {
        let n = game.n();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let best_a = (0..n)
                    .map(|d| game.payoff_a(d, b))
                    .fold(f64::NEG_INFINITY, f64::max);
                let best_b = (0..n)
                    .map(|d| game.payoff_b(a, d))
                    .fold(f64::NEG_INFINITY, f64::max);
                if game.payoff_a(a, b) >= best_a - 1e-12 && game.payoff_b(a, b) >= best_b - 1e-12 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn haar_points_satisfy_strategy_invariants(seed in 0u64..100_000, n in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let point = StrategyPoint::from_matrix(haar_su(n, &mut rng)).unwrap();
            prop_assert!(point.matrix.is_unitary(1e-9));
            prop_assert_eq!(point.parameters.len(), n * n - 1);
        }
    }
}
