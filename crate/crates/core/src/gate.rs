//! Construction of the multi-parameter gate operator for an N-strategy game.
//!
//! The pieces, in the order they are assembled: a cyclic shift matrix `U`
//! (optionally phase-generalized), the commuting classical-strategy unitaries
//! `U_sigma` built from its powers, the discrete-Fourier matrix `V` that
//! diagonalizes `U`, a basis of diagonal traceless generators (the Cartan
//! subalgebra of su(N)), the diagonal gate `J~` whose exponent is a symmetric
//! quadratic form in those generators, and finally
//! `J = (V (x) V) J~ (V^+ (x) V^+)`. By construction `J` commutes with
//! `U (x) 1` and `1 (x) U`, which is exactly what makes the classical pure
//! strategies survive inside the quantum game.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::linalg::{commutator, eig_unitary, kron, ComplexMatrix, StateVector, TOL_EXACT};

/// Free parameters of the gate: the diagonal quadratic form coefficients and
/// the phases of the generalized shift matrix.
///
/// `lambda` holds the N-1 same-generator couplings, `mu` the symmetric
/// off-diagonal couplings (zero diagonal), and `phi` the N shift phases. The
/// independent real parameters excluding `phi` number exactly N(N-1)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    n: usize,
    lambda: Vec<f64>,
    mu: Vec<f64>, // full (n-1) x (n-1) row-major, kept symmetric with zero diagonal
    phi: Vec<f64>,
}

impl GateParams {
    pub fn new(n: usize, lambda: Vec<f64>, mu: Vec<Vec<f64>>, phi: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!(
                "strategy count must be at least 2, got {n}"
            )));
        }
        if lambda.len() != n - 1 {
            return Err(Error::InvalidParams(format!(
                "lambda must have length {}, got {}",
                n - 1,
                lambda.len()
            )));
        }
        if phi.len() != n {
            return Err(Error::InvalidParams(format!(
                "phi must have length {n}, got {}",
                phi.len()
            )));
        }
        if mu.len() != n - 1 {
            return Err(Error::InvalidParams(format!(
                "mu must be a {0}x{0} array, got {1} rows",
                n - 1,
                mu.len()
            )));
        }
        let mut flat = vec![0.0; (n - 1) * (n - 1)];
        for (k, row) in mu.iter().enumerate() {
            if row.len() != n - 1 {
                return Err(Error::InvalidParams(format!(
                    "mu row {k} must have length {}, got {}",
                    n - 1,
                    row.len()
                )));
            }
            for (l, &v) in row.iter().enumerate() {
                flat[k * (n - 1) + l] = v;
            }
        }
        for k in 0..n - 1 {
            if flat[k * (n - 1) + k] != 0.0 {
                return Err(Error::Config {
                    path: format!("gate.mu[{k}][{k}]"),
                    message: format!("diagonal entry must be 0, got {}", flat[k * (n - 1) + k]),
                });
            }
            for l in (k + 1)..n - 1 {
                let (a, b) = (flat[k * (n - 1) + l], flat[l * (n - 1) + k]);
                if a != b {
                    return Err(Error::Config {
                        path: format!("gate.mu[{k}][{l}]"),
                        message: format!("mu must be symmetric: mu[{k}][{l}]={a} but mu[{l}][{k}]={b}"),
                    });
                }
            }
        }
        let all = lambda.iter().chain(flat.iter()).chain(phi.iter());
        for v in all {
            if !v.is_finite() {
                return Err(Error::InvalidParams("non-finite gate parameter".into()));
            }
        }
        Ok(Self {
            n,
            lambda,
            mu: flat,
            phi,
        })
    }

    /// All couplings and phases zero: the trivial gate J = 1.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            lambda: vec![0.0; n - 1],
            mu: vec![0.0; (n - 1) * (n - 1)],
            phi: vec![0.0; n],
        }
    }

    /// N=2 gate with the sign-flip shift phases (pi, 0); `lambda1` is the
    /// single free coupling.
    pub fn ewl(lambda1: f64) -> Self {
        Self {
            n: 2,
            lambda: vec![lambda1],
            mu: vec![0.0],
            phi: vec![PI, 0.0],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self, k: usize, l: usize) -> f64 {
        self.mu[k * (self.n - 1) + l]
    }

    pub fn mu_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n - 1)
            .map(|k| self.mu[k * (self.n - 1)..(k + 1) * (self.n - 1)].to_vec())
            .collect()
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Number of independent real couplings (lambda plus the upper triangle
    /// of mu): N(N-1)/2.
    pub fn free_parameter_count(n: usize) -> usize {
        n * (n - 1) / 2
    }

    /// Packs the couplings into a flat vector: lambda first, then the upper
    /// triangle of mu row by row.
    pub fn to_free_vector(&self) -> Vec<f64> {
        let m = self.n - 1;
        let mut out = self.lambda.clone();
        for k in 0..m {
            for l in (k + 1)..m {
                out.push(self.mu[k * m + l]);
            }
        }
        out
    }

    /// Inverse of [`to_free_vector`](Self::to_free_vector) for a given shift
    /// phase vector.
    pub fn from_free_vector(n: usize, phi: &[f64], free: &[f64]) -> Result<Self> {
        let expected = Self::free_parameter_count(n);
        if free.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: free.len(),
            });
        }
        if phi.len() != n {
            return Err(Error::InvalidParams(format!(
                "phi must have length {n}, got {}",
                phi.len()
            )));
        }
        let m = n - 1;
        let lambda = free[..m].to_vec();
        let mut mu = vec![0.0; m * m];
        let mut idx = m;
        for k in 0..m {
            for l in (k + 1)..m {
                mu[k * m + l] = free[idx];
                mu[l * m + k] = free[idx];
                idx += 1;
            }
        }
        Ok(Self {
            n,
            lambda,
            mu,
            phi: phi.to_vec(),
        })
    }

    pub fn has_zero_phases(&self) -> bool {
        self.phi.iter().all(|&p| p == 0.0)
    }
}

/// Basis of the diagonal traceless generators of su(N): the generalized
/// diagonal Gell-Mann matrices, normalized so that Tr(L_k L_l) = 2 delta_kl.
#[derive(Debug, Clone)]
pub struct CartanBasis {
    n: usize,
    generators: Vec<Vec<f64>>, // diagonals only
}

impl CartanBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Diagonal of the k-th generator (k = 0..N-2).
    pub fn diagonal(&self, k: usize) -> &[f64] {
        &self.generators[k]
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn matrix(&self, k: usize) -> ComplexMatrix {
        let diag: Vec<Complex64> = self.generators[k]
            .iter()
            .map(|&d| Complex64::new(d, 0.0))
            .collect();
        ComplexMatrix::diagonal(&diag)
    }
}

/// The k-th generalized diagonal Gell-Mann matrix has k ones followed by -k,
/// scaled by sqrt(2/(k(k+1))).
pub fn build_cartan(n: usize) -> CartanBasis {
    assert!(n >= 2);
    let mut generators = Vec::with_capacity(n - 1);
    for k in 1..n {
        let scale = (2.0 / (k as f64 * (k + 1) as f64)).sqrt();
        let mut diag = vec![0.0; n];
        for d in diag.iter_mut().take(k) {
            *d = scale;
        }
        diag[k] = -scale * k as f64;
        generators.push(diag);
    }
    CartanBasis { n, generators }
}

/// Cyclic shift matrix with one phase per hop: entry e^{i phi_sigma} at
/// (sigma+1, sigma) one-based, wrapping e^{i phi_N} into the top-right
/// corner. All phases zero gives the plain cyclic permutation.
pub fn build_shift(n: usize, phi: &[f64]) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "shift matrix needs n >= 2, got {n}"
        )));
    }
    if phi.len() != n {
        return Err(Error::InvalidParams(format!(
            "phi must have length {n}, got {}",
            phi.len()
        )));
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (s, &p) in phi.iter().enumerate() {
        u.set((s + 1) % n, s, Complex64::from_polar(1.0, p));
    }
    Ok(u)
}

/// The N commuting SU(N) representatives of the classical pure strategies:
/// `U_sigma = e^{i pi (N-1)(sigma-1)/N} U^{sigma-1}` over the plain shift.
/// `U_1` is the identity and `U_sigma |1> = e^{i phase_sigma} |sigma>`.
pub fn build_classical_strategies(n: usize) -> Result<Vec<ComplexMatrix>> {
    build_shift_strategies(n, &vec![0.0; n])
}

/// Classical strategies rebuilt from a generalized shift: powers of `U`
/// scaled into SU(N). The normalization reduces to the plain-shift phases
/// when all `phi` vanish, and the strategies commute with any gate built
/// over the same `phi`. For the two-strategy game with phi = (pi, 0) this
/// yields {1, D}, the familiar cooperate/defect pair.
pub fn build_shift_strategies(n: usize, phi: &[f64]) -> Result<Vec<ComplexMatrix>> {
    let u = build_shift(n, phi)?;
    let phi_sum: f64 = phi.iter().sum();
    let mut power = ComplexMatrix::identity(n);
    let mut out = Vec::with_capacity(n);
    for sigma in 1..=n {
        let k = (sigma - 1) as f64;
        let phase = classical_phase(n, sigma) - phi_sum * k / n as f64;
        out.push(power.scale(Complex64::from_polar(1.0, phase)));
        power = u.matmul(&power);
    }
    Ok(out)
}

/// Phase that puts the (sigma-1)-th shift power into SU(N):
/// pi (N-1)(sigma-1)/N.
pub fn classical_phase(n: usize, sigma: usize) -> f64 {
    PI * (n as f64 - 1.0) * (sigma as f64 - 1.0) / n as f64
}

/// Unitary DFT matrix `V_ik = epsilon-bar^{(i-1)(k-1)} / sqrt(N)` with
/// epsilon = exp(2 pi i / N); its columns are the eigenvectors of the plain
/// shift matrix, ordered by eigenvalue argument.
pub fn build_dft(n: usize) -> ComplexMatrix {
    let norm = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |i, k| {
        Complex64::from_polar(norm, -TAU * (i as f64) * (k as f64) / n as f64)
    })
}

/// Everything produced while assembling a gate.
#[derive(Debug, Clone)]
pub struct GateBuild {
    /// The assembled gate operator on the joint space.
    pub j: ComplexMatrix,
    /// Its diagonal form in the Fourier basis.
    pub j_tilde: ComplexMatrix,
    /// The single-system diagonalizer used for the conjugation.
    pub v: ComplexMatrix,
    /// The (possibly phase-generalized) shift matrix.
    pub u: ComplexMatrix,
}

/// Builds the diagonal gate and conjugates it into the computational basis.
///
/// The exponent of `J~` is the diagonal of
/// `i [ sum_k lambda_k L_k (x) L_k + sum_{k != l} mu_kl (L_k (x) L_l + L_l (x) L_k) ]`;
/// all generators are diagonal, so the exponential acts entrywise on the
/// joint diagonal. For zero shift phases the diagonalizer is the analytic
/// DFT matrix, otherwise it is computed numerically from the generalized
/// shift.
pub fn build_gate(params: &GateParams) -> Result<GateBuild> {
    let n = params.n();
    let u = build_shift(n, params.phi())?;
    let v = if params.has_zero_phases() {
        build_dft(n)
    } else {
        let (_, w) = eig_unitary(&u)?;
        w
    };
    let cartan = build_cartan(n);

    let mut exponent = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut s = 0.0;
            for k in 0..n - 1 {
                let lk = cartan.diagonal(k);
                s += params.lambda()[k] * lk[a] * lk[b];
                for l in 0..n - 1 {
                    if l == k {
                        continue;
                    }
                    let ll = cartan.diagonal(l);
                    s += params.mu(k, l) * (lk[a] * ll[b] + ll[a] * lk[b]);
                }
            }
            exponent[a * n + b] = s;
        }
    }
    let diag: Vec<Complex64> = exponent
        .iter()
        .map(|&d| Complex64::from_polar(1.0, d))
        .collect();
    let j_tilde = ComplexMatrix::diagonal(&diag);
    let vv = kron(&v, &v)?;
    let j = vv.matmul(&j_tilde).matmul(&vv.adjoint());
    Ok(GateBuild { j, j_tilde, v, u })
}

/// Residuals of the two embedding conditions for a gate and a strategy set:
/// how far each `U_sigma (x) U_sigma'` is from commuting with `J`, and how
/// far each `U_sigma |1>` is from the basis ket `|sigma>` (with the
/// plain-shift phases when `phases_checked` is set, up to an arbitrary
/// phase otherwise).
#[derive(Debug, Clone, serde::Serialize)]
pub struct EmbeddingReport {
    pub commutator_norms: Vec<CommutatorCheck>,
    pub basis_map_errors: Vec<BasisMapCheck>,
    pub max_commutator: f64,
    pub max_basis_error: f64,
    pub tol: f64,
    pub phases_checked: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CommutatorCheck {
    pub sigma: usize,
    pub sigma_prime: usize,
    pub norm: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BasisMapCheck {
    pub sigma: usize,
    pub error: f64,
}

pub const EMBEDDING_TOL: f64 = TOL_EXACT;

/// Both conditions with the plain-shift phases in condition (i).
pub fn verify_embedding_conditions(
    j: &ComplexMatrix,
    strategies: &[ComplexMatrix],
) -> Result<EmbeddingReport> {
    verify_embedding_inner(j, strategies, true)
}

/// Both conditions, but condition (i) only requires `U_sigma |1>` to land on
/// the `|sigma>` ray; the matching phases for generalized shifts are not
/// pinned down, so this is the check to use for nonzero `phi`.
pub fn verify_embedding_on_rays(
    j: &ComplexMatrix,
    strategies: &[ComplexMatrix],
) -> Result<EmbeddingReport> {
    verify_embedding_inner(j, strategies, false)
}

fn verify_embedding_inner(
    j: &ComplexMatrix,
    strategies: &[ComplexMatrix],
    phases_checked: bool,
) -> Result<EmbeddingReport> {
    let n = strategies.len();
    if n == 0 || !j.is_square() || j.rows() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: j.rows(),
        });
    }
    let residual = j.unitarity_residual();
    if residual > TOL_EXACT {
        return Err(Error::NotUnitary {
            residual,
            tol: TOL_EXACT,
        });
    }
    let mut commutator_norms = Vec::with_capacity(n * n);
    let mut max_commutator: f64 = 0.0;
    for (s, us) in strategies.iter().enumerate() {
        for (sp, usp) in strategies.iter().enumerate() {
            let pair = kron(us, usp)?;
            let norm = commutator(j, &pair).frobenius_norm();
            max_commutator = max_commutator.max(norm);
            commutator_norms.push(CommutatorCheck {
                sigma: s + 1,
                sigma_prime: sp + 1,
                norm,
            });
        }
    }
    let mut basis_map_errors = Vec::with_capacity(n);
    let mut max_basis_error: f64 = 0.0;
    for (s, us) in strategies.iter().enumerate() {
        let mapped = us.apply(StateVector::basis(n, 0).amplitudes());
        let error = if phases_checked {
            let phase = Complex64::from_polar(1.0, classical_phase(n, s + 1));
            let target = StateVector::basis(n, s).amplitudes().to_vec();
            mapped
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - phase * b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        } else {
            // residual off the |sigma> ray
            let on_ray = mapped[s].norm_sqr();
            (mapped.iter().map(|z| z.norm_sqr()).sum::<f64>() - on_ray)
                .max(0.0)
                .sqrt()
        };
        max_basis_error = max_basis_error.max(error);
        basis_map_errors.push(BasisMapCheck {
            sigma: s + 1,
            error,
        });
    }
    let passed = max_commutator <= EMBEDDING_TOL && max_basis_error <= EMBEDDING_TOL;
    Ok(EmbeddingReport {
        commutator_norms,
        basis_map_errors,
        max_commutator,
        max_basis_error,
        tol: EMBEDDING_TOL,
        phases_checked,
        passed,
    })
}

/// D = i sigma_2, the sign-flip matrix of the two-strategy reference game.
pub fn d_matrix() -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    ComplexMatrix::from_vec(2, 2, vec![z, one, -one, z]).unwrap()
}

/// The two-strategy reference gate `exp(i gamma/2 D (x) D)`, expanded in
/// closed form: `cos(gamma/2) 1 + i sin(gamma/2) D (x) D`.
pub fn ewl_gate(gamma: f64) -> ComplexMatrix {
    let d = d_matrix();
    let dd = kron(&d, &d).unwrap();
    let cos = Complex64::new((gamma / 2.0).cos(), 0.0);
    let isin = Complex64::new(0.0, (gamma / 2.0).sin());
    ComplexMatrix::identity(4).scale(cos).add(&dd.scale(isin))
}

/// Finds the single N=2 coupling whose gate is phase-equivalent to the
/// reference gate at entangling angle `gamma`: a dense scan over one period
/// followed by golden-section refinement. Returns the coupling and the
/// residual gate distance.
pub fn calibrate_ewl_lambda(gamma: f64) -> (f64, f64) {
    let target = ewl_gate(gamma);
    let objective = |lam: f64| -> f64 {
        let build = build_gate(&GateParams::ewl(lam)).expect("valid params");
        crate::linalg::phase_aligned_distance(&build.j, &target)
    };
    let samples = 1024;
    let (mut best_lam, mut best_val) = (0.0, f64::INFINITY);
    for i in 0..samples {
        let lam = -PI + TAU * i as f64 / samples as f64;
        let val = objective(lam);
        if val < best_val {
            best_val = val;
            best_lam = lam;
        }
    }
    let step = TAU / samples as f64;
    let (mut lo, mut hi) = (best_lam - step, best_lam + step);
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while hi - lo > 1e-13 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d);
        }
    }
    let lam = 0.5 * (lo + hi);
    (lam, objective(lam))
}
