//! Eigendecompositions for Hermitian and unitary matrices.
//!
//! The Hermitian solver is a cyclic complex Jacobi iteration; at the
//! dimensions used here (at most 8) it converges to machine precision in a
//! handful of sweeps. Unitary matrices are normal, so they are diagonalized
//! by simultaneously diagonalizing the commuting Hermitian pair
//! `(U + U^+)/2` and `(U - U^+)/(2i)`.

use num_complex::Complex64;

use super::{ComplexMatrix, TOL_EXACT};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
/// Eigenvalues of the first-stage Hermitian part closer than this are treated
/// as one cluster and separated by the second stage.
const CLUSTER_TOL: f64 = 1e-8;
/// Unitary eigenvalues closer than this share a degenerate block and get a
/// canonical eigenbasis.
const DEGENERACY_TOL: f64 = 1e-7;

/// Full eigendecomposition of a Hermitian matrix. Returns eigenvalues in
/// ascending order with the matching orthonormal eigenvectors as columns.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let herm = m.hermiticity_residual();
    if herm > 1e-9 {
        return Err(Error::NotHermitian {
            residual: herm,
            tol: 1e-9,
        });
    }
    Ok(jacobi(m))
}

/// Cyclic Jacobi on a (numerically) Hermitian matrix.
fn jacobi(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.rows();
    let zero = Complex64::new(0.0, 0.0);

    // symmetrize to kill incoming rounding noise
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a[(p, q)];
                if beta.norm() <= 1e-18 * scale {
                    continue;
                }
                let alpha = a[(p, p)].re;
                let delta = a[(q, q)].re;
                // eigenvectors of the 2x2 Hermitian block [[alpha, beta], [conj beta, delta]]
                let mid = 0.5 * (alpha + delta);
                let radius = (0.25 * (alpha - delta).powi(2) + beta.norm_sqr()).sqrt();
                let lam = mid + radius;
                // pick the better-conditioned eigenvector formula
                let (mut x, mut y) = if alpha >= delta {
                    (Complex64::new(lam - delta, 0.0), beta.conj())
                } else {
                    (beta, Complex64::new(lam - alpha, 0.0))
                };
                let nrm = (x.norm_sqr() + y.norm_sqr()).sqrt();
                x /= nrm;
                y /= nrm;
                // rotation G = [[x, -conj(y)], [y, conj(x)]] on columns (p, q)

                // rows: a <- G^+ a
                for k in 0..n {
                    let rp = a[(p, k)];
                    let rq = a[(q, k)];
                    a.set(p, k, x.conj() * rp + y.conj() * rq);
                    a.set(q, k, -y * rp + x * rq);
                }
                // cols: a <- a G
                for k in 0..n {
                    let cp = a[(k, p)];
                    let cq = a[(k, q)];
                    a.set(k, p, cp * x + cq * y);
                    a.set(k, q, -cp * y.conj() + cq * x.conj());
                }
                // accumulate eigenvectors
                for k in 0..n {
                    let cp = v[(k, p)];
                    let cq = v[(k, q)];
                    v.set(k, p, cp * x + cq * y);
                    v.set(k, q, -cp * y.conj() + cq * x.conj());
                }
                a.set(p, q, zero);
                a.set(q, p, zero);
                a.set(p, p, Complex64::new(a[(p, p)].re, 0.0));
                a.set(q, q, Complex64::new(a[(q, q)].re, 0.0));
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let evals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut w = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        w.set_column(dst, &v.column(src));
    }
    (evals, w)
}

/// Principal argument mapped to [0, 2pi), with a small guard band so that
/// eigenvalues sitting numerically just below the positive real axis still
/// sort first.
fn wrapped_arg(z: Complex64) -> f64 {
    let t = z.arg();
    if t < -1e-9 {
        t + std::f64::consts::TAU
    } else {
        t
    }
}

/// Eigendecomposition of a unitary matrix.
///
/// Eigenvalues come back sorted by principal argument ascending in [0, 2pi).
/// Within a degenerate eigenvalue block the eigenvectors are canonicalized by
/// Gram-Schmidt of the projected standard basis, in basis order, and every
/// eigenvector has its dominant entry rotated onto the positive real axis, so
/// the output is deterministic.
pub fn eig_unitary(u: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let residual = u.unitarity_residual();
    if residual > TOL_EXACT {
        return Err(Error::NotUnitary {
            residual,
            tol: TOL_EXACT,
        });
    }
    let n = u.rows();
    let udag = u.adjoint();
    let h = u.add(&udag).scale(Complex64::new(0.5, 0.0));
    let k = u.sub(&udag).scale(Complex64::new(0.0, -0.5));

    let (h_evals, mut w) = jacobi(&h);

    // split clusters of the first stage with the second Hermitian part
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (h_evals[end] - h_evals[end - 1]).abs() <= CLUSTER_TOL {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<Vec<Complex64>> = (start..end).map(|j| w.column(j)).collect();
            let m = end - start;
            let restricted = ComplexMatrix::from_fn(m, m, |r, c| {
                let mut s = Complex64::new(0.0, 0.0);
                let kc = k.apply(&cols[c]);
                for (a, b) in cols[r].iter().zip(&kc) {
                    s += a.conj() * b;
                }
                s
            });
            let (_, q) = jacobi(&restricted);
            for dst in 0..m {
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for src in 0..m {
                    let coef = q[(src, dst)];
                    for (t, c) in col.iter_mut().zip(&cols[src]) {
                        *t += coef * c;
                    }
                }
                w.set_column(start + dst, &col);
            }
        }
        start = end;
    }

    // Rayleigh quotients give the unitary eigenvalues
    let eigenvalue_of = |col: &[Complex64]| -> Complex64 {
        let uc = u.apply(col);
        col.iter().zip(&uc).map(|(a, b)| a.conj() * b).sum()
    };
    let evals: Vec<Complex64> = (0..n).map(|j| eigenvalue_of(&w.column(j))).collect();

    // group degenerate eigenvalues in the complex plane (union-find on pairs)
    let mut group = (0..n).collect::<Vec<usize>>();
    fn find(group: &mut Vec<usize>, i: usize) -> usize {
        if group[i] != i {
            let root = find(group, group[i]);
            group[i] = root;
        }
        group[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (evals[i] - evals[j]).norm() <= DEGENERACY_TOL {
                let (ri, rj) = (find(&mut group, i), find(&mut group, j));
                if ri != rj {
                    group[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut group, i)).collect();
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut cluster_of_root: std::collections::HashMap<usize, usize> = Default::default();
    for (i, &root) in roots.iter().enumerate() {
        match cluster_of_root.get(&root) {
            Some(&ci) => clusters[ci].push(i),
            None => {
                cluster_of_root.insert(root, clusters.len());
                clusters.push(vec![i]);
            }
        }
    }
    clusters.sort_by(|a, b| {
        let ka = a.iter().map(|&i| wrapped_arg(evals[i])).fold(f64::INFINITY, f64::min);
        let kb = b.iter().map(|&i| wrapped_arg(evals[i])).fold(f64::INFINITY, f64::min);
        ka.partial_cmp(&kb).unwrap()
    });

    let mut final_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut final_evals: Vec<Complex64> = Vec::with_capacity(n);
    for cluster in &clusters {
        let members: Vec<Vec<Complex64>> = cluster.iter().map(|&j| w.column(j)).collect();
        let basis = if cluster.len() > 1 {
            canonical_block_basis(&members, n)
        } else {
            members
        };
        for col in basis {
            let col = canonical_phase(col);
            final_evals.push(eigenvalue_of(&col));
            final_cols.push(col);
        }
    }

    let mut out = ComplexMatrix::zeros(n, n);
    for (j, col) in final_cols.iter().enumerate() {
        out.set_column(j, col);
    }
    Ok((final_evals, out))
}

/// Deterministic orthonormal basis of a degenerate eigenspace: Gram-Schmidt
/// of the projections of the standard basis vectors, taken in basis order.
fn canonical_block_basis(members: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    let m = members.len();
    let project = |e: usize| -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for w in members {
            let coef = w[e].conj();
            for (o, wi) in out.iter_mut().zip(w) {
                *o += coef * wi;
            }
        }
        out
    };
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for e in 0..n {
        if basis.len() == m {
            break;
        }
        let mut r = project(e);
        for _ in 0..2 {
            for b in &basis {
                let coef: Complex64 = b.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= coef * bi;
                }
            }
        }
        let nrm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-6 {
            for ri in r.iter_mut() {
                *ri /= nrm;
            }
            basis.push(r);
        }
    }
    // numerically unreachable for a projector of rank m, but stay total
    let mut fallback = 0;
    while basis.len() < m {
        basis.push(members[fallback].clone());
        fallback += 1;
    }
    basis
}

/// Rotates the first entry within a whisker of the largest magnitude onto the
/// positive real axis.
fn canonical_phase(mut col: Vec<Complex64>) -> Vec<Complex64> {
    let maxmag = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(e) = col.iter().find(|z| z.norm() >= maxmag * (1.0 - 1e-9)).copied() {
        if e.norm() > 0.0 {
            let phase = e.conj() / e.norm();
            for z in col.iter_mut() {
                *z *= phase;
            }
        }
    }
    col
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn shift(n: usize, phi: &[f64]) -> ComplexMatrix {
        let mut u = ComplexMatrix::zeros(n, n);
        for (s, &p) in phi.iter().enumerate() {
            u.set((s + 1) % n, s, Complex64::from_polar(1.0, p));
        }
        u
    }

    fn reconstruct(evals: &[Complex64], w: &ComplexMatrix) -> ComplexMatrix {
        w.matmul(&ComplexMatrix::diagonal(evals)).matmul(&w.adjoint())
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let (evals, w) = eig_unitary(&ComplexMatrix::identity(3)).unwrap();
        for e in &evals {
            assert!((e - c(1.0, 0.0)).norm() < 1e-12);
        }
        // canonical basis comes back unchanged
        assert!(w.dist(&ComplexMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn shift_eigenvalues_are_roots_of_unity() {
        let u = shift(3, &[0.0; 3]);
        let (evals, w) = eig_unitary(&u).unwrap();
        for (k, e) in evals.iter().enumerate() {
            let expected = Complex64::from_polar(1.0, TAU * k as f64 / 3.0);
            assert!((e - expected).norm() < 1e-10, "k = {k}: {e}");
        }
        assert!(w.is_unitary(1e-8));
        assert!(reconstruct(&evals, &w).dist(&u) < 1e-8);
    }

    #[test]
    fn generalized_shift_eigenvalues_match_closed_form() {
        // eigenvalues of the phase-generalized shift are the n-th roots of
        // exp(i sum phi)
        let phi = [0.3, -1.1, 2.0, 0.7];
        let u = shift(4, &phi);
        let (evals, w) = eig_unitary(&u).unwrap();
        let total: f64 = phi.iter().sum();
        let mut expected: Vec<Complex64> = (0..4)
            .map(|k| Complex64::from_polar(1.0, (total + TAU * k as f64) / 4.0))
            .collect();
        expected.sort_by(|a, b| wrapped_arg(*a).partial_cmp(&wrapped_arg(*b)).unwrap());
        for (e, x) in evals.iter().zip(&expected) {
            assert!((e - x).norm() < 1e-9, "{e} vs {x}");
        }
        assert!(reconstruct(&evals, &w).dist(&u) < 1e-8);
    }

    #[test]
    fn d_matrix_eigenvalues_sorted_by_argument() {
        let d = shift(2, &[PI, 0.0]);
        let (evals, _) = eig_unitary(&d).unwrap();
        assert!((evals[0] - c(0.0, 1.0)).norm() < 1e-12);
        assert!((evals[1] - c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_unitary_input() {
        let m = ComplexMatrix::identity(2).scale(c(2.0, 0.0));
        assert!(matches!(eig_unitary(&m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn hermitian_eigenvalues_ascending() {
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![c(2.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)],
        )
        .unwrap();
        // eigenvalues of [[2, -i], [i, 1]] are (3 +- sqrt(5))/2
        let (evals, w) = eig_hermitian(&m).unwrap();
        let r = 5.0_f64.sqrt();
        assert!((evals[0] - (3.0 - r) / 2.0).abs() < 1e-12);
        assert!((evals[1] - (3.0 + r) / 2.0).abs() < 1e-12);
        assert!(w.is_unitary(1e-12));
    }

    #[test]
    fn degenerate_tensor_square_reconstructs() {
        // D (x) D has eigenvalues {1, 1, -1, -1}
        let d = shift(2, &[PI, 0.0]);
        let dd = kron(&d, &d).unwrap();
        let (evals, w) = eig_unitary(&dd).unwrap();
        let ones = evals.iter().filter(|e| (*e - c(1.0, 0.0)).norm() < 1e-9).count();
        assert_eq!(ones, 2);
        assert!(w.is_unitary(1e-8));
        assert!(reconstruct(&evals, &w).dist(&dd) < 1e-8);
    }

    #[test]
    fn eig_unitary_is_deterministic() {
        let u = shift(5, &[0.1, 0.2, 0.3, 0.4, 0.5]);
        let (e1, w1) = eig_unitary(&u).unwrap();
        let (e2, w2) = eig_unitary(&u).unwrap();
        assert_eq!(e1, e2);
        assert_eq!(w1, w2);
    }

    // deterministic pseudo-random unitary built from 2x2 rotations, so the
    // reconstruction check does not depend on the solver under test
    fn scrambled_unitary(n: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.max(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut u = ComplexMatrix::identity(n);
        for p in 0..n {
            for q in (p + 1)..n {
                let theta = next() * PI;
                let phase = next() * TAU;
                let mut g = ComplexMatrix::identity(n);
                g.set(p, p, c(theta.cos(), 0.0));
                g.set(p, q, -Complex64::from_polar(theta.sin(), -phase));
                g.set(q, p, Complex64::from_polar(theta.sin(), phase));
                g.set(q, q, c(theta.cos(), 0.0));
                u = u.matmul(&g);
            }
        }
        u
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn random_unitaries_reconstruct(n in 2usize..7, seed in 1u64..1_000_000) {
            let u = scrambled_unitary(n, seed);
            prop_assert!(u.is_unitary(1e-12));
            let (evals, w) = eig_unitary(&u).unwrap();
            prop_assert!(w.is_unitary(1e-8));
            prop_assert!(reconstruct(&evals, &w).dist(&u) < 1e-8);
            for e in &evals {
                prop_assert!((e.norm() - 1.0).abs() < 1e-9);
            }
            // sorted by wrapped principal argument
            for pair in evals.windows(2) {
                prop_assert!(wrapped_arg(pair[0]) <= wrapped_arg(pair[1]) + 1e-7);
            }
        }
    }
}
