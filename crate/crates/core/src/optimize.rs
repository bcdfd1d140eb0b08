//! Derivative-free local minimization (Nelder-Mead) with an evaluation
//! budget. Deterministic: identical inputs walk identical simplexes.

/// Standard Nelder-Mead coefficients; only the budget and tolerances vary
/// per call site.
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_evals: usize,
    pub x_tol: f64,
    pub f_tol: f64,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            x_tol: 1e-11,
            f_tol: 1e-14,
            initial_step: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

impl NelderMead {
    pub fn minimize(&self, f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64]) -> OptResult {
        let dim = x0.len();
        assert!(dim > 0, "cannot optimize over zero parameters");
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
            *evals += 1;
            f(x)
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        if self.max_evals == 0 {
            return OptResult {
                x: x0.to_vec(),
                f: f64::INFINITY,
                evals: 0,
                converged: false,
            };
        }
        simplex.push((x0.to_vec(), eval(x0, &mut evals)));
        for i in 0..dim {
            if evals >= self.max_evals {
                break;
            }
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let fx = eval(&x, &mut evals);
            simplex.push((x, fx));
        }
        // short budget: return the best corner seen so far
        if simplex.len() < dim + 1 {
            let best = simplex
                .into_iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            return OptResult {
                x: best.0,
                f: best.1,
                evals,
                converged: false,
            };
        }

        let mut converged = false;
        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let spread = simplex[dim].1 - simplex[0].1;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread.abs() <= self.f_tol && diameter <= self.x_tol {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
                .collect();
            let worst = simplex[dim].clone();
            let reflected: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + ALPHA * (c - w))
                .collect();
            let f_ref = eval(&reflected, &mut evals);

            if f_ref < simplex[0].1 {
                if evals < self.max_evals {
                    let expanded: Vec<f64> = centroid
                        .iter()
                        .zip(&worst.0)
                        .map(|(c, w)| c + GAMMA * ALPHA * (c - w))
                        .collect();
                    let f_exp = eval(&expanded, &mut evals);
                    simplex[dim] = if f_exp < f_ref {
                        (expanded, f_exp)
                    } else {
                        (reflected, f_ref)
                    };
                } else {
                    simplex[dim] = (reflected, f_ref);
                }
            } else if f_ref < simplex[dim - 1].1 {
                simplex[dim] = (reflected, f_ref);
            } else if evals < self.max_evals {
                let contracted: Vec<f64> = if f_ref < worst.1 {
                    centroid
                        .iter()
                        .zip(&reflected)
                        .map(|(c, r)| c + RHO * (r - c))
                        .collect()
                } else {
                    centroid
                        .iter()
                        .zip(&worst.0)
                        .map(|(c, w)| c + RHO * (w - c))
                        .collect()
                };
                let f_con = eval(&contracted, &mut evals);
                if f_con < worst.1.min(f_ref) {
                    simplex[dim] = (contracted, f_con);
                } else {
                    // shrink toward the best vertex
                    let best = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        for (xi, bi) in vertex.0.iter_mut().zip(&best) {
                            *xi = bi + SIGMA * (*xi - bi);
                        }
                        if evals >= self.max_evals {
                            break;
                        }
                        vertex.1 = eval(&vertex.0.clone(), &mut evals);
                    }
                }
            } else {
                break;
            }
        }

        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        OptResult {
            x: simplex[0].0.clone(),
            f: simplex[0].1,
            evals,
            converged,
        }
    }
}
