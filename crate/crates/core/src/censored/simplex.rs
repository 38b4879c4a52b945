//! Nelder-Mead downhill simplex minimiser.

#[derive(Clone, Debug)]
pub struct NelderMead {
    /// Converged when every vertex lies within this infinity-norm distance
    /// of the best vertex...
    pub x_tol: f64,
    /// ...and the objective spread across the simplex is below this.
    pub f_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { x_tol: 1e-6, f_tol: 1e-8, max_evals: 20_000 }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
    /// Best objective value after each iteration. Never increases.
    pub best_history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    /// Minimises `f` from `x0` with an axis-aligned initial simplex of
    /// per-coordinate size `step`. Non-finite objective values are treated
    /// as `+inf`.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], step: &[f64]) -> SimplexResult
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        assert_eq!(step.len(), n, "step length must match dimension");
        let evals = std::cell::Cell::new(0usize);
        let mut eval = |x: &[f64]| {
            evals.set(evals.get() + 1);
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += step[i];
            let fx = eval(&x);
            simplex.push((x, fx));
        }

        let mut history = Vec::new();
        let mut converged = false;
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            history.push(simplex[0].1);

            let best = &simplex[0];
            let x_spread = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            let f_spread = simplex[n].1 - best.1;
            if x_spread < self.x_tol && f_spread < self.f_tol {
                converged = true;
                break;
            }
            if evals.get() >= self.max_evals {
                break;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let worst = simplex[n].0.clone();
            let f_worst = simplex[n].1;
            let f_second = simplex[n - 1].1;
            let f_best = simplex[0].1;

            along(&centroid, &worst, REFLECT, &mut trial);
            let f_reflect = eval(&trial);

            if f_reflect < f_best {
                along(&centroid, &worst, EXPAND, &mut trial2);
                let f_expand = eval(&trial2);
                simplex[n] = if f_expand < f_reflect {
                    (trial2.clone(), f_expand)
                } else {
                    (trial.clone(), f_reflect)
                };
                continue;
            }
            if f_reflect < f_second {
                simplex[n] = (trial.clone(), f_reflect);
                continue;
            }

            // contraction, outside if the reflection improved on the worst point
            let (coef, reference) = if f_reflect < f_worst { (CONTRACT, f_reflect) } else { (-CONTRACT, f_worst) };
            along(&centroid, &worst, coef, &mut trial2);
            let f_contract = eval(&trial2);
            if f_contract < reference {
                simplex[n] = (trial2.clone(), f_contract);
                continue;
            }

            let best_x = simplex[0].0.clone();
            for (x, fx) in simplex.iter_mut().skip(1) {
                for (xi, bi) in x.iter_mut().zip(&best_x) {
                    *xi = bi + SHRINK * (*xi - bi);
                }
                *fx = eval(x);
            }
        }

        let (x, f) = simplex.swap_remove(0);
        SimplexResult { x, f, evals: evals.get(), converged, best_history: history }
    }
}

/// `centroid + coef * (centroid - worst)`
fn along(centroid: &[f64], worst: &[f64], coef: f64, out: &mut [f64]) {
    for ((o, c), w) in out.iter_mut().zip(centroid).zip(worst) {
        *o = c + coef * (c - w);
    }
}
