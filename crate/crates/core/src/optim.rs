//! Derivative-free minimization (Nelder–Mead).

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Relative spread at which the simplex counts as collapsed, applied to
    /// both vertex coordinates and objective values.
    pub tolerance: f64,
    pub max_evals: usize,
    /// Edge length of the starting simplex along each axis, relative to
    /// |start[i]| (absolute when start[i] is 0).
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            tolerance: 1e-8,
            max_evals: 20_000,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NelderMeadOutcome {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub n_evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `objective` from `start`. Non-finite objective values away from
/// the starting simplex are treated as +∞.
pub fn nelder_mead<F>(mut objective: F, start: &[f64], options: &NelderMeadOptions) -> Result<NelderMeadOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    if dim == 0 {
        return Err(Error::InvalidParams("empty starting point".into()));
    }
    let mut n_evals = 0usize;
    let mut eval = |x: &[f64], n: &mut usize| {
        *n += 1;
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(start, &mut n_evals);
    if !f0.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    simplex.push((start.to_vec(), f0));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += if p[i] != 0.0 { options.initial_step * p[i] } else { options.initial_step };
        let f = eval(&p, &mut n_evals);
        if !f.is_finite() {
            return Err(Error::NonFiniteStart);
        }
        simplex.push((p, f));
    }

    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if collapsed(&simplex, options.tolerance) {
            converged = true;
            break;
        }
        if n_evals >= options.max_evals {
            break;
        }
        iterations += 1;

        let worst = simplex[dim].clone();
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(p, _)| p[j]).sum::<f64>() / dim as f64)
            .collect();
        let toward = |coef: f64| -> Vec<f64> {
            centroid.iter().zip(&worst.0).map(|(c, w)| c + coef * (c - w)).collect()
        };

        let xr = toward(options.reflection);
        let fr = eval(&xr, &mut n_evals);
        if fr < simplex[0].1 {
            let xe = toward(options.reflection * options.expansion);
            let fe = eval(&xe, &mut n_evals);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        // contraction, outside when the reflected point beats the worst
        let (xc, fc) = if fr < worst.1 {
            let xc = toward(options.reflection * options.contraction);
            let fc = eval(&xc, &mut n_evals);
            (xc, fc)
        } else {
            let xc = toward(-options.contraction);
            let fc = eval(&xc, &mut n_evals);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let p: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + options.shrink * (v - b))
                .collect();
            let f = eval(&p, &mut n_evals);
            *vertex = (p, f);
        }
    }

    let (argmin, value) = simplex.swap_remove(0);
    Ok(NelderMeadOutcome { argmin, value, n_evals, iterations, converged })
}

fn collapsed(sorted: &[(Vec<f64>, f64)], tol: f64) -> bool {
    let (best, f_best) = (&sorted[0].0, sorted[0].1);
    let f_worst = sorted[sorted.len() - 1].1;
    if !f_worst.is_finite() {
        return false;
    }
    let f_spread = (f_worst - f_best).abs() <= tol * (f_best.abs() + tol);
    let x_spread = sorted.iter().skip(1).all(|(p, _)| {
        p.iter().zip(best).all(|(a, b)| (a - b).abs() <= tol * (b.abs() + tol))
    });
    f_spread && x_spread
}
