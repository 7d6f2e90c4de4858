//! Derivative-free Nelder-Mead simplex minimization.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub max_iter: usize,
    /// Stop once every vertex lies within this sup-norm distance of the best.
    pub diameter_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            max_iter: 200,
            diameter_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOutcome {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective of the initial simplex, then after each iteration (nonincreasing).
    pub trace: Vec<f64>,
}

/// Minimizes `f` from an explicit initial simplex of `n + 1` vertices.
/// NaN objective values are treated as `+inf`.
pub fn minimize(
    mut f: impl FnMut(&[f64]) -> f64,
    simplex: Vec<Vec<f64>>,
    opts: &NelderMeadOptions,
) -> NelderMeadOutcome {
    let n = simplex.len().saturating_sub(1);
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut verts: Vec<(Vec<f64>, f64)> = simplex
        .into_iter()
        .map(|x| {
            let v = eval(&x);
            (x, v)
        })
        .collect();
    let order = |verts: &mut Vec<(Vec<f64>, f64)>| {
        verts.sort_by(|a, b| a.1.total_cmp(&b.1));
    };
    order(&mut verts);
    let mut trace = vec![verts[0].1];
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if diameter(&verts) <= opts.diameter_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter || n == 0 {
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|d| verts[..n].iter().map(|(x, _)| x[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = verts[n].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(opts.reflection);
        let fr = eval(&xr);
        let mut shrink = false;
        if fr < verts[0].1 {
            let xe = along(opts.reflection * opts.expansion);
            let fe = eval(&xe);
            verts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < verts[n - 1].1 {
            verts[n] = (xr, fr);
        } else if fr < worst.1 {
            let xc = along(opts.reflection * opts.contraction);
            let fc = eval(&xc);
            if fc <= fr {
                verts[n] = (xc, fc);
            } else {
                shrink = true;
            }
        } else {
            let xc = along(-opts.contraction);
            let fc = eval(&xc);
            if fc < worst.1 {
                verts[n] = (xc, fc);
            } else {
                shrink = true;
            }
        }
        if shrink {
            let best = verts[0].0.clone();
            for vert in verts.iter_mut().skip(1) {
                let x: Vec<f64> = best
                    .iter()
                    .zip(&vert.0)
                    .map(|(b, v)| b + opts.shrink * (v - b))
                    .collect();
                let fx = eval(&x);
                *vert = (x, fx);
            }
        }
        order(&mut verts);
        trace.push(verts[0].1);
    }
    let (best, best_value) = verts.swap_remove(0);
    NelderMeadOutcome {
        best,
        best_value,
        iterations,
        evaluations,
        converged,
        trace,
    }
}

fn diameter(verts: &[(Vec<f64>, f64)]) -> f64 {
    let best = &verts[0].0;
    verts
        .iter()
        .skip(1)
        .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}
