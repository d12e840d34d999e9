//! Nelder–Mead simplex minimization with optional box clamping.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Converged once every vertex lies within this distance (max-norm) of
    /// the best vertex.
    pub x_tolerance: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 4000,
            x_tolerance: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Clamp<'a> {
    lower: Option<&'a [f64]>,
    upper: Option<&'a [f64]>,
}

impl Clamp<'_> {
    fn clamp(&self, x: &mut [f64]) {
        if let Some(lo) = self.lower {
            x.iter_mut().zip(lo).for_each(|(v, l)| *v = v.max(*l));
        }
        if let Some(hi) = self.upper {
            x.iter_mut().zip(hi).for_each(|(v, h)| *v = v.min(*h));
        }
    }
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` starting from `x0` with an initial simplex of per-axis
/// `step`. Trial points are clamped into `[lower, upper]` when given.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    lower: Option<&[f64]>,
    upper: Option<&[f64]>,
    options: SimplexOptions,
) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let bounds = Clamp { lower, upper };
    let mut start = x0.to_vec();
    bounds.clamp(&mut start);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.clone());
    for i in 0..dim {
        let mut v = start.clone();
        v[i] += step[i];
        if upper.is_some_and(|hi| v[i] > hi[i]) {
            v[i] = start[i] - step[i];
        }
        bounds.clamp(&mut v);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(&mut f, v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        // Order vertices best to worst; stable so ties keep their positions.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter <= options.x_tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + coef * (c - w))
                .collect();
            bounds.clamp(&mut p);
            p
        };

        let worst = simplex[dim].clone();
        let reflected = toward(REFLECT, &worst);
        let f_reflected = eval(&mut f, &reflected);

        if f_reflected < values[0] {
            let expanded = toward(EXPAND, &worst);
            let f_expanded = eval(&mut f, &expanded);
            if f_expanded < f_reflected {
                simplex[dim] = expanded;
                values[dim] = f_expanded;
            } else {
                simplex[dim] = reflected;
                values[dim] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = f_reflected;
            continue;
        }

        // Outside contraction when the reflection beat the worst vertex, inside otherwise.
        let coef = if f_reflected < values[dim] {
            CONTRACT
        } else {
            -CONTRACT
        };
        let contracted = toward(coef, &worst);
        let f_contracted = eval(&mut f, &contracted);
        if f_contracted < values[dim].min(f_reflected) {
            simplex[dim] = contracted;
            values[dim] = f_contracted;
            continue;
        }

        let best = simplex[0].clone();
        for k in 1..=dim {
            let mut v: Vec<f64> = best
                .iter()
                .zip(&simplex[k])
                .map(|(b, x)| b + SHRINK * (x - b))
                .collect();
            bounds.clamp(&mut v);
            values[k] = eval(&mut f, &v);
            simplex[k] = v;
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    SimplexOutcome {
        x: simplex[best].clone(),
        f: values[best],
        iterations,
        converged,
    }
}
