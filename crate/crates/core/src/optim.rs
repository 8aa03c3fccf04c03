//! Small numerical search routines shared by the solvers.

use crate::channel::Distribution;
use crate::error::{JcasError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`. The endpoints are evaluated as well, so a
/// monotone `f` yields its boundary maximum.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Exhaustive evaluation on a uniform grid with the given step; the
/// reference oracle for [`golden_section_max`].
pub fn dense_grid_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            (x, f(x))
        })
        .fold((lo, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc })
}

/// Enumerates all compositions `k / resolution` of `dim` non-negative
/// integers summing to `resolution`, in lexicographic order of `k`.
pub fn simplex_grid(dim: usize, resolution: usize) -> Result<SimplexGrid> {
    if dim < 1 {
        return Err(JcasError::InvalidArgument("simplex dimension must be at least 1".into()));
    }
    if resolution < 1 {
        return Err(JcasError::InvalidArgument("simplex resolution must be at least 1".into()));
    }
    let mut first = vec![0; dim];
    first[dim - 1] = resolution;
    Ok(SimplexGrid { resolution, next: Some(first) })
}

/// Number of points produced by [`simplex_grid`]: `C(resolution + dim − 1, dim − 1)`.
pub fn simplex_grid_len(dim: usize, resolution: usize) -> usize {
    let (n, k) = (resolution + dim - 1, dim - 1);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Iterator returned by [`simplex_grid`].
pub struct SimplexGrid {
    resolution: usize,
    next: Option<Vec<usize>>,
}

impl SimplexGrid {
    /// Integer compositions rather than normalized distributions.
    pub fn compositions(self) -> impl Iterator<Item = Vec<usize>> {
        let mut state = self.next;
        std::iter::from_fn(move || {
            let cur = state.take()?;
            state = next_composition(&cur);
            Some(cur)
        })
    }
}

fn next_composition(k: &[usize]) -> Option<Vec<usize>> {
    // Lexicographic successor among vectors with fixed sum: find the
    // rightmost position (excluding the last) that can be incremented,
    // i.e. has some mass to its right.
    let dim = k.len();
    if dim == 1 {
        return None;
    }
    let mut next = k.to_vec();
    let mut i = dim - 1;
    while i > 0 {
        i -= 1;
        let tail: usize = next[i + 1..].iter().sum();
        if tail > 0 {
            next[i] += 1;
            for v in &mut next[i + 1..] {
                *v = 0;
            }
            next[dim - 1] = tail - 1;
            return Some(next);
        }
    }
    None
}

impl Iterator for SimplexGrid {
    type Item = Distribution;
    fn next(&mut self) -> Option<Distribution> {
        let cur = self.next.take()?;
        self.next = next_composition(&cur);
        let r = self.resolution as f64;
        Some(Distribution::from_vec_unchecked(cur.iter().map(|&k| k as f64 / r).collect()))
    }
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Nelder–Mead minimization with the usual coefficients. `step` sizes the
/// initial simplex around `x0`; stops when the simplex values spread less
/// than `ftol` and its diameter is below `xtol`, or after `max_evals`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    ftol: f64,
    xtol: f64,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    if n == 0 {
        let v = f(x0);
        return (Vec::new(), v);
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let mut evals = n + 1;
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut simplex);
    while evals < max_evals {
        if simplex[0].1 == f64::INFINITY {
            break;
        }
        let spread = simplex[n].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= ftol && diameter <= xtol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let towards = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + t * (w - c)).collect()
        };
        let worst = simplex[n].0.clone();
        let xr = towards(-1.0, &worst);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = towards(-2.0, &worst);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = towards(-0.5, &worst);
                (xc.clone(), f(&xc))
            } else {
                let xc = towards(0.5, &worst);
                (xc.clone(), f(&xc))
            };
            evals += 1;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&item.0).map(|(b, w)| b + 0.5 * (w - b)).collect();
                    let v = f(&x);
                    *item = (x, v);
                }
                evals += n;
            }
        }
        order(&mut simplex);
    }
    simplex.swap_remove(0)
}
