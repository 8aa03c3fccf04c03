//! Bi-static detection exponents: successive decoding (`ρ_succ`), joint
//! decoding/detection (`ρ_joint`), its closed-form lower bound and the
//! resulting rate / exponent regions.
//!
//! Outer minimizations over `P̂` scan a product grid of rows and refine with
//! Nelder–Mead. Inner problems (`β` and the confusion exponent) live on the
//! affine slice `{P : P_X∘P = P_X∘P̂}`, parameterized by every active row but
//! one; the remaining pivot row is solved from the marginal constraint.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{ChannelFamily, ConditionalDistribution, Distribution};
use crate::error::{JcasError, Result};
use crate::info::{conditional_kl_of, entropy_of, mutual_information_of, phi_of, CHERNOFF_TOL};
use crate::optim::{nelder_mead, project_to_simplex, simplex_grid, simplex_grid_len};
use crate::region::{pareto_envelope, CurveKind, RegionCurve};

/// Strict `I < R` in `β` is enforced as `I ≤ R − BETA_SLACK`.
pub const BETA_SLACK: f64 = 1e-9;
pub const DEFAULT_ROW_GRID: usize = 60;
pub const DEFAULT_REFINE_TOL: f64 = 1e-7;
/// `ρ_joint` and its lower bound accept `|X|, |Y|` up to this size.
pub const MAX_JOINT_ALPHABET: usize = 3;
const OUTER_GRID_CAP: usize = 50_000;
const SLICE_GRID_CAP: usize = 4_096;
const MARGINAL_TOL: f64 = 1e-9;

type Kernel = Vec<Vec<f64>>;

/// Input to every exponent evaluation.
#[derive(Debug, Clone)]
pub struct ExponentQuery<'a> {
    pub p_x: Distribution,
    pub rate: f64,
    pub family: &'a ChannelFamily,
    /// Points per row axis of the conditional-distribution grid.
    pub grid: usize,
    pub refine_tol: f64,
}

impl<'a> ExponentQuery<'a> {
    pub fn new(family: &'a ChannelFamily, p_x: Distribution, rate: f64) -> Result<Self> {
        family.check_input(&p_x)?;
        if !rate.is_finite() || rate < 0.0 {
            return Err(JcasError::InvalidArgument(format!("rate must be finite and >= 0, got {rate}")));
        }
        let cap = (family.y_size() as f64).ln();
        if rate > cap + 1e-12 {
            return Err(JcasError::InvalidArgument(format!("rate {rate} exceeds ln|Y| = {cap}")));
        }
        Ok(ExponentQuery { p_x, rate, family, grid: DEFAULT_ROW_GRID, refine_tol: DEFAULT_REFINE_TOL })
    }

    pub fn with_grid(mut self, grid: usize) -> Result<Self> {
        if grid < 1 {
            return Err(JcasError::InvalidArgument("grid resolution must be at least 1".into()));
        }
        self.grid = grid;
        Ok(self)
    }

    pub fn with_refine_tol(mut self, tol: f64) -> Self {
        self.refine_tol = tol;
        self
    }

    fn px(&self) -> &[f64] {
        self.p_x.probs()
    }

    fn w(&self, s: usize) -> &[Vec<f64>] {
        self.family.comm(s).rows()
    }

    fn check_state(&self, s: usize) -> Result<()> {
        if s >= self.family.num_states() {
            return Err(JcasError::InvalidArgument(format!("state {s} out of range")));
        }
        Ok(())
    }

    fn check_kernel(&self, p: &ConditionalDistribution) -> Result<()> {
        if p.inputs() != self.family.x_size() || p.outputs() != self.family.y_size() {
            return Err(JcasError::DimensionMismatch(format!(
                "kernel is {}x{}, channel is {}x{}",
                p.inputs(),
                p.outputs(),
                self.family.x_size(),
                self.family.y_size()
            )));
        }
        Ok(())
    }

    fn require_joint_size(&self) -> Result<()> {
        self.family.require_states(2)?;
        if self.family.x_size() > MAX_JOINT_ALPHABET || self.family.y_size() > MAX_JOINT_ALPHABET {
            return Err(JcasError::Unsupported(format!(
                "joint exponents support |X|, |Y| <= {MAX_JOINT_ALPHABET}, got {}x{}",
                self.family.x_size(),
                self.family.y_size()
            )));
        }
        Ok(())
    }
}

/// `D(P‖W|P_X) + H(P|P_X) = −Σ_x P_X(x) Σ_y P(y|x) ln W(y|x)`.
pub fn cross_entropy_of(p_x: &[f64], p: &[Vec<f64>], w: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for ((px, prow), wrow) in p_x.iter().zip(p).zip(w) {
        if *px <= 0.0 {
            continue;
        }
        for (a, b) in prow.iter().zip(wrow) {
            if *a > 0.0 {
                if *b <= 0.0 {
                    return f64::INFINITY;
                }
                acc -= px * a * b.ln();
            }
        }
    }
    acc
}

fn output_marginal(p_x: &[f64], p: &[Vec<f64>]) -> Vec<f64> {
    let mut q = vec![0.0; p[0].len()];
    for (px, row) in p_x.iter().zip(p) {
        for (qy, v) in q.iter_mut().zip(row) {
            *qy += px * v;
        }
    }
    q
}

fn clip(v: f64, rate: f64) -> f64 {
    if v.is_infinite() {
        f64::INFINITY
    } else {
        (v - rate).max(0.0)
    }
}

/// Largest resolution `r ≤ requested` whose `rows`-fold product grid stays
/// under `cap` points.
fn fit_resolution(ny: usize, rows: usize, requested: usize, cap: usize) -> usize {
    let mut r = requested.max(1);
    while r > 1 {
        let len = simplex_grid_len(ny, r);
        if len.checked_pow(rows as u32).is_some_and(|t| t <= cap) {
            break;
        }
        r -= 1;
    }
    r
}

fn row_points(ny: usize, res: usize) -> Vec<Vec<f64>> {
    simplex_grid(ny, res)
        .expect("dimension and resolution are positive")
        .map(|d| d.probs().to_vec())
        .collect()
}

/// Row from its first `|Y| − 1` free coordinates.
fn row_from_free(c: &[f64]) -> Vec<f64> {
    let mut v = c.to_vec();
    v.push(1.0 - c.iter().sum::<f64>());
    project_to_simplex(&v)
}

fn first_min(vals: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in vals.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.is_none_or(|b| *v < vals[b]) {
            best = Some(i);
        }
    }
    best
}

/// Grid scan plus Nelder–Mead over kernels whose active rows vary and whose
/// remaining rows are copied from `base`.
fn minimize_kernel<F>(p_x: &[f64], base: &Kernel, res: usize, seeds: &[Kernel], f: F) -> (f64, Kernel)
where
    F: Fn(&Kernel) -> f64 + Sync,
{
    let ny = base[0].len();
    let active: Vec<usize> = (0..p_x.len()).filter(|&x| p_x[x] > 0.0).collect();
    let r = fit_resolution(ny, active.len(), res, OUTER_GRID_CAP);
    let pts = row_points(ny, r);
    let l = pts.len();
    let total = l.pow(active.len() as u32);
    let build = |idx: usize| {
        let mut k = base.clone();
        let mut i = idx;
        for &x in &active {
            k[x] = pts[i % l].clone();
            i /= l;
        }
        k
    };
    let mut vals: Vec<f64> = (0..total).into_par_iter().map(|i| f(&build(i))).collect();
    let mut kernels: Vec<Option<Kernel>> = vec![None; total];
    for seed in seeds {
        let mut k = base.clone();
        for &x in &active {
            k[x] = seed[x].clone();
        }
        vals.push(f(&k));
        kernels.push(Some(k));
    }
    let Some(bi) = first_min(&vals) else {
        return (f64::INFINITY, base.clone());
    };
    let mut best_val = vals[bi];
    let mut best = kernels[bi].take().unwrap_or_else(|| build(bi));
    if !best_val.is_finite() || active.is_empty() {
        return (best_val, best);
    }
    let from_params = |v: &[f64]| {
        let mut k = base.clone();
        for (j, &x) in active.iter().enumerate() {
            k[x] = row_from_free(&v[j * (ny - 1)..(j + 1) * (ny - 1)]);
        }
        k
    };
    let x0: Vec<f64> = active.iter().flat_map(|&x| best[x][..ny - 1].to_vec()).collect();
    if x0.is_empty() {
        return (best_val, best);
    }
    let dim = x0.len();
    let (xs, v) = nelder_mead(|v| f(&from_params(v)), &x0, 0.5 / r as f64, 1e-13, 1e-9, 400 * dim + 200);
    if v < best_val {
        best_val = v;
        best = from_params(&xs);
    }
    (best_val, best)
}

/// The affine slice of kernels sharing the output marginal `target`.
struct Slice<'a> {
    p_x: &'a [f64],
    target: Vec<f64>,
    pivot: Option<usize>,
    free: Vec<usize>,
}

impl<'a> Slice<'a> {
    fn new(p_x: &'a [f64], target: Vec<f64>) -> Self {
        let mut active: Vec<usize> = (0..p_x.len()).filter(|&x| p_x[x] > 0.0).collect();
        let pivot = active
            .iter()
            .copied()
            .fold(None, |acc: Option<usize>, x| match acc {
                Some(b) if p_x[b] >= p_x[x] => Some(b),
                _ => Some(x),
            });
        active.retain(|x| Some(*x) != pivot);
        Slice { p_x, target, pivot, free: active }
    }

    fn complete(&self, rows: &[Vec<f64>]) -> Option<Kernel> {
        let mut k = vec![self.target.clone(); self.p_x.len()];
        for (j, &x) in self.free.iter().enumerate() {
            k[x] = rows[j].clone();
        }
        if let Some(p) = self.pivot {
            let mut row = self.target.clone();
            for &x in &self.free {
                for (r, v) in row.iter_mut().zip(&k[x]) {
                    *r -= self.p_x[x] * v;
                }
            }
            for r in row.iter_mut() {
                *r /= self.p_x[p];
                if *r < -1e-12 || *r > 1.0 + 1e-12 {
                    return None;
                }
                *r = r.clamp(0.0, 1.0);
            }
            k[p] = row;
        }
        Some(k)
    }

    fn contains(&self, k: &Kernel) -> bool {
        output_marginal(self.p_x, k)
            .iter()
            .zip(&self.target)
            .all(|(a, b)| (a - b).abs() <= MARGINAL_TOL)
    }

    /// Minimizes `obj` over the slice points satisfying `feas`; `None` when
    /// no grid point or seed is feasible.
    fn minimize<F, G>(&self, res: usize, seeds: &[&Kernel], obj: F, feas: G) -> Option<(f64, Kernel)>
    where
        F: Fn(&Kernel) -> f64,
        G: Fn(&Kernel) -> bool,
    {
        let ny = self.target.len();
        let eval = |k: &Kernel| if feas(k) { obj(k) } else { f64::INFINITY };
        let mut best: Option<(f64, Kernel)> = None;
        let offer = |v: f64, k: Kernel, best: &mut Option<(f64, Kernel)>| {
            if v.is_finite() && best.as_ref().is_none_or(|b| v < b.0) {
                *best = Some((v, k));
            }
        };
        let rows = self.free.len();
        let r = fit_resolution(ny, rows, res, SLICE_GRID_CAP);
        let pts = row_points(ny, r);
        let l = pts.len();
        let total = l.pow(rows as u32);
        let mut chosen = vec![Vec::new(); rows];
        for idx in 0..total {
            let mut i = idx;
            for c in chosen.iter_mut() {
                *c = pts[i % l].clone();
                i /= l;
            }
            if let Some(k) = self.complete(&chosen) {
                let v = eval(&k);
                offer(v, k, &mut best);
            }
        }
        for seed in seeds {
            if self.contains(seed) {
                offer(eval(seed), (*seed).clone(), &mut best);
            }
        }
        let (mut bv, mut bk) = best?;
        if rows == 0 || ny < 2 {
            return Some((bv, bk));
        }
        let from_params = |v: &[f64]| -> Option<Kernel> {
            let rows: Vec<Vec<f64>> = (0..self.free.len())
                .map(|j| row_from_free(&v[j * (ny - 1)..(j + 1) * (ny - 1)]))
                .collect();
            self.complete(&rows)
        };
        let x0: Vec<f64> = self.free.iter().flat_map(|&x| bk[x][..ny - 1].to_vec()).collect();
        let dim = x0.len();
        let (xs, v) = nelder_mead(
            |v| from_params(v).map_or(f64::INFINITY, |k| eval(&k)),
            &x0,
            0.5 / r as f64,
            1e-14,
            1e-11,
            300 * dim + 100,
        );
        if v < bv {
            if let Some(k) = from_params(&xs) {
                bv = v;
                bk = k;
            }
        }
        Some((bv, bk))
    }
}

fn rho_succ_state(q: &ExponentQuery, s: usize) -> (f64, Kernel) {
    let p_x = q.px();
    let w = q.w(s);
    let seeds: Vec<Kernel> = (0..q.family.num_states()).map(|t| q.w(t).to_vec()).collect();
    minimize_kernel(p_x, &w.to_vec(), q.grid, &seeds, |k| {
        conditional_kl_of(k, w, p_x) + clip(mutual_information_of(p_x, k), q.rate)
    })
}

/// Successive-decoding exponent
/// `min_s min_P̂ D(P̂‖W_s|P_X) + |I(P_X, P̂) − R|⁺`.
pub fn rho_succ(q: &ExponentQuery) -> Result<f64> {
    Ok(rho_succ_detailed(q)?.0)
}

/// [`rho_succ`] together with the minimizing state and kernel.
pub fn rho_succ_detailed(q: &ExponentQuery) -> Result<(f64, usize, ConditionalDistribution)> {
    let per: Vec<(f64, Kernel)> = (0..q.family.num_states()).map(|s| rho_succ_state(q, s)).collect();
    let s = first_min(&per.iter().map(|p| p.0).collect::<Vec<_>>()).unwrap_or(0);
    let (v, k) = per.into_iter().nth(s).expect("family has at least one state");
    Ok((v, s, ConditionalDistribution::from_rows_unchecked(k)))
}

fn beta_rows(q: &ExponentQuery, p_hat: &Kernel, s: usize) -> Option<(f64, Kernel)> {
    let limit = q.rate - BETA_SLACK;
    if limit < 0.0 {
        return None;
    }
    let p_x = q.px();
    let w = q.w(s);
    let slice = Slice::new(p_x, output_marginal(p_x, p_hat));
    let product = vec![slice.target.clone(); p_x.len()];
    slice.minimize(
        q.grid,
        &[&product, p_hat],
        |k| cross_entropy_of(p_x, k, w),
        |k| mutual_information_of(p_x, k) <= limit,
    )
}

/// `β(P̂, s)`: the smallest `D(P″‖W_s|P_X) + H(P″|P_X)` over kernels with
/// `I(P_X, P″) < R` and the same output marginal as `P̂`. `+∞` when no such
/// kernel exists (in particular at `R = 0`).
pub fn beta(p_hat: &ConditionalDistribution, q: &ExponentQuery, s: usize) -> Result<f64> {
    Ok(beta_minimizer(p_hat, q, s)?.map_or(f64::INFINITY, |b| b.0))
}

/// [`beta`] with its minimizer; `None` encodes the empty feasible set.
pub fn beta_minimizer(
    p_hat: &ConditionalDistribution,
    q: &ExponentQuery,
    s: usize,
) -> Result<Option<(f64, ConditionalDistribution)>> {
    q.check_state(s)?;
    q.check_kernel(p_hat)?;
    Ok(beta_rows(q, &p_hat.rows().to_vec(), s).map(|(v, k)| (v, ConditionalDistribution::from_rows_unchecked(k))))
}

/// Result of the confusion minimization for one `(P̂, s)`.
#[derive(Debug, Clone)]
struct Inner {
    value: f64,
    beta: f64,
    witness: Option<(usize, Kernel)>,
}

fn inner_rows(q: &ExponentQuery, p_hat: &Kernel, s: usize, beta_s: Option<f64>) -> Inner {
    let p_x = q.px();
    let beta = beta_s.unwrap_or_else(|| beta_rows(q, p_hat, s).map_or(f64::INFINITY, |b| b.0));
    let bound = beta.min(cross_entropy_of(p_x, p_hat, q.w(s)));
    let slice = Slice::new(p_x, output_marginal(p_x, p_hat));
    let product = vec![slice.target.clone(); p_x.len()];
    let mut out = Inner { value: f64::INFINITY, beta, witness: None };
    for t in (0..q.family.num_states()).filter(|&t| t != s) {
        let wt = q.w(t);
        let found = slice.minimize(
            q.grid,
            &[&product, p_hat],
            |k| mutual_information_of(p_x, k),
            |k| cross_entropy_of(p_x, k, wt) <= bound,
        );
        if let Some((v, k)) = found {
            if v < out.value {
                out.value = v;
                out.witness = Some((t, k));
            }
        }
    }
    out
}

/// `min_{s'≠s} min_{P' ∈ 𝒫_{s,s'}(P̂)} I(P_X, P')`, or `+∞` when every
/// constraint set is empty.
pub fn inner_confusion_exponent(p_hat: &ConditionalDistribution, q: &ExponentQuery, s: usize) -> Result<f64> {
    Ok(inner_confusion_minimizer(p_hat, q, s)?.map_or(f64::INFINITY, |m| m.0))
}

/// [`inner_confusion_exponent`] with the confusing state and kernel.
pub fn inner_confusion_minimizer(
    p_hat: &ConditionalDistribution,
    q: &ExponentQuery,
    s: usize,
) -> Result<Option<(f64, usize, ConditionalDistribution)>> {
    q.family.require_states(2)?;
    q.check_state(s)?;
    q.check_kernel(p_hat)?;
    let inner = inner_rows(q, &p_hat.rows().to_vec(), s, None);
    Ok(inner
        .witness
        .map(|(t, k)| (inner.value, t, ConditionalDistribution::from_rows_unchecked(k))))
}

/// The terms of `ρ_joint` at one outer state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateTerm {
    pub state: usize,
    pub label: String,
    pub d_term: f64,
    /// `+∞` (serialized as `null`) when the confusion set is empty.
    pub inner: f64,
    pub clipped_inner: f64,
    pub p_hat: ConditionalDistribution,
    pub confusing_state: Option<usize>,
    pub p_prime: Option<ConditionalDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaValue {
    /// Index into `per_state_terms` of the `P̂` this value belongs to.
    pub p_hat_index: usize,
    pub state: usize,
    pub value: f64,
}

/// Full report of a `ρ_joint` evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointExponentBreakdown {
    pub rho: f64,
    pub rate: f64,
    pub minimizing_state: usize,
    pub minimizing_p_hat: ConditionalDistribution,
    pub per_state_terms: Vec<StateTerm>,
    pub beta_values: Vec<BetaValue>,
}

impl JointExponentBreakdown {
    /// `min_s (D-term + clipped inner term)`, recomputed from the parts.
    pub fn reconstructed(&self) -> f64 {
        self.per_state_terms
            .iter()
            .map(|t| t.d_term + t.clipped_inner)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("breakdown serializes")
    }
}

fn joint_objective(q: &ExponentQuery, k: &Kernel, s: usize) -> f64 {
    let d = conditional_kl_of(k, q.w(s), q.px());
    if !d.is_finite() {
        return f64::INFINITY;
    }
    d + clip(inner_rows(q, k, s, None).value, q.rate)
}

/// Joint decoding/detection exponent
/// `min_s min_P̂ D(P̂‖W_s|P_X) + |inner(P̂, s) − R|⁺`.
pub fn rho_joint(q: &ExponentQuery) -> Result<JointExponentBreakdown> {
    q.require_joint_size()?;
    let p_x = q.px();
    let ns = q.family.num_states();
    let seeds: Vec<Kernel> = (0..ns).map(|t| q.w(t).to_vec()).collect();
    let mut terms = Vec::with_capacity(ns);
    let mut betas = Vec::new();
    for s in 0..ns {
        let (_, k) = minimize_kernel(p_x, &q.w(s).to_vec(), q.grid, &seeds, |k| joint_objective(q, k, s));
        let d = conditional_kl_of(&k, q.w(s), p_x);
        let inner = inner_rows(q, &k, s, None);
        for t in 0..ns {
            let value = if t == s { inner.beta } else { beta_rows(q, &k, t).map_or(f64::INFINITY, |b| b.0) };
            betas.push(BetaValue { p_hat_index: s, state: t, value });
        }
        let (confusing_state, p_prime) = match inner.witness {
            Some((t, pk)) => (Some(t), Some(ConditionalDistribution::from_rows_unchecked(pk))),
            None => (None, None),
        };
        terms.push(StateTerm {
            state: s,
            label: q.family.states()[s].clone(),
            d_term: d,
            inner: inner.value,
            clipped_inner: clip(inner.value, q.rate),
            p_hat: ConditionalDistribution::from_rows_unchecked(k),
            confusing_state,
            p_prime,
        });
    }
    let totals: Vec<f64> = terms.iter().map(|t| t.d_term + t.clipped_inner).collect();
    let best = first_min(&totals).unwrap_or(0);
    Ok(JointExponentBreakdown {
        rho: totals[best],
        rate: q.rate,
        minimizing_state: best,
        minimizing_p_hat: terms[best].p_hat.clone(),
        per_state_terms: terms,
        beta_values: betas,
    })
}

/// Lower bound on `ρ_joint`: kernels with `max_{s''} β(P̂, s'')` at least
/// the cross-entropy of `P̂` under `W_s` contribute
/// `γ₁ = D + |I(P_X, P̂) − R|⁺`; the rest contribute
/// `γ₂ = D + |D + H(P_X∘P̂) − β(P̂, s) − R|⁺`.
pub fn rho_joint_lower_bound(q: &ExponentQuery) -> Result<f64> {
    q.require_joint_size()?;
    let p_x = q.px();
    let ns = q.family.num_states();
    let seeds: Vec<Kernel> = (0..ns).map(|t| q.w(t).to_vec()).collect();
    let per_state = (0..ns).map(|s| {
        let w = q.w(s);
        minimize_kernel(p_x, &w.to_vec(), q.grid, &seeds, |k| {
            let d = conditional_kl_of(k, w, p_x);
            if !d.is_finite() {
                return f64::INFINITY;
            }
            let nll = cross_entropy_of(p_x, k, w);
            let betas: Vec<f64> = (0..ns).map(|t| beta_rows(q, k, t).map_or(f64::INFINITY, |b| b.0)).collect();
            let max_beta = betas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if max_beta >= nll {
                d + clip(mutual_information_of(p_x, k), q.rate)
            } else {
                let h_out = entropy_of(&output_marginal(p_x, k));
                d + clip(d + h_out - betas[s], q.rate)
            }
        })
        .0
    });
    Ok(per_state.fold(f64::INFINITY, f64::min))
}

/// The regions achieved by successive and joint decoding: for each grid
/// `P_X` and each of `rate_samples` rates in `[0, min_s I(P_X, W_s)]`, the
/// point `(min(ρ, φ(P_X)), R)`; each curve is the envelope of its points.
pub fn bistatic_regions(
    family: &ChannelFamily,
    px_resolution: usize,
    rate_samples: usize,
    row_grid: usize,
) -> Result<(RegionCurve, RegionCurve)> {
    family.require_states(2)?;
    family.require_distinguishable()?;
    if family.x_size() > MAX_JOINT_ALPHABET || family.y_size() > MAX_JOINT_ALPHABET {
        return Err(JcasError::Unsupported(format!(
            "bi-static regions support |X|, |Y| <= {MAX_JOINT_ALPHABET}"
        )));
    }
    if rate_samples < 2 {
        return Err(JcasError::InvalidArgument("need at least two rate samples".into()));
    }
    let inputs: Vec<Distribution> = simplex_grid(family.x_size(), px_resolution)?.collect();
    let jobs: Vec<(usize, usize)> = (0..inputs.len())
        .flat_map(|i| (0..rate_samples).map(move |k| (i, k)))
        .collect();
    let evaluated: Vec<Result<(f64, f64, f64)>> = jobs
        .par_iter()
        .map(|&(i, k)| {
            let p = &inputs[i];
            let phi = phi_of(p.probs(), family, CHERNOFF_TOL);
            let r_max = (0..family.num_states())
                .map(|s| mutual_information_of(p.probs(), family.comm(s).rows()))
                .fold(f64::INFINITY, f64::min);
            let rate = if k + 1 == rate_samples { r_max } else { r_max * k as f64 / (rate_samples - 1) as f64 };
            let q = ExponentQuery::new(family, p.clone(), rate)?.with_grid(row_grid)?;
            let succ = rho_succ(&q)?.min(phi);
            let joint = rho_joint(&q)?.rho.min(phi);
            Ok((rate, succ, joint))
        })
        .collect();
    let mut succ_pts = Vec::with_capacity(jobs.len());
    let mut joint_pts = Vec::with_capacity(jobs.len());
    for item in evaluated {
        let (rate, succ, joint) = item?;
        succ_pts.push((succ, rate));
        joint_pts.push((joint, rate));
    }
    let mut succ = RegionCurve::new(CurveKind::BiSucc, px_resolution, pareto_envelope(succ_pts));
    let mut joint = RegionCurve::new(CurveKind::BiJoint, px_resolution, pareto_envelope(joint_pts));
    for c in [&mut succ, &mut joint] {
        c.metadata.insert("rate_samples".into(), rate_samples.to_string());
        c.metadata.insert("row_grid".into(), row_grid.to_string());
    }
    Ok((succ, joint))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{compound_capacity, COMPOUND_REFINE_TOL};
    use approx::assert_abs_diff_eq;

    fn bsc(p: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
    }

    fn table3() -> ChannelFamily {
        ChannelFamily::bistatic(vec!["0".into(), "1".into()], vec![bsc(0.3), bsc(0.6)]).unwrap()
    }

    fn cd(rows: Kernel) -> ConditionalDistribution {
        ConditionalDistribution::new(rows).unwrap()
    }

    #[test]
    fn cross_entropy_splits_into_divergence_and_entropy() {
        let p_x = [0.3, 0.7];
        let p = vec![vec![0.2, 0.8], vec![0.6, 0.4]];
        let w = bsc(0.3);
        let h: f64 = p_x.iter().zip(&p).map(|(a, r)| a * entropy_of(r)).sum();
        assert_abs_diff_eq!(
            cross_entropy_of(&p_x, &p, &w),
            conditional_kl_of(&p, &w, &p_x) + h,
            epsilon = 1e-14
        );
    }

    #[test]
    fn rho_succ_zero_above_mutual_information() {
        let f = table3();
        let i_min = (0..2)
            .map(|s| mutual_information_of(&[0.5, 0.5], f.comm(s).rows()))
            .fold(f64::INFINITY, f64::min);
        let q = ExponentQuery::new(&f, Distribution::uniform(2), i_min).unwrap();
        assert!(rho_succ(&q).unwrap() < 1e-9);
    }

    #[test]
    fn rho_succ_at_zero_rate_matches_prototype() {
        let f = table3();
        let q = ExponentQuery::new(&f, Distribution::uniform(2), 0.0).unwrap();
        assert_abs_diff_eq!(rho_succ(&q).unwrap(), 0.01015, epsilon = 5e-5);
    }

    #[test]
    fn single_constant_state_gives_zero() {
        let flat = vec![vec![vec![0.4, 0.6], vec![0.4, 0.6]]];
        let f = ChannelFamily::bistatic(vec!["a".into()], flat).unwrap();
        let q = ExponentQuery::new(&f, Distribution::uniform(2), 0.0).unwrap();
        assert!(rho_succ(&q).unwrap() < 1e-12);
    }

    #[test]
    fn beta_is_infinite_at_zero_rate_and_bounded_by_product_kernel() {
        let f = table3();
        let q0 = ExponentQuery::new(&f, Distribution::uniform(2), 0.0).unwrap();
        let p_hat = cd(vec![vec![0.7, 0.3], vec![0.5, 0.5]]);
        assert_eq!(beta(&p_hat, &q0, 0).unwrap(), f64::INFINITY);

        let q = ExponentQuery::new(&f, Distribution::uniform(2), 0.01).unwrap();
        let marg = output_marginal(q.px(), p_hat.rows());
        let product = vec![marg.clone(), marg];
        let bound = cross_entropy_of(q.px(), &product, q.w(0));
        let (b, k) = beta_minimizer(&p_hat, &q, 0).unwrap().unwrap();
        assert!(b <= bound + 1e-12);
        assert!(mutual_information_of(q.px(), k.rows()) <= 0.01);
        let got = output_marginal(q.px(), k.rows());
        assert!(got.iter().zip(&output_marginal(q.px(), p_hat.rows())).all(|(a, b)| (a - b).abs() < 1e-6));
    }

    #[test]
    fn inner_minimizer_respects_marginal_and_bound() {
        let f = table3();
        let q = ExponentQuery::new(&f, Distribution::uniform(2), 0.01).unwrap();
        let mid = cd(vec![vec![0.55, 0.45], vec![0.45, 0.55]]);
        let (v, t, pp) = inner_confusion_minimizer(&mid, &q, 0).unwrap().unwrap();
        assert_eq!(t, 1);
        assert!(v.is_finite());
        let target = output_marginal(q.px(), mid.rows());
        let got = output_marginal(q.px(), pp.rows());
        assert!(got.iter().zip(&target).all(|(a, b)| (a - b).abs() < 1e-6));
        let bound = beta(&mid, &q, 0).unwrap().min(cross_entropy_of(q.px(), mid.rows(), q.w(0)));
        assert!(cross_entropy_of(q.px(), pp.rows(), q.w(1)) <= bound + 1e-12);
    }

    #[test]
    fn joint_exceeds_successive_at_compound_capacity() {
        let f = table3();
        let c = compound_capacity(&f, 200, COMPOUND_REFINE_TOL).unwrap().value;
        let q = ExponentQuery::new(&f, Distribution::uniform(2), c).unwrap().with_grid(30).unwrap();
        assert!(rho_succ(&q).unwrap() < 1e-4);
        let j = rho_joint(&q).unwrap();
        assert!(j.rho > 1e-3, "{}", j.rho);
        assert_abs_diff_eq!(j.rho, j.reconstructed(), epsilon = 0.0);
        let lb = rho_joint_lower_bound(&q).unwrap();
        assert!(lb <= j.rho + q.refine_tol);
    }

    #[test]
    fn identical_states_collapse_to_zero() {
        let same = vec![bsc(0.2), bsc(0.2)];
        let f = ChannelFamily::bistatic(vec!["a".into(), "b".into()], same).unwrap();
        let q = ExponentQuery::new(&f, Distribution::uniform(2), 0.2).unwrap().with_grid(20).unwrap();
        assert!(rho_joint(&q).unwrap().rho < 1e-9);
        assert!(rho_joint_lower_bound(&q).unwrap() < 1e-9);
    }

    #[test]
    fn breakdown_json_has_expected_fields() {
        let f = table3();
        let q = ExponentQuery::new(&f, Distribution::uniform(2), 0.0).unwrap().with_grid(10).unwrap();
        let j = rho_joint(&q).unwrap();
        let v: serde_json::Value = serde_json::from_str(&j.to_json()).unwrap();
        assert!(v["per_state_terms"].as_array().unwrap().len() == 2);
        assert_eq!(v["beta_values"].as_array().unwrap().len(), 4);
        assert!(v["beta_values"][0]["value"].is_null());
    }

    #[test]
    fn query_validation() {
        let f = table3();
        assert!(ExponentQuery::new(&f, Distribution::uniform(2), -0.1).is_err());
        assert!(ExponentQuery::new(&f, Distribution::uniform(2), 1.0).is_err());
        assert!(ExponentQuery::new(&f, Distribution::uniform(3), 0.1).is_err());
        let big = vec![vec![vec![0.25; 4]; 4], vec![vec![0.1, 0.2, 0.3, 0.4]; 4]];
        let f = ChannelFamily::bistatic(vec!["a".into(), "b".into()], big).unwrap();
        let q = ExponentQuery::new(&f, Distribution::uniform(4), 0.0).unwrap();
        assert!(matches!(rho_joint(&q), Err(JcasError::Unsupported(_))));
    }
}
