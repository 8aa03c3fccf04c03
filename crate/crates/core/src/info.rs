//! Information measures over finite alphabets, in nats.
//!
//! Conventions: `0·ln 0 = 0` and `p·ln(p/0) = +∞` for `p > 0`. Infinite
//! values are returned as `f64::INFINITY` and propagate through every
//! minimization unchanged.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelFamily, ConditionalDistribution, Distribution};
use crate::error::{JcasError, Result};
use crate::optim::{dense_grid_max, golden_section_max};

/// Default termination width for the golden-section search on `ℓ`.
pub const CHERNOFF_TOL: f64 = 1e-9;

/// Step of the exhaustive `ℓ` grid used as the reference oracle.
pub const CHERNOFF_DENSE_STEP: f64 = 1e-5;

#[inline]
fn xlnx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// Shannon entropy of a probability vector.
pub fn entropy_of(p: &[f64]) -> f64 {
    -p.iter().map(|&v| xlnx(v)).sum::<f64>()
}

pub fn entropy(p: &Distribution) -> f64 {
    entropy_of(p.probs())
}

/// Binary entropy `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    -(xlnx(p) + xlnx(1.0 - p))
}

/// `D(p ‖ q)` for raw probability vectors of equal length.
pub fn kl_of(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).ln();
        }
    }
    d.max(0.0)
}

pub fn kl_divergence(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(JcasError::DimensionMismatch(format!(
            "KL between alphabets of size {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(kl_of(p.probs(), q.probs()))
}

fn check_kernel(p_x: &[f64], w: &ConditionalDistribution) -> Result<()> {
    if p_x.len() != w.inputs() {
        return Err(JcasError::DimensionMismatch(format!(
            "input distribution has {} entries, kernel has {} rows",
            p_x.len(),
            w.inputs()
        )));
    }
    Ok(())
}

/// `H(W|P_X)`, the conditional entropy of the kernel output.
pub fn conditional_entropy_of(p_x: &[f64], w: &[Vec<f64>]) -> f64 {
    p_x.iter()
        .zip(w)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, row)| p * entropy_of(row))
        .sum()
}

/// `I(P_X, W) = H(P_X∘W) − H(W|P_X)`.
pub fn mutual_information_of(p_x: &[f64], w: &[Vec<f64>]) -> f64 {
    let mut q = vec![0.0; w[0].len()];
    for (p, row) in p_x.iter().zip(w) {
        for (qy, v) in q.iter_mut().zip(row) {
            *qy += p * v;
        }
    }
    (entropy_of(&q) - conditional_entropy_of(p_x, w)).max(0.0)
}

pub fn mutual_information(p_x: &Distribution, w: &ConditionalDistribution) -> Result<f64> {
    check_kernel(p_x.probs(), w)?;
    Ok(mutual_information_of(p_x.probs(), w.rows()))
}

/// `D(P̂ ‖ W | P_X)`; rows with zero input mass are ignored.
pub fn conditional_kl_of(p_hat: &[Vec<f64>], w: &[Vec<f64>], p_x: &[f64]) -> f64 {
    let mut d = 0.0;
    for ((p, a), b) in p_x.iter().zip(p_hat).zip(w) {
        if *p > 0.0 {
            let k = kl_of(a, b);
            if k.is_infinite() {
                return f64::INFINITY;
            }
            d += p * k;
        }
    }
    d
}

pub fn conditional_kl(
    p_hat: &ConditionalDistribution,
    w: &ConditionalDistribution,
    p_x: &Distribution,
) -> Result<f64> {
    check_kernel(p_x.probs(), w)?;
    check_kernel(p_x.probs(), p_hat)?;
    if p_hat.outputs() != w.outputs() {
        return Err(JcasError::DimensionMismatch("kernels have different output alphabets".into()));
    }
    Ok(conditional_kl_of(p_hat.rows(), w.rows(), p_x.probs()))
}

/// Maximizer of the Chernoff objective for one ordered state pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffResult {
    pub value: f64,
    pub ell_star: f64,
}

/// `f(ℓ) = −Σ_x P_X(x) ln Σ_z W_s(z|x)^ℓ W_{s'}(z|x)^{1−ℓ}` for kernels
/// given as rows.
pub fn chernoff_objective(p_x: &[f64], ws: &[Vec<f64>], wt: &[Vec<f64>], ell: f64) -> f64 {
    let mut acc = 0.0;
    for ((p, a), b) in p_x.iter().zip(ws).zip(wt) {
        if *p <= 0.0 {
            continue;
        }
        let inner: f64 = a
            .iter()
            .zip(b)
            .map(|(&u, &v)| {
                if ell == 0.0 {
                    v
                } else if ell == 1.0 {
                    u
                } else if u == 0.0 || v == 0.0 {
                    0.0
                } else {
                    u.powf(ell) * v.powf(1.0 - ell)
                }
            })
            .sum();
        if inner <= 0.0 {
            return f64::INFINITY;
        }
        acc -= p * inner.ln();
    }
    acc
}

/// True when some input with positive mass has disjoint output supports
/// under the two kernels, making the pair perfectly distinguishable.
fn disjoint_somewhere(p_x: &[f64], ws: &[Vec<f64>], wt: &[Vec<f64>]) -> bool {
    p_x.iter()
        .zip(ws)
        .zip(wt)
        .any(|((p, a), b)| *p > 0.0 && a.iter().zip(b).all(|(u, v)| *u == 0.0 || *v == 0.0))
}

fn check_pair(p_x: &Distribution, family: &ChannelFamily, s: usize, t: usize) -> Result<()> {
    family.check_input(p_x)?;
    let k = family.num_states();
    if s >= k || t >= k {
        return Err(JcasError::InvalidArgument(format!("state index out of range (|S| = {k})")));
    }
    if s == t {
        return Err(JcasError::InvalidArgument("Chernoff information needs two distinct states".into()));
    }
    Ok(())
}

/// Chernoff information between the sensing kernels of states `s` and
/// `s_prime`, averaged over `p_x`. The objective is concave in `ℓ`, so a
/// golden-section search is exact up to `tol`.
pub fn chernoff_pairwise(
    p_x: &Distribution,
    family: &ChannelFamily,
    s: usize,
    s_prime: usize,
    tol: f64,
) -> Result<ChernoffResult> {
    check_pair(p_x, family, s, s_prime)?;
    Ok(chernoff_rows(p_x.probs(), family.sense(s).rows(), family.sense(s_prime).rows(), tol))
}

pub(crate) fn chernoff_rows(p_x: &[f64], ws: &[Vec<f64>], wt: &[Vec<f64>], tol: f64) -> ChernoffResult {
    if disjoint_somewhere(p_x, ws, wt) {
        return ChernoffResult { value: f64::INFINITY, ell_star: 0.5 };
    }
    let (ell, value) = golden_section_max(|l| chernoff_objective(p_x, ws, wt, l), 0.0, 1.0, tol);
    ChernoffResult { value: value.max(0.0), ell_star: ell }
}

/// Same quantity as [`chernoff_pairwise`] computed on a dense `ℓ` grid.
pub fn chernoff_pairwise_dense(
    p_x: &Distribution,
    family: &ChannelFamily,
    s: usize,
    s_prime: usize,
    step: f64,
) -> Result<ChernoffResult> {
    check_pair(p_x, family, s, s_prime)?;
    let (ws, wt) = (family.sense(s).rows(), family.sense(s_prime).rows());
    if disjoint_somewhere(p_x.probs(), ws, wt) {
        return Ok(ChernoffResult { value: f64::INFINITY, ell_star: 0.5 });
    }
    let (ell, value) = dense_grid_max(|l| chernoff_objective(p_x.probs(), ws, wt, l), 0.0, 1.0, step);
    Ok(ChernoffResult { value: value.max(0.0), ell_star: ell })
}

/// `ψ_s(P_X)`: the error exponent of the ML detector when the true state
/// is `s`, i.e. the smallest Chernoff information against any competitor.
pub fn psi_s(p_x: &Distribution, family: &ChannelFamily, s: usize, tol: f64) -> Result<f64> {
    family.require_states(2)?;
    family.check_input(p_x)?;
    if s >= family.num_states() {
        return Err(JcasError::InvalidArgument(format!("state {s} out of range")));
    }
    Ok(psi_rows(p_x.probs(), family, s, tol))
}

fn psi_rows(p_x: &[f64], family: &ChannelFamily, s: usize, tol: f64) -> f64 {
    (0..family.num_states())
        .filter(|&t| t != s)
        .map(|t| chernoff_rows(p_x, family.sense(s).rows(), family.sense(t).rows(), tol).value)
        .fold(f64::INFINITY, f64::min)
}

/// `φ(P_X)`: the worst-pair Chernoff information, the optimal open-loop
/// detection-error exponent for codewords of type `P_X`.
pub fn phi(p_x: &Distribution, family: &ChannelFamily, tol: f64) -> Result<f64> {
    family.require_states(2)?;
    family.check_input(p_x)?;
    Ok(phi_of(p_x.probs(), family, tol))
}

/// Unordered pairs suffice: the objective is symmetric under `ℓ ↔ 1 − ℓ`.
pub(crate) fn phi_of(p_x: &[f64], family: &ChannelFamily, tol: f64) -> f64 {
    let k = family.num_states();
    let mut best = f64::INFINITY;
    for s in 0..k {
        for t in s + 1..k {
            let v = chernoff_rows(p_x, family.sense(s).rows(), family.sense(t).rows(), tol).value;
            best = best.min(v);
        }
    }
    best
}

/// Closed-form rate and exponent for the binary family with a state-blind
/// BSC(`p`) communication channel and a BSC(`q`) sensing channel driven by
/// `X·S`, at input `Ber(alpha)`:
/// `R = h(α∗p) − h(p)`, `E = α·D(Ber(½) ‖ Ber(q))`.
pub fn binary_closed_forms(alpha: f64, p: f64, q: f64) -> Result<(f64, f64)> {
    if !(0.5..=1.0).contains(&alpha) {
        return Err(JcasError::InvalidArgument(format!("alpha = {alpha} outside [0.5, 1]")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(JcasError::InvalidArgument(format!("p = {p} outside (0, 1)")));
    }
    if !(q > 0.0 && q < 1.0) || q == 0.5 {
        return Err(JcasError::InvalidArgument(format!("q = {q} must lie in (0, 1) and differ from 0.5")));
    }
    let conv = alpha * (1.0 - p) + (1.0 - alpha) * p;
    let rate = (binary_entropy(conv) - binary_entropy(p)).max(0.0);
    let exponent = alpha * kl_of(&[0.5, 0.5], &[q, 1.0 - q]);
    Ok((rate, exponent))
}
