//! Mono-static tradeoff frontiers and the capacities that bound them.
//!
//! Frontiers come from an exhaustive scan of an input-distribution grid
//! followed by an upper-right Pareto envelope. `φ(P_X)` is a minimum of
//! convex functions of `P_X` and is neither concave nor convex, so a
//! constrained local solver offers no guarantee the scan does not.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelFamily, ConditionalDistribution, Distribution};
use crate::error::{JcasError, Result};
use crate::info::{binary_closed_forms, kl_of, mutual_information_of, phi_of, CHERNOFF_TOL};
use crate::optim::{golden_section_max, nelder_mead, project_to_simplex, simplex_grid};

/// Duality-gap target for Blahut–Arimoto.
pub const BA_TOL: f64 = 1e-9;
pub const BA_MAX_ITER: usize = 100_000;
/// Number of exponent targets swept by the closed-loop frontier.
pub const E_SWEEP_SAMPLES: usize = 200;
/// Exponents closer than this are treated as equal on an envelope.
pub const EXPONENT_TIE_TOL: f64 = 1e-9;
/// Frontier scans refuse input alphabets larger than this.
pub const MAX_FRONTIER_INPUTS: usize = 4;

/// Default simplex-grid resolution for a frontier scan over `x_size` inputs.
pub fn default_resolution(x_size: usize) -> Result<usize> {
    match x_size {
        1 => Ok(1),
        2 => Ok(200),
        3 => Ok(60),
        4 => Ok(24),
        n => Err(JcasError::Unsupported(format!(
            "frontier scans support |X| <= {MAX_FRONTIER_INPUTS}, got {n}"
        ))),
    }
}

fn check_frontier_size(family: &ChannelFamily) -> Result<()> {
    if family.x_size() > MAX_FRONTIER_INPUTS {
        return Err(JcasError::Unsupported(format!(
            "frontier scans support |X| <= {MAX_FRONTIER_INPUTS}, got {}",
            family.x_size()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    MonoOpen,
    MonoClosedInner,
    Corollary3,
    BiSucc,
    BiJoint,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::MonoOpen => "mono_open",
            CurveKind::MonoClosedInner => "mono_closed_inner",
            CurveKind::Corollary3 => "corollary3",
            CurveKind::BiSucc => "bi_succ",
            CurveKind::BiJoint => "bi_joint",
        }
    }
}

/// Boundary of a rate / exponent region as `(E, R)` pairs in nats, sorted
/// by increasing `E` with `R` non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionCurve {
    pub points: Vec<(f64, f64)>,
    pub kind: CurveKind,
    pub grid_resolution: usize,
    pub metadata: BTreeMap<String, String>,
}

impl RegionCurve {
    pub fn new(kind: CurveKind, grid_resolution: usize, points: Vec<(f64, f64)>) -> Self {
        RegionCurve { points, kind, grid_resolution, metadata: BTreeMap::new() }
    }

    /// Largest rate achievable together with exponent at least `e`, reading
    /// the curve as a union of rectangles. `None` past the last point.
    pub fn rate_at(&self, e: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|(pe, _)| *pe >= e - EXPONENT_TIE_TOL)
            .map(|(_, r)| *r)
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
    }

    pub fn max_exponent(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.0)
    }

    pub fn max_rate(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.1)
    }

    /// CSV with a `#` metadata preamble and an `E_nats,R_nats` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind: {}", self.kind.as_str());
        let _ = writeln!(out, "# resolution: {}", self.grid_resolution);
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str("E_nats,R_nats\n");
        for (e, r) in &self.points {
            let _ = writeln!(out, "{e},{r}");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses the body of [`RegionCurve::to_csv`]; metadata lines are kept.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut resolution = 0;
        let mut metadata = BTreeMap::new();
        let mut points = Vec::new();
        for line in text.lines() {
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta
                    .split_once(": ")
                    .ok_or_else(|| JcasError::Malformed(format!("bad preamble line {line:?}")))?;
                match k {
                    "kind" => {
                        kind = Some(serde_json::from_value(serde_json::Value::String(v.to_string()))?)
                    }
                    "resolution" => {
                        resolution = v.parse().map_err(|_| JcasError::Malformed(format!("bad resolution {v:?}")))?
                    }
                    _ => {
                        metadata.insert(k.to_string(), v.to_string());
                    }
                }
            } else if line == "E_nats,R_nats" || line.is_empty() {
                continue;
            } else {
                let (e, r) = line
                    .split_once(',')
                    .ok_or_else(|| JcasError::Malformed(format!("bad row {line:?}")))?;
                let parse = |t: &str| t.parse::<f64>().map_err(|_| JcasError::Malformed(format!("bad number {t:?}")));
                points.push((parse(e)?, parse(r)?));
            }
        }
        let kind = kind.ok_or_else(|| JcasError::Malformed("missing `# kind:` line".into()))?;
        Ok(RegionCurve { points, kind, grid_resolution: resolution, metadata })
    }
}

/// Upper-right Pareto envelope of `(E, R)` points, returned with `E`
/// strictly increasing and `R` strictly decreasing. Exponents within
/// [`EXPONENT_TIE_TOL`] of each other count as one exponent; ties keep the
/// larger rate.
pub fn pareto_envelope(mut points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    points.retain(|(e, r)| !e.is_nan() && !r.is_nan());
    points.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (e, r) in points {
        if let Some(last) = out.last_mut() {
            if last.0 - e <= EXPONENT_TIE_TOL {
                if r > last.1 {
                    last.1 = r;
                }
                continue;
            }
        }
        let best = out.last().map_or(f64::NEG_INFINITY, |p| p.1);
        if r > best {
            out.push((e, r));
        }
    }
    out.reverse();
    out
}

/// Capacity-type optimum over input distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    pub value: f64,
    pub argmax_input: Distribution,
    /// For the compound capacity: `I(argmax, W_s)` per state. For the
    /// worst-case capacity: each state's own capacity. For a single state:
    /// that state's capacity alone.
    pub per_state_values: Vec<f64>,
}

/// Blahut–Arimoto for a single DMC. Stops once the gap between the upper
/// bound `max_x D(W(·|x) ‖ q)` and the lower bound `ln Σ p(x) e^{D_x}`
/// drops below `tol`.
pub fn blahut_arimoto(w: &ConditionalDistribution, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>)> {
    let k = w.inputs();
    let mut p = vec![1.0 / k as f64; k];
    let mut gap = f64::INFINITY;
    for _ in 0..max_iter {
        let q = w.output_marginal(&p);
        let d: Vec<f64> = w.rows().iter().map(|row| kl_of(row, &q)).collect();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // ln Σ p e^{D} computed relative to the max for stability
        let z: f64 = p.iter().zip(&d).map(|(pi, di)| pi * (di - upper).exp()).sum();
        let lower = upper + z.ln();
        gap = upper - lower;
        if gap < tol {
            let value = mutual_information_of(&p, w.rows());
            return Ok((value, p));
        }
        for (pi, di) in p.iter_mut().zip(&d) {
            *pi *= (di - upper).exp() / z;
        }
    }
    Err(JcasError::NonConvergence { iterations: max_iter, gap })
}

/// Capacity of the communication kernel of state `s`.
pub fn per_state_capacity(family: &ChannelFamily, s: usize, tol: f64) -> Result<CapacityResult> {
    if s >= family.num_states() {
        return Err(JcasError::InvalidArgument(format!("state {s} out of range")));
    }
    let (value, p) = blahut_arimoto(family.comm(s), tol, BA_MAX_ITER)?;
    Ok(CapacityResult {
        value,
        argmax_input: Distribution::from_vec_unchecked(p),
        per_state_values: vec![value],
    })
}

fn min_mi(family: &ChannelFamily, p: &[f64]) -> f64 {
    (0..family.num_states())
        .map(|s| mutual_information_of(p, family.comm(s).rows()))
        .fold(f64::INFINITY, f64::min)
}

/// Pairwise golden-section moves of mass between coordinates, repeated
/// until a sweep improves `g` by less than `tol`. `g` must be concave.
fn refine_concave_on_simplex<G: Fn(&[f64]) -> f64>(g: G, start: Vec<f64>, tol: f64) -> (Vec<f64>, f64) {
    let k = start.len();
    let mut p = start;
    let mut best = g(&p);
    for _ in 0..500 {
        let before = best;
        for i in 0..k {
            for j in i + 1..k {
                let (lo, hi) = (-p[i], p[j]);
                if hi - lo <= 0.0 {
                    continue;
                }
                let along = |t: f64| {
                    let mut q = p.clone();
                    q[i] += t;
                    q[j] -= t;
                    q[i] = q[i].max(0.0);
                    q[j] = q[j].max(0.0);
                    g(&q)
                };
                let (t, v) = golden_section_max(along, lo, hi, 1e-12);
                if v > best {
                    p[i] = (p[i] + t).max(0.0);
                    p[j] = (p[j] - t).max(0.0);
                    best = v;
                }
            }
        }
        if best - before < tol {
            break;
        }
    }
    if k > 2 {
        // kinks of a min of concave functions can stall coordinate moves
        let (x, v) = nelder_mead(
            |v| {
                let q = project_to_simplex(v);
                -g(&q)
            },
            &p,
            1e-3,
            1e-15,
            1e-12,
            20_000,
        );
        if -v > best {
            p = project_to_simplex(&x);
            best = -v;
        }
    }
    (p, best)
}

/// Compound capacity `max_P min_s I(P, W_{Y|X,s})`: grid seed, then local
/// refinement of the concave objective.
pub fn compound_capacity(family: &ChannelFamily, resolution: usize, refine_tol: f64) -> Result<CapacityResult> {
    let seeds: Vec<Distribution> = simplex_grid(family.x_size(), resolution)?.collect();
    let scored: Vec<f64> = seeds.par_iter().map(|p| min_mi(family, p.probs())).collect();
    let (best_idx, _) = scored
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let (p, value) = refine_concave_on_simplex(|q| min_mi(family, q), seeds[best_idx].probs().to_vec(), refine_tol);
    let per_state_values = (0..family.num_states())
        .map(|s| mutual_information_of(&p, family.comm(s).rows()))
        .collect();
    Ok(CapacityResult { value, argmax_input: Distribution::from_vec_unchecked(p), per_state_values })
}

/// Worst-case capacity `min_s max_P I(P, W_{Y|X,s})`.
pub fn worst_case_capacity(family: &ChannelFamily, tol: f64) -> Result<CapacityResult> {
    let per: Vec<CapacityResult> = (0..family.num_states())
        .map(|s| per_state_capacity(family, s, tol))
        .collect::<Result<_>>()?;
    let (worst, _) = per
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, c)| if c.value < acc.1 { (i, c.value) } else { acc });
    Ok(CapacityResult {
        value: per[worst].value,
        argmax_input: per[worst].argmax_input.clone(),
        per_state_values: per.iter().map(|c| c.value).collect(),
    })
}

/// Per-candidate evaluations shared by the mono-static frontiers.
struct Scan {
    exponents: Vec<f64>,
    rates: Vec<Vec<f64>>,
}

fn scan(family: &ChannelFamily, candidates: &[Vec<f64>], tol: f64) -> Scan {
    let evaluated: Vec<(f64, Vec<f64>)> = candidates
        .par_iter()
        .map(|p| {
            let e = phi_of(p, family, tol);
            let r = (0..family.num_states())
                .map(|s| mutual_information_of(p, family.comm(s).rows()))
                .collect();
            (e, r)
        })
        .collect();
    let (exponents, rates) = evaluated.into_iter().unzip();
    Scan { exponents, rates }
}

fn grid_candidates(family: &ChannelFamily, resolution: usize) -> Result<Vec<Vec<f64>>> {
    Ok(simplex_grid(family.x_size(), resolution)?.map(|d| d.probs().to_vec()).collect())
}

/// Open-loop mono-static frontier: the envelope of
/// `(φ(P), min_s I(P, W_{Y|X,s}))` over a resolution-`resolution` grid of
/// input distributions plus the compound-capacity maximizer.
pub fn mono_open_region(family: &ChannelFamily, resolution: usize, tol: f64) -> Result<RegionCurve> {
    check_frontier_size(family)?;
    family.require_states(2)?;
    family.require_distinguishable()?;
    let mut candidates = grid_candidates(family, resolution)?;
    let compound = compound_capacity(family, resolution, 1e-12)?;
    candidates.push(compound.argmax_input.probs().to_vec());
    let s = scan(family, &candidates, tol);
    let pts = s
        .exponents
        .iter()
        .zip(&s.rates)
        .map(|(e, r)| (*e, r.iter().cloned().fold(f64::INFINITY, f64::min)))
        .collect();
    let mut curve = RegionCurve::new(CurveKind::MonoOpen, resolution, pareto_envelope(pts));
    curve.metadata.insert("compound_capacity".into(), compound.value.to_string());
    Ok(curve)
}

/// Closed-loop inner bound: for each target exponent `E` on a uniform sweep
/// of `[0, max_P φ(P)]`, `R(E) = min_s max{ I(P, W_{Y|X,s}) : φ(P) ≥ E }`.
/// The union over per-state input tuples separates across states, so each
/// inner maximum is solved on its own.
pub fn mono_closed_inner_region(
    family: &ChannelFamily,
    resolution: usize,
    e_samples: usize,
    tol: f64,
) -> Result<RegionCurve> {
    check_frontier_size(family)?;
    family.require_states(2)?;
    family.require_distinguishable()?;
    if e_samples < 2 {
        return Err(JcasError::InvalidArgument("need at least two exponent samples".into()));
    }
    let mut candidates = grid_candidates(family, resolution)?;
    candidates.push(compound_capacity(family, resolution, 1e-12)?.argmax_input.probs().to_vec());
    for st in 0..family.num_states() {
        candidates.push(per_state_capacity(family, st, BA_TOL)?.argmax_input.probs().to_vec());
    }
    let s = scan(family, &candidates, tol);
    let e_max = s.exponents.iter().cloned().fold(0.0, f64::max);
    let points = (0..e_samples)
        .map(|k| {
            let e = if k + 1 == e_samples { e_max } else { e_max * k as f64 / (e_samples - 1) as f64 };
            let r = (0..family.num_states())
                .map(|st| {
                    s.exponents
                        .iter()
                        .zip(&s.rates)
                        .filter(|(pe, _)| **pe >= e - EXPONENT_TIE_TOL)
                        .map(|(_, r)| r[st])
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            (e, r)
        })
        .collect();
    let mut curve = RegionCurve::new(CurveKind::MonoClosedInner, resolution, points);
    curve.metadata.insert("e_samples".into(), e_samples.to_string());
    Ok(curve)
}

/// The binary family whose communication channel is a state-blind BSC(`p`)
/// and whose sensing output is `Z = X·S ⊕ N`, `N ~ Ber(q)`.
pub fn corollary3_family(p: f64, q: f64) -> Result<ChannelFamily> {
    let bsc = |e: f64| vec![vec![1.0 - e, e], vec![e, 1.0 - e]];
    ChannelFamily::new(
        vec!["0".into(), "1".into()],
        vec![bsc(p), bsc(p)],
        vec![vec![vec![1.0 - q, q], vec![1.0 - q, q]], bsc(q)],
    )
}

/// Closed-form frontier of [`corollary3_family`], sampled at `num_alpha`
/// uniformly spaced `α ∈ [0.5, 1]`.
pub fn corollary3_region(p: f64, q: f64, num_alpha: usize) -> Result<RegionCurve> {
    if num_alpha < 2 {
        return Err(JcasError::InvalidArgument("need at least two alpha samples".into()));
    }
    let mut points = (0..num_alpha)
        .map(|k| {
            let alpha = if k + 1 == num_alpha { 1.0 } else { 0.5 + 0.5 * k as f64 / (num_alpha - 1) as f64 };
            binary_closed_forms(alpha, p, q).map(|(r, e)| (e, r))
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut curve = RegionCurve::new(CurveKind::Corollary3, num_alpha, points);
    curve.metadata.insert("p".into(), p.to_string());
    curve.metadata.insert("q".into(), q.to_string());
    Ok(curve)
}

/// Default refinement target for [`compound_capacity`].
pub const COMPOUND_REFINE_TOL: f64 = 1e-12;

/// Convenience wrapper around [`crate::info::phi`] with the default tolerance.
pub fn max_phi_on_grid(family: &ChannelFamily, resolution: usize) -> Result<(f64, Distribution)> {
    let cands = grid_candidates(family, resolution)?;
    let vals: Vec<f64> = cands.par_iter().map(|p| phi_of(p, family, CHERNOFF_TOL)).collect();
    let (i, v) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    Ok((v, Distribution::from_vec_unchecked(cands[i].clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bsc(p: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
    }

    fn table1() -> ChannelFamily {
        let rows = |a: f64, b: f64| vec![vec![a, 1.0 - a], vec![b, 1.0 - b]];
        let w = vec![rows(0.95, 0.45), rows(0.9, 0.2), rows(0.5, 0.03)];
        ChannelFamily::new(vec!["0".into(), "1".into(), "2".into()], w.clone(), w).unwrap()
    }

    fn table2() -> ChannelFamily {
        let w = vec![bsc(0.1), bsc(0.2), bsc(0.3)];
        ChannelFamily::new(vec!["0".into(), "1".into(), "2".into()], w.clone(), w).unwrap()
    }

    fn table3() -> ChannelFamily {
        ChannelFamily::bistatic(vec!["0".into(), "1".into()], vec![bsc(0.3), bsc(0.6)]).unwrap()
    }

    #[test]
    fn blahut_arimoto_reference_channels() {
        let f = table2();
        let c = per_state_capacity(&f, 2, BA_TOL).unwrap();
        assert_abs_diff_eq!(c.value, 0.082283, epsilon = 1e-6);
        assert_abs_diff_eq!(c.argmax_input[0], 0.5, epsilon = 1e-9);

        let id = vec![vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]];
        let f = ChannelFamily::new(vec!["a".into()], id.clone(), id).unwrap();
        assert_abs_diff_eq!(per_state_capacity(&f, 0, BA_TOL).unwrap().value, 3f64.ln(), epsilon = 1e-9);

        let flat = vec![vec![vec![0.3, 0.7], vec![0.3, 0.7]]];
        let f = ChannelFamily::new(vec!["a".into()], flat.clone(), flat).unwrap();
        assert!(per_state_capacity(&f, 0, BA_TOL).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn blahut_arimoto_asymmetric_matches_dense_grid() {
        let w = table1();
        for s in 0..3 {
            let c = per_state_capacity(&w, s, BA_TOL).unwrap();
            let dense = (0..=2000)
                .map(|k| {
                    let a = k as f64 / 2000.0;
                    mutual_information_of(&[1.0 - a, a], w.comm(s).rows())
                })
                .fold(0.0, f64::max);
            assert!(c.value >= dense - 1e-9);
            assert!(c.value - dense < 1e-5, "{} vs {}", c.value, dense);
        }
    }

    #[test]
    fn compound_capacity_examples() {
        let c = compound_capacity(&table3(), 200, COMPOUND_REFINE_TOL).unwrap();
        assert_abs_diff_eq!(c.value, 0.020135, epsilon = 1e-6);
        let c = compound_capacity(&table2(), 200, COMPOUND_REFINE_TOL).unwrap();
        assert_abs_diff_eq!(c.value, 0.082283, epsilon = 1e-6);
        let single = vec![bsc(0.2)];
        let f = ChannelFamily::new(vec!["a".into()], single.clone(), single).unwrap();
        let a = compound_capacity(&f, 50, COMPOUND_REFINE_TOL).unwrap();
        let b = per_state_capacity(&f, 0, BA_TOL).unwrap();
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-9);
    }

    #[test]
    fn worst_case_at_least_compound() {
        for f in [table1(), table2(), table3()] {
            let wc = worst_case_capacity(&f, BA_TOL).unwrap();
            let cc = compound_capacity(&f, 200, COMPOUND_REFINE_TOL).unwrap();
            assert!(cc.value <= wc.value + 1e-9);
            let min_at = cc.per_state_values.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(min_at, cc.value, epsilon = 1e-12);
        }
        let wc = worst_case_capacity(&table2(), BA_TOL).unwrap();
        assert_abs_diff_eq!(wc.value, 0.082283, epsilon = 1e-6);
    }

    #[test]
    fn worst_case_equals_compound_when_states_share_w_y() {
        let w_y = vec![bsc(0.2), bsc(0.2)];
        let w_z = vec![bsc(0.1), bsc(0.3)];
        let f = ChannelFamily::new(vec!["a".into(), "b".into()], w_y, w_z).unwrap();
        let wc = worst_case_capacity(&f, BA_TOL).unwrap();
        let cc = compound_capacity(&f, 200, COMPOUND_REFINE_TOL).unwrap();
        assert_abs_diff_eq!(wc.value, cc.value, epsilon = 1e-9);
    }

    #[test]
    fn compound_capacity_ternary_refines_off_grid() {
        let w = vec![
            vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.7, 0.2], vec![0.3, 0.3, 0.4]],
            vec![vec![0.6, 0.2, 0.2], vec![0.2, 0.5, 0.3], vec![0.1, 0.1, 0.8]],
        ];
        let f = ChannelFamily::new(vec!["a".into(), "b".into()], w.clone(), w).unwrap();
        let fine = compound_capacity(&f, 12, COMPOUND_REFINE_TOL).unwrap();
        let dense = simplex_grid(3, 150)
            .unwrap()
            .map(|p| min_mi(&f, p.probs()))
            .fold(0.0, f64::max);
        assert!(fine.value >= dense - 1e-9, "{} < {}", fine.value, dense);
        assert!(fine.value - dense < 1e-4);
    }

    #[test]
    fn envelope_is_monotone_and_breaks_ties_toward_rate() {
        let env = pareto_envelope(vec![(0.1, 0.5), (0.2, 0.4), (0.2, 0.45), (0.15, 0.3), (0.3, 0.0)]);
        assert_eq!(env, vec![(0.1, 0.5), (0.2, 0.45), (0.3, 0.0)]);
        assert!(pareto_envelope(vec![]).is_empty());
    }

    #[test]
    fn table2_open_region_is_a_single_vertex() {
        let f = table2();
        assert!(f.check_output_symmetry(1e-9).symmetric);
        let c = mono_open_region(&f, 200, CHERNOFF_TOL).unwrap();
        assert_eq!(c.points.len(), 1, "{:?}", c.points);
        assert_abs_diff_eq!(c.points[0].1, 0.082283, epsilon = 5e-4);
        let closed = mono_closed_inner_region(&f, 200, 50, CHERNOFF_TOL).unwrap();
        for (e, r) in &closed.points {
            assert_abs_diff_eq!(*r, c.rate_at(*e).unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn table1_open_region_trades_off() {
        let f = table1();
        let c = mono_open_region(&f, 200, CHERNOFF_TOL).unwrap();
        assert!(c.points.len() > 10);
        for w in c.points.windows(2) {
            assert!(w[1].0 > w[0].0 && w[1].1 < w[0].1);
        }
        let last = c.points.last().unwrap();
        assert!(last.1 < 1e-12);
        let phi_x1 = phi_of(&[0.0, 1.0], &f, CHERNOFF_TOL);
        assert_abs_diff_eq!(last.0, phi_x1, epsilon = 1e-12);
    }

    #[test]
    fn closed_loop_dominates_open_loop_on_table1() {
        let f = table1();
        let open = mono_open_region(&f, 100, CHERNOFF_TOL).unwrap();
        let closed = mono_closed_inner_region(&f, 100, 60, CHERNOFF_TOL).unwrap();
        let wc = worst_case_capacity(&f, BA_TOL).unwrap();
        assert_abs_diff_eq!(closed.points[0].1, wc.value, epsilon = 1e-12);
        for (e, r) in &closed.points {
            assert!(*r >= open.rate_at(*e).unwrap() - 1e-12);
        }
        assert!(closed.points[0].1 - open.rate_at(0.0).unwrap() > 1e-3);
    }

    #[test]
    fn corollary3_examples() {
        let c = corollary3_region(0.1, 0.3, 101).unwrap();
        let kl = kl_of(&[0.5, 0.5], &[0.3, 0.7]);
        assert_abs_diff_eq!(c.points[0].0, 0.5 * kl, epsilon = 1e-15);
        assert_abs_diff_eq!(c.points[0].1, std::f64::consts::LN_2 - crate::info::binary_entropy(0.1), epsilon = 1e-15);
        assert_abs_diff_eq!(c.points[100].0, kl, epsilon = 1e-15);
        assert!(c.points[100].1.abs() < 1e-15);
        for w in c.points.windows(2) {
            assert!(w[1].0 > w[0].0 && w[1].1 <= w[0].1);
        }
        let flat = corollary3_region(0.5, 0.3, 11).unwrap();
        assert!(flat.points.iter().all(|p| p.1 == 0.0));
        assert!(corollary3_region(0.1, 0.5, 11).is_err());
    }

    #[test]
    fn csv_round_trip_and_empty_curve() {
        let mut c = corollary3_region(0.1, 0.3, 5).unwrap();
        c.metadata.insert("channel_sha256".into(), "abc".into());
        let back = RegionCurve::from_csv(&c.to_csv()).unwrap();
        assert_eq!(back, c);
        let empty = RegionCurve::new(CurveKind::MonoOpen, 10, vec![]);
        assert_eq!(empty.to_csv().lines().last(), Some("E_nats,R_nats"));
    }

    #[test]
    fn rejects_indistinguishable_and_oversized() {
        let same = vec![bsc(0.2), bsc(0.2)];
        let f = ChannelFamily::new(vec!["a".into(), "b".into()], same.clone(), same).unwrap();
        assert!(matches!(mono_open_region(&f, 10, CHERNOFF_TOL), Err(JcasError::Indistinguishable(_))));
        assert!(default_resolution(5).is_err());
    }
}
