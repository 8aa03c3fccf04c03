//! Monte-Carlo validation of the exponents.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! `(seed, tag, n, state, trial)`, and trials are reduced in fixed-size
//! chunks whose partial sums are combined in chunk order, so reports do not
//! depend on the number of worker threads.

use std::fmt::Write as _;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::channel::{ChannelFamily, ConditionalDistribution, Distribution};
use crate::error::{JcasError, Result};
use crate::info::{chernoff_rows, CHERNOFF_TOL};

pub const MIN_TRIALS: usize = 100;
/// Default cap on the `M·|S|` likelihood table of the bi-static decoder.
pub const DEFAULT_MEMORY_CAP: usize = 1 << 24;
/// Minimum error count for a block length to enter the exponent fit.
pub const MIN_FIT_ERRORS: u64 = 10;
const CHUNK: usize = 2048;
const Z95: f64 = 1.959_963_984_540_054;

const TAG_CODEBOOK: u64 = 1;
const TAG_MONO: u64 = 2;
const TAG_CLOSED: u64 = 3;
const TAG_BI: u64 = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for one stream of the simulation.
pub fn stream_rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed);
    for p in parts {
        h = splitmix(h ^ splitmix(*p));
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Symbol counts of an `n`-type; fails unless `n·P(x)` is integral.
pub fn type_counts(p: &Distribution, n: usize) -> Result<Vec<usize>> {
    p.probs()
        .iter()
        .enumerate()
        .map(|(x, v)| {
            let c = v * n as f64;
            let r = c.round();
            if (c - r).abs() > 1e-9 * n.max(1) as f64 {
                return Err(JcasError::InvalidArgument(format!(
                    "composition not integral: n*P({x}) = {c} for n = {n}"
                )));
            }
            Ok(r as usize)
        })
        .collect()
}

/// Nearest `n`-type by largest-remainder rounding (ties to the lower index).
pub fn round_to_type(p: &Distribution, n: usize) -> Distribution {
    let scaled: Vec<f64> = p.probs().iter().map(|v| v * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|v| v.floor() as usize).collect();
    let mut left = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| (scaled[b] - scaled[b].floor()).total_cmp(&(scaled[a] - scaled[a].floor())).then(a.cmp(&b)));
    for &x in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[x] += 1;
        left -= 1;
    }
    Distribution::from_vec_unchecked(counts.iter().map(|&c| c as f64 / n as f64).collect())
}

fn canonical_sequence(counts: &[usize]) -> Vec<usize> {
    counts.iter().enumerate().flat_map(|(x, &c)| std::iter::repeat_n(x, c)).collect()
}

/// `M` codewords of length `n`, each of the exact composition of the type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Codebook {
    pub n: usize,
    pub codewords: Vec<Vec<usize>>,
    pub seed: u64,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }
}

/// Independent uniform draws (with replacement) from the type class of
/// `p_type`, each a seeded shuffle of the canonical sequence.
pub fn gen_constant_composition_codebook(n: usize, m: usize, p_type: &Distribution, seed: u64) -> Result<Codebook> {
    codebook_stream(n, m, p_type, seed, 0)
}

fn codebook_stream(n: usize, m: usize, p_type: &Distribution, seed: u64, stream: u64) -> Result<Codebook> {
    if m < 1 {
        return Err(JcasError::InvalidArgument("codebook needs at least one codeword".into()));
    }
    let base = canonical_sequence(&type_counts(p_type, n)?);
    let codewords = (0..m)
        .map(|w| {
            let mut rng = stream_rng(seed, &[TAG_CODEBOOK, stream, n as u64, w as u64]);
            let mut c = base.clone();
            c.shuffle(&mut rng);
            c
        })
        .collect();
    Ok(Codebook { n, codewords, seed })
}

/// Wilson score interval at 95 %.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Least-squares slope of `−ln(errors/trials)` against `n` over the points
/// with at least [`MIN_FIT_ERRORS`] errors; at least three are required.
pub fn estimate_exponent(points: &[(usize, u64, u64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e, t)| *e >= MIN_FIT_ERRORS && *t > 0)
        .map(|&(n, e, t)| (n as f64, e as f64 / t as f64))
        .collect();
    fit_slope(&usable)
}

fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(JcasError::InsufficientData(format!(
            "{} block lengths with at least {MIN_FIT_ERRORS} errors, need 3",
            points.len()
        )));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| -p.1.ln()).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (-p.1.ln() - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(JcasError::InsufficientData("block lengths must differ".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Draw observations from the true channel.
    Direct,
    /// Importance sampling from a mixture of Chernoff-tilted channels, one
    /// per competing state; `pd` is the weighted estimate.
    Tilted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BiMode {
    Joint,
    Successive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum ExponentFit {
    Fitted(f64),
    /// No detection error at any block length.
    Infinite,
    InsufficientData,
}

/// One block length of a simulation. `det_errors` and `pd` refer to the
/// state with the largest detection-error rate, `comm_errors` and `pc` to
/// the state with the largest communication-error rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub n: usize,
    /// Trials per true state.
    pub trials: usize,
    pub det_errors: u64,
    pub comm_errors: u64,
    pub pd: f64,
    pub pc: f64,
    pub pd_lo: f64,
    pub pd_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
    pub fitted_exponent: ExponentFit,
    pub config: serde_json::Value,
}

impl SimReport {
    fn new(rows: Vec<SimRow>, config: serde_json::Value) -> Self {
        let fitted_exponent = if rows.iter().all(|r| r.det_errors == 0) {
            ExponentFit::Infinite
        } else {
            let usable: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.det_errors >= MIN_FIT_ERRORS && r.pd > 0.0)
                .map(|r| (r.n as f64, r.pd))
                .collect();
            fit_slope(&usable).map_or(ExponentFit::InsufficientData, ExponentFit::Fitted)
        };
        SimReport { rows, fitted_exponent, config }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,trials,det_errors,comm_errors,pd,pc,pd_lo,pd_hi\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.n, r.trials, r.det_errors, r.comm_errors, r.pd, r.pc, r.pd_lo, r.pd_hi
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn log_table(k: &ConditionalDistribution) -> Vec<Vec<f64>> {
    k.rows().iter().map(|r| r.iter().map(|v| v.ln()).collect()).collect()
}

fn samplers(rows: &[Vec<f64>]) -> Vec<WeightedIndex<f64>> {
    rows.iter()
        .map(|r| WeightedIndex::new(r).expect("stochastic row has positive mass"))
        .collect()
}

/// `Σ N(x,z) ln K(z|x)` over observed pairs only.
fn score(counts: &[Vec<u32>], table: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for (cr, tr) in counts.iter().zip(table) {
        for (c, t) in cr.iter().zip(tr) {
            if *c > 0 {
                if *t == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                acc += *c as f64 * t;
            }
        }
    }
    acc
}

/// Index of the largest value; ties go to the lowest index.
fn argmax(vals: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in vals.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn draw_counts(rng: &mut ChaCha8Rng, xs: &[usize], rows: &[WeightedIndex<f64>], nx: usize, nz: usize) -> Vec<Vec<u32>> {
    let mut counts = vec![vec![0u32; nz]; nx];
    for &x in xs {
        counts[x][rows[x].sample(rng)] += 1;
    }
    counts
}

fn ml_state(counts: &[Vec<u32>], tables: &[Vec<Vec<f64>>]) -> usize {
    argmax(tables.iter().map(|t| score(counts, t)))
}

#[derive(Default, Clone, Copy)]
struct Tally {
    det: u64,
    comm: u64,
    weight: f64,
    weight_sq: f64,
}

/// Runs `trials` trials, chunked so the float reductions are reproducible.
fn run_trials<F>(trials: usize, trial: F) -> Tally
where
    F: Fn(u64) -> Tally + Sync,
{
    let chunks: Vec<Tally> = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = Tally::default();
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let r = trial(t as u64);
                acc.det += r.det;
                acc.comm += r.comm;
                acc.weight += r.weight;
                acc.weight_sq += r.weight_sq;
            }
            acc
        })
        .collect();
    chunks.into_iter().fold(Tally::default(), |mut a, r| {
        a.det += r.det;
        a.comm += r.comm;
        a.weight += r.weight;
        a.weight_sq += r.weight_sq;
        a
    })
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(JcasError::InvalidArgument(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

/// Builds a row from per-state tallies of direct sampling.
fn direct_row(n: usize, trials: usize, tallies: &[Tally]) -> SimRow {
    let det = tallies.iter().map(|t| t.det).max().unwrap_or(0);
    let comm = tallies.iter().map(|t| t.comm).max().unwrap_or(0);
    let (lo, hi) = wilson_interval(det, trials as u64);
    SimRow {
        n,
        trials,
        det_errors: det,
        comm_errors: comm,
        pd: det as f64 / trials as f64,
        pc: comm as f64 / trials as f64,
        pd_lo: lo,
        pd_hi: hi,
    }
}

/// Tilted proposals `Q_{s'}(z|x) ∝ W_s(z|x)^ℓ W_{s'}(z|x)^{1−ℓ}` at the
/// Chernoff-optimal `ℓ` of each competing pair.
fn tilted_kernels(family: &ChannelFamily, p_x: &[f64], s: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    let ws = family.sense(s).rows();
    (0..family.num_states())
        .filter(|&t| t != s)
        .map(|t| {
            let wt = family.sense(t).rows();
            let ell = chernoff_rows(p_x, ws, wt, CHERNOFF_TOL).ell_star;
            ws.iter()
                .zip(wt)
                .enumerate()
                .map(|(x, (a, b))| {
                    let row: Vec<f64> = a.iter().zip(b).map(|(u, v)| u.powf(ell) * v.powf(1.0 - ell)).collect();
                    let z: f64 = row.iter().sum();
                    if z <= 0.0 {
                        return Err(JcasError::InvalidArgument(format!(
                            "tilted sampler: states {s} and {t} have disjoint supports at input {x}"
                        )));
                    }
                    Ok(row.into_iter().map(|v| v / z).collect())
                })
                .collect()
        })
        .collect()
}

fn log_mean_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + (v.iter().map(|x| (x - m).exp()).sum::<f64>() / v.len() as f64).ln()
}

/// Open-loop mono-static ML state detection along a codeword of type
/// `p_type` for each `n` in `n_list`.
pub fn simulate_mono_open(
    family: &ChannelFamily,
    p_type: &Distribution,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<SimReport> {
    check_trials(trials)?;
    family.require_states(2)?;
    family.check_input(p_type)?;
    let (nx, nz, ns) = (family.x_size(), family.z_size(), family.num_states());
    let tables: Vec<Vec<Vec<f64>>> = (0..ns).map(|s| log_table(family.sense(s))).collect();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let xs = gen_constant_composition_codebook(n, 1, p_type, seed)?.codewords.remove(0);
        let mut tallies = Vec::with_capacity(ns);
        for s in 0..ns {
            let tally = match sampler {
                Sampler::Direct => {
                    let draw = samplers(family.sense(s).rows());
                    run_trials(trials, |t| {
                        let mut rng = stream_rng(seed, &[TAG_MONO, n as u64, s as u64, t]);
                        let counts = draw_counts(&mut rng, &xs, &draw, nx, nz);
                        let err = ml_state(&counts, &tables) != s;
                        Tally { det: err as u64, ..Tally::default() }
                    })
                }
                Sampler::Tilted => {
                    let proposals = tilted_kernels(family, p_type.probs(), s)?;
                    let draws: Vec<Vec<WeightedIndex<f64>>> = proposals.iter().map(|q| samplers(q)).collect();
                    let q_tables: Vec<Vec<Vec<f64>>> =
                        proposals.iter().map(|q| q.iter().map(|r| r.iter().map(|v| v.ln()).collect()).collect()).collect();
                    run_trials(trials, |t| {
                        let mut rng = stream_rng(seed, &[TAG_MONO, n as u64, s as u64, t]);
                        let j = rng.gen_range(0..draws.len());
                        let counts = draw_counts(&mut rng, &xs, &draws[j], nx, nz);
                        if ml_state(&counts, &tables) == s {
                            return Tally::default();
                        }
                        let lq: Vec<f64> = q_tables.iter().map(|q| score(&counts, q)).collect();
                        let w = (score(&counts, &tables[s]) - log_mean_exp(&lq)).exp();
                        Tally { det: 1, comm: 0, weight: w, weight_sq: w * w }
                    })
                }
            };
            tallies.push(tally);
        }
        rows.push(match sampler {
            Sampler::Direct => direct_row(n, trials, &tallies),
            Sampler::Tilted => weighted_row(n, trials, &tallies),
        });
    }
    let config = json!({
        "command": "simulate_mono_open",
        "type": p_type.probs(),
        "n_list": n_list,
        "trials": trials,
        "seed": seed,
        "sampler": sampler,
    });
    Ok(SimReport::new(rows, config))
}

fn weighted_row(n: usize, trials: usize, tallies: &[Tally]) -> SimRow {
    let k = trials as f64;
    let est: Vec<(f64, f64)> = tallies
        .iter()
        .map(|t| {
            let mean = t.weight / k;
            let var = (t.weight_sq / k - mean * mean).max(0.0);
            (mean, (var / k).sqrt())
        })
        .collect();
    let worst = argmax(est.iter().map(|e| e.0));
    let (pd, se) = est[worst];
    SimRow {
        n,
        trials,
        det_errors: tallies[worst].det,
        comm_errors: 0,
        pd,
        pc: 0.0,
        pd_lo: (pd - Z95 * se).max(0.0),
        pd_hi: (pd + Z95 * se).min(1.0),
    }
}

/// Number of messages per block length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageCount {
    Fixed(usize),
    /// `M = ⌈e^{nR}⌉`.
    Rate(f64),
}

impl MessageCount {
    pub fn at(self, n: usize) -> usize {
        match self {
            MessageCount::Fixed(m) => m,
            MessageCount::Rate(r) => ((n as f64 * r).exp().ceil() as usize).max(1),
        }
    }
}

/// Joint types `N(x, y)` of every codeword against one output sequence.
fn joint_counts(codeword: &[usize], ys: &[usize], nx: usize, ny: usize) -> Vec<Vec<u32>> {
    let mut c = vec![vec![0u32; ny]; nx];
    for (x, y) in codeword.iter().zip(ys) {
        c[*x][*y] += 1;
    }
    c
}

/// Empirical mutual information of a joint type.
fn empirical_mi(c: &[Vec<u32>]) -> f64 {
    let n: u32 = c.iter().flatten().sum();
    let n = n as f64;
    let row: Vec<f64> = c.iter().map(|r| r.iter().sum::<u32>() as f64).collect();
    let ny = c.first().map_or(0, Vec::len);
    let col: Vec<f64> = (0..ny).map(|y| c.iter().map(|r| r[y] as f64).sum()).collect();
    let mut mi = 0.0;
    for (x, r) in c.iter().enumerate() {
        for (y, &v) in r.iter().enumerate() {
            if v > 0 {
                let v = v as f64;
                mi += v / n * (v * n / (row[x] * col[y])).ln();
            }
        }
    }
    mi
}

fn sample_outputs(rng: &mut ChaCha8Rng, codeword: &[usize], rows: &[WeightedIndex<f64>]) -> Vec<usize> {
    codeword.iter().map(|&x| rows[x].sample(rng)).collect()
}

/// Bi-static decoding/detection with a random constant-composition code.
#[allow(clippy::too_many_arguments)]
pub fn simulate_bistatic(
    family: &ChannelFamily,
    p_type: &Distribution,
    n_list: &[usize],
    messages: MessageCount,
    trials: usize,
    seed: u64,
    mode: BiMode,
    memory_cap: usize,
) -> Result<SimReport> {
    check_trials(trials)?;
    family.require_states(2)?;
    family.check_input(p_type)?;
    let ns = family.num_states();
    if (0..ns).any(|s| family.sense(s) != family.comm(s)) {
        return Err(JcasError::InvalidArgument("bi-static simulation needs w_z to alias w_y".into()));
    }
    let (nx, ny) = (family.x_size(), family.y_size());
    let tables: Vec<Vec<Vec<f64>>> = (0..ns).map(|s| log_table(family.comm(s))).collect();
    let mut rows = Vec::with_capacity(n_list.len());
    let mut ms = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let m = messages.at(n);
        let cells = m.saturating_mul(ns);
        if cells > memory_cap {
            return Err(JcasError::MemoryCap { cells, cap: memory_cap });
        }
        ms.push(m);
        let book = gen_constant_composition_codebook(n, m, p_type, seed)?;
        let mut tallies = Vec::with_capacity(ns);
        for s in 0..ns {
            let draw = samplers(family.comm(s).rows());
            tallies.push(run_trials(trials, |t| {
                let mut rng = stream_rng(seed, &[TAG_BI, n as u64, s as u64, t]);
                let w = rng.gen_range(0..m);
                let ys = sample_outputs(&mut rng, &book.codewords[w], &draw);
                let counts: Vec<Vec<Vec<u32>>> =
                    book.codewords.iter().map(|c| joint_counts(c, &ys, nx, ny)).collect();
                let (w_hat, s_hat) = match mode {
                    BiMode::Joint => {
                        let flat = argmax(counts.iter().flat_map(|c| tables.iter().map(move |tb| score(c, tb))));
                        (flat / ns, flat % ns)
                    }
                    BiMode::Successive => {
                        let w_hat = argmax(counts.iter().map(|c| empirical_mi(c)));
                        (w_hat, ml_state(&counts[w_hat], &tables))
                    }
                };
                Tally { det: (s_hat != s) as u64, comm: (w_hat != w) as u64, ..Tally::default() }
            }));
        }
        rows.push(direct_row(n, trials, &tallies));
    }
    let config = json!({
        "command": "simulate_bistatic",
        "type": p_type.probs(),
        "n_list": n_list,
        "messages": messages,
        "m_per_n": ms,
        "trials": trials,
        "seed": seed,
        "mode": mode,
        "successive_decoder": "mmi",
        "memory_cap": memory_cap,
    });
    Ok(SimReport::new(rows, config))
}

/// Parameters of the three-phase closed-loop protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedLoopConfig {
    pub delta1: f64,
    pub delta2: f64,
    pub probe_type: Distribution,
    /// Phase-3 input type for each state the transmitter may settle on.
    pub per_state_types: Vec<Distribution>,
    pub messages: MessageCount,
}

/// Phase lengths `(n1, n2, n3)` for block length `n`.
pub fn phase_lengths(n: usize, delta1: f64, delta2: f64) -> Result<(usize, usize, usize)> {
    if !(delta1 > 0.0 && delta1 < 1.0 && delta2 > 0.0 && delta2 < 1.0 && delta1 + delta2 < 1.0) {
        return Err(JcasError::InvalidArgument(format!(
            "need 0 < delta1, delta2 and delta1 + delta2 < 1, got {delta1}, {delta2}"
        )));
    }
    let n1 = (delta1 * n as f64).round() as usize;
    let n2 = (delta2 * n as f64).round() as usize;
    if n1 < 1 || n2 < 1 || n1 + n2 >= n {
        return Err(JcasError::InvalidArgument(format!(
            "phase lengths ({n1}, {n2}, {}) for n = {n}: every phase needs at least one symbol",
            n.saturating_sub(n1 + n2)
        )));
    }
    Ok((n1, n2, n - n1 - n2))
}

/// Codewords of the phase-2 state code: the binary label of each state,
/// each bit repeated, over the input pair whose output rows are furthest
/// apart (Bhattacharyya) under the least favourable state.
fn state_code(family: &ChannelFamily, n2: usize) -> Vec<Vec<usize>> {
    let ns = family.num_states();
    let nx = family.x_size();
    let bits = (usize::BITS - (ns - 1).leading_zeros()).max(1) as usize;
    let mut pair = (0, 0, f64::NEG_INFINITY);
    for a in 0..nx {
        for b in a + 1..nx {
            let d = (0..ns)
                .map(|s| {
                    let (ra, rb) = (family.comm(s).row(a), family.comm(s).row(b));
                    -ra.iter().zip(rb).map(|(u, v)| (u * v).sqrt()).sum::<f64>().ln()
                })
                .fold(f64::INFINITY, f64::min);
            if d > pair.2 {
                pair = (a, b, d);
            }
        }
    }
    let rep = (n2 / bits).max(1);
    (0..ns)
        .map(|label| {
            (0..n2)
                .map(|i| {
                    let bit = i / rep;
                    if bit < bits && (label >> bit) & 1 == 1 {
                        pair.1
                    } else {
                        pair.0
                    }
                })
                .collect()
        })
        .collect()
}

/// The three-phase closed-loop protocol: probe and estimate the state,
/// announce the estimate, then send a message with a code matched to it.
/// The final state estimate uses only the phase-3 symbols.
pub fn simulate_closed_loop(
    family: &ChannelFamily,
    cfg: &ClosedLoopConfig,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<SimReport> {
    check_trials(trials)?;
    family.require_states(2)?;
    family.check_input(&cfg.probe_type)?;
    let ns = family.num_states();
    if cfg.per_state_types.len() != ns {
        return Err(JcasError::DimensionMismatch(format!(
            "{} per-state types for {ns} states",
            cfg.per_state_types.len()
        )));
    }
    for p in &cfg.per_state_types {
        family.check_input(p)?;
    }
    let (nx, ny, nz) = (family.x_size(), family.y_size(), family.z_size());
    let z_tables: Vec<Vec<Vec<f64>>> = (0..ns).map(|s| log_table(family.sense(s))).collect();
    let y_tables: Vec<Vec<Vec<f64>>> = (0..ns).map(|s| log_table(family.comm(s))).collect();
    let mut rows = Vec::with_capacity(n_list.len());
    let mut echo = Vec::new();
    for &n in n_list {
        let (n1, n2, n3) = phase_lengths(n, cfg.delta1, cfg.delta2)?;
        let m = cfg.messages.at(n);
        let probe_type = round_to_type(&cfg.probe_type, n1);
        let probe = canonical_sequence(&type_counts(&probe_type, n1)?);
        let labels = state_code(family, n2);
        let phase3_types: Vec<Distribution> = cfg.per_state_types.iter().map(|p| round_to_type(p, n3)).collect();
        let books: Vec<Codebook> = phase3_types
            .iter()
            .enumerate()
            .map(|(s, p)| codebook_stream(n3, m, p, seed, 1 + s as u64))
            .collect::<Result<_>>()?;
        echo.push(json!({
            "n": n,
            "phases": [n1, n2, n3],
            "messages": m,
            "rate_nats": (m as f64).ln() / n as f64,
            "probe_type": probe_type.probs(),
            "phase3_types": phase3_types.iter().map(|p| p.probs().to_vec()).collect::<Vec<_>>(),
        }));
        let mut tallies = Vec::with_capacity(ns);
        for s in 0..ns {
            let z_draw = samplers(family.sense(s).rows());
            let y_draw = samplers(family.comm(s).rows());
            tallies.push(run_trials(trials, |t| {
                let mut rng = stream_rng(seed, &[TAG_CLOSED, n as u64, s as u64, t]);
                let z1 = draw_counts(&mut rng, &probe, &z_draw, nx, nz);
                let s_tilde = ml_state(&z1, &z_tables);
                let y2 = sample_outputs(&mut rng, &labels[s_tilde], &y_draw);
                let label_counts: Vec<Vec<Vec<u32>>> = labels.iter().map(|c| joint_counts(c, &y2, nx, ny)).collect();
                let flat = argmax(label_counts.iter().flat_map(|c| y_tables.iter().map(move |tb| score(c, tb))));
                let s_rx = flat / ns;
                let w = rng.gen_range(0..m);
                let xw = &books[s_tilde].codewords[w];
                let y3 = sample_outputs(&mut rng, xw, &y_draw);
                let w_hat = argmax(
                    books[s_rx]
                        .codewords
                        .iter()
                        .map(|c| score(&joint_counts(c, &y3, nx, ny), &y_tables[s_rx])),
                );
                let z3 = draw_counts(&mut rng, xw, &z_draw, nx, nz);
                let s_hat = ml_state(&z3, &z_tables);
                Tally { det: (s_hat != s) as u64, comm: (w_hat != w) as u64, ..Tally::default() }
            }));
        }
        rows.push(direct_row(n, trials, &tallies));
    }
    let config = json!({
        "command": "simulate_closed_loop",
        "delta1": cfg.delta1,
        "delta2": cfg.delta2,
        "probe_type": cfg.probe_type.probs(),
        "per_state_types": cfg.per_state_types.iter().map(|p| p.probs().to_vec()).collect::<Vec<_>>(),
        "messages": cfg.messages,
        "n_list": n_list,
        "trials": trials,
        "seed": seed,
        "per_n": echo,
    });
    Ok(SimReport::new(rows, config))
}
