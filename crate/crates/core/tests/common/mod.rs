//! Shared fixtures and a brute-force conditional-type oracle for binary
//! input and output alphabets.
#![allow(dead_code)]

use jcas::bistatic::{self, ExponentQuery};
use jcas::{ChannelFamily, ChannelMode, ConditionalDistribution, Distribution};

pub const DENOM: usize = 60;

pub fn channel_path(name: &str) -> String {
    format!("{}/channels/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn load(name: &str, mode: ChannelMode) -> ChannelFamily {
    let text = std::fs::read_to_string(channel_path(name)).unwrap();
    ChannelFamily::from_json(&text, mode).unwrap()
}

pub fn bsc(p: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
}

pub fn bi(kernels: Vec<Vec<Vec<f64>>>) -> ChannelFamily {
    let labels = (0..kernels.len()).map(|s| s.to_string()).collect();
    ChannelFamily::bistatic(labels, kernels).unwrap()
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Binary kernel as `(P(1|0), P(1|1))` in units of `1/denom`.
#[derive(Debug, Clone, Copy)]
pub struct TypeKernel {
    pub k: [usize; 2],
}

/// Input distribution `(n0, n1) / (n0 + n1)`; every input symbol gets
/// `denom` channel uses, so conditional types have that denominator.
#[derive(Debug, Clone, Copy)]
pub struct InputType {
    pub n: [usize; 2],
    pub denom: usize,
}

impl InputType {
    pub fn new(n0: usize, n1: usize) -> Self {
        InputType { n: [n0, n1], denom: DENOM }
    }

    pub fn with_denom(self, denom: usize) -> Self {
        InputType { denom, ..self }
    }

    pub fn px(&self) -> [f64; 2] {
        let total = (self.n[0] + self.n[1]) as f64;
        [self.n[0] as f64 / total, self.n[1] as f64 / total]
    }

    pub fn dist(&self) -> Distribution {
        Distribution::new(self.px().to_vec()).unwrap()
    }

    pub fn kernels(&self) -> impl Iterator<Item = TypeKernel> + '_ {
        (0..=self.denom).flat_map(move |a| (0..=self.denom).map(move |b| TypeKernel { k: [a, b] }))
    }

    pub fn rows(&self, t: TypeKernel) -> [[f64; 2]; 2] {
        t.k.map(|k| {
            let p1 = k as f64 / self.denom as f64;
            [1.0 - p1, p1]
        })
    }

    pub fn kernel(&self, t: TypeKernel) -> ConditionalDistribution {
        let r = self.rows(t);
        ConditionalDistribution::new(r.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    /// Output marginal `P(Y = 1)` scaled to an integer.
    fn out_ones(&self, t: TypeKernel) -> usize {
        self.n[0] * t.k[0] + self.n[1] * t.k[1]
    }

    pub fn divergence(&self, t: TypeKernel, w: &[Vec<f64>]) -> f64 {
        let (px, r) = (self.px(), self.rows(t));
        let mut d = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                if r[x][y] > 0.0 {
                    if w[x][y] == 0.0 {
                        return f64::INFINITY;
                    }
                    d += px[x] * r[x][y] * (r[x][y] / w[x][y]).ln();
                }
            }
        }
        d
    }

    pub fn nll(&self, t: TypeKernel, w: &[Vec<f64>]) -> f64 {
        let (px, r) = (self.px(), self.rows(t));
        let mut v = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                if r[x][y] > 0.0 {
                    if w[x][y] == 0.0 {
                        return f64::INFINITY;
                    }
                    v -= px[x] * xlogy(r[x][y], w[x][y]);
                }
            }
        }
        v
    }

    pub fn mi(&self, t: TypeKernel) -> f64 {
        let (px, r) = (self.px(), self.rows(t));
        let q1 = px[0] * r[0][1] + px[1] * r[1][1];
        let q = [1.0 - q1, q1];
        let mut v = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                if r[x][y] > 0.0 {
                    v += px[x] * r[x][y] * (r[x][y] / q[y]).ln();
                }
            }
        }
        v
    }
}

fn clip(v: f64, r: f64) -> f64 {
    (v - r).max(0.0)
}

pub fn oracle_rho_succ(ws: &[Vec<Vec<f64>>], it: InputType, rate: f64) -> f64 {
    let mut best = f64::INFINITY;
    for w in ws {
        for t in it.kernels() {
            best = best.min(it.divergence(t, w) + clip(it.mi(t), rate));
        }
    }
    best
}

pub fn oracle_beta(w: &[Vec<f64>], it: InputType, p_hat: TypeKernel, rate: f64) -> f64 {
    let ones = it.out_ones(p_hat);
    it.kernels()
        .filter(|t| it.out_ones(*t) == ones && it.mi(*t) < rate)
        .map(|t| it.nll(t, w))
        .fold(f64::INFINITY, f64::min)
}

pub fn oracle_inner(ws: &[Vec<Vec<f64>>], s: usize, it: InputType, p_hat: TypeKernel, rate: f64) -> f64 {
    let ones = it.out_ones(p_hat);
    let bound = oracle_beta(&ws[s], it, p_hat, rate).min(it.nll(p_hat, &ws[s]));
    let mut best = f64::INFINITY;
    for (t, wt) in ws.iter().enumerate().filter(|(t, _)| *t != s) {
        let _ = t;
        for k in it.kernels().filter(|k| it.out_ones(*k) == ones) {
            if it.nll(k, wt) <= bound {
                best = best.min(it.mi(k));
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
pub enum OracleKind {
    Succ,
    Beta { s: usize, p_hat: TypeKernel },
    Inner { s: usize, p_hat: TypeKernel },
}

#[derive(Debug, Clone)]
pub struct OracleQuery {
    pub family: usize,
    pub input: InputType,
    pub rate: f64,
    pub kind: OracleKind,
}

pub fn oracle_families() -> Vec<Vec<Vec<Vec<f64>>>> {
    vec![
        vec![bsc(0.3), bsc(0.6)],
        vec![vec![vec![0.9, 0.1], vec![0.2, 0.8]], vec![vec![0.6, 0.4], vec![0.5, 0.5]]],
        vec![
            vec![vec![0.95, 0.05], vec![0.3, 0.7]],
            vec![vec![0.8, 0.2], vec![0.1, 0.9]],
            bsc(0.25),
        ],
    ]
}

/// Ten queries of each kind.
pub fn oracle_battery() -> Vec<OracleQuery> {
    let q = |family, (n0, n1), rate, kind| OracleQuery { family, input: InputType::new(n0, n1), rate, kind };
    let tk = |a, b| TypeKernel { k: [a, b] };
    vec![
        q(0, (1, 1), 0.0, OracleKind::Succ),
        q(0, (1, 1), 0.01, OracleKind::Succ),
        q(0, (1, 2), 0.005, OracleKind::Succ),
        q(1, (1, 1), 0.0, OracleKind::Succ),
        q(1, (2, 3), 0.05, OracleKind::Succ),
        q(1, (2, 1), 0.15, OracleKind::Succ),
        q(2, (1, 1), 0.02, OracleKind::Succ),
        q(2, (1, 3), 0.1, OracleKind::Succ),
        q(2, (3, 1), 0.3, OracleKind::Succ),
        q(0, (3, 2), 0.02, OracleKind::Succ),
        q(0, (1, 1), 0.01, OracleKind::Beta { s: 0, p_hat: tk(18, 42) }),
        q(0, (1, 1), 0.05, OracleKind::Beta { s: 1, p_hat: tk(24, 36) }),
        q(0, (1, 2), 0.1, OracleKind::Beta { s: 0, p_hat: tk(18, 42) }),
        q(1, (1, 1), 0.02, OracleKind::Beta { s: 0, p_hat: tk(6, 48) }),
        q(1, (1, 1), 0.2, OracleKind::Beta { s: 1, p_hat: tk(24, 30) }),
        q(1, (2, 1), 0.05, OracleKind::Beta { s: 1, p_hat: tk(12, 30) }),
        q(2, (1, 1), 0.03, OracleKind::Beta { s: 0, p_hat: tk(4, 42) }),
        q(2, (1, 1), 0.1, OracleKind::Beta { s: 2, p_hat: tk(16, 44) }),
        q(2, (2, 3), 0.05, OracleKind::Beta { s: 1, p_hat: tk(12, 53) }),
        q(0, (3, 1), 0.005, OracleKind::Beta { s: 1, p_hat: tk(36, 24) }),
        q(0, (1, 1), 0.01, OracleKind::Inner { s: 0, p_hat: tk(18, 42) }),
        q(0, (1, 1), 0.05, OracleKind::Inner { s: 1, p_hat: tk(36, 24) }),
        q(0, (1, 1), 0.02, OracleKind::Inner { s: 0, p_hat: tk(30, 30) }),
        q(1, (1, 1), 0.05, OracleKind::Inner { s: 0, p_hat: tk(6, 48) }),
        q(1, (1, 1), 0.1, OracleKind::Inner { s: 1, p_hat: tk(24, 30) }),
        q(1, (1, 2), 0.02, OracleKind::Inner { s: 1, p_hat: tk(24, 30) }),
        q(2, (1, 1), 0.05, OracleKind::Inner { s: 0, p_hat: tk(4, 42) }),
        q(2, (1, 1), 0.1, OracleKind::Inner { s: 2, p_hat: tk(16, 44) }),
        q(2, (3, 2), 0.05, OracleKind::Inner { s: 1, p_hat: tk(12, 52) }),
        q(0, (1, 1), 0.0, OracleKind::Inner { s: 1, p_hat: tk(36, 24) }),
    ]
}

/// `(oracle, solver)` for one battery entry.
pub fn evaluate(query: &OracleQuery) -> (f64, f64) {
    evaluate_at(query, DENOM)
}

/// [`evaluate`] with the oracle lattice refined to `denom`, a multiple of
/// `DENOM`; the `P̂` of the query is unchanged.
pub fn evaluate_at(query: &OracleQuery, denom: usize) -> (f64, f64) {
    let scale = denom / DENOM;
    let query = &OracleQuery {
        input: query.input.with_denom(denom),
        kind: match query.kind {
            OracleKind::Succ => OracleKind::Succ,
            OracleKind::Beta { s, p_hat } => OracleKind::Beta { s, p_hat: TypeKernel { k: p_hat.k.map(|v| v * scale) } },
            OracleKind::Inner { s, p_hat } => OracleKind::Inner { s, p_hat: TypeKernel { k: p_hat.k.map(|v| v * scale) } },
        },
        ..query.clone()
    };
    let ws = &oracle_families()[query.family];
    let family = bi(ws.clone());
    let q = ExponentQuery::new(&family, query.input.dist(), query.rate).unwrap();
    match query.kind {
        OracleKind::Succ => (oracle_rho_succ(ws, query.input, query.rate), bistatic::rho_succ(&q).unwrap()),
        OracleKind::Beta { s, p_hat } => (
            oracle_beta(&ws[s], query.input, p_hat, query.rate),
            bistatic::beta(&query.input.kernel(p_hat), &q, s).unwrap(),
        ),
        OracleKind::Inner { s, p_hat } => (
            oracle_inner(ws, s, query.input, p_hat, query.rate),
            bistatic::inner_confusion_exponent(&query.input.kernel(p_hat), &q, s).unwrap(),
        ),
    }
}

pub fn agree(oracle: f64, solver: f64, tol: f64) -> bool {
    if oracle.is_infinite() || solver.is_infinite() {
        oracle == solver
    } else {
        (oracle - solver).abs() <= tol
    }
}

/// Continuous reference values by exhaustive scan. For the slice problems
/// the output-marginal constraint leaves one free coordinate, scanned with
/// `steps` points; `ρ_succ` scans both rows with `steps` points each.
pub mod dense {
    use super::*;

    fn rows(a: f64, b: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - a, a], vec![1.0 - b, b]]
    }

    fn measures(px: [f64; 2], k: &[Vec<f64>], w: &[Vec<f64>]) -> (f64, f64, f64) {
        let q1 = px[0] * k[0][1] + px[1] * k[1][1];
        let q = [1.0 - q1, q1];
        let (mut d, mut nll, mut mi) = (0.0, 0.0, 0.0);
        for x in 0..2 {
            for y in 0..2 {
                let r = k[x][y];
                if r > 0.0 {
                    let m = px[x] * r;
                    d += m * (r / w[x][y]).ln();
                    nll -= m * w[x][y].ln();
                    mi += m * (r / q[y]).ln();
                }
            }
        }
        (d, nll, mi)
    }

    fn slice(px: [f64; 2], marginal: f64, steps: usize) -> impl Iterator<Item = Vec<Vec<f64>>> {
        (0..=steps).filter_map(move |i| {
            let a = i as f64 / steps as f64;
            let b = (marginal - px[0] * a) / px[1];
            (-1e-12..=1.0 + 1e-12).contains(&b).then(|| rows(a, b.clamp(0.0, 1.0)))
        })
    }

    pub fn rho_succ(ws: &[Vec<Vec<f64>>], px: [f64; 2], rate: f64, steps: usize) -> f64 {
        let mut best = f64::INFINITY;
        for w in ws {
            for i in 0..=steps {
                for j in 0..=steps {
                    let k = rows(i as f64 / steps as f64, j as f64 / steps as f64);
                    let (d, _, mi) = measures(px, &k, w);
                    best = best.min(d + (mi - rate).max(0.0));
                }
            }
        }
        best
    }

    pub fn beta(w: &[Vec<f64>], px: [f64; 2], p_hat: &[Vec<f64>], rate: f64, steps: usize) -> f64 {
        let m = px[0] * p_hat[0][1] + px[1] * p_hat[1][1];
        slice(px, m, steps)
            .map(|k| measures(px, &k, w))
            .filter(|&(_, _, mi)| mi < rate)
            .map(|(_, nll, _)| nll)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn inner(ws: &[Vec<Vec<f64>>], s: usize, px: [f64; 2], p_hat: &[Vec<f64>], rate: f64, steps: usize) -> f64 {
        let m = px[0] * p_hat[0][1] + px[1] * p_hat[1][1];
        let bound = beta(&ws[s], px, p_hat, rate, steps).min(measures(px, p_hat, &ws[s]).1);
        let mut best = f64::INFINITY;
        for (_, wt) in ws.iter().enumerate().filter(|(t, _)| *t != s) {
            for k in slice(px, m, steps) {
                let (_, nll, mi) = measures(px, &k, wt);
                if nll <= bound {
                    best = best.min(mi);
                }
            }
        }
        best
    }

    /// Dense value for a battery entry.
    pub fn evaluate(query: &OracleQuery) -> f64 {
        let ws = &oracle_families()[query.family];
        let it = query.input;
        let px = it.px();
        match query.kind {
            OracleKind::Succ => rho_succ(ws, px, query.rate, 1000),
            OracleKind::Beta { s, p_hat } => beta(&ws[s], px, it.kernel(p_hat).rows(), query.rate, 200_000),
            OracleKind::Inner { s, p_hat } => inner(ws, s, px, it.kernel(p_hat).rows(), query.rate, 200_000),
        }
    }
}
