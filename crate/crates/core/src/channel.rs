//! State-dependent discrete memoryless channel families.
//!
//! A family holds, for every state `s`, the communication kernel
//! `W_{Y|X,s}` and the sensing kernel `W_{Z|X,s}` as row-stochastic
//! matrices indexed `[input][output]`. The joint kernel is never stored:
//! nothing downstream needs the coupling between `Y` and `Z`.

use serde::{Deserialize, Serialize};

use crate::error::{JcasError, Result};

/// Rows must sum to one within this tolerance. Rows are rejected, never
/// renormalized.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Exact row comparison tolerance used by the distinguishability check.
pub const ROW_EQ_TOL: f64 = 1e-12;

/// Default tolerance for the output-symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-9;

fn check_row(row: &[f64]) -> std::result::Result<(), String> {
    if let Some((i, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(format!("entry {i} = {v} is negative or not finite"));
    }
    if let Some((i, v)) = row.iter().enumerate().find(|(_, v)| **v > 1.0) {
        return Err(format!("entry {i} = {v} exceeds 1"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(format!("row sums to {sum}"));
    }
    Ok(())
}

/// A point on the probability simplex over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(JcasError::InvalidArgument("empty distribution".into()));
        }
        check_row(&probs).map_err(|e| JcasError::InvalidArgument(format!("distribution: {e}")))?;
        Ok(Distribution(probs))
    }

    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        Distribution(probs)
    }

    pub fn uniform(size: usize) -> Self {
        Distribution(vec![1.0 / size as f64; size])
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        let mut v = vec![0.0; size];
        v[at] = 1.0;
        Distribution(v)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices carrying positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(i, _)| i)
    }

    /// Parses a comma separated list such as `0.5,0.5`.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let probs = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| JcasError::InvalidArgument(format!("bad probability {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Distribution::new(probs)
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = JcasError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.0
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A stochastic matrix from `X` to `Y`; row `x` is the distribution of `Y`
/// given `X = x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ConditionalDistribution {
    rows: Vec<Vec<f64>>,
}

impl ConditionalDistribution {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(JcasError::DimensionMismatch("empty stochastic matrix".into()));
        }
        let width = rows[0].len();
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(JcasError::DimensionMismatch(format!(
                    "row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
            check_row(row).map_err(|e| JcasError::InvalidArgument(format!("row {x}: {e}")))?;
        }
        Ok(ConditionalDistribution { rows })
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        ConditionalDistribution { rows }
    }

    /// The kernel whose every row equals `marginal`; it carries zero
    /// mutual information for any input distribution.
    pub fn product(inputs: usize, marginal: &[f64]) -> Self {
        ConditionalDistribution { rows: vec![marginal.to_vec(); inputs] }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    /// Output distribution `P_X ∘ W`.
    pub fn output_marginal(&self, p_x: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.outputs()];
        for (px, row) in p_x.iter().zip(&self.rows) {
            if *px > 0.0 {
                for (qy, w) in q.iter_mut().zip(row) {
                    *qy += px * w;
                }
            }
        }
        q
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &ConditionalDistribution) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<f64>>> for ConditionalDistribution {
    type Error = JcasError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        ConditionalDistribution::new(rows)
    }
}

impl From<ConditionalDistribution> for Vec<Vec<f64>> {
    fn from(c: ConditionalDistribution) -> Self {
        c.rows
    }
}

/// Which observation model a spec file is loaded for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    /// Sensing at the transmitter through `w_z`; the field is required.
    MonoStatic,
    /// Sensing at the receiver from `Y` alone; `w_z` aliases `w_y`.
    BiStatic,
}

/// On-disk channel spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSpec {
    x_size: usize,
    y_size: usize,
    z_size: usize,
    states: Vec<String>,
    w_y: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w_z: Option<Vec<Vec<Vec<f64>>>>,
}

/// A compound (state-dependent) DMC family.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFamily {
    x_size: usize,
    y_size: usize,
    z_size: usize,
    states: Vec<String>,
    w_y: Vec<ConditionalDistribution>,
    w_z: Vec<ConditionalDistribution>,
}

fn build_kernels(
    name: &'static str,
    raw: Vec<Vec<Vec<f64>>>,
    states: usize,
    x_size: usize,
    out_size: usize,
) -> Result<Vec<ConditionalDistribution>> {
    if raw.len() != states {
        return Err(JcasError::DimensionMismatch(format!(
            "{name} has {} state matrices, expected {states}",
            raw.len()
        )));
    }
    raw.into_iter()
        .enumerate()
        .map(|(s, rows)| {
            if rows.len() != x_size {
                return Err(JcasError::DimensionMismatch(format!(
                    "{name}[state {s}] has {} rows, expected x_size = {x_size}",
                    rows.len()
                )));
            }
            for (x, row) in rows.iter().enumerate() {
                if row.len() != out_size {
                    return Err(JcasError::DimensionMismatch(format!(
                        "{name}[state {s}][input {x}] has {} entries, expected {out_size}",
                        row.len()
                    )));
                }
                check_row(row).map_err(|reason| JcasError::NotStochastic {
                    matrix: name,
                    state: s,
                    row: x,
                    reason,
                })?;
            }
            Ok(ConditionalDistribution::from_rows_unchecked(rows))
        })
        .collect()
}

impl ChannelFamily {
    /// Builds and validates a family from per-state kernels.
    pub fn new(
        states: Vec<String>,
        w_y: Vec<Vec<Vec<f64>>>,
        w_z: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let first = w_y
            .first()
            .ok_or_else(|| JcasError::Malformed("no states".into()))?;
        let x_size = first.len();
        let y_size = first.first().map_or(0, Vec::len);
        let z_size = w_z.first().and_then(|m| m.first()).map_or(0, Vec::len);
        Self::from_spec(ChannelSpec { x_size, y_size, z_size, states, w_y, w_z: Some(w_z) }, ChannelMode::MonoStatic)
    }

    /// Convenience constructor for a bi-static family (`w_z := w_y`).
    pub fn bistatic(states: Vec<String>, w_y: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let x_size = w_y.first().map_or(0, Vec::len);
        let y_size = w_y.first().and_then(|m| m.first()).map_or(0, Vec::len);
        Self::from_spec(
            ChannelSpec { x_size, y_size, z_size: y_size, states, w_y, w_z: None },
            ChannelMode::BiStatic,
        )
    }

    fn from_spec(spec: ChannelSpec, mode: ChannelMode) -> Result<Self> {
        if spec.x_size == 0 || spec.y_size == 0 {
            return Err(JcasError::Malformed("alphabet sizes must be positive".into()));
        }
        if spec.states.is_empty() {
            return Err(JcasError::Malformed("`states` must not be empty".into()));
        }
        let n_states = spec.states.len();
        let w_y = build_kernels("w_y", spec.w_y, n_states, spec.x_size, spec.y_size)?;
        let (z_size, w_z) = match (mode, spec.w_z) {
            (ChannelMode::BiStatic, _) => (spec.y_size, w_y.clone()),
            (ChannelMode::MonoStatic, None) => return Err(JcasError::MissingSensingKernel),
            (ChannelMode::MonoStatic, Some(raw)) => {
                if spec.z_size == 0 {
                    return Err(JcasError::Malformed("z_size must be positive".into()));
                }
                (spec.z_size, build_kernels("w_z", raw, n_states, spec.x_size, spec.z_size)?)
            }
        };
        Ok(ChannelFamily {
            x_size: spec.x_size,
            y_size: spec.y_size,
            z_size,
            states: spec.states,
            w_y,
            w_z,
        })
    }

    /// Parses and validates a JSON channel spec.
    pub fn from_json(text: &str, mode: ChannelMode) -> Result<Self> {
        let spec: ChannelSpec =
            serde_json::from_str(text).map_err(|e| JcasError::Malformed(e.to_string()))?;
        Self::from_spec(spec, mode)
    }

    /// Serializes to the same JSON schema accepted by [`ChannelFamily::from_json`].
    pub fn to_json(&self) -> String {
        let spec = ChannelSpec {
            x_size: self.x_size,
            y_size: self.y_size,
            z_size: self.z_size,
            states: self.states.clone(),
            w_y: self.w_y.iter().map(|k| k.rows().to_vec()).collect(),
            w_z: Some(self.w_z.iter().map(|k| k.rows().to_vec()).collect()),
        };
        serde_json::to_string_pretty(&spec).expect("channel spec serializes")
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Communication kernel `W_{Y|X,s}`.
    pub fn comm(&self, s: usize) -> &ConditionalDistribution {
        &self.w_y[s]
    }

    /// Sensing kernel `W_{Z|X,s}`.
    pub fn sense(&self, s: usize) -> &ConditionalDistribution {
        &self.w_z[s]
    }

    /// Errors unless the family has at least `needed` states.
    pub fn require_states(&self, needed: usize) -> Result<()> {
        if self.num_states() < needed {
            return Err(JcasError::TooFewStates { needed, found: self.num_states() });
        }
        Ok(())
    }

    pub(crate) fn check_input(&self, p_x: &Distribution) -> Result<()> {
        if p_x.len() != self.x_size {
            return Err(JcasError::DimensionMismatch(format!(
                "input distribution has {} entries, channel has |X| = {}",
                p_x.len(),
                self.x_size
            )));
        }
        Ok(())
    }

    /// State pairs `(s, s')`, `s < s'`, whose sensing kernels agree on
    /// every input row. Empty iff every pair has positive Chernoff
    /// information for some input distribution.
    pub fn validate_distinguishability(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for s in 0..self.num_states() {
            for t in s + 1..self.num_states() {
                if self.w_z[s].max_abs_diff(&self.w_z[t]) <= ROW_EQ_TOL {
                    pairs.push((s, t));
                }
            }
        }
        pairs
    }

    /// Errors with the offending pairs when some states cannot be told apart.
    pub fn require_distinguishable(&self) -> Result<()> {
        let pairs = self.validate_distinguishability();
        if pairs.is_empty() {
            Ok(())
        } else {
            Err(JcasError::Indistinguishable(pairs))
        }
    }

    /// Detects whether every input's sensing rows are a relabeling of a
    /// base input's rows, with one permutation of `Z` shared by all states.
    ///
    /// For each input the per-output state vectors `(W_{Z|X,s}(z|x))_s` are
    /// rounded to 12 decimals and sorted; two inputs match when the sorted
    /// lists agree within `tol`. The sort orders give the witness.
    pub fn check_output_symmetry(&self, tol: f64) -> SymmetryReport {
        let sorted: Vec<(Vec<usize>, Vec<Vec<f64>>)> = (0..self.x_size)
            .map(|x| {
                let columns: Vec<Vec<f64>> = (0..self.z_size)
                    .map(|z| {
                        self.w_z
                            .iter()
                            .map(|k| (k.get(x, z) * 1e12).round() / 1e12)
                            .collect()
                    })
                    .collect();
                let mut order: Vec<usize> = (0..self.z_size).collect();
                order.sort_by(|&a, &b| {
                    columns[a]
                        .iter()
                        .zip(&columns[b])
                        .map(|(u, v)| u.total_cmp(v))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                (order, columns)
            })
            .collect();

        let (base_order, base_cols) = &sorted[0];
        let mut witness = Vec::with_capacity(self.x_size);
        for (order, cols) in &sorted {
            let matches = order.iter().zip(base_order).all(|(&z, &z0)| {
                cols[z].iter().zip(&base_cols[z0]).all(|(a, b)| (a - b).abs() <= tol)
            });
            if !matches {
                return SymmetryReport { symmetric: false, base_input: None, witness: Vec::new() };
            }
            let mut perm = vec![0; self.z_size];
            for (&z, &z0) in order.iter().zip(base_order) {
                perm[z] = z0;
            }
            witness.push(perm);
        }
        SymmetryReport { symmetric: true, base_input: Some(0), witness }
    }
}

/// Outcome of [`ChannelFamily::check_output_symmetry`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub base_input: Option<usize>,
    /// `witness[x][z] = π_x(z)`, so that `W_{Z|X,s}(z|x) = W_{Z|X,s}(π_x(z)|x₀)`.
    pub witness: Vec<Vec<usize>>,
}
