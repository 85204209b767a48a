//! Critical configurations of the squared head-to-tail distance: multistart
//! search, index and ordering classification, the incidence check, and the
//! counting formulas (Eulerian-number bound, alternating index sum).

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{hessian_critical, hessian_numeric, ChainError, ChainSpec, Configuration, HessianMatrix};
use crate::geom::{line_meet, projective_distance, Incidence, Line};

/// Tolerances used by the search and the classifiers. Each is relative to the
/// chain scale (lengths) or its square (values of `F` and its gradient).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Polishing stops once `|grad F| <= grad * scale^2`.
    pub grad: f64,
    /// Points with `F <= zero_value * scale^2` belong to the zero fiber.
    pub zero_value: f64,
    /// Largest hinge/line residual accepted when reading off crossings.
    pub incidence: f64,
    /// Slack on comparisons between crossing parameters.
    pub ordering: f64,
    /// Two configurations are the same when every angle agrees to `dedup` rad.
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grad: 1e-10,
            zero_value: 1e-9,
            incidence: 1e-6,
            ordering: 1e-8,
            dedup: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriticalError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("head-to-tail line undefined: F = {value:e}")]
    ZeroValue { value: f64 },
    #[error("hinge {} misses the head-to-tail line by {residual:e}", .index + 1)]
    NotIncident { index: usize, residual: f64 },
    #[error("degenerate crossing pattern at position {position}")]
    Degenerate { position: usize },
    #[error("grid of {points} starts is too large")]
    GridTooLarge { points: u128 },
}

/// Where a hinge crosses the head-to-tail line `s -> s * e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Crossing {
    At(f64),
    #[serde(with = "parallel_tag")]
    Parallel,
}

mod parallel_tag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("parallel")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "parallel" {
            Ok(())
        } else {
            Err(serde::de::Error::custom("expected \"parallel\""))
        }
    }
}

impl Crossing {
    /// `1/a`, with a parallel hinge meeting the line at infinity (`0`).
    pub fn inverse(&self) -> f64 {
        match *self {
            Crossing::At(a) => 1.0 / a,
            Crossing::Parallel => 0.0,
        }
    }

    /// The parameter itself, infinite for a parallel hinge.
    pub fn value(&self) -> f64 {
        match *self {
            Crossing::At(a) => a,
            Crossing::Parallel => f64::INFINITY,
        }
    }
}

/// Projective residuals of every current hinge against the line through the
/// origin and the end-point.
pub fn incidence_residuals(
    chain: &ChainSpec,
    theta: &Configuration,
    tol: &Tolerances,
) -> Result<Vec<f64>, CriticalError> {
    let (line, hinges) = head_to_tail(chain, theta, tol)?;
    Ok(hinges.iter().map(|h| projective_distance(&line, h.flat())).collect())
}

fn head_to_tail(
    chain: &ChainSpec,
    theta: &Configuration,
    tol: &Tolerances,
) -> Result<(Line, Vec<crate::geom::Hinge>), CriticalError> {
    let e = chain.try_end_point(theta)?;
    let value = e.norm_squared();
    let scale = chain.scale();
    if value <= tol.zero_value * scale * scale {
        return Err(CriticalError::ZeroValue { value });
    }
    let line = Line::through_origin(&e).expect("nonzero end-point");
    Ok((line, chain.placements(theta)))
}

/// Crossing parameters `a_k` (hinge `k` meets the line at `a_k * e`).
pub fn intersection_params(
    chain: &ChainSpec,
    theta: &Configuration,
    tol: &Tolerances,
) -> Result<Vec<Crossing>, CriticalError> {
    let (line, hinges) = head_to_tail(chain, theta, tol)?;
    let accept = tol.incidence * chain.scale();
    hinges
        .iter()
        .enumerate()
        .map(|(index, h)| match line_meet(&line, h.flat(), accept) {
            Incidence::Meets { param } => Ok(Crossing::At(param)),
            Incidence::Parallel { .. } => Ok(Crossing::Parallel),
            Incidence::Skew { residual } => Err(CriticalError::NotIncident { index, residual }),
        })
        .collect()
}

/// Index of a flat critical configuration from its crossing parameters: the
/// number of negative entries of
/// `1 - 1/a_n, 1/a_n - 1/a_{n-1}, ..., 1/a_2 - 1/a_1`.
///
/// An infinite parameter stands for a parallel hinge.
pub fn flat_index(a: &[f64]) -> Result<usize, CriticalError> {
    const EPS: f64 = 1e-12;
    if let Some(position) = a.iter().position(|&x| x == 0.0 || x.is_nan()) {
        return Err(CriticalError::Degenerate { position });
    }
    let inv: Vec<f64> = a.iter().map(|x| 1.0 / x).collect();
    let n = inv.len();
    if n == 0 {
        return Ok(0);
    }
    let mut entries = Vec::with_capacity(n);
    entries.push((n - 1, 1.0 - inv[n - 1]));
    for k in (1..n).rev() {
        entries.push((k - 1, inv[k] - inv[k - 1]));
    }
    let mut count = 0;
    for (position, v) in entries {
        if v.abs() <= EPS {
            return Err(CriticalError::Degenerate { position });
        }
        if v < 0.0 {
            count += 1;
        }
    }
    Ok(count)
}

/// Hinges meet the oriented segment `(0, e)` in their natural order.
pub fn is_max_ordering(params: &[Crossing], slack: f64) -> bool {
    let mut prev = 0.0;
    for c in params {
        let a = match c {
            Crossing::At(a) => *a,
            Crossing::Parallel => return false,
        };
        if a < prev - slack || a <= 0.0 {
            return false;
        }
        prev = a;
    }
    prev < 1.0 + slack
}

/// Hinges meet the projective arc from `0` to `e` through infinity in their
/// natural order; along that arc `1/a` increases from `-inf` to `1`.
pub fn is_min_ordering(params: &[Crossing], slack: f64) -> bool {
    let mut prev = f64::NEG_INFINITY;
    for c in params {
        if matches!(c, Crossing::At(a) if *a == 0.0) {
            return false;
        }
        let inv = c.inverse();
        if inv < prev - slack {
            return false;
        }
        prev = inv;
    }
    prev < 1.0 - slack
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Isolated,
    ZeroFiber,
}

/// A polished critical configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRecord {
    pub theta: Configuration,
    pub value: f64,
    pub grad_norm: f64,
    /// Eigenvalues of the half-Hessian in angle coordinates, increasing.
    pub eigenvalues: Vec<f64>,
    /// Negative eigenvalue count; absent on the zero fiber.
    pub index: Option<usize>,
    pub kind: RecordKind,
    pub incidence_residuals: Vec<f64>,
    pub params_a: Vec<Crossing>,
}

impl CriticalRecord {
    /// Evaluates the record data at `theta` without polishing.
    pub fn at(chain: &ChainSpec, theta: Configuration, tol: &Tolerances) -> Self {
        let scale = chain.scale();
        let value = chain.squared_distance(&theta);
        let grad_norm = chain.gradient(&theta).norm();
        if value <= tol.zero_value * scale * scale {
            let eigenvalues = hessian_numeric(chain, &theta).eigenvalues();
            return Self {
                theta,
                value,
                grad_norm,
                eigenvalues,
                index: None,
                kind: RecordKind::ZeroFiber,
                incidence_residuals: Vec::new(),
                params_a: Vec::new(),
            };
        }
        let hessian: HessianMatrix = match hessian_critical(chain, &theta) {
            Ok(h) => h.angles,
            Err(_) => {
                let h = chain.hessian(&theta) * 0.5;
                HessianMatrix { entries: h, basis: crate::chain::HessianBasis::Angles }
            }
        };
        let eigenvalues = hessian.eigenvalues();
        let index = eigenvalues.iter().filter(|&&l| l < 0.0).count();
        let incidence_residuals = incidence_residuals(chain, &theta, tol).unwrap_or_default();
        let params_a = nearest_crossings(chain, &theta);
        Self {
            theta,
            value,
            grad_norm,
            eigenvalues,
            index: Some(index),
            kind: RecordKind::Isolated,
            incidence_residuals,
            params_a,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.incidence_residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Crossing parameters without the incidence gate: a skew hinge reports the
/// parameter of its closest approach.
fn nearest_crossings(chain: &ChainSpec, theta: &Configuration) -> Vec<Crossing> {
    let e = chain.end_point(theta);
    let line = match Line::through_origin(&e) {
        Ok(l) => l,
        Err(_) => return Vec::new(),
    };
    chain
        .placements(theta)
        .iter()
        .map(|h| {
            let flat = h.flat();
            let across = flat.across(&line.dir);
            let s2 = across.norm_squared();
            if s2.sqrt() <= crate::geom::PARALLEL_SINE_TOL * line.dir.norm() {
                Crossing::Parallel
            } else {
                let offset = flat.across(&(-flat.base()));
                Crossing::At(-offset.dot(&across) / s2)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum Classification {
    /// Crossings lined up in natural order inside `(0, 1)`: the global maximum.
    GlobalMaxCertified,
    /// Crossings in natural order along the arc through infinity.
    MinCandidate,
    /// Any other isolated critical point, with its eigenvalue index.
    Saddle { index: usize },
    ZeroFiber,
}

/// Reads the class of a polished record off its crossing pattern.
pub fn classify(record: &CriticalRecord, tol: &Tolerances) -> Classification {
    if record.kind == RecordKind::ZeroFiber {
        return Classification::ZeroFiber;
    }
    if is_max_ordering(&record.params_a, tol.ordering) {
        Classification::GlobalMaxCertified
    } else if is_min_ordering(&record.params_a, tol.ordering) {
        Classification::MinCandidate
    } else {
        Classification::Saddle { index: record.index.unwrap_or(0) }
    }
}

/// Eulerian numbers `A(m, k)` for `m = 0..=n` by
/// `A(m, k) = (k + 1) A(m-1, k) + (m - k) A(m-1, k-1)`.
pub fn eulerian_triangle(n: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for m in 1..=n {
        let prev = &rows[m - 1];
        let row: Vec<BigUint> = (0..m)
            .map(|k| {
                let keep = prev.get(k).cloned().unwrap_or_default() * BigUint::from(k + 1);
                let rise = if k > 0 {
                    prev.get(k - 1).cloned().unwrap_or_default() * BigUint::from(m - k)
                } else {
                    BigUint::zero()
                };
                keep + rise
            })
            .collect();
        rows.push(row);
    }
    rows
}

/// Upper bound `2^n * sum_k A(n, k) d^k` on the number of isolated critical points.
pub fn eulerian_bound(n: usize, d: usize) -> BigUint {
    let row = eulerian_triangle(n).pop().expect("row n exists");
    let d = BigUint::from(d);
    let mut power = BigUint::one();
    let mut sum = BigUint::zero();
    for a in row {
        sum += a * &power;
        power *= &d;
    }
    sum << n
}

/// How the search seeds its local solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPlan {
    /// `max(200, 20 * bound)` scattered starts, capped at [`MAX_AUTO_STARTS`].
    Auto,
    /// A given number of scattered starts (shifted Halton points).
    Scattered(usize),
    /// Every local minimum of `|grad F|^2` on a `resolution^n` grid.
    Grid(usize),
}

pub const MAX_AUTO_STARTS: usize = 50_000;
pub const MAX_GRID_POINTS: u128 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub starts: StartPlan,
    pub seed: u64,
    pub max_iters: usize,
    pub tol: Tolerances,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { starts: StartPlan::Auto, seed: 0, max_iters: 200, tol: Tolerances::default() }
    }
}

/// Deduplicated critical records of one search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub records: Vec<CriticalRecord>,
    /// `c_0..c_n`, isolated records only.
    pub counts_by_index: Vec<usize>,
    #[serde(with = "biguint_string")]
    pub bound: BigUint,
    pub starts_used: usize,
}

mod biguint_string {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

impl Census {
    pub fn isolated(&self) -> impl Iterator<Item = &CriticalRecord> {
        self.records.iter().filter(|r| r.kind == RecordKind::Isolated)
    }

    pub fn zero_fiber(&self) -> impl Iterator<Item = &CriticalRecord> {
        self.records.iter().filter(|r| r.kind == RecordKind::ZeroFiber)
    }

    pub fn isolated_count(&self) -> usize {
        self.isolated().count()
    }

    pub fn within_bound(&self) -> bool {
        BigUint::from(self.isolated_count()) <= self.bound
    }

    /// Builds a census from records, sorting and deduplicating them.
    pub fn from_records(n: usize, d: usize, records: Vec<CriticalRecord>, dedup: f64, starts_used: usize) -> Self {
        let records = dedup_records(records, dedup);
        let mut counts_by_index = vec![0; n + 1];
        for r in records.iter().filter(|r| r.kind == RecordKind::Isolated) {
            if let Some(i) = r.index {
                counts_by_index[i] += 1;
            }
        }
        Self { records, counts_by_index, bound: eulerian_bound(n, d), starts_used }
    }
}

/// `sum_i (-1)^(n-i) c_i` over the isolated records.
pub fn euler_alt_sum(census: &Census) -> i64 {
    let n = census.counts_by_index.len().saturating_sub(1);
    census
        .counts_by_index
        .iter()
        .enumerate()
        .map(|(i, &c)| if (n - i).is_multiple_of(2) { c as i64 } else { -(c as i64) })
        .sum()
}

fn canonical_order(a: &CriticalRecord, b: &CriticalRecord) -> std::cmp::Ordering {
    a.value.total_cmp(&b.value).then_with(|| {
        for (x, y) in a.theta.angles().iter().zip(b.theta.angles()) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        std::cmp::Ordering::Equal
    })
}

fn dedup_records(mut records: Vec<CriticalRecord>, dedup: f64) -> Vec<CriticalRecord> {
    records.sort_by(canonical_order);
    let mut kept: Vec<CriticalRecord> = Vec::new();
    for r in records {
        if !kept.iter().any(|k| k.theta.torus_distance(&r.theta) <= dedup) {
            kept.push(r);
        }
    }
    kept
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= c).all(|&p| !c.is_multiple_of(p)) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// `count` Halton points on the n-torus with a seeded random shift.
pub fn scattered_starts(n: usize, count: usize, seed: u64) -> Vec<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let primes = first_primes(n);
    (0..count as u64)
        .map(|i| {
            let angles = primes
                .iter()
                .zip(&shift)
                .map(|(&p, s)| (radical_inverse(i + 1, p) + s).fract() * std::f64::consts::TAU)
                .collect();
            Configuration::new(angles)
        })
        .collect()
}

/// Grid points whose `|grad F|^2` is no larger than at any of their `3^n - 1`
/// neighbours (the torus wraps).
pub fn grid_starts(chain: &ChainSpec, resolution: usize) -> Result<Vec<Configuration>, CriticalError> {
    let n = chain.n();
    let points = (resolution as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if points > MAX_GRID_POINTS || resolution < 3 {
        return Err(CriticalError::GridTooLarge { points });
    }
    let total = points as usize;
    let step = std::f64::consts::TAU / resolution as f64;
    let decode = |mut idx: usize| -> Vec<usize> {
        let mut c = vec![0; n];
        for slot in c.iter_mut() {
            *slot = idx % resolution;
            idx /= resolution;
        }
        c
    };
    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let theta = Configuration::new(decode(idx).iter().map(|&c| c as f64 * step).collect());
            chain.gradient(&theta).norm_squared()
        })
        .collect();
    let neighbours: Vec<Vec<isize>> = {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v| (-1..=1).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                }))
                .collect();
        }
        out.into_iter().filter(|v| v.iter().any(|&o| o != 0)).collect()
    };
    let starts = (0..total)
        .into_par_iter()
        .filter(|&idx| {
            let c = decode(idx);
            let here = values[idx];
            neighbours.iter().all(|off| {
                let mut j = 0usize;
                let mut mul = 1usize;
                for (ci, o) in c.iter().zip(off) {
                    let w = (*ci as isize + o).rem_euclid(resolution as isize) as usize;
                    j += w * mul;
                    mul *= resolution;
                }
                here <= values[j]
            })
        })
        .map(|idx| Configuration::new(decode(idx).iter().map(|&c| c as f64 * step).collect()))
        .collect();
    Ok(starts)
}

/// Damped Newton (Levenberg-Marquardt) on `|grad F|^2` from `start`. Large
/// damping follows the gradient flow of `|grad F|^2`, small damping is a
/// Newton step on `grad F = 0`. Returns the polished point if the gradient
/// gate is met.
pub fn polish(chain: &ChainSpec, start: &Configuration, cfg: &SearchConfig) -> Option<Configuration> {
    let scale2 = chain.scale() * chain.scale();
    let target = cfg.tol.grad * scale2;
    let n = chain.n();
    let mut theta = start.clone();
    let mut g = chain.gradient(&theta);
    let mut gnorm = g.norm();
    let mut lambda = 1e-3;
    for _ in 0..cfg.max_iters {
        if gnorm <= target {
            return Some(theta);
        }
        let h = chain.hessian(&theta);
        let hh = h.transpose() * &h;
        let rhs = -(h.transpose() * &g);
        let diag_scale = hh.diagonal().max().max(1e-300);
        let mut accepted = false;
        while lambda < 1e12 {
            let a = &hh + DMatrix::identity(n, n) * (lambda * diag_scale);
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let mut step: DVector<f64> = chol.solve(&rhs);
            let big = step.amax();
            if big > 0.5 {
                step *= 0.5 / big;
            }
            let trial = theta.with_offset(step.as_slice());
            let gt = chain.gradient(&trial);
            let gtn = gt.norm();
            if gtn < gnorm {
                theta = trial;
                g = gt;
                gnorm = gtn;
                lambda = (lambda / 5.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    (gnorm <= target).then_some(theta)
}

/// Multistart search for critical configurations.
pub fn find_critical(chain: &ChainSpec, cfg: &SearchConfig) -> Result<Census, CriticalError> {
    let n = chain.n();
    let starts = match cfg.starts {
        StartPlan::Auto => {
            let bound = eulerian_bound(n, chain.dim());
            let want = (bound * 20u32).to_usize().unwrap_or(usize::MAX).clamp(200, MAX_AUTO_STARTS);
            scattered_starts(n, want, cfg.seed)
        }
        StartPlan::Scattered(count) => scattered_starts(n, count, cfg.seed),
        StartPlan::Grid(resolution) => grid_starts(chain, resolution)?,
    };
    let starts_used = starts.len();
    let records: Vec<CriticalRecord> = starts
        .par_iter()
        .filter_map(|s| polish(chain, s, cfg))
        .map(|theta| CriticalRecord::at(chain, theta, &cfg.tol))
        .collect();
    Ok(Census::from_records(n, chain.dim(), records, cfg.tol.dedup, starts_used))
}
