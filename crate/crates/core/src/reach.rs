//! Certified global maximum of the head-to-tail distance.
//!
//! The maximum of `|e(theta)|` equals the minimum length of a polygonal arc
//! from the origin through one point on each reference hinge (in order) to
//! the reference end-point. The arc is minimized by block coordinate descent
//! and then straightened into a maximal configuration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainError, ChainSpec, Configuration};
use crate::critical::{intersection_params, CriticalError, Crossing, Tolerances};
use crate::geom::{AffineSubspace, Hinge, Point};

/// Relative distance within which a witness point counts as on its hinge.
pub const ON_HINGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReachError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("expected {expected} arc points, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("arc point {} is {distance:e} off its hinge", .index + 1)]
    PointOffHinge { index: usize, distance: f64 },
    #[error("arc descent did not converge after {sweeps} sweeps (length {})", .witness.length)]
    NoConvergence { sweeps: usize, witness: Box<ArcWitness> },
}

/// One point per reference hinge and the resulting arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcWitness {
    pub points: Vec<Point>,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcOptions {
    /// Descent stops when a sweep gains at most `sweep_tol * scale`.
    pub sweep_tol: f64,
    pub max_sweeps: usize,
    /// Run the smoothed Newton refinement after descent.
    pub refine: bool,
}

impl Default for ArcOptions {
    fn default() -> Self {
        Self { sweep_tol: 1e-12, max_sweeps: 10_000, refine: true }
    }
}

fn arc_total(points: &[Point], e: &Point) -> f64 {
    let mut prev: Option<&Point> = None;
    let mut total = 0.0;
    for p in points.iter().chain(std::iter::once(e)) {
        total += match prev {
            None => p.norm(),
            Some(q) => (p - q).norm(),
        };
        prev = Some(p);
    }
    total
}

/// `|a_1| + sum |a_{i+1} - a_i| + |e - a_n|` for points on the reference hinges.
pub fn arc_length(chain: &ChainSpec, points: &[Point]) -> Result<f64, ReachError> {
    if points.len() != chain.n() {
        return Err(ReachError::WrongLength { expected: chain.n(), found: points.len() });
    }
    let limit = ON_HINGE_TOL * chain.scale();
    for (index, (p, h)) in points.iter().zip(chain.hinges()).enumerate() {
        if p.len() != chain.dim() {
            return Err(ChainError::DimensionMismatch { index, expected: chain.dim(), found: p.len() }.into());
        }
        let distance = h.flat().distance_to(p);
        if distance > limit {
            return Err(ReachError::PointOffHinge { index, distance });
        }
    }
    Ok(arc_total(points, chain.endpoint()))
}

/// Minimizer over `a` in the flat of `|p - a| + |a - q|`.
///
/// Writing both points as (position along the flat, distance from it), the
/// optimum divides the along-flat segment in the ratio of the distances.
/// When both points lie on the flat, `p` itself is returned.
pub fn single_hinge_min(flat: &AffineSubspace, p: &Point, q: &Point) -> Point {
    let b = flat.base();
    let (wp, wq) = (p - b, q - b);
    let (pa, qa) = (flat.along(&wp), flat.along(&wq));
    let rp = (&wp - &pa).norm();
    let rq = (&wq - &qa).norm();
    let s = if rp + rq > 0.0 { rp / (rp + rq) } else { 0.0 };
    b + &pa + (&qa - &pa) * s
}

/// Minimizes the arc length by cyclic block descent, then refines.
pub fn min_polygonal_arc(chain: &ChainSpec, opts: &ArcOptions) -> Result<ArcWitness, ReachError> {
    let n = chain.n();
    let e = chain.endpoint().clone();
    let origin = Point::zeros(chain.dim());
    let flats: Vec<&AffineSubspace> = chain.hinges().iter().map(Hinge::flat).collect();
    let mut points: Vec<Point> = flats.iter().map(|f| f.base().clone()).collect();
    let mut length = arc_total(&points, &e);
    let gate = opts.sweep_tol * chain.scale();

    let sweep = |points: &mut Vec<Point>| {
        for i in 0..n {
            let prev = if i == 0 { &origin } else { &points[i - 1] };
            let next = if i + 1 == n { &e } else { &points[i + 1] };
            let best = single_hinge_min(flats[i], prev, next);
            points[i] = best;
        }
    };

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweep(&mut points);
        sweeps += 1;
        let next = arc_total(&points, &e);
        let gain = length - next;
        length = next;
        if gain <= gate {
            converged = true;
            break;
        }
    }

    if opts.refine && chain.dim() > 2 {
        let mut candidate = refine(chain, &points);
        let mut refined = arc_total(&candidate, &e);
        let mut settled = false;
        for _ in 0..50 {
            sweep(&mut candidate);
            let next = arc_total(&candidate, &e);
            let gain = refined - next;
            refined = next;
            if gain <= gate {
                settled = true;
                break;
            }
        }
        if refined < length {
            points = candidate;
            length = refined;
            converged = converged || settled;
        }
    }

    let witness = ArcWitness { points, length };
    if converged {
        Ok(witness)
    } else {
        Err(ReachError::NoConvergence { sweeps, witness: Box::new(witness) })
    }
}

/// Newton continuation on `sum sqrt(|w_j|^2 + eps^2)` over in-flat coordinates.
///
/// Block descent can stall where consecutive arc points meet (the length is
/// not differentiable there); the smoothed problem is strictly convex and
/// its minimizers approach the true one as `eps -> 0`.
fn refine(chain: &ChainSpec, start: &[Point]) -> Vec<Point> {
    let n = chain.n();
    let dim = chain.dim();
    let m = dim - 2;
    let scale = chain.scale();
    let e = chain.endpoint();
    let basis: Vec<DMatrix<f64>> = chain
        .hinges()
        .iter()
        .map(|h| DMatrix::from_columns(h.flat().directions()))
        .collect();
    let bases: Vec<&Point> = chain.hinges().iter().map(|h| h.flat().base()).collect();
    let place = |c: &DVector<f64>| -> Vec<Point> {
        (0..n)
            .map(|i| bases[i] + &basis[i] * c.rows(i * m, m))
            .collect()
    };
    let segments = |pts: &[Point]| -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(pts[0].clone());
        for i in 1..n {
            out.push(&pts[i] - &pts[i - 1]);
        }
        out.push(e - &pts[n - 1]);
        out
    };
    let smoothed = |c: &DVector<f64>, eps: f64| -> f64 {
        segments(&place(c)).iter().map(|w| (w.norm_squared() + eps * eps).sqrt()).sum()
    };

    let mut c = DVector::zeros(n * m);
    for i in 0..n {
        let local = basis[i].transpose() * (&start[i] - bases[i]);
        c.rows_mut(i * m, m).copy_from(&local);
    }

    let mut eps = 1e-3 * scale;
    while eps >= 1e-13 * scale {
        for _ in 0..60 {
            let w = segments(&place(&c));
            let mut grad = DVector::zeros(n * m);
            let mut hess = DMatrix::zeros(n * m, n * m);
            let terms: Vec<(DVector<f64>, DMatrix<f64>)> = w
                .iter()
                .map(|wj| {
                    let phi = (wj.norm_squared() + eps * eps).sqrt();
                    let g = wj / phi;
                    let k = (DMatrix::identity(dim, dim) - wj * wj.transpose() / (phi * phi)) / phi;
                    (g, k)
                })
                .collect();
            for i in 0..n {
                let (gin, kin) = &terms[i];
                let (gout, kout) = &terms[i + 1];
                let di = &basis[i];
                grad.rows_mut(i * m, m).copy_from(&(di.transpose() * (gin - gout)));
                let block = di.transpose() * (kin + kout) * di;
                hess.view_mut((i * m, i * m), (m, m)).copy_from(&block);
                if i + 1 < n {
                    let off = -(di.transpose() * kout * &basis[i + 1]);
                    hess.view_mut((i * m, (i + 1) * m), (m, m)).copy_from(&off);
                    hess.view_mut(((i + 1) * m, i * m), (m, m)).copy_from(&off.transpose());
                }
            }
            if grad.amax() <= 1e-15 {
                break;
            }
            let Some(chol) = hess.clone().cholesky() else { break };
            let step = -chol.solve(&grad);
            let here = smoothed(&c, eps);
            let slope = grad.dot(&step);
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-10 {
                let trial = &c + &step * t;
                if smoothed(&trial, eps) <= here + 1e-4 * t * slope {
                    c = trial;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved || step.amax() * t <= 1e-15 * scale {
                break;
            }
        }
        eps *= 0.1;
    }
    place(&c)
}

/// The alternative rotation angle considered at a fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldChoice {
    /// 0-based hinge index.
    pub hinge: usize,
    pub chosen: f64,
    pub alternative: Option<f64>,
}

/// A maximal configuration obtained from an arc witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Straightened {
    pub theta: Configuration,
    pub folds: Vec<FoldChoice>,
}

fn plane_angle(h: &Hinge, w: &Point) -> Option<f64> {
    let (x, y) = (w.dot(h.u()), w.dot(h.v()));
    (x.hypot(y) > 1e-300).then(|| y.atan2(x))
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(std::f64::consts::TAU);
    if r > std::f64::consts::PI {
        r - std::f64::consts::TAU
    } else {
        r
    }
}

/// Rotates the distal sub-chains so the arc becomes the straight segment
/// from the origin to the end-point, working from the tail towards the head.
pub fn straighten(chain: &ChainSpec, witness: &ArcWitness) -> Result<Straightened, ReachError> {
    let n = chain.n();
    if witness.points.len() != n {
        return Err(ReachError::WrongLength { expected: n, found: witness.points.len() });
    }
    let scale = chain.scale();
    let same = |p: &Point, q: &Point| (p - q).norm() <= 1e-9 * scale;
    let hinges = chain.hinges();
    let a = &witness.points;
    // current images of a_1..a_n and e; a_i stays put until hinge i is processed
    let mut images: Vec<Point> = a.iter().cloned().chain(std::iter::once(chain.endpoint().clone())).collect();
    let origin = Point::zeros(chain.dim());
    let mut theta = vec![0.0; n];
    let mut folds = Vec::new();

    for i in (0..n).rev() {
        let h = &hinges[i];
        let next = (i + 1..=n).find(|&j| !same(&images[j], &a[i])).unwrap_or(n);
        let w = &images[next] - &a[i];
        let prev = (0..i).rev().find(|&j| !same(&a[j], &a[i]));
        let z = match prev {
            Some(j) => &a[i] - &a[j],
            None => &a[i] - &origin,
        };
        let folded = i > 0 && same(&a[i - 1], &a[i]);
        let angle = if folded {
            let (chosen, alternative) = fold_angle(h, hinges[i - 1].flat(), &w, &z);
            folds.push(FoldChoice { hinge: i, chosen, alternative });
            chosen
        } else {
            match (plane_angle(h, &w), plane_angle(h, &z)) {
                (Some(from), Some(to)) => wrap(to - from),
                _ => 0.0,
            }
        };
        theta[i] = angle;
        for img in images.iter_mut().skip(i + 1) {
            *img = h.rotate_point(angle, img);
        }
    }
    folds.reverse();
    Ok(Straightened { theta: Configuration::new(theta), folds })
}

/// Angle about `h` bringing `w` to a direction that the rotation about the
/// preceding hinge can align with `z`: their components along that hinge
/// must agree after normalization.
fn fold_angle(h: &Hinge, before: &AffineSubspace, w: &Point, z: &Point) -> (f64, Option<f64>) {
    let wn = w / w.norm();
    let zn = z / z.norm();
    let target = before.along(&zn);
    let residual = |t: f64| (before.along(&h.rotate_vector(t, &wn)) - &target).norm_squared();
    const SAMPLES: usize = 720;
    let step = std::f64::consts::TAU / SAMPLES as f64;
    let values: Vec<f64> = (0..SAMPLES).map(|k| residual(-std::f64::consts::PI + k as f64 * step)).collect();
    let mut roots: Vec<(f64, f64)> = Vec::new();
    for k in 0..SAMPLES {
        let (l, c, r) = (values[(k + SAMPLES - 1) % SAMPLES], values[k], values[(k + 1) % SAMPLES]);
        if c <= l && c <= r {
            let centre = -std::f64::consts::PI + k as f64 * step;
            let (t, v) = golden(&residual, centre - step, centre + step);
            roots.push((wrap(t), v));
        }
    }
    let best = roots.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let accept = best.max(1e-12) * 1e3;
    let mut good: Vec<f64> = roots.iter().filter(|r| r.1 <= accept).map(|r| r.0).collect();
    good.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    good.dedup_by(|x, y| (*x - *y).abs() < 1e-7);
    let chosen = good.first().copied().unwrap_or(0.0);
    (chosen, good.get(1).copied())
}

fn golden(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Rejection {
    ZeroValue,
    NotIncident { hinge: usize, residual: f64 },
    Parallel { hinge: usize },
    OrderingViolated { params: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Certification {
    Certified { ordering: Vec<f64> },
    Rejected(Rejection),
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified { .. })
    }
}

/// Certifies `theta` as a global maximum: the segment from the origin to the
/// end-point must cross every current hinge, in chain order.
pub fn certify_global_max(chain: &ChainSpec, theta: &Configuration, tol: &Tolerances) -> Certification {
    let params = match intersection_params(chain, theta, tol) {
        Ok(p) => p,
        Err(CriticalError::ZeroValue { .. }) => return Certification::Rejected(Rejection::ZeroValue),
        Err(CriticalError::NotIncident { index, residual }) => {
            return Certification::Rejected(Rejection::NotIncident { hinge: index, residual })
        }
        Err(_) => return Certification::Rejected(Rejection::ZeroValue),
    };
    let mut ordering = Vec::with_capacity(params.len());
    for (hinge, c) in params.iter().enumerate() {
        match c {
            Crossing::At(a) => ordering.push(*a),
            Crossing::Parallel => return Certification::Rejected(Rejection::Parallel { hinge }),
        }
    }
    let slack = tol.ordering;
    let inside = ordering.first().is_none_or(|&a| a >= -slack)
        && ordering.last().is_none_or(|&a| a <= 1.0 + slack)
        && ordering.windows(2).all(|w| w[0] <= w[1] + slack);
    if inside {
        Certification::Certified { ordering }
    } else {
        Certification::Rejected(Rejection::OrderingViolated { params: ordering })
    }
}

/// Global maximum reach with its witness and certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachResult {
    pub max_distance: f64,
    pub witness: ArcWitness,
    pub theta_star: Configuration,
    /// Arc-length positions of the witness points, as fractions of the length.
    pub ordering_params: Vec<f64>,
    pub folds: Vec<FoldChoice>,
    pub certification: Certification,
    /// `|sqrt F(theta*) - max_distance|`.
    pub gap: f64,
}

/// Cumulative arc length at each witness point divided by the total.
pub fn ordering_params(witness: &ArcWitness) -> Vec<f64> {
    let mut run = 0.0;
    let mut prev: Option<&Point> = None;
    witness
        .points
        .iter()
        .map(|p| {
            run += match prev {
                None => p.norm(),
                Some(q) => (p - q).norm(),
            };
            prev = Some(p);
            if witness.length > 0.0 {
                run / witness.length
            } else {
                0.0
            }
        })
        .collect()
}

/// Arc minimization, straightening and certification in one call.
pub fn reach(chain: &ChainSpec, opts: &ArcOptions, tol: &Tolerances) -> Result<ReachResult, ReachError> {
    let witness = min_polygonal_arc(chain, opts)?;
    let straight = straighten(chain, &witness)?;
    let achieved = chain.squared_distance(&straight.theta).sqrt();
    let certification = certify_global_max(chain, &straight.theta, tol);
    Ok(ReachResult {
        max_distance: witness.length,
        ordering_params: ordering_params(&witness),
        theta_star: straight.theta,
        folds: straight.folds,
        certification,
        gap: (achieved - witness.length).abs(),
        witness,
    })
}

/// Brute-force maximum of `F` over a `resolution^n` torus grid, for
/// verification. `None` when the grid would exceed `max_points`.
pub fn grid_max(chain: &ChainSpec, resolution: usize, max_points: u128) -> Option<(f64, Configuration)> {
    use rayon::prelude::*;
    let n = chain.n();
    let total = (resolution as u128).checked_pow(n as u32)?;
    if total > max_points || resolution == 0 {
        return None;
    }
    let step = std::f64::consts::TAU / resolution as f64;
    let at = |mut idx: usize| {
        let mut angles = vec![0.0; n];
        for a in angles.iter_mut() {
            *a = (idx % resolution) as f64 * step;
            idx /= resolution;
        }
        Configuration::new(angles)
    };
    let (best, idx) = (0..total as usize)
        .into_par_iter()
        .map(|idx| (chain.squared_distance(&at(idx)), idx))
        .reduce(|| (f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    Some((best, at(idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use std::f64::consts::PI;

    fn line_flat(base: Point, dir: Point) -> AffineSubspace {
        AffineSubspace::new(base, vec![dir]).unwrap()
    }

    fn planar(points: &[f64], end: f64) -> ChainSpec {
        let hinges = points
            .iter()
            .map(|&p| Hinge::from_parts(dvector![p, 0.0], vec![]).unwrap())
            .collect();
        ChainSpec::new(2, hinges, dvector![end, 0.0]).unwrap()
    }

    /// Golden-section minimization of the two-segment length along a line hinge.
    fn line_oracle(base: &Point, dir: &Point, p: &Point, q: &Point) -> Point {
        let f = |s: f64| {
            let a = base + dir * s;
            (p - &a).norm() + (&a - q).norm()
        };
        let (s, _) = golden(&f, -50.0, 50.0);
        base + dir * s
    }

    #[test]
    fn arc_length_examples() {
        let c = planar(&[1.0, 2.0], 3.0);
        let pts = vec![dvector![1.0, 0.0], dvector![2.0, 0.0]];
        assert_abs_diff_eq!(arc_length(&c, &pts).unwrap(), 3.0, epsilon = 1e-15);

        let h = Hinge::from_parts(dvector![1.0, 0.0, 0.0], vec![dvector![0.0, 1.0, 0.0]]).unwrap();
        let c = ChainSpec::new(3, vec![h], dvector![2.0, 0.0, 0.0]).unwrap();
        let len = arc_length(&c, &[dvector![1.0, 1.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(len, 2.0 * 2f64.sqrt(), epsilon = 1e-15);
        assert!(matches!(
            arc_length(&c, &[dvector![1.5, 1.0, 0.0]]),
            Err(ReachError::PointOffHinge { index: 0, .. })
        ));
    }

    #[test]
    fn coincident_arc_points_are_allowed() {
        let a = Hinge::from_parts(dvector![1.0, 0.0, 0.0], vec![dvector![0.0, 1.0, 0.0]]).unwrap();
        let b = Hinge::from_parts(dvector![1.0, 0.0, 0.0], vec![dvector![0.0, 0.0, 1.0]]).unwrap();
        let c = ChainSpec::new(3, vec![a, b], dvector![2.0, 0.0, 0.0]).unwrap();
        let p = dvector![1.0, 0.0, 0.0];
        assert_abs_diff_eq!(arc_length(&c, &[p.clone(), p]).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn single_hinge_examples() {
        let flat = line_flat(dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0]);
        let a = single_hinge_min(&flat, &dvector![0.0, 0.0, 0.0], &dvector![2.0, 0.0, 0.0]);
        assert_abs_diff_eq!(a, dvector![1.0, 0.0, 0.0], epsilon = 1e-15);

        let flat = line_flat(dvector![0.0, 0.0, 1.0], dvector![0.0, 1.0, 0.0]);
        let p = dvector![0.0, 0.0, 0.0];
        let q = dvector![0.0, 0.0, 2.0];
        let a = single_hinge_min(&flat, &p, &q);
        assert_abs_diff_eq!(a, dvector![0.0, 0.0, 1.0], epsilon = 1e-15);
        assert_abs_diff_eq!(a, line_oracle(&dvector![0.0, 0.0, 1.0], &dvector![0.0, 1.0, 0.0], &p, &q), epsilon = 1e-6);
    }

    #[test]
    fn single_hinge_point_on_hinge() {
        let base = dvector![1.0, 0.0, 0.0];
        let dir = dvector![0.0, 1.0, 0.0];
        let flat = line_flat(base.clone(), dir.clone());
        let p = dvector![1.0, 3.0, 0.0];
        let q = dvector![4.0, -1.0, 2.0];
        let a = single_hinge_min(&flat, &p, &q);
        assert_abs_diff_eq!(a, p, epsilon = 1e-15);
        assert_abs_diff_eq!(a, line_oracle(&base, &dir, &p, &q), epsilon = 1e-6);
        // both on the hinge: any point between is optimal, the first is returned
        let q = dvector![1.0, -2.0, 0.0];
        assert_abs_diff_eq!(single_hinge_min(&flat, &p, &q), p, epsilon = 1e-15);
    }

    #[test]
    fn single_hinge_matches_oracle_off_axis() {
        let base = dvector![0.5, -1.0, 2.0];
        let dir = dvector![1.0, 2.0, 2.0] / 3.0;
        let flat = line_flat(base.clone(), dir.clone());
        let p = dvector![0.0, 0.0, 0.0];
        let q = dvector![3.0, 1.0, -1.0];
        let a = single_hinge_min(&flat, &p, &q);
        assert_abs_diff_eq!(a, line_oracle(&base, &dir, &p, &q), epsilon = 1e-6);
    }

    #[test]
    fn straight_planar_chain() {
        let c = planar(&[1.0, 2.0], 3.0);
        let w = min_polygonal_arc(&c, &ArcOptions::default()).unwrap();
        assert_abs_diff_eq!(w.length, 3.0, epsilon = 1e-15);
        let s = straighten(&c, &w).unwrap();
        for &t in s.theta.angles() {
            assert_abs_diff_eq!(t.min(2.0 * PI - t), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn folded_reference_is_straightened() {
        // links 1, 1, 1 with the last link folded back in the reference
        let c = planar(&[1.0, 2.0], 1.0);
        let r = reach(&c, &ArcOptions::default(), &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(r.max_distance, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.squared_distance(&r.theta_star), 9.0, epsilon = 1e-11);
        assert!(r.certification.is_certified());
        assert_abs_diff_eq!(r.ordering_params[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.ordering_params[1], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn single_hinge_closed_form() {
        // the end-point circle has centre (1, 0, 0.5) and radius sqrt 2
        let h = Hinge::from_parts(dvector![1.0, 0.0, 0.0], vec![dvector![0.0, 0.0, 1.0]]).unwrap();
        let x = dvector![2.0, 1.0, 0.5];
        let c = ChainSpec::new(3, vec![h], x).unwrap();
        let centre_r = 1.0f64;
        let radius = 2f64.sqrt();
        let expected = ((centre_r + radius).powi(2) + 0.25).sqrt();
        let r = reach(&c, &ArcOptions::default(), &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(r.max_distance, expected, epsilon = 1e-12);
        assert!(r.gap <= 1e-10);
    }

    #[test]
    fn saddle_is_rejected() {
        let c = planar(&[1.0, 2.0], 3.0);
        let theta = Configuration::new(vec![0.0, PI]);
        let cert = certify_global_max(&c, &theta, &Tolerances::default());
        assert!(matches!(cert, Certification::Rejected(Rejection::OrderingViolated { .. })));
        let cert = certify_global_max(&c, &Configuration::new(vec![0.3, 0.2]), &Tolerances::default());
        assert!(matches!(cert, Certification::Rejected(Rejection::NotIncident { .. })));
    }

    #[test]
    fn planar_length_is_the_hinge_polygon() {
        let hinges = vec![
            Hinge::from_parts(dvector![1.0, 1.0], vec![]).unwrap(),
            Hinge::from_parts(dvector![2.0, -0.5], vec![]).unwrap(),
            Hinge::from_parts(dvector![0.5, 0.2], vec![]).unwrap(),
        ];
        let x = dvector![-1.0, 0.7];
        let c = ChainSpec::new(2, hinges.clone(), x.clone()).unwrap();
        let pts: Vec<Point> = hinges.iter().map(|h| h.base().clone()).collect();
        let r = reach(&c, &ArcOptions::default(), &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(r.max_distance, arc_total(&pts, &x), epsilon = 1e-14);
        assert!(r.certification.is_certified());
        assert!(r.gap <= 1e-12);
    }

    #[test]
    fn fold_in_space_is_straightened() {
        // two hinge lines crossing at (1,0,0); the optimal arc bends there
        let a = Hinge::from_parts(dvector![1.0, 0.0, 0.0], vec![dvector![0.0, 1.0, 0.0]]).unwrap();
        let b = Hinge::from_parts(dvector![1.0, 0.0, 0.0], vec![dvector![0.0, 0.6, 0.8]]).unwrap();
        let c = ChainSpec::new(3, vec![a, b], dvector![1.5, 0.3, -0.4]).unwrap();
        let r = reach(&c, &ArcOptions::default(), &Tolerances::default()).unwrap();
        assert!(r.gap <= 1e-8, "gap {}", r.gap);
        assert!(r.certification.is_certified());
    }
}
