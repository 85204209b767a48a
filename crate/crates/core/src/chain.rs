//! Serial body-and-hinge chains: the torus chart, the end-point map, the
//! squared head-to-tail distance `F` and its derivatives.
//!
//! The chart is anchored at the loaded reference placement. A configuration
//! `theta` places the chain by rotating the last body about the last hinge by
//! `theta[n-1]`, then the last two bodies about the previous hinge, and so on
//! down to the first hinge; all rotations are about the *reference* hinges in
//! that order, which is the same as rotating about the moving hinges head
//! first.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{AffineSubspace, GeomError, Hinge, HingeFrame, Isometry, Point, Vector};

/// Step of the central differences used by [`hessian_numeric`].
pub const HESSIAN_FD_STEP: f64 = 1e-4;

/// Gradient gate for [`hessian_critical`], relative to `scale^2`.
pub const CRITICAL_GATE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("a chain needs at least one hinge")]
    Empty,
    #[error("hinge {} lives in R^{found}, chain is in R^{expected}", .index + 1)]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("hinge {} passes through the origin (distance {distance:e})", .index + 1)]
    DegenerateHinge { index: usize, distance: f64 },
    #[error("hinges {} and {} coincide", .index + 1, .index + 2)]
    CoincidentHinges { index: usize },
    #[error("end-point lies on the last hinge (zero-length last link)")]
    DegenerateLink,
    #[error("configuration has {found} angles, chain has {expected} hinges")]
    WrongLength { expected: usize, found: usize },
    #[error("configuration is not critical: gradient norm {grad_norm:e} exceeds {limit:e}")]
    NotCritical { grad_norm: f64, limit: f64 },
}

fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed angular difference in `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// A point of the n-torus, every angle reduced to `[0, 2pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration(Vec<f64>);

impl Configuration {
    pub fn new(angles: Vec<f64>) -> Self {
        Self(angles.into_iter().map(reduce_angle).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Adds `delta` coordinatewise without reducing, for derivative stencils.
    pub(crate) fn shifted(&self, delta: &[f64]) -> Self {
        Self(self.0.iter().zip(delta).map(|(a, d)| a + d).collect())
    }

    pub fn with_offset(&self, delta: &[f64]) -> Self {
        Self::new(self.shifted(delta).0)
    }

    /// Largest per-coordinate angular distance.
    pub fn torus_distance(&self, other: &Configuration) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| angle_diff(*a, *b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for Configuration {
    fn from(v: Vec<f64>) -> Self {
        Self::new(v)
    }
}

/// Chain of `n` hinges in `R^d`: the origin is the marked point on the first
/// (grounded) body, `endpoint` the marked point on the last body, both in the
/// reference placement `theta = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    dim: usize,
    hinges: Vec<Hinge>,
    endpoint: Point,
    scale: f64,
}

impl ChainSpec {
    pub fn new(dim: usize, hinges: Vec<Hinge>, endpoint: Point) -> Result<Self, ChainError> {
        if dim < 2 {
            return Err(GeomError::Dimension(dim).into());
        }
        if hinges.is_empty() {
            return Err(ChainError::Empty);
        }
        if endpoint.len() != dim {
            return Err(GeomError::Length { expected: dim, found: endpoint.len() }.into());
        }
        if endpoint.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::NonFinite.into());
        }
        for (index, h) in hinges.iter().enumerate() {
            if h.ambient_dim() != dim {
                return Err(ChainError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: h.ambient_dim(),
                });
            }
        }
        let origin = Vector::zeros(dim);
        let feet: Vec<f64> = hinges.iter().map(|h| h.flat().distance_to(&origin)).collect();
        let scale = feet.iter().copied().fold(endpoint.norm(), f64::max).max(f64::MIN_POSITIVE);
        for (index, &distance) in feet.iter().enumerate() {
            if distance < 1e-10 * scale {
                return Err(ChainError::DegenerateHinge { index, distance });
            }
        }
        for (index, pair) in hinges.windows(2).enumerate() {
            let (a, b) = (pair[0].flat(), pair[1].flat());
            let same_dirs = b
                .directions()
                .iter()
                .all(|d| a.across(d).norm() <= 1e-10);
            if same_dirs && a.distance_to(b.base()) <= 1e-10 * scale {
                return Err(ChainError::CoincidentHinges { index });
            }
        }
        if hinges[hinges.len() - 1].flat().distance_to(&endpoint) <= 1e-10 * scale {
            return Err(ChainError::DegenerateLink);
        }
        Ok(Self { dim, hinges, endpoint, scale })
    }

    /// Builds a chain from raw flats, giving each hinge its canonical orientation.
    pub fn from_flats(
        dim: usize,
        flats: Vec<AffineSubspace>,
        endpoint: Point,
    ) -> Result<Self, ChainError> {
        let hinges = flats.into_iter().map(Hinge::new).collect::<Result<Vec<_>, _>>()?;
        Self::new(dim, hinges, endpoint)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of hinges.
    pub fn n(&self) -> usize {
        self.hinges.len()
    }

    pub fn hinges(&self) -> &[Hinge] {
        &self.hinges
    }

    pub fn endpoint(&self) -> &Point {
        &self.endpoint
    }

    /// Length unit of the chain: the largest of the end-point norm and the
    /// hinge distances from the origin in the reference placement.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn check(&self, theta: &Configuration) -> Result<(), ChainError> {
        if theta.len() != self.n() {
            return Err(ChainError::WrongLength { expected: self.n(), found: theta.len() });
        }
        Ok(())
    }

    fn assert_len(&self, theta: &Configuration) {
        if let Err(e) = self.check(theta) {
            panic!("{e}");
        }
    }

    /// Position of the end-point at `theta`.
    ///
    /// # Panics
    ///
    /// When `theta` has the wrong length; see [`ChainSpec::try_end_point`].
    pub fn end_point(&self, theta: &Configuration) -> Point {
        self.assert_len(theta);
        self.hinges
            .iter()
            .zip(theta.angles())
            .rev()
            .fold(self.endpoint.clone(), |p, (h, &a)| h.rotate_point(a, &p))
    }

    pub fn try_end_point(&self, theta: &Configuration) -> Result<Point, ChainError> {
        self.check(theta)?;
        Ok(self.end_point(theta))
    }

    /// Rigid motion applied to body `k` (`0..=n`) at `theta`; body 0 is grounded.
    pub fn body_motion(&self, theta: &Configuration, k: usize) -> Isometry {
        self.assert_len(theta);
        let mut m = Isometry::identity(self.dim);
        for (h, &a) in self.hinges.iter().zip(theta.angles()).take(k) {
            m = m.compose(&h.rotation(a));
        }
        m
    }

    /// All body motions `0..=n` at `theta`.
    pub fn body_motions(&self, theta: &Configuration) -> Vec<Isometry> {
        self.assert_len(theta);
        let mut out = Vec::with_capacity(self.n() + 1);
        let mut m = Isometry::identity(self.dim);
        out.push(m.clone());
        for (h, &a) in self.hinges.iter().zip(theta.angles()) {
            m = m.compose(&h.rotation(a));
            out.push(m.clone());
        }
        out
    }

    /// Current pose of hinge `i` (0-based); depends only on `theta[..i]`.
    pub fn hinge_placement(&self, theta: &Configuration, i: usize) -> Hinge {
        self.hinges[i].transformed(&self.body_motion(theta, i))
    }

    /// Current poses of all hinges.
    pub fn placements(&self, theta: &Configuration) -> Vec<Hinge> {
        self.body_motions(theta)
            .iter()
            .zip(&self.hinges)
            .map(|(m, h)| h.transformed(m))
            .collect()
    }

    /// `F(theta) = |e(theta)|^2`.
    pub fn squared_distance(&self, theta: &Configuration) -> f64 {
        self.end_point(theta).norm_squared()
    }

    /// Velocity of the end-point per unit `theta[i]`, for every `i`.
    fn end_point_jacobian(&self, hinges: &[Hinge], e: &Point) -> Vec<Vector> {
        hinges.iter().map(|h| h.generator(&(e - h.base()))).collect()
    }

    /// Analytic gradient of `F`.
    pub fn gradient(&self, theta: &Configuration) -> DVector<f64> {
        let hinges = self.placements(theta);
        let e = self.end_point(theta);
        let jac = self.end_point_jacobian(&hinges, &e);
        DVector::from_iterator(self.n(), jac.iter().map(|j| 2.0 * e.dot(j)))
    }

    /// Analytic Hessian of `F` (full second derivatives) at any `theta`.
    ///
    /// With `J_i = W_i (e - p_i)` the end-point velocity of hinge `i`, the
    /// mixed second derivative of `e` for `a <= b` is `W_a W_b (e - p_b)`.
    pub fn hessian(&self, theta: &Configuration) -> DMatrix<f64> {
        let hinges = self.placements(theta);
        let e = self.end_point(theta);
        let jac = self.end_point_jacobian(&hinges, &e);
        let n = self.n();
        let mut h = DMatrix::zeros(n, n);
        for b in 0..n {
            for a in 0..=b {
                let second = hinges[a].generator(&jac[b]);
                let val = 2.0 * (jac[a].dot(&jac[b]) + e.dot(&second));
                h[(a, b)] = val;
                h[(b, a)] = val;
            }
        }
        h
    }

    /// The same chain re-anchored so that `theta` becomes the reference placement.
    pub fn reanchored(&self, theta: &Configuration) -> ChainSpec {
        ChainSpec {
            dim: self.dim,
            hinges: self.placements(theta),
            endpoint: self.end_point(theta),
            scale: self.scale,
        }
    }
}

/// Which coordinates a Hessian matrix is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianBasis {
    /// Joint angles; entries are `(1/2) d^2F / dtheta_i dtheta_j`.
    Angles,
    /// Angles rescaled by `1/|t_i|`.
    Rescaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianMatrix {
    pub entries: DMatrix<f64>,
    pub basis: HessianBasis,
}

impl HessianMatrix {
    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Number of negative eigenvalues.
    pub fn index(&self) -> usize {
        self.eigenvalues().iter().filter(|&&l| l < 0.0).count()
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// Closed-form Hessian at a critical configuration, with the data it is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalHessian {
    pub angles: HessianMatrix,
    pub rescaled: HessianMatrix,
    pub frames: Vec<HingeFrame>,
    /// `alpha_i = <x, t_i> / <t_i, t_i>` for the current hinges.
    pub alphas: Vec<f64>,
}

/// Closed-form half-Hessian of `F` at a critical configuration:
/// `(1 - <x,t_i>/<t_i,t_i>) |t_i| |t_j| <nu_i, nu_j>` for `j <= i`, from the
/// current hinge frames. The normals are oriented by the chart's rotation
/// sense, so the matrix matches finite differences entrywise, not only up to
/// congruence.
pub fn hessian_critical(
    chain: &ChainSpec,
    theta: &Configuration,
) -> Result<CriticalHessian, ChainError> {
    chain.check(theta)?;
    let scale = chain.scale();
    let grad_norm = chain.gradient(theta).norm();
    let limit = CRITICAL_GATE * scale * scale;
    if grad_norm > limit {
        return Err(ChainError::NotCritical { grad_norm, limit });
    }
    let x = chain.end_point(theta);
    let frames = chain
        .placements(theta)
        .iter()
        .enumerate()
        .map(|(index, h)| {
            h.frame(scale).map_err(|e| match e {
                GeomError::DegenerateHinge { distance } => ChainError::DegenerateHinge { index, distance },
                other => other.into(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let alphas: Vec<f64> = frames.iter().map(|f| x.dot(&f.t) / f.t.norm_squared()).collect();
    let n = chain.n();
    let mut raw = DMatrix::zeros(n, n);
    let mut rescaled = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let beta = 1.0 - alphas[i];
            let g = frames[i].nu.dot(&frames[j].nu);
            let h = beta * g;
            rescaled[(i, j)] = h;
            rescaled[(j, i)] = h;
            let r = h * frames[i].norm_t * frames[j].norm_t;
            raw[(i, j)] = r;
            raw[(j, i)] = r;
        }
    }
    Ok(CriticalHessian {
        angles: HessianMatrix { entries: raw, basis: HessianBasis::Angles },
        rescaled: HessianMatrix { entries: rescaled, basis: HessianBasis::Rescaled },
        frames,
        alphas,
    })
}

/// Central-difference half-Hessian of `F`, step [`HESSIAN_FD_STEP`], symmetrized.
pub fn hessian_numeric(chain: &ChainSpec, theta: &Configuration) -> HessianMatrix {
    let f = |delta: &[f64]| chain.squared_distance(&theta.shifted(delta));
    numeric_half_hessian(chain.n(), HESSIAN_FD_STEP, f)
}

pub(crate) fn numeric_half_hessian(n: usize, h: f64, f: impl Fn(&[f64]) -> f64) -> HessianMatrix {
    let mut delta = vec![0.0; n];
    let f0 = f(&delta);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        delta[i] = h;
        let fp = f(&delta);
        delta[i] = -h;
        let fm = f(&delta);
        delta[i] = 0.0;
        m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                delta[i] = si * h;
                delta[j] = sj * h;
                let v = f(&delta);
                delta[i] = 0.0;
                delta[j] = 0.0;
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * h * h);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let entries = (&m + m.transpose()) * 0.25;
    HessianMatrix { entries, basis: HessianBasis::Angles }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn planar(points: &[f64], end: f64) -> ChainSpec {
        let hinges = points
            .iter()
            .map(|&p| Hinge::from_parts(dvector![p, 0.0], vec![]).unwrap())
            .collect();
        ChainSpec::new(2, hinges, dvector![end, 0.0]).unwrap()
    }

    fn vertical_line(x: f64) -> Hinge {
        Hinge::from_parts(dvector![x, 0.0, 0.0], vec![dvector![0.0, 0.0, 1.0]]).unwrap()
    }

    #[test]
    fn reference_placement_is_identity() {
        let c = planar(&[1.0, 2.0], 3.0);
        assert_abs_diff_eq!(c.end_point(&Configuration::zeros(2)), dvector![3.0, 0.0]);
        assert_abs_diff_eq!(c.squared_distance(&Configuration::zeros(2)), 9.0);
    }

    #[test]
    fn planar_folds() {
        let c = planar(&[1.0, 2.0], 3.0);
        let e = c.end_point(&Configuration::new(vec![0.0, PI]));
        assert_abs_diff_eq!(e, dvector![1.0, 0.0], epsilon = 1e-14);
        assert_abs_diff_eq!(c.squared_distance(&Configuration::new(vec![PI, 0.0])), 1.0, epsilon = 1e-14);
        let h2 = c.hinge_placement(&Configuration::new(vec![PI, 0.0]), 1);
        assert_abs_diff_eq!(h2.base().clone(), dvector![0.0, 0.0], epsilon = 1e-14);
    }

    #[test]
    fn spatial_quarter_turn() {
        let c = ChainSpec::new(3, vec![vertical_line(1.0), vertical_line(2.0)], dvector![3.0, 0.0, 0.0]).unwrap();
        let e = c.end_point(&Configuration::new(vec![FRAC_PI_2, 0.0]));
        // (3,0,0) about the vertical line through (1,0,0): radius 2, quarter turn.
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1].abs(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn first_hinge_is_grounded() {
        let c = ChainSpec::new(3, vec![vertical_line(1.0), vertical_line(2.0)], dvector![3.0, 0.0, 0.0]).unwrap();
        let theta = Configuration::new(vec![1.0, 2.0]);
        assert_eq!(c.hinge_placement(&theta, 0), c.hinges()[0]);
        let moved = c.hinge_placement(&theta, 1);
        let same = c.hinge_placement(&Configuration::new(vec![1.0, -0.3]), 1);
        assert_abs_diff_eq!(moved.base().clone(), same.base().clone(), epsilon = 1e-14);
    }

    #[test]
    fn rejects_degenerate_chains() {
        let through = Hinge::from_parts(dvector![0.0, 4.0, 0.0], vec![dvector![0.0, 1.0, 0.0]]).unwrap();
        assert!(matches!(
            ChainSpec::new(3, vec![through], dvector![1.0, 0.0, 0.0]),
            Err(ChainError::DegenerateHinge { index: 0, .. })
        ));
        assert!(matches!(
            ChainSpec::new(3, vec![vertical_line(1.0), vertical_line(1.0)], dvector![2.0, 0.0, 0.0]),
            Err(ChainError::CoincidentHinges { index: 0 })
        ));
        assert!(matches!(
            ChainSpec::new(3, vec![vertical_line(1.0)], dvector![1.0, 0.0, 5.0]),
            Err(ChainError::DegenerateLink)
        ));
        assert!(matches!(ChainSpec::new(3, vec![], dvector![1.0, 0.0, 0.0]), Err(ChainError::Empty)));
    }

    #[test]
    fn gradient_vanishes_on_aligned_chain() {
        let c = planar(&[1.0, 2.0], 3.0);
        let g = c.gradient(&Configuration::zeros(2));
        assert!(g.amax() < 1e-12);
    }

    #[test]
    fn gradient_matches_five_point_stencil() {
        let c = planar(&[1.0, 2.0], 3.0);
        let theta = Configuration::new(vec![0.0, FRAC_PI_2]);
        let h = 1e-3;
        let f = |d: f64| c.squared_distance(&theta.shifted(&[0.0, d]));
        let fd = (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
        // e = (2,0) + R(2+dt)(1,0) -> F = 5 + 4 cos(t), dF/dt = -4 sin(pi/2) = -4.
        assert_abs_diff_eq!(fd, -4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(c.gradient(&theta)[1], fd, epsilon = 1e-9);
    }

    #[test]
    fn single_hinge_reduces_to_cosine() {
        // Hinge {(1,0,s)}, x = (2,1,0): F = |b|^2 + |w|^2 + 2<b, R w> with
        // w = x - b = (1,1,0) in the rotation plane, so F = c0 + c1 cos(theta + phi).
        let c = ChainSpec::new(3, vec![vertical_line(1.0)], dvector![2.0, 1.0, 0.0]).unwrap();
        let h = &c.hinges()[0];
        let b = dvector![1.0, 0.0, 0.0];
        let w = dvector![1.0, 1.0, 0.0];
        let (bu, bv) = (b.dot(h.u()), b.dot(h.v()));
        let (wu, wv) = (w.dot(h.u()), w.dot(h.v()));
        // <b, R w> = cos(t) (bu wu + bv wv) + sin(t) (bv wu - bu wv)
        let (a, s) = (bu * wu + bv * wv, bv * wu - bu * wv);
        let c1 = 2.0 * (a * a + s * s).sqrt();
        let phi = -(s.atan2(a));
        for k in 0..12 {
            let t = k as f64 * 0.5;
            let theta = Configuration::new(vec![t]);
            assert_abs_diff_eq!(c.squared_distance(&theta), 3.0 + c1 * (t + phi).cos(), epsilon = 1e-13);
            assert_abs_diff_eq!(c.gradient(&theta)[0], -c1 * (t + phi).sin(), epsilon = 1e-13);
        }
    }

    #[test]
    fn critical_hessian_extended_planar() {
        let c = planar(&[1.0, 2.0, 3.0], 4.0);
        let theta = Configuration::zeros(3);
        let ch = hessian_critical(&c, &theta).unwrap();
        let num = hessian_numeric(&c, &theta);
        let tol = 1e-5 * num.norm();
        assert!((&ch.angles.entries - &num.entries).amax() <= tol);
        // beta_i = 1 - 4/i, h_ij = beta_max(i,j) once rescaled.
        for i in 0..3 {
            for j in 0..3 {
                let beta = 1.0 - 4.0 / (i.max(j) + 1) as f64;
                assert_abs_diff_eq!(ch.rescaled.entries[(i, j)], beta, epsilon = 1e-12);
            }
        }
        assert!(ch.angles.eigenvalues().iter().all(|&l| l < 0.0));
    }

    #[test]
    fn critical_hessian_single_circle() {
        let h = Hinge::from_parts(dvector![1.0, 0.0, 0.0], vec![dvector![0.0, 1.0, 0.0]]).unwrap();
        let c = ChainSpec::new(3, vec![h], dvector![2.0, 0.0, 0.0]).unwrap();
        let ch = hessian_critical(&c, &Configuration::zeros(1)).unwrap();
        assert_abs_diff_eq!(ch.angles.entries[(0, 0)], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn critical_hessian_requires_criticality() {
        let c = planar(&[1.0, 2.0], 3.0);
        assert!(matches!(
            hessian_critical(&c, &Configuration::new(vec![0.3, 0.2])),
            Err(ChainError::NotCritical { .. })
        ));
    }

    #[test]
    fn numeric_hessian_exact_on_quadratics() {
        let m = numeric_half_hessian(3, 1e-4, |x| {
            let (a, b, c) = (x[0] + 1.0, x[1] - 2.0, x[2]);
            3.0 * a * a + 2.0 * a * b - b * b + 0.5 * c * b + 7.0
        });
        let expected = nalgebra::dmatrix![3.0, 1.0, 0.0; 1.0, -1.0, 0.25; 0.0, 0.25, 0.0];
        assert_abs_diff_eq!(m.entries, expected, epsilon = 1e-6);
    }

    #[test]
    fn analytic_hessian_matches_differences_off_criticality() {
        let h1 = Hinge::from_parts(dvector![1.0, 0.5, 0.0], vec![dvector![0.0, 0.6, 0.8]]).unwrap();
        let h2 = Hinge::from_parts(dvector![2.0, -0.5, 1.0], vec![dvector![0.8, 0.0, 0.6]]).unwrap();
        let c = ChainSpec::new(3, vec![h1, h2], dvector![2.5, 1.0, -1.0]).unwrap();
        let theta = Configuration::new(vec![0.4, 2.1]);
        let num = hessian_numeric(&c, &theta).entries * 2.0;
        assert_abs_diff_eq!(c.hessian(&theta), num, epsilon = 1e-6);
    }

    #[test]
    fn configuration_reduction_and_distance() {
        let t = Configuration::new(vec![-0.5, 7.0, TAU]);
        assert_abs_diff_eq!(t.angles()[0], TAU - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.angles()[1], 7.0 - TAU, epsilon = 1e-15);
        assert_eq!(t.angles()[2], 0.0);
        let u = Configuration::new(vec![0.1, 7.0 - TAU, 1e-9]);
        assert_abs_diff_eq!(t.torus_distance(&u), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn wrong_length_is_reported() {
        let c = planar(&[1.0, 2.0], 3.0);
        assert!(matches!(
            c.try_end_point(&Configuration::zeros(3)),
            Err(ChainError::WrongLength { expected: 2, found: 3 })
        ));
    }
}
