//! Dimension-generic affine geometry: flats, hinges (codimension-2 flats with an
//! oriented normal plane), rotations about hinges, perpendicular feet and
//! line/hinge incidence.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub type Point = DVector<f64>;
pub type Vector = DVector<f64>;

/// Orthonormality slack accepted by [`AffineSubspace::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Below this sine a line direction is treated as lying in the hinge directions.
pub const PARALLEL_SINE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("ambient dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("expected {expected} coordinates, got {found}")]
    Length { expected: usize, found: usize },
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("direction vectors are not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("direction vectors are linearly dependent")]
    DependentDirections,
    #[error("a flat with {k} directions is not proper in R^{dim}")]
    NotProper { k: usize, dim: usize },
    #[error("a hinge in R^{dim} needs {expected} directions, got {found}")]
    NotHinge { dim: usize, expected: usize, found: usize },
    #[error("hinge passes through the origin (distance {distance:e})")]
    DegenerateHinge { distance: f64 },
    #[error("line direction must be nonzero")]
    ZeroDirection,
}

fn check_point(p: &Vector, dim: usize) -> Result<(), GeomError> {
    if p.len() != dim {
        return Err(GeomError::Length { expected: dim, found: p.len() });
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(GeomError::NonFinite);
    }
    Ok(())
}

/// An affine flat `base + span(directions)` with an orthonormal direction list.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    base: Point,
    directions: Vec<Vector>,
}

impl AffineSubspace {
    /// Builds a flat from an already orthonormal direction list.
    pub fn new(base: Point, directions: Vec<Vector>) -> Result<Self, GeomError> {
        let dim = base.len();
        Self::check_shape(&base, &directions)?;
        let mut defect = 0.0_f64;
        for (i, a) in directions.iter().enumerate() {
            for (j, b) in directions.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((a.dot(b) - target).abs());
            }
        }
        if defect > ORTHONORMAL_TOL {
            return Err(GeomError::NotOrthonormal { defect });
        }
        debug_assert!(directions.len() < dim);
        Ok(Self { base, directions })
    }

    /// Builds a flat from arbitrary independent directions, orthonormalizing them
    /// by Gram-Schmidt. Also returns the largest coordinate change made to any
    /// normalized input direction, so loaders can warn about non-orthogonal input.
    pub fn orthonormalized(
        base: Point,
        directions: Vec<Vector>,
    ) -> Result<(Self, f64), GeomError> {
        Self::check_shape(&base, &directions)?;
        let mut basis: Vec<Vector> = Vec::with_capacity(directions.len());
        let mut adjustment = 0.0_f64;
        for raw in &directions {
            let mut w = raw.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = w.dot(b);
                    w.axpy(-c, b, 1.0);
                }
            }
            let norm = w.norm();
            if norm <= 1e-12 * raw.norm().max(1e-300) || norm == 0.0 {
                return Err(GeomError::DependentDirections);
            }
            w /= norm;
            adjustment = adjustment.max((&w - raw / raw.norm()).amax());
            basis.push(w);
        }
        Ok((Self { base, directions: basis }, adjustment))
    }

    fn check_shape(base: &Point, directions: &[Vector]) -> Result<(), GeomError> {
        let dim = base.len();
        if dim < 2 {
            return Err(GeomError::Dimension(dim));
        }
        check_point(base, dim)?;
        for d in directions {
            check_point(d, dim)?;
        }
        if directions.len() >= dim {
            return Err(GeomError::NotProper { k: directions.len(), dim });
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn directions(&self) -> &[Vector] {
        &self.directions
    }

    /// Component of `w` inside the direction span.
    pub fn along(&self, w: &Vector) -> Vector {
        let mut out = Vector::zeros(w.len());
        for d in &self.directions {
            out.axpy(w.dot(d), d, 1.0);
        }
        out
    }

    /// Component of `w` orthogonal to the direction span.
    pub fn across(&self, w: &Vector) -> Vector {
        w - self.along(w)
    }

    /// Perpendicular foot of `p` on the flat.
    pub fn closest_point(&self, p: &Point) -> Point {
        &self.base + self.along(&(p - &self.base))
    }

    pub fn distance_to(&self, p: &Point) -> f64 {
        self.across(&(p - &self.base)).norm()
    }

    /// Image of the flat under an isometry.
    pub fn transformed(&self, motion: &Isometry) -> Self {
        Self {
            base: motion.apply_point(&self.base),
            directions: self.directions.iter().map(|d| motion.apply_vector(d)).collect(),
        }
    }
}

/// Free-function form of [`AffineSubspace::closest_point`].
pub fn closest_point(subspace: &AffineSubspace, p: &Point) -> Point {
    subspace.closest_point(p)
}

/// Perpendicular foot `t` of the origin on a hinge together with the unit
/// normal `nu` of the hyperplane spanned by the hinge and the origin.
///
/// `nu` is tied to the rotation sense of the hinge: the rotation generator
/// maps `t` to `-|t| nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeFrame {
    pub t: Vector,
    pub nu: Vector,
    pub norm_t: f64,
}

/// A codimension-2 flat with an oriented orthonormal basis `(u, v)` of the
/// 2-plane orthogonal to its directions. Positive angles turn `u` towards `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hinge {
    flat: AffineSubspace,
    u: Vector,
    v: Vector,
}

impl Hinge {
    /// Wraps a codimension-2 flat with its canonical orientation.
    ///
    /// `u` is the normalized residual of the canonical basis vector with the
    /// largest component outside the direction span (lowest index on ties), `v`
    /// completes it from the remaining basis vectors the same way, and the sign
    /// of `v` makes `det[u, v, directions..] > 0` (right-hand rule about the
    /// oriented hinge).
    pub fn new(flat: AffineSubspace) -> Result<Self, GeomError> {
        let dim = flat.ambient_dim();
        if flat.directions.len() + 2 != dim {
            return Err(GeomError::NotHinge {
                dim,
                expected: dim - 2,
                found: flat.directions.len(),
            });
        }
        let u = greedy_complement(dim, &flat.directions);
        let mut spanned = flat.directions.clone();
        spanned.push(u.clone());
        let mut v = greedy_complement(dim, &spanned);
        let mut cols = vec![u.clone(), v.clone()];
        cols.extend(flat.directions.iter().cloned());
        if DMatrix::from_columns(&cols).determinant() < 0.0 {
            v = -v;
        }
        Ok(Self { flat, u, v })
    }

    /// Convenience constructor from a base point and orthonormal directions.
    pub fn from_parts(base: Point, directions: Vec<Vector>) -> Result<Self, GeomError> {
        Self::new(AffineSubspace::new(base, directions)?)
    }

    pub fn flat(&self) -> &AffineSubspace {
        &self.flat
    }

    pub fn u(&self) -> &Vector {
        &self.u
    }

    pub fn v(&self) -> &Vector {
        &self.v
    }

    pub fn base(&self) -> &Point {
        &self.flat.base
    }

    pub fn ambient_dim(&self) -> usize {
        self.flat.ambient_dim()
    }

    /// Infinitesimal rotation about the hinge directions applied to a vector.
    pub fn generator(&self, w: &Vector) -> Vector {
        let wu = w.dot(&self.u);
        let wv = w.dot(&self.v);
        &self.v * wu - &self.u * wv
    }

    /// Linear part of the rotation by `angle`.
    pub fn rotate_vector(&self, angle: f64, w: &Vector) -> Vector {
        let (s, c) = angle.sin_cos();
        let wu = w.dot(&self.u);
        let wv = w.dot(&self.v);
        let mut out = w.clone();
        out.axpy((c - 1.0) * wu - s * wv, &self.u, 1.0);
        out.axpy((c - 1.0) * wv + s * wu, &self.v, 1.0);
        out
    }

    /// Rotation of a point about the hinge by `angle`.
    pub fn rotate_point(&self, angle: f64, p: &Point) -> Point {
        let rel = p - &self.flat.base;
        &self.flat.base + self.rotate_vector(angle, &rel)
    }

    /// The rotation by `angle` as an explicit isometry.
    pub fn rotation(&self, angle: f64) -> Isometry {
        let dim = self.ambient_dim();
        let (s, c) = angle.sin_cos();
        let uu = &self.u * self.u.transpose();
        let vv = &self.v * self.v.transpose();
        let vu = &self.v * self.u.transpose();
        let uv = &self.u * self.v.transpose();
        let linear = DMatrix::identity(dim, dim) + (uu + vv) * (c - 1.0) + (vu - uv) * s;
        let translation = &self.flat.base - &linear * &self.flat.base;
        Isometry { linear, translation }
    }

    /// Angle of the proper rotation `linear` about this hinge's directions.
    pub fn angle_of(&self, linear: &DMatrix<f64>) -> f64 {
        let image = linear * &self.u;
        image.dot(&self.v).atan2(image.dot(&self.u))
    }

    /// Image of the hinge, orientation included, under an isometry.
    pub fn transformed(&self, motion: &Isometry) -> Self {
        Self {
            flat: self.flat.transformed(motion),
            u: motion.apply_vector(&self.u),
            v: motion.apply_vector(&self.v),
        }
    }

    /// `(t, nu)` frame; fails when the hinge is within `1e-10 * scale` of the origin.
    pub fn frame(&self, scale: f64) -> Result<HingeFrame, GeomError> {
        let t = self.flat.closest_point(&Vector::zeros(self.ambient_dim()));
        let norm_t = t.norm();
        if norm_t < 1e-10 * scale {
            return Err(GeomError::DegenerateHinge { distance: norm_t });
        }
        let nu = -self.generator(&t) / norm_t;
        Ok(HingeFrame { t, nu, norm_t })
    }
}

fn greedy_complement(dim: usize, spanned: &[Vector]) -> Vector {
    let mut best: Option<(f64, Vector)> = None;
    for k in 0..dim {
        let mut w = Vector::zeros(dim);
        w[k] = 1.0;
        for _ in 0..2 {
            for b in spanned {
                let c = w.dot(b);
                w.axpy(-c, b, 1.0);
            }
        }
        let norm = w.norm();
        match &best {
            Some((bn, _)) if norm <= bn + 1e-12 => {}
            _ => best = Some((norm, w / norm)),
        }
    }
    best.expect("proper flat has a nonzero complement").1
}

/// Free-function form of [`Hinge::frame`] with unit scene scale.
pub fn hinge_frame(hinge: &Hinge) -> Result<HingeFrame, GeomError> {
    hinge.frame(1.0)
}

/// Free-function form of [`Hinge::rotate_point`].
pub fn rotate_about(hinge: &Hinge, angle: f64, p: &Point) -> Point {
    hinge.rotate_point(angle, p)
}

/// A parametrized line `base + s * dir`; `dir` is not normalized so the
/// parameter of a meeting point is invariant under uniform scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub base: Point,
    pub dir: Vector,
}

impl Line {
    pub fn new(base: Point, dir: Vector) -> Result<Self, GeomError> {
        check_point(&dir, base.len())?;
        check_point(&base, base.len())?;
        if dir.norm() == 0.0 {
            return Err(GeomError::ZeroDirection);
        }
        Ok(Self { base, dir })
    }

    /// The line from the origin through `p`, parametrized so that `p` sits at 1.
    pub fn through_origin(p: &Point) -> Result<Self, GeomError> {
        Self::new(Vector::zeros(p.len()), p.clone())
    }

    pub fn at(&self, s: f64) -> Point {
        &self.base + &self.dir * s
    }
}

/// How a line sits relative to a flat, projectively.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Incidence {
    /// The line meets the flat at `base + param * dir`.
    Meets { param: f64 },
    /// The line direction lies in the flat directions (meeting at infinity).
    Parallel { distance: f64 },
    /// Neither; `residual` is the minimal distance between the two.
    Skew { residual: f64 },
}

impl Incidence {
    /// Distance between line and flat, with parallelism counted as incidence.
    pub fn projective_residual(&self) -> f64 {
        match *self {
            Incidence::Meets { .. } | Incidence::Parallel { .. } => 0.0,
            Incidence::Skew { residual } => residual,
        }
    }
}

/// Classifies a line against a flat; `tol` is the absolute meeting tolerance.
pub fn line_meet(line: &Line, flat: &AffineSubspace, tol: f64) -> Incidence {
    let offset = flat.across(&(&line.base - flat.base()));
    let dir_across = flat.across(&line.dir);
    let dir_norm = line.dir.norm();
    let across_norm = dir_across.norm();
    if across_norm <= PARALLEL_SINE_TOL * dir_norm {
        let distance = offset.norm();
        if distance <= tol {
            return Incidence::Meets { param: 0.0 };
        }
        return Incidence::Parallel { distance };
    }
    let param = -offset.dot(&dir_across) / (across_norm * across_norm);
    let residual = (offset + dir_across * param).norm();
    if residual <= tol {
        Incidence::Meets { param }
    } else {
        Incidence::Skew { residual }
    }
}

/// Minimal distance between a line and a flat, zero when they are parallel
/// (they meet at infinity).
pub fn projective_distance(line: &Line, flat: &AffineSubspace) -> f64 {
    let offset = flat.across(&(&line.base - flat.base()));
    let dir_across = flat.across(&line.dir);
    let across_norm = dir_across.norm();
    if across_norm <= PARALLEL_SINE_TOL * line.dir.norm() {
        return 0.0;
    }
    let param = -offset.dot(&dir_across) / (across_norm * across_norm);
    (offset + dir_across * param).norm()
}

/// A (possibly improper) Euclidean motion `p -> linear * p + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    pub linear: DMatrix<f64>,
    pub translation: Vector,
}

impl Isometry {
    pub fn identity(dim: usize) -> Self {
        Self {
            linear: DMatrix::identity(dim, dim),
            translation: Vector::zeros(dim),
        }
    }

    /// Reflection in the hyperplane through `point` with unit `normal`.
    pub fn reflection(normal: &Vector, point: &Point) -> Self {
        let dim = normal.len();
        let linear = DMatrix::identity(dim, dim) - normal * normal.transpose() * 2.0;
        let translation = normal * (2.0 * normal.dot(point));
        Self { linear, translation }
    }

    pub fn apply_point(&self, p: &Point) -> Point {
        &self.linear * p + &self.translation
    }

    pub fn apply_vector(&self, w: &Vector) -> Vector {
        &self.linear * w
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            linear: &self.linear * &other.linear,
            translation: &self.linear * &other.translation + &self.translation,
        }
    }

    pub fn inverse(&self) -> Isometry {
        let linear = self.linear.transpose();
        let translation = -(&linear * &self.translation);
        Isometry { linear, translation }
    }

    pub fn is_proper(&self) -> bool {
        self.linear.determinant() > 0.0
    }
}

/// Unit normal of the hyperplane spanned by a point and a hinge, or `None`
/// when the point lies on the hinge (within `tol`).
pub fn hyperplane_normal(point: &Point, hinge: &AffineSubspace, tol: f64) -> Option<Vector> {
    let foot = hinge.closest_point(point);
    let radial = &foot - point;
    let dist = radial.norm();
    if dist <= tol {
        return None;
    }
    let mut spanned = hinge.directions().to_vec();
    spanned.push(radial / dist);
    let dim = point.len();
    if spanned.len() + 1 != dim {
        return None;
    }
    Some(greedy_complement(dim, &spanned))
}
