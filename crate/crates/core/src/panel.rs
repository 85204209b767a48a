//! Panel-and-hinge chains: every body is a hyperplane piece holding both of
//! its hinges. Such chains carry reflection involutions that preserve the
//! distance, fold points on the head-to-tail line, and `2^n` flat
//! configurations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainError, ChainSpec, Configuration, CRITICAL_GATE};
use crate::critical::{
    classify, intersection_params, is_min_ordering, Census, Classification, CriticalError, CriticalRecord, Crossing,
    RecordKind, Tolerances,
};
use crate::geom::{hyperplane_normal, GeomError, Isometry, Point, Vector};

/// Panel membership residual, relative to the chain scale.
pub const PANEL_TOL: f64 = 1e-10;
/// Largest `n` for which the `2^n` flat configurations are enumerated.
pub const MAX_FLAT_HINGES: usize = 20;
/// Largest orbit explored before giving up.
pub const MAX_ORBIT: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PanelError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Critical(#[from] CriticalError),
    #[error("expected {expected} panel normals, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("body {body} leaves its panel by {residual:e}")]
    NotPanel { body: usize, residual: f64 },
    #[error("panels are not in a common hyperplane")]
    NotFlattenable,
    #[error("{n} hinges exceed the flat enumeration limit")]
    TooManyHinges { n: usize },
    #[error("hyperplane through the marked point and hinge {} is undefined", .hinge + 1)]
    DegenerateHyperplane { hinge: usize },
    #[error("hinge index {k} outside 1..={n}")]
    BadHinge { k: usize, n: usize },
    #[error("configuration is not critical (|grad F| = {grad_norm:e})")]
    NotCritical { grad_norm: f64 },
    #[error("census holds an ordered minimum and a zero-fiber point")]
    Inconsistent,
}

/// A chain whose bodies `0..=n` lie in hyperplanes with the given unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelChainSpec {
    chain: ChainSpec,
    normals: Vec<Vector>,
}

impl PanelChainSpec {
    pub fn new(chain: ChainSpec, normals: Vec<Vector>) -> Result<Self, PanelError> {
        let n = chain.n();
        if normals.len() != n + 1 {
            return Err(PanelError::WrongCount { expected: n + 1, found: normals.len() });
        }
        let mut unit = Vec::with_capacity(n + 1);
        for (body, nu) in normals.into_iter().enumerate() {
            if nu.len() != chain.dim() {
                return Err(ChainError::DimensionMismatch { index: body, expected: chain.dim(), found: nu.len() }.into());
            }
            let len = nu.norm();
            if !(len.is_finite() && len > 0.0) {
                return Err(GeomError::ZeroDirection.into());
            }
            unit.push(nu / len);
        }
        let spec = Self { chain, normals: unit };
        let limit = PANEL_TOL * spec.chain.scale();
        for body in 0..=n {
            let residual = spec.panel_residual(body);
            if residual > limit {
                return Err(PanelError::NotPanel { body, residual });
            }
        }
        Ok(spec)
    }

    pub fn chain(&self) -> &ChainSpec {
        &self.chain
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn n(&self) -> usize {
        self.chain.n()
    }

    /// A point of body `k`'s panel in the reference placement.
    fn panel_point(&self, body: usize) -> &Point {
        if body < self.n() {
            self.chain.hinges()[body].base()
        } else {
            self.chain.endpoint()
        }
    }

    fn panel_residual(&self, body: usize) -> f64 {
        let nu = &self.normals[body];
        let hinges = self.chain.hinges();
        let at = self.panel_point(body);
        let mut worst: f64 = 0.0;
        let mut check_point = |p: &Point| worst = worst.max((p - at).dot(nu).abs());
        if body == 0 {
            check_point(&Point::zeros(self.chain.dim()));
        } else {
            check_point(hinges[body - 1].base());
        }
        if body == self.n() {
            check_point(self.chain.endpoint());
        } else {
            check_point(hinges[body].base());
        }
        let scale = self.chain.scale();
        for h in [body.checked_sub(1), (body < self.n()).then_some(body)].into_iter().flatten() {
            for d in hinges[h].flat().directions() {
                worst = worst.max(d.dot(nu).abs() * scale);
            }
        }
        worst
    }

    fn panel_reflection(&self, body: usize) -> Isometry {
        Isometry::reflection(&self.normals[body], self.panel_point(body))
    }

    /// True when all panels share panel 0's hyperplane.
    pub fn is_flat(&self) -> bool {
        let nu0 = &self.normals[0];
        let limit = PANEL_TOL * self.chain.scale();
        let off = |p: &Point| p.dot(nu0).abs() <= limit;
        self.normals.iter().all(|nu| 1.0 - nu.dot(nu0).abs() <= PANEL_TOL)
            && self.chain.hinges().iter().all(|h| off(h.base()))
            && off(self.chain.endpoint())
    }

    /// Current unit normals of all panels at `theta`.
    pub fn current_normals(&self, theta: &Configuration) -> Vec<Vector> {
        self.chain
            .body_motions(theta)
            .iter()
            .zip(&self.normals)
            .map(|(m, nu)| m.apply_vector(nu))
            .collect()
    }

    /// The same chain re-anchored at `theta`.
    pub fn reanchored(&self, theta: &Configuration) -> PanelChainSpec {
        PanelChainSpec { chain: self.chain.reanchored(theta), normals: self.current_normals(theta) }
    }

    /// Angles folding every panel into panel 0's hyperplane, hinge by hinge.
    pub fn flattening_angles(&self) -> Configuration {
        let n = self.n();
        let mut theta = Configuration::zeros(n);
        let mut angles = vec![0.0; n];
        for k in 0..n {
            let motions = self.chain.body_motions(&theta);
            let hinge = &self.chain.hinges()[k];
            // both normals lie in the normal plane of the reference hinge
            let target = motions[k].inverse().apply_vector(&self.normals[0]);
            let own = &self.normals[k + 1];
            let angle_of = |w: &Vector| w.dot(hinge.v()).atan2(w.dot(hinge.u()));
            angles[k] = angle_of(&target) - angle_of(own);
            theta = Configuration::new(angles.clone());
        }
        theta
    }

    /// Re-anchors the chain at a configuration with all panels in panel 0's hyperplane.
    pub fn flattened(&self) -> PanelChainSpec {
        self.reanchored(&self.flattening_angles())
    }
}

/// Which marked point anchors a reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Head,
    Tail,
}

/// A non-trivial involution: `Reflect(anchor, k)` for 1-based `k`, or the
/// mirror of the whole chain in panel 0's hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Involution {
    Reflect { anchor: Anchor, k: usize },
    Mirror,
}

/// The `2n - 1` involutions: head-anchored at hinges `2..=n`, tail-anchored
/// at hinges `1..n`, and the mirror. Head at hinge 1 and tail at hinge `n`
/// reflect a single panel in its own hyperplane and act trivially.
pub fn generators(n: usize) -> Vec<Involution> {
    let mut out: Vec<Involution> = (2..=n).map(|k| Involution::Reflect { anchor: Anchor::Head, k }).collect();
    out.extend((1..n).map(|k| Involution::Reflect { anchor: Anchor::Tail, k }));
    out.push(Involution::Mirror);
    out
}

/// Reflects the bodies between the anchored marked point and hinge `k` in
/// the hyperplane through that point and hinge `k`, then re-expresses the
/// result with panel 0 back in place.
pub fn involution(
    panel: &PanelChainSpec,
    theta: &Configuration,
    anchor: Anchor,
    k: usize,
) -> Result<Configuration, PanelError> {
    apply(panel, theta, Involution::Reflect { anchor, k })
}

/// Reflection of the whole chain in panel 0's hyperplane.
pub fn mirror(panel: &PanelChainSpec, theta: &Configuration) -> Result<Configuration, PanelError> {
    apply(panel, theta, Involution::Mirror)
}

pub fn apply(panel: &PanelChainSpec, theta: &Configuration, op: Involution) -> Result<Configuration, PanelError> {
    let chain = panel.chain();
    let n = chain.n();
    let dim = chain.dim();
    if theta.len() != n {
        return Err(ChainError::WrongLength { expected: n, found: theta.len() }.into());
    }
    let motions = chain.body_motions(theta);
    let rho0 = panel.panel_reflection(0);
    let identity = Isometry::identity(dim);
    let tol = PANEL_TOL * chain.scale();
    // world-frame transform applied to each body before the proper correction
    let mut world: Vec<Isometry> = vec![identity.clone(); n + 1];
    match op {
        Involution::Mirror => world.iter_mut().for_each(|t| *t = rho0.clone()),
        Involution::Reflect { anchor, k } => {
            if k == 0 || k > n {
                return Err(PanelError::BadHinge { k, n });
            }
            let hinge = chain.hinge_placement(theta, k - 1);
            let point = match anchor {
                Anchor::Head => Point::zeros(dim),
                Anchor::Tail => chain.end_point(theta),
            };
            let normal = hyperplane_normal(&point, hinge.flat(), tol)
                .ok_or(PanelError::DegenerateHyperplane { hinge: k - 1 })?;
            let sigma = Isometry::reflection(&normal, &point);
            match anchor {
                // reflect bodies 0..k, then undo the motion of body 0
                Anchor::Head => {
                    let refix = rho0.compose(&sigma);
                    for (j, t) in world.iter_mut().enumerate() {
                        *t = if j < k { rho0.clone() } else { refix.clone() };
                    }
                }
                Anchor::Tail => {
                    for t in world.iter_mut().skip(k) {
                        *t = sigma.clone();
                    }
                }
            }
        }
    }
    let placed: Vec<Isometry> = world
        .iter()
        .zip(&motions)
        .enumerate()
        .map(|(j, (t, g))| {
            let moved = t.compose(g);
            if t.is_proper() {
                moved
            } else {
                moved.compose(&panel.panel_reflection(j))
            }
        })
        .collect();
    let angles = (1..=n)
        .map(|j| {
            let joint = placed[j - 1].inverse().compose(&placed[j]);
            chain.hinges()[j - 1].angle_of(&joint.linear)
        })
        .collect();
    Ok(Configuration::new(angles))
}

/// The `2^n` configurations with every joint at `0` or `pi`; the reference
/// placement must be flat.
pub fn flat_configurations(panel: &PanelChainSpec) -> Result<Vec<Configuration>, PanelError> {
    let n = panel.n();
    if n > MAX_FLAT_HINGES {
        return Err(PanelError::TooManyHinges { n });
    }
    if !panel.is_flat() {
        return Err(PanelError::NotFlattenable);
    }
    Ok((0u32..1 << n)
        .map(|mask| {
            Configuration::new(
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { std::f64::consts::PI } else { 0.0 })
                    .collect(),
            )
        })
        .collect())
}

/// A pair of consecutive hinges meeting the head-to-tail line at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldPoint {
    /// 0-based index of the first hinge of the pair.
    pub hinge: usize,
    pub param: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub folds: Vec<FoldPoint>,
    pub count: usize,
    /// Distinct hyperplanes through the origin and a hinge.
    pub hyperplanes: usize,
    /// Coincident crossings without a change of panel.
    pub coincidences: Vec<FoldPoint>,
    /// `count + 1 == hyperplanes`.
    pub consistent: bool,
}

/// Fold points of a critical configuration with `F > 0`.
pub fn fold_points(panel: &PanelChainSpec, theta: &Configuration, tol: &Tolerances) -> Result<FoldReport, PanelError> {
    let chain = panel.chain();
    let grad_norm = chain.gradient(theta).norm();
    if grad_norm > CRITICAL_GATE * chain.scale() * chain.scale() {
        return Err(PanelError::NotCritical { grad_norm });
    }
    let params = intersection_params(chain, theta, tol)?;
    let normals = panel.current_normals(theta);
    let mut folds = Vec::new();
    let mut coincidences = Vec::new();
    for i in 0..params.len().saturating_sub(1) {
        let (Crossing::At(a), Crossing::At(b)) = (params[i], params[i + 1]) else { continue };
        if (a - b).abs() > tol.ordering {
            continue;
        }
        let point = FoldPoint { hinge: i, param: 0.5 * (a + b) };
        // panels on either side of the middle body
        if normals[i].dot(&normals[i + 2]).abs() < 1.0 - tol.ordering {
            folds.push(point);
        } else {
            coincidences.push(point);
        }
    }
    let origin = Point::zeros(chain.dim());
    let limit = PANEL_TOL * chain.scale();
    let mut planes: Vec<Vector> = Vec::new();
    for h in chain.placements(theta) {
        if let Some(nu) = hyperplane_normal(&origin, h.flat(), limit) {
            if !planes.iter().any(|p| 1.0 - p.dot(&nu).abs() <= tol.ordering) {
                planes.push(nu);
            }
        }
    }
    let count = folds.len();
    Ok(FoldReport { count, hyperplanes: planes.len(), consistent: count + 1 == planes.len(), folds, coincidences })
}

/// Closure of `theta` under the involution group, sorted lexicographically.
pub fn orbit(panel: &PanelChainSpec, theta: &Configuration, dedup: f64) -> Result<Vec<Configuration>, PanelError> {
    let ops = generators(panel.n());
    let mut seen = vec![theta.clone()];
    let mut frontier = 0;
    while frontier < seen.len() && seen.len() < MAX_ORBIT {
        let here = seen[frontier].clone();
        frontier += 1;
        for op in &ops {
            let next = apply(panel, &here, *op)?;
            if !seen.iter().any(|s| s.torus_distance(&next) <= dedup) {
                seen.push(next);
            }
        }
    }
    seen.sort_by(|a, b| {
        a.angles()
            .iter()
            .zip(b.angles())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(seen)
}

/// Global minimum of a panel chain read off a census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumReport {
    /// Records whose crossings follow the projective-arc order.
    pub ordered: Vec<CriticalRecord>,
    /// A zero-fiber record, when the origin is reachable.
    pub zero_witness: Option<CriticalRecord>,
    /// Minimum distance, when determined.
    pub min_distance: Option<f64>,
}

/// Ordered minima and zero-fiber points exclude each other for panel chains.
pub fn min_candidates(_panel: &PanelChainSpec, census: &Census, tol: &Tolerances) -> Result<MinimumReport, PanelError> {
    let ordered: Vec<CriticalRecord> = census
        .records
        .iter()
        .filter(|r| {
            r.kind == RecordKind::Isolated
                && (classify(r, tol) == Classification::MinCandidate || is_min_ordering(&r.params_a, tol.ordering))
        })
        .cloned()
        .collect();
    let zero_witness = census.records.iter().find(|r| r.kind == RecordKind::ZeroFiber).cloned();
    if !ordered.is_empty() && zero_witness.is_some() {
        return Err(PanelError::Inconsistent);
    }
    let min_distance = if zero_witness.is_some() {
        Some(0.0)
    } else {
        ordered.iter().map(|r| r.value.sqrt()).reduce(f64::min)
    };
    Ok(MinimumReport { ordered, zero_witness, min_distance })
}
