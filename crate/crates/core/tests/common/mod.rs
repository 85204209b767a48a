//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use hingechain::geom::{AffineSubspace, Hinge, Point, Vector};
use hingechain::panel::PanelChainSpec;
use hingechain::{ChainSpec, Configuration};
use nalgebra::{dvector, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random unit vector (rejection sampling in the cube).
pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Point {
    DVector::from_fn(dim, |_, _| rng.random_range(-radius..radius))
}

pub fn random_angles(rng: &mut ChaCha8Rng, n: usize) -> Configuration {
    Configuration::new((0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect())
}

/// Random chain with hinges and end-point kept away from degeneracies
/// (hinges near the origin, consecutive hinges nearly meeting).
pub fn random_chain(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> ChainSpec {
    'retry: loop {
        let mut hinges = Vec::with_capacity(n);
        for _ in 0..n {
            let base = random_point(rng, dim, 2.0);
            let dirs: Vec<Vector> = (0..dim - 2).map(|_| unit_vector(rng, dim)).collect();
            let Ok((flat, _)) = AffineSubspace::orthonormalized(base, dirs) else { continue 'retry };
            if flat.distance_to(&Point::zeros(dim)) < 0.3 {
                continue 'retry;
            }
            hinges.push(Hinge::new(flat).unwrap());
        }
        let x = random_point(rng, dim, 2.5);
        if hinges.last().unwrap().flat().distance_to(&x) < 0.3 {
            continue;
        }
        if let Ok(c) = ChainSpec::new(dim, hinges, x) {
            return c;
        }
    }
}

/// Random panel chain: built flat inside `x_d = 0` and re-anchored at a
/// random configuration so the reference placement is bent.
pub fn random_panel_chain(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> PanelChainSpec {
    let slice = |rng: &mut ChaCha8Rng, r: f64| {
        let mut p = random_point(rng, dim, r);
        p[dim - 1] = 0.0;
        p
    };
    'retry: loop {
        let mut hinges = Vec::with_capacity(n);
        for _ in 0..n {
            let base = slice(rng, 2.0);
            let dirs: Vec<Vector> = (0..dim - 2)
                .map(|_| {
                    let mut v = unit_vector(rng, dim);
                    v[dim - 1] = 0.0;
                    v
                })
                .collect();
            let Ok((flat, _)) = AffineSubspace::orthonormalized(base, dirs) else { continue 'retry };
            if flat.distance_to(&Point::zeros(dim)) < 0.3 {
                continue 'retry;
            }
            hinges.push(Hinge::new(flat).unwrap());
        }
        let x = slice(rng, 2.5);
        if hinges.last().unwrap().flat().distance_to(&x) < 0.3 {
            continue;
        }
        let Ok(chain) = ChainSpec::new(dim, hinges, x) else { continue };
        let mut normal = Vector::zeros(dim);
        normal[dim - 1] = 1.0;
        let Ok(flat) = PanelChainSpec::new(chain, vec![normal; n + 1]) else { continue };
        let theta = random_angles(rng, n);
        return flat.reanchored(&theta);
    }
}

/// Panel chain in `R^3` whose reference placement is a maximum with folds.
///
/// Hinge `k` crosses the x-axis at `s[k]` inside the plane through the
/// x-axis tilted by `tilt[k]`; consecutive equal crossings are folds.
pub fn folded_panel_chain(s: &[f64], tilt: &[f64], end: f64) -> PanelChainSpec {
    let n = s.len();
    let dirs: Vec<Vector> = (0..n)
        .map(|k| {
            let psi = 0.9 + 0.37 * k as f64;
            let (c, sn) = (tilt[k].cos(), tilt[k].sin());
            dvector![psi.cos(), -psi.sin() * sn, psi.sin() * c]
        })
        .collect();
    let plane_normal = |t: f64| dvector![0.0, t.cos(), t.sin()];
    let hinges = (0..n)
        .map(|k| Hinge::from_parts(dvector![s[k], 0.0, 0.0], vec![dirs[k].clone()]).unwrap())
        .collect();
    let chain = ChainSpec::new(3, hinges, dvector![end, 0.0, 0.0]).unwrap();
    let mut normals = vec![plane_normal(tilt[0])];
    for k in 1..n {
        normals.push(if s[k] == s[k - 1] { dirs[k - 1].cross(&dirs[k]) } else { plane_normal(tilt[k]) });
    }
    normals.push(plane_normal(tilt[n - 1]));
    PanelChainSpec::new(chain, normals).unwrap()
}

/// Planar chain from link lengths, laid out with the given bend angles.
pub fn planar_from_links(links: &[f64], bends: &[f64]) -> ChainSpec {
    let mut p = dvector![0.0, 0.0];
    let mut heading = 0.0;
    let mut points = Vec::new();
    for (i, &l) in links.iter().enumerate() {
        heading += bends.get(i).copied().unwrap_or(0.0);
        p += dvector![heading.cos(), heading.sin()] * l;
        points.push(p.clone());
    }
    let x = points.pop().unwrap();
    let hinges = points.into_iter().map(|q| Hinge::from_parts(q, vec![]).unwrap()).collect();
    ChainSpec::new(2, hinges, x).unwrap()
}

/// Central difference gradient of `F` with step `h`.
pub fn fd_gradient(chain: &ChainSpec, theta: &Configuration, h: f64) -> DVector<f64> {
    let n = chain.n();
    DVector::from_fn(n, |i, _| {
        let mut plus = theta.angles().to_vec();
        let mut minus = plus.clone();
        plus[i] += h;
        minus[i] -= h;
        (chain.squared_distance(&Configuration::new(plus)) - chain.squared_distance(&Configuration::new(minus)))
            / (2.0 * h)
    })
}

/// Grid oracle for spatial chains of line hinges, written independently of
/// the library's rotation code (Rodrigues' formula about each hinge line).
pub struct LineChain {
    pub points: Vec<[f64; 3]>,
    pub dirs: Vec<[f64; 3]>,
    pub x: [f64; 3],
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn rodrigues(p: [f64; 3], d: [f64; 3], c: f64, s: f64, y: [f64; 3]) -> [f64; 3] {
    let w = sub(y, p);
    let dw = dot(d, w);
    let dxw = cross(d, w);
    let r = [
        w[0] * c + dxw[0] * s + d[0] * dw * (1.0 - c),
        w[1] * c + dxw[1] * s + d[1] * dw * (1.0 - c),
        w[2] * c + dxw[2] * s + d[2] * dw * (1.0 - c),
    ];
    add(p, r)
}

impl LineChain {
    pub fn from_chain(chain: &ChainSpec) -> Self {
        let arr = |v: &Vector| [v[0], v[1], v[2]];
        Self {
            points: chain.hinges().iter().map(|h| arr(h.base())).collect(),
            dirs: chain.hinges().iter().map(|h| arr(&h.flat().directions()[0])).collect(),
            x: arr(chain.endpoint()),
        }
    }

    /// Largest `F` over the `g^n` grid. The first joint is handled in closed
    /// form per grid cell: `F = c0 + a cos t + b sin t` (evaluated on the grid).
    pub fn grid_max(&self, g: usize) -> f64 {
        use rayon::prelude::*;
        let n = self.points.len();
        let table: Vec<(f64, f64)> = (0..g)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / g as f64;
                (t.cos(), t.sin())
            })
            .collect();
        let tail_cells = g.pow((n - 1) as u32);
        (0..tail_cells)
            .into_par_iter()
            .map(|mut cell| {
                // apply joints n..2 to the end-point
                let mut y = self.x;
                let mut idx = Vec::with_capacity(n - 1);
                for _ in 1..n {
                    idx.push(cell % g);
                    cell /= g;
                }
                for j in (1..n).rev() {
                    let (c, s) = table[idx[j - 1]];
                    y = rodrigues(self.points[j], self.dirs[j], c, s, y);
                }
                let (p, d) = (self.points[0], self.dirs[0]);
                let w = sub(y, p);
                let dw = dot(d, w);
                let dp = dot(d, p);
                let pw = dot(p, w);
                let cross_term = dot(p, cross(d, w));
                let base = dot(p, p) + dot(w, w) + 2.0 * dw * dp;
                let a = 2.0 * (pw - dw * dp);
                let b = 2.0 * cross_term;
                table.iter().map(|&(c, s)| base + a * c + b * s).fold(f64::NEG_INFINITY, f64::max)
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }

    /// Grid argmax (angles in the oracle's own convention).
    pub fn grid_argmax(&self, g: usize) -> (f64, Vec<f64>) {
        let n = self.points.len();
        let total = g.pow(n as u32);
        let mut best = (f64::NEG_INFINITY, vec![]);
        for mut cell in 0..total {
            let mut angles = Vec::with_capacity(n);
            for _ in 0..n {
                angles.push(std::f64::consts::TAU * (cell % g) as f64 / g as f64);
                cell /= g;
            }
            let f = self.value(&angles);
            if f > best.0 {
                best = (f, angles);
            }
        }
        best
    }

    pub fn value(&self, angles: &[f64]) -> f64 {
        let mut y = self.x;
        for j in (0..self.points.len()).rev() {
            y = rodrigues(self.points[j], self.dirs[j], angles[j].cos(), angles[j].sin(), y);
        }
        dot(y, y)
    }
}
