//! Mass geometry of the shape sphere and the projection of planar triangles
//! onto the moduli cone.

use nalgebra::{Matrix3, Matrix5x4, Vector3, Vector5};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::{Scalar, V3};

/// Normalized masses with the derived constants of the shape sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassDistribution {
    m: [f64; 3],
    mhat: [f64; 3],
    mhat_sum: f64,
    mbar: f64,
    k: [f64; 3],
    beta: [f64; 3],
    b: [[f64; 3]; 3],
    /// Maps raw Hopf images onto the sphere with the b_i above.
    align: [[f64; 3]; 3],
}

/// Cyclic successor indices (j, k) of i.
pub(crate) fn others(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

impl MassDistribution {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        let raw = [m1, m2, m3];
        if raw.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidInput(format!("masses must be positive, got {raw:?}")));
        }
        let total: f64 = raw.iter().sum();
        let m = raw.map(|x| x / total);
        let mhat = std::array::from_fn(|i| {
            let (j, k) = others(i);
            m[j] * m[k]
        });
        let mhat_sum: f64 = mhat.iter().sum();
        let mbar = m[0] * m[1] * m[2];
        let k = std::array::from_fn(|i| 2.0 * mhat[i].powf(1.5) / (1.0 - m[i]).sqrt());
        let beta = std::array::from_fn(|i| ((mhat[i] - m[i]) / (mhat[i] + m[i])).acos());
        let b = [
            [1.0, 0.0, 0.0],
            [beta[2].cos(), beta[2].sin(), 0.0],
            [beta[1].cos(), -beta[1].sin(), 0.0],
        ];
        let mut md = MassDistribution {
            m,
            mhat,
            mhat_sum,
            mbar,
            k,
            beta,
            b,
            align: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        md.align = md.compute_alignment()?;
        Ok(md)
    }

    pub fn equal() -> Self {
        Self::new(1.0, 1.0, 1.0).expect("equal masses are valid")
    }

    pub fn masses(&self) -> [f64; 3] {
        self.m
    }
    pub fn mhat(&self) -> [f64; 3] {
        self.mhat
    }
    pub fn mhat_sum(&self) -> f64 {
        self.mhat_sum
    }
    pub fn mbar(&self) -> f64 {
        self.mbar
    }
    /// Weights of the shape potential.
    pub fn k(&self) -> [f64; 3] {
        self.k
    }
    pub fn beta(&self) -> [f64; 3] {
        self.beta
    }
    /// Binary collision points on the equator.
    pub fn b(&self) -> [[f64; 3]; 3] {
        self.b
    }

    /// m_j m_k / ((1 - m_i) mhat): half of b_i.(b_i - p0).
    pub fn c(&self, i: usize) -> f64 {
        self.mhat[i] / ((1.0 - self.m[i]) * self.mhat_sum)
    }

    fn jacobi_mu(&self) -> (f64, f64) {
        let [m1, m2, m3] = self.m;
        (m1 * m2 / (m1 + m2), m3 * (1.0 - m3))
    }

    fn raw_image(&self, pos: &[[f64; 2]; 3]) -> [f64; 3] {
        let (z1, z2) = self.jacobi(pos);
        let i = norm2(z1) + norm2(z2);
        hopf(z1, z2, i)
    }

    fn compute_alignment(&self) -> Result<[[f64; 3]; 3]> {
        let [m1, m2, m3] = self.m;
        // a2 = a3 and a1 = a3 collision configurations
        let c1 = [[m2 + m3, 0.0], [-m1, 0.0], [-m1, 0.0]];
        let c2 = [[-m2, 0.0], [m1 + m3, 0.0], [-m2, 0.0]];
        let q1 = self.raw_image(&c1);
        let q2 = self.raw_image(&c2);
        // counterclockwise triangle decides the sign of the pole
        let ccw = [[1.0, 0.0], [-0.5, 0.75f64.sqrt()], [-0.5, -(0.75f64.sqrt())]];
        let mut ccw_centered = ccw;
        let com: [f64; 2] = [0, 1].map(|d| (0..3).map(|i| self.m[i] * ccw[i][d]).sum());
        for a in ccw_centered.iter_mut() {
            a[0] -= com[0];
            a[1] -= com[1];
        }
        let s = self.raw_image(&ccw_centered)[2].signum();
        let src = Matrix3::from_columns(&[
            Vector3::from(q1),
            Vector3::from(q2),
            Vector3::new(0.0, 0.0, s),
        ]);
        let dst = Matrix3::from_columns(&[
            Vector3::from(self.b[0]),
            Vector3::from(self.b[1]),
            Vector3::new(0.0, 0.0, 1.0),
        ]);
        let inv = src
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("collision images are collinear".into()))?;
        let a = dst * inv;
        Ok(std::array::from_fn(|r| std::array::from_fn(|c| a[(r, c)])))
    }

    /// Mass-weighted Jacobi vectors as complex numbers (re, im).
    fn jacobi(&self, pos: &[[f64; 2]; 3]) -> ([f64; 2], [f64; 2]) {
        let [m1, m2, _] = self.m;
        let (mu12, mu3) = self.jacobi_mu();
        let s12 = m1 + m2;
        let c12 = [
            (m1 * pos[0][0] + m2 * pos[1][0]) / s12,
            (m1 * pos[0][1] + m2 * pos[1][1]) / s12,
        ];
        let r12 = mu12.sqrt();
        let r3 = mu3.sqrt();
        (
            [r12 * (pos[1][0] - pos[0][0]), r12 * (pos[1][1] - pos[0][1])],
            [r3 * (pos[2][0] - c12[0]), r3 * (pos[2][1] - c12[1])],
        )
    }

    /// Inverse of `jacobi` for centered configurations.
    fn positions_from_jacobi(&self, z1: [f64; 2], z2: [f64; 2]) -> [[f64; 2]; 3] {
        let [m1, m2, m3] = self.m;
        let (mu12, mu3) = self.jacobi_mu();
        let s12 = m1 + m2;
        let e = z1.map(|x| x / mu12.sqrt());
        let d = z2.map(|x| x / mu3.sqrt());
        let c12 = d.map(|x| -m3 * x);
        [
            [c12[0] - m2 / s12 * e[0], c12[1] - m2 / s12 * e[1]],
            [c12[0] + m1 / s12 * e[0], c12[1] + m1 / s12 * e[1]],
            [(1.0 - m3) * d[0], (1.0 - m3) * d[1]],
        ]
    }

    fn apply_align(&self, q: &[f64; 3]) -> [f64; 3] {
        let a = &self.align;
        std::array::from_fn(|r| a[r][0] * q[0] + a[r][1] * q[1] + a[r][2] * q[2])
    }

    fn apply_align_t(&self, p: &[f64; 3]) -> [f64; 3] {
        let a = &self.align;
        std::array::from_fn(|c| a[0][c] * p[0] + a[1][c] * p[1] + a[2][c] * p[2])
    }
}

/// Hyper-radius squared and shape point of a configuration for any scalar;
/// used to push Taylor jets of a motion onto the sphere.
pub fn project_generic<S: Scalar>(pos: &[[S; 2]; 3], md: &MassDistribution) -> (S, V3<S>) {
    let [m1, m2, _] = md.m;
    let (mu12, mu3) = md.jacobi_mu();
    let s12 = m1 + m2;
    let (r12, r3) = (mu12.sqrt(), mu3.sqrt());
    let c12: [S; 2] = std::array::from_fn(|d| (pos[0][d] * m1 + pos[1][d] * m2) / s12);
    let z1: [S; 2] = std::array::from_fn(|d| (pos[1][d] - pos[0][d]) * r12);
    let z2: [S; 2] = std::array::from_fn(|d| (pos[2][d] - c12[d]) * r3);
    let n1 = z1[0] * z1[0] + z1[1] * z1[1];
    let n2 = z2[0] * z2[0] + z2[1] * z2[1];
    let i = n1 + n2;
    let q = [
        (n1 - n2) / i,
        (z1[0] * z2[0] + z1[1] * z2[1]) * 2.0 / i,
        (z1[0] * z2[1] - z1[1] * z2[0]) * 2.0 / i,
    ];
    let a = &md.align;
    let p = std::array::from_fn(|r| q[0] * a[r][0] + q[1] * a[r][1] + q[2] * a[r][2]);
    (i, p)
}

fn norm2(z: [f64; 2]) -> f64 {
    z[0] * z[0] + z[1] * z[1]
}

/// (|z1|^2 - |z2|^2, 2 conj(z1) z2) / I
fn hopf(z1: [f64; 2], z2: [f64; 2], i: f64) -> [f64; 3] {
    let w = [z1[0] * z2[0] + z1[1] * z2[1], z1[0] * z2[1] - z1[1] * z2[0]];
    [
        (norm2(z1) - norm2(z2)) / i,
        2.0 * w[0] / i,
        2.0 * w[1] / i,
    ]
}

/// A point of the unit shape sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePoint(pub [f64; 3]);

impl ShapePoint {
    pub const NORTH: ShapePoint = ShapePoint([0.0, 0.0, 1.0]);
    pub const SOUTH: ShapePoint = ShapePoint([0.0, 0.0, -1.0]);

    /// Normalizes `v`; fails on the zero vector.
    pub fn from_vec(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("shape vector must be non-zero".into()));
        }
        Ok(ShapePoint(v.map(|x| x / n)))
    }

    /// Colatitude from the north pole and longitude.
    pub fn from_angles(phi: f64, theta: f64) -> Self {
        ShapePoint([phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()])
    }

    pub fn phi(&self) -> f64 {
        self.0[2].clamp(-1.0, 1.0).acos()
    }

    pub fn theta(&self) -> f64 {
        let t = self.0[1].atan2(self.0[0]);
        if t < 0.0 {
            t + 2.0 * PI
        } else {
            t
        }
    }

    pub fn vec(&self) -> [f64; 3] {
        self.0
    }

    pub fn mirror(&self) -> Self {
        ShapePoint([self.0[0], self.0[1], -self.0[2]])
    }

    pub fn distance(&self, o: &ShapePoint) -> f64 {
        let d = [self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// Hyper-radius plus shape; the shape is absent at triple collision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModuliPoint {
    pub rho: f64,
    pub shape: Option<ShapePoint>,
}

/// Planar positions and velocities of the three bodies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleState {
    pub pos: [[f64; 2]; 3],
    pub vel: [[f64; 2]; 3],
}

impl TriangleState {
    pub fn centered(pos: [[f64; 2]; 3], vel: [[f64; 2]; 3], masses: &MassDistribution) -> Self {
        let m = masses.masses();
        let mut s = TriangleState { pos, vel };
        for d in 0..2 {
            let cp: f64 = (0..3).map(|i| m[i] * pos[i][d]).sum();
            let cv: f64 = (0..3).map(|i| m[i] * vel[i][d]).sum();
            for i in 0..3 {
                s.pos[i][d] -= cp;
                s.vel[i][d] -= cv;
            }
        }
        s
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(12);
        for a in &self.pos {
            v.extend_from_slice(a);
        }
        for a in &self.vel {
            v.extend_from_slice(a);
        }
        v
    }

    pub fn from_slice(y: &[f64]) -> Self {
        TriangleState {
            pos: std::array::from_fn(|i| [y[2 * i], y[2 * i + 1]]),
            vel: std::array::from_fn(|i| [y[6 + 2 * i], y[6 + 2 * i + 1]]),
        }
    }

    /// Moment of inertia about the origin.
    pub fn inertia(&self, masses: &MassDistribution) -> f64 {
        let m = masses.masses();
        (0..3).map(|i| m[i] * (self.pos[i][0].powi(2) + self.pos[i][1].powi(2))).sum()
    }

    pub fn angular_momentum(&self, masses: &MassDistribution) -> f64 {
        let m = masses.masses();
        (0..3)
            .map(|i| m[i] * (self.pos[i][0] * self.vel[i][1] - self.pos[i][1] * self.vel[i][0]))
            .sum()
    }

    pub fn com_error(&self, masses: &MassDistribution) -> f64 {
        let m = masses.masses();
        let mut e: f64 = 0.0;
        for d in 0..2 {
            e = e.max((0..3).map(|i| m[i] * self.pos[i][d]).sum::<f64>().abs());
            e = e.max((0..3).map(|i| m[i] * self.vel[i][d]).sum::<f64>().abs());
        }
        e
    }

    pub fn distances(&self) -> [f64; 3] {
        let d = |i: usize, j: usize| {
            ((self.pos[i][0] - self.pos[j][0]).powi(2) + (self.pos[i][1] - self.pos[j][1]).powi(2))
                .sqrt()
        };
        [d(0, 1), d(1, 2), d(2, 0)]
    }

    /// Signed shoelace area; positive for counterclockwise order 1, 2, 3.
    pub fn signed_area(&self) -> f64 {
        let [a, b, c] = self.pos;
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }
}

pub fn normalize_masses(m1: f64, m2: f64, m3: f64) -> Result<MassDistribution> {
    MassDistribution::new(m1, m2, m3)
}

/// Projection of a triangle to (rho, shape). Only relative positions enter.
pub fn project_to_shape(state: &TriangleState, masses: &MassDistribution) -> ModuliPoint {
    let (z1, z2) = masses.jacobi(&state.pos);
    let i = norm2(z1) + norm2(z2);
    if i <= f64::MIN_POSITIVE {
        return ModuliPoint { rho: 0.0, shape: None };
    }
    let p = masses.apply_align(&hopf(z1, z2, i));
    ModuliPoint {
        rho: i.sqrt(),
        shape: Some(ShapePoint::from_vec(p).expect("non-zero image")),
    }
}

/// Shape velocity data of a moving triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeMotion {
    pub rho: f64,
    pub rho_dot: f64,
    pub p: [f64; 3],
    pub p_dot: [f64; 3],
}

pub fn project_motion(state: &TriangleState, masses: &MassDistribution) -> Result<ShapeMotion> {
    let (z1, z2) = masses.jacobi(&state.pos);
    let (w1, w2) = masses.jacobi(&state.vel);
    let i = norm2(z1) + norm2(z2);
    if i <= f64::MIN_POSITIVE {
        return Err(Error::Degenerate("triple collision has no shape".into()));
    }
    let q = hopf(z1, z2, i);
    let idot = 2.0 * (z1[0] * w1[0] + z1[1] * w1[1] + z2[0] * w2[0] + z2[1] * w2[1]);
    // d/dt of (|z1|^2 - |z2|^2, 2 conj(z1) z2)
    let dh = [
        2.0 * (z1[0] * w1[0] + z1[1] * w1[1] - z2[0] * w2[0] - z2[1] * w2[1]),
        2.0 * (w1[0] * z2[0] + w1[1] * z2[1] + z1[0] * w2[0] + z1[1] * w2[1]),
        2.0 * (w1[0] * z2[1] - w1[1] * z2[0] + z1[0] * w2[1] - z1[1] * w2[0]),
    ];
    let qdot: [f64; 3] = std::array::from_fn(|c| (dh[c] - idot * q[c]) / i);
    let rho = i.sqrt();
    Ok(ShapeMotion {
        rho,
        rho_dot: idot / (2.0 * rho),
        p: masses.apply_align(&q),
        p_dot: masses.apply_align(&qdot),
    })
}

/// Zero-angular-momentum triangle with the given moduli position and velocity.
/// `p_dot` must be tangent to the sphere at `p`.
pub fn lift_motion(m: &ShapeMotion, masses: &MassDistribution) -> Result<TriangleState> {
    if !(m.rho > 0.0) {
        return Err(Error::Degenerate("cannot lift the triple collision".into()));
    }
    let i = m.rho * m.rho;
    let q = masses.apply_align_t(&m.p);
    let qdot = masses.apply_align_t(&m.p_dot);
    let a1 = i * (1.0 + q[0]) / 2.0;
    let a2 = i * (1.0 - q[0]) / 2.0;
    // conj(z1) z2 = w
    let w = [i * q[1] / 2.0, i * q[2] / 2.0];
    let (z1, z2) = if a1 >= a2 {
        let r = a1.max(0.0).sqrt();
        ([r, 0.0], [w[0] / r, w[1] / r])
    } else {
        let r = a2.max(0.0).sqrt();
        ([w[0] / r, -w[1] / r], [r, 0.0])
    };
    let idot = 2.0 * m.rho * m.rho_dot;
    // unknowns (re w1, im w1, re w2, im w2)
    let mut a = Matrix5x4::zeros();
    let mut rhs = Vector5::zeros();
    a.set_row(0, &nalgebra::RowVector4::new(z1[0], z1[1], z2[0], z2[1]));
    rhs[0] = idot / 2.0;
    a.set_row(1, &nalgebra::RowVector4::new(-z1[1], z1[0], -z2[1], z2[0]));
    rhs[1] = 0.0;
    a.set_row(2, &nalgebra::RowVector4::new(2.0 * z1[0], 2.0 * z1[1], -2.0 * z2[0], -2.0 * z2[1]));
    a.set_row(3, &nalgebra::RowVector4::new(2.0 * z2[0], 2.0 * z2[1], 2.0 * z1[0], 2.0 * z1[1]));
    a.set_row(4, &nalgebra::RowVector4::new(2.0 * z2[1], -2.0 * z2[0], -2.0 * z1[1], 2.0 * z1[0]));
    for c in 0..3 {
        rhs[2 + c] = idot * q[c] + i * qdot[c];
    }
    let svd = a.svd(true, true);
    let x = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Degenerate(format!("velocity lift: {e}")))?;
    let pos = masses.positions_from_jacobi(z1, z2);
    let vel = masses.positions_from_jacobi([x[0], x[1]], [x[2], x[3]]);
    Ok(TriangleState { pos, vel })
}

/// Configuration with the given moduli point (at rest).
pub fn lift_point(rho: f64, p: &ShapePoint, masses: &MassDistribution) -> Result<TriangleState> {
    lift_motion(
        &ShapeMotion {
            rho,
            rho_dot: 0.0,
            p: p.0,
            p_dot: [0.0; 3],
        },
        masses,
    )
}

/// (r12, r23, r31) of the triangle at `p` with hyper-radius `rho`.
pub fn mutual_distances(p: &ShapePoint, rho: f64, masses: &MassDistribution) -> [f64; 3] {
    let m = masses.masses();
    let b = masses.b();
    // r_ij is governed by b_k
    let r = |i: usize, j: usize, k: usize| {
        let d = dist(&p.0, &b[k]);
        rho * 0.5 * ((1.0 - m[k]) / (m[i] * m[j])).sqrt() * d
    };
    [r(0, 1, 2), r(1, 2, 0), r(2, 0, 1)]
}

pub fn triangle_area(p: &ShapePoint, rho: f64, masses: &MassDistribution) -> f64 {
    rho * rho * p.0[2].abs() / (4.0 * masses.mbar().sqrt())
}

pub(crate) fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// A rotated spherical coordinate chart: `world = rot * local`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub rot: Matrix3<f64>,
}

impl Default for Chart {
    fn default() -> Self {
        Chart { rot: Matrix3::identity() }
    }
}

impl Chart {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Chart in which `p` sits at local (phi, theta) = (pi/2, 0).
    pub fn centered_on(p: &[f64; 3]) -> Self {
        let e0 = Vector3::from(*p).normalize();
        let seed = if e0.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
        let e1 = seed.cross(&e0).normalize();
        let e2 = e0.cross(&e1);
        // columns: local x -> p, local y -> e1, local z -> e2
        Chart { rot: Matrix3::from_columns(&[e0, e1, e2]) }
    }

    pub fn is_identity(&self) -> bool {
        self.rot == Matrix3::identity()
    }

    pub fn to_local(&self, w: &[f64; 3]) -> [f64; 3] {
        let v = self.rot.transpose() * Vector3::from(*w);
        [v.x, v.y, v.z]
    }

    pub fn to_world<S: Scalar>(&self, l: &V3<S>) -> V3<S> {
        let r = &self.rot;
        std::array::from_fn(|i| l[0] * r[(i, 0)] + l[1] * r[(i, 1)] + l[2] * r[(i, 2)])
    }

    pub fn point<S: Scalar>(&self, phi: S, theta: S) -> V3<S> {
        let (sp, cp) = (phi.sin(), phi.cos());
        let l = [sp * theta.cos(), sp * theta.sin(), cp];
        self.to_world(&l)
    }

    /// Local (phi, theta) with theta in (-pi, pi].
    pub fn angles(&self, w: &[f64; 3]) -> (f64, f64) {
        let l = self.to_local(w);
        (l[2].clamp(-1.0, 1.0).acos(), l[1].atan2(l[0]))
    }

    /// Local angle rates of a tangent velocity.
    pub fn rates(&self, w: &[f64; 3], wdot: &[f64; 3]) -> (f64, f64) {
        let (phi, theta) = self.angles(w);
        let v = self.to_local(wdot);
        let ephi = [phi.cos() * theta.cos(), phi.cos() * theta.sin(), -phi.sin()];
        let etheta = [-theta.sin(), theta.cos(), 0.0];
        let pd = v[0] * ephi[0] + v[1] * ephi[1] + v[2] * ephi[2];
        let td = (v[0] * etheta[0] + v[1] * etheta[1]) / phi.sin();
        (pd, td)
    }

    /// World tangent vectors d p / d phi and d p / d theta.
    pub fn basis(&self, phi: f64, theta: f64) -> ([f64; 3], [f64; 3]) {
        let dphi = [phi.cos() * theta.cos(), phi.cos() * theta.sin(), -phi.sin()];
        let dtheta = [-phi.sin() * theta.sin(), phi.sin() * theta.cos(), 0.0];
        (self.to_world(&dphi), self.to_world(&dtheta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn equilateral(scale: f64, masses: &MassDistribution) -> TriangleState {
        let s = 3f64.sqrt() / 2.0;
        let pos = [[1.0, 0.0], [-0.5, s], [-0.5, -s]].map(|a| a.map(|x| x * scale));
        TriangleState::centered(pos, [[0.0; 2]; 3], masses)
    }

    #[test]
    fn equal_mass_constants() {
        let md = MassDistribution::equal();
        for i in 0..3 {
            assert_relative_eq!(md.masses()[i], 1.0 / 3.0, epsilon = 1e-15);
            assert_relative_eq!(md.beta()[i].cos(), -0.5, epsilon = 1e-14);
            assert_relative_eq!(md.k()[i], 6f64.sqrt() / 27.0, epsilon = 1e-15);
        }
        let b2 = md.b()[1];
        assert_relative_eq!(b2[0], -0.5, epsilon = 1e-14);
        assert_relative_eq!(b2[1], 3f64.sqrt() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_non_positive_mass() {
        assert!(MassDistribution::new(1.0, 0.0, 1.0).is_err());
        assert!(MassDistribution::new(1.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn betas_partition_equator() {
        let md = MassDistribution::new(0.5, 0.3, 0.2).unwrap();
        assert_relative_eq!(md.beta().iter().sum::<f64>(), 2.0 * PI, epsilon = 1e-13);
        let b = md.b();
        for i in 0..3 {
            let (j, k) = others(i);
            let c = b[j][0] * b[k][0] + b[j][1] * b[k][1];
            assert_relative_eq!(c.acos(), md.beta()[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn alignment_is_orthogonal() {
        let md = MassDistribution::new(0.5, 0.3, 0.2).unwrap();
        let a = Matrix3::from_fn(|r, c| md.align[r][c]);
        let e = (a.transpose() * a - Matrix3::identity()).abs().max();
        assert!(e < 1e-13, "{e}");
    }

    #[test]
    fn equilateral_goes_to_north_pole() {
        let md = MassDistribution::equal();
        let tri = equilateral(1.0, &md);
        let scale = tri.inertia(&md).sqrt();
        let tri = equilateral(1.0 / scale, &md);
        let mp = project_to_shape(&tri, &md);
        assert_relative_eq!(mp.rho, 1.0, epsilon = 1e-14);
        let p = mp.shape.unwrap().0;
        assert!(p[0].abs() < 1e-14 && p[1].abs() < 1e-14);
        assert_relative_eq!(p[2], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn binary_collisions_go_to_b() {
        let md = MassDistribution::new(0.5, 0.3, 0.2).unwrap();
        let [m1, m2, m3] = md.masses();
        let cfgs = [
            [[m2 + m3, 0.0], [-m1, 0.0], [-m1, 0.0]],
            [[-m2, 0.0], [m1 + m3, 0.0], [-m2, 0.0]],
            [[-m3, 0.3], [-m3, 0.3], [m1 + m2, -0.1]],
        ];
        for (i, pos) in cfgs.iter().enumerate() {
            let tri = TriangleState::centered(*pos, [[0.0; 2]; 3], &md);
            let p = project_to_shape(&tri, &md).shape.unwrap();
            assert!(dist(&p.0, &md.b()[i]) < 1e-12, "b{} {:?}", i + 1, p);
        }
    }

    #[test]
    fn triple_collision_has_no_shape() {
        let md = MassDistribution::equal();
        let tri = TriangleState { pos: [[0.0; 2]; 3], vel: [[0.0; 2]; 3] };
        let mp = project_to_shape(&tri, &md);
        assert_eq!(mp.rho, 0.0);
        assert!(mp.shape.is_none());
    }

    #[test]
    fn equal_mass_north_distances_and_area() {
        let md = MassDistribution::equal();
        let r = mutual_distances(&ShapePoint::NORTH, 1.0, &md);
        for x in r {
            assert_relative_eq!(x, 3f64.sqrt(), epsilon = 1e-14);
        }
        assert_relative_eq!(triangle_area(&ShapePoint::NORTH, 1.0, &md), 3.0 * 3f64.sqrt() / 4.0, epsilon = 1e-14);
        let b3 = ShapePoint(md.b()[2]);
        assert!(mutual_distances(&b3, 2.0, &md)[0].abs() < 1e-15);
    }

    #[test]
    fn lift_then_project() {
        let md = MassDistribution::new(0.2, 0.45, 0.35).unwrap();
        let p = ShapePoint::from_angles(1.1, 4.0);
        let (e1, e2) = Chart::identity().basis(1.1, 4.0);
        let pd: [f64; 3] = std::array::from_fn(|i| 0.3 * e1[i] - 0.7 * e2[i]);
        let m = ShapeMotion { rho: 1.7, rho_dot: -0.4, p: p.0, p_dot: pd };
        let tri = lift_motion(&m, &md).unwrap();
        assert!(tri.com_error(&md) < 1e-14);
        assert!(tri.angular_momentum(&md).abs() < 1e-13);
        let back = project_motion(&tri, &md).unwrap();
        assert_relative_eq!(back.rho, 1.7, epsilon = 1e-13);
        assert_relative_eq!(back.rho_dot, -0.4, epsilon = 1e-13);
        for i in 0..3 {
            assert!((back.p[i] - p.0[i]).abs() < 1e-13);
            assert!((back.p_dot[i] - pd[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn chart_round_trip() {
        let p = ShapePoint::from_angles(0.01, 2.0).0;
        let ch = Chart::centered_on(&p);
        let (phi, theta) = ch.angles(&p);
        assert_relative_eq!(phi, PI / 2.0, epsilon = 1e-14);
        assert!(theta.abs() < 1e-14);
        let w: [f64; 3] = ch.point(0.7, -1.2);
        let (a, b) = ch.angles(&w);
        assert_relative_eq!(a, 0.7, epsilon = 1e-14);
        assert_relative_eq!(b, -1.2, epsilon = 1e-14);
        assert_relative_eq!(ch.rot.determinant(), 1.0, epsilon = 1e-14);
    }
}
