//! Exact formulas for `G_alpha`: the group law on R³, the left-invariant
//! metric data (connection and curvature tables), the structure field on the
//! unit tangent sphere, and the conserved level function `|u1|^alpha u2`.
//!
//! Tangent vectors are written in the left-invariant orthonormal frame
//! `X = e^z ∂x`, `Y = e^{-alpha z} ∂y`, `Z = ∂z`.

use serde::Serialize;

use crate::error::{domain, Result};

pub type Vec3 = [f64; 3];

/// The family parameter, `-1 <= alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Alpha(f64);

impl Alpha {
    pub const SOL: Alpha = Alpha(1.0);
    pub const HALF: Alpha = Alpha(0.5);

    pub fn new(alpha: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&alpha) {
            Ok(Alpha(alpha))
        } else {
            Err(domain("alpha", alpha, "[-1, 1]"))
        }
    }

    /// Like [`Alpha::new`] but restricted to the positive half `(0, 1]`, where
    /// loop level sets exist.
    pub fn positive(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Alpha(alpha))
        } else {
            Err(domain("alpha", alpha, "(0, 1]"))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn require_positive(self) -> Result<Self> {
        Alpha::positive(self.0)
    }

    /// Abscissa `sqrt(alpha / (1 + alpha))` of the equatorial equilibrium in
    /// the positive sector.
    pub fn equilibrium_x(self) -> f64 {
        (self.0 / (1.0 + self.0)).sqrt()
    }

    pub fn is_half(self) -> bool {
        self.0 == 0.5
    }
}

/// A point of `G_alpha`, whose underlying set is R³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GroupPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl GroupPoint {
    pub const IDENTITY: GroupPoint = GroupPoint { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        GroupPoint { x, y, z }
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn mul(self, q: GroupPoint, alpha: Alpha) -> GroupPoint {
        group_mul(self, q, alpha)
    }

    pub fn inv(self, alpha: Alpha) -> GroupPoint {
        group_inv(self, alpha)
    }

    pub fn distance(self, other: GroupPoint) -> f64 {
        let d = [self.x - other.x, self.y - other.y, self.z - other.z];
        norm(&d)
    }
}

impl From<Vec3> for GroupPoint {
    fn from(v: Vec3) -> Self {
        GroupPoint::new(v[0], v[1], v[2])
    }
}

/// `(x,y,z) * (x',y',z') = (x' e^z + x, y' e^{-alpha z} + y, z' + z)`.
pub fn group_mul(p: GroupPoint, q: GroupPoint, alpha: Alpha) -> GroupPoint {
    let a = alpha.get();
    GroupPoint { x: q.x * p.z.exp() + p.x, y: q.y * (-a * p.z).exp() + p.y, z: q.z + p.z }
}

pub fn group_inv(p: GroupPoint, alpha: Alpha) -> GroupPoint {
    let a = alpha.get();
    GroupPoint { x: -p.x * (-p.z).exp(), y: -p.y * (a * p.z).exp(), z: -p.z }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// How far from unit length an input direction may be before it is rejected
/// instead of normalised.
pub const NORMALIZE_SLACK: f64 = 1e-6;

/// A unit tangent vector `(u1, u2, u3)` in the frame `{X, Y, Z}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereState {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl SphereState {
    pub const NORTH: SphereState = SphereState { u1: 0.0, u2: 0.0, u3: 1.0 };
    pub const SOUTH: SphereState = SphereState { u1: 0.0, u2: 0.0, u3: -1.0 };

    /// Normalises `(u1, u2, u3)` provided its norm is within
    /// [`NORMALIZE_SLACK`] of one.
    pub fn new(u1: f64, u2: f64, u3: f64) -> Result<Self> {
        let n = norm(&[u1, u2, u3]);
        if !(1.0 - NORMALIZE_SLACK..=1.0 + NORMALIZE_SLACK).contains(&n) {
            return Err(domain("|u|", n, "[1 - 1e-6, 1 + 1e-6]"));
        }
        Ok(SphereState { u1: u1 / n, u2: u2 / n, u3: u3 / n })
    }

    /// Direction of an arbitrary nonzero vector.
    pub fn from_direction(v: Vec3) -> Result<Self> {
        let n = norm(&v);
        if !(n > 0.0 && n.is_finite()) {
            return Err(domain("|v|", n, "(0, inf)"));
        }
        Ok(SphereState { u1: v[0] / n, u2: v[1] / n, u3: v[2] / n })
    }

    /// Wraps integrator output without renormalising; the drift off the
    /// sphere is kept visible.
    pub(crate) fn raw(u: Vec3) -> Self {
        SphereState { u1: u[0], u2: u[1], u3: u[2] }
    }

    pub fn to_array(self) -> Vec3 {
        [self.u1, self.u2, self.u3]
    }

    pub fn norm(self) -> f64 {
        norm(&self.to_array())
    }
}

/// The structure field `Sigma_alpha(u) = (u1 u3, -alpha u2 u3, alpha u2² - u1²)`,
/// whose integral curves are the developments of unit-speed geodesics.
pub fn structure_field(s: &SphereState, alpha: Alpha) -> Vec3 {
    structure_field_raw(&s.to_array(), alpha.get())
}

#[inline]
pub(crate) fn structure_field_raw(u: &Vec3, a: f64) -> Vec3 {
    [u[0] * u[2], -a * u[1] * u[2], a * u[1] * u[1] - u[0] * u[0]]
}

/// `H(u) = |u1|^alpha u2`, constant along the structure field. `|0|^alpha`
/// is taken to be zero.
pub fn level_value(s: &SphereState, alpha: Alpha) -> Result<f64> {
    let a = alpha.require_positive()?.get();
    Ok(level_raw(s.u1, s.u2, a))
}

#[inline]
pub(crate) fn level_raw(u1: f64, u2: f64, a: f64) -> f64 {
    if u1 == 0.0 {
        0.0
    } else {
        u1.abs().powf(a) * u2
    }
}

/// Equilibria of the structure field. For `alpha > 0` these are the poles and
/// the four points `(±sqrt(alpha/(1+alpha)), ±sqrt(1/(1+alpha)), 0)`; for
/// `alpha = 0` the whole circle `u1 = 0` is singular and only the poles and
/// `(0, ±1, 0)` are returned.
pub fn equilibria(alpha: Alpha) -> Vec<SphereState> {
    let a = alpha.get();
    let mut out = vec![SphereState::NORTH, SphereState::SOUTH];
    if a > 0.0 {
        let ex = (a / (1.0 + a)).sqrt();
        let ey = (1.0 / (1.0 + a)).sqrt();
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                out.push(SphereState { u1: sx * ex, u2: sy * ey, u3: 0.0 });
            }
        }
    } else if a == 0.0 {
        out.push(SphereState { u1: 0.0, u2: 1.0, u3: 0.0 });
        out.push(SphereState { u1: 0.0, u2: -1.0, u3: 0.0 });
    }
    out
}

/// Coefficients of `∇_{E_i} E_j` in the frame `E = (X, Y, Z)`.
///
/// ```text
/// ∇_X X = Z    ∇_X Y = 0       ∇_X Z = -X
/// ∇_Y X = 0    ∇_Y Y = -a Z    ∇_Y Z = a Y
/// ∇_Z X = 0    ∇_Z Y = 0       ∇_Z Z = 0
/// ```
pub fn levi_civita(alpha: Alpha) -> [[Vec3; 3]; 3] {
    let a = alpha.get();
    let zero = [0.0; 3];
    [[[0.0, 0.0, 1.0], zero, [-1.0, 0.0, 0.0]], [zero, [0.0, 0.0, -a], [0.0, a, 0.0]], [zero, zero, zero]]
}

/// `∇_V W` for constant (left-invariant) fields `V`, `W`.
pub fn covariant_derivative(v: &Vec3, w: &Vec3, alpha: Alpha) -> Vec3 {
    let table = levi_civita(alpha);
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            let c = v[i] * w[j];
            if c != 0.0 {
                for (k, o) in out.iter_mut().enumerate() {
                    *o += c * table[i][j][k];
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Plane {
    XY,
    XZ,
    YZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureRow {
    pub plane: Plane,
    pub sectional: f64,
    pub intrinsic: f64,
    pub extrinsic: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureTable {
    pub rows: [CurvatureRow; 3],
}

impl CurvatureTable {
    pub fn row(&self, plane: Plane) -> &CurvatureRow {
        self.rows.iter().find(|r| r.plane == plane).expect("all planes present")
    }
}

/// Curvatures of the coordinate planes.
pub fn curvature_table(alpha: Alpha) -> CurvatureTable {
    let a = alpha.get();
    CurvatureTable {
        rows: [
            CurvatureRow { plane: Plane::XY, sectional: a, intrinsic: 0.0, extrinsic: -a, mean: (1.0 - a) / 2.0 },
            CurvatureRow { plane: Plane::XZ, sectional: -1.0, intrinsic: -1.0, extrinsic: 0.0, mean: 0.0 },
            CurvatureRow { plane: Plane::YZ, sectional: -a * a, intrinsic: -a * a, extrinsic: 0.0, mean: 0.0 },
        ],
    }
}

/// Scalar curvature `2 alpha - 2 - 2 alpha²`.
pub fn scalar_curvature(alpha: Alpha) -> f64 {
    let a = alpha.get();
    2.0 * a - 2.0 - 2.0 * a * a
}

/// Sectional curvature of the plane spanned by orthonormal frame vectors
/// `E_i`, `E_j`, computed from the connection table for constant fields:
/// `R(U,V)V = ∇_U ∇_V V - ∇_V ∇_U V - ∇_[U,V] V`.
pub fn sectional_from_connection(i: usize, j: usize, alpha: Alpha) -> f64 {
    let mut e = [[0.0; 3]; 3];
    for (k, row) in e.iter_mut().enumerate() {
        row[k] = 1.0;
    }
    let (u, v) = (e[i], e[j]);
    let nab = |p: &Vec3, q: &Vec3| covariant_derivative(p, q, alpha);
    let bracket = {
        let a = nab(&u, &v);
        let b = nab(&v, &u);
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    };
    // ∇_U(∇_V V) with ∇_V V itself constant in the frame.
    let t1 = nab(&u, &nab(&v, &v));
    let t2 = nab(&v, &nab(&u, &v));
    let t3 = nab(&bracket, &v);
    let r = [t1[0] - t2[0] - t3[0], t1[1] - t2[1] - t3[1], t1[2] - t2[2] - t3[2]];
    dot(&r, &u)
}
