//! Geodesic spheres: the image of a latitude-longitude grid of directions
//! under the exponential map at a fixed radius, and Wavefront OBJ export.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;

use crate::algebra::{Alpha, GroupPoint, SphereState};
use crate::error::{domain, Result};
use crate::flow;
use crate::format::fmt_sig;
use crate::ode::IntegratorConfig;
use crate::sweep;

pub const DEFAULT_RESOLUTION: (usize, usize) = (128, 256);
pub const DEFAULT_RADIUS: f64 = 5.0;
/// Significant digits of OBJ coordinates.
pub const OBJ_DIGITS: usize = 9;

/// Directions at the north pole, `n_theta` rings at polar angles
/// `pi i / (n_theta + 1)` with `n_phi` longitudes `2 pi j / n_phi` each,
/// and the south pole, in that order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub directions: Vec<SphereState>,
}

impl DirectionGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 {
            return Err(domain("n_theta", n_theta as f64, "[1, inf)"));
        }
        if n_phi < 4 || n_phi % 4 != 0 {
            return Err(domain("n_phi", n_phi as f64, "multiples of 4"));
        }
        let mut directions = Vec::with_capacity(n_theta * n_phi + 2);
        directions.push(SphereState::NORTH);
        for i in 1..=n_theta {
            let (st, ct) = (PI * i as f64 / (n_theta as f64 + 1.0)).sin_cos();
            for j in 0..n_phi {
                let (sp, cp) = longitude(j, n_phi);
                directions.push(SphereState { u1: st * cp, u2: st * sp, u3: ct });
            }
        }
        directions.push(SphereState::SOUTH);
        Ok(DirectionGrid { n_theta, n_phi, directions })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn north(&self) -> usize {
        0
    }

    pub fn south(&self) -> usize {
        self.len() - 1
    }

    /// Index of ring `i` (1-based), longitude `j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        1 + (i - 1) * self.n_phi + j % self.n_phi
    }

    /// Index permutation induced by `u1 -> -u1` (longitude `phi -> pi - phi`).
    pub fn mirror_x(&self, idx: usize) -> usize {
        self.mirror(idx, |j, n| (n / 2 + n - j) % n)
    }

    /// Index permutation induced by `u2 -> -u2` (longitude `phi -> -phi`).
    pub fn mirror_y(&self, idx: usize) -> usize {
        self.mirror(idx, |j, n| (n - j) % n)
    }

    fn mirror(&self, idx: usize, f: impl Fn(usize, usize) -> usize) -> usize {
        if idx == self.north() || idx == self.south() {
            return idx;
        }
        let i = 1 + (idx - 1) / self.n_phi;
        let j = (idx - 1) % self.n_phi;
        self.index(i, f(j, self.n_phi))
    }

    /// Quads between neighbouring rings and triangle fans at the poles, all
    /// oriented outward.
    pub fn faces(&self) -> Vec<Face> {
        let (nt, np) = (self.n_theta, self.n_phi);
        let mut faces = Vec::with_capacity((nt + 1) * np);
        for j in 0..np {
            faces.push(Face::Tri([self.north(), self.index(1, j), self.index(1, j + 1)]));
        }
        for i in 1..nt {
            for j in 0..np {
                faces.push(Face::Quad([
                    self.index(i, j),
                    self.index(i + 1, j),
                    self.index(i + 1, j + 1),
                    self.index(i, j + 1),
                ]));
            }
        }
        for j in 0..np {
            faces.push(Face::Tri([self.south(), self.index(nt, j + 1), self.index(nt, j)]));
        }
        faces
    }
}

/// `(sin, cos)` of `2 pi j / n`, reduced to the first octant so that
/// mirrored longitudes give mirrored values exactly.
fn longitude(j: usize, n: usize) -> (f64, f64) {
    let q = n / 4;
    let (quadrant, r) = (j / q, j % q);
    let (s, c) = if 2 * r == q {
        (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
    } else if 2 * r < q {
        (PI * 0.5 * r as f64 / q as f64).sin_cos()
    } else {
        let (c, s) = (PI * 0.5 * (q - r) as f64 / q as f64).sin_cos();
        (s, c)
    };
    match quadrant {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Face {
    Tri([usize; 3]),
    Quad([usize; 4]),
}

impl Face {
    pub fn indices(&self) -> &[usize] {
        match self {
            Face::Tri(f) => f,
            Face::Quad(f) => f,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereMesh {
    pub alpha: f64,
    pub radius: f64,
    pub vertices: Vec<GroupPoint>,
    pub faces: Vec<Face>,
    /// Grid indices whose geodesic could not be integrated. Their vertices
    /// are placed at the identity and every face touching them is dropped.
    pub failed: Vec<usize>,
}

impl SphereMesh {
    pub fn is_complete(&self) -> bool {
        self.failed.is_empty()
    }

    /// Componentwise minimum and maximum over the vertices.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for (k, c) in v.to_array().into_iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        (lo, hi)
    }
}

/// Vertex `i` is `exp(radius d_i)`; geodesics are integrated in parallel.
pub fn geodesic_sphere(alpha: Alpha, radius: f64, grid: &DirectionGrid, cfg: &IntegratorConfig) -> Result<SphereMesh> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(domain("radius", radius, "(0, inf)"));
    }
    cfg.validate()?;
    let ends =
        sweep::map(&grid.directions, |d| flow::exp_map([radius * d.u1, radius * d.u2, radius * d.u3], alpha, cfg));
    let mut failed = Vec::new();
    let vertices: Vec<GroupPoint> = ends
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.unwrap_or_else(|_| {
                failed.push(i);
                GroupPoint::IDENTITY
            })
        })
        .collect();
    let faces =
        grid.faces().into_iter().filter(|f| f.indices().iter().all(|i| failed.binary_search(i).is_err())).collect();
    Ok(SphereMesh { alpha: alpha.get(), radius, vertices, faces, failed })
}

/// Largest deviation from the reflection symmetries `x -> -x` and
/// `y -> -y` of the vertex set, matched through the grid indices.
pub fn reflection_residual(mesh: &SphereMesh, grid: &DirectionGrid) -> (f64, f64) {
    let mut rx = 0.0f64;
    let mut ry = 0.0f64;
    for (i, p) in mesh.vertices.iter().enumerate() {
        let qx = mesh.vertices[grid.mirror_x(i)];
        let qy = mesh.vertices[grid.mirror_y(i)];
        rx = rx.max(qx.distance(GroupPoint::new(-p.x, p.y, p.z)));
        ry = ry.max(qy.distance(GroupPoint::new(p.x, -p.y, p.z)));
    }
    (rx, ry)
}

/// Writes the mesh as Wavefront OBJ: a comment header, `v` lines with
/// [`OBJ_DIGITS`] significant digits, then 1-based `f` lines.
pub fn export_obj<W: Write>(mesh: &SphereMesh, mut out: W) -> io::Result<()> {
    writeln!(out, "# solvegeo geodesic sphere")?;
    writeln!(out, "# alpha {} radius {}", fmt_sig(mesh.alpha, 12), fmt_sig(mesh.radius, 12))?;
    writeln!(out, "# vertices {} faces {} failed {}", mesh.vertices.len(), mesh.faces.len(), mesh.failed.len())?;
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", fmt_sig(v.x, OBJ_DIGITS), fmt_sig(v.y, OBJ_DIGITS), fmt_sig(v.z, OBJ_DIGITS))?;
    }
    for f in &mesh.faces {
        let idx: Vec<String> = f.indices().iter().map(|i| (i + 1).to_string()).collect();
        writeln!(out, "f {}", idx.join(" "))?;
    }
    Ok(())
}

pub fn obj_string(mesh: &SphereMesh) -> String {
    let mut buf = Vec::new();
    export_obj(mesh, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

/// Vertex coordinates and 0-based face index lists.
pub type ObjData = (Vec<[f64; 3]>, Vec<Vec<usize>>);

/// Vertices and 0-based faces of an OBJ document with `v` and `f` records;
/// other records are ignored.
pub fn parse_obj(text: &str) -> std::result::Result<ObjData, String> {
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .map(|s| s.parse::<f64>().map_err(|e| format!("line {}: {e}", n + 1)))
                    .collect::<std::result::Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(format!("line {}: expected 3 coordinates", n + 1));
                }
                verts.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let f: Vec<usize> = it
                    .map(|s| {
                        let head = s.split('/').next().unwrap_or(s);
                        match head.parse::<usize>() {
                            Ok(i) if i >= 1 => Ok(i - 1),
                            _ => Err(format!("line {}: bad index {s}", n + 1)),
                        }
                    })
                    .collect::<std::result::Result<_, _>>()?;
                faces.push(f);
            }
            _ => {}
        }
    }
    Ok((verts, faces))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn grid_layout() {
        let g = DirectionGrid::new(5, 8).unwrap();
        assert_eq!(g.len(), 5 * 8 + 2);
        assert_eq!(g.directions[0], SphereState::NORTH);
        assert_eq!(*g.directions.last().unwrap(), SphereState::SOUTH);
        for d in &g.directions {
            assert!((d.norm() - 1.0).abs() < 1e-15);
        }
        for (i, a) in g.directions.iter().enumerate() {
            for b in &g.directions[i + 1..] {
                let diff = (a.u1 - b.u1).abs() + (a.u2 - b.u2).abs() + (a.u3 - b.u3).abs();
                assert!(diff > 1e-6, "duplicate direction");
            }
        }
        assert!(DirectionGrid::new(0, 8).is_err());
        assert!(DirectionGrid::new(3, 6).is_err());
    }

    #[test]
    fn mirrors_are_exact_on_directions() {
        let g = DirectionGrid::new(7, 24).unwrap();
        for (i, d) in g.directions.iter().enumerate() {
            let mx = g.directions[g.mirror_x(i)];
            let my = g.directions[g.mirror_y(i)];
            assert_eq!((mx.u1, mx.u2, mx.u3), (-d.u1 + 0.0, d.u2, d.u3), "i={i}");
            assert_eq!((my.u1, my.u2, my.u3), (d.u1, -d.u2 + 0.0, d.u3), "i={i}");
            assert_eq!(g.mirror_x(g.mirror_x(i)), i);
            assert_eq!(g.mirror_y(g.mirror_y(i)), i);
        }
    }

    #[test]
    fn faces_cover_the_grid() {
        let g = DirectionGrid::new(4, 8).unwrap();
        let faces = g.faces();
        assert_eq!(faces.len(), 2 * 8 + 3 * 8);
        let mut uses = vec![0usize; g.len()];
        for f in &faces {
            for &i in f.indices() {
                assert!(i < g.len());
                uses[i] += 1;
            }
        }
        assert_eq!(uses[0], 8);
        assert!(uses[1..g.len() - 1].iter().all(|&u| u == 4));
        // Every edge is shared by exactly two faces: the surface is closed.
        let mut edges = std::collections::HashMap::new();
        for f in &faces {
            let idx = f.indices();
            for k in 0..idx.len() {
                let (a, b) = (idx[k], idx[(k + 1) % idx.len()]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        assert!(edges.values().all(|&c| c == 2));
    }

    #[test]
    fn outward_orientation_on_unit_sphere() {
        let g = DirectionGrid::new(6, 12).unwrap();
        let p: Vec<[f64; 3]> = g.directions.iter().map(|d| d.to_array()).collect();
        for f in g.faces() {
            let i = f.indices();
            let (a, b, c) = (p[i[0]], p[i[1]], p[i[2]]);
            let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            assert!(n[0] * a[0] + n[1] * a[1] + n[2] * a[2] > 0.0);
        }
    }

    #[test]
    fn small_sphere_properties() {
        let g = DirectionGrid::new(9, 16).unwrap();
        for a in [1.0, 0.75, 0.5, 0.0, -0.5, -1.0] {
            let al = Alpha::new(a).unwrap();
            let m = geodesic_sphere(al, 3.0, &g, &cfg()).unwrap();
            assert!(m.is_complete());
            assert_eq!(m.vertices.len(), g.len());
            let (rx, ry) = reflection_residual(&m, &g);
            assert!(rx < 1e-9 && ry < 1e-9, "alpha={a}: {rx} {ry}");
            assert!(m.vertices[0].distance(GroupPoint::new(0.0, 0.0, 3.0)) < 1e-12);
            assert!(m.vertices[g.south()].distance(GroupPoint::new(0.0, 0.0, -3.0)) < 1e-12);
            for (d, v) in g.directions.iter().zip(&m.vertices) {
                if d.u1 > 1e-12 && d.u2 > 1e-12 {
                    assert!(v.x > 0.0 && v.y > 0.0, "sector preserved");
                }
            }
        }
    }

    #[test]
    fn hyperbolic_sphere_is_bounded_in_height() {
        // In H³ the height coordinate z is a Busemann function, so
        // |z| <= distance.
        let g = DirectionGrid::new(8, 16).unwrap();
        let m = geodesic_sphere(Alpha::new(-1.0).unwrap(), 2.5, &g, &cfg()).unwrap();
        for v in &m.vertices {
            assert!(v.z.abs() <= 2.5 + 1e-12);
        }
        // The half-turn (x, y) -> (-x, -y) maps longitude j to j + n/2.
        for i in 1..=g.n_theta {
            for j in 0..g.n_phi {
                let p = m.vertices[g.index(i, j)];
                let q = m.vertices[g.index(i, j + g.n_phi / 2)];
                assert!(q.distance(GroupPoint::new(-p.x, -p.y, p.z)) < 1e-9);
            }
        }
    }

    #[test]
    fn lobes_contract_as_alpha_decreases() {
        let g = DirectionGrid::new(16, 32).unwrap();
        let extent = |a: f64| {
            let m = geodesic_sphere(Alpha::new(a).unwrap(), 5.0, &g, &cfg()).unwrap();
            let (lo, hi) = m.bounds();
            hi[1] - lo[1]
        };
        let (e1, eh, e0) = (extent(1.0), extent(0.5), extent(0.0));
        assert!(e1 > eh && eh > e0, "{e1} {eh} {e0}");
    }

    #[test]
    fn bad_radius_rejected() {
        let g = DirectionGrid::new(2, 4).unwrap();
        assert!(geodesic_sphere(Alpha::HALF, 0.0, &g, &cfg()).is_err());
        assert!(geodesic_sphere(Alpha::HALF, f64::NAN, &g, &cfg()).is_err());
    }

    #[test]
    fn empty_mesh_is_header_only() {
        let m = SphereMesh { alpha: 0.5, radius: 5.0, vertices: vec![], faces: vec![], failed: vec![] };
        let s = obj_string(&m);
        assert!(s.lines().all(|l| l.starts_with('#')));
        assert!(s.ends_with('\n') && !s.contains('\r'));
    }

    #[test]
    fn obj_round_trip() {
        let g = DirectionGrid::new(6, 12).unwrap();
        let m = geodesic_sphere(Alpha::new(0.75).unwrap(), 5.0, &g, &cfg()).unwrap();
        let (verts, faces) = parse_obj(&obj_string(&m)).unwrap();
        assert_eq!(verts.len(), m.vertices.len());
        for (p, q) in verts.iter().zip(&m.vertices) {
            for (a, b) in p.iter().zip(q.to_array()) {
                // Nine significant digits round to half a unit in the ninth.
                assert!((a - b).abs() <= 5e-9 * b.abs().max(1e-300), "{a} {b}");
            }
        }
        let expect: Vec<Vec<usize>> = m.faces.iter().map(|f| f.indices().to_vec()).collect();
        assert_eq!(faces, expect);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_obj("v 1 2\n").is_err());
        assert!(parse_obj("f 0 1 2\n").is_err());
        assert!(parse_obj("v 1 x 3\n").is_err());
        let (v, f) = parse_obj("# c\nvn 0 0 1\nv 1 2 3\nf 1/1 1//1 1\n").unwrap();
        assert_eq!(v, vec![[1.0, 2.0, 3.0]]);
        assert_eq!(f, vec![vec![0, 0, 0]]);
    }
}
