//! Closed, outward oriented triangle meshes.
//!
//! Text format: one `v x y z` line per vertex and one `f i j k` line per
//! triangle with 1-based indices. Blank lines and lines starting with `#`
//! are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::intervals::IntervalUnion;

/// Triangles with smaller area are rejected.
pub const DEGENERATE_AREA_TOL: f64 = 1e-12;
/// Barycentric margin below which a vertical ray counts as hitting an edge.
pub const RAY_EDGE_TOL: f64 = 1e-10;
/// Number of jittered retries before a section is declared degenerate.
pub const MAX_JITTER_RETRIES: usize = 8;

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<V3>,
    triangles: Vec<[usize; 3]>,
    index: OnceLock<RayIndex>,
}

/// Uniform bins over the xy bounding box listing the triangles whose
/// projection overlaps each bin.
#[derive(Debug, Clone)]
struct RayIndex {
    lo: [f64; 2],
    cell: [f64; 2],
    n: usize,
    bins: Vec<Vec<u32>>,
}

impl TriangleMesh {
    /// Validates indices, triangle areas, watertightness and orientation.
    pub fn new(vertices: Vec<V3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::validation("mesh has no triangles"));
        }
        if let Some(v) = vertices.iter().find(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::validation(format!("non-finite vertex {v:?}")));
        }
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&i) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::validation(format!("triangle {t} references missing vertex {i}")));
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            let area = 0.5 * norm(cross(sub(b, a), sub(c, a)));
            if !(area > DEGENERATE_AREA_TOL) {
                return Err(Error::validation(format!("triangle {t} is degenerate (area {area:e})")));
            }
            for k in 0..3 {
                *edges.entry((tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        for (&(a, b), &count) in &edges {
            if count != 1 {
                return Err(Error::validation(format!(
                    "edge ({a}, {b}) is used {count} times in the same direction; orientation is inconsistent"
                )));
            }
            if !edges.contains_key(&(b, a)) {
                return Err(Error::validation(format!("edge ({a}, {b}) has no opposite; mesh is not watertight")));
            }
        }
        let mesh = Self { vertices, triangles, index: OnceLock::new() };
        if !(mesh.volume() > 0.0) {
            return Err(Error::validation("mesh is oriented inward (negative enclosed volume)"));
        }
        Ok(mesh)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag = parts.next().unwrap_or_default();
            let fields: Vec<&str> = parts.collect();
            let bad = |what: &str| Error::validation(format!("line {}: {what}: {line:?}", lineno + 1));
            match tag {
                "v" => {
                    if fields.len() != 3 {
                        return Err(bad("vertex needs 3 coordinates"));
                    }
                    let mut v = [0.0; 3];
                    for (k, f) in fields.iter().enumerate() {
                        v[k] = f.parse().map_err(|_| bad("bad coordinate"))?;
                    }
                    vertices.push(v);
                }
                "f" => {
                    if fields.len() != 3 {
                        return Err(bad("face needs 3 indices"));
                    }
                    let mut t = [0usize; 3];
                    for (k, f) in fields.iter().enumerate() {
                        let i: usize = f.parse().map_err(|_| bad("bad index"))?;
                        if i == 0 {
                            return Err(bad("indices are 1-based"));
                        }
                        t[k] = i - 1;
                    }
                    triangles.push(t);
                }
                _ => return Err(bad("unknown record")),
            }
        }
        Self::new(vertices, triangles)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::validation(format!("cannot read mesh {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {:?} {:?} {:?}", v[0], v[1], v[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }

    pub fn vertices(&self) -> &[V3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    fn normal(&self, t: &[usize; 3]) -> V3 {
        let [a, b, c] = t.map(|i| self.vertices[i]);
        cross(sub(b, a), sub(c, a))
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| 0.5 * norm(self.normal(t))).sum()
    }

    /// `Σ_T area(T)·|n_T·e₃|`.
    pub fn perpendicular_area(&self) -> f64 {
        self.triangles.iter().map(|t| 0.5 * self.normal(t)[2].abs()).sum()
    }

    /// Enclosed volume by the divergence theorem.
    pub fn volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                dot(a, cross(b, c)) / 6.0
            })
            .sum()
    }

    pub fn bounding_box(&self) -> (V3, V3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        norm(sub(hi, lo))
    }

    fn index(&self) -> &RayIndex {
        self.index.get_or_init(|| {
            let (lo, hi) = self.bounding_box();
            let n = ((self.triangles.len() as f64 / 4.0).sqrt().ceil() as usize).clamp(1, 512);
            let cell = [
                ((hi[0] - lo[0]) / n as f64).max(f64::MIN_POSITIVE),
                ((hi[1] - lo[1]) / n as f64).max(f64::MIN_POSITIVE),
            ];
            let mut bins = vec![Vec::new(); n * n];
            let bin = |x: f64, k: usize| (((x - lo[k]) / cell[k]).floor().max(0.0) as usize).min(n - 1);
            for (ti, t) in self.triangles.iter().enumerate() {
                let ps = t.map(|i| self.vertices[i]);
                let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
                for p in ps {
                    x0 = x0.min(p[0]);
                    x1 = x1.max(p[0]);
                    y0 = y0.min(p[1]);
                    y1 = y1.max(p[1]);
                }
                for i in bin(x0, 0)..=bin(x1, 0) {
                    for j in bin(y0, 1)..=bin(y1, 1) {
                        bins[i * n + j].push(ti as u32);
                    }
                }
            }
            RayIndex { lo: [lo[0], lo[1]], cell, n, bins }
        })
    }

    /// Crossings of the vertical line through `q`, or `None` if the line
    /// passes within tolerance of an edge or the crossings do not alternate.
    fn try_section(&self, q: [f64; 2]) -> Option<Vec<(f64, f64)>> {
        let idx = self.index();
        let fi = ((q[0] - idx.lo[0]) / idx.cell[0]).floor();
        let fj = ((q[1] - idx.lo[1]) / idx.cell[1]).floor();
        if fi < 0.0 || fj < 0.0 || fi >= idx.n as f64 || fj >= idx.n as f64 {
            return Some(Vec::new());
        }
        let mut hits: Vec<(f64, f64)> = Vec::new();
        for &ti in &idx.bins[fi as usize * idx.n + fj as usize] {
            let [a, b, c] = self.triangles[ti as usize].map(|i| self.vertices[i]);
            let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            let scale = (norm(sub(b, a)) * norm(sub(c, a))).max(f64::MIN_POSITIVE);
            if area.abs() <= 1e-14 * scale {
                continue;
            }
            let w0 = ((b[0] - q[0]) * (c[1] - q[1]) - (b[1] - q[1]) * (c[0] - q[0])) / area;
            let w1 = ((c[0] - q[0]) * (a[1] - q[1]) - (c[1] - q[1]) * (a[0] - q[0])) / area;
            let w2 = 1.0 - w0 - w1;
            let wmin = w0.min(w1).min(w2);
            if wmin < -RAY_EDGE_TOL {
                continue;
            }
            if wmin <= RAY_EDGE_TOL {
                return None;
            }
            hits.push((w0 * a[2] + w1 * b[2] + w2 * c[2], area.signum()));
        }
        hits.sort_by(|x, y| x.0.total_cmp(&y.0));
        if hits.len() % 2 != 0 {
            return None;
        }
        let mut out = Vec::with_capacity(hits.len() / 2);
        for pair in hits.chunks(2) {
            // entering through a downward facing triangle, leaving upward
            if pair[0].1 > 0.0 || pair[1].1 < 0.0 {
                return None;
            }
            out.push((pair[0].0, pair[1].0));
        }
        Some(out)
    }

    /// Section along `e₃` by ray parity, retried with a deterministic
    /// jitter sequence on degenerate hits.
    pub fn cross_section(&self, q: [f64; 2]) -> Result<IntervalUnion> {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let step = 1e-8 * self.diameter();
        for k in 0..=MAX_JITTER_RETRIES {
            let r = step * k as f64;
            let angle = golden * k as f64;
            let p = [q[0] + r * angle.cos(), q[1] + r * angle.sin()];
            if let Some(raw) = self.try_section(p) {
                return IntervalUnion::normalize(&raw, 0.0);
            }
        }
        Err(Error::Geometry(format!(
            "vertical ray at ({}, {}) stays degenerate after {MAX_JITTER_RETRIES} jittered retries",
            q[0], q[1]
        )))
    }
}

/// Geodesic sphere obtained by subdividing an icosahedron; `subdivisions = 5`
/// gives 20480 triangles.
pub fn icosphere(center: V3, radius: f64, subdivisions: u32) -> Result<TriangleMesh> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be > 0, got {radius}")));
    }
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<V3> = vec![
        [-1.0, p, 0.0], [1.0, p, 0.0], [-1.0, -p, 0.0], [1.0, -p, 0.0],
        [0.0, -1.0, p], [0.0, 1.0, p], [0.0, -1.0, -p], [0.0, 1.0, -p],
        [p, 0.0, -1.0], [p, 0.0, 1.0], [-p, 0.0, -1.0], [-p, 0.0, 1.0],
    ];
    let unit = |v: V3| {
        let n = norm(v);
        [v[0] / n, v[1] / n, v[2] / n]
    };
    verts.iter_mut().for_each(|v| *v = unit(*v));
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<V3>| {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (u, v) = (verts[a], verts[b]);
                verts.push(unit([u[0] + v[0], u[1] + v[1], u[2] + v[2]]));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts
        .into_iter()
        .map(|v| [center[0] + radius * v[0], center[1] + radius * v[1], center[2] + radius * v[2]])
        .collect();
    TriangleMesh::new(verts, faces)
}
