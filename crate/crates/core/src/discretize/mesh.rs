use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::voxel::check_resolution;
use super::DiscretizeError;
use crate::assembly::{StructureField, StructureIR};
use crate::cp_core::Vec3;

pub const WELD_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub normals: Vec<Vec3>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Self {
        let normals = triangles
            .iter()
            .map(|t| {
                let n = (vertices[t[1]] - vertices[t[0]]).cross(&(vertices[t[2]] - vertices[t[0]]));
                let len = n.norm();
                if len > 0.0 {
                    n / len
                } else {
                    n
                }
            })
            .collect();
        TriMesh { vertices, triangles, normals }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Enclosed volume by the divergence theorem (positive for outward orientation).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| self.vertices[t[0]].dot(&self.vertices[t[1]].cross(&self.vertices[t[2]])) / 6.0)
            .sum()
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                0.5 * (self.vertices[t[1]] - self.vertices[t[0]]).cross(&(self.vertices[t[2]] - self.vertices[t[0]])).norm()
            })
            .sum()
    }

    fn directed_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                *m.entry((t[e], t[(e + 1) % 3])).or_insert(0) += 1;
            }
        }
        m
    }

    /// Every edge is used by exactly two triangles with opposite directions.
    pub fn is_closed_manifold(&self) -> bool {
        let d = self.directed_edges();
        d.iter().all(|(&(a, b), &n)| n == 1 && d.get(&(b, a)) == Some(&1))
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut edges: Vec<(usize, usize)> =
            self.directed_edges().keys().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        edges.sort_unstable();
        edges.dedup();
        let used: std::collections::HashSet<usize> = self.triangles.iter().flatten().copied().collect();
        used.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn bounds(&self) -> (Vec3, Vec3) {
        let lo = self.vertices.iter().fold(Vec3::repeat(f64::INFINITY), |a, p| a.inf(p));
        let hi = self.vertices.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |a, p| a.sup(p));
        (lo, hi)
    }
}

/// Kuhn subdivision of the unit cube into six tetrahedra sharing the main diagonal.
/// Corners are numbered by bits (x = 1, y = 2, z = 4).
const KUHN: [[usize; 4]; 6] =
    [[0, 1, 3, 7], [0, 1, 5, 7], [0, 2, 3, 7], [0, 2, 6, 7], [0, 4, 5, 7], [0, 4, 6, 7]];

/// Signed distance to the unit cube (positive outside).
fn cell_box(p: &Vec3) -> f64 {
    let q = p.map(|v| (v - 0.5).abs() - 0.5);
    let outside = q.map(|v| v.max(0.0)).norm();
    outside + q.max().min(0.0)
}

struct Lattice {
    n: usize,
    r: usize,
    values: Vec<f64>,
}

impl Lattice {
    /// Samples at `(i - 1) / R` for `i in 0..R+3`: the `(R+1)^3` cell lattice plus one
    /// padding layer outside, where the field is clipped so every surface closes.
    fn sample(field: &StructureField, r: usize) -> Self {
        let n = r + 3;
        let mut values = vec![0.0; n * n * n];
        values.par_chunks_mut(n * n).enumerate().for_each(|(k, slab)| {
            for j in 0..n {
                for i in 0..n {
                    let p = Lattice::pos_of(r, i, j, k);
                    let f = field.eval(&p);
                    slab[j * n + i] = if Lattice::in_cell(r, i, j, k) { f } else { f.max(cell_box(&p)) };
                }
            }
        });
        Lattice { n, r, values }
    }

    fn in_cell(r: usize, i: usize, j: usize, k: usize) -> bool {
        [i, j, k].iter().all(|&c| (1..=r + 1).contains(&c))
    }

    fn pos_of(r: usize, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(i as f64 - 1.0, j as f64 - 1.0, k as f64 - 1.0) / r as f64
    }

    fn id(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n + j) * self.n + i
    }

    fn coords(&self, id: usize) -> (usize, usize, usize) {
        (id % self.n, (id / self.n) % self.n, id / (self.n * self.n))
    }

    fn pos(&self, id: usize) -> Vec3 {
        let (i, j, k) = self.coords(id);
        Lattice::pos_of(self.r, i, j, k)
    }

    fn inside_cell(&self, id: usize) -> bool {
        let (i, j, k) = self.coords(id);
        Lattice::in_cell(self.r, i, j, k)
    }
}

/// Parameter where the segment `a -> b` (with `a` in the cell) leaves the unit cube.
fn exit_parameter(a: &Vec3, b: &Vec3) -> f64 {
    let mut t: f64 = 1.0;
    for i in 0..3 {
        let d = b[i] - a[i];
        if d > 0.0 {
            t = t.min((1.0 - a[i]) / d);
        } else if d < 0.0 {
            t = t.min(-a[i] / d);
        }
    }
    t.clamp(0.0, 1.0)
}

struct Builder<'a> {
    lat: &'a Lattice,
    edge_vertex: HashMap<(usize, usize), usize>,
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl Builder<'_> {
    fn vertex(&mut self, a: usize, b: usize) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.edge_vertex.get(&key) {
            return v;
        }
        let (fa, fb) = (self.lat.values[key.0], self.lat.values[key.1]);
        let (pa, pb) = (self.lat.pos(key.0), self.lat.pos(key.1));
        let (ina, inb) = (self.lat.inside_cell(key.0), self.lat.inside_cell(key.1));
        // Crossings into the padding layer sit exactly on the cell boundary, keeping faces and corners sharp.
        let p = if ina && !inb && fa < 0.0 {
            pa + (pb - pa) * exit_parameter(&pa, &pb)
        } else if inb && !ina && fb < 0.0 {
            pb + (pa - pb) * exit_parameter(&pb, &pa)
        } else {
            pa + (pb - pa) * (fa / (fa - fb))
        };
        let v = self.vertices.len();
        self.vertices.push(p);
        self.edge_vertex.insert(key, v);
        v
    }

    fn emit(&mut self, tri: [usize; 3], inside: Vec3, outside: Vec3) {
        let [a, b, c] = tri;
        let n = (self.vertices[b] - self.vertices[a]).cross(&(self.vertices[c] - self.vertices[a]));
        if n.dot(&(outside - inside)) >= 0.0 {
            self.triangles.push([a, b, c]);
        } else {
            self.triangles.push([a, c, b]);
        }
    }

    fn tet(&mut self, ids: [usize; 4]) {
        let neg: Vec<usize> = ids.iter().copied().filter(|&v| self.lat.values[v] < 0.0).collect();
        let pos: Vec<usize> = ids.iter().copied().filter(|&v| self.lat.values[v] >= 0.0).collect();
        let centroid = |s: &[usize], lat: &Lattice| s.iter().map(|&v| lat.pos(v)).sum::<Vec3>() / s.len() as f64;
        match neg.len() {
            1 | 3 => {
                let (lone, others) = if neg.len() == 1 { (neg[0], &pos) } else { (pos[0], &neg) };
                let tri = [self.vertex(lone, others[0]), self.vertex(lone, others[1]), self.vertex(lone, others[2])];
                self.emit(tri, centroid(&neg, self.lat), centroid(&pos, self.lat));
            }
            2 => {
                let q = [
                    self.vertex(neg[0], pos[0]),
                    self.vertex(neg[0], pos[1]),
                    self.vertex(neg[1], pos[1]),
                    self.vertex(neg[1], pos[0]),
                ];
                let (ci, co) = (centroid(&neg, self.lat), centroid(&pos, self.lat));
                self.emit([q[0], q[1], q[2]], ci, co);
                self.emit([q[0], q[2], q[3]], ci, co);
            }
            _ => {}
        }
    }
}

/// Merge vertices closer than [`WELD_TOL`] and drop triangles that collapse.
pub fn weld(vertices: &[Vec3], triangles: &[[usize; 3]], tol: f64) -> (Vec<Vec3>, Vec<[usize; 3]>) {
    let mut cell_of: HashMap<[i64; 3], usize> = HashMap::new();
    let mut remap = Vec::with_capacity(vertices.len());
    let mut out_v: Vec<Vec3> = Vec::new();
    for p in vertices {
        let key = [(p.x / tol).round() as i64, (p.y / tol).round() as i64, (p.z / tol).round() as i64];
        let id = *cell_of.entry(key).or_insert_with(|| {
            out_v.push(*p);
            out_v.len() - 1
        });
        remap.push(id);
    }
    let out_t = triangles
        .iter()
        .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
        .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
        .filter(|t| (out_v[t[1]] - out_v[t[0]]).cross(&(out_v[t[2]] - out_v[t[0]])).norm() > 0.0)
        .collect();
    (out_v, out_t)
}

/// Marching tetrahedra over the padded sample lattice of a compiled field.
pub fn extract_mesh_field(field: &StructureField, r: usize) -> Result<TriMesh, DiscretizeError> {
    check_resolution(r)?;
    let lat = Lattice::sample(field, r);
    let mut b = Builder { lat: &lat, edge_vertex: HashMap::new(), vertices: Vec::new(), triangles: Vec::new() };
    let n = lat.n;
    for k in 0..n - 1 {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let corner = |c: usize| lat.id(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                for t in KUHN {
                    b.tet([corner(t[0]), corner(t[1]), corner(t[2]), corner(t[3])]);
                }
            }
        }
    }
    if b.triangles.is_empty() {
        return Err(DiscretizeError::EmptyMesh);
    }
    let (v, t) = weld(&b.vertices, &b.triangles, WELD_TOL);
    // Drop vertices no longer referenced after welding.
    let mut used = vec![usize::MAX; v.len()];
    let mut verts = Vec::new();
    let mut tris = Vec::with_capacity(t.len());
    for tri in t {
        let mut out = [0; 3];
        for (o, &x) in out.iter_mut().zip(&tri) {
            if used[x] == usize::MAX {
                used[x] = verts.len();
                verts.push(v[x]);
            }
            *o = used[x];
        }
        tris.push(out);
    }
    Ok(TriMesh::new(verts, tris))
}

pub fn extract_mesh(ir: &StructureIR, r: usize) -> Result<TriMesh, DiscretizeError> {
    check_resolution(r)?;
    extract_mesh_field(&ir.compile(), r)
}

/// Shortest decimal with nine significant digits.
fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn obj_string(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(mesh.vertices.len() * 40 + mesh.triangles.len() * 20);
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", sig9(v.x), sig9(v.y), sig9(v.z));
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

pub fn export_obj(mesh: &TriMesh, path: &Path) -> Result<(), DiscretizeError> {
    std::fs::write(path, obj_string(mesh)).map_err(|e| DiscretizeError::Io(format!("{}: {e}", path.display())))
}

/// Parse `v` and `f` records (polygon faces are fan-triangulated; `v/vt/vn` indices accepted).
pub fn parse_obj(text: &str) -> Result<TriMesh, DiscretizeError> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        let bad = |what: &str| DiscretizeError::Io(format!("line {}: {what}", ln + 1));
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.take(3).map(|s| s.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad("bad vertex"))?;
                if c.len() != 3 {
                    return Err(bad("vertex needs 3 coordinates"));
                }
                verts.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = it
                    .map(|s| s.split('/').next().unwrap_or("").parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("bad face"))?;
                if idx.len() < 3 || idx.iter().any(|&i| i == 0 || i > verts.len()) {
                    return Err(bad("face index out of range"));
                }
                for w in 1..idx.len() - 1 {
                    tris.push([idx[0] - 1, idx[w] - 1, idx[w + 1] - 1]);
                }
            }
            _ => {}
        }
    }
    Ok(TriMesh::new(verts, tris))
}

pub fn import_obj(path: &Path) -> Result<TriMesh, DiscretizeError> {
    let text = std::fs::read_to_string(path).map_err(|e| DiscretizeError::Io(format!("{}: {e}", path.display())))?;
    parse_obj(&text)
}
