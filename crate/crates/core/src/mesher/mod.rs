//! Scene to triangle mesh conversion and volume measurement.
//!
//! The signed distance field is sampled on a uniform grid around the node's
//! bounding box and the zero level set is extracted with marching cubes (see
//! [`table`] for the case table). Crossings are placed by linear interpolation
//! and shared between neighbouring cubes, so a solid whose features span more
//! than a couple of cells comes out as a closed, consistently wound surface.

mod export;
pub mod table;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::MeshError;
use crate::geom::{Aabb, Vec3};
use crate::scene::{CsgNode, Scene};
use crate::sdf::{contains, node_aabb, signed_distance};

pub use export::{export_mesh, MeshFormat};

pub const MIN_RESOLUTION: u32 = 8;
pub const MAX_RESOLUTION: u32 = 1024;
pub const DEFAULT_RESOLUTION: u32 = 64;
pub const DEFAULT_PADDING: u32 = 2;

/// Upper bound on grid samples held in memory at once (1 GiB of f64).
pub const MAX_GRID_SAMPLES: u64 = 1 << 27;

/// Crossings are kept this fraction of an edge away from its corners so that
/// no triangle collapses when a sample lands exactly on the surface.
const EDGE_CLAMP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    /// Cells along the longest axis of the bounding box.
    pub resolution: u32,
    /// Extra cells on every side of the bounding box.
    pub padding: u32,
}

impl GridSpec {
    pub fn new(resolution: u32) -> Result<Self, MeshError> {
        if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&resolution) {
            return Err(MeshError::ResolutionOutOfRange(resolution));
        }
        Ok(GridSpec {
            resolution,
            padding: DEFAULT_PADDING,
        })
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            resolution: DEFAULT_RESOLUTION,
            padding: DEFAULT_PADDING,
        }
    }
}

/// Indexed triangle mesh; triangles wind counter-clockwise seen from outside.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub normals: Option<Vec<Vec3>>,
}

/// Edge-incidence summary of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeReport {
    pub edges: usize,
    /// Undirected edges not used by exactly two triangles.
    pub non_manifold: usize,
    /// Directed edges used more than once, i.e. inconsistent winding.
    pub misoriented: usize,
}

impl TriangleMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_area(&self, t: &[u32; 3]) -> f64 {
        let [a, b, c] = t.map(|i| self.vertices[i as usize]);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn face_normal(&self, t: &[u32; 3]) -> Vec3 {
        let [a, b, c] = t.map(|i| self.vertices[i as usize]);
        (b - a)
            .cross(&(c - a))
            .try_normalize(0.0)
            .unwrap_or_else(Vec3::zeros)
    }

    pub fn edge_report(&self) -> EdgeReport {
        let mut undirected: HashMap<(u32, u32), usize> = HashMap::new();
        let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *undirected.entry((a.min(b), a.max(b))).or_default() += 1;
                *directed.entry((a, b)).or_default() += 1;
            }
        }
        EdgeReport {
            edges: undirected.len(),
            non_manifold: undirected.values().filter(|&&n| n != 2).count(),
            misoriented: directed.values().filter(|&&n| n > 1).count(),
        }
    }

    /// Every edge shared by exactly two triangles with opposite directions.
    pub fn is_closed(&self) -> bool {
        let r = self.edge_report();
        r.non_manifold == 0 && r.misoriented == 0
    }

    /// V - E + F over the vertices actually referenced by triangles.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &i in t {
                used[i as usize] = true;
            }
        }
        let v = used.iter().filter(|u| **u).count() as i64;
        v - self.edge_report().edges as i64 + self.triangles.len() as i64
    }

    /// Area-weighted vertex normals.
    pub fn compute_normals(&mut self) {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i as usize]);
            let n = (b - a).cross(&(c - a));
            for &i in t {
                acc[i as usize] += n;
            }
        }
        self.normals = Some(
            acc.into_iter()
                .map(|n| n.try_normalize(0.0).unwrap_or_else(Vec3::zeros))
                .collect(),
        );
    }
}

/// Enclosed volume by the divergence theorem. Negative for inverted winding;
/// meaningless for open meshes.
pub fn mesh_volume(mesh: &TriangleMesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
            a.dot(&b.cross(&c))
        })
        .sum::<f64>()
        / 6.0
}

/// Bounding-box volume times the fraction of uniform samples inside `node`.
pub fn monte_carlo_volume(scene: &Scene, node: &CsgNode, samples: u64, seed: u64) -> f64 {
    let bounds = node_aabb(scene, node);
    if bounds.is_empty() || samples == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = bounds.size();
    let mut hits = 0u64;
    for _ in 0..samples {
        let p = Vec3::from_fn(|i, _| bounds.min[i] + size[i] * rng.random::<f64>());
        if contains(scene, node, &p) {
            hits += 1;
        }
    }
    bounds.volume() * hits as f64 / samples as f64
}

/// Uniform sample grid placed around a bounding box.
#[derive(Debug, Clone, Copy)]
struct Grid {
    origin: Vec3,
    cell: f64,
    /// Cells per axis; nodes are one more.
    cells: [usize; 3],
}

impl Grid {
    fn around(bounds: &Aabb, spec: &GridSpec) -> Grid {
        let size = bounds.size();
        let longest = size.max().max(f64::MIN_POSITIVE);
        let cell = longest / spec.resolution as f64;
        let pad = spec.padding as usize;
        let cells = [0, 1, 2].map(|i| ((size[i] / cell).ceil() as usize).max(1) + 2 * pad);
        let center = bounds.center();
        let origin = Vec3::from_fn(|i, _| center[i] - 0.5 * cells[i] as f64 * cell);
        Grid {
            origin,
            cell,
            cells,
        }
    }

    fn nodes(&self) -> [usize; 3] {
        self.cells.map(|c| c + 1)
    }

    fn sample_count(&self) -> u64 {
        self.nodes().iter().map(|&n| n as u64).product()
    }

    fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64, j as f64, k as f64) * self.cell
    }

    fn bounds(&self) -> Aabb {
        let [i, j, k] = self.cells;
        Aabb::new(self.origin, self.point(i, j, k))
    }
}

/// Polygonizes the scene root.
pub fn polygonize(scene: &Scene, spec: &GridSpec) -> Result<TriangleMesh, MeshError> {
    polygonize_node(scene, &scene.root, spec)
}

/// Polygonizes one subtree, e.g. a single primitive leaf.
pub fn polygonize_node(
    scene: &Scene,
    node: &CsgNode,
    spec: &GridSpec,
) -> Result<TriangleMesh, MeshError> {
    if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&spec.resolution) {
        return Err(MeshError::ResolutionOutOfRange(spec.resolution));
    }
    let bounds = node_aabb(scene, node);
    if bounds.is_empty() {
        return Ok(TriangleMesh::default());
    }
    let grid = Grid::around(&bounds, spec);
    let samples = grid.sample_count();
    if samples > MAX_GRID_SAMPLES {
        return Err(MeshError::OutOfMemory {
            samples,
            limit: MAX_GRID_SAMPLES,
        });
    }
    let values = sample(scene, node, &grid);
    Ok(extract(&grid, &values))
}

fn sample(scene: &Scene, node: &CsgNode, grid: &Grid) -> Vec<f64> {
    let [nx, ny, nz] = grid.nodes();
    let mut values = vec![0.0; nx * ny * nz];
    values
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(k, slab)| {
            for j in 0..ny {
                for i in 0..nx {
                    slab[j * nx + i] = signed_distance(scene, node, &grid.point(i, j, k));
                }
            }
        });
    debug_assert_eq!(values.len(), nz * nx * ny);
    values
}

fn extract(grid: &Grid, values: &[f64]) -> TriangleMesh {
    let [nx, ny, _] = grid.nodes();
    let [cx, cy, cz] = grid.cells;
    let index = |i: usize, j: usize, k: usize| (k * ny + j) * nx + i;
    let corner = |c: u8| {
        (
            (c & 1) as usize,
            ((c >> 1) & 1) as usize,
            ((c >> 2) & 1) as usize,
        )
    };
    let table = table::case_table();

    let mut mesh = TriangleMesh::default();
    // (lower node index, axis) -> vertex index
    let mut edge_vertices: HashMap<(usize, usize), u32> = HashMap::new();
    let mut poly_ids: Vec<u32> = Vec::with_capacity(12);

    for k in 0..cz {
        for j in 0..cy {
            for i in 0..cx {
                let mut mask = 0u8;
                for c in 0..8u8 {
                    let (di, dj, dk) = corner(c);
                    if values[index(i + di, j + dj, k + dk)] < 0.0 {
                        mask |= 1 << c;
                    }
                }
                if mask == 0 || mask == 255 {
                    continue;
                }
                for poly in &table[mask as usize] {
                    poly_ids.clear();
                    for &edge in poly {
                        let edge = edge as usize;
                        let (ai, aj, ak) = corner(table::EDGE_START[edge]);
                        let (bi, bj, bk) = corner(table::edge_end(edge));
                        let a = (i + ai, j + aj, k + ak);
                        let b = (i + bi, j + bj, k + bk);
                        let key = (index(a.0, a.1, a.2), table::edge_axis(edge));
                        let id = *edge_vertices.entry(key).or_insert_with(|| {
                            let va = values[index(a.0, a.1, a.2)];
                            let vb = values[index(b.0, b.1, b.2)];
                            let t = (va / (va - vb)).clamp(EDGE_CLAMP, 1.0 - EDGE_CLAMP);
                            let pa = grid.point(a.0, a.1, a.2);
                            let pb = grid.point(b.0, b.1, b.2);
                            mesh.vertices.push(pa + (pb - pa) * t);
                            (mesh.vertices.len() - 1) as u32
                        });
                        poly_ids.push(id);
                    }
                    for w in 1..poly_ids.len() - 1 {
                        mesh.triangles
                            .push([poly_ids[0], poly_ids[w], poly_ids[w + 1]]);
                    }
                }
            }
        }
    }
    debug_assert!(mesh.vertices.iter().all(|v| grid.bounds().contains(v)));
    mesh
}
