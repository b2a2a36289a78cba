//! Marching-cubes case table.
//!
//! The 256 cases are derived once from a fixed face rule rather than typed in:
//! on every cube face the iso-line crosses the edges whose corners differ in
//! sign, and each run of inside corners (walking the face counter-clockwise
//! seen from outside) is cut off by one segment from its entry crossing to its
//! exit crossing. On a face with two diagonal inside corners this separates
//! them. Because the rule only looks at the face's own corners, neighbouring
//! cubes always agree on shared faces and the extracted surface is closed.
//! Segments chain into loops around the cube; each loop becomes a triangle fan
//! wound counter-clockwise seen from outside the solid.
//!
//! Corner `c` sits at `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`. Edge `e` runs
//! along axis `e / 4` from the corner listed in [`EDGE_START`].

use std::sync::OnceLock;

/// Lower corner of each edge; the edge runs along axis `edge / 4`.
#[rustfmt::skip]
pub const EDGE_START: [u8; 12] = [
    0, 2, 4, 6, // x
    0, 1, 4, 5, // y
    0, 1, 2, 3, // z
];

pub fn edge_axis(edge: usize) -> usize {
    edge / 4
}

pub fn edge_end(edge: usize) -> u8 {
    EDGE_START[edge] | (1 << edge_axis(edge))
}

fn edge_between(a: u8, b: u8) -> usize {
    let diff = a ^ b;
    debug_assert!(diff.count_ones() == 1);
    let axis = diff.trailing_zeros() as usize;
    let start = a.min(b);
    (0..4)
        .map(|k| axis * 4 + k)
        .find(|&e| EDGE_START[e] == start)
        .expect("every adjacent corner pair is an edge")
}

/// Corners of the six faces, counter-clockwise seen from outside the cube.
fn faces() -> [[u8; 4]; 6] {
    let mut out = [[0u8; 4]; 6];
    for axis in 0..3 {
        let u = (axis + 1) % 3;
        let v = (axis + 2) % 3;
        for side in 0..2u8 {
            let uv: [(u8, u8); 4] = if side == 1 {
                [(0, 0), (1, 0), (1, 1), (0, 1)]
            } else {
                [(0, 0), (0, 1), (1, 1), (1, 0)]
            };
            for (slot, (cu, cv)) in out[axis * 2 + side as usize].iter_mut().zip(uv) {
                *slot = (side << axis) | (cu << u) | (cv << v);
            }
        }
    }
    out
}

/// Edge loops for one case, each loop a polygon of edge indices.
pub type CasePolygons = Vec<Vec<u8>>;

fn build_case(mask: u8) -> CasePolygons {
    let inside = |c: u8| mask & (1 << c) != 0;
    let mut next: [Option<u8>; 12] = [None; 12];
    for face in faces() {
        // (edge, is_entry) in counter-clockwise order
        let crossings: Vec<(usize, bool)> = (0..4)
            .filter_map(|m| {
                let a = face[m];
                let b = face[(m + 1) % 4];
                (inside(a) != inside(b)).then(|| (edge_between(a, b), inside(b)))
            })
            .collect();
        for (i, &(edge, is_entry)) in crossings.iter().enumerate() {
            if is_entry {
                let (exit, exit_is_entry) = crossings[(i + 1) % crossings.len()];
                debug_assert!(!exit_is_entry);
                debug_assert!(next[edge].is_none());
                next[edge] = Some(exit as u8);
            }
        }
    }
    let mut used = [false; 12];
    let mut loops = Vec::new();
    for start in 0..12 {
        if used[start] || next[start].is_none() {
            continue;
        }
        let mut poly = Vec::new();
        let mut e = start;
        while !used[e] {
            used[e] = true;
            poly.push(e as u8);
            e = next[e].expect("loops close on the cube surface") as usize;
        }
        debug_assert_eq!(e, start);
        loops.push(poly);
    }
    loops
}

pub fn case_table() -> &'static [CasePolygons; 256] {
    static TABLE: OnceLock<[CasePolygons; 256]> = OnceLock::new();
    TABLE.get_or_init(|| std::array::from_fn(|mask| build_case(mask as u8)))
}
