use std::fmt::Write as _;

use crate::geom::fmt_sig9;

use super::TriangleMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    /// ASCII Wavefront OBJ, 1-based indices.
    Obj,
    /// Binary little-endian STL.
    StlBinary,
}

const STL_HEADER: &[u8] = b"midair binary STL";

pub fn export_mesh(mesh: &TriangleMesh, format: MeshFormat) -> Vec<u8> {
    match format {
        MeshFormat::Obj => to_obj(mesh).into_bytes(),
        MeshFormat::StlBinary => to_stl(mesh),
    }
}

fn to_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::from("# midair mesh\n");
    for v in &mesh.vertices {
        let _ = writeln!(
            out,
            "v {} {} {}",
            fmt_sig9(v.x),
            fmt_sig9(v.y),
            fmt_sig9(v.z)
        );
    }
    if let Some(normals) = &mesh.normals {
        for n in normals {
            let _ = writeln!(
                out,
                "vn {} {} {}",
                fmt_sig9(n.x),
                fmt_sig9(n.y),
                fmt_sig9(n.z)
            );
        }
    }
    for [a, b, c] in mesh.triangles.iter().map(|t| t.map(|i| i + 1)) {
        if mesh.normals.is_some() {
            let _ = writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}");
        } else {
            let _ = writeln!(out, "f {a} {b} {c}");
        }
    }
    out
}

fn to_stl(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.triangles.len());
    let mut header = [0u8; 80];
    header[..STL_HEADER.len()].copy_from_slice(STL_HEADER);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in &mesh.triangles {
        let n = mesh.face_normal(t);
        let corners = t.map(|i| mesh.vertices[i as usize]);
        for v in std::iter::once(&n).chain(corners.iter()) {
            for c in v.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::vec3;

    fn one_triangle() -> TriangleMesh {
        TriangleMesh {
            vertices: vec![
                vec3(0.0, 0.0, 0.0),
                vec3(1.0, 0.0, 0.0),
                vec3(0.0, 1.0, 0.0),
            ],
            triangles: vec![[0, 1, 2]],
            normals: None,
        }
    }

    #[test]
    fn obj_lines() {
        let text = String::from_utf8(export_mesh(&one_triangle(), MeshFormat::Obj)).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(
            text.lines()
                .filter(|l| l.starts_with("f "))
                .collect::<Vec<_>>(),
            vec!["f 1 2 3"]
        );
    }

    #[test]
    fn stl_size_and_count() {
        let bytes = export_mesh(&one_triangle(), MeshFormat::StlBinary);
        assert_eq!(bytes.len(), 80 + 4 + 50);
        assert_eq!(u32::from_le_bytes(bytes[80..84].try_into().unwrap()), 1);
        // facet normal is +z
        assert_eq!(f32::from_le_bytes(bytes[92..96].try_into().unwrap()), 1.0);
        assert!(!bytes.starts_with(b"solid"));
    }

    #[test]
    fn obj_with_normals() {
        let mut mesh = one_triangle();
        mesh.compute_normals();
        let text = String::from_utf8(export_mesh(&mesh, MeshFormat::Obj)).unwrap();
        assert!(text.contains("vn 0 0 1\n"));
        assert!(text.contains("f 1//1 2//2 3//3\n"));
    }
}
