//! STL (ASCII and binary) and Wavefront OBJ readers, plus an OBJ writer.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Point3;

use super::{GeometryError, TriangleMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    StlAscii,
    StlBinary,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from the extension and, for STL, the content.
    pub fn detect(path: &Path, bytes: &[u8]) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(Self::Obj),
            "stl" => Some(if looks_like_ascii_stl(bytes) {
                Self::StlAscii
            } else {
                Self::StlBinary
            }),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stl-ascii" => Ok(Self::StlAscii),
            "stl-binary" => Ok(Self::StlBinary),
            "obj" => Ok(Self::Obj),
            _ => Err(format!("unknown mesh format `{s}`")),
        }
    }
}

fn looks_like_ascii_stl(bytes: &[u8]) -> bool {
    if !bytes.starts_with(b"solid") {
        return false;
    }
    // Some binary exporters also start the header with "solid".
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        if 84 + 50 * n == bytes.len() {
            return false;
        }
    }
    true
}

/// Reads and cleans a mesh. `format: None` detects it from the path.
pub fn load_mesh(path: &Path, format: Option<MeshFormat>) -> Result<TriangleMesh, GeometryError> {
    let bytes = std::fs::read(path)
        .map_err(|e| GeometryError::Io(format!("{}: {e}", path.display())))?;
    let format = match format {
        Some(f) => f,
        None => MeshFormat::detect(path, &bytes).ok_or_else(|| {
            GeometryError::InvalidInput(format!("cannot infer mesh format of {}", path.display()))
        })?,
    };
    parse_mesh(&bytes, format)
}

pub fn parse_mesh(bytes: &[u8], format: MeshFormat) -> Result<TriangleMesh, GeometryError> {
    let (verts, tris) = match format {
        MeshFormat::StlBinary => parse_stl_binary(bytes)?,
        MeshFormat::StlAscii => parse_stl_ascii(text(bytes)?)?,
        MeshFormat::Obj => parse_obj(text(bytes)?)?,
    };
    if tris.is_empty() {
        return Err(GeometryError::InvalidInput("mesh has no triangles".into()));
    }
    TriangleMesh::new(verts, tris)
}

fn text(bytes: &[u8]) -> Result<&str, GeometryError> {
    std::str::from_utf8(bytes).map_err(|e| GeometryError::Parse {
        location: format!("byte {}", e.valid_up_to()),
        message: "invalid UTF-8".into(),
    })
}

type Soup = (Vec<Point3<f64>>, Vec<[usize; 3]>);

fn parse_stl_binary(b: &[u8]) -> Result<Soup, GeometryError> {
    if b.len() < 84 {
        return Err(GeometryError::Parse {
            location: format!("byte {}", b.len()),
            message: "truncated header".into(),
        });
    }
    let n = u32::from_le_bytes([b[80], b[81], b[82], b[83]]) as usize;
    let need = 84 + 50 * n;
    if b.len() < need {
        return Err(GeometryError::Parse {
            location: format!("byte {}", b.len()),
            message: format!("expected {n} records ({need} bytes)"),
        });
    }
    let f = |o: usize| f32::from_le_bytes([b[o], b[o + 1], b[o + 2], b[o + 3]]) as f64;
    let mut verts = Vec::with_capacity(3 * n);
    let mut tris = Vec::with_capacity(n);
    for i in 0..n {
        // 12 bytes normal, 3 x 12 bytes vertices, 2 bytes attribute
        let rec = 84 + 50 * i + 12;
        let base = verts.len();
        for k in 0..3 {
            let o = rec + 12 * k;
            verts.push(Point3::new(f(o), f(o + 4), f(o + 8)));
        }
        tris.push([base, base + 1, base + 2]);
    }
    Ok((verts, tris))
}

fn parse_stl_ascii(s: &str) -> Result<Soup, GeometryError> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    let mut pending = Vec::with_capacity(3);
    for (ln, line) in s.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("vertex") => {
                let p = parse_xyz(&mut it, ln + 1)?;
                pending.push(p);
            }
            Some("endloop") => {
                if pending.len() != 3 {
                    return Err(GeometryError::Parse {
                        location: format!("line {}", ln + 1),
                        message: format!("facet has {} vertices, expected 3", pending.len()),
                    });
                }
                let base = verts.len();
                verts.append(&mut pending);
                tris.push([base, base + 1, base + 2]);
            }
            _ => {}
        }
    }
    Ok((verts, tris))
}

fn parse_xyz<'a>(
    it: &mut impl Iterator<Item = &'a str>,
    line: usize,
) -> Result<Point3<f64>, GeometryError> {
    let mut c = [0.0; 3];
    for v in c.iter_mut() {
        let tok = it.next().ok_or_else(|| GeometryError::Parse {
            location: format!("line {line}"),
            message: "expected 3 coordinates".into(),
        })?;
        *v = tok.parse().map_err(|_| GeometryError::Parse {
            location: format!("line {line}"),
            message: format!("invalid number `{tok}`"),
        })?;
    }
    Ok(Point3::new(c[0], c[1], c[2]))
}

fn parse_obj(s: &str) -> Result<Soup, GeometryError> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (ln, line) in s.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => verts.push(parse_xyz(&mut it, ln + 1)?),
            Some("f") => {
                let mut idx = Vec::with_capacity(4);
                for tok in it {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().map_err(|_| GeometryError::Parse {
                        location: format!("line {}", ln + 1),
                        message: format!("invalid face index `{tok}`"),
                    })?;
                    // 1-based, negative counts back from the latest vertex
                    let resolved = if i > 0 {
                        i - 1
                    } else {
                        verts.len() as i64 + i
                    };
                    if i == 0 || resolved < 0 || resolved as usize >= verts.len() {
                        return Err(GeometryError::Parse {
                            location: format!("line {}", ln + 1),
                            message: format!("face index {i} out of range"),
                        });
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(GeometryError::Parse {
                        location: format!("line {}", ln + 1),
                        message: "face needs at least 3 vertices".into(),
                    });
                }
                for k in 1..idx.len() - 1 {
                    tris.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok((verts, tris))
}

pub fn to_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

pub fn to_stl_ascii(mesh: &TriangleMesh) -> String {
    let mut s = String::from("solid mesh\n");
    for (i, n) in mesh.face_normals.iter().enumerate() {
        let _ = writeln!(s, "facet normal {} {} {}\n outer loop", n.x, n.y, n.z);
        for p in mesh.triangle(i) {
            let _ = writeln!(s, "  vertex {} {} {}", p.x, p.y, p.z);
        }
        s.push_str(" endloop\nendfacet\n");
    }
    s.push_str("endsolid mesh\n");
    s
}

pub fn to_stl_binary(mesh: &TriangleMesh) -> Vec<u8> {
    let mut b = vec![0u8; 80];
    b.extend_from_slice(&(mesh.triangle_count() as u32).to_le_bytes());
    for (i, n) in mesh.face_normals.iter().enumerate() {
        for c in [n.x, n.y, n.z] {
            b.extend_from_slice(&(c as f32).to_le_bytes());
        }
        for p in mesh.triangle(i) {
            for c in [p.x, p.y, p.z] {
                b.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        b.extend_from_slice(&[0, 0]);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;

    const CUBE_OBJ: &str = "\
v -0.5 -0.5 -0.5
v 0.5 -0.5 -0.5
v -0.5 0.5 -0.5
v 0.5 0.5 -0.5
v -0.5 -0.5 0.5
v 0.5 -0.5 0.5
v -0.5 0.5 0.5
v 0.5 0.5 0.5
f 1 3 4 2
f 5 6 8 7
f 1 2 6 5
f 3 7 8 4
f 1 5 7 3
f 2/1/1 4/1/1 8/1/1 6/1/1
";

    #[test]
    fn obj_cube_with_quads() {
        let m = parse_mesh(CUBE_OBJ.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(m.triangle_count(), 12);
        assert_eq!(m.vertices.len(), 8);
        assert!((m.total_area - 6.0).abs() < 1e-12);
        assert!(m.com.coords.norm() < 1e-12);
        assert!((m.volume - 1.0).abs() < 1e-12);
    }

    #[test]
    fn obj_negative_indices() {
        let s = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n";
        let m = parse_mesh(s.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(m.triangle_count(), 1);
    }

    #[test]
    fn obj_errors_carry_line() {
        let s = "v 0 0 0\nv 1 0 0\nv 0 1 x\n";
        match parse_mesh(s.as_bytes(), MeshFormat::Obj) {
            Err(GeometryError::Parse { location, .. }) => assert_eq!(location, "line 3"),
            other => panic!("{other:?}"),
        }
        let s = "v 0 0 0\nf 1 2 3\n";
        assert!(matches!(
            parse_mesh(s.as_bytes(), MeshFormat::Obj),
            Err(GeometryError::Parse { .. })
        ));
        assert!(matches!(
            parse_mesh(b"v 0 0 0\n", MeshFormat::Obj),
            Err(GeometryError::InvalidInput(_))
        ));
    }

    #[test]
    fn stl_ascii_and_binary_agree() {
        let m = primitives::cube(1.0);
        let a = parse_mesh(to_stl_ascii(&m).as_bytes(), MeshFormat::StlAscii).unwrap();
        let bin = to_stl_binary(&m);
        assert_eq!(bin.len(), 84 + 50 * 12);
        let b = parse_mesh(&bin, MeshFormat::StlBinary).unwrap();
        assert_eq!(a.vertices.len(), 8);
        assert_eq!(b.vertices.len(), 8);
        assert_eq!(a.triangles, b.triangles);
        assert!(!looks_like_ascii_stl(&bin));
    }

    #[test]
    fn stl_binary_truncated() {
        let mut bin = to_stl_binary(&primitives::cube(1.0));
        bin.truncate(300);
        match parse_mesh(&bin, MeshFormat::StlBinary) {
            Err(GeometryError::Parse { location, .. }) => assert_eq!(location, "byte 300"),
            other => panic!("{other:?}"),
        }
    }
}
