//! OBJ and STL readers/writers. Triangles only.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::Point3;

use super::TriMesh;
use crate::error::{Error, Result};

pub fn read_mesh(path: &Path) -> Result<TriMesh> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("obj") => read_obj(path),
        Some("stl") => read_stl(path),
        _ => Err(Error::format(path, "unsupported mesh extension (expected .obj or .stl)")),
    }
}

pub fn write_obj(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_obj_to(&mut out, mesh)?;
    out.flush()?;
    Ok(())
}

pub fn write_obj_to<W: Write>(out: &mut W, mesh: &TriMesh) -> Result<()> {
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in &mesh.faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

pub fn read_obj(path: &Path) -> Result<TriMesh> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let c: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::format(path, format!("line {}: {e}", lineno + 1)))?;
                if c.len() != 3 {
                    return Err(Error::format(path, format!("line {}: vertex needs 3 coordinates", lineno + 1)));
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx: Vec<&str> = tok.collect();
                if idx.len() != 3 {
                    return Err(Error::format(
                        path,
                        format!("line {}: only triangles are supported, got {} vertices", lineno + 1, idx.len()),
                    ));
                }
                let mut f = [0usize; 3];
                for (k, t) in idx.iter().enumerate() {
                    // "v", "v/vt", "v/vt/vn", "v//vn"
                    let head = t.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|e| Error::format(path, format!("line {}: {e}", lineno + 1)))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else {
                        vertices.len() as i64 + i
                    };
                    if resolved < 0 {
                        return Err(Error::format(path, format!("line {}: bad index {i}", lineno + 1)));
                    }
                    f[k] = resolved as usize;
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_stl(path: &Path) -> Result<TriMesh> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let tris = if is_binary_stl(&bytes) {
        parse_binary_stl(&bytes).ok_or_else(|| Error::format(path, "truncated binary STL"))?
    } else {
        parse_ascii_stl(&bytes).map_err(|r| Error::format(path, r))?
    };
    Ok(weld(&tris))
}

fn is_binary_stl(bytes: &[u8]) -> bool {
    if bytes.len() < 84 {
        return false;
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    bytes.len() == 84 + n * 50
}

fn parse_binary_stl(bytes: &[u8]) -> Option<Vec<[Point3<f64>; 3]>> {
    let n = u32::from_le_bytes(bytes.get(80..84)?.try_into().ok()?) as usize;
    let mut tris = Vec::with_capacity(n);
    for i in 0..n {
        let rec = bytes.get(84 + i * 50..84 + (i + 1) * 50)?;
        let f = |o: usize| f32::from_le_bytes(rec[o..o + 4].try_into().unwrap()) as f64;
        let v = |k: usize| Point3::new(f(12 + 12 * k), f(16 + 12 * k), f(20 + 12 * k));
        tris.push([v(0), v(1), v(2)]);
    }
    Some(tris)
}

fn parse_ascii_stl(bytes: &[u8]) -> std::result::Result<Vec<[Point3<f64>; 3]>, String> {
    let text = std::str::from_utf8(bytes).map_err(|e| e.to_string())?;
    let mut tris = Vec::new();
    let mut cur: Vec<Point3<f64>> = Vec::new();
    for line in text.lines() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("vertex") => {
                let c: Vec<f64> = tok
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| e.to_string())?;
                if c.len() != 3 {
                    return Err("vertex needs 3 coordinates".into());
                }
                cur.push(Point3::new(c[0], c[1], c[2]));
            }
            Some("endloop") => {
                if cur.len() != 3 {
                    return Err(format!("facet with {} vertices; only triangles are supported", cur.len()));
                }
                tris.push([cur[0], cur[1], cur[2]]);
                cur.clear();
            }
            _ => {}
        }
    }
    Ok(tris)
}

/// Merges bit-identical vertex positions into shared indices.
fn weld(tris: &[[Point3<f64>; 3]]) -> TriMesh {
    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::with_capacity(tris.len());
    for t in tris {
        let f = t.map(|p| {
            let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
            *index.entry(key).or_insert_with(|| {
                vertices.push(p);
                vertices.len() - 1
            })
        });
        if f[0] != f[1] && f[1] != f[2] && f[0] != f[2] {
            faces.push(f);
        }
    }
    TriMesh { vertices, faces }
}

pub fn write_stl(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(&[0u8; 80])?;
    out.write_all(&(mesh.faces.len() as u32).to_le_bytes())?;
    for [a, b, c] in mesh.triangles() {
        let n = (b - a).cross(&(c - a));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        for v in [n.x, n.y, n.z] {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
        for p in [a, b, c] {
            for v in [p.x, p.y, p.z] {
                out.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        out.write_all(&[0u8; 2])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_roundtrip_and_quads_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let m = TriMesh::cuboid(Point3::origin(), Point3::new(1.0, 2.0, 3.0));
        let p = dir.path().join("box.obj");
        write_obj(&p, &m).unwrap();
        assert_eq!(read_mesh(&p).unwrap(), m);

        let q = dir.path().join("quad.obj");
        std::fs::write(&q, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert!(read_obj(&q).is_err());
    }

    #[test]
    fn stl_binary_and_ascii() {
        let dir = tempfile::tempdir().unwrap();
        let m = TriMesh::cuboid(Point3::origin(), Point3::new(1.0, 1.0, 1.0));
        let p = dir.path().join("box.stl");
        write_stl(&p, &m).unwrap();
        let back = read_mesh(&p).unwrap();
        assert_eq!(back.vertices.len(), 8);
        assert!(back.is_watertight());

        let a = dir.path().join("tri.stl");
        std::fs::write(
            &a,
            "solid t\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\nendloop\nendfacet\nendsolid t\n",
        )
        .unwrap();
        let t = read_mesh(&a).unwrap();
        assert_eq!(t.faces.len(), 1);
    }
}
