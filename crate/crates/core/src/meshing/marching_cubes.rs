use std::sync::OnceLock;

use nalgebra::Point3;

use crate::mesh::TriMesh;
use crate::voxel::ScalarGrid;

// Cube corner `k` sits at offset (k & 1, k >> 1 & 1, k >> 2 & 1).
fn corner_offset(k: usize) -> [usize; 3] {
    [k & 1, (k >> 1) & 1, (k >> 2) & 1]
}

/// The 12 cube edges as (low corner, high corner, axis).
fn cube_edges() -> [(usize, usize, usize); 12] {
    let mut edges = [(0, 0, 0); 12];
    let mut n = 0;
    for axis in 0..3 {
        for k in 0..8 {
            if k >> axis & 1 == 0 {
                edges[n] = (k, k | 1 << axis, axis);
                n += 1;
            }
        }
    }
    edges
}

fn edge_between(a: usize, b: usize) -> usize {
    let (lo, hi) = (a.min(b), a.max(b));
    cube_edges()
        .iter()
        .position(|&(c0, c1, _)| c0 == lo && c1 == hi)
        .expect("corners share an edge")
}

/// Triangles of one corner mask. Indices below 12 are cube edges; index
/// `CENTER + k` is an extra vertex at the centroid of `centers[k]`.
struct Case {
    tris: Vec<[u8; 3]>,
    centers: Vec<Vec<u8>>,
}

const CENTER: u8 = 12;

/// Case table: for each of the 256 inside/outside corner masks, the
/// triangles as triples of cube-edge indices.
///
/// Built from a face-local rule so neighbouring cubes always agree on a
/// shared face: on each face the crossing points are joined by segments
/// that cut off inside corners (diagonally opposite inside corners stay
/// separated), each segment is directed so the inside corner lies to its
/// right when viewed from outside the cube, and the directed segments of a
/// cube chain into closed loops. A loop is fan-triangulated from an apex
/// whose diagonals never lie in a cube face (the neighbour across that face
/// could produce the same edge); when no such apex exists the loop is
/// fanned around a centroid vertex.
fn case_table() -> &'static [Case; 256] {
    static TABLE: OnceLock<[Case; 256]> = OnceLock::new();
    TABLE.get_or_init(|| std::array::from_fn(build_case))
}

// Bit set of the faces (axis * 2 + side) containing an edge.
fn edge_faces(e: usize) -> u8 {
    let (c0, _, axis) = cube_edges()[e];
    let o = corner_offset(c0);
    (0..3).filter(|&a| a != axis).map(|a| 1u8 << (a * 2 + o[a])).fold(0, |m, b| m | b)
}

fn build_case(mask: usize) -> Case {
    let inside = |k: usize| mask >> k & 1 == 1;
    let pos = |k: usize| {
        let o = corner_offset(k);
        [o[0] as f64, o[1] as f64, o[2] as f64]
    };
    let edge_mid = |e: usize| {
        let (a, b, _) = cube_edges()[e];
        let (pa, pb) = (pos(a), pos(b));
        [0, 1, 2].map(|i| 0.5 * (pa[i] + pb[i]))
    };

    let mut next = [usize::MAX; 12];
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in 0..2 {
            let base = side << axis;
            let ring = [base, base | 1 << u, base | 1 << u | 1 << v, base | 1 << v];
            let normal = {
                let mut n = [0.0; 3];
                n[axis] = if side == 1 { 1.0 } else { -1.0 };
                n
            };
            let crossings: Vec<usize> = (0..4)
                .filter(|&i| inside(ring[i]) != inside(ring[(i + 1) % 4]))
                .collect();
            let mut segments: Vec<(usize, usize, usize)> = Vec::new(); // (edge, edge, inside corner)
            match crossings.len() {
                0 => {}
                2 => {
                    let e0 = edge_between(ring[crossings[0]], ring[(crossings[0] + 1) % 4]);
                    let e1 = edge_between(ring[crossings[1]], ring[(crossings[1] + 1) % 4]);
                    let c = *ring.iter().find(|&&k| inside(k)).unwrap();
                    segments.push((e0, e1, c));
                }
                4 => {
                    for i in 0..4 {
                        if inside(ring[i]) {
                            let prev = edge_between(ring[(i + 3) % 4], ring[i]);
                            let nxt = edge_between(ring[i], ring[(i + 1) % 4]);
                            segments.push((prev, nxt, ring[i]));
                        }
                    }
                }
                _ => unreachable!("a square has an even number of sign changes"),
            }
            for (e0, e1, c) in segments {
                let (p, q, cp) = (edge_mid(e0), edge_mid(e1), pos(c));
                let d = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
                let w = [cp[0] - p[0], cp[1] - p[1], cp[2] - p[2]];
                let cross = [
                    d[1] * w[2] - d[2] * w[1],
                    d[2] * w[0] - d[0] * w[2],
                    d[0] * w[1] - d[1] * w[0],
                ];
                let s: f64 = (0..3).map(|i| cross[i] * normal[i]).sum();
                let (from, to) = if s < 0.0 { (e0, e1) } else { (e1, e0) };
                debug_assert_eq!(next[from], usize::MAX);
                next[from] = to;
            }
        }
    }

    let mut tris = Vec::new();
    let mut centers = Vec::new();
    let mut seen = [false; 12];
    for start in 0..12 {
        if next[start] == usize::MAX || seen[start] {
            continue;
        }
        let mut lp = vec![start];
        seen[start] = true;
        let mut cur = next[start];
        while cur != start {
            seen[cur] = true;
            lp.push(cur);
            cur = next[cur];
        }
        let n = lp.len();
        let apex = (0..n).find(|&r| (2..n - 1).all(|i| edge_faces(lp[r]) & edge_faces(lp[(r + i) % n]) == 0));
        match apex {
            Some(r) => {
                for i in 1..n - 1 {
                    tris.push([lp[r] as u8, lp[(r + i) % n] as u8, lp[(r + i + 1) % n] as u8]);
                }
            }
            None => {
                let c = CENTER + centers.len() as u8;
                for i in 0..n {
                    tris.push([c, lp[i] as u8, lp[(i + 1) % n] as u8]);
                }
                centers.push(lp.iter().map(|&e| e as u8).collect());
            }
        }
    }
    Case { tris, centers }
}

// Interpolation parameters are kept off the cube corners so that no two
// edge vertices coincide and no face has zero area.
const T_CLAMP: f64 = 1e-3;

/// Marching cubes over the cells spanned by voxel centers. Values strictly
/// greater than `iso` are inside; triangles face from inside to outside.
/// Vertices are in world coordinates of the field's frame.
pub fn marching_cubes(field: &ScalarGrid, iso: f64) -> TriMesh {
    let frame = field.frame();
    let [dx, dy, dz] = frame.dims;
    let mut mesh = TriMesh::default();
    if dx < 2 || dy < 2 || dz < 2 {
        return mesh;
    }
    let table = case_table();
    let edges = cube_edges();
    let values = field.values();
    let inside = |i: usize| values[i] > iso;
    // One vertex per lattice edge: slot = 3 * linear(start point) + axis.
    let mut vertex_of = vec![u32::MAX; 3 * frame.len()];

    for z in 0..dz - 1 {
        for y in 0..dy - 1 {
            for x in 0..dx - 1 {
                let corner = |k: usize| {
                    let o = corner_offset(k);
                    [x + o[0], y + o[1], z + o[2]]
                };
                let mut mask = 0usize;
                for k in 0..8 {
                    if inside(frame.linear(corner(k))) {
                        mask |= 1 << k;
                    }
                }
                if mask == 0 || mask == 255 {
                    continue;
                }
                let case = &table[mask];
                let mut edge_vertex = |e: usize, mesh: &mut TriMesh| {
                    let (c0, c1, axis) = edges[e];
                    let p0 = corner(c0);
                    let i0 = frame.linear(p0);
                    let slot = 3 * i0 + axis;
                    if vertex_of[slot] == u32::MAX {
                        let i1 = frame.linear(corner(c1));
                        let (a, b) = (values[i0], values[i1]);
                        let t = ((iso - a) / (b - a)).clamp(T_CLAMP, 1.0 - T_CLAMP);
                        let mut p: Point3<f64> = frame.voxel_center(p0);
                        p[axis] += t * frame.voxel_size;
                        vertex_of[slot] = mesh.vertices.len() as u32;
                        mesh.vertices.push(p);
                    }
                    vertex_of[slot] as usize
                };
                let mut center_ids = [0usize; 4];
                for (k, lp) in case.centers.iter().enumerate() {
                    let ids: Vec<usize> = lp.iter().map(|&e| edge_vertex(e as usize, &mut mesh)).collect();
                    let sum = ids.iter().fold(nalgebra::Vector3::zeros(), |acc, &i| acc + mesh.vertices[i].coords);
                    center_ids[k] = mesh.vertices.len();
                    mesh.vertices.push(Point3::from(sum / ids.len() as f64));
                }
                for tri in &case.tris {
                    let f = tri.map(|e| {
                        if e >= CENTER {
                            center_ids[(e - CENTER) as usize]
                        } else {
                            edge_vertex(e as usize, &mut mesh)
                        }
                    });
                    mesh.faces.push(f);
                }
            }
        }
    }
    mesh
}

/// Marching cubes on the field padded with one layer of outside values,
/// so level sets touching the frame boundary still close up.
pub fn marching_cubes_closed(field: &ScalarGrid, iso: f64) -> TriMesh {
    let (lo, _) = field.min_max();
    let fill = lo.min(iso) - 1.0;
    marching_cubes(&field.padded(1, fill), iso)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::{GridFrame, VoxelGrid};

    #[test]
    fn table_faces_close_up_per_case() {
        // Every table entry is a union of closed oriented loops; the
        // complement case must be the same surface with flipped orientation.
        for mask in 1..255usize {
            let t = &case_table()[mask].tris;
            let c = &case_table()[255 - mask].tris;
            assert!(!t.is_empty());
            let mut uses = [0i32; 16];
            for tri in t {
                for &e in tri {
                    uses[e as usize] += 1;
                }
            }
            let crossing = (0..12).filter(|&e| uses[e] > 0).count();
            let expected = cube_edges()
                .iter()
                .filter(|&&(a, b, _)| (mask >> a & 1) != (mask >> b & 1))
                .count();
            assert_eq!(crossing, expected, "mask {mask}");
            assert!(!c.is_empty());
        }
        assert!(case_table()[0].tris.is_empty());
        assert!(case_table()[255].tris.is_empty());
    }

    #[test]
    fn random_binary_fields_are_closed_manifolds() {
        use rand::Rng;
        let frame = GridFrame::new([4; 3], 0.1, Point3::origin()).unwrap();
        for seed in 0..300 {
            let mut rng = crate::rng::seeded(seed);
            let g = VoxelGrid::from_fn(frame, |_| rng.random_bool(0.5));
            let m = marching_cubes_closed(&g.to_scalar(), 0.5);
            assert!(m.is_watertight() && m.vertices_manifold(), "seed {seed}");
        }
    }

    #[test]
    fn constant_field_is_empty() {
        let f = GridFrame::new([5; 3], 0.1, Point3::origin()).unwrap();
        assert!(marching_cubes(&ScalarGrid::constant(f, 0.0), 0.5).is_empty());
        assert!(marching_cubes_closed(&ScalarGrid::constant(f, 0.0), 0.5).is_empty());
    }

    #[test]
    fn single_voxel_gives_closed_octahedron() {
        let f = GridFrame::new([3; 3], 1.0, Point3::origin()).unwrap();
        let mut g = VoxelGrid::empty(f);
        g.set([1, 1, 1], true);
        let m = marching_cubes(&g.to_scalar(), 0.5);
        assert_eq!(m.vertices.len(), 6);
        assert_eq!(m.faces.len(), 8);
        assert!(m.is_watertight());
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.volume() > 0.0);
        // Octahedron with vertices half a voxel from the center: volume 4/3 · 0.5³.
        assert!((m.volume() - 4.0 / 3.0 * 0.125).abs() < 1e-9);
    }

    #[test]
    fn diagonal_voxels_stay_separate() {
        let f = GridFrame::new([4; 3], 1.0, Point3::origin()).unwrap();
        let mut g = VoxelGrid::empty(f);
        g.set([1, 1, 1], true);
        g.set([2, 2, 1], true);
        let m = marching_cubes(&g.to_scalar(), 0.5);
        assert!(m.is_watertight());
        assert!(m.vertices_manifold());
        assert_eq!(m.components(), 2);
        assert_eq!(m.euler_characteristic(), 4);
    }

    #[test]
    fn boundary_touching_solid_closes_with_padding() {
        let f = GridFrame::new([3; 3], 1.0, Point3::origin()).unwrap();
        let full = ScalarGrid::constant(f, 1.0);
        assert!(marching_cubes(&full, 0.5).is_empty());
        let m = marching_cubes_closed(&full, 0.5);
        assert!(m.is_watertight());
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn sphere_field_matches_analytic_surface() {
        let n = 64;
        let r = 0.4;
        let c = Point3::new(0.5, 0.5, 0.5);
        let f = GridFrame::new([n; 3], 1.0 / n as f64, Point3::origin()).unwrap();
        let field = ScalarGrid::from_fn(f, |p| r - (p - c).norm());
        let m = marching_cubes(&field, 0.0);
        assert!(m.is_watertight());
        assert_eq!(m.euler_characteristic(), 2);
        let h = f.voxel_size;
        for v in &m.vertices {
            assert!(((v - c).norm() - r).abs() <= 0.5 * h);
        }
        let area = 4.0 * std::f64::consts::PI * r * r;
        assert!((m.area() - area).abs() / area < 0.10);
        assert!(m.volume() > 0.0);
    }
}
