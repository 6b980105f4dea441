use super::VoxelGrid;
use crate::error::Result;

/// Voxelwise OR of two aligned grids: the shared occupancy map.
pub fn merge_grids(depth: &VoxelGrid, tactile: &VoxelGrid) -> Result<VoxelGrid> {
    depth.frame().ensure_aligned(tactile.frame())?;
    let words = depth
        .words()
        .iter()
        .zip(tactile.words())
        .map(|(a, b)| a | b)
        .collect();
    Ok(VoxelGrid::from_words(*depth.frame(), words))
}

/// Intersection over union. Two empty grids are identical sets, so 1.0.
pub fn jaccard(a: &VoxelGrid, b: &VoxelGrid) -> Result<f64> {
    a.frame().ensure_aligned(b.frame())?;
    let (mut inter, mut union) = (0u64, 0u64);
    for (x, y) in a.words().iter().zip(b.words()) {
        inter += (x & y).count_ones() as u64;
        union += (x | y).count_ones() as u64;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxel::GridFrame;
    use nalgebra::Point3;
    use proptest::prelude::*;

    fn frame() -> GridFrame {
        GridFrame::new([4, 4, 4], 0.01, Point3::origin()).unwrap()
    }

    fn grid(cells: &[[usize; 3]]) -> VoxelGrid {
        let mut g = VoxelGrid::empty(frame());
        for &c in cells {
            g.set(c, true);
        }
        g
    }

    #[test]
    fn merge_examples() {
        let a = grid(&[[1, 1, 1]]);
        let b = grid(&[[2, 2, 2]]);
        assert_eq!(merge_grids(&a, &b).unwrap(), grid(&[[1, 1, 1], [2, 2, 2]]));
        assert_eq!(merge_grids(&a, &a).unwrap(), a);
        assert_eq!(merge_grids(&a, &VoxelGrid::empty(frame())).unwrap(), a);
    }

    #[test]
    fn jaccard_examples() {
        let a = grid(&[[1, 1, 1], [0, 0, 0]]);
        assert_eq!(jaccard(&a, &a).unwrap(), 1.0);
        assert_eq!(jaccard(&a, &grid(&[[3, 3, 3]])).unwrap(), 0.0);
        let e = VoxelGrid::empty(frame());
        assert_eq!(jaccard(&e, &e).unwrap(), 1.0);

        // |a| = 8, |b| = 8, overlap 4.
        let a = VoxelGrid::from_fn(frame(), |[x, y, z]| x < 2 && y < 2 && z < 2);
        let b = VoxelGrid::from_fn(frame(), |[x, y, z]| x < 2 && y < 2 && (1..3).contains(&z));
        assert!((jaccard(&a, &b).unwrap() - 4.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn frame_mismatch_is_an_error() {
        let other = GridFrame::new([4, 4, 4], 0.02, Point3::origin()).unwrap();
        let a = VoxelGrid::empty(frame());
        let b = VoxelGrid::empty(other);
        assert!(merge_grids(&a, &b).is_err());
        assert!(jaccard(&a, &b).is_err());
    }

    fn arb_grid() -> impl Strategy<Value = VoxelGrid> {
        proptest::collection::vec(any::<bool>(), 64).prop_map(|bits| {
            let mut g = VoxelGrid::empty(frame());
            for (i, b) in bits.into_iter().enumerate() {
                g.set_linear(i, b);
            }
            g
        })
    }

    proptest! {
        #[test]
        fn jaccard_symmetric_and_bounded(a in arb_grid(), b in arb_grid()) {
            let ab = jaccard(&a, &b).unwrap();
            prop_assert_eq!(ab, jaccard(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn merge_is_a_semilattice(a in arb_grid(), b in arb_grid(), c in arb_grid()) {
            let ab = merge_grids(&a, &b).unwrap();
            prop_assert_eq!(&ab, &merge_grids(&b, &a).unwrap());
            prop_assert_eq!(
                merge_grids(&ab, &c).unwrap(),
                merge_grids(&a, &merge_grids(&b, &c).unwrap()).unwrap()
            );
            prop_assert_eq!(&merge_grids(&a, &a).unwrap(), &a);
            prop_assert!(a.is_subset_of(&ab).unwrap());
            prop_assert!(b.is_subset_of(&ab).unwrap());
        }
    }
}
