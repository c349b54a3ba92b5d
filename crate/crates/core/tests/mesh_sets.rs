//! Decomposition-set invariants: partitioning, coverage, band splits and the
//! diagnostic dump.

use hexsub::fem::{DofMap, ElementFamily};
use hexsub::mesh::build_grid;
use hexsub::sets::build_decomposition_sets;

fn family_list() -> [ElementFamily; 2] {
    [ElementFamily::ElasticityNodal, ElementFamily::MaxwellEdge]
}

#[test]
fn interior_gamma_partition() {
    for family in family_list() {
        let grid = build_grid(2, 4).unwrap();
        let dofmap = DofMap::new(family, grid.fine());
        let sets = build_decomposition_sets(&grid, &dofmap).unwrap();
        let mut seen = vec![0usize; dofmap.free_dofs];
        for &g in &sets.gamma {
            seen[g] += 1;
        }
        for sub in &sets.subdomain_interior {
            for &d in sub {
                seen[d] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1), "interiors + gamma must partition free dofs");
    }
}

#[test]
fn n2_m2_single_interior_vertex_sees_all_gamma() {
    let grid = build_grid(2, 2).unwrap();
    let dofmap = DofMap::new(ElementFamily::ElasticityNodal, grid.fine());
    let sets = build_decomposition_sets(&grid, &dofmap).unwrap();
    let center = grid.coarse_vertex_index([1, 1, 1]);
    // 19 free interface nodes x 3 components
    assert_eq!(sets.gamma.len(), 19 * 3);
    assert_eq!(sets.gamma_v_half[center], sets.gamma);
}

#[test]
fn gamma_coverage_n4_m4() {
    for family in family_list() {
        let grid = build_grid(4, 4).unwrap();
        let dofmap = DofMap::new(family, grid.fine());
        let sets = build_decomposition_sets(&grid, &dofmap).unwrap();
        // exhaustive: the union of the per-vertex interface sets equals gamma
        let mut mark = vec![false; dofmap.free_dofs];
        for v in 0..sets.gamma_v_half.len() {
            for &g in &sets.gamma_v_half[v] {
                mark[g] = true;
            }
        }
        let union: usize = mark.iter().filter(|&&b| b).count();
        assert_eq!(union, sets.gamma.len());
        assert!(sets.gamma.iter().all(|&g| mark[g]));
    }
}

#[test]
fn wire_band_splits_gamma_v_half() {
    for family in family_list() {
        let grid = build_grid(4, 4).unwrap();
        let dofmap = DofMap::new(family, grid.fine());
        let sets = build_decomposition_sets(&grid, &dofmap).unwrap();
        for v in 0..sets.gamma_v_half.len() {
            let w = &sets.w_v_half[v];
            let f = &sets.f_in_v[v];
            let mut merged: Vec<usize> = w.iter().chain(f.iter()).copied().collect();
            merged.sort_unstable();
            assert_eq!(&merged, &sets.gamma_v_half[v], "w ∪ f_in must equal gamma_v_half");
            // disjoint: merged sorted has no duplicates
            assert!(merged.windows(2).all(|p| p[0] < p[1]), "w and f_in must be disjoint");
        }
    }
}

#[test]
fn face_dofs_disjoint_and_off_band() {
    for family in family_list() {
        let grid = build_grid(2, 4).unwrap();
        let dofmap = DofMap::new(family, grid.fine());
        let sets = build_decomposition_sets(&grid, &dofmap).unwrap();
        assert_eq!(sets.faces.len(), 3 * 2 * 2 * (2 - 1));
        let mut seen = vec![false; dofmap.free_dofs];
        for f in &sets.faces {
            assert!(!f.dofs.is_empty());
            for &d in &f.dofs {
                assert!(!seen[d], "face dof sets must be pairwise disjoint");
                seen[d] = true;
                assert!(sets.gamma.binary_search(&d).is_ok());
            }
        }
    }
}

#[test]
fn interior_vertex_patch_size_matches_counts() {
    // nodal patch of an interior vertex: all (m+1)³ nodes of the closed cube
    let grid = build_grid(4, 4).unwrap();
    let m = grid.m;
    let dofmap = DofMap::new(ElementFamily::ElasticityNodal, grid.fine());
    let sets = build_decomposition_sets(&grid, &dofmap).unwrap();
    let v = grid.coarse_vertex_index([2, 2, 2]);
    assert_eq!(sets.vertex_patch[v].len(), 3 * (m + 1) * (m + 1) * (m + 1));
    assert_eq!(sets.omega_v_half_cells[v].len(), m * m * m);
    // per-subdomain interiors: 8 octants of (m/2)³ nodes
    assert_eq!(sets.omega_v_half_interior[v].len(), 8);
    for part in &sets.omega_v_half_interior[v] {
        assert_eq!(part.len(), 3 * (m / 2) * (m / 2) * (m / 2));
    }
}

#[test]
fn deterministic_sets_and_dump() {
    let grid = build_grid(2, 2).unwrap();
    let dofmap = DofMap::new(ElementFamily::ElasticityNodal, grid.fine());
    let a = build_decomposition_sets(&grid, &dofmap).unwrap();
    let b = build_decomposition_sets(&grid, &dofmap).unwrap();
    let mut da = Vec::new();
    let mut db = Vec::new();
    a.write_dump(&mut da).unwrap();
    b.write_dump(&mut db).unwrap();
    assert_eq!(da, db);
    let golden = include_str!("golden/decomp_n2_m2_elasticity.txt");
    assert_eq!(String::from_utf8(da).unwrap(), golden);
}
