//! Exhaustive enumeration of fixed polyominoes (distinct up to translation),
//! used as the brute-force oracle for the isoperimetric floor.

use std::collections::HashSet;

use crate::tile::Tile;

/// All fixed polyominoes of exactly `n` tiles, each translated so its
/// bounding box corner sits at the origin and its tiles sorted in (y, x)
/// order. Counts for n = 1.. follow 1, 2, 6, 19, 63, 216, 760, 2725, ...
pub fn enumerate_fixed(n: usize) -> Vec<Vec<Tile>> {
    assert!(n >= 1);
    let mut current: Vec<Vec<Tile>> = vec![vec![Tile::new(0, 0)]];
    for _ in 1..n {
        let mut next: HashSet<Vec<Tile>> = HashSet::new();
        for poly in &current {
            let occupied: HashSet<Tile> = poly.iter().copied().collect();
            for tile in poly {
                for free in tile.neighbors4() {
                    if !occupied.contains(&free) {
                        let mut grown: Vec<Tile> = poly.clone();
                        grown.push(free);
                        next.insert(canonical(grown));
                    }
                }
            }
        }
        current = next.into_iter().collect();
    }
    current.sort();
    current
}

fn canonical(mut tiles: Vec<Tile>) -> Vec<Tile> {
    let min_x = tiles.iter().map(|t| t.x).min().unwrap();
    let min_y = tiles.iter().map(|t| t.y).min().unwrap();
    for t in &mut tiles {
        t.x -= min_x;
        t.y -= min_y;
    }
    tiles.sort();
    tiles
}
