//! Grid tiles and neighborhoods.

use std::cmp::Ordering;

/// A tile of the integer grid. Ordering is lexicographic by (y, x), which is
/// the canonical iteration order everywhere in this crate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Tile {
    pub x: i64,
    pub y: i64,
}

impl Tile {
    pub const fn new(x: i64, y: i64) -> Self {
        Tile { x, y }
    }

    /// The four edge-adjacent neighbors (Manhattan distance 1).
    pub fn neighbors4(self) -> [Tile; 4] {
        [
            Tile::new(self.x + 1, self.y),
            Tile::new(self.x - 1, self.y),
            Tile::new(self.x, self.y + 1),
            Tile::new(self.x, self.y - 1),
        ]
    }

    /// The eight surrounding neighbors (Chebyshev distance 1).
    pub fn neighbors8(self) -> [Tile; 8] {
        [
            Tile::new(self.x - 1, self.y - 1),
            Tile::new(self.x, self.y - 1),
            Tile::new(self.x + 1, self.y - 1),
            Tile::new(self.x - 1, self.y),
            Tile::new(self.x + 1, self.y),
            Tile::new(self.x - 1, self.y + 1),
            Tile::new(self.x, self.y + 1),
            Tile::new(self.x + 1, self.y + 1),
        ]
    }

    pub fn manhattan(self, other: Tile) -> u64 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn chebyshev(self, other: Tile) -> u64 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

impl Ord for Tile {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Tile {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All tiles reachable from a center within n grid steps, center excluded:
/// the Manhattan ball of radius n minus its center. Carries 2n(n+1) members.
#[derive(Clone, Debug)]
pub struct NeighborhoodSphere {
    pub center: Tile,
    pub radius: u32,
    pub members: Vec<Tile>,
}

impl NeighborhoodSphere {
    /// Members are listed in (distance, y, x) order.
    pub fn new(center: Tile, radius: u32) -> Self {
        let r = radius as i64;
        let mut members = Vec::with_capacity((2 * r * (r + 1)) as usize);
        for dist in 1..=r {
            for dy in -dist..=dist {
                let rem = dist - dy.abs();
                if rem == 0 {
                    members.push(Tile::new(center.x, center.y + dy));
                } else {
                    members.push(Tile::new(center.x - rem, center.y + dy));
                    members.push(Tile::new(center.x + rem, center.y + dy));
                }
            }
        }
        members.sort_by_key(|t| (center.manhattan(*t), t.y, t.x));
        NeighborhoodSphere {
            center,
            radius,
            members,
        }
    }
}
