//! The contaminated region: a sparse set of tiles on Z^2 with cached
//! boundary, potential boundary, centroid sums, and Euler characteristic.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::tile::Tile;
use crate::{Error, Result};

/// Contaminated region state at one time step.
///
/// `boundary` caches the tiles with at least one non-contaminated 8-neighbor;
/// `potential` caches the clean tiles 4-adjacent to a boundary tile. Both are
/// maintained incrementally on every insert/remove and always equal their
/// from-scratch recomputation. The Euler counts (vertices, edges, faces of the
/// union of closed unit squares) give the hole count in O(1).
#[derive(Clone, Debug)]
pub struct RegionState {
    tiles: HashSet<Tile>,
    step: u64,
    boundary: HashSet<Tile>,
    potential: BTreeSet<Tile>,
    sum_x: i128,
    sum_y: i128,
    euler_v: i64,
    euler_e: i64,
    euler_f: i64,
}

impl RegionState {
    pub fn empty() -> Self {
        RegionState {
            tiles: HashSet::new(),
            step: 0,
            boundary: HashSet::new(),
            potential: BTreeSet::new(),
            sum_x: 0,
            sum_y: 0,
            euler_v: 0,
            euler_e: 0,
            euler_f: 0,
        }
    }

    pub fn new(tiles: impl IntoIterator<Item = Tile>) -> Self {
        let mut region = RegionState::empty();
        for t in tiles {
            region.insert(t);
        }
        region
    }

    pub fn size(&self) -> u64 {
        self.tiles.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn advance_step(&mut self) {
        self.step += 1;
    }

    pub fn contains(&self, t: Tile) -> bool {
        self.tiles.contains(&t)
    }

    pub fn tiles(&self) -> &HashSet<Tile> {
        &self.tiles
    }

    /// Tiles of the region with at least one non-contaminated 8-neighbor.
    pub fn boundary(&self) -> &HashSet<Tile> {
        &self.boundary
    }

    /// Clean tiles 4-adjacent to a boundary tile, in (y, x) order.
    pub fn potential_boundary(&self) -> &BTreeSet<Tile> {
        &self.potential
    }

    /// (sum of x, sum of y) over all tiles; divide by size for the centroid.
    pub fn centroid_sums(&self) -> (i128, i128) {
        (self.sum_x, self.sum_y)
    }

    pub fn insert(&mut self, v: Tile) -> bool {
        if self.tiles.contains(&v) {
            return false;
        }
        self.euler_insert(v);
        self.tiles.insert(v);
        self.sum_x += v.x as i128;
        self.sum_y += v.y as i128;
        self.refresh_after_flip(v);
        true
    }

    pub fn remove(&mut self, v: Tile) -> bool {
        if !self.tiles.remove(&v) {
            return false;
        }
        self.euler_remove(v);
        self.sum_x -= v.x as i128;
        self.sum_y -= v.y as i128;
        self.refresh_after_flip(v);
        true
    }

    /// Number of holes of the region: 1 minus the Euler characteristic.
    /// Meaningful for a nonempty 4-connected region; an empty region has 0.
    pub fn holes(&self) -> i64 {
        if self.tiles.is_empty() {
            0
        } else {
            1 - (self.euler_v - self.euler_e + self.euler_f)
        }
    }

    /// Whether the tiles form a single 4-connected component (or are empty).
    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.tiles.iter().next() else {
            return true;
        };
        self.flood_count(start, None) == self.tiles.len()
    }

    /// Whether removing `v` keeps every remaining tile in one 4-connected
    /// component. A local window test settles the common case; a full flood
    /// fill settles the rest, so the answer is exact.
    ///
    /// A singleton region's tile is non-critical by convention.
    pub fn is_critical(&self, v: Tile) -> Result<bool> {
        if !self.tiles.contains(&v) {
            return Err(Error::NotContaminated { x: v.x, y: v.y });
        }
        if self.tiles.len() == 1 {
            return Ok(false);
        }
        // Contaminated 8-neighbors of v forming one 4-connected chain inside
        // the window (orthogonal neighbors may bridge through a contaminated
        // diagonal) means any path through v reroutes locally, so removal is
        // safe without looking further.
        let local: Vec<Tile> = v
            .neighbors8()
            .iter()
            .copied()
            .filter(|n| self.tiles.contains(n))
            .collect();
        if !local.is_empty() && Self::window_component_count(&local) == 1 {
            return Ok(false);
        }
        let anchors: Vec<Tile> = v
            .neighbors4()
            .iter()
            .copied()
            .filter(|n| self.tiles.contains(n))
            .collect();
        // A simple path through v enters and leaves by two distinct orthogonal
        // neighbors, so with at most one of them contaminated nothing routes
        // through v.
        if anchors.len() <= 1 {
            return Ok(false);
        }
        Ok(!self.anchors_reconnect(v, &anchors))
    }

    /// Whether all `anchors` stay 4-connected once `skip` is removed.
    ///
    /// Round-robin floods, one island per anchor, merging islands whose
    /// frontiers touch. All islands merged proves reconnection; an island
    /// exhausted while still separate proves a split. Work scales with the
    /// smallest piece that settles the answer rather than with region size.
    fn anchors_reconnect(&self, skip: Tile, anchors: &[Tile]) -> bool {
        fn find(parent: &mut [usize; 4], i: usize) -> usize {
            let mut root = i;
            while parent[root] != root {
                root = parent[root];
            }
            let mut walk = i;
            while parent[walk] != root {
                let next = parent[walk];
                parent[walk] = root;
                walk = next;
            }
            root
        }

        let m = anchors.len();
        let mut parent = [0usize, 1, 2, 3];
        let mut owner: HashMap<Tile, usize> = HashMap::with_capacity(32);
        let mut queues: Vec<VecDeque<Tile>> = vec![VecDeque::new(); m];
        for (i, &a) in anchors.iter().enumerate() {
            owner.insert(a, i);
            queues[i].push_back(a);
        }
        loop {
            let root0 = find(&mut parent, 0);
            if (1..m).all(|i| find(&mut parent, i) == root0) {
                return true;
            }
            for i in 0..m {
                let root = find(&mut parent, i);
                if (0..m)
                    .filter(|&j| find(&mut parent, j) == root)
                    .all(|j| queues[j].is_empty())
                {
                    return false;
                }
            }
            for (i, queue) in queues.iter_mut().enumerate() {
                let Some(t) = queue.pop_front() else {
                    continue;
                };
                for n in t.neighbors4() {
                    if n == skip || !self.tiles.contains(&n) {
                        continue;
                    }
                    match owner.entry(n) {
                        Entry::Vacant(slot) => {
                            slot.insert(i);
                            queue.push_back(n);
                        }
                        Entry::Occupied(slot) => {
                            let ri = find(&mut parent, i);
                            let rj = find(&mut parent, *slot.get());
                            parent[ri] = rj;
                        }
                    }
                }
            }
        }
    }

    fn window_component_count(local: &[Tile]) -> usize {
        let mut seen = [false; 8];
        let mut components = 0;
        for i in 0..local.len() {
            if seen[i] {
                continue;
            }
            components += 1;
            let mut stack = vec![i];
            seen[i] = true;
            while let Some(a) = stack.pop() {
                for b in 0..local.len() {
                    if !seen[b] && local[a].manhattan(local[b]) == 1 {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        components
    }

    fn flood_count(&self, start: Tile, skip: Option<Tile>) -> usize {
        let mut seen: HashSet<Tile> = HashSet::with_capacity(self.tiles.len());
        let mut queue = VecDeque::new();
        seen.insert(start);
        queue.push_back(start);
        while let Some(t) = queue.pop_front() {
            for n in t.neighbors4() {
                if Some(n) != skip && self.tiles.contains(&n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen.len()
    }

    fn is_boundary_now(&self, u: Tile) -> bool {
        self.tiles.contains(&u) && u.neighbors8().iter().any(|n| !self.tiles.contains(n))
    }

    fn is_potential_now(&self, u: Tile) -> bool {
        !self.tiles.contains(&u) && u.neighbors4().iter().any(|n| self.boundary.contains(n))
    }

    /// Re-derives cache membership around a membership flip at `v`. Boundary
    /// status can change only inside v's 3x3 window; potential status only for
    /// v itself and the 4-neighbors of tiles whose boundary status changed.
    fn refresh_after_flip(&mut self, v: Tile) {
        let mut changed: Vec<Tile> = Vec::with_capacity(9);
        let mut visit = |region: &mut Self, u: Tile| {
            let was = region.boundary.contains(&u);
            let now = region.is_boundary_now(u);
            if was != now {
                if now {
                    region.boundary.insert(u);
                } else {
                    region.boundary.remove(&u);
                }
                changed.push(u);
            }
        };
        visit(self, v);
        for u in v.neighbors8() {
            visit(self, u);
        }

        let mut candidates: Vec<Tile> = Vec::with_capacity(1 + 4 * changed.len());
        candidates.push(v);
        for w in &changed {
            candidates.extend(w.neighbors4());
        }
        candidates.sort();
        candidates.dedup();
        for u in candidates {
            let was = self.potential.contains(&u);
            let now = self.is_potential_now(u);
            if was != now {
                if now {
                    self.potential.insert(u);
                } else {
                    self.potential.remove(&u);
                }
            }
        }
    }

    /// Called before `v` joins `tiles`.
    fn euler_insert(&mut self, v: Tile) {
        let present = v
            .neighbors4()
            .iter()
            .filter(|n| self.tiles.contains(n))
            .count() as i64;
        self.euler_e += 4 - present;
        self.euler_f += 1;
        self.euler_v += self.fresh_corner_count(v);
    }

    /// Called after `v` left `tiles`.
    fn euler_remove(&mut self, v: Tile) {
        let present = v
            .neighbors4()
            .iter()
            .filter(|n| self.tiles.contains(n))
            .count() as i64;
        self.euler_e -= 4 - present;
        self.euler_f -= 1;
        self.euler_v -= self.fresh_corner_count(v);
    }

    /// Corners of v's unit square incident to no other present square.
    fn fresh_corner_count(&self, v: Tile) -> i64 {
        let mut count = 0;
        for (sx, sy) in [(0i64, 0i64), (1, 0), (0, 1), (1, 1)] {
            let dx = 2 * sx - 1;
            let dy = 2 * sy - 1;
            let others = [
                Tile::new(v.x + dx, v.y),
                Tile::new(v.x, v.y + dy),
                Tile::new(v.x + dx, v.y + dy),
            ];
            if others.iter().all(|t| !self.tiles.contains(t)) {
                count += 1;
            }
        }
        count
    }

    /// Asserts every cached structure equals its from-scratch recomputation.
    /// Test support; panics with the first discrepancy found.
    pub fn check_consistency(&self) {
        let mut boundary = HashSet::new();
        let mut potential = BTreeSet::new();
        for &t in &self.tiles {
            if t.neighbors8().iter().any(|n| !self.tiles.contains(n)) {
                boundary.insert(t);
            }
        }
        for &b in &boundary {
            for n in b.neighbors4() {
                if !self.tiles.contains(&n) {
                    potential.insert(n);
                }
            }
        }
        assert_eq!(self.boundary, boundary, "boundary cache diverged");
        assert_eq!(self.potential, potential, "potential cache diverged");

        let sum_x: i128 = self.tiles.iter().map(|t| t.x as i128).sum();
        let sum_y: i128 = self.tiles.iter().map(|t| t.y as i128).sum();
        assert_eq!(
            (self.sum_x, self.sum_y),
            (sum_x, sum_y),
            "centroid sums diverged"
        );

        let mut corners: HashSet<(i64, i64)> = HashSet::new();
        let mut edges: HashSet<(i64, i64, bool)> = HashSet::new();
        for &t in &self.tiles {
            for (sx, sy) in [(0i64, 0i64), (1, 0), (0, 1), (1, 1)] {
                corners.insert((t.x + sx, t.y + sy));
            }
            edges.insert((t.x, t.y, true));
            edges.insert((t.x, t.y + 1, true));
            edges.insert((t.x, t.y, false));
            edges.insert((t.x + 1, t.y, false));
        }
        assert_eq!(self.euler_v, corners.len() as i64, "vertex count diverged");
        assert_eq!(self.euler_e, edges.len() as i64, "edge count diverged");
        assert_eq!(self.euler_f, self.tiles.len() as i64, "face count diverged");
    }
}

/// Floor of 2*sqrt(2(s - k) - 1): the minimal potential-boundary size of any
/// region of s tiles after k removals, attained by the digital sphere.
pub fn sphere_potential_size(s: u64, k: u64) -> Result<u64> {
    if s <= k {
        return Err(Error::BoundDomain { s, k });
    }
    let m = 2 * (s - k) - 1;
    Ok((4u128 * m as u128).isqrt() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tile(x: i64, y: i64) -> Tile {
        Tile::new(x, y)
    }

    fn block(w: i64, h: i64) -> Vec<Tile> {
        (0..w)
            .flat_map(|x| (0..h).map(move |y| tile(x, y)))
            .collect()
    }

    #[test]
    fn boundary_of_singleton_is_itself() {
        let r = RegionState::new([tile(0, 0)]);
        assert_eq!(r.boundary().len(), 1);
        assert!(r.boundary().contains(&tile(0, 0)));
    }

    #[test]
    fn boundary_of_3x3_is_the_perimeter() {
        let r = RegionState::new(block(3, 3));
        assert_eq!(r.boundary().len(), 8);
        assert!(!r.boundary().contains(&tile(1, 1)));
    }

    #[test]
    fn boundary_of_empty_is_empty() {
        let r = RegionState::empty();
        assert!(r.boundary().is_empty());
        assert!(r.potential_boundary().is_empty());
    }

    #[test]
    fn potential_of_singleton_is_its_four_neighbors() {
        let r = RegionState::new([tile(0, 0)]);
        let expect: BTreeSet<Tile> = [tile(1, 0), tile(-1, 0), tile(0, 1), tile(0, -1)]
            .into_iter()
            .collect();
        assert_eq!(r.potential_boundary(), &expect);
    }

    #[test]
    fn potential_of_2x2_is_the_edge_ring() {
        let r = RegionState::new(block(2, 2));
        assert_eq!(r.potential_boundary().len(), 8);
        for t in r.potential_boundary() {
            assert_eq!(r.tiles().iter().map(|u| u.manhattan(*t)).min().unwrap(), 1);
            assert!(t.x == -1 || t.x == 2 || t.y == -1 || t.y == 2);
            assert!(!(t.x == -1 && t.y == -1));
        }
    }

    #[test]
    fn radius_two_sphere_counts() {
        let tiles: Vec<Tile> = (-2i64..=2)
            .flat_map(|y| (-2i64..=2).map(move |x| tile(x, y)))
            .filter(|t| t.x.abs() + t.y.abs() <= 2)
            .collect();
        let r = RegionState::new(tiles);
        assert_eq!(r.size(), 13);
        assert_eq!(r.boundary().len(), 12);
        assert_eq!(r.potential_boundary().len(), 12);
    }

    #[test]
    fn critical_middle_of_bar() {
        let r = RegionState::new([tile(0, 0), tile(1, 0), tile(2, 0)]);
        assert!(r.is_critical(tile(1, 0)).unwrap());
        assert!(!r.is_critical(tile(0, 0)).unwrap());
        assert!(!r.is_critical(tile(2, 0)).unwrap());
    }

    #[test]
    fn critical_corner_of_3x3_is_false() {
        let r = RegionState::new(block(3, 3));
        assert!(!r.is_critical(tile(0, 0)).unwrap());
    }

    #[test]
    fn critical_center_of_plus_is_true() {
        let r = RegionState::new([tile(0, 0), tile(1, 0), tile(-1, 0), tile(0, 1), tile(0, -1)]);
        assert!(r.is_critical(tile(0, 0)).unwrap());
    }

    #[test]
    fn critical_on_clean_tile_errors() {
        let r = RegionState::new([tile(0, 0)]);
        assert!(matches!(
            r.is_critical(tile(5, 5)),
            Err(Error::NotContaminated { x: 5, y: 5 })
        ));
    }

    #[test]
    fn singleton_is_noncritical_by_convention() {
        let r = RegionState::new([tile(4, -7)]);
        assert!(!r.is_critical(tile(4, -7)).unwrap());
    }

    #[test]
    fn holes_of_ring_is_one() {
        let mut tiles = block(3, 3);
        tiles.retain(|t| *t != tile(1, 1));
        let r = RegionState::new(tiles);
        assert_eq!(r.holes(), 1);
        assert_eq!(RegionState::new(block(3, 3)).holes(), 0);
        assert_eq!(RegionState::empty().holes(), 0);
    }

    #[test]
    fn holes_track_incremental_edits() {
        let mut r = RegionState::new(block(3, 3));
        r.remove(tile(1, 1));
        assert_eq!(r.holes(), 1);
        r.insert(tile(1, 1));
        assert_eq!(r.holes(), 0);
        r.check_consistency();
    }

    #[test]
    fn sphere_potential_known_values() {
        assert_eq!(sphere_potential_size(1, 0).unwrap(), 2);
        assert_eq!(sphere_potential_size(13, 0).unwrap(), 10);
        assert_eq!(sphere_potential_size(20000, 150).unwrap(), 398);
        assert!(matches!(
            sphere_potential_size(5, 5),
            Err(Error::BoundDomain { s: 5, k: 5 })
        ));
    }

    #[test]
    fn connectivity_flood_fill() {
        assert!(RegionState::new(block(2, 3)).is_connected());
        assert!(RegionState::empty().is_connected());
        assert!(!RegionState::new([tile(0, 0), tile(2, 0)]).is_connected());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Caches match their from-scratch recomputation after any edit mix.
        #[test]
        fn caches_survive_random_edits(ops in proptest::collection::vec((0i64..6, 0i64..6, any::<bool>()), 1..120)) {
            let mut r = RegionState::empty();
            for (x, y, add) in ops {
                if add {
                    r.insert(Tile::new(x, y));
                } else {
                    r.remove(Tile::new(x, y));
                }
            }
            r.check_consistency();
        }

        /// is_critical answers exactly whether removal splits the region.
        #[test]
        fn criticality_matches_removal_outcome(seed_tiles in proptest::collection::vec((0i64..8, 0i64..8), 1..40)) {
            // Grow a connected region from the seeds, then probe every tile.
            let mut r = RegionState::new([Tile::new(0, 0)]);
            for (x, y) in seed_tiles {
                let t = Tile::new(x, y);
                if t.neighbors4().iter().any(|n| r.contains(*n)) {
                    r.insert(t);
                }
            }
            prop_assert!(r.is_connected());
            let tiles: Vec<Tile> = r.tiles().iter().copied().collect();
            for v in tiles {
                let critical = r.is_critical(v).unwrap();
                let mut without = r.clone();
                without.remove(v);
                prop_assert_eq!(critical, !without.is_connected());
            }
        }

        /// Potential boundary is disjoint from the region and 4-adjacent to it.
        #[test]
        fn potential_boundary_sits_just_outside(seed_tiles in proptest::collection::vec((0i64..8, 0i64..8), 1..40)) {
            let mut r = RegionState::new([Tile::new(0, 0)]);
            for (x, y) in seed_tiles {
                let t = Tile::new(x, y);
                if t.neighbors4().iter().any(|n| r.contains(*n)) {
                    r.insert(t);
                }
            }
            for t in r.potential_boundary() {
                prop_assert!(!r.contains(*t));
                prop_assert!(t.neighbors4().iter().any(|n| r.contains(*n)));
            }
        }
    }
}
