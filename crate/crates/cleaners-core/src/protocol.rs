//! The swarm cleaning protocol and the idealized boundary cleaner.

use std::collections::HashMap;

use crate::region::RegionState;
use crate::tile::Tile;
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub fn offset(self) -> (i64, i64) {
        match self {
            Direction::North => (0, 1),
            Direction::East => (1, 0),
            Direction::South => (0, -1),
            Direction::West => (-1, 0),
        }
    }

    pub fn right(self) -> Self {
        match self {
            Direction::North => Direction::East,
            Direction::East => Direction::South,
            Direction::South => Direction::West,
            Direction::West => Direction::North,
        }
    }

    pub fn left(self) -> Self {
        self.right().right().right()
    }

    pub fn back(self) -> Self {
        self.right().right()
    }

    pub fn step_from(self, t: Tile) -> Tile {
        let (dx, dy) = self.offset();
        Tile::new(t.x + dx, t.y + dy)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AgentState {
    pub id: u32,
    pub position: Tile,
    pub orientation: Direction,
}

#[derive(Clone, Debug)]
pub struct AgentTeam {
    pub agents: Vec<AgentState>,
    pub start_point: Tile,
}

impl AgentTeam {
    /// Places all k agents on the lexicographically smallest boundary tile,
    /// facing East.
    pub fn deploy(region: &RegionState, k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParam {
                name: "k",
                value: format!("{k}"),
                reason: "at least one agent is required",
            });
        }
        let start = *region.boundary().iter().min().ok_or(Error::EmptyRegion)?;
        let agents = (0..k)
            .map(|id| AgentState {
                id,
                position: start,
                orientation: Direction::East,
            })
            .collect();
        Ok(AgentTeam {
            agents,
            start_point: start,
        })
    }
}

fn occupancy_of(team: &AgentTeam) -> HashMap<Tile, u32> {
    let mut occ = HashMap::new();
    for a in &team.agents {
        *occ.entry(a.position).or_insert(0) += 1;
    }
    occ
}

/// Traversal preference: right, straight, left, back relative to the current
/// orientation. The first pass accepts only contaminated unoccupied tiles;
/// the second accepts any contaminated tile.
fn next_move(
    region: &RegionState,
    occupancy: &HashMap<Tile, u32>,
    pos: Tile,
    orientation: Direction,
) -> Option<(Tile, Direction)> {
    let order = [
        orientation.right(),
        orientation,
        orientation.left(),
        orientation.back(),
    ];
    for require_unoccupied in [true, false] {
        for dir in order {
            let t = dir.step_from(pos);
            if !region.contains(t) {
                continue;
            }
            if require_unoccupied && occupancy.get(&t).copied().unwrap_or(0) > 0 {
                continue;
            }
            return Some((t, dir));
        }
    }
    None
}

/// Moves one agent from `from` to `to`, keeping the occupancy map in sync.
fn relocate(occupancy: &mut HashMap<Tile, u32>, agent: &mut AgentState, to: Tile, dir: Direction) {
    let n = occupancy
        .get_mut(&agent.position)
        .expect("agent position tracked in occupancy");
    *n -= 1;
    if *n == 0 {
        occupancy.remove(&agent.position);
    }
    *occupancy.entry(to).or_insert(0) += 1;
    agent.position = to;
    agent.orientation = dir;
}

/// Picks the displacement target for an agent standing on a tile that was
/// just cleaned: the lexicographically smallest contaminated 4-neighbor,
/// preferring unoccupied ones. Right after a non-critical boundary tile is
/// removed from a region that is still nonempty, such a neighbor always
/// exists, because the removed tile's contaminated component stayed attached
/// through one of its 4-neighbors.
fn displacement_target(
    region: &RegionState,
    occupancy: &HashMap<Tile, u32>,
    cleaned: Tile,
) -> Option<Tile> {
    let mut any: Option<Tile> = None;
    let mut free: Option<Tile> = None;
    let mut candidates = cleaned.neighbors4();
    candidates.sort();
    for t in candidates {
        if !region.contains(t) {
            continue;
        }
        if any.is_none() {
            any = Some(t);
        }
        if free.is_none() && occupancy.get(&t).copied().unwrap_or(0) == 0 {
            free = Some(t);
        }
    }
    free.or(any)
}

fn direction_between(from: Tile, to: Tile) -> Direction {
    match (to.x - from.x, to.y - from.y) {
        (1, 0) => Direction::East,
        (-1, 0) => Direction::West,
        (0, 1) => Direction::North,
        (0, -1) => Direction::South,
        _ => unreachable!("displacement is always to a 4-neighbor"),
    }
}

/// Advances every agent by one protocol step, in id order, and returns the
/// tiles cleaned this step in cleaning order.
///
/// Each agent on a non-critical boundary tile cleans it and then moves; any
/// other agent cleans nothing and just moves. When a tile is cleaned, every
/// agent still standing on it is immediately displaced to an adjacent
/// contaminated tile, so an agent is never left on clean ground while the
/// region is nonempty.
pub fn protocol_step(region: &mut RegionState, team: &mut AgentTeam) -> Result<Vec<Tile>> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    for a in &team.agents {
        if !region.contains(a.position) {
            return Err(Error::InvariantBreach(format!(
                "agent {} began a step on clean tile ({}, {})",
                a.id, a.position.x, a.position.y
            )));
        }
    }
    let mut occupancy = occupancy_of(team);
    let mut cleaned = Vec::new();
    for i in 0..team.agents.len() {
        if region.is_empty() {
            break;
        }
        let pos = team.agents[i].position;
        debug_assert!(region.contains(pos));
        let cleans = region.boundary().contains(&pos) && !region.is_critical(pos)?;
        if cleans {
            region.remove(pos);
            cleaned.push(pos);
            if region.is_empty() {
                break;
            }
            for j in 0..team.agents.len() {
                if j == i || team.agents[j].position != pos {
                    continue;
                }
                let target = displacement_target(region, &occupancy, pos)
                    .expect("cleaned tile keeps a contaminated 4-neighbor");
                let dir = direction_between(pos, target);
                relocate(&mut occupancy, &mut team.agents[j], target, dir);
            }
        }
        let pos = team.agents[i].position;
        let orientation = team.agents[i].orientation;
        match next_move(region, &occupancy, pos, orientation) {
            Some((to, dir)) => relocate(&mut occupancy, &mut team.agents[i], to, dir),
            None => {
                debug_assert!(
                    !cleans,
                    "an agent that cleaned its tile always has somewhere to go"
                );
            }
        }
    }
    Ok(cleaned)
}

/// One step of the idealized cleaner: removes up to k boundary tiles without
/// ever disconnecting the region, taking tiles farthest from the centroid
/// first (ties broken lexicographically). Returns the tiles removed.
pub fn perfect_cleaner_step(region: &mut RegionState, k: u64) -> Vec<Tile> {
    let quota = k.min(region.size()) as usize;
    let mut cleaned = Vec::with_capacity(quota);
    while cleaned.len() < quota {
        let n = region.size() as i128;
        let (sx, sy) = region.centroid_sums();
        let mut order: Vec<(i128, Tile)> = region
            .boundary()
            .iter()
            .map(|&t| {
                let dx = n * t.x as i128 - sx;
                let dy = n * t.y as i128 - sy;
                (dx * dx + dy * dy, t)
            })
            .collect();
        order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let before = cleaned.len();
        for (_, t) in order {
            if cleaned.len() >= quota {
                break;
            }
            if region.contains(t) && !region.is_critical(t).expect("tile present") {
                region.remove(t);
                cleaned.push(t);
            }
        }
        if cleaned.len() == before {
            break;
        }
    }
    cleaned
}
