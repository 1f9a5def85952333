//! Deterministic initial-shape generators: digital sphere, square, cross.

use std::collections::BTreeSet;

use crate::region::RegionState;
use crate::tile::Tile;
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ShapeKind {
    DigitalSphere,
    Square,
    Cross,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [
        ShapeKind::DigitalSphere,
        ShapeKind::Square,
        ShapeKind::Cross,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::DigitalSphere => "digital_sphere",
            ShapeKind::Square => "square",
            ShapeKind::Cross => "cross",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "digital_sphere" | "sphere" => Ok(ShapeKind::DigitalSphere),
            "square" => Ok(ShapeKind::Square),
            "cross" => Ok(ShapeKind::Cross),
            other => Err(Error::ConfigValidation(format!(
                "unknown shape {other:?} (expected digital_sphere, square, or cross)"
            ))),
        }
    }
}

/// Builds a 4-connected region of exactly `target_size` tiles around the
/// origin. Tiles are taken in nondecreasing metric order (Manhattan for the
/// sphere, Chebyshev for square and cross) with lexicographic (y, x)
/// tie-break; a candidate not yet 4-adjacent to the placed set is deferred
/// until it is, which keeps every prefix connected. For the sphere the
/// deferral never fires; for the square it reorders only diagonal ring
/// openers.
pub fn generate_shape(kind: ShapeKind, target_size: u64) -> Result<RegionState> {
    if target_size < 1 {
        return Err(Error::EmptyShape);
    }
    let width = cross_width(target_size);
    let mut region = RegionState::empty();
    let mut pending: BTreeSet<(u64, Tile)> = BTreeSet::new();
    let mut next_ring = 0u64;
    while region.size() < target_size {
        let pick = pending
            .iter()
            .find(|(_, t)| region.is_empty() || t.neighbors4().iter().any(|n| region.contains(*n)))
            .copied();
        match pick {
            Some(entry) => {
                pending.remove(&entry);
                region.insert(entry.1);
            }
            None => {
                for t in ring_tiles(kind, next_ring, width) {
                    pending.insert((next_ring, t));
                }
                next_ring += 1;
            }
        }
    }
    Ok(region)
}

/// Bar width of the cross shape: max(1, round(sqrt(n)/3)).
pub fn cross_width(target_size: u64) -> i64 {
    (((target_size as f64).sqrt() / 3.0).round() as i64).max(1)
}

/// The metric ring at radius r for the given shape, in (y, x) order.
fn ring_tiles(kind: ShapeKind, r: u64, width: i64) -> Vec<Tile> {
    let r = r as i64;
    if r == 0 {
        return vec![Tile::new(0, 0)];
    }
    let mut out = Vec::new();
    match kind {
        ShapeKind::DigitalSphere => {
            for y in -r..=r {
                let rem = r - y.abs();
                if rem == 0 {
                    out.push(Tile::new(0, y));
                } else {
                    out.push(Tile::new(-rem, y));
                    out.push(Tile::new(rem, y));
                }
            }
        }
        ShapeKind::Square => {
            for y in -r..=r {
                if y.abs() == r {
                    for x in -r..=r {
                        out.push(Tile::new(x, y));
                    }
                } else {
                    out.push(Tile::new(-r, y));
                    out.push(Tile::new(r, y));
                }
            }
        }
        ShapeKind::Cross => {
            let lo = -((width - 1) / 2);
            let hi = width / 2;
            for y in -r..=r {
                if y.abs() == r {
                    for x in -r..=r {
                        if (lo..=hi).contains(&y) || (lo..=hi).contains(&x) {
                            out.push(Tile::new(x, y));
                        }
                    }
                } else {
                    for x in [-r, r] {
                        if (lo..=hi).contains(&y) || (lo..=hi).contains(&x) {
                            out.push(Tile::new(x, y));
                        }
                    }
                }
            }
        }
    }
    out
}
