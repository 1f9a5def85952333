//! Contamination spreading policies and the seeded replication RNG.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::region::RegionState;
use crate::tile::Tile;
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum SpreadVariant {
    /// Every tile of the potential boundary becomes contaminated whenever
    /// `step % d == 0` (the step counter starts at 0, so the first spread
    /// lands in S_1).
    Deterministic { d: u64 },
    /// Every tile of the potential boundary independently becomes
    /// contaminated with probability p, one draw per tile in (y, x) order.
    Uniform { p: f64 },
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct SpreadPolicy {
    pub variant: SpreadVariant,
    /// Spread reaches tiles within this many grid steps. Only radius 1 is
    /// supported; larger radii are accepted by the type and rejected by
    /// `spread_step`.
    pub neighborhood_radius: u32,
}

impl SpreadPolicy {
    pub fn uniform(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParam {
                name: "p",
                value: format!("{p}"),
                reason: "spread probability must lie in [0, 1]",
            });
        }
        Ok(SpreadPolicy {
            variant: SpreadVariant::Uniform { p },
            neighborhood_radius: 1,
        })
    }

    pub fn deterministic(d: u64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidParam {
                name: "d",
                value: format!("{d}"),
                reason: "spread period must be at least 1",
            });
        }
        Ok(SpreadPolicy {
            variant: SpreadVariant::Deterministic { d },
            neighborhood_radius: 1,
        })
    }
}

/// One independent, reproducible draw sequence per replication. The same
/// (seed, stream_id) pair yields bit-identical draws on every platform.
#[derive(Clone, Debug)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    /// True with probability p. Draws one f64 regardless of p, so the draw
    /// sequence stays aligned across different probabilities.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }
}

/// Applies one spreading event to the region: contaminates tiles of the
/// potential boundary according to the policy and returns the tiles added,
/// in (y, x) order. Does not advance the step counter; the simulation loop
/// owns that, so a deterministic policy spreads on steps 0, d, 2d, ... and
/// the growth lands in the next step's size.
pub fn spread_step(
    region: &mut RegionState,
    policy: &SpreadPolicy,
    rng: &mut RngStream,
) -> Result<Vec<Tile>> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if policy.neighborhood_radius != 1 {
        return Err(Error::UnsupportedRadius(policy.neighborhood_radius));
    }
    let added: Vec<Tile> = match policy.variant {
        SpreadVariant::Deterministic { d } => {
            if region.step().is_multiple_of(d) {
                region.potential_boundary().iter().copied().collect()
            } else {
                Vec::new()
            }
        }
        SpreadVariant::Uniform { p } => region
            .potential_boundary()
            .iter()
            .copied()
            .filter(|_| rng.bernoulli(p))
            .collect(),
    };
    for t in &added {
        region.insert(*t);
    }
    Ok(added)
}
