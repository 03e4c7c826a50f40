use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CabinError, SeatMap};

/// Row density index: seat-bearing rows over the reference maximum, scaled to 100.
///
/// Rows whose cells are all absent (skipped labels such as row 13) are not
/// counted. Values above 100 are legal and logged as a warning.
pub fn irowdens(map: &SeatMap) -> f64 {
    let value = 100.0 * map.seat_row_count() as f64 / map.refmax_rows as f64;
    if value > 100.0 {
        log::warn!(
            "IROWDENS {value:.3} exceeds 100 for {} ({} rows vs reference {})",
            map.aircraft_model,
            map.seat_row_count(),
            map.refmax_rows
        );
    }
    value
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PitchWeighting {
    /// Each seat-bearing row counts once.
    #[default]
    Rows,
    /// Each installed seat counts once (sensitivity variant).
    Seats,
}

/// Pitch index: mean row pitch over the reference maximum pitch, scaled to 100.
pub fn ipitch(map: &SeatMap) -> f64 {
    ipitch_weighted(map, PitchWeighting::Rows)
}

pub fn ipitch_weighted(map: &SeatMap, weighting: PitchWeighting) -> f64 {
    let (sum, weight) = map.seat_rows().fold((0.0, 0.0), |(s, w), row| {
        let wt = match weighting {
            PitchWeighting::Rows => 1.0,
            PitchWeighting::Seats => row.seat_count() as f64,
        };
        (s + wt * row.pitch_in, w + wt)
    });
    let value = 100.0 * (sum / weight) / map.refmax_pitch_in;
    if value > 100.0 {
        log::warn!("IPITCH {value:.3} exceeds 100 for {}", map.aircraft_model);
    }
    value
}

/// A homogeneous section of the cabin: `(pitch, rows, seats abreast)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CabinZone {
    pub pitch_in: f64,
    pub rows: u32,
    pub abreast: u32,
}

impl FromStr for CabinZone {
    type Err = CabinError;

    /// Parses `PxRxA`, e.g. `34x7x6`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CabinError::BadZone(s.to_string());
        let parts: Vec<&str> = s.trim().split(['x', 'X']).collect();
        let [p, r, a] = parts.as_slice() else {
            return Err(bad());
        };
        let pitch_in: f64 = p.trim().parse().map_err(|_| bad())?;
        if !(pitch_in.is_finite() && pitch_in > 0.0) {
            return Err(bad());
        }
        Ok(CabinZone {
            pitch_in,
            rows: r.trim().parse().map_err(|_| bad())?,
            abreast: a.trim().parse().map_err(|_| bad())?,
        })
    }
}

pub fn capacity_from_zones(zones: &[CabinZone]) -> u64 {
    zones.iter().map(|z| z.rows as u64 * z.abreast as u64).sum()
}
