//! Bundled data: seat maps for the eight reference layouts, the reference
//! maxima file, and the aggregate passenger-dispersion counts.

use std::collections::BTreeMap;

use crate::cabin::{parse_seatmap, CabinError, DispersionTable, ReferenceMaxima, SeatMap};

pub const SEATMAP_IDS: [&str; 8] = [
    "gol_b738_177",
    "gol_b738_178",
    "azul_at76_68",
    "azul_e195_118",
    "avianca_a319_132",
    "avianca_a320_162",
    "tam_a320_156",
    "tam_a320_174",
];

const SEATMAP_SOURCES: [&str; 8] = [
    include_str!("../data/seatmaps/gol_b738_177.smap"),
    include_str!("../data/seatmaps/gol_b738_178.smap"),
    include_str!("../data/seatmaps/azul_at76_68.smap"),
    include_str!("../data/seatmaps/azul_e195_118.smap"),
    include_str!("../data/seatmaps/avianca_a319_132.smap"),
    include_str!("../data/seatmaps/avianca_a320_162.smap"),
    include_str!("../data/seatmaps/tam_a320_156.smap"),
    include_str!("../data/seatmaps/tam_a320_174.smap"),
];

pub const REFERENCE_MAXIMA_CSV: &str = include_str!("../data/reference_maxima.csv");
pub const DISPERSION_CSV: &str = include_str!("../data/dispersion_counts.csv");

pub fn seatmap_source(id: &str) -> Option<&'static str> {
    SEATMAP_IDS.iter().position(|s| *s == id).map(|i| SEATMAP_SOURCES[i])
}

/// Parses one bundled map; `None` for an unknown id.
pub fn seatmap(id: &str) -> Option<SeatMap> {
    seatmap_source(id).map(|src| parse_seatmap(src).expect("bundled seat map parses"))
}

pub fn all_seatmaps() -> BTreeMap<String, SeatMap> {
    SEATMAP_IDS.iter().map(|id| (id.to_string(), seatmap(id).unwrap())).collect()
}

pub fn reference_maxima() -> ReferenceMaxima {
    ReferenceMaxima::from_csv(REFERENCE_MAXIMA_CSV).expect("bundled reference file parses")
}

pub fn dispersion() -> Result<DispersionTable, CabinError> {
    DispersionTable::from_csv(DISPERSION_CSV)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_parse_with_published_counts() {
        let expected = [177, 178, 68, 118, 132, 162, 156, 174];
        for (id, n) in SEATMAP_IDS.iter().zip(expected) {
            assert_eq!(seatmap(id).unwrap().seat_count(), n, "{id}");
        }
    }

    #[test]
    fn serialize_round_trip() {
        for (id, map) in all_seatmaps() {
            assert_eq!(parse_seatmap(&map.to_smap()).unwrap(), map, "{id}");
        }
    }
}
