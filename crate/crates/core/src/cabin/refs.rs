use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CabinError, SeatMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub model: String,
    pub refmax_rows: u32,
    pub refmax_pitch_in: f64,
}

/// Reference maxima per aircraft model, loaded from a
/// `model,refmax_rows,refmax_pitch_in` CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceMaxima {
    by_model: BTreeMap<String, ReferenceRow>,
}

impl ReferenceMaxima {
    pub fn from_csv(text: &str) -> Result<Self, CabinError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut by_model = BTreeMap::new();
        for (i, rec) in reader.deserialize::<ReferenceRow>().enumerate() {
            let row = rec.map_err(|e| CabinError::References(format!("record {}: {e}", i + 1)))?;
            if row.refmax_rows < 1 || !(row.refmax_pitch_in > 0.0) {
                return Err(CabinError::References(format!("non-positive maxima for {}", row.model)));
            }
            by_model.insert(row.model.clone(), row);
        }
        Ok(ReferenceMaxima { by_model })
    }

    pub fn get(&self, model: &str) -> Option<&ReferenceRow> {
        self.by_model.get(model)
    }

    /// Replaces the map's header maxima with the reference entry for its model.
    pub fn apply(&self, map: &SeatMap) -> Result<SeatMap, CabinError> {
        let r = self
            .get(&map.aircraft_model)
            .ok_or_else(|| CabinError::References(format!("no entry for model {}", map.aircraft_model)))?;
        let mut out = map.clone();
        out.refmax_rows = r.refmax_rows;
        out.refmax_pitch_in = r.refmax_pitch_in;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn bundled_references_cover_every_fixture() {
        let refs = fixtures::reference_maxima();
        for id in fixtures::SEATMAP_IDS {
            let map = fixtures::seatmap(id).unwrap();
            let applied = refs.apply(&map).unwrap();
            assert_eq!(applied, map, "{id} header disagrees with the reference file");
        }
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(ReferenceMaxima::from_csv("model,refmax_rows,refmax_pitch_in\nX,0,30\n").is_err());
        assert!(ReferenceMaxima::from_csv("model,refmax_rows,refmax_pitch_in\nX,abc,30\n").is_err());
    }
}
